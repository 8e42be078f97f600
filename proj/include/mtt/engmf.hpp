#pragma once

#include <utility>
#include <vector>

#include "mtt/kdtree.hpp"
#include "mtt/types.hpp"

namespace mtt {

/// Dimensionless canonical units: r/Re and v*sqrt(Re/mu) make position and
/// velocity commensurate for neighbor metrics.
struct CanonicalScaler {
  double Re = kEarthRadius;
  double mu = kMuEarth;

  double vel_unit() const { return std::sqrt(mu / Re); }
  /// Canonical acceleration unit mu/Re^2.
  double accel_unit() const { return mu / (Re * Re); }

  Vec6 to_canonical(const Vec6& x) const {
    Vec6 c;
    c.head<3>() = x.head<3>() / Re;
    c.tail<3>() = x.tail<3>() / vel_unit();
    return c;
  }
  Vec6 from_canonical(const Vec6& c) const {
    Vec6 x;
    x.head<3>() = c.head<3>() * Re;
    x.tail<3>() = c.tail<3>() * vel_unit();
    return x;
  }
  /// Physical = diag(phys_scale) * canonical.
  Vec6 phys_scale() const {
    Vec6 s;
    s.head<3>().setConstant(Re);
    s.tail<3>().setConstant(vel_unit());
    return s;
  }
};

struct MixtureComponent {
  VecX mean;
  MatX cov;
  double weight = 0.0;
};

struct GaussianMixture {
  std::vector<MixtureComponent> components;

  int size() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : (int)components.front().mean.size(); }
  void normalize_weights();
  VecX mean() const;
  /// Law of total covariance: sum_i w_i (P_i + (m_i - m)(m_i - m)^T).
  MatX total_covariance() const;
};

/// Gated kNN kernel covariance (canonical units): displacements from point i
/// to every point within the distance of its k-th nearest neighbor (self
/// excluded from the neighbor count), normalized by k - 1. Near-singular
/// results get eps*I jitter unless disabled.
Mat6 knn_gated_covariance(const KdTree& tree, int i, int k, bool jitter = true);

/// Convenience overload building a throwaway tree (tests, one-off queries).
Mat6 knn_gated_covariance(const MatX& pts_canonical, int i, int k, bool jitter = true);

/// Turns a weighted particle cloud (physical units, 6 x N) into a mixture of
/// N Gaussian kernels: component i has mean = particle i, covariance = gated
/// kNN covariance mapped back to physical units, weight = particle weight.
GaussianMixture regularize(const MatX& states_physical, const VecX& weights, int k,
                           const CanonicalScaler& sc, int threads = 1);

/// Silverman's rule-of-thumb shared kernel covariance (physical units):
/// (4/(d+2))^(2/(d+4)) N^(-2/(d+4)) * weighted empirical covariance.
Mat6 silverman_covariance(const MatX& states_physical, const VecX& weights);

/// Classic kNN kernel: isotropic (h_i)^2 I in canonical units.
Mat6 classic_knn_covariance(const KdTree& tree, int i, int k);

/// log of sum_i w_i N(x; m_i, P_i); throws naming the component index if a
/// covariance is singular.
double mixture_logpdf(const GaussianMixture& mix, const VecX& x);

/// (sigma_pos [km], sigma_vel [km/s]): square roots of the position and
/// velocity trace blocks of the total mixture covariance.
std::pair<double, double> mixture_total_sigma(const GaussianMixture& mix);

}  // namespace mtt
