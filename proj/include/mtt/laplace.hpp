#pragma once

#include <functional>
#include <utility>

#include "mtt/rng.hpp"
#include "mtt/types.hpp"

namespace mtt {

/// Multivariate Laplace distribution with mean 0 and covariance Q.
///
/// Density: f(t) = 2/sqrt(|2 pi Q|) (t'Q^-1 t / 2)^{v/2} K_v(sqrt(2 t'Q^-1 t)),
/// v = (2-d)/2. All evaluation is done in log space with exponentially scaled
/// Bessel functions; the raw density underflows well inside the usable range.
class MvLaplace {
 public:
  explicit MvLaplace(MatX Q);

  int dim() const { return d_; }
  double order() const { return 0.5 * (2.0 - d_); }
  const MatX& covariance() const { return Q_; }
  double logdet() const { return logdet_; }

  /// t' Q^{-1} t.
  double mahal2(const VecX& t) const;

  /// Log density. Returns +infinity at t = 0 for d >= 2 (the density is
  /// singular at the origin); the univariate case is finite everywhere.
  double logpdf(const VecX& t) const;

  /// Draw: t = sqrt(tau) * r with tau ~ Exp(1), r ~ N(0, Q).
  VecX sample(Rng& rng) const;

  /// Log thrust cost: -sqrt(2)||t||_{Q^-1} + (1 - v) log ||t||_{Q^-1}.
  /// Diagnostic quantity; errors at t = 0.
  double log_thrust_cost(const VecX& t) const;

  /// Additive constant of the large-||t|| expansion of logpdf:
  /// logpdf(t) -> asymptote_const() - sqrt(2)||t|| + (v - 1/2) log ||t||.
  double asymptote_const() const;

  /// Large-||t|| approximation of the joint log posterior of (x0, t) given a
  /// measurement y, up to the thrust-density normalization constant:
  /// quadratic prior term + quadratic innovation term + thrust asymptote.
  /// measurement_fn maps (x0, t) to the predicted measurement h(x_f).
  double log_joint_posterior_approx(
      const VecX& x0, const VecX& t, const VecX& xbar0, const MatX& P0, const VecX& y,
      const MatX& R, const MatX& H, const MatX& Pf,
      const std::function<VecX(const VecX&, const VecX&)>& measurement_fn) const;

  /// Log density expressed through the Mahalanobis square u = t'Q^-1 t; lets
  /// mixture weights reuse one factorization across scaled copies of Q.
  static double logpdf_from_u(double u, int d, double logdet_q);

 private:
  MatX Q_;
  Eigen::LLT<MatX> llt_;
  double logdet_ = 0.0;
  int d_ = 0;
};

/// Proposal mixture of scaled copies of a base multivariate Laplace:
/// component 0 is the base (scale 1, weight alpha_0), component l >= 1 has
/// covariance a_l^2 Q and weight alpha_l.
struct ProposalMixture {
  MvLaplace base;
  VecX weights;  // alpha_0..alpha_n, positive, sum 1
  VecX scales;   // a_1..a_n, each > 1

  ProposalMixture(MvLaplace base_, VecX weights_, VecX scales_);

  int n_components() const { return static_cast<int>(weights.size()); }
  double scale_of(int l) const { return l == 0 ? 1.0 : scales[l - 1]; }

  /// The experiment default: n components with log-spaced standard deviations
  /// from sigma_filter up to sigma_max, smallest component weighted alpha0 and
  /// the rest sharing the remainder equally. Q = sigma_filter^2 I.
  static ProposalMixture log_spaced(int d, double sigma_filter, double sigma_max,
                                    int n_components = 9, double alpha0 = 0.3);

  /// Draw a sample and the index of the component that produced it.
  std::pair<VecX, int> sample(Rng& rng) const;

  /// Importance weight w = f(t; Q) / sum_l alpha_l f(t; a_l^2 Q).
  /// At t = 0 with d >= 2 both numerator and denominator are singular; the
  /// limit of the ratio, 1 / sum_l alpha_l a_l^-2, is returned.
  double importance_weight(const VecX& t) const;
  double log_importance_weight(const VecX& t) const;
};

/// log(sum_i exp(v_i)) computed stably; -inf for an empty/all -inf input.
double logsumexp(const VecX& v);

}  // namespace mtt
