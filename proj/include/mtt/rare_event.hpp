#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "mtt/types.hpp"

namespace mtt {

/// Scalar/low-dimensional laboratory for the ratio-estimator analysis: a
/// Laplace prior observed through Gaussian noise, estimated by importance
/// sampling from a wider Laplace proposal.
struct RatioExperimentConfig {
  double lambda_prior = 1.0;     // Laplace rate of the prior
  double sigma_y = 1.0;          // measurement noise std
  int particles = 2500;          // samples per filter
  double lambda_proposal = 1.0;  // Laplace rate of the proposal
  double y = 0.0;                // observed measurement
  int dims = 1;                  // 1 or 6 (isotropic multivariate prior)
  int trials = 1000;             // Monte Carlo repetitions
};

/// Self-normalized ratio estimate sum w x L / sum w L.
/// Throws "degenerate update" when every weighted likelihood vanishes.
double ratio_mmse(std::span<const double> samples, std::span<const double> weights,
                  const std::function<double(double)>& likelihood);

struct PredictedRmse {
  double rmse = 0.0;
  bool approximation_valid = true;  // false when y is too small for the
                                    // Laplace-tail closed forms
};

/// Closed-form expected RMSE of the ratio estimate under the 1-dim
/// Laplace/Gaussian model (ratio-moment Taylor expansion evaluated with the
/// exponentially tilted Gaussian integrals). Also used as the prediction for
/// the 6-dim variant, whose observed-dimension marginal is the same
/// univariate Laplace.
PredictedRmse predicted_rmse(const RatioExperimentConfig& cfg);

/// Near-exact MMSE by adaptive quadrature of the true posterior.
double quadrature_mmse(double y, double lambda_prior, double sigma_y);

struct RmseGrid {
  std::vector<double> y_grid;
  std::vector<double> sigma_grid;  // proposal std sigma~ = sqrt(2)/lambda~
  MatX empirical;                  // y rows, sigma columns
  MatX predicted;

  /// CSV rows (y, sigma_proposal, rmse_empirical, rmse_predicted).
  void write_csv(std::ostream& os) const;

  /// Per-row argmin of the empirical RMSE.
  std::vector<double> empirical_optimal_sigma() const;
};

/// Monte Carlo RMSE (against the quadrature MMSE) for each (y, sigma~) cell;
/// cfg.lambda_proposal and cfg.y are overridden per cell.
RmseGrid empirical_rmse_grid(const std::vector<double>& y_grid,
                             const std::vector<double>& sigma_grid,
                             const RatioExperimentConfig& cfg, uint64_t seed,
                             int threads = 1);

/// Default log-spaced grids mirroring the published plots: y in [0, 8],
/// sigma~ in [sigma_prior, 20].
std::vector<double> default_y_grid(int n = 25);
std::vector<double> default_sigma_grid(double lambda_prior, int n = 25);

}  // namespace mtt
