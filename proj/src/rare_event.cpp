#include "mtt/rare_event.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mtt/laplace.hpp"
#include "mtt/parallel.hpp"
#include "mtt/rng.hpp"

namespace mtt {

namespace {

double laplace_logpdf(double x, double lambda) {
  return std::log(0.5 * lambda) - lambda * std::abs(x);
}

double univariate_laplace_draw(double lambda, Rng& rng) {
  // difference of exponentials keeps the transform branch-free
  return (rng.exponential() - rng.exponential()) / lambda;
}

double gaussian_likelihood(double y, double x, double sigma) {
  const double z = (y - x) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

}  // namespace

double ratio_mmse(std::span<const double> samples, std::span<const double> weights,
                  const std::function<double(double)>& likelihood) {
  if (samples.size() != weights.size() || samples.size() < 2)
    throw std::invalid_argument("need matched samples/weights, at least two");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double wl = weights[i] * likelihood(samples[i]);
    num += samples[i] * wl;
    den += wl;
  }
  if (den <= 0.0) throw std::runtime_error("degenerate update");
  return num / den;
}

PredictedRmse predicted_rmse(const RatioExperimentConfig& cfg) {
  const double lam = cfg.lambda_prior, lamt = cfg.lambda_proposal;
  const double s = cfg.sigma_y, y = cfg.y;
  const double N = cfg.particles;

  PredictedRmse out;
  const double mmse = y - lam * s * s;
  out.approximation_valid = (y > lam * s * s + s) && (mmse > 0.0);

  // Tilted-Gaussian second moments relative to A^2, AB, B^2. With
  // beta = 2 lam - lamt:
  //   I0/B^2 = exp(lamt y + s^2 (beta^2/4 - lam^2)) / (s sqrt(pi) lamt)
  //   I1/(AB) = (I0/B^2) m / mmse,  m = y - beta s^2 / 2
  //   I2/A^2 = (I0/B^2) (m^2 + s^2/2) / mmse^2
  const double beta = 2.0 * lam - lamt;
  const double log_r0 = -std::log(s * std::sqrt(M_PI) * lamt) + lamt * y +
                        s * s * (0.25 * beta * beta - lam * lam);
  const double r0 = std::exp(log_r0);
  const double m = y - 0.5 * beta * s * s;
  const double safe_mmse = (mmse == 0.0) ? 1e-300 : mmse;
  const double r1 = r0 * m / safe_mmse;
  const double r2 = r0 * (m * m + 0.5 * s * s) / (safe_mmse * safe_mmse);

  const double bias = safe_mmse * (r1 - r0) / N;
  const double var = safe_mmse * safe_mmse * (r2 - 2.0 * r1 + r0) / N;
  out.rmse = std::sqrt(bias * bias + std::max(var, 0.0));
  return out;
}

double quadrature_mmse(double y, double lambda_prior, double sigma_y) {
  using boost::math::quadrature::gauss_kronrod;
  auto num_f = [&](double x) {
    return x * gaussian_likelihood(y, x, sigma_y) *
           std::exp(laplace_logpdf(x, lambda_prior));
  };
  auto den_f = [&](double x) {
    return gaussian_likelihood(y, x, sigma_y) *
           std::exp(laplace_logpdf(x, lambda_prior));
  };
  // Split at the prior kink; bounds cover both tails comfortably.
  const double lo = std::min(0.0, y) - 12.0 * sigma_y - 12.0 / lambda_prior;
  const double hi = std::max(0.0, y) + 12.0 * sigma_y + 12.0 / lambda_prior;
  double num = 0.0, den = 0.0;
  for (const auto& [a, b] : {std::pair{lo, 0.0}, std::pair{0.0, hi}}) {
    num += gauss_kronrod<double, 61>::integrate(num_f, a, b, 12, 1e-13);
    den += gauss_kronrod<double, 61>::integrate(den_f, a, b, 12, 1e-13);
  }
  return num / den;
}

namespace {

// One particle-filter trial; returns the ratio estimate.
double run_trial(const RatioExperimentConfig& cfg, Rng& rng) {
  const int N = cfg.particles;
  const double lam = cfg.lambda_prior, lamt = cfg.lambda_proposal;
  std::vector<double> samples(N), weights(N);
  if (cfg.dims == 1) {
    for (int i = 0; i < N; ++i) {
      const double x = univariate_laplace_draw(lamt, rng);
      samples[i] = x;
      weights[i] = std::exp(laplace_logpdf(x, lam) - laplace_logpdf(x, lamt));
    }
  } else {
    // Isotropic multivariate Laplace prior/proposal; the measurement sees
    // dimension 0 only, but the weight is the full-dimensional ratio.
    const int d = cfg.dims;
    const double sig_p = std::sqrt(2.0) / lam;   // per-axis prior std
    const double sig_q = std::sqrt(2.0) / lamt;  // per-axis proposal std
    const double ld_p = d * 2.0 * std::log(sig_p);
    const double ld_q = d * 2.0 * std::log(sig_q);
    for (int i = 0; i < N; ++i) {
      const double tau = rng.exponential();
      VecX z = rng.normal_vec(d);
      const double n2 = tau * z.squaredNorm();  // ||t||^2 / sig_q^2
      samples[i] = std::sqrt(tau) * sig_q * z[0];
      const double uq = n2;
      const double up = n2 * (sig_q * sig_q) / (sig_p * sig_p);
      weights[i] = std::exp(MvLaplace::logpdf_from_u(up, d, ld_p) -
                            MvLaplace::logpdf_from_u(uq, d, ld_q));
    }
  }
  auto lk = [&](double x) { return gaussian_likelihood(cfg.y, x, cfg.sigma_y); };
  try {
    return ratio_mmse(samples, weights, lk);
  } catch (const std::runtime_error&) {
    return 0.0;  // total likelihood underflow: fall back to the prior mean
  }
}

}  // namespace

RmseGrid empirical_rmse_grid(const std::vector<double>& y_grid,
                             const std::vector<double>& sigma_grid,
                             const RatioExperimentConfig& cfg, uint64_t seed,
                             int threads) {
  if (y_grid.empty() || sigma_grid.empty()) throw std::invalid_argument("empty grid");
  RmseGrid grid;
  grid.y_grid = y_grid;
  grid.sigma_grid = sigma_grid;
  const int ny = static_cast<int>(y_grid.size());
  const int ns = static_cast<int>(sigma_grid.size());
  grid.empirical.resize(ny, ns);
  grid.predicted.resize(ny, ns);

  std::vector<double> exact(ny);
  for (int iy = 0; iy < ny; ++iy)
    exact[iy] = quadrature_mmse(y_grid[iy], cfg.lambda_prior, cfg.sigma_y);

  parallel_for(ny * ns, threads, [&](int cell) {
    const int iy = cell / ns, is = cell % ns;
    RatioExperimentConfig c = cfg;
    c.y = y_grid[iy];
    c.lambda_proposal = std::sqrt(2.0) / sigma_grid[is];
    double sq = 0.0;
    for (int t = 0; t < c.trials; ++t) {
      Rng rng = Rng::stream(seed, cell, t);
      const double err = run_trial(c, rng) - exact[iy];
      sq += err * err;
    }
    grid.empirical(iy, is) = std::sqrt(sq / c.trials);
    grid.predicted(iy, is) = predicted_rmse(c).rmse;
  });
  return grid;
}

void RmseGrid::write_csv(std::ostream& os) const {
  os << "y,sigma_proposal,rmse_empirical,rmse_predicted\n";
  for (size_t iy = 0; iy < y_grid.size(); ++iy)
    for (size_t is = 0; is < sigma_grid.size(); ++is)
      os << y_grid[iy] << ',' << sigma_grid[is] << ',' << empirical(iy, is) << ','
         << predicted(iy, is) << '\n';
}

std::vector<double> RmseGrid::empirical_optimal_sigma() const {
  std::vector<double> out(y_grid.size());
  for (size_t iy = 0; iy < y_grid.size(); ++iy) {
    int best = 0;
    for (size_t is = 1; is < sigma_grid.size(); ++is)
      if (empirical(iy, is) < empirical(iy, best)) best = static_cast<int>(is);
    out[iy] = sigma_grid[best];
  }
  return out;
}

std::vector<double> default_y_grid(int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = 8.0 * i / (n - 1);
  return g;
}

std::vector<double> default_sigma_grid(double lambda_prior, int n) {
  const double lo = std::sqrt(2.0) / lambda_prior, hi = 20.0;
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

}  // namespace mtt
