#include "mtt/laplace.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mtt/bessel.hpp"

namespace mtt {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double logsumexp(const VecX& v) {
  if (v.size() == 0) return -kInf;
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

MvLaplace::MvLaplace(MatX Q) : Q_(std::move(Q)) {
  if (Q_.rows() != Q_.cols() || Q_.rows() < 1)
    throw std::invalid_argument("Q must be square and non-empty");
  d_ = static_cast<int>(Q_.rows());
  llt_.compute(Q_);
  if (llt_.info() != Eigen::Success)
    throw std::invalid_argument("Q must be positive definite");
  logdet_ = 0.0;
  for (int i = 0; i < d_; ++i) logdet_ += 2.0 * std::log(llt_.matrixL()(i, i));
}

double MvLaplace::mahal2(const VecX& t) const {
  if (t.size() != d_) throw std::invalid_argument("dimension mismatch");
  return t.dot(llt_.solve(t));
}

double MvLaplace::logpdf_from_u(double u, int d, double logdet_q) {
  const double v = 0.5 * (2.0 - d);
  if (u <= 0.0) {
    if (d == 1) {
      // Univariate Laplace mode lambda/2, lambda = sqrt(2/Q).
      return -0.5 * (logdet_q + std::log(2.0));
    }
    return kInf;  // density singular at the origin for d >= 2
  }
  const double z = std::sqrt(2.0 * u);
  return std::log(2.0) - 0.5 * (d * kLog2Pi + logdet_q) + 0.5 * v * std::log(0.5 * u) +
         log_bessel_k_scaled(v, z) - z;
}

double MvLaplace::logpdf(const VecX& t) const {
  return logpdf_from_u(mahal2(t), d_, logdet_);
}

VecX MvLaplace::sample(Rng& rng) const {
  const double tau = rng.exponential();
  const VecX z = rng.normal_vec(d_);
  VecX r = llt_.matrixL() * z;
  r *= std::sqrt(tau);
  return r;
}

double MvLaplace::log_thrust_cost(const VecX& t) const {
  const double u = mahal2(t);
  if (u <= 0.0) throw std::domain_error("undefined at origin");
  const double nq = std::sqrt(u);
  const double v = order();
  return -std::sqrt(2.0) * nq + (1.0 - v) * std::log(nq);
}

double MvLaplace::asymptote_const() const {
  const double v = order();
  // From logpdf with K_v(z) ~ sqrt(pi/2z) e^{-z}, z = sqrt(2)||t||:
  return std::log(2.0) - 0.5 * (d_ * kLog2Pi + logdet_) - 0.5 * v * std::log(2.0) +
         0.5 * std::log(3.14159265358979323846) - 0.75 * std::log(2.0);
}

double MvLaplace::log_joint_posterior_approx(
    const VecX& x0, const VecX& t, const VecX& xbar0, const MatX& P0, const VecX& y,
    const MatX& R, const MatX& H, const MatX& Pf,
    const std::function<VecX(const VecX&, const VecX&)>& measurement_fn) const {
  const double u = mahal2(t);
  if (u <= 0.0) throw std::domain_error("undefined at origin");
  const double nq = std::sqrt(u);
  const VecX dx = x0 - xbar0;
  const VecX nu = measurement_fn(x0, t) - y;
  const MatX S = H * Pf * H.transpose() + R;
  const double quad_prior = dx.dot(P0.llt().solve(dx));
  const double quad_meas = nu.dot(S.llt().solve(nu));
  const double v = order();
  return -0.5 * quad_prior - 0.5 * quad_meas - std::sqrt(2.0) * nq +
         (v - 0.5) * std::log(nq) + asymptote_const();
}

ProposalMixture::ProposalMixture(MvLaplace base_, VecX weights_, VecX scales_)
    : base(std::move(base_)), weights(std::move(weights_)), scales(std::move(scales_)) {
  if (weights.size() != scales.size() + 1)
    throw std::invalid_argument("need one weight per component incl. the base");
  if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("weights must be positive and sum to 1");
  for (int i = 0; i < scales.size(); ++i)
    if (!(scales[i] > 1.0)) throw std::invalid_argument("scales must exceed 1");
}

ProposalMixture ProposalMixture::log_spaced(int d, double sigma_filter, double sigma_max,
                                            int n_components, double alpha0) {
  if (n_components < 1) throw std::invalid_argument("need at least one component");
  MatX Q = sigma_filter * sigma_filter * MatX::Identity(d, d);
  VecX w(n_components), a(n_components - 1);
  if (n_components == 1) {
    w[0] = 1.0;
  } else {
    w[0] = alpha0;
    const double rest = (1.0 - alpha0) / (n_components - 1);
    const double ratio = sigma_max / sigma_filter;
    for (int l = 1; l < n_components; ++l) {
      w[l] = rest;
      a[l - 1] = std::pow(ratio, static_cast<double>(l) / (n_components - 1));
    }
  }
  return ProposalMixture(MvLaplace(std::move(Q)), std::move(w), std::move(a));
}

std::pair<VecX, int> ProposalMixture::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  int idx = 0;
  for (int l = 0; l < n_components(); ++l) {
    acc += weights[l];
    if (u <= acc || l + 1 == n_components()) {
      idx = l;
      break;
    }
  }
  VecX t = base.sample(rng) * scale_of(idx);
  return {std::move(t), idx};
}

double ProposalMixture::log_importance_weight(const VecX& t) const {
  const int d = base.dim();
  const double u = base.mahal2(t);
  const double logdet = base.logdet();
  if (u <= 0.0 && d >= 2) {
    // Limit of the density ratio at the singular origin: component l behaves
    // as c a_l^{-d-2v} u^v with d + 2v = 2, so the ratio tends to a_l^2.
    double denom = 0.0;
    for (int l = 0; l < n_components(); ++l)
      denom += weights[l] / (scale_of(l) * scale_of(l));
    return -std::log(denom);
  }
  const double log_num = MvLaplace::logpdf_from_u(u, d, logdet);
  VecX terms(n_components());
  for (int l = 0; l < n_components(); ++l) {
    const double a = scale_of(l);
    terms[l] = std::log(weights[l]) +
               MvLaplace::logpdf_from_u(u / (a * a), d, logdet + 2.0 * d * std::log(a));
  }
  return log_num - logsumexp(terms);
}

double ProposalMixture::importance_weight(const VecX& t) const {
  return std::exp(log_importance_weight(t));
}

}  // namespace mtt
