#include "mtt/bessel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtt {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = 1e-16;
constexpr int kMaxIter = 20000;

double chebev(double x, const double* c, int m) {
  double d = 0.0, dd = 0.0;
  const double x2 = 2.0 * x;
  for (int j = m - 1; j > 0; --j) {
    const double sv = d;
    d = x2 * d - dd + c[j];
    dd = sv;
  }
  return x * d - dd + 0.5 * c[0];
}

// Chebyshev fits for Temme's Gamma auxiliaries over |mu| <= 1/2.
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  static const double c1[] = {-1.142022680371168, 6.5165112670737e-3,
                              3.087090173086e-4,  -3.4706269649e-6,
                              6.9437664e-9,       3.67795e-11,
                              -1.356e-13};
  static const double c2[] = {1.843740587300905,  -7.68528408447867e-2,
                              1.2719271366546e-3, -4.9717367042e-6,
                              -3.31261198e-8,     2.423096e-10,
                              -1.702e-13,         -1.49e-15};
  const double xx = 8.0 * mu * mu - 1.0;
  gam1 = chebev(xx, c1, 7);
  gam2 = chebev(xx, c2, 8);
  gampl = gam2 - mu * gam1;
  gammi = gam2 + mu * gam1;
}

// Temme series for K_mu(x), K_{mu+1}(x), x <= 2, |mu| <= 1/2. Unscaled.
void bessk_temme(double mu, double x, double& kmu, double& kmu1) {
  const double x2 = 0.5 * x;
  const double pimu = kPi * mu;
  const double fact = (std::fabs(pimu) < kEps) ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  const double fact2 = (std::fabs(e) < kEps) ? 1.0 : std::sinh(e) / e;
  double gam1, gam2, gampl, gammi;
  temme_gammas(mu, gam1, gam2, gampl, gammi);
  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / gampl;
  double q = 0.5 / (e * gammi);
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  const double mu2 = mu * mu;
  for (int i = 1; i <= kMaxIter; ++i) {
    ff = (i * ff + p + q) / (i * i - mu2);
    c *= d / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * ff;
    sum += del;
    sum1 += c * (p - i * ff);
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  kmu = sum;
  kmu1 = sum1 * (2.0 / x);
}

// Steed/Thompson-Barnett CF2 for K_mu(x), K_{mu+1}(x), x > 2, |mu| <= 1/2.
// Returns exponentially scaled values (times e^x).
void bessk_cf2(double mu, double x, double& kmu_s, double& kmu1_s) {
  const double mu2 = mu * mu;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIter; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::fabs(dels / s) < kEps) break;
  }
  h = a1 * h;
  kmu_s = std::sqrt(kPi / (2.0 * x)) / s;
  kmu1_s = kmu_s * (mu + x + 0.5 - h) / x;
}

// Half-integer order: K_{m+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_{k<=m} a_k,
// a_k = (m+k)! / ((m-k)! k! (2x)^k). Log of the scaled value.
double log_k_half_integer_scaled(int m, double x) {
  const double l2x = std::log(2.0 * x);
  double max_lt = -std::numeric_limits<double>::infinity();
  double lt[512];
  if (m >= 512) throw std::invalid_argument("bessel order too large");
  for (int k = 0; k <= m; ++k) {
    lt[k] = std::lgamma(m + k + 1.0) - std::lgamma(m - k + 1.0) - std::lgamma(k + 1.0) -
            k * l2x;
    max_lt = std::max(max_lt, lt[k]);
  }
  double s = 0.0;
  for (int k = 0; k <= m; ++k) s += std::exp(lt[k] - max_lt);
  return 0.5 * std::log(kPi / (2.0 * x)) + max_lt + std::log(s);
}

}  // namespace

double log_bessel_k_scaled(double v, double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel K requires x > 0");
  v = std::fabs(v);  // K_{-v} = K_v

  const double vr = v - std::floor(v);
  if (std::fabs(vr - 0.5) < 1e-12) {
    return log_k_half_integer_scaled(static_cast<int>(std::floor(v)), x);
  }

  // Reduce to |mu| <= 1/2 plus an integer number of upward recurrences.
  const int n = static_cast<int>(std::floor(v + 0.5));
  const double mu = v - n;
  double kmu, kmu1, logscale;
  if (x <= 2.0) {
    bessk_temme(mu, x, kmu, kmu1);
    logscale = x;  // convert unscaled -> scaled
  } else {
    bessk_cf2(mu, x, kmu, kmu1);
    logscale = 0.0;
  }
  // Upward recurrence K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu, renormalizing to
  // avoid overflow for large orders at small x.
  double nu = mu;
  for (int i = 0; i < n; ++i) {
    const double knext = kmu + (2.0 * (nu + 1.0) / x) * kmu1;
    kmu = kmu1;
    kmu1 = knext;
    nu += 1.0;
    if (kmu1 > 1e280) {
      kmu /= 1e280;
      kmu1 /= 1e280;
      logscale += std::log(1e280);
    }
  }
  // After i steps kmu = K_{mu+i}, so kmu now holds K_{mu+n} = K_v.
  const double kv = kmu;
  return std::log(kv) + logscale;
}

double bessel_k(double v, double x) {
  return std::exp(log_bessel_k_scaled(v, x) - x);
}

}  // namespace mtt
