#include "mtt/gravity.hpp"

#include <cmath>
#include <stdexcept>

namespace mtt {

namespace {

constexpr int kMaxDegree = 12;

// Normalized associated Legendre values P[n][m] at u = sin(lat) and their
// latitude derivatives dP[n][m].
void legendre_normalized(int nmax, double u, double c, double (*P)[kMaxDegree + 1],
                         double (*dP)[kMaxDegree + 1]) {
  P[0][0] = 1.0;
  dP[0][0] = 0.0;
  if (nmax >= 1) {
    P[1][0] = std::sqrt(3.0) * u;
    P[1][1] = std::sqrt(3.0) * c;
  }
  for (int n = 2; n <= nmax; ++n) {
    P[n][n] = std::sqrt((2.0 * n + 1.0) / (2.0 * n)) * c * P[n - 1][n - 1];
    P[n][n - 1] = std::sqrt(2.0 * n + 1.0) * u * P[n - 1][n - 1];
    for (int m = 0; m <= n - 2; ++m) {
      const double a = std::sqrt((2.0 * n - 1.0) * (2.0 * n + 1.0) /
                                 ((n - m) * (double)(n + m)));
      const double b = std::sqrt((2.0 * n + 1.0) * (n + m - 1.0) * (n - m - 1.0) /
                                 ((n - m) * (double)(n + m) * (2.0 * n - 3.0)));
      P[n][m] = a * u * P[n - 1][m] - b * P[n - 2][m];
    }
  }
  // dP/dlat = (f_nm P_{n-1,m} - n u P_nm) / cos(lat); singular only at the
  // exact poles, which the supported orbits never reach.
  const double ci = 1.0 / std::max(c, 1e-12);
  for (int n = 1; n <= nmax; ++n) {
    for (int m = 0; m <= n; ++m) {
      const double f = (n - 1 >= m)
                           ? std::sqrt((double)(n - m) * (n + m) * (2.0 * n + 1.0) /
                                       (2.0 * n - 1.0))
                           : 0.0;
      const double pl = (n - 1 >= m) ? P[n - 1][m] : 0.0;
      dP[n][m] = (f * pl - n * u * P[n][m]) * ci;
    }
  }
}

struct SphericalGradient {
  double dUdr = 0.0, dUdlat = 0.0, dUdlon = 0.0, U = 0.0;
};

SphericalGradient evaluate(const Vec3& r_bf, double mu, double Re,
                           const HarmonicsField& field, int degree, int order) {
  if (degree > field.nmax || degree > kMaxDegree)
    throw std::invalid_argument("gravity degree exceeds coefficient table");
  SphericalGradient g;
  if (degree < 2) return g;

  const double r = r_bf.norm();
  const double rxy = std::max(std::hypot(r_bf.x(), r_bf.y()), 1e-12 * r);
  const double u = r_bf.z() / r;       // sin(lat)
  const double c = rxy / r;            // cos(lat)
  const double lon = std::atan2(r_bf.y(), r_bf.x());

  double P[kMaxDegree + 1][kMaxDegree + 1];
  double dP[kMaxDegree + 1][kMaxDegree + 1];
  legendre_normalized(degree, u, c, P, dP);

  double cosml[kMaxDegree + 1], sinml[kMaxDegree + 1];
  cosml[0] = 1.0;
  sinml[0] = 0.0;
  const double cl = std::cos(lon), sl = std::sin(lon);
  for (int m = 1; m <= degree; ++m) {
    cosml[m] = cosml[m - 1] * cl - sinml[m - 1] * sl;
    sinml[m] = sinml[m - 1] * cl + cosml[m - 1] * sl;
  }

  const double mu_r = mu / r;
  double rho = Re / r * (Re / r);  // (Re/r)^n starting at n = 2
  for (int n = 2; n <= degree; ++n) {
    double sum_u = 0.0, sum_r = 0.0, sum_lat = 0.0, sum_lon = 0.0;
    const int mtop = std::min(n, order);
    for (int m = 0; m <= mtop; ++m) {
      const double cs = field.Cnm(n, m) * cosml[m] + field.Snm(n, m) * sinml[m];
      sum_u += P[n][m] * cs;
      sum_lat += dP[n][m] * cs;
      sum_lon += m * P[n][m] * (field.Snm(n, m) * cosml[m] - field.Cnm(n, m) * sinml[m]);
    }
    sum_r = (n + 1.0) * sum_u;
    g.U += mu_r * rho * sum_u;
    g.dUdr -= mu_r / r * rho * sum_r;
    g.dUdlat += mu_r * rho * sum_lat;
    g.dUdlon += mu_r * rho * sum_lon;
    rho *= Re / r;
  }
  return g;
}

}  // namespace

Vec3 harmonics_accel_bodyfixed(const Vec3& r_bf, double mu, double Re,
                               const HarmonicsField& field, int degree, int order) {
  if (degree < 2) return Vec3::Zero();
  const SphericalGradient g = evaluate(r_bf, mu, Re, field, degree, order);
  const double r = r_bf.norm();
  const double rxy2 = std::max(r_bf.x() * r_bf.x() + r_bf.y() * r_bf.y(), 1e-24 * r * r);
  const double rxy = std::sqrt(rxy2);
  // Chain rule through (r, lat, lon).
  Vec3 a = (g.dUdr / r) * r_bf;
  a.x() += g.dUdlat * (-r_bf.z() * r_bf.x()) / (r * r * rxy) - g.dUdlon * r_bf.y() / rxy2;
  a.y() += g.dUdlat * (-r_bf.z() * r_bf.y()) / (r * r * rxy) + g.dUdlon * r_bf.x() / rxy2;
  a.z() += g.dUdlat * rxy / (r * r);
  return a;
}

double harmonics_potential_bodyfixed(const Vec3& r_bf, double mu, double Re,
                                     const HarmonicsField& field, int degree, int order) {
  return evaluate(r_bf, mu, Re, field, degree, order).U;
}

const HarmonicsField& HarmonicsField::earth() {
  static const HarmonicsField field = [] {
    HarmonicsField f(kMaxDegree);
    // EGM96, fully normalized.
    f.Cnm(2, 0) = -4.84165371736e-4;
    f.Cnm(2, 1) = -1.86987635955e-10;
    f.Snm(2, 1) = 1.19528012031e-9;
    f.Cnm(2, 2) = 2.43914352398e-6;
    f.Snm(2, 2) = -1.40016683654e-6;
    f.Cnm(3, 0) = 9.57254173792e-7;
    f.Cnm(3, 1) = 2.02998882184e-6;
    f.Snm(3, 1) = 2.48513158716e-7;
    f.Cnm(3, 2) = 9.04627768605e-7;
    f.Snm(3, 2) = -6.19025944205e-7;
    f.Cnm(3, 3) = 7.21072657057e-7;
    f.Snm(3, 3) = 1.41435626958e-6;
    f.Cnm(4, 0) = 5.39873863789e-7;
    f.Cnm(4, 1) = -5.36321616971e-7;
    f.Snm(4, 1) = -4.73440265853e-7;
    f.Cnm(4, 2) = 3.50694105785e-7;
    f.Snm(4, 2) = 6.62671572540e-7;
    f.Cnm(4, 3) = 9.90771803829e-7;
    f.Snm(4, 3) = -2.00928369177e-7;
    f.Cnm(4, 4) = -1.88560802735e-7;
    f.Snm(4, 4) = 3.08853169333e-7;
    // Low-degree zonals beyond 4.
    f.Cnm(5, 0) = 6.86702913736e-8;
    f.Cnm(6, 0) = -1.49957994714e-7;
    return f;
  }();
  return field;
}

}  // namespace mtt
