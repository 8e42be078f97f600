#include "mtt/ephemeris.hpp"

#include <cmath>

namespace mtt {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kJ2000 = 2451545.0;
constexpr double kObliquity = 23.43929111 * kTwoPi / 360.0;
constexpr double kArcsec = kTwoPi / 1296000.0;

double frac(double x) { return x - std::floor(x); }

Vec3 ecliptic_to_equatorial(double lon, double lat, double r) {
  const double ce = std::cos(kObliquity), se = std::sin(kObliquity);
  const Vec3 ecl(r * std::cos(lon) * std::cos(lat), r * std::sin(lon) * std::cos(lat),
                 r * std::sin(lat));
  return Vec3(ecl.x(), ce * ecl.y() - se * ecl.z(), se * ecl.y() + ce * ecl.z());
}

}  // namespace

Vec3 sun_position_eci(double jd) {
  const double T = (jd - kJ2000) / 36525.0;
  const double M = kTwoPi * frac(0.993133 + 99.997361 * T);
  const double L = kTwoPi * frac(0.7859453 + M / kTwoPi +
                                 (6893.0 * std::sin(M) + 72.0 * std::sin(2.0 * M) +
                                  6191.2 * T) /
                                     1296000.0);
  const double r = (149.619 - 2.499 * std::cos(M) - 0.021 * std::cos(2.0 * M)) * 1e6;
  return ecliptic_to_equatorial(L, 0.0, r);
}

Vec3 moon_position_eci(double jd) {
  const double T = (jd - kJ2000) / 36525.0;
  const double L0 = frac(0.606433 + 1336.851344 * T);   // mean longitude [rev]
  const double l = kTwoPi * frac(0.374897 + 1325.552410 * T);    // Moon mean anomaly
  const double lp = kTwoPi * frac(0.993133 + 99.997361 * T);     // Sun mean anomaly
  const double D = kTwoPi * frac(0.827361 + 1236.853086 * T);    // mean elongation
  const double F = kTwoPi * frac(0.259086 + 1342.227825 * T);    // argument of latitude

  const double dL = 22640.0 * std::sin(l) - 4586.0 * std::sin(l - 2.0 * D) +
                    2370.0 * std::sin(2.0 * D) + 769.0 * std::sin(2.0 * l) -
                    668.0 * std::sin(lp) - 412.0 * std::sin(2.0 * F) -
                    212.0 * std::sin(2.0 * l - 2.0 * D) -
                    206.0 * std::sin(l + lp - 2.0 * D) + 192.0 * std::sin(l + 2.0 * D) -
                    165.0 * std::sin(lp - 2.0 * D) + 148.0 * std::sin(l - lp) -
                    125.0 * std::sin(D) - 110.0 * std::sin(l + lp) -
                    55.0 * std::sin(2.0 * F - 2.0 * D);

  const double lon = kTwoPi * frac(L0 + dL / 1296000.0);

  const double S = F + (dL + 412.0 * std::sin(2.0 * F) + 541.0 * std::sin(lp)) * kArcsec;
  const double h = F - 2.0 * D;
  const double N = -526.0 * std::sin(h) + 44.0 * std::sin(l + h) -
                   31.0 * std::sin(-l + h) - 23.0 * std::sin(lp + h) +
                   11.0 * std::sin(-lp + h) - 25.0 * std::sin(-2.0 * l + F) +
                   21.0 * std::sin(-l + F);
  const double lat = (18520.0 * std::sin(S) + N) * kArcsec;

  const double r = 385000.0 - 20905.0 * std::cos(l) - 3699.0 * std::cos(2.0 * D - l) -
                   2956.0 * std::cos(2.0 * D) - 570.0 * std::cos(2.0 * l) +
                   246.0 * std::cos(2.0 * l - 2.0 * D) - 205.0 * std::cos(lp - 2.0 * D) -
                   171.0 * std::cos(l + 2.0 * D) - 152.0 * std::cos(l + lp - 2.0 * D);

  return ecliptic_to_equatorial(lon, lat, r);
}

}  // namespace mtt
