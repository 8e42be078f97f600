#pragma once

#include <vector>

#include "mtt/types.hpp"

namespace mtt {

/// Fully normalized spherical-harmonic coefficient table (4-pi geodesy
/// convention), triangular storage indexed n(n+1)/2 + m.
struct HarmonicsField {
  int nmax = 0;
  std::vector<double> C, S;

  HarmonicsField() = default;
  explicit HarmonicsField(int nmax_)
      : nmax(nmax_), C((nmax_ + 1) * (nmax_ + 2) / 2, 0.0), S(C.size(), 0.0) {}

  double& Cnm(int n, int m) { return C[n * (n + 1) / 2 + m]; }
  double& Snm(int n, int m) { return S[n * (n + 1) / 2 + m]; }
  double Cnm(int n, int m) const { return C[n * (n + 1) / 2 + m]; }
  double Snm(int n, int m) const { return S[n * (n + 1) / 2 + m]; }

  /// Built-in truncated Earth field: EGM96 coefficients through degree/order
  /// 4 plus zonals through degree 6, zeros elsewhere, sized for synthesis up
  /// to degree 12. Truth and filter models share this table, so the
  /// truncation cancels out of the estimation problem.
  static const HarmonicsField& earth();
};

/// Harmonic (n >= 2) acceleration in the body-fixed frame, excluding the
/// central two-body term. degree/order select the truncation actually
/// evaluated; degree < 2 returns zero.
Vec3 harmonics_accel_bodyfixed(const Vec3& r_bf, double mu, double Re,
                               const HarmonicsField& field, int degree, int order);

/// Gravitational potential of the same harmonic terms (diagnostic; the
/// acceleration is its gradient).
double harmonics_potential_bodyfixed(const Vec3& r_bf, double mu, double Re,
                                     const HarmonicsField& field, int degree, int order);

}  // namespace mtt
