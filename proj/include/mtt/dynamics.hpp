#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mtt/gravity.hpp"
#include "mtt/types.hpp"

namespace mtt {

struct CannonballDrag {
  double Cd = 2.0;
  double area_m2 = 1.0;
  double mass_kg = 500.0;
  // Single-band exponential atmosphere rho(h) = rho0 exp(-(h - h0)/H),
  // defaults tuned for the ~700 km altitude band.
  double rho0_kgm3 = 3.614e-14;
  double h0_km = 700.0;
  double scale_height_km = 88.667;
};

struct CannonballSrp {
  double Cr = 1.5;
  double area_m2 = 1.0;
  double mass_kg = 500.0;
};

enum class ThirdBody { Sun, Moon };

/// Force-model selection for one propagation fidelity level.
struct ForceModelConfig {
  double mu = kMuEarth;
  double Re = kEarthRadius;
  int gravity_degree = 0;  // 0 = pure two-body
  int gravity_order = 0;
  std::vector<ThirdBody> third_bodies;
  std::optional<CannonballDrag> drag;  // truth configs only
  std::optional<CannonballSrp> srp;    // truth configs only
  double earth_rotation_rate = kEarthRotationRate;
  double epoch_jd = 2455200.5;  // Julian date of simulation t = 0
  const HarmonicsField* field = nullptr;  // defaults to HarmonicsField::earth()

  static ForceModelConfig two_body() { return {}; }
  static ForceModelConfig two_body_j2() {
    ForceModelConfig c;
    c.gravity_degree = 2;
    return c;
  }
  static ForceModelConfig high_fidelity(int degree = 8, int order = 8) {
    ForceModelConfig c;
    c.gravity_degree = degree;
    c.gravity_order = order;
    c.third_bodies = {ThirdBody::Sun, ThirdBody::Moon};
    return c;
  }
  static ForceModelConfig truth(int degree = 8, int order = 8) {
    ForceModelConfig c = high_fidelity(degree, order);
    c.drag = CannonballDrag{};
    c.srp = CannonballSrp{};
    return c;
  }
};

/// Total non-thrust acceleration: central harmonics + third-body point
/// masses + optional cannonball drag/SRP. Throws "invalid state" for
/// non-finite input and "subsurface state" below the harmonics guard radius.
Vec3 acceleration(const InertialState& state, const ForceModelConfig& cfg);

/// RIC -> inertial rotation; columns are unit radial, in-track, cross-track.
Mat3 ric_frame(const InertialState& state);

/// Adaptive Dormand-Prince 5(4) propagation. The returned trajectory contains
/// the initial epoch, every thrust-segment boundary inside the span, and tf.
Trajectory propagate(const InertialState& x0, const ThrustProfile& thrust, double tf,
                     const ForceModelConfig& cfg, double rtol = 1e-10);

/// States at the requested epochs (ascending, all >= x0.t).
std::vector<InertialState> propagate_at(const InertialState& x0,
                                        const ThrustProfile& thrust,
                                        std::span<const double> epochs,
                                        const ForceModelConfig& cfg, double rtol = 1e-10);

/// State transition matrices d x(t_k) / d x0 by central finite differences of
/// the flow map, one per requested epoch; the thrust profile is held fixed.
std::vector<Mat6> stm_finite_difference(const InertialState& x0,
                                        const ThrustProfile& thrust,
                                        std::span<const double> epochs,
                                        const ForceModelConfig& cfg, const Vec6& step,
                                        double rtol = 1e-10);

inline double semi_major_axis(const InertialState& s, double mu = kMuEarth) {
  return 1.0 / (2.0 / s.r.norm() - s.v.squaredNorm() / mu);
}

inline double kepler_period(double a, double mu = kMuEarth) {
  return 2.0 * 3.14159265358979323846 * std::sqrt(a * a * a / mu);
}

}  // namespace mtt
