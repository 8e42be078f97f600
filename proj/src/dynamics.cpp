#include "mtt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtt/ephemeris.hpp"

namespace mtt {

namespace {

Vec3 rotate_z(const Vec3& x, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec3(c * x.x() - s * x.y(), s * x.x() + c * x.y(), x.z());
}

Vec3 third_body_accel(const Vec3& r, const Vec3& body_pos, double mu_body) {
  const Vec3 d = body_pos - r;
  return mu_body * (d / std::pow(d.norm(), 3) - body_pos / std::pow(body_pos.norm(), 3));
}

}  // namespace

Vec3 acceleration(const InertialState& state, const ForceModelConfig& cfg) {
  if (!state.finite()) throw std::domain_error("invalid state");
  const double r = state.r.norm();
  if (r <= 0.5 * cfg.Re) throw std::domain_error("subsurface state");

  Vec3 a = -cfg.mu / (r * r * r) * state.r;

  if (cfg.gravity_degree >= 2) {
    const double theta = cfg.earth_rotation_rate * state.t;
    const Vec3 r_bf = rotate_z(state.r, -theta);
    const HarmonicsField& field = cfg.field ? *cfg.field : HarmonicsField::earth();
    const Vec3 a_bf = harmonics_accel_bodyfixed(r_bf, cfg.mu, cfg.Re, field,
                                                cfg.gravity_degree, cfg.gravity_order);
    a += rotate_z(a_bf, theta);
  }

  if (!cfg.third_bodies.empty()) {
    const double jd = cfg.epoch_jd + state.t / 86400.0;
    for (const ThirdBody b : cfg.third_bodies) {
      if (b == ThirdBody::Sun)
        a += third_body_accel(state.r, sun_position_eci(jd), kMuSun);
      else
        a += third_body_accel(state.r, moon_position_eci(jd), kMuMoon);
    }
  }

  if (cfg.drag) {
    const auto& d = *cfg.drag;
    const double h = r - cfg.Re;
    const double rho = d.rho0_kgm3 * std::exp(-(h - d.h0_km) / d.scale_height_km);
    const Vec3 omega(0.0, 0.0, cfg.earth_rotation_rate);
    const Vec3 v_rel = state.v - omega.cross(state.r);
    // 1/2 rho v^2 Cd A/m with v in km/s and rho in kg/m^3 -> km/s^2
    a += -500.0 * rho * d.Cd * d.area_m2 / d.mass_kg * v_rel.norm() * v_rel;
  }

  if (cfg.srp) {
    const auto& s = *cfg.srp;
    const double jd = cfg.epoch_jd + state.t / 86400.0;
    const Vec3 sun = sun_position_eci(jd);
    const Vec3 d = state.r - sun;
    const double dist = d.norm();
    const double p_srp = 4.56e-6;  // N/m^2 at 1 AU
    const double au_sq = kAstronomicalUnit / dist * (kAstronomicalUnit / dist);
    a += (p_srp * s.Cr * s.area_m2 / s.mass_kg * au_sq * 1e-3) * (d / dist);
  }

  return a;
}

Mat3 ric_frame(const InertialState& state) {
  const double rn = state.r.norm();
  if (rn <= 0.0) throw std::domain_error("degenerate orbit frame");
  const Vec3 h = state.r.cross(state.v);
  const double hn = h.norm();
  if (hn <= 1e-12 * rn * state.v.norm() || hn == 0.0)
    throw std::domain_error("degenerate orbit frame");
  Mat3 m;
  m.col(0) = state.r / rn;
  m.col(2) = h / hn;
  m.col(1) = m.col(2).cross(m.col(0));
  return m;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640, E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;

struct Rhs {
  const ForceModelConfig& cfg;
  Vec3 a_ric;  // thrust for the current segment, constant in the RIC frame

  Vec6 operator()(double t, const Vec6& y) const {
    InertialState s = InertialState::from_vec(y, t);
    Vec3 a = acceleration(s, cfg);
    if (a_ric.squaredNorm() > 0.0) a += ric_frame(s) * a_ric;
    Vec6 dy;
    dy << s.v, a;
    return dy;
  }
};

double error_norm(const Vec6& err, const Vec6& y0, const Vec6& y1, double rtol) {
  // Relative error with small absolute floors (1 m, 1 mm/s).
  double acc = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double floor_i = (i < 3) ? 1e-3 : 1e-6;
    const double sc = rtol * std::max({std::abs(y0[i]), std::abs(y1[i]), floor_i});
    const double e = err[i] / sc;
    acc += e * e;
  }
  return std::sqrt(acc / 6.0);
}

// Integrate y from ta to tb with the segment-constant thrust in rhs. h is the
// carried step-size guess.
void integrate_span(const Rhs& rhs, double ta, double tb, Vec6& y, double rtol,
                    double& h, double Re) {
  if (tb <= ta) return;
  Vec6 k1 = rhs(ta, y);
  double t = ta;
  h = std::min(h, tb - ta);
  while (t < tb) {
    h = std::min(h, tb - t);
    bool accepted = false;
    while (!accepted) {
      const Vec6 k2 = rhs(t + C2 * h, y + h * (A21 * k1));
      const Vec6 k3 = rhs(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
      const Vec6 k4 = rhs(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
      const Vec6 k5 = rhs(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
      const Vec6 k6 =
          rhs(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
      const Vec6 ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
      const Vec6 k7 = rhs(t + h, ynew);
      const Vec6 err =
          h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
      const double en = error_norm(err, y, ynew, rtol);
      if (en <= 1.0) {
        t += h;
        y = ynew;
        k1 = k7;  // FSAL
        if (y.head<3>().norm() < Re) throw std::runtime_error("impact");
        accepted = true;
        h *= std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 1.0, 5.0);
      } else {
        h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 0.9);
        if (h < 1e-6) throw std::runtime_error("propagation failed");
      }
    }
  }
}

}  // namespace

std::vector<InertialState> propagate_at(const InertialState& x0,
                                        const ThrustProfile& thrust,
                                        std::span<const double> epochs,
                                        const ForceModelConfig& cfg, double rtol) {
  if (epochs.empty()) return {};
  for (size_t i = 0; i < epochs.size(); ++i) {
    if (epochs[i] < x0.t || (i > 0 && epochs[i] < epochs[i - 1]))
      throw std::invalid_argument("output epochs must be ascending and >= x0.t");
  }
  const double tf = epochs.back();

  // Knots: output epochs plus thrust boundaries; thrust is constant between
  // consecutive knots.
  std::vector<double> knots(epochs.begin(), epochs.end());
  knots.push_back(x0.t);
  for (double b : thrust.boundaries())
    if (b > x0.t && b < tf) knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              knots.end());

  std::vector<InertialState> out;
  out.reserve(epochs.size());
  Vec6 y = x0.vec();
  double t = x0.t;
  double h = 60.0;
  size_t next_out = 0;
  auto emit_if_requested = [&](double tk) {
    while (next_out < epochs.size() && std::abs(epochs[next_out] - tk) < 1e-9) {
      out.push_back(InertialState::from_vec(y, epochs[next_out]));
      ++next_out;
    }
  };
  emit_if_requested(t);
  for (double tk : knots) {
    if (tk <= t) continue;
    Rhs rhs{cfg, thrust.accel_at(0.5 * (t + tk))};
    integrate_span(rhs, t, tk, y, rtol, h, cfg.Re);
    t = tk;
    emit_if_requested(t);
  }
  return out;
}

Trajectory propagate(const InertialState& x0, const ThrustProfile& thrust, double tf,
                     const ForceModelConfig& cfg, double rtol) {
  if (tf < x0.t) throw std::invalid_argument("tf must not precede x0.t");
  std::vector<double> epochs{x0.t};
  for (double b : thrust.boundaries())
    if (b > x0.t && b < tf) epochs.push_back(b);
  if (tf > x0.t) epochs.push_back(tf);
  std::sort(epochs.begin(), epochs.end());
  Trajectory traj;
  traj.states = propagate_at(x0, thrust, epochs, cfg, rtol);
  return traj;
}

std::vector<Mat6> stm_finite_difference(const InertialState& x0,
                                        const ThrustProfile& thrust,
                                        std::span<const double> epochs,
                                        const ForceModelConfig& cfg, const Vec6& step,
                                        double rtol) {
  if ((step.array() <= 0.0).any())
    throw std::invalid_argument("finite-difference steps must be positive");
  std::vector<Mat6> stms(epochs.size(), Mat6::Zero());
  for (int j = 0; j < 6; ++j) {
    Vec6 dx = Vec6::Zero();
    dx[j] = step[j];
    const auto plus =
        propagate_at(InertialState::from_vec(x0.vec() + dx, x0.t), thrust, epochs, cfg, rtol);
    const auto minus =
        propagate_at(InertialState::from_vec(x0.vec() - dx, x0.t), thrust, epochs, cfg, rtol);
    for (size_t k = 0; k < epochs.size(); ++k)
      stms[k].col(j) = (plus[k].vec() - minus[k].vec()) / (2.0 * step[j]);
  }
  return stms;
}

}  // namespace mtt
