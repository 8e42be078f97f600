#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace mtt {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat49 = Eigen::Matrix<double, 4, 9>;
using Mat69 = Eigen::Matrix<double, 6, 9>;
using MatX = Eigen::MatrixXd;

// Physical constants used throughout (Earth values match the scenario tables).
constexpr double kMuEarth = 398600.4415;        // [km^3/s^2]
constexpr double kEarthRadius = 6378.1363;      // [km]
constexpr double kEarthRotationRate = 7.2921158553e-5;  // [rad/s]
constexpr double kMuSun = 1.32712440018e11;     // [km^3/s^2]
constexpr double kMuMoon = 4902.800066;         // [km^3/s^2]
constexpr double kAstronomicalUnit = 149597870.7;  // [km]

/// Position/velocity of the target in the inertial frame, epoch in seconds
/// past simulation start.
struct InertialState {
  Vec3 r = Vec3::Zero();  // [km]
  Vec3 v = Vec3::Zero();  // [km/s]
  double t = 0.0;         // [s]

  Vec6 vec() const {
    Vec6 x;
    x << r, v;
    return x;
  }
  static InertialState from_vec(const Vec6& x, double t) {
    return InertialState{x.head<3>(), x.tail<3>(), t};
  }
  bool finite() const { return r.allFinite() && v.allFinite() && std::isfinite(t); }
};

/// One piecewise-constant thrust segment, acceleration expressed in the
/// rotating RIC frame of the carrying particle.
struct ThrustSegment {
  double t_start = 0.0;   // [s]
  double t_end = 0.0;     // [s]
  Vec3 a_ric = Vec3::Zero();  // [km/s^2]
};

/// Contiguous, non-overlapping thrust segments. An empty profile means
/// ballistic flight.
struct ThrustProfile {
  std::vector<ThrustSegment> segments;

  int n_segments() const { return static_cast<int>(segments.size()); }

  /// RIC acceleration at time t; zero outside all segments.
  Vec3 accel_at(double t) const {
    for (const auto& s : segments) {
      if (t >= s.t_start && t < s.t_end) return s.a_ric;
    }
    if (!segments.empty() && t == segments.back().t_end) return segments.back().a_ric;
    return Vec3::Zero();
  }

  /// Sorted unique segment boundary epochs (start and end of every segment).
  std::vector<double> boundaries() const {
    std::vector<double> b;
    for (const auto& s : segments) {
      if (b.empty() || s.t_start > b.back()) b.push_back(s.t_start);
      b.push_back(s.t_end);
    }
    return b;
  }

  /// 3*n vector of the stacked segment accelerations.
  VecX stacked() const {
    VecX t(3 * segments.size());
    for (size_t i = 0; i < segments.size(); ++i) t.segment<3>(3 * i) = segments[i].a_ric;
    return t;
  }

  void validate() const {
    for (size_t i = 0; i < segments.size(); ++i) {
      if (!(segments[i].t_start < segments[i].t_end))
        throw std::invalid_argument("thrust segment with non-positive duration");
      if (i > 0 && segments[i].t_start != segments[i - 1].t_end)
        throw std::invalid_argument("thrust segments not contiguous");
    }
  }

  static ThrustProfile constant(double t0, double t1, const Vec3& a) {
    ThrustProfile p;
    p.segments.push_back({t0, t1, a});
    return p;
  }

  /// Uniform segment grid over [t0, t1] with the given accelerations.
  static ThrustProfile from_grid(double t0, double t1, const std::vector<Vec3>& accels) {
    ThrustProfile p;
    const int n = static_cast<int>(accels.size());
    const double dt = (t1 - t0) / n;
    for (int i = 0; i < n; ++i)
      p.segments.push_back({t0 + i * dt, (i + 1 == n) ? t1 : t0 + (i + 1) * dt, accels[i]});
    return p;
  }
};

/// Ordered states at requested output epochs.
struct Trajectory {
  std::vector<InertialState> states;

  const InertialState& front() const { return states.front(); }
  const InertialState& back() const { return states.back(); }

  const InertialState& at_epoch(double t, double tol = 1e-9) const {
    for (const auto& s : states)
      if (std::abs(s.t - t) <= tol) return s;
    throw std::out_of_range("no trajectory state at requested epoch");
  }
};

/// Initial state + thrust profile + importance weight; the unit of ensemble
/// propagation.
struct Particle {
  InertialState x0;
  ThrustProfile thrust;
  double weight = 0.0;
};

}  // namespace mtt
