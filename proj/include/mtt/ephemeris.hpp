#pragma once

#include "mtt/types.hpp"

namespace mtt {

/// Low-precision analytic Sun position, mean equator and equinox of date,
/// good to a few hundredths of a degree. jd is the Julian date.
Vec3 sun_position_eci(double jd);

/// Low-precision analytic Moon position (arcminute-level series).
Vec3 moon_position_eci(double jd);

}  // namespace mtt
