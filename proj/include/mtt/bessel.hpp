#pragma once

namespace mtt {

/// log(K_v(x) * e^x) for real order v and x > 0.
///
/// The exponential scaling keeps the result representable far into the tail
/// (K_v itself underflows near x ~ 700). Half-integer orders use the exact
/// finite-sum form; other orders use a Temme series (x <= 2) or a continued
/// fraction (x > 2) with upward recurrence on the order.
double log_bessel_k_scaled(double v, double x);

/// K_v(x), unscaled. Convenience wrapper; underflows where exp(-x) does.
double bessel_k(double v, double x);

}  // namespace mtt
