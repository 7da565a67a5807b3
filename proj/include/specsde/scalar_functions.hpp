#pragma once

#include <Eigen/Dense>

#include <string>

namespace specsde {

// Pointwise coefficients come from a small named registry so Lipschitz and
// growth constants are known exactly; assumption checking needs honest
// constants, not estimates of user code.

/// Bounded Lipschitz entry a*base(x): "zero", "clipped_identity", "sin",
/// "tanh_scaled", each with an optional ":a" amplitude suffix.
struct ScalarFn {
  std::string name = "zero";  // canonical, e.g. "sin:0.5"
  double amplitude = 1.0;
  double (*base)(double) = nullptr;
  double lipschitz = 0.0;  // of a*base
  double bound = 0.0;      // sup |a*base|
  double at_zero = 0.0;

  bool is_zero() const { return bound == 0.0; }
};

ScalarFn scalar_fn(const std::string& spec);

/// Zero-order drift entry a*base(x) with growth |f(x)| <= K(1+|x|^r) and
/// one-sided bound (f(x)-f(y))(x-y) <= K_os(1+|y|^s)|x-y|^2:
/// "zero", "linear_decay" (-x), "logistic" (x-x^3), "neg_cubic" (-x^3).
struct GrowthFn {
  std::string name = "zero";
  double amplitude = 1.0;
  double (*base)(double) = nullptr;
  double growth_K = 0.0;
  double growth_r = 0.0;
  double onesided_K = 0.0;
  double onesided_s = 0.0;
  double at_zero = 0.0;

  bool is_zero() const { return base == nullptr; }
};

GrowthFn growth_fn(const std::string& spec);

Eigen::ArrayXd eval(const ScalarFn&, const Eigen::ArrayXd& x);
Eigen::ArrayXd eval(const GrowthFn&, const Eigen::ArrayXd& x);

}  // namespace specsde
