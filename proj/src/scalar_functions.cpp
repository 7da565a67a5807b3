#include "specsde/scalar_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace specsde {

namespace {

double fn_zero(double) { return 0.0; }
double fn_clip(double x) { return std::clamp(x, -1.0, 1.0); }
double fn_sin(double x) { return std::sin(x); }
double fn_tanh(double x) { return std::tanh(x); }
double fn_neg_identity(double x) { return -x; }
double fn_logistic(double x) { return x - x * x * x; }
double fn_neg_cubic(double x) { return -x * x * x; }

std::pair<std::string, double> split_amplitude(const std::string& spec) {
  const auto pos = spec.find(':');
  if (pos == std::string::npos) return {spec, 1.0};
  const std::string name = spec.substr(0, pos);
  double a = 0;
  try {
    a = std::stod(spec.substr(pos + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("scalar function '" + spec + "': bad amplitude");
  }
  if (!(a > 0) || !std::isfinite(a)) {
    throw std::invalid_argument("scalar function '" + spec + "': amplitude must be positive");
  }
  return {name, a};
}

void spot_check_growth(const GrowthFn& f) {
  // construction-time sanity sweep of |f(x)| <= K(1+|x|^r) on [-10,10]
  for (int i = 0; i <= 100; ++i) {
    const double x = -10.0 + 0.2 * i;
    const double lhs = std::abs(f.amplitude * f.base(x));
    const double rhs = f.growth_K * (1.0 + std::pow(std::abs(x), f.growth_r));
    if (lhs > rhs * (1.0 + 1e-12)) {
      throw std::logic_error("growth_fn '" + f.name + "': registry growth constants inconsistent");
    }
  }
}

}  // namespace

ScalarFn scalar_fn(const std::string& spec) {
  const auto [name, a] = split_amplitude(spec);
  ScalarFn s;
  s.amplitude = a;
  s.name = a == 1.0 ? name : name + ":" + std::to_string(a);
  if (name == "zero") {
    s.base = fn_zero;
  } else if (name == "clipped_identity") {
    s.base = fn_clip;
    s.lipschitz = a;
    s.bound = a;
  } else if (name == "sin") {
    s.base = fn_sin;
    s.lipschitz = a;
    s.bound = a;
  } else if (name == "tanh_scaled") {
    s.base = fn_tanh;
    s.lipschitz = a;
    s.bound = a;
  } else {
    throw std::invalid_argument("unknown scalar function '" + name +
                                "' (known: zero, clipped_identity, sin, tanh_scaled)");
  }
  s.at_zero = s.base ? a * s.base(0.0) : 0.0;
  return s;
}

GrowthFn growth_fn(const std::string& spec) {
  const auto [name, a] = split_amplitude(spec);
  GrowthFn f;
  f.amplitude = a;
  f.name = a == 1.0 ? name : name + ":" + std::to_string(a);
  if (name == "zero") {
    f.base = nullptr;
    return f;
  }
  if (name == "linear_decay") {
    f.base = fn_neg_identity;
    f.growth_K = a;
    f.growth_r = 1.0;
    f.onesided_K = 0.0;  // (-x+y)(x-y) = -(x-y)^2
    f.onesided_s = 0.0;
  } else if (name == "logistic") {
    f.base = fn_logistic;
    f.growth_K = 2.0 * a;  // |x - x^3| <= |x| + |x|^3 <= 2(1+|x|^3)
    f.growth_r = 3.0;
    f.onesided_K = a;  // (x-y)^2 (1 - (x^2+xy+y^2)) <= (x-y)^2
    f.onesided_s = 0.0;
  } else if (name == "neg_cubic") {
    f.base = fn_neg_cubic;
    f.growth_K = a;
    f.growth_r = 3.0;
    f.onesided_K = 0.0;  // -(x^2+xy+y^2)(x-y)^2 <= 0
    f.onesided_s = 0.0;
  } else {
    throw std::invalid_argument("unknown growth function '" + name +
                                "' (known: zero, linear_decay, logistic, neg_cubic)");
  }
  f.at_zero = a * f.base(0.0);
  spot_check_growth(f);
  return f;
}

Eigen::ArrayXd eval(const ScalarFn& s, const Eigen::ArrayXd& x) {
  if (s.base == nullptr || s.base == fn_zero) return Eigen::ArrayXd::Zero(x.size());
  Eigen::ArrayXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = s.amplitude * s.base(x[i]);
  return out;
}

Eigen::ArrayXd eval(const GrowthFn& f, const Eigen::ArrayXd& x) {
  if (f.base == nullptr) return Eigen::ArrayXd::Zero(x.size());
  Eigen::ArrayXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = f.amplitude * f.base(x[i]);
  return out;
}

}  // namespace specsde
