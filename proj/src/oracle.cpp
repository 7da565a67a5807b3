#include "specsde/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace specsde {

Eigen::VectorXd exact_mode_path(const ModeParams& p,
                                const Eigen::Ref<const Eigen::VectorXd>& increments, double dt) {
  if (p.k < 1) throw std::invalid_argument("exact_mode_path: k >= 1 required");
  if (!(dt > 0)) throw std::invalid_argument("exact_mode_path: dt must be positive");
  const double k2 = static_cast<double>(p.k) * p.k;
  const double sigma = 2.0 * p.gamma * std::abs(static_cast<double>(p.k));
  const double mu = -k2 - 2.0 * p.gamma * p.gamma * k2;  // -k^2 - sigma^2/2
  Eigen::VectorXd out(increments.size() + 1);
  double w = 0.0;
  out[0] = p.c0;
  for (Eigen::Index n = 0; n < increments.size(); ++n) {
    w += increments[n];
    out[n + 1] = p.c0 * std::exp(mu * dt * static_cast<double>(n + 1) + sigma * w);
  }
  return out;
}

double exact_mode_moment(const ModeParams& p, double moment_p, double t) {
  if (p.k < 1) throw std::invalid_argument("exact_mode_moment: k >= 1 required");
  if (moment_p < 1.0) throw std::invalid_argument("exact_mode_moment: p >= 1 required");
  if (t < 0.0) throw std::invalid_argument("exact_mode_moment: t >= 0 required");
  const double k2 = static_cast<double>(p.k) * p.k;
  const double expo = moment_p * k2 * (2.0 * p.gamma * p.gamma * (moment_p - 1.0) - 1.0);
  return std::pow(std::abs(p.c0), moment_p) * std::exp(expo * t);
}

bool mode_moment_bounded(double gamma, double moment_p) {
  return 2.0 * gamma * gamma * (moment_p - 1.0) <= 1.0;
}

WellPosedness wellposed_predicates(double gamma, double p0) {
  if (p0 < 2.0) throw std::invalid_argument("wellposed_predicates: p0 >= 2 required");
  WellPosedness w;
  const double q = 2.0 * gamma * gamma * (p0 - 1.0);
  w.coercivity_ok = q < 1.0;
  w.brz_veraar_illposed = q > 1.0;
  w.stochastic_parabolicity_ok = 1.0 - 0.5 * gamma * gamma > 0.0;
  return w;
}

}  // namespace specsde
