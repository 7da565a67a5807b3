#include "specsde/operators.hpp"

#include <cmath>
#include <numbers>

namespace specsde {

namespace {

constexpr double kLedgerEps = 0.05;  // Young slack in the example ledgers
constexpr double kPi = std::numbers::pi;

void require_finite(const Eigen::ArrayXd& vals) {
  if (!vals.isFinite().all()) {
    double mag = 0;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      if (std::isfinite(vals[i])) mag = std::max(mag, std::abs(vals[i]));
    }
    throw OperatorOverflow(mag);
  }
}

}  // namespace

void validate(const EquationSpec& eq) {
  const auto& c = eq.ledger;
  if (!(c.alpha > 1.0)) throw std::invalid_argument("EquationSpec: alpha must exceed 1");
  if (c.beta < 0.0) throw std::invalid_argument("EquationSpec: beta must be nonnegative");
  if (c.p0 < c.beta + 2.0) {
    throw std::invalid_argument("EquationSpec: p0 >= beta + 2 required, got p0=" +
                                std::to_string(c.p0) + ", beta=" + std::to_string(c.beta));
  }
  if (c.f < 0.0) throw std::invalid_argument("EquationSpec: forcing constant must be nonnegative");
  const bool torus = eq.basis.kind == BasisKind::FourierTorus;
  if (eq.drift.kind != DriftKind::Laplacian && torus) {
    throw std::invalid_argument("EquationSpec: Burgers/SemiLinear drift needs the DirichletSine basis");
  }
  for (const auto& d : eq.diffusions) {
    if (d.kind == DiffusionKind::FractionalHalf && !torus) {
      throw std::invalid_argument("EquationSpec: FractionalHalf diffusion needs the FourierTorus basis");
    }
  }
  tables_for(eq.basis);
}

// ============================================================================
// Default ledgers
//
// theta follows the worked example constants (eps = 0.05). K and L are
// sufficient constants for the discrete operators, derived with the standard
// Young splits; the checker treats them as hypotheses to test:
//   semilinear: 2<g(u)Du,u> <= eps|u|_V^2 + (M_g^2/eps)|u|_H^2,
//               3|B|^2 <= 6 g^2|u|_V^2 + 12 L_h^2|u|_H^2 + 12 h(0)^2,
//               <f(u),u> <= K_os|u|_H^2 + |f(0)||u|_H.
//   burgers:    <u Du, u> = 0 exactly; growth |u Du|_{V*} <= (C^2/2)|u|_H|u|_V.
// The 1.5 factor on L covers quadrature slack in the fitted
// Gagliardo-Nirenberg constant.
// ============================================================================

EquationSpec semilinear_equation(double gamma, const ScalarFn& g, const GrowthFn& f,
                                 const ScalarFn& h, double f_const, const BasisSpec& basis) {
  EquationSpec eq;
  eq.name = "semilinear";
  eq.drift = {DriftKind::SemiLinear, g, f};
  eq.diffusions = {{DiffusionKind::GradientNoise, gamma, h}};
  eq.basis = basis;
  const double g2 = gamma * gamma;
  const double c4 = std::pow(kGagliardoNirenbergC, 4.0);
  ConstantsLedger led;
  led.alpha = 2.0;
  led.beta = 2.0;
  led.p0 = 4.0;
  led.theta = std::max(0.0, 2.0 - kLedgerEps - 6.0 * g2);
  const double k_coer = g.bound * g.bound / kLedgerEps;
  const double k_f = 2.0 * f.onesided_K + std::abs(f.at_zero);
  const double k_h = 12.0 * h.lipschitz * h.lipschitz;
  const double lin = 1.0 + g.bound / kPi + f.growth_K / (kPi * kPi);
  const double k_growth = 2.0 * lin * lin;
  led.K = std::max(k_coer + k_f + k_h, k_growth);
  const double delta = 0.5;
  led.L = 1.5 * (3.0 * g.bound * g.bound / delta + 3.0 * g.lipschitz * g.lipschitz * c4 / delta +
                 2.0 * f.onesided_K + 3.0 * h.lipschitz * h.lipschitz);
  led.f = f_const + std::abs(f.at_zero) + 12.0 * h.at_zero * h.at_zero +
          2.0 * f.at_zero * f.at_zero / (kPi * kPi);
  eq.ledger = led;
  validate(eq);
  return eq;
}

EquationSpec burgers_equation(double gamma, const ScalarFn& h, double f_const,
                              const BasisSpec& basis) {
  EquationSpec eq;
  eq.name = "burgers";
  eq.drift = {DriftKind::Burgers, {}, {}};
  eq.diffusions = {{DiffusionKind::GradientNoise, gamma, h}};
  eq.basis = basis;
  const double g2 = gamma * gamma;
  const double c8 = std::pow(kGagliardoNirenbergC, 8.0);
  ConstantsLedger led;
  led.alpha = 2.0;
  led.beta = 2.0;
  led.p0 = 4.0;
  led.theta = std::max(0.0, 2.0 - 2.0 * kLedgerEps - 6.0 * g2);
  led.K = std::max(2.0 + 0.5 * std::pow(kGagliardoNirenbergC, 4.0),
                   12.0 * h.lipschitz * h.lipschitz);
  led.L = 1.5 * (32.0 * c8 + 2.0 * h.lipschitz * h.lipschitz);
  led.f = f_const + 12.0 * h.at_zero * h.at_zero;
  eq.ledger = led;
  validate(eq);
  return eq;
}

EquationSpec fractional_equation(double gamma, double p0, const BasisSpec& basis) {
  EquationSpec eq;
  eq.name = "fractional";
  eq.drift = {DriftKind::Laplacian, {}, {}};
  eq.diffusions = {{DiffusionKind::FractionalHalf, gamma, scalar_fn("zero")}};
  eq.basis = basis;
  ConstantsLedger led;
  led.alpha = 2.0;
  led.beta = 0.0;
  led.p0 = p0;
  led.theta = std::max(0.0, 2.0 - 4.0 * gamma * gamma * (p0 - 1.0));
  led.K = 2.0;
  led.L = 0.0;
  led.f = 0.0;
  eq.ledger = led;
  validate(eq);
  return eq;
}

// ============================================================================
// Operator applications
// ============================================================================

Eigen::VectorXd drift_nonlinear(const DriftSpec& drift, const SpectralField& u) {
  const auto& t = tables_for(u.basis);
  switch (drift.kind) {
    case DriftKind::Laplacian:
      return Eigen::VectorXd::Zero(u.basis.m);
    case DriftKind::Burgers: {
      const Eigen::ArrayXd vals = (t.synth * u.coeffs).array();
      const Eigen::ArrayXd dvals = (t.synth_deriv * u.coeffs).array();
      Eigen::ArrayXd prod = vals * dvals;
      require_finite(prod);
      return t.analysis * prod.matrix();
    }
    case DriftKind::SemiLinear: {
      const Eigen::ArrayXd vals = (t.synth * u.coeffs).array();
      require_finite(vals);
      Eigen::ArrayXd pointwise = Eigen::ArrayXd::Zero(vals.size());
      if (!drift.g.is_zero()) {
        const Eigen::ArrayXd dvals = (t.synth_deriv * u.coeffs).array();
        pointwise += eval(drift.g, vals) * dvals;
      }
      if (!drift.f.is_zero()) pointwise += eval(drift.f, vals);
      require_finite(pointwise);
      return t.analysis * pointwise.matrix();
    }
  }
  throw std::logic_error("unreachable drift kind");
}

Eigen::VectorXd apply_drift(const DriftSpec& drift, const SpectralField& u) {
  const auto& t = tables_for(u.basis);
  Eigen::VectorXd out = (-t.lap * u.coeffs.array()).matrix();
  if (drift.kind != DriftKind::Laplacian) out += drift_nonlinear(drift, u);
  return out;
}

Eigen::VectorXd apply_diffusion(const DiffusionSpec& d, const SpectralField& u) {
  const auto& t = tables_for(u.basis);
  switch (d.kind) {
    case DiffusionKind::FractionalHalf:
      return (2.0 * d.gamma * t.sqrt_lap * u.coeffs.array()).matrix();
    case DiffusionKind::GradientNoise: {
      Eigen::VectorXd out = d.gamma * (t.deriv_projection * u.coeffs);
      if (!d.h.is_zero()) {
        const Eigen::ArrayXd vals = (t.synth * u.coeffs).array();
        require_finite(vals);
        out += t.analysis * eval(d.h, vals).matrix();
      }
      return out;
    }
  }
  throw std::logic_error("unreachable diffusion kind");
}

double drift_pairing_with_self(const DriftSpec& drift, const SpectralField& u) {
  const SpectralField a{u.basis, apply_drift(drift, u)};
  return pairing(a, u);
}

double sum_diffusion_sq(const EquationSpec& eq, const SpectralField& u) {
  double total = 0;
  for (const auto& d : eq.diffusions) {
    const SpectralField b{u.basis, apply_diffusion(d, u)};
    const double n = h_norm(b);
    total += n * n;
  }
  return total;
}

double rho_weight(const ConstantsLedger& led, double h_norm_val, double v_norm_val) {
  return led.L * (1.0 + std::pow(v_norm_val, led.alpha)) * (1.0 + std::pow(h_norm_val, led.beta));
}

}  // namespace specsde
