#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "specsde/basis.hpp"
#include "specsde/scalar_functions.hpp"

namespace specsde {

/// Thrown when a pointwise nonlinearity produces non-finite values; carries
/// the offending magnitude so callers can either exclude the sample or flag
/// the path as exploded.
struct OperatorOverflow : std::runtime_error {
  double magnitude;
  explicit OperatorOverflow(double mag)
      : std::runtime_error("operator overflow: non-finite pointwise value, |u| up to " +
                           std::to_string(mag)),
        magnitude(mag) {}
};

enum class DriftKind { Laplacian, Burgers, SemiLinear };

// A: V -> V*. Laplacian: A(u) = Lap u. Burgers: A(u) = Lap u + u Du.
// SemiLinear: A(u) = Lap u + g(u) Du + f(u).
struct DriftSpec {
  DriftKind kind = DriftKind::Laplacian;
  ScalarFn g;  // SemiLinear transport coefficient (bounded Lipschitz)
  GrowthFn f;  // SemiLinear zero-order term
};

enum class DiffusionKind { GradientNoise, FractionalHalf };

// B: V -> H, one scalar Wiener driver per entry.
// GradientNoise: B(u) = gamma Du + h(u). FractionalHalf: B(u) = 2 gamma (-Lap)^{1/2} u.
struct DiffusionSpec {
  DiffusionKind kind = DiffusionKind::GradientNoise;
  double gamma = 0.0;
  ScalarFn h;  // GradientNoise only
};

// Structural constants of the equation: exponents alpha, beta, p0 and the
// inequality constants theta (coercivity margin), K (shared growth constant),
// L (local-monotonicity weight), f (deterministic forcing constant).
struct ConstantsLedger {
  double alpha = 2.0;
  double beta = 2.0;
  double p0 = 4.0;
  double theta = 0.0;
  double K = 0.0;
  double L = 0.0;
  double f = 0.0;
};

struct EquationSpec {
  std::string name;  // "semilinear" | "burgers" | "fractional"
  DriftSpec drift;
  std::vector<DiffusionSpec> diffusions;
  BasisSpec basis;
  ConstantsLedger ledger;
};

void validate(const EquationSpec&);

// Factories with per-example default ledgers (see operators.cpp for the
// inequality chains behind the K/L defaults).
EquationSpec semilinear_equation(double gamma, const ScalarFn& g, const GrowthFn& f,
                                 const ScalarFn& h, double f_const, const BasisSpec&);
EquationSpec burgers_equation(double gamma, const ScalarFn& h, double f_const, const BasisSpec&);
EquationSpec fractional_equation(double gamma, double p0, const BasisSpec&);

/// Coefficients (<A(u), phi_k>)_k; Laplacian part is diagonal, nonlinear parts
/// are evaluated pseudo-spectrally on the dealiased grid and projected back.
Eigen::VectorXd apply_drift(const DriftSpec&, const SpectralField& u);

/// Non-Laplacian part N(u) = A(u) + Lap-part; what the semi-implicit scheme
/// treats explicitly.
Eigen::VectorXd drift_nonlinear(const DriftSpec&, const SpectralField& u);

Eigen::VectorXd apply_diffusion(const DiffusionSpec&, const SpectralField& u);

/// <A(u), u>; for Burgers the nonlinear term contributes nothing (the
/// quadratic transport is energy-neutral under exact dealiasing).
double drift_pairing_with_self(const DriftSpec&, const SpectralField& u);

/// sum_j |B^j(u)|_H^2 over the diffusion family.
double sum_diffusion_sq(const EquationSpec&, const SpectralField& u);

/// rho(x) = L (1+|x|_V^alpha)(1+|x|_H^beta), the local-monotonicity weight.
double rho_weight(const ConstantsLedger&, double h_norm, double v_norm);

}  // namespace specsde
