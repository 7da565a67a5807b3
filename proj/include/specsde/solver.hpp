#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "specsde/operators.hpp"

namespace specsde {

enum class Scheme { SemiImplicitEM, ExplicitEM, TamedEM };

struct SolverConfig {
  double dt = 0.0;
  double T = 0.0;
  Scheme scheme = Scheme::SemiImplicitEM;
  int noise_truncation = -1;  // Wiener drivers retained; -1 = all
  std::uint64_t seed = 0;
  std::int64_t path_id = 0;
  // |N(u)|_H * dt above which the explicit drift part is tamed; infinity
  // disables, 0 tames every step (the TamedEM scheme forces 0).
  double tame_threshold = std::numeric_limits<double>::infinity();
  double explosion_norm = 1e12;
};

/// Number of steps; rejects T/dt that is not an integer within rounding.
long step_count(const SolverConfig&);

struct Trajectory {
  BasisSpec basis;
  double dt = 0.0;
  Eigen::VectorXd times;                // steps+1 grid points
  std::vector<Eigen::VectorXd> fields;  // packed coefficients per grid point
  Eigen::MatrixXd increments;           // steps x drivers Brownian increments
  std::optional<long> exploded_step;

  SpectralField field_at(long n) const { return {basis, fields[static_cast<size_t>(n)]}; }
};

struct PathDiagnostics {
  Eigen::VectorXd energy_residual;  // filled by energy_residual(), empty otherwise
  double sup_h_norm = 0.0;
  std::optional<long> exploded_step;
};

struct StepResult {
  Eigen::VectorXd coeffs;
  bool exploded = false;
};

/// One Euler-Maruyama step. dW carries one N(0,dt) increment per retained
/// driver. SemiImplicitEM solves (1 + dt lap_k) c^{n+1} = c^n + dt N_k(u_n) +
/// sum_j B^j_k(u_n) dW^j per mode; TamedEM divides N by (1 + dt |N|_H);
/// ExplicitEM treats everything explicitly. Non-finite output is flagged, not
/// thrown.
StepResult step(const EquationSpec&, const SpectralField& u, const Eigen::Ref<const Eigen::VectorXd>& dW,
                const SolverConfig&);

/// Integrate from u0 (projected onto the equation's Galerkin space). The
/// trajectory is a deterministic function of (eq, u0, cfg): increments come
/// from the counter generator keyed by (seed, path_id, step, driver), so any
/// path replays in isolation. Explosion yields a partial trajectory with the
/// step recorded.
std::pair<Trajectory, PathDiagnostics> solve_path(const EquationSpec&, const SpectralField& u0,
                                                  const SolverConfig&);

/// Same integration loop with caller-supplied increments (steps x drivers);
/// used by convergence studies that subsample one fine Brownian path.
std::pair<Trajectory, PathDiagnostics> solve_path_with_increments(
    const EquationSpec&, const SpectralField& u0, const SolverConfig&,
    const Eigen::Ref<const Eigen::MatrixXd>& increments);

/// Per-step residual of the discrete energy identity
///   |u_{n+1}|^2 - |u_n|^2 - dt (2<A(u_n), u_mid> + sum_j |B^j(u_n)|^2)
///   - 2 sum_j (u_n, B^j(u_n)) dW^j_n,
/// where u_mid is (u_n+u_{n+1})/2 for the implicit schemes and u_n for the
/// explicit one. Mean over paths and steps vanishes as dt -> 0.
Eigen::VectorXd energy_residual(const EquationSpec&, const Trajectory&, const SolverConfig&);

/// Exponential-weight pathwise monitor for two common-noise trajectories:
///   M_n = exp(-dt sum_{i<n} rho(b_i)) |a_n - b_n|_H^2
/// with rho the ledger weight evaluated along the second trajectory. Under
/// the local-monotonicity inequality the sample mean of M_n is nonincreasing
/// up to O(dt) bias.
Eigen::VectorXd uniqueness_monitor(const EquationSpec&, const Trajectory& a, const Trajectory& b,
                                   const ConstantsLedger&);

}  // namespace specsde
