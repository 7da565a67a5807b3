#include "specsde/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "specsde/rng.hpp"

namespace specsde {

namespace {

int active_drivers(const EquationSpec& eq, const SolverConfig& cfg) {
  const int total = static_cast<int>(eq.diffusions.size());
  if (cfg.noise_truncation < 0) return total;
  if (cfg.noise_truncation < 1 || cfg.noise_truncation > total) {
    throw std::invalid_argument("SolverConfig: noise_truncation must lie in [1, #diffusions]");
  }
  return cfg.noise_truncation;
}

bool sane(const Eigen::VectorXd& c, const BasisSpec& b, double cap) {
  if (!c.allFinite()) return false;
  return h_norm({b, c}) <= cap;
}

}  // namespace

long step_count(const SolverConfig& cfg) {
  if (!(cfg.dt > 0)) throw std::invalid_argument("SolverConfig: dt must be positive");
  if (!(cfg.T > 0)) throw std::invalid_argument("SolverConfig: T must be positive");
  const double ratio = cfg.T / cfg.dt;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("SolverConfig: T/dt must be an integer number of steps");
  }
  return n;
}

StepResult step(const EquationSpec& eq, const SpectralField& u,
                const Eigen::Ref<const Eigen::VectorXd>& dW, const SolverConfig& cfg) {
  const auto& t = tables_for(u.basis);
  const int drivers = active_drivers(eq, cfg);
  if (dW.size() != drivers) {
    throw std::invalid_argument("step: expected one increment per retained driver");
  }
  StepResult out;
  try {
    Eigen::VectorXd n = drift_nonlinear(eq.drift, u);
    const double tame_level =
        cfg.scheme == Scheme::TamedEM ? 0.0 : cfg.tame_threshold;
    const double n_h = h_norm({u.basis, n});
    if (cfg.dt * n_h > tame_level) n /= (1.0 + cfg.dt * n_h);
    Eigen::VectorXd noise = Eigen::VectorXd::Zero(u.basis.m);
    for (int j = 0; j < drivers; ++j) {
      noise += apply_diffusion(eq.diffusions[static_cast<size_t>(j)], u) * dW[j];
    }
    if (cfg.scheme == Scheme::ExplicitEM) {
      out.coeffs = u.coeffs + cfg.dt * ((-t.lap * u.coeffs.array()).matrix() + n) + noise;
    } else {
      out.coeffs = ((u.coeffs + cfg.dt * n + noise).array() / (1.0 + cfg.dt * t.lap)).matrix();
    }
  } catch (const OperatorOverflow&) {
    out.coeffs = Eigen::VectorXd::Constant(u.basis.m, std::nan(""));
    out.exploded = true;
    return out;
  }
  out.exploded = !sane(out.coeffs, u.basis, cfg.explosion_norm);
  return out;
}

std::pair<Trajectory, PathDiagnostics> solve_path_with_increments(
    const EquationSpec& eq, const SpectralField& u0, const SolverConfig& cfg,
    const Eigen::Ref<const Eigen::MatrixXd>& increments) {
  if (u0.basis.kind != eq.basis.kind) {
    throw std::invalid_argument("solve_path: initial data in the wrong basis");
  }
  const long steps = step_count(cfg);
  const int drivers = active_drivers(eq, cfg);
  if (increments.rows() != steps || increments.cols() != drivers) {
    throw std::invalid_argument("solve_path: increments must be steps x drivers");
  }

  Trajectory traj;
  traj.basis = eq.basis;
  traj.dt = cfg.dt;
  traj.times = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, cfg.T);
  traj.fields.reserve(static_cast<size_t>(steps) + 1);
  traj.increments = increments;

  SpectralField u = resize_modes(u0, eq.basis.m);
  u.basis = eq.basis;  // keep the equation's quadrature grid
  traj.fields.push_back(u.coeffs);

  PathDiagnostics diag;
  diag.sup_h_norm = h_norm(u);

  for (long n = 0; n < steps; ++n) {
    const StepResult r = step(eq, u, increments.row(n).transpose(), cfg);
    if (r.exploded) {
      traj.exploded_step = n + 1;
      diag.exploded_step = n + 1;
      break;
    }
    u.coeffs = r.coeffs;
    traj.fields.push_back(u.coeffs);
    diag.sup_h_norm = std::max(diag.sup_h_norm, h_norm(u));
  }
  return {std::move(traj), std::move(diag)};
}

std::pair<Trajectory, PathDiagnostics> solve_path(const EquationSpec& eq, const SpectralField& u0,
                                                  const SolverConfig& cfg) {
  const long steps = step_count(cfg);
  const int drivers = active_drivers(eq, cfg);
  const double sqdt = std::sqrt(cfg.dt);
  Eigen::MatrixXd increments(steps, drivers);
  for (long n = 0; n < steps; ++n) {
    for (int j = 0; j < drivers; ++j) {
      increments(n, j) =
          sqdt * standard_normal(cfg.seed, static_cast<std::uint64_t>(cfg.path_id),
                                 static_cast<std::uint64_t>(n), static_cast<std::uint32_t>(j));
    }
  }
  return solve_path_with_increments(eq, u0, cfg, increments);
}

Eigen::VectorXd energy_residual(const EquationSpec& eq, const Trajectory& traj,
                                const SolverConfig& cfg) {
  if (traj.exploded_step) {
    throw std::invalid_argument("energy_residual: trajectory exploded, no residual");
  }
  const long steps = static_cast<long>(traj.fields.size()) - 1;
  const int drivers = static_cast<int>(traj.increments.cols());
  Eigen::VectorXd res(steps);
  for (long n = 0; n < steps; ++n) {
    const SpectralField un = traj.field_at(n);
    const SpectralField un1 = traj.field_at(n + 1);
    const double h0 = h_norm(un);
    const double h1 = h_norm(un1);
    SpectralField mid = un;
    if (cfg.scheme != Scheme::ExplicitEM) mid.coeffs = 0.5 * (un.coeffs + un1.coeffs);
    const SpectralField au{traj.basis, apply_drift(eq.drift, un)};
    double drift_term = 2.0 * pairing(au, mid);
    double noise_sq = 0.0;
    double martingale = 0.0;
    for (int j = 0; j < drivers; ++j) {
      const SpectralField bj{traj.basis, apply_diffusion(eq.diffusions[static_cast<size_t>(j)], un)};
      const double bn = h_norm(bj);
      noise_sq += bn * bn;
      martingale += 2.0 * h_inner(un, bj) * traj.increments(n, j);
    }
    res[n] = h1 * h1 - h0 * h0 - traj.dt * (drift_term + noise_sq) - martingale;
  }
  return res;
}

Eigen::VectorXd uniqueness_monitor(const EquationSpec&, const Trajectory& a, const Trajectory& b,
                                   const ConstantsLedger& led) {
  if (a.exploded_step || b.exploded_step) {
    throw std::invalid_argument("uniqueness_monitor: exploded trajectory");
  }
  if (a.fields.size() != b.fields.size() || a.dt != b.dt) {
    throw std::invalid_argument("uniqueness_monitor: incompatible trajectories");
  }
  if (a.increments.rows() != b.increments.rows() || a.increments.cols() != b.increments.cols() ||
      (a.increments.size() > 0 && (a.increments.array() != b.increments.array()).any())) {
    throw std::invalid_argument("uniqueness_monitor: trajectories do not share increments");
  }
  const long npts = static_cast<long>(a.fields.size());
  Eigen::VectorXd m(npts);
  double cum = 0.0;
  for (long n = 0; n < npts; ++n) {
    const SpectralField diff{a.basis, a.fields[static_cast<size_t>(n)] - b.fields[static_cast<size_t>(n)]};
    const double d = h_norm(diff);
    m[n] = std::exp(-cum) * d * d;
    const SpectralField bn = b.field_at(n);
    cum += rho_weight(led, h_norm(bn), v_norm(bn)) * a.dt;
  }
  return m;
}

}  // namespace specsde
