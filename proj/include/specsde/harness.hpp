#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsde/config.hpp"
#include "specsde/moments.hpp"
#include "specsde/oracle.hpp"

namespace specsde {

// Documented process exit codes, one per failure class.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitExplosion = 3;
inline constexpr int kExitViolation = 4;

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> n_paths;
  int threads = 0;  // 0 = hardware concurrency; never affects output bytes
  bool quiet = false;
};

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> outputs;  // files written, relative to out_dir
  nlohmann::ordered_json manifest;
};

/// Executes the config's task, writes the task outputs plus manifest.json
/// into out_dir and returns the manifest. Every output file except
/// manifest.json (which records wall time) is byte-deterministic in
/// (config, seed) and independent of the worker count.
RunResult run_experiment(const ExperimentConfig&, const std::string& out_dir,
                         const RunOverrides& = {});

// Sharpness sweep cell: oracle verdict and predicates always; Monte Carlo
// moment only on subcritical cells (heavy-tailed supercritical moments make
// sample means meaningless, so those cells carry the oracle value and the
// solver explosion fraction instead).
struct SharpnessCell {
  double gamma_sq = 0.0;
  double p = 0.0;
  double exponent = 0.0;  // p k^2 (2 gamma^2 (p-1) - 1)
  bool bounded = false;
  double oracle_moment_T = 0.0;
  double mc_moment_T = 0.0;  // NaN on supercritical cells
  double mc_se = 0.0;
  double explosion_fraction = 0.0;
  WellPosedness predicates;
};

std::vector<SharpnessCell> sharpness_sweep(const std::vector<double>& gamma_sq_grid,
                                           const std::vector<double>& p_grid, int mode_k, double T,
                                           double dt, long n_paths, std::uint64_t seed,
                                           int threads = 0);

struct ConvergenceResult {
  std::vector<double> dt_list;
  std::vector<double> mean_error;
  std::vector<double> se_error;
  double slope = 0.0;
  double intercept = 0.0;
  bool degenerate = false;  // zero error encountered, no meaningful fit
};

/// Strong-error study for the diagonal torus equation: one fine Brownian path
/// per (seed, path_id) is subsampled to every dt in the list, the numerical
/// terminal field is compared in H against the exact mode-wise solution, and
/// the error decay order is fitted by least squares in log-log.
ConvergenceResult convergence_study(const EquationSpec&, const SpectralField& u0,
                                    const SolverConfig& cfg_base, const std::vector<double>& dt_list,
                                    long n_paths, int threads = 0);

struct MonitorResult {
  Eigen::VectorXd times;
  Eigen::VectorXd mean_m;
  Eigen::VectorXd se_m;
  bool monotone_ok = false;  // adjacent increases all within one combined SE
  double max_z = 0.0;        // worst increase in combined-SE units
  long n_paths = 0;
  long n_exploded = 0;
};

MonitorResult unique_monitor_study(const EquationSpec&, const SpectralField& u0_a,
                                   const SpectralField& u0_b, const SolverConfig&, long n_paths,
                                   const ConstantsLedger&, int threads = 0);

}  // namespace specsde
