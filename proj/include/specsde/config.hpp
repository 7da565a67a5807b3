#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "specsde/operators.hpp"
#include "specsde/solver.hpp"

namespace specsde {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TaskParams {
  std::string kind;  // simulate | moments | check | sharpness | convergence | unique-monitor
  std::vector<double> p_list;           // moments sup-functional exponents
  long n_paths = 1000;
  std::vector<int> m_list;              // moments: optional uniform-in-m study
  double c_budget = 0.0;                // moments: a priori bound budget (0 = skip)
  long samples = 10000;                 // check: plan size
  double decay_q = 1.5;                 // check: coefficient decay
  int amp_points = 9;                   // check: amplitude grid size
  std::vector<double> gamma_sq_grid;    // sharpness: gamma^2 cells
  std::vector<double> p_grid = {4.0};   // sharpness: moment exponents
  int mode_k = 1;                       // sharpness / convergence wavenumber
  std::vector<double> dt_list;          // convergence
  double perturbation = 1e-3;           // unique-monitor initial-data offset
  bool export_binary = false;           // simulate
};

struct ExperimentConfig {
  // [equation]
  std::string equation;  // semilinear | burgers | fractional
  double gamma = 0.0;
  std::string g = "zero";
  std::string f = "zero";
  std::string h = "zero";
  double f_const = 0.0;
  double p0 = 4.0;  // fractional ledger exponent
  double theta_override = std::numeric_limits<double>::quiet_NaN();
  double K_override = std::numeric_limits<double>::quiet_NaN();
  double L_override = std::numeric_limits<double>::quiet_NaN();
  // [basis]
  int m = 0;
  int grid_points = 0;  // 0 = dealiasing default for the drift's polynomial degree
  // [solver]
  std::string scheme = "semi_implicit_em";
  double dt = 0.0;
  double T = 0.0;
  std::uint64_t seed = 0;
  int noise_truncation = -1;
  double tame_threshold = std::numeric_limits<double>::quiet_NaN();  // NaN = per-equation default
  std::string u0 = "mode:1:1";
  // [task]
  TaskParams task;
};

/// Parses a config file; .json selects the JSON front-end, anything else the
/// flat key=value format with [sections]. Unknown keys are rejected with
/// line/field diagnostics.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, bool json, const std::string& origin);

/// Canonical sorted key=value rendering of the effective config; hashing this
/// is what makes manifests reproducible.
std::string canonical_text(const ExperimentConfig&);
std::uint64_t config_hash(const ExperimentConfig&);

EquationSpec build_equation(const ExperimentConfig&);
SpectralField build_initial_data(const ExperimentConfig&, const BasisSpec&);
SolverConfig build_solver_config(const ExperimentConfig&);

Scheme parse_scheme(const std::string&);

}  // namespace specsde
