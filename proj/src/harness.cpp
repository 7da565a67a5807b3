#include "specsde/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "specsde/assumptions.hpp"
#include "specsde/parallel.hpp"
#include "specsde/rng.hpp"
#include "specsde/version.hpp"

namespace specsde {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr long kBlock = 32;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// RFC-4180-style rows, '.' decimal, one header comment carrying the format
// version; all numbers rendered with %.17g so re-runs are byte-identical.
class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& task) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open output file " + path.string());
    out_ << "# " << kCsvFormat << " task=" << task << "\n";
  }
  void header(const std::vector<std::string>& cols) { line(cols); }
  void line(const std::vector<std::string>& cols) {
    for (size_t i = 0; i < cols.size(); ++i) {
      if (i) out_ << ",";
      out_ << csv_cell(cols[i]);
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path.string());
  out << j.dump(2) << "\n";
}

double json_safe(double x) { return x; }  // nlohmann serializes non-finite as null

ordered_json report_to_json(const AssumptionReport& r) {
  ordered_json j;
  j["assumption"] = r.assumption;
  j["worst_residual"] = json_safe(r.worst_residual);
  j["worst_scale"] = json_safe(r.worst_scale);
  j["violated"] = r.violated;
  j["samples_used"] = r.samples_used;
  j["samples_excluded"] = r.samples_excluded;
  j["incomplete"] = r.incomplete;
  j["note"] = r.note;
  ordered_json fitted;
  for (const auto& [k, v] : r.fitted) fitted[k] = json_safe(v);
  j["fitted"] = fitted;
  j["rho_stats"] = {{"min", r.rho_stats.min},
                    {"mean", r.rho_stats.mean},
                    {"max", r.rho_stats.max},
                    {"count", r.rho_stats.count}};
  return j;
}

ordered_json moment_report_to_json(const MomentReport& r) {
  ordered_json j;
  j["n_paths"] = r.n_paths;
  j["n_exploded"] = r.n_exploded;
  j["explosion_fraction"] = r.explosion_fraction;
  j["sup_t_mean_hp0"] = json_safe(r.sup_t_mean_hp0);
  j["sup_t_mean_hp0_se"] = json_safe(r.sup_t_mean_hp0_se);
  j["sup_t_mean_hp0_time"] = json_safe(r.sup_t_mean_hp0_time);
  ordered_json sup = ordered_json::array();
  for (const auto& [p, est] : r.mean_sup_hp) {
    sup.push_back({{"p", p}, {"value", json_safe(est.value)}, {"std_error", json_safe(est.std_error)}});
  }
  j["mean_sup_hp"] = sup;
  j["int_v_alpha"] = {{"value", json_safe(r.int_v_alpha.value)},
                      {"std_error", json_safe(r.int_v_alpha.std_error)}};
  j["mixed"] = {{"value", json_safe(r.mixed.value)}, {"std_error", json_safe(r.mixed.std_error)}};
  return j;
}

ordered_json ledger_to_json(const ConstantsLedger& led) {
  return {{"alpha", led.alpha}, {"beta", led.beta}, {"p0", led.p0},
          {"theta", led.theta}, {"K", led.K},       {"L", led.L},
          {"f", led.f}};
}

struct ScalarAccum {
  double sum = 0, sq = 0;
  long n = 0;
  void add(double x) {
    sum += x;
    sq += x * x;
    ++n;
  }
  void merge(const ScalarAccum& o) {
    sum += o.sum;
    sq += o.sq;
    n += o.n;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : std::nan(""); }
  double se() const {
    if (n < 2) return std::nan("");
    const double m = mean();
    const double var = std::max(0.0, (sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace

// ============================================================================
// Sharpness sweep
// ============================================================================

std::vector<SharpnessCell> sharpness_sweep(const std::vector<double>& gamma_sq_grid,
                                           const std::vector<double>& p_grid, int mode_k, double T,
                                           double dt, long n_paths, std::uint64_t seed,
                                           int threads) {
  if (gamma_sq_grid.empty() || p_grid.empty()) {
    throw std::invalid_argument("sharpness_sweep: empty grid");
  }
  if (mode_k < 1) throw std::invalid_argument("sharpness_sweep: mode k >= 1 required");
  std::vector<SharpnessCell> cells;
  for (double g2 : gamma_sq_grid) {
    for (double p : p_grid) {
      SharpnessCell cell;
      cell.gamma_sq = g2;
      cell.p = p;
      const double gamma = std::sqrt(g2);
      const double k2 = static_cast<double>(mode_k) * mode_k;
      cell.exponent = p * k2 * (2.0 * g2 * (p - 1.0) - 1.0);
      cell.bounded = cell.exponent <= 0.0;
      cell.oracle_moment_T = exact_mode_moment({mode_k, gamma, 1.0}, p, T);
      cell.predicates = wellposed_predicates(gamma, p);
      cell.mc_moment_T = std::nan("");
      cell.mc_se = std::nan("");
      if (n_paths > 0) {
        const BasisSpec basis = BasisSpec::fourier_torus(mode_k);
        const EquationSpec eq = fractional_equation(gamma, p, basis);
        SpectralField u0 = zero_field(basis);
        u0.coeffs[2 * mode_k - 1] = 1.0;  // unit mode-k coefficient
        SolverConfig cfg;
        cfg.dt = dt;
        cfg.T = T;
        cfg.seed = seed;
        const long n_blocks = (n_paths + kBlock - 1) / kBlock;
        std::vector<ScalarAccum> mom(static_cast<size_t>(n_blocks));
        std::vector<long> boom(static_cast<size_t>(n_blocks), 0);
        parallel_for_blocks(n_blocks, threads, [&](long b) {
          ScalarAccum acc;
          long exploded = 0;
          for (long i = b * kBlock; i < std::min(n_paths, (b + 1) * kBlock); ++i) {
            SolverConfig pc = cfg;
            pc.path_id = i;
            const auto [traj, diag] = solve_path(eq, u0, pc);
            if (traj.exploded_step) {
              ++exploded;
              continue;
            }
            const double h = h_norm(traj.field_at(static_cast<long>(traj.fields.size()) - 1));
            // |u|_H^2 = 2 |u_k|^2 for a single excited mode pair
            acc.add(std::pow(0.5 * h * h, 0.5 * p));
          }
          mom[static_cast<size_t>(b)] = acc;
          boom[static_cast<size_t>(b)] = exploded;
        });
        ScalarAccum total;
        long exploded = 0;
        for (long b = 0; b < n_blocks; ++b) {
          total.merge(mom[static_cast<size_t>(b)]);
          exploded += boom[static_cast<size_t>(b)];
        }
        cell.explosion_fraction = static_cast<double>(exploded) / static_cast<double>(n_paths);
        if (cell.bounded) {  // supercritical sample means are not reported
          cell.mc_moment_T = total.mean();
          cell.mc_se = total.se();
        }
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

// ============================================================================
// Strong convergence study
// ============================================================================

ConvergenceResult convergence_study(const EquationSpec& eq, const SpectralField& u0,
                                    const SolverConfig& cfg_base, const std::vector<double>& dt_list,
                                    long n_paths, int threads) {
  if (eq.drift.kind != DriftKind::Laplacian || eq.diffusions.size() != 1 ||
      eq.diffusions[0].kind != DiffusionKind::FractionalHalf) {
    throw std::invalid_argument("convergence_study: exact reference exists for the diagonal torus equation only");
  }
  if (dt_list.size() < 3) throw std::invalid_argument("convergence_study: need at least 3 dt values");
  if (n_paths < 1) throw std::invalid_argument("convergence_study: n_paths >= 1 required");
  const double T = cfg_base.T;
  const double dt_min = *std::min_element(dt_list.begin(), dt_list.end());
  std::vector<long> ratio;
  for (double dt : dt_list) {
    const double r = dt / dt_min;
    const long ri = std::lround(r);
    if (ri < 1 || std::abs(r - static_cast<double>(ri)) > 1e-9 * r) {
      throw std::invalid_argument("convergence_study: every dt must be an integer multiple of the smallest");
    }
    SolverConfig probe = cfg_base;
    probe.dt = dt;
    step_count(probe);  // validates T/dt
    ratio.push_back(ri);
  }
  SolverConfig fine = cfg_base;
  fine.dt = dt_min;
  const long steps_fine = step_count(fine);
  const double gamma = eq.diffusions[0].gamma;
  const auto& tables = tables_for(eq.basis);
  const SpectralField u0m = resize_modes(u0, eq.basis.m);

  const long n_blocks = (n_paths + kBlock - 1) / kBlock;
  std::vector<std::vector<ScalarAccum>> err(static_cast<size_t>(n_blocks),
                                            std::vector<ScalarAccum>(dt_list.size()));
  parallel_for_blocks(n_blocks, threads, [&](long b) {
    auto& acc = err[static_cast<size_t>(b)];
    for (long path = b * kBlock; path < std::min(n_paths, (b + 1) * kBlock); ++path) {
      Eigen::VectorXd fine_dw(steps_fine);
      const double sq = std::sqrt(dt_min);
      for (long s = 0; s < steps_fine; ++s) {
        fine_dw[s] = sq * standard_normal(cfg_base.seed, static_cast<std::uint64_t>(path),
                                          static_cast<std::uint64_t>(s), 0);
      }
      const double w_T = fine_dw.sum();
      // exact terminal field: every mode is an exponential martingale driven
      // by the same scalar Wiener path
      Eigen::VectorXd exact(eq.basis.m);
      for (int i = 0; i < eq.basis.m; ++i) {
        const double k = tables.wavenumber[i];
        exact[i] = u0m.coeffs[i] *
                   std::exp((-k * k - 2.0 * gamma * gamma * k * k) * T + 2.0 * gamma * k * w_T);
      }
      bool exploded = false;
      std::vector<double> path_err(dt_list.size(), 0.0);
      for (size_t d = 0; d < dt_list.size(); ++d) {
        const long r = ratio[d];
        const long steps = steps_fine / r;
        Eigen::MatrixXd inc(steps, 1);
        for (long s = 0; s < steps; ++s) inc(s, 0) = fine_dw.segment(s * r, r).sum();
        SolverConfig cfg = cfg_base;
        cfg.dt = dt_list[d];
        cfg.path_id = path;
        const auto [traj, diag] = solve_path_with_increments(eq, u0m, cfg, inc);
        if (traj.exploded_step) {
          exploded = true;
          break;
        }
        const Eigen::VectorXd diff = traj.fields.back() - exact;
        path_err[d] = h_norm({eq.basis, diff});
      }
      if (exploded) continue;  // drop the path from every dt to keep errors paired
      for (size_t d = 0; d < dt_list.size(); ++d) acc[d].add(path_err[d]);
    }
  });

  ConvergenceResult res;
  res.dt_list = dt_list;
  for (size_t d = 0; d < dt_list.size(); ++d) {
    ScalarAccum total;
    for (long b = 0; b < n_blocks; ++b) total.merge(err[static_cast<size_t>(b)][d]);
    res.mean_error.push_back(total.mean());
    res.se_error.push_back(total.se());
  }
  // least-squares slope of log error vs log dt
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(dt_list.size());
  for (size_t d = 0; d < dt_list.size(); ++d) {
    if (!(res.mean_error[d] > 0.0) || !std::isfinite(res.mean_error[d])) {
      res.degenerate = true;
      res.slope = std::nan("");
      res.intercept = std::nan("");
      return res;
    }
    const double x = std::log(dt_list[d]);
    const double y = std::log(res.mean_error[d]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  res.intercept = (sy - res.slope * sx) / n;
  return res;
}

// ============================================================================
// Uniqueness-weight monitor
// ============================================================================

MonitorResult unique_monitor_study(const EquationSpec& eq, const SpectralField& u0_a,
                                   const SpectralField& u0_b, const SolverConfig& cfg,
                                   long n_paths, const ConstantsLedger& led, int threads) {
  if (n_paths < 2) throw std::invalid_argument("unique_monitor_study: n_paths >= 2 required");
  const long steps = step_count(cfg);
  const long npts = steps + 1;
  const long n_blocks = (n_paths + kBlock - 1) / kBlock;
  struct Block {
    Eigen::VectorXd sum, sq;
    long n_ok = 0, n_exploded = 0;
  };
  std::vector<Block> blocks(static_cast<size_t>(n_blocks));
  parallel_for_blocks(n_blocks, threads, [&](long b) {
    Block blk;
    blk.sum = Eigen::VectorXd::Zero(npts);
    blk.sq = Eigen::VectorXd::Zero(npts);
    for (long i = b * kBlock; i < std::min(n_paths, (b + 1) * kBlock); ++i) {
      SolverConfig pc = cfg;
      pc.path_id = i;
      const auto [ta, da] = solve_path(eq, u0_a, pc);
      const auto [tb, db] = solve_path(eq, u0_b, pc);
      if (ta.exploded_step || tb.exploded_step) {
        ++blk.n_exploded;
        continue;
      }
      const Eigen::VectorXd m = uniqueness_monitor(eq, ta, tb, led);
      blk.sum += m;
      blk.sq += m.cwiseProduct(m);
      ++blk.n_ok;
    }
    blocks[static_cast<size_t>(b)] = std::move(blk);
  });
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(npts);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(npts);
  long n_ok = 0, n_exploded = 0;
  for (const auto& blk : blocks) {
    sum += blk.sum;
    sq += blk.sq;
    n_ok += blk.n_ok;
    n_exploded += blk.n_exploded;
  }
  MonitorResult res;
  res.times = Eigen::VectorXd::LinSpaced(npts, 0.0, cfg.T);
  res.mean_m.resize(npts);
  res.se_m.resize(npts);
  res.n_paths = n_paths;
  res.n_exploded = n_exploded;
  for (long n = 0; n < npts; ++n) {
    ScalarAccum a;
    a.sum = sum[n];
    a.sq = sq[n];
    a.n = n_ok;
    res.mean_m[n] = a.mean();
    res.se_m[n] = a.se();
  }
  res.max_z = -std::numeric_limits<double>::infinity();
  for (long n = 0; n + 1 < npts; ++n) {
    const double d = res.mean_m[n + 1] - res.mean_m[n];
    const double combined = std::sqrt(res.se_m[n] * res.se_m[n] + res.se_m[n + 1] * res.se_m[n + 1]);
    double z = 0.0;
    if (combined > 0.0) {
      z = d / combined;
    } else if (d > 0.0) {
      z = std::numeric_limits<double>::infinity();
    }
    res.max_z = std::max(res.max_z, z);
  }
  res.monotone_ok = n_ok >= 2 && res.max_z <= 1.0;
  return res;
}

// ============================================================================
// Task dispatch
// ============================================================================

namespace {

int run_simulate(const ExperimentConfig& c, const EquationSpec& eq, const SolverConfig& cfg,
                 const fs::path& dir, RunResult& rr) {
  const SpectralField u0 = build_initial_data(c, eq.basis);
  SolverConfig pc = cfg;
  pc.path_id = 0;
  const auto [traj, diag] = solve_path(eq, u0, pc);
  {
    CsvFile csv(dir / "trajectory.csv", "simulate");
    csv.header({"time", "mode_index", "coefficient"});
    for (size_t n = 0; n < traj.fields.size(); ++n) {
      for (int i = 0; i < eq.basis.m; ++i) {
        csv.line({fmt17(traj.times[static_cast<long>(n)]), std::to_string(i),
                  fmt17(traj.fields[n][i])});
      }
    }
  }
  rr.outputs.push_back("trajectory.csv");
  if (c.task.export_binary) {
    std::ofstream bin(dir / "trajectory.bin", std::ios::binary);
    const char magic[4] = {'S', 'P', 'S', 'D'};
    bin.write(magic, 4);
    auto put_u32 = [&](std::uint32_t v) {
      unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
      bin.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(1);  // version
    put_u32(static_cast<std::uint32_t>(eq.basis.m));
    put_u32(static_cast<std::uint32_t>(traj.fields.size() - 1));
    // float64 array, row-major (steps+1) x m, little-endian
    for (const auto& f : traj.fields) {
      for (int i = 0; i < eq.basis.m; ++i) {
        const double v = f[i];
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char b[8];
        for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
        bin.write(reinterpret_cast<const char*>(b), 8);
      }
    }
    rr.outputs.push_back("trajectory.bin");
  }
  rr.manifest["diagnostics"] = {{"sup_h_norm", diag.sup_h_norm},
                                {"exploded_step", traj.exploded_step ? ordered_json(*traj.exploded_step)
                                                                     : ordered_json(nullptr)}};
  return traj.exploded_step ? kExitExplosion : kExitOk;
}

int run_check(const ExperimentConfig& c, const EquationSpec& eq, const fs::path& dir,
              RunResult& rr) {
  SamplePlan plan;
  plan.count = c.task.samples;
  plan.spectral_decay = c.task.decay_q;
  plan.amp_points = c.task.amp_points;
  plan.seed = c.seed;
  const auto reports = check_all(eq, plan);
  ordered_json arr = ordered_json::array();
  bool violated = false;
  {
    CsvFile csv(dir / "assumptions.csv", "check");
    csv.header({"assumption", "violated", "worst_residual", "worst_scale", "samples_used",
                "samples_excluded", "fitted_theta", "fitted_K", "fitted_L", "fitted_C", "rho_min",
                "rho_mean", "rho_max"});
    for (const auto& r : reports) {
      violated = violated || r.violated;
      arr.push_back(report_to_json(r));
      auto fit = [&](const char* k) {
        auto it = r.fitted.find(k);
        return it == r.fitted.end() ? std::string() : fmt17(it->second);
      };
      csv.line({r.assumption, r.violated ? "true" : "false", fmt17(r.worst_residual),
                fmt17(r.worst_scale), std::to_string(r.samples_used),
                std::to_string(r.samples_excluded), fit("theta"), fit("K"), fit("L"), fit("C"),
                fmt17(r.rho_stats.min), fmt17(r.rho_stats.mean), fmt17(r.rho_stats.max)});
    }
  }
  write_json(dir / "assumptions.json", arr);
  rr.outputs.push_back("assumptions.csv");
  rr.outputs.push_back("assumptions.json");
  ordered_json fitted;
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.fitted) fitted[r.assumption + "." + k] = v;
  }
  rr.manifest["fitted_constants"] = fitted;
  return violated ? kExitViolation : kExitOk;
}

int run_moments(const ExperimentConfig& c, const EquationSpec& eq, const SolverConfig& cfg,
                const fs::path& dir, RunResult& rr, int threads) {
  const SpectralField u0 = build_initial_data(c, eq.basis);
  MomentRequest req;
  req.p_list = c.task.p_list;
  req.p0 = eq.ledger.p0;
  req.alpha = eq.ledger.alpha;
  req.n_paths = c.task.n_paths;

  std::vector<int> m_list = c.task.m_list;
  if (m_list.empty()) m_list = {eq.basis.m};
  const bool study = c.task.m_list.size() > 0;
  std::vector<MomentReport> reports;
  if (study) {
    reports = uniform_in_m_study(eq, u0, cfg, req, m_list, threads);
  } else {
    reports.push_back(estimate(eq, u0, cfg, req, threads));
  }

  ordered_json jarr = ordered_json::array();
  bool all_exploded = false;
  {
    CsvFile csv(dir / "moments.csv", "moments");
    csv.header({"functional", "p", "m", "t", "value", "std_error"});
    for (size_t mi = 0; mi < reports.size(); ++mi) {
      const auto& r = reports[mi];
      const std::string m_str = std::to_string(m_list[mi]);
      for (long n = 0; n < r.times.size(); ++n) {
        csv.line({"mean_hp0", fmt17(req.p0), m_str, fmt17(r.times[n]), fmt17(r.mean_hp0[n]),
                  fmt17(r.se_hp0[n])});
      }
      csv.line({"sup_t_mean_hp0", fmt17(req.p0), m_str, fmt17(r.sup_t_mean_hp0_time),
                fmt17(r.sup_t_mean_hp0), fmt17(r.sup_t_mean_hp0_se)});
      for (const auto& [p, est] : r.mean_sup_hp) {
        csv.line({"mean_sup_hp", fmt17(p), m_str, "", fmt17(est.value), fmt17(est.std_error)});
      }
      csv.line({"int_v_alpha", fmt17(req.alpha), m_str, "", fmt17(r.int_v_alpha.value),
                fmt17(r.int_v_alpha.std_error)});
      csv.line({"mixed", fmt17(req.p0), m_str, "", fmt17(r.mixed.value), fmt17(r.mixed.std_error)});
      csv.line({"explosion_fraction", "", m_str, "", fmt17(r.explosion_fraction), ""});
      ordered_json jr = moment_report_to_json(r);
      jr["m"] = m_list[mi];
      jarr.push_back(jr);
      all_exploded = all_exploded || r.n_exploded == r.n_paths;
    }
  }
  rr.outputs.push_back("moments.csv");
  ordered_json doc;
  doc["reports"] = jarr;
  if (c.task.c_budget > 0.0 && !reports.empty()) {
    const auto chk = apriori_bound_check(reports.front(), resize_modes(u0, m_list.front()), eq,
                                         c.task.c_budget);
    doc["apriori_bound_check"] = {{"pass", chk.pass},
                                  {"lhs", json_safe(chk.lhs)},
                                  {"rhs", json_safe(chk.rhs)},
                                  {"margin", json_safe(chk.margin)},
                                  {"c_budget", c.task.c_budget}};
  }
  write_json(dir / "moments.json", doc);
  rr.outputs.push_back("moments.json");
  return all_exploded ? kExitExplosion : kExitOk;
}

int run_sharpness(const ExperimentConfig& c, const fs::path& dir, RunResult& rr, int threads) {
  if (c.task.gamma_sq_grid.empty()) {
    throw ConfigError("sharpness task requires task.gamma_sq_grid");
  }
  if (!(c.T > 0)) throw ConfigError("sharpness task requires solver.T");
  if (c.task.n_paths > 0 && !(c.dt > 0)) throw ConfigError("sharpness with paths requires solver.dt");
  const auto cells = sharpness_sweep(c.task.gamma_sq_grid, c.task.p_grid, c.task.mode_k, c.T, c.dt,
                                     c.task.n_paths, c.seed, threads);
  {
    CsvFile csv(dir / "sharpness.csv", "sharpness");
    csv.header({"gamma_sq", "p", "exponent", "bounded", "oracle_moment_T", "mc_moment_T", "mc_se",
                "explosion_fraction", "coercivity_ok", "stochastic_parabolicity_ok",
                "brz_veraar_illposed"});
    for (const auto& cell : cells) {
      csv.line({fmt17(cell.gamma_sq), fmt17(cell.p), fmt17(cell.exponent),
                cell.bounded ? "true" : "false", fmt17(cell.oracle_moment_T),
                std::isnan(cell.mc_moment_T) ? "" : fmt17(cell.mc_moment_T),
                std::isnan(cell.mc_se) ? "" : fmt17(cell.mc_se), fmt17(cell.explosion_fraction),
                cell.predicates.coercivity_ok ? "true" : "false",
                cell.predicates.stochastic_parabolicity_ok ? "true" : "false",
                cell.predicates.brz_veraar_illposed ? "true" : "false"});
    }
  }
  rr.outputs.push_back("sharpness.csv");
  return kExitOk;
}

int run_convergence(const ExperimentConfig& c, const EquationSpec& eq, const SolverConfig& cfg,
                    const fs::path& dir, RunResult& rr, int threads) {
  if (c.task.dt_list.empty()) throw ConfigError("convergence task requires task.dt_list");
  const SpectralField u0 = build_initial_data(c, eq.basis);
  ConvergenceResult res;
  try {
    res = convergence_study(eq, u0, cfg, c.task.dt_list, c.task.n_paths, threads);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("convergence: ") + e.what());
  }
  {
    CsvFile csv(dir / "convergence.csv", "convergence");
    csv.header({"dt", "mean_strong_error", "std_error"});
    for (size_t d = 0; d < res.dt_list.size(); ++d) {
      csv.line({fmt17(res.dt_list[d]), fmt17(res.mean_error[d]), fmt17(res.se_error[d])});
    }
  }
  write_json(dir / "convergence.json",
             ordered_json{{"slope", json_safe(res.slope)},
                          {"intercept", json_safe(res.intercept)},
                          {"degenerate", res.degenerate},
                          {"n_paths", c.task.n_paths}});
  rr.outputs.push_back("convergence.csv");
  rr.outputs.push_back("convergence.json");
  rr.manifest["fitted_order"] = json_safe(res.slope);
  return kExitOk;
}

int run_unique_monitor(const ExperimentConfig& c, const EquationSpec& eq, const SolverConfig& cfg,
                       const fs::path& dir, RunResult& rr, int threads) {
  const SpectralField u0_a = build_initial_data(c, eq.basis);
  SpectralField u0_b = u0_a;
  // perturb the lowest mode with a nonzero wavenumber
  const int idx = eq.basis.kind == BasisKind::FourierTorus ? 1 : 0;
  u0_b.coeffs[idx] += c.task.perturbation;
  const auto res = unique_monitor_study(eq, u0_a, u0_b, cfg, c.task.n_paths, eq.ledger, threads);
  {
    CsvFile csv(dir / "unique_monitor.csv", "unique-monitor");
    csv.header({"t", "mean_M", "std_error"});
    for (long n = 0; n < res.times.size(); ++n) {
      csv.line({fmt17(res.times[n]), fmt17(res.mean_m[n]), fmt17(res.se_m[n])});
    }
  }
  write_json(dir / "unique_monitor.json",
             ordered_json{{"monotone_ok", res.monotone_ok},
                          {"max_z", json_safe(res.max_z)},
                          {"n_paths", res.n_paths},
                          {"n_exploded", res.n_exploded},
                          {"perturbation", c.task.perturbation},
                          {"rho_L", eq.ledger.L}});
  rr.outputs.push_back("unique_monitor.csv");
  rr.outputs.push_back("unique_monitor.json");
  return res.n_exploded == res.n_paths ? kExitExplosion : kExitOk;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                         const RunOverrides& over) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = config;
  if (over.seed) c.seed = *over.seed;
  if (over.n_paths) c.task.n_paths = *over.n_paths;

  RunResult rr;
  rr.manifest["artifact"] = "specsde";
  rr.manifest["version"] = kVersion;
  rr.manifest["task"] = c.task.kind;
  rr.manifest["config_hash"] = hash_hex(config_hash(c));
  rr.manifest["config"] = canonical_text(c);
  rr.manifest["seed"] = c.seed;

  const fs::path dir(out_dir);
  fs::create_directories(dir);

  ordered_json notes = ordered_json::array();
  if (c.equation == "fractional") {
    notes.push_back(
        "mode SDE d u_k = -k^2 u_k dt + 2 gamma |k| u_k dW; moment exponent p k^2 (2 gamma^2 "
        "(p-1) - 1), Monte Carlo verified before freezing");
  }

  const EquationSpec eq = build_equation(c);
  rr.manifest["equation"] = c.equation;
  rr.manifest["ledger"] = ledger_to_json(eq.ledger);
  const SolverConfig cfg = build_solver_config(c);
  if (std::isfinite(cfg.tame_threshold)) {
    notes.push_back("taming engages when dt*|N(u)|_H > " + fmt17(cfg.tame_threshold));
  }
  rr.manifest["notes"] = notes;

  int code = kExitOk;
  if (c.task.kind == "simulate") {
    code = run_simulate(c, eq, cfg, dir, rr);
  } else if (c.task.kind == "check") {
    code = run_check(c, eq, dir, rr);
  } else if (c.task.kind == "moments") {
    code = run_moments(c, eq, cfg, dir, rr, over.threads);
  } else if (c.task.kind == "sharpness") {
    code = run_sharpness(c, dir, rr, over.threads);
  } else if (c.task.kind == "convergence") {
    code = run_convergence(c, eq, cfg, dir, rr, over.threads);
  } else if (c.task.kind == "unique-monitor") {
    code = run_unique_monitor(c, eq, cfg, dir, rr, over.threads);
  } else {
    throw ConfigError("unknown task kind '" + c.task.kind + "'");
  }

  rr.exit_code = code;
  rr.manifest["outputs"] = rr.outputs;
  rr.manifest["exit_code"] = code;
  const auto t1 = std::chrono::steady_clock::now();
  rr.manifest["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
  write_json(dir / "manifest.json", rr.manifest);
  if (!over.quiet) {
    std::cout << "[specsde] task=" << c.task.kind << " exit=" << code << " outputs=" << out_dir
              << " hash=" << rr.manifest["config_hash"].get<std::string>() << "\n";
  }
  return rr;
}

}  // namespace specsde
