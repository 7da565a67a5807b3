#include "specsde/moments.hpp"

#include <cmath>
#include <stdexcept>

#include "specsde/parallel.hpp"

namespace specsde {

namespace {

constexpr long kBlock = 32;  // fixed reduction granularity, independent of worker count

struct BlockSums {
  long n_ok = 0;
  long n_exploded = 0;
  Eigen::VectorXd hp0_sum, hp0_sq;
  std::vector<double> sup_sum, sup_sq;
  double intv_sum = 0, intv_sq = 0;
  double mixed_sum = 0, mixed_sq = 0;
};

FunctionalEstimate reduce_scalar(double sum, double sq, long n) {
  FunctionalEstimate e;
  if (n < 1) {
    e.value = std::nan("");
    e.std_error = std::nan("");
    return e;
  }
  e.value = sum / static_cast<double>(n);
  if (n >= 2) {
    const double var = std::max(0.0, (sq - static_cast<double>(n) * e.value * e.value) /
                                         static_cast<double>(n - 1));
    e.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return e;
}

void validate_request(const MomentRequest& req) {
  if (req.n_paths < 2) throw std::invalid_argument("MomentRequest: n_paths >= 2 required");
  for (double p : req.p_list) {
    if (p < 2.0 || p > req.p0) {
      throw std::invalid_argument("MomentRequest: each p must lie in [2, p0]");
    }
    if (p == req.p0 && req.p0 > 2.0) {
      throw std::invalid_argument(
          "MomentRequest: sup-moment estimation requires p < p0 when p0 > 2; the p0-th "
          "sup-moment is not a controlled functional");
    }
  }
}

}  // namespace

MomentReport estimate(const EquationSpec& eq, const SpectralField& u0, const SolverConfig& cfg,
                      const MomentRequest& req, int threads) {
  validate_request(req);
  const long steps = step_count(cfg);
  const long npts = steps + 1;
  const long n_blocks = (req.n_paths + kBlock - 1) / kBlock;
  const size_t n_p = req.p_list.size();

  std::vector<BlockSums> sums(static_cast<size_t>(n_blocks));
  parallel_for_blocks(n_blocks, threads, [&](long b) {
    BlockSums s;
    s.hp0_sum = Eigen::VectorXd::Zero(npts);
    s.hp0_sq = Eigen::VectorXd::Zero(npts);
    s.sup_sum.assign(n_p, 0.0);
    s.sup_sq.assign(n_p, 0.0);
    const long lo = b * kBlock;
    const long hi = std::min(req.n_paths, lo + kBlock);
    for (long i = lo; i < hi; ++i) {
      SolverConfig pc = cfg;
      pc.path_id = req.first_path_id + i;
      const auto [traj, diag] = solve_path(eq, u0, pc);
      if (traj.exploded_step) {
        ++s.n_exploded;
        continue;
      }
      double intv = 0, mixed = 0;
      for (long n = 0; n < npts; ++n) {
        const SpectralField f = traj.field_at(n);
        const double h = h_norm(f);
        const double hp0 = std::pow(h, req.p0);
        s.hp0_sum[n] += hp0;
        s.hp0_sq[n] += hp0 * hp0;
        if (n < steps) {  // left-endpoint rule, aligned with the Euler filtration
          const double va = std::pow(v_norm(f), req.alpha);
          intv += va * cfg.dt;
          mixed += std::pow(h, req.p0 - 2.0) * va * cfg.dt;
        }
      }
      s.intv_sum += intv;
      s.intv_sq += intv * intv;
      s.mixed_sum += mixed;
      s.mixed_sq += mixed * mixed;
      for (size_t j = 0; j < n_p; ++j) {
        const double sp = std::pow(diag.sup_h_norm, req.p_list[j]);
        s.sup_sum[j] += sp;
        s.sup_sq[j] += sp * sp;
      }
      ++s.n_ok;
    }
    sums[static_cast<size_t>(b)] = std::move(s);
  });

  // deterministic reduction in ascending block order
  MomentReport rpt;
  rpt.n_paths = req.n_paths;
  rpt.times = Eigen::VectorXd::LinSpaced(npts, 0.0, cfg.T);
  Eigen::VectorXd hp0_sum = Eigen::VectorXd::Zero(npts);
  Eigen::VectorXd hp0_sq = Eigen::VectorXd::Zero(npts);
  std::vector<double> sup_sum(n_p, 0.0), sup_sq(n_p, 0.0);
  double intv_sum = 0, intv_sq = 0, mixed_sum = 0, mixed_sq = 0;
  long n_ok = 0;
  for (const auto& s : sums) {
    n_ok += s.n_ok;
    rpt.n_exploded += s.n_exploded;
    hp0_sum += s.hp0_sum;
    hp0_sq += s.hp0_sq;
    for (size_t j = 0; j < n_p; ++j) {
      sup_sum[j] += s.sup_sum[j];
      sup_sq[j] += s.sup_sq[j];
    }
    intv_sum += s.intv_sum;
    intv_sq += s.intv_sq;
    mixed_sum += s.mixed_sum;
    mixed_sq += s.mixed_sq;
  }
  rpt.explosion_fraction = static_cast<double>(rpt.n_exploded) / static_cast<double>(req.n_paths);
  rpt.mean_hp0.resize(npts);
  rpt.se_hp0.resize(npts);
  for (long n = 0; n < npts; ++n) {
    const auto e = reduce_scalar(hp0_sum[n], hp0_sq[n], n_ok);
    rpt.mean_hp0[n] = e.value;
    rpt.se_hp0[n] = e.std_error;
  }
  if (n_ok > 0) {
    long arg = 0;
    rpt.sup_t_mean_hp0 = rpt.mean_hp0.maxCoeff(&arg);
    rpt.sup_t_mean_hp0_se = rpt.se_hp0[arg];
    rpt.sup_t_mean_hp0_time = rpt.times[arg];
  } else {
    rpt.sup_t_mean_hp0 = std::nan("");
    rpt.sup_t_mean_hp0_se = std::nan("");
    rpt.sup_t_mean_hp0_time = std::nan("");
  }
  for (size_t j = 0; j < n_p; ++j) {
    rpt.mean_sup_hp.emplace_back(req.p_list[j], reduce_scalar(sup_sum[j], sup_sq[j], n_ok));
  }
  rpt.int_v_alpha = reduce_scalar(intv_sum, intv_sq, n_ok);
  rpt.mixed = reduce_scalar(mixed_sum, mixed_sq, n_ok);
  return rpt;
}

EquationSpec with_galerkin_dimension(const EquationSpec& eq, int m) {
  EquationSpec out = eq;
  out.basis.m = m;
  const double r = eq.drift.kind == DriftKind::SemiLinear ? std::max(2.0, eq.drift.f.growth_r)
                   : eq.drift.kind == DriftKind::Burgers  ? 2.0
                                                          : 1.0;
  out.basis.grid_points = dealias_grid(m, r);
  validate(out);
  return out;
}

std::vector<MomentReport> uniform_in_m_study(const EquationSpec& eq, const SpectralField& u0,
                                             const SolverConfig& cfg, const MomentRequest& req,
                                             const std::vector<int>& m_list, int threads) {
  if (m_list.empty()) throw std::invalid_argument("uniform_in_m_study: empty m list");
  for (size_t i = 1; i < m_list.size(); ++i) {
    if (m_list[i] <= m_list[i - 1]) {
      throw std::invalid_argument("uniform_in_m_study: m list must be increasing");
    }
  }
  std::vector<MomentReport> out;
  out.reserve(m_list.size());
  for (int m : m_list) {
    const EquationSpec eq_m = with_galerkin_dimension(eq, m);
    out.push_back(estimate(eq_m, resize_modes(u0, m), cfg, req, threads));
  }
  return out;
}

BoundCheck apriori_bound_check(const MomentReport& rpt, const SpectralField& u0,
                               const EquationSpec& eq, double C_budget) {
  BoundCheck chk;
  const double T = rpt.times.size() > 0 ? rpt.times[rpt.times.size() - 1] : 0.0;
  const double p0 = eq.ledger.p0;
  chk.lhs = rpt.sup_t_mean_hp0 + rpt.int_v_alpha.value + rpt.mixed.value;
  chk.rhs = C_budget * (std::pow(h_norm(u0), p0) + T * std::pow(eq.ledger.f, p0 / 2.0));
  chk.margin = chk.rhs - chk.lhs;
  chk.pass = chk.lhs <= chk.rhs;
  return chk;
}

}  // namespace specsde
