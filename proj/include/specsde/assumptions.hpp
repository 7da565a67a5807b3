#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "specsde/operators.hpp"

namespace specsde {

// Sampling can falsify an assumption but never prove it; every report carries
// "no violation found over plan" semantics and says so in its note.

struct SamplePlan {
  long count = 1000;
  double spectral_decay = 1.5;  // coefficient decay exponent q
  double amp_min = 1e-2;        // amplitude grid, log-spaced
  double amp_max = 1e2;
  int amp_points = 9;
  std::uint64_t seed = 0;
};

struct RhoStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  long count = 0;
};

struct AssumptionReport {
  std::string assumption;
  double worst_residual = 0.0;  // max over samples of lhs - rhs at the configured constants
  double worst_scale = 0.0;     // max(|lhs|, |rhs|) at the worst sample
  std::map<std::string, double> fitted;  // smallest/largest admissible constants observed
  long samples_used = 0;
  long samples_excluded = 0;  // operator overflow at the sample
  bool violated = false;
  bool incomplete = false;
  std::string note;
  RhoStats rho_stats;
};

/// Deterministic sample stream: the first m indices probe single modes, the
/// rest are random fields with coefficient decay k^{-q} and amplitudes walked
/// along the log grid. slot separates the members of a pair/triple while
/// keeping their amplitudes aligned.
SpectralField sample_field(const BasisSpec&, const SamplePlan&, long index, std::uint32_t slot);

/// A-1: continuity of eps -> <A(x + eps xbar), y>, probed on eps = +/-2^-j.
AssumptionReport check_hemicontinuity(const EquationSpec&, const SamplePlan&);

/// A-2: 2<A(x)-A(xbar), x-xbar> + sum_j |B^j(x)-B^j(xbar)|^2
///        <= L (1+|xbar|_V^a)(1+|xbar|_H^b) |x-xbar|_H^2.
/// Reports the smallest admissible L over the plan and the residual at the
/// ledger L.
AssumptionReport check_local_monotonicity(const EquationSpec&, const SamplePlan&);

/// A-3: 2<A(x),x> + (p0-1) sum_j |B^j(x)|^2 + theta |x|_V^a <= f + K|x|_H^2.
/// Bisects for the largest theta > 0 with no sampled violation (1e-6
/// absolute, infimum-side endpoint); theta <= 0 means violated.
AssumptionReport check_coercivity(const EquationSpec&, double p0, const SamplePlan&);

/// A-4: |A(x)|_{V*}^{a/(a-1)} <= (f + K|x|_V^a)(1+|x|_H^b); fits the smallest
/// admissible K.
AssumptionReport check_growth(const EquationSpec&, const SamplePlan&);

/// Derived bound: sum_j |B^j(x)|^2 <= C (1 + f^{p0/2} + |x|_H^{p0} + |x|_V^a
/// + |x|_V^a |x|_H^b); fits C and checks the reference C = 4(1+K).
AssumptionReport check_b_growth_remark(const EquationSpec&, const SamplePlan&);

/// rho(psi) = L (1+|psi|_V^a)(1+|psi|_H^b) with the ledger constants.
double rho(const EquationSpec&, const SpectralField& psi);

std::vector<AssumptionReport> check_all(const EquationSpec&, const SamplePlan&);

}  // namespace specsde
