#include <doctest.h>

#include <cmath>

#include "specsde/oracle.hpp"
#include "specsde/rng.hpp"

using namespace specsde;

TEST_CASE("exact mode path") {
  const double dt = 1e-3;
  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(100);

  SUBCASE("gamma = 0 is heat decay") {
    const auto path = exact_mode_path({2, 0.0, 1.5}, zeros, dt);
    for (int n = 0; n <= 100; ++n) {
      CHECK(path[n] == doctest::Approx(1.5 * std::exp(-4.0 * n * dt)));
    }
  }
  SUBCASE("flat Brownian path leaves the drift-only exponent") {
    const double g = 0.4;
    const auto path = exact_mode_path({1, g, 1.0}, zeros, dt);
    CHECK(path[50] == doctest::Approx(std::exp(-(1.0 + 2.0 * g * g) * 50.0 * dt)));
  }
  SUBCASE("k = 0 is rejected: that mode is constant in time") {
    CHECK_THROWS_AS(exact_mode_path({0, 0.1, 1.0}, zeros, dt), std::invalid_argument);
  }
}

TEST_CASE("exact mode moment closed form") {
  SUBCASE("p = 2, gamma = 0") {
    CHECK(exact_mode_moment({3, 0.0, 1.0}, 2.0, 0.7) == doctest::Approx(std::exp(-2.0 * 9.0 * 0.7)));
  }
  SUBCASE("boundary 2 g^2 (p-1) = 1 freezes the moment") {
    const double g = std::sqrt(1.0 / 6.0);
    for (double t : {0.1, 0.5, 2.0}) {
      CHECK(exact_mode_moment({1, g, 1.0}, 4.0, t) == doctest::Approx(1.0));
    }
  }
  SUBCASE("k=1, g^2=0.1, p=4, t=0.5 -> e^{-0.8}") {
    CHECK(exact_mode_moment({1, std::sqrt(0.1), 1.0}, 4.0, 0.5) ==
          doctest::Approx(0.44932896411722156).epsilon(1e-12));
  }
  SUBCASE("boundedness iff 2 g^2 (p-1) <= 1") {
    CHECK(mode_moment_bounded(std::sqrt(0.1), 4.0));
    CHECK(!mode_moment_bounded(std::sqrt(0.2), 4.0));
    for (double g2 : {0.01, 0.1, 1.0 / 6.0, 0.2, 0.45}) {
      const ModeParams mp{2, std::sqrt(g2), 1.0};
      const bool nonincreasing = exact_mode_moment(mp, 4.0, 1.0) <= 1.0 + 1e-12;
      CHECK(nonincreasing == mode_moment_bounded(std::sqrt(g2), 4.0));
    }
  }
}

TEST_CASE("oracle self-consistency: second moment vs 1e5 sampled exact paths") {
  // E[path(t)^2] from the strong solution against the closed form, five (k, gamma) combos
  const double dt = 0.01;
  const int steps = 30;
  const std::pair<int, double> combos[] = {
      {1, 0.1}, {1, 0.35}, {2, 0.2}, {3, 0.1}, {2, 0.05}};
  for (const auto& [k, g] : combos) {
    const ModeParams mp{k, g, 1.0};
    const long n_paths = 100000;
    double sum = 0, sq = 0;
    for (long p = 0; p < n_paths; ++p) {
      // terminal value only needs W_T
      double w = 0;
      for (int s = 0; s < steps; ++s) {
        w += std::sqrt(dt) * standard_normal(99, static_cast<std::uint64_t>(p),
                                             static_cast<std::uint64_t>(s), 0);
      }
      const double sigma = 2.0 * g * k;
      const double x = std::exp((-k * k - 2.0 * g * g * k * k) * steps * dt + sigma * w);
      sum += x * x;
      sq += x * x * x * x;
    }
    const double mean = sum / n_paths;
    const double se = std::sqrt(std::max(0.0, (sq - n_paths * mean * mean) / (n_paths - 1.0)) /
                                n_paths);
    const double exact = exact_mode_moment(mp, 2.0, steps * dt);
    CHECK(std::abs(mean - exact) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("well-posedness predicates") {
  SUBCASE("gamma^2 = 1/3, p0 = 4: coercivity fails, ill-posedness holds") {
    const auto w = wellposed_predicates(std::sqrt(1.0 / 3.0), 4.0);
    CHECK(!w.coercivity_ok);  // 2 * (1/3) * 3 = 2 > 1
    CHECK(w.brz_veraar_illposed);
  }
  SUBCASE("gamma = 0: everything holds") {
    const auto w = wellposed_predicates(0.0, 4.0);
    CHECK(w.coercivity_ok);
    CHECK(w.stochastic_parabolicity_ok);
    CHECK(!w.brz_veraar_illposed);
  }
  SUBCASE("gamma^2 = 0.15, p0 = 4: inside the region") {
    const auto w = wellposed_predicates(std::sqrt(0.15), 4.0);
    CHECK(w.coercivity_ok);  // 0.9 < 1
  }
}
