#include <doctest.h>

#include <cmath>
#include <numbers>

#include "specsde/operators.hpp"
#include "specsde/rng.hpp"

using namespace specsde;
namespace {

constexpr double kPi = std::numbers::pi;

// fine Simpson quadrature of f(x) * sqrt(2) sin(k pi x) on (0,1)
template <typename F>
double sine_coeff_oracle(F f, int k, int n = 40001) {
  double acc = 0;
  const double h = 1.0 / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f(x) * std::sqrt(2.0) * std::sin(k * kPi * x);
  }
  return acc * h / 3.0;
}

SpectralField random_field(const BasisSpec& basis, std::uint64_t seed, long index, double amp,
                           double decay = 1.0) {
  SpectralField f = zero_field(basis);
  const auto& t = tables_for(basis);
  for (int i = 0; i < basis.m; ++i) {
    f.coeffs[i] = amp * std::pow(t.wavenumber[i] + 1.0, -decay) *
                  standard_normal(seed, static_cast<std::uint64_t>(index),
                                  static_cast<std::uint64_t>(i), 0, StreamPurpose::FieldSample);
  }
  return f;
}

}  // namespace

TEST_CASE("laplacian drift is the eigenvalue multiplier") {
  const auto basis = BasisSpec::dirichlet(6, 12);
  SpectralField u = zero_field(basis);
  u.coeffs[0] = 1.0;
  const DriftSpec lap{DriftKind::Laplacian, {}, {}};
  const auto a = apply_drift(lap, u);
  CHECK(a[0] == doctest::Approx(-kPi * kPi));
  for (int i = 1; i < basis.m; ++i) CHECK(a[i] == 0.0);
  CHECK(drift_pairing_with_self(lap, u) == doctest::Approx(-kPi * kPi));
  CHECK(drift_pairing_with_self(lap, zero_field(basis)) == 0.0);

  SUBCASE("linearity to machine precision") {
    const auto x = random_field(basis, 3, 0, 1.0);
    const auto y = random_field(basis, 3, 1, 0.3);
    SpectralField z = x;
    z.coeffs = 2.0 * x.coeffs - 0.5 * y.coeffs;
    const Eigen::VectorXd lhs = apply_drift(lap, z);
    const Eigen::VectorXd rhs = 2.0 * apply_drift(lap, x) - 0.5 * apply_drift(lap, y);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13 * rhs.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("burgers nonlinearity matches the quadrature oracle") {
  const auto basis = BasisSpec::dirichlet(8, 16);
  const DriftSpec burgers{DriftKind::Burgers, {}, {}};

  SUBCASE("u = c phi_1 puts c^2 pi / sqrt(2) on phi_2") {
    const double c = 0.7;
    SpectralField u = zero_field(basis);
    u.coeffs[0] = c;
    const Eigen::VectorXd nl = drift_nonlinear(burgers, u);
    CHECK(nl[1] == doctest::Approx(c * c * kPi / std::sqrt(2.0)).epsilon(1e-12));
    for (int i = 0; i < basis.m; ++i) {
      if (i != 1) CHECK(std::abs(nl[i]) < 1e-12);
    }
  }
  SUBCASE("zero field") {
    CHECK(drift_nonlinear(burgers, zero_field(basis)).norm() == 0.0);
  }
  SUBCASE("random field against Simpson") {
    const auto u = random_field(basis, 5, 0, 0.8);
    const Eigen::VectorXd nl = drift_nonlinear(burgers, u);
    auto uu = [&](double x) {
      double val = 0, dval = 0;
      for (int i = 0; i < basis.m; ++i) {
        val += u.coeffs[i] * std::sqrt(2.0) * std::sin((i + 1) * kPi * x);
        dval += u.coeffs[i] * std::sqrt(2.0) * (i + 1) * kPi * std::cos((i + 1) * kPi * x);
      }
      return val * dval;
    };
    for (int k = 1; k <= basis.m; ++k) {
      CHECK(nl[k - 1] == doctest::Approx(sine_coeff_oracle(uu, k)).epsilon(1e-8));
    }
  }
  SUBCASE("energy neutrality over 1e3 random fields") {
    for (long i = 0; i < 1000; ++i) {
      const auto u = random_field(basis, 7, i, std::pow(10.0, (i % 5) - 2.0));
      const double v = v_norm(u);
      const double residual = drift_pairing_with_self(burgers, u) + v * v;
      CHECK(std::abs(residual) <= 1e-10 * (1.0 + v * v * v));
    }
  }
}

TEST_CASE("semilinear drift against the quadrature oracle") {
  const auto basis = BasisSpec::dirichlet(4, 256);  // big grid: pointwise terms are not band-limited
  const DriftSpec drift{DriftKind::SemiLinear, scalar_fn("sin"), growth_fn("logistic")};
  const auto u = random_field(basis, 9, 0, 0.6);
  const Eigen::VectorXd nl = drift_nonlinear(drift, u);
  auto fn = [&](double x) {
    double val = 0, dval = 0;
    for (int i = 0; i < basis.m; ++i) {
      val += u.coeffs[i] * std::sqrt(2.0) * std::sin((i + 1) * kPi * x);
      dval += u.coeffs[i] * std::sqrt(2.0) * (i + 1) * kPi * std::cos((i + 1) * kPi * x);
    }
    return std::sin(val) * dval + (val - val * val * val);
  };
  for (int k = 1; k <= basis.m; ++k) {
    CHECK(nl[k - 1] == doctest::Approx(sine_coeff_oracle(fn, k)).epsilon(2e-4));
  }
}

TEST_CASE("diffusion operators") {
  SUBCASE("fractional multiplier 2 gamma |k|") {
    const auto basis = BasisSpec::fourier_torus(3);
    SpectralField u = zero_field(basis);
    u.coeffs[1] = 1.0;  // Re c_1
    const DiffusionSpec d{DiffusionKind::FractionalHalf, 0.5, scalar_fn("zero")};
    const auto b = apply_diffusion(d, u);
    CHECK(b[1] == doctest::Approx(1.0));  // 2 * 0.5 * 1 * 1
    CHECK(b.cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(apply_diffusion(d, zero_field(basis)).norm() == 0.0);
  }
  SUBCASE("fractional identity |B(u)|_H^2 = 4 g^2 (|u|_{1,2}^2 - |u|_H^2)") {
    const auto basis = BasisSpec::fourier_torus(8);
    const DiffusionSpec d{DiffusionKind::FractionalHalf, 0.35, scalar_fn("zero")};
    for (long i = 0; i < 200; ++i) {
      const auto u = random_field(basis, 11, i, 1.3);
      const SpectralField b{basis, apply_diffusion(d, u)};
      const double h = h_norm(u);
      const double v = v_norm(u);
      const double lhs = h_norm(b) * h_norm(b);
      CHECK(lhs == doctest::Approx(4.0 * 0.35 * 0.35 * (v * v - h * h)).epsilon(1e-12));
    }
  }
  SUBCASE("gradient-noise projection of the phi_1 derivative") {
    const auto basis = BasisSpec::dirichlet(8, 64);
    SpectralField u = zero_field(basis);
    u.coeffs[0] = 1.0;
    const DiffusionSpec d{DiffusionKind::GradientNoise, 1.0, scalar_fn("zero")};
    const auto b = apply_diffusion(d, u);
    // projection of sqrt(2) pi cos(pi x) onto the sine modes
    auto deriv = [](double x) { return std::sqrt(2.0) * kPi * std::cos(kPi * x); };
    for (int k = 1; k <= basis.m; ++k) {
      CHECK(b[k - 1] == doctest::Approx(sine_coeff_oracle(deriv, k)).epsilon(1e-9));
      if (k % 2 == 1) CHECK(std::abs(b[k - 1]) < 1e-10);  // odd modes vanish
    }
    CHECK(h_norm({basis, b}) <= v_norm(u) * (1.0 + 1e-12));  // projection contracts
  }
  SUBCASE("h term and h(0) = 0 zero fixed point") {
    const auto basis = BasisSpec::dirichlet(6, 32);
    const DiffusionSpec d{DiffusionKind::GradientNoise, 0.4, scalar_fn("tanh_scaled:0.5")};
    CHECK(apply_diffusion(d, zero_field(basis)).norm() == 0.0);
    const auto u = random_field(basis, 13, 0, 0.5);
    const SpectralField b{basis, apply_diffusion(d, u)};
    // |B(u)|_H <= gamma |u|_V + L_h |u|_H
    CHECK(h_norm(b) <= 0.4 * v_norm(u) + 0.5 * h_norm(u) + 1e-12);
  }
}

TEST_CASE("V* growth bound with a frozen constant") {
  // fit on a prefix, freeze, then scan fresh samples for counterexamples
  const auto basis = BasisSpec::dirichlet(12, 24);
  const DriftSpec burgers{DriftKind::Burgers, {}, {}};
  double cfit = 0;
  auto ratio = [&](const SpectralField& u) {
    const auto a = apply_drift(burgers, u);
    const double lhs = vstar_norm(basis, a);
    const double h = h_norm(u);
    const double v = v_norm(u);
    return lhs * lhs / ((1.0 + v * v) * (1.0 + h * h));
  };
  for (long i = 0; i < 500; ++i) cfit = std::max(cfit, ratio(random_field(basis, 15, i, std::pow(10.0, (i % 5) - 2.0))));
  const double frozen = 1.05 * cfit;
  for (long i = 500; i < 10000; ++i) {
    CHECK(ratio(random_field(basis, 15, i, std::pow(10.0, (i % 7) / 1.5 - 2.0))) <= frozen);
  }
}

TEST_CASE("overflow is reported with a diagnostic, not a crash") {
  const auto basis = BasisSpec::dirichlet(4, 8);
  SpectralField u = zero_field(basis);
  u.coeffs[0] = 1e200;
  const DriftSpec burgers{DriftKind::Burgers, {}, {}};
  CHECK_THROWS_AS((void)drift_nonlinear(burgers, u), OperatorOverflow);
}

TEST_CASE("example factories fill the constants ledger") {
  SUBCASE("fractional") {
    const auto eq = fractional_equation(std::sqrt(0.1), 4.0, BasisSpec::fourier_torus(8));
    CHECK(eq.ledger.alpha == 2.0);
    CHECK(eq.ledger.beta == 0.0);
    CHECK(eq.ledger.theta == doctest::Approx(0.8));  // 2 - 4 g^2 (p0-1)
    CHECK(eq.ledger.p0 == 4.0);
  }
  SUBCASE("burgers ledger theta = 2 - 2 eps - 6 g^2") {
    const auto eq = burgers_equation(std::sqrt(0.2), scalar_fn("zero"), 0.0,
                                     BasisSpec::dirichlet(16));
    CHECK(eq.ledger.theta == doctest::Approx(2.0 - 0.1 - 1.2));
    CHECK(eq.ledger.alpha == 2.0);
    CHECK(eq.ledger.beta == 2.0);
    CHECK(eq.ledger.p0 == 4.0);
  }
  SUBCASE("semilinear theta = 2 - eps - 6 g^2") {
    const auto eq = semilinear_equation(std::sqrt(0.2), scalar_fn("sin"), growth_fn("linear_decay"),
                                        scalar_fn("tanh_scaled:0.5"), 0.0,
                                        BasisSpec::dirichlet(16));
    CHECK(eq.ledger.theta == doctest::Approx(2.0 - 0.05 - 1.2));
  }
  SUBCASE("structural invariants are enforced") {
    CHECK_THROWS_AS(fractional_equation(0.1, 4.0, BasisSpec::dirichlet(8)),
                    std::invalid_argument);
    CHECK_THROWS_AS(burgers_equation(0.1, scalar_fn("zero"), 0.0, BasisSpec::fourier_torus(4)),
                    std::invalid_argument);
    CHECK_THROWS_AS(fractional_equation(0.1, 1.5, BasisSpec::fourier_torus(4)),
                    std::invalid_argument);  // p0 < beta + 2
  }
}
