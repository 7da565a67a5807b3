#include "specsde/basis.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace specsde {

namespace {
constexpr double kPi = std::numbers::pi;

void validate_spec(const BasisSpec& b) {
  if (b.m < 1) throw std::invalid_argument("BasisSpec: m must be positive");
  if (b.kind == BasisKind::FourierTorus && b.m % 2 == 0) {
    throw std::invalid_argument("BasisSpec: FourierTorus needs odd m = 2K+1, got m=" +
                                std::to_string(b.m));
  }
  if (b.grid_points < dealias_floor(b.m)) {
    throw std::invalid_argument("BasisSpec: grid_points=" + std::to_string(b.grid_points) +
                                " below dealiasing floor ceil(3m/2)=" +
                                std::to_string(dealias_floor(b.m)));
  }
}

std::unique_ptr<BasisTables> build_tables(const BasisSpec& spec) {
  auto t = std::make_unique<BasisTables>();
  t->spec = spec;
  const int m = spec.m;
  const int n = spec.grid_points;
  t->hweight.resize(m);
  t->lap.resize(m);
  t->vweight.resize(m);
  t->wavenumber.resize(m);
  t->grid.resize(n);
  t->synth.resize(n, m);
  t->synth_deriv.resize(n, m);

  if (spec.kind == BasisKind::DirichletSine) {
    // phi_k(x) = sqrt(2) sin(k pi x) on (0,1), interior grid x_i = i/(N+1).
    t->quad_weight = 1.0 / (n + 1);
    for (int j = 0; j < n; ++j) t->grid[j] = static_cast<double>(j + 1) / (n + 1);
    for (int i = 0; i < m; ++i) {
      const double k = i + 1;
      t->wavenumber[i] = k;
      t->lap[i] = (k * kPi) * (k * kPi);
      t->vweight[i] = t->lap[i];
      t->hweight[i] = 1.0;
      for (int j = 0; j < n; ++j) {
        t->synth(j, i) = std::sqrt(2.0) * std::sin(k * kPi * t->grid[j]);
        t->synth_deriv(j, i) = std::sqrt(2.0) * k * kPi * std::cos(k * kPi * t->grid[j]);
      }
    }
    t->analysis = t->quad_weight * t->synth.transpose();
    // cosine -> sine projection by exact inner products: <D phi_j, phi_k> =
    // 4jk/(k^2 - j^2) for odd k - j, else 0. Grid quadrature is O(N^-2) off
    // for these integrands, so the closed form is used; skew-symmetry
    // <Pi_m Du, u> = 0 then holds exactly.
    t->deriv_projection = Eigen::MatrixXd::Zero(m, m);
    for (int kk = 1; kk <= m; ++kk) {
      for (int jj = 1; jj <= m; ++jj) {
        if ((kk - jj) % 2 != 0) {
          t->deriv_projection(kk - 1, jj - 1) =
              4.0 * static_cast<double>(jj) * kk / (static_cast<double>(kk) * kk - static_cast<double>(jj) * jj);
        }
      }
    }
  } else {
    // e_k(x) = e^{ikx}/sqrt(2 pi) on [0, 2 pi), packed real storage.
    const int kmax = spec.max_wavenumber();
    const double norm = 1.0 / std::sqrt(2.0 * kPi);
    t->quad_weight = 2.0 * kPi / n;
    for (int j = 0; j < n; ++j) t->grid[j] = 2.0 * kPi * j / n;
    t->hweight[0] = 1.0;
    t->lap[0] = 0.0;
    t->vweight[0] = 1.0;
    t->wavenumber[0] = 0.0;
    for (int j = 0; j < n; ++j) {
      t->synth(j, 0) = norm;
      t->synth_deriv(j, 0) = 0.0;
    }
    for (int k = 1; k <= kmax; ++k) {
      for (int part = 0; part < 2; ++part) {
        const int i = 2 * k - 1 + part;
        t->hweight[i] = 2.0;
        t->lap[i] = static_cast<double>(k) * k;
        t->vweight[i] = 1.0 + t->lap[i];
        t->wavenumber[i] = k;
      }
      for (int j = 0; j < n; ++j) {
        const double c = std::cos(k * t->grid[j]);
        const double s = std::sin(k * t->grid[j]);
        t->synth(j, 2 * k - 1) = 2.0 * norm * c;   // Re c_k
        t->synth(j, 2 * k) = -2.0 * norm * s;      // Im c_k
        // D(e^{ikx}) = ik e^{ikx}: (Re, Im) -> (-k Im, k Re)
        t->synth_deriv(j, 2 * k - 1) = -2.0 * norm * k * s;
        t->synth_deriv(j, 2 * k) = -2.0 * norm * k * c;
      }
    }
    t->analysis.resize(m, n);
    for (int j = 0; j < n; ++j) {
      t->analysis(0, j) = norm * t->quad_weight;
      for (int k = 1; k <= kmax; ++k) {
        t->analysis(2 * k - 1, j) = norm * t->quad_weight * std::cos(k * t->grid[j]);
        t->analysis(2 * k, j) = -norm * t->quad_weight * std::sin(k * t->grid[j]);
      }
    }
    // Derivative stays band-limited on the torus: exact coefficient map.
    t->deriv_projection = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k <= kmax; ++k) {
      t->deriv_projection(2 * k - 1, 2 * k) = -static_cast<double>(k);
      t->deriv_projection(2 * k, 2 * k - 1) = static_cast<double>(k);
    }
  }
  t->sqrt_lap = t->lap.sqrt();
  return t;
}

const BasisTables& cached_tables(const BasisSpec& spec) {
  using Key = std::tuple<int, int, int>;
  static std::mutex mu;
  static std::map<Key, std::unique_ptr<BasisTables>> cache;
  const Key key{static_cast<int>(spec.kind), spec.m, spec.grid_points};
  std::scoped_lock lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_tables(spec)).first;
  return *it->second;
}

}  // namespace

int dealias_floor(int m) { return (3 * m + 1) / 2; }

int dealias_grid(int m, double growth_r) {
  const double degree = std::max(2.0, growth_r + 1.0);
  const int n = static_cast<int>(std::ceil(degree * m / 2.0));
  return std::max(n, dealias_floor(m));
}

BasisSpec BasisSpec::dirichlet(int m, int grid_points) {
  BasisSpec b{BasisKind::DirichletSine, m, grid_points > 0 ? grid_points : dealias_floor(m)};
  validate_spec(b);
  return b;
}

BasisSpec BasisSpec::fourier_torus(int max_wavenumber, int grid_points) {
  const int m = 2 * max_wavenumber + 1;
  BasisSpec b{BasisKind::FourierTorus, m, grid_points > 0 ? grid_points : dealias_floor(m)};
  validate_spec(b);
  return b;
}

const BasisTables& tables_for(const BasisSpec& spec) {
  validate_spec(spec);
  return cached_tables(spec);
}

SpectralField zero_field(const BasisSpec& b) {
  return {b, Eigen::VectorXd::Zero(b.m)};
}

SpectralField analyze(const BasisSpec& basis, const Eigen::Ref<const Eigen::VectorXd>& values) {
  const auto& t = tables_for(basis);
  if (values.size() != basis.grid_points) {
    throw std::invalid_argument("analyze: expected " + std::to_string(basis.grid_points) +
                                " grid values, got " + std::to_string(values.size()));
  }
  return {basis, t.analysis * values};
}

Eigen::VectorXd synthesize(const SpectralField& u) {
  const auto& t = tables_for(u.basis);
  return t.synth * u.coeffs;
}

Eigen::VectorXd synthesize_derivative(const SpectralField& u) {
  const auto& t = tables_for(u.basis);
  return t.synth_deriv * u.coeffs;
}

double h_norm(const SpectralField& u) {
  const auto& t = tables_for(u.basis);
  return std::sqrt((t.hweight * u.coeffs.array().square()).sum());
}

double v_norm(const SpectralField& u) {
  const auto& t = tables_for(u.basis);
  return std::sqrt((t.hweight * t.vweight * u.coeffs.array().square()).sum());
}

double vstar_norm(const BasisSpec& basis, const Eigen::Ref<const Eigen::VectorXd>& functional) {
  const auto& t = tables_for(basis);
  if (functional.size() != basis.m) {
    throw std::invalid_argument("vstar_norm: functional has wrong dimension");
  }
  return std::sqrt((t.hweight * functional.array().square() / t.vweight).sum());
}

TripleNorms norms(const SpectralField& u) {
  const auto& t = tables_for(u.basis);
  const auto sq = u.coeffs.array().square();
  TripleNorms out;
  out.h = std::sqrt((t.hweight * sq).sum());
  out.v = std::sqrt((t.hweight * t.vweight * sq).sum());
  out.vstar = std::sqrt((t.hweight * sq / t.vweight).sum());
  // L4 by quadrature on the nonlinearity grid; error O(N^-2), accepted since
  // the L4 norm feeds property checks only, never the solver loop.
  const Eigen::ArrayXd vals = (t.synth * u.coeffs).array();
  out.l4 = std::pow(t.quad_weight * vals.square().square().sum(), 0.25);
  return out;
}

SpectralField project(const SpectralField& u, int m_target) {
  if (m_target > u.basis.m) {
    throw std::invalid_argument("project: m_target=" + std::to_string(m_target) +
                                " exceeds field dimension m=" + std::to_string(u.basis.m));
  }
  return resize_modes(u, m_target);
}

SpectralField resize_modes(const SpectralField& u, int m_target) {
  if (m_target < 1) throw std::invalid_argument("resize_modes: m_target must be positive");
  if (u.basis.kind == BasisKind::FourierTorus && m_target % 2 == 0) {
    throw std::invalid_argument("resize_modes: FourierTorus needs odd packed dimension");
  }
  BasisSpec b = u.basis;
  b.m = m_target;
  b.grid_points = std::max(u.basis.grid_points, dealias_floor(m_target));
  SpectralField out{b, Eigen::VectorXd::Zero(m_target)};
  const int keep = std::min(m_target, u.basis.m);
  out.coeffs.head(keep) = u.coeffs.head(keep);
  return out;
}

double pairing(const SpectralField& functional, const SpectralField& v) {
  if (!(functional.basis == v.basis)) {
    throw std::invalid_argument("pairing: basis mismatch");
  }
  const auto& t = tables_for(v.basis);
  return (t.hweight * functional.coeffs.array() * v.coeffs.array()).sum();
}

double h_inner(const SpectralField& a, const SpectralField& b) { return pairing(a, b); }

}  // namespace specsde
