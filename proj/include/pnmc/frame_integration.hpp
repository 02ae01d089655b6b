#pragma once

#include "pnmc/errors.hpp"
#include "pnmc/fields.hpp"
#include "pnmc/immersion.hpp"
#include "pnmc/minkowski.hpp"
#include "pnmc/natural_systems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace pnmc {

namespace detail {

// Forward-mode dual number, used to differentiate the coefficient matrices by the chain rule.
struct Dual {
  double v = 0.0, d = 0.0;
  Dual() = default;
  Dual(double value, double deriv = 0.0) : v(value), d(deriv) {}
  friend Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
  friend Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
  friend Dual operator-(Dual a) { return {-a.v, -a.d}; }
  friend Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
  friend Dual exp(Dual a) {
    const double e = std::exp(a.v);
    return {e, e * a.d};
  }
};

inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.v; }
inline double deriv_of(Dual x) { return x.d; }

using std::exp;

/**
 * u-direction coefficient matrix with rows (x, y, n1, n2), written in g = ln|mu|:
 * gamma1/sqrt|mu| = -g_u/2, 1/sqrt|mu| = e^{-g/2}, mu/sqrt|mu| = sign e^{g/2}.
 */
template <class T>
std::array<T, 16> a_entries(T lam, T nu, T g, T g_u, double sign) {
  const T a = exp(T(-0.5) * g);
  const T m = T(sign) * exp(T(0.5) * g);
  const T h = T(0.5) * g_u;
  return {-h,         T(0.0), lam * a, m,       //
          T(0.0),     h,      -nu * a, T(0.0),  //
          -nu * a,    lam * a, T(0.0), T(0.0),  //
          T(0.0),     m,      T(0.0), T(0.0)};
}

/// v-direction coefficient matrix; eps = 0 gives the degenerate-class system.
template <class T>
std::array<T, 16> b_entries(T lam, T nu, T g, T g_v, double sign, double eps) {
  const T a = exp(T(-0.5) * g);
  const T m = T(sign) * exp(T(0.5) * g);
  const T h = T(0.5) * g_v;
  const T e(eps);
  return {h,             T(0.0),  -nu * a,       T(0.0),    //
          T(0.0),        -h,      -e * lam * a,  -e * m,    //
          -e * lam * a,  -nu * a, T(0.0),        T(0.0),    //
          -e * m,        T(0.0),  T(0.0),        T(0.0)};
}

inline Mat4 to_mat(const std::array<double, 16>& e) {
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) m(i, k) = e[static_cast<std::size_t>(4 * i + k)];
  return m;
}

}  // namespace detail

/// Values needed to assemble the coefficient matrices at one point.
struct LocalCoefficients {
  double lambda = 0.0, mu = 1.0, nu = 0.0, g_u = 0.0, g_v = 0.0;
};

inline Mat4 coefficient_a(const LocalCoefficients& c) {
  const double sign = c.mu < 0.0 ? -1.0 : 1.0;
  return detail::to_mat(detail::a_entries<double>(c.lambda, c.nu, std::log(std::abs(c.mu)), c.g_u, sign));
}

inline Mat4 coefficient_b(const LocalCoefficients& c, SurfaceCase kind) {
  const double sign = c.mu < 0.0 ? -1.0 : 1.0;
  return detail::to_mat(detail::b_entries<double>(c.lambda, c.nu, std::log(std::abs(c.mu)), c.g_v,
                                                  sign, epsilon_of(kind)));
}

/**
 * Evaluates (lambda, mu, nu, g_u, g_v) anywhere in the domain: closed form when the
 * triple carries evaluators, tensor-cubic interpolation of the node samples otherwise.
 */
class CoefficientSampler {
 public:
  explicit CoefficientSampler(const CanonicalTriple& t, double mu_min = kMuMin)
      : t_(t), analytic_(t.has_partials()) {
    const ScalarField g = t.log_abs_mu(mu_min);
    g_u_ = d_du(g);
    g_v_ = d_dv(g);
  }

  LocalCoefficients at(double u, double v) const {
    if (analytic_) {
      const AnalyticForm& m = *t_.mu.analytic();
      const double mu = m.f(u, v);
      return {t_.lambda.analytic()->f(u, v), mu, t_.nu.analytic()->f(u, v), m.fu(u, v) / mu,
              m.fv(u, v) / mu};
    }
    LocalCoefficients c{sample_at(t_.lambda, u, v), sample_at(t_.mu, u, v), sample_at(t_.nu, u, v),
                        sample_at(g_u_, u, v), sample_at(g_v_, u, v)};
    if (c.mu * t_.mu[0] <= 0.0)
      throw Error(ErrorKind::NearZeroField, "interpolated mu crosses zero", "frame_integration");
    return c;
  }

  LocalCoefficients node(std::size_t i, std::size_t j) const {
    const std::size_t k = t_.grid().index(i, j);
    return {t_.lambda[k], t_.mu[k], t_.nu[k], g_u_[k], g_v_[k]};
  }

 private:
  const CanonicalTriple& t_;
  bool analytic_;
  ScalarField g_u_, g_v_;
};

/// Coefficient matrices A, B at every node; index (i,k) of A is a_i^k.
struct CoefficientMatrices {
  GridSpec grid;
  std::vector<Mat4> a, b;
  const Mat4& A(std::size_t i, std::size_t j) const { return a[grid.index(i, j)]; }
  const Mat4& B(std::size_t i, std::size_t j) const { return b[grid.index(i, j)]; }
};

inline CoefficientMatrices coefficient_matrices(const CanonicalTriple& t) {
  const CoefficientSampler s(t);
  const GridSpec& g = t.grid();
  CoefficientMatrices out{g, std::vector<Mat4>(g.size()), std::vector<Mat4>(g.size())};
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j) {
      const LocalCoefficients c = s.node(i, j);
      out.a[g.index(i, j)] = coefficient_a(c);
      out.b[g.index(i, j)] = coefficient_b(c, t.kind);
    }
  return out;
}

/**
 * Node-wise max-norm of A_v - B_u + A B - B A. The derivatives of A and B are taken
 * by the chain rule from the partials of lambda, nu and ln|mu| supplied by the fields
 * module (closed form when available, finite differences otherwise).
 */
inline ScalarField compatibility_residual(const CanonicalTriple& t, double mu_min = kMuMin) {
  using detail::Dual;
  const ScalarField g = t.log_abs_mu(mu_min);
  const ScalarField g_u = d_du(g), g_v = d_dv(g), g_uv = d_dudv(g);
  const ScalarField l_u = d_du(t.lambda), l_v = d_dv(t.lambda);
  const ScalarField n_u = d_du(t.nu), n_v = d_dv(t.nu);
  const double sign = t.sign_mu(), eps = t.epsilon();
  const GridSpec& grid = t.grid();
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto av = detail::a_entries<Dual>({t.lambda[k], l_v[k]}, {t.nu[k], n_v[k]}, {g[k], g_v[k]},
                                            {g_u[k], g_uv[k]}, sign);
    const auto bu = detail::b_entries<Dual>({t.lambda[k], l_u[k]}, {t.nu[k], n_u[k]}, {g[k], g_u[k]},
                                            {g_v[k], g_uv[k]}, sign, eps);
    Mat4 A, B, dA, dB;
    for (std::size_t e = 0; e < 16; ++e) {
      const int i = static_cast<int>(e / 4), c = static_cast<int>(e % 4);
      A(i, c) = av[e].v;
      dA(i, c) = av[e].d;
      B(i, c) = bu[e].v;
      dB(i, c) = bu[e].d;
    }
    const Mat4 M = dA - dB + A * B - B * A;
    out[k] = M.cwiseAbs().maxCoeff();
  }
  return ScalarField(grid, std::move(out));
}

/// Frame at every node of a grid.
struct FrameField {
  GridSpec grid;
  std::vector<FrameState> frames;
  const FrameState& operator()(std::size_t i, std::size_t j) const { return frames[grid.index(i, j)]; }
};

struct FrameIntegration {
  FrameField field;
  double gram_drift = 0.0;
  double path_discrepancy = 0.0;
};

/// Frame entries beyond this magnitude abort integration.
inline constexpr double kStepUnstableBound = 1e8;

namespace detail {

inline Mat4 rk4_step(const Mat4& F, const Mat4& c0, const Mat4& ch, const Mat4& c1, double h) {
  const Mat4 k1 = c0 * F;
  const Mat4 k2 = ch * (F + 0.5 * h * k1);
  const Mat4 k3 = ch * (F + 0.5 * h * k2);
  const Mat4 k4 = c1 * (F + h * k3);
  return F + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void check_stable(const Mat4& F, std::size_t i, std::size_t j) {
  const double m = F.cwiseAbs().maxCoeff();
  if (!std::isfinite(m) || m > kStepUnstableBound) {
    Error e(ErrorKind::StepUnstable,
            "frame entry magnitude " + std::to_string(m) + " at node (" + std::to_string(i) + "," +
                std::to_string(j) + ")",
            "frame_integration");
    e.value = m;
    throw e;
  }
}

// Coefficients at nodes and at the u- and v-midpoints of every grid edge.
struct CoefficientTables {
  std::vector<Mat4> a_node, b_node, a_half_u, b_half_v;
};

inline CoefficientTables tabulate(const CanonicalTriple& t) {
  const CoefficientSampler s(t);
  const GridSpec& g = t.grid();
  CoefficientTables tab;
  tab.a_node.resize(g.size());
  tab.b_node.resize(g.size());
  tab.a_half_u.resize(g.size());
  tab.b_half_v.resize(g.size());
  const double hu = g.hu(), hv = g.hv();
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j) {
      const std::size_t k = g.index(i, j);
      const LocalCoefficients c = s.at(g.u(i), g.v(j));
      tab.a_node[k] = coefficient_a(c);
      tab.b_node[k] = coefficient_b(c, t.kind);
      if (i + 1 < g.nu) tab.a_half_u[k] = coefficient_a(s.at(g.u(i) + 0.5 * hu, g.v(j)));
      if (j + 1 < g.nv) tab.b_half_v[k] = coefficient_b(s.at(g.u(i), g.v(j) + 0.5 * hv), t.kind);
    }
  return tab;
}

// u_first: bottom edge along u, then every column along v. Otherwise left edge, then rows.
inline std::vector<Mat4> march_frames(const CoefficientTables& tab, const GridSpec& g, const Mat4& F0,
                                      bool u_first) {
  std::vector<Mat4> F(g.size());
  const double hu = g.hu(), hv = g.hv();
  auto step_u = [&](std::size_t i, std::size_t j) {
    const std::size_t k = g.index(i, j), k1 = g.index(i + 1, j);
    F[k1] = rk4_step(F[k], tab.a_node[k], tab.a_half_u[k], tab.a_node[k1], hu);
    check_stable(F[k1], i + 1, j);
  };
  auto step_v = [&](std::size_t i, std::size_t j) {
    const std::size_t k = g.index(i, j), k1 = g.index(i, j + 1);
    F[k1] = rk4_step(F[k], tab.b_node[k], tab.b_half_v[k], tab.b_node[k1], hv);
    check_stable(F[k1], i, j + 1);
  };
  F[g.index(0, 0)] = F0;
  if (u_first) {
    for (std::size_t i = 0; i + 1 < g.nu; ++i) step_u(i, 0);
    for (std::size_t i = 0; i < g.nu; ++i)
      for (std::size_t j = 0; j + 1 < g.nv; ++j) step_v(i, j);
  } else {
    for (std::size_t j = 0; j + 1 < g.nv; ++j) step_v(0, j);
    for (std::size_t j = 0; j < g.nv; ++j)
      for (std::size_t i = 0; i + 1 < g.nu; ++i) step_u(i, j);
  }
  return F;
}

inline void check_initial_frame(const FrameState& F0) {
  const double r = gram_residual(F0);
  if (!(r <= kFrameTolerance)) {
    Error e(ErrorKind::InvalidArgument,
            "initial frame is not pseudo-orthonormal (gram residual " + std::to_string(r) + ")",
            "frame_integration");
    e.value = r;
    throw e;
  }
}

}  // namespace detail

/**
 * Integrates F_u = A F along the bottom edge and F_v = B F up each column with
 * classic RK4 at the grid spacing. The frame is not re-orthonormalized; gram_drift
 * and the discrepancy against the left-edge-first path are reported instead.
 */
inline FrameIntegration integrate_frame(const CanonicalTriple& t, const FrameState& F0) {
  detail::check_initial_frame(F0);
  const GridSpec& g = t.grid();
  const detail::CoefficientTables tab = detail::tabulate(t);
  const std::vector<Mat4> primary = detail::march_frames(tab, g, F0.rows(), true);
  const std::vector<Mat4> alternate = detail::march_frames(tab, g, F0.rows(), false);

  FrameIntegration out;
  out.field.grid = g;
  out.field.frames.reserve(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    out.field.frames.emplace_back(primary[k]);
    out.gram_drift = std::max(out.gram_drift, gram_residual(out.field.frames.back()));
    out.path_discrepancy =
        std::max(out.path_discrepancy, (primary[k] - alternate[k]).cwiseAbs().maxCoeff());
  }
  return out;
}

struct PositionIntegration {
  Immersion immersion;
  double path_discrepancy = 0.0;
};

/// Integrates z_u = x / sqrt|mu|, z_v = y / sqrt|mu| by cumulative Simpson quadrature.
inline PositionIntegration integrate_position(const FrameField& frames, const ScalarField& mu,
                                              const MinkVec& p0) {
  const GridSpec& g = frames.grid;
  if (!(mu.grid() == g))
    throw Error(ErrorKind::InvalidArgument, "mu and frame field grids differ", "frame_integration");
  const double hu = g.hu(), hv = g.hv();
  std::vector<double> a(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) a[k] = 1.0 / std::sqrt(std::abs(mu[k]));

  // Cumulative integral of component `row` of the frame times a, along a grid line.
  std::vector<double> line;
  auto integrate_line = [&](int row, std::size_t fixed, bool along_u, std::size_t c) {
    const std::size_t n = along_u ? g.nu : g.nv;
    line.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t k = along_u ? g.index(s, fixed) : g.index(fixed, s);
      line[s] = frames.frames[k].rows()(row, static_cast<int>(c)) * a[k];
    }
    return cumulative_simpson(line, along_u ? hu : hv);
  };

  auto build = [&](bool u_first) {
    std::vector<MinkVec> z(g.size());
    for (std::size_t c = 0; c < 4; ++c) {
      if (u_first) {
        const auto edge = integrate_line(0, 0, true, c);
        for (std::size_t i = 0; i < g.nu; ++i) {
          const double base = p0[static_cast<int>(c)] + edge[i];
          const auto col = integrate_line(1, i, false, c);
          for (std::size_t j = 0; j < g.nv; ++j) z[g.index(i, j)][static_cast<int>(c)] = base + col[j];
        }
      } else {
        const auto edge = integrate_line(1, 0, false, c);
        for (std::size_t j = 0; j < g.nv; ++j) {
          const double base = p0[static_cast<int>(c)] + edge[j];
          const auto row = integrate_line(0, j, true, c);
          for (std::size_t i = 0; i < g.nu; ++i) z[g.index(i, j)][static_cast<int>(c)] = base + row[i];
        }
      }
    }
    return z;
  };

  PositionIntegration out;
  out.immersion.grid = g;
  out.immersion.points = build(true);
  out.immersion.points[g.index(0, 0)] = p0;
  const std::vector<MinkVec> alt = build(false);
  for (std::size_t k = 0; k < g.size(); ++k)
    out.path_discrepancy =
        std::max(out.path_discrepancy, (out.immersion.points[k] - alt[k]).cwiseAbs().maxCoeff());
  return out;
}

struct ReconstructOptions {
  double tol_build = 1e-3;  ///< interior natural-system residual allowed before refusing
  bool force = false;
};

struct ReconstructionDiagnostics {
  double gram_drift = 0.0;
  double path_discrepancy = 0.0;           ///< frame, bottom-first vs left-first
  double position_path_discrepancy = 0.0;  ///< immersion, same two paths
  double compat_max = 0.0;                 ///< interior max of the compatibility residual
  double residual_max = 0.0;               ///< interior max of the natural-system residual
};

struct ReconstructionBundle {
  FrameField frames;
  Immersion immersion;
  ReconstructionDiagnostics diagnostics;
};

/**
 * Surface through p0 with geometric frame F0 at the lower-left corner whose geometric
 * functions in canonical parameters are the given triple.
 */
inline ReconstructionBundle reconstruct(const CanonicalTriple& t, const MinkVec& p0, const FrameState& F0,
                                        const ReconstructOptions& opt = {}) {
  t.validate();
  const ResidualReport res = residual(t);
  if (!(res.interior_max_abs <= opt.tol_build) && !opt.force) {
    Error e(ErrorKind::ResidualTooLarge,
            "natural-system residual " + std::to_string(res.interior_max_abs) + " exceeds tol_build " +
                std::to_string(opt.tol_build),
            "frame_integration");
    e.value = res.interior_max_abs;
    throw e;
  }
  FrameIntegration fi = integrate_frame(t, F0);
  PositionIntegration pi = integrate_position(fi.field, t.mu, p0);
  ReconstructionBundle b{std::move(fi.field), std::move(pi.immersion), {}};
  b.diagnostics.gram_drift = fi.gram_drift;
  b.diagnostics.path_discrepancy = fi.path_discrepancy;
  b.diagnostics.position_path_discrepancy = pi.path_discrepancy;
  b.diagnostics.compat_max = interior_max_abs(compatibility_residual(t));
  b.diagnostics.residual_max = res.interior_max_abs;
  return b;
}

}  // namespace pnmc
