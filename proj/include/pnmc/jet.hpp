#pragma once

#include "pnmc/errors.hpp"
#include "pnmc/fields.hpp"
#include "pnmc/natural_systems.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pnmc {

/// Polynomial sum c[a][b] s^a t^b over a + b <= degree.
class BivariatePoly {
 public:
  BivariatePoly() : BivariatePoly(0) {}
  explicit BivariatePoly(int degree)
      : degree_(degree), c_(static_cast<std::size_t>((degree + 1) * (degree + 1)), 0.0) {}

  int degree() const { return degree_; }
  double& operator()(int a, int b) { return c_[idx(a, b)]; }
  double operator()(int a, int b) const {
    return (a < 0 || b < 0 || a + b > degree_) ? 0.0 : c_[idx(a, b)];
  }

  double eval(double s, double t) const {
    // Horner in t inside Horner in s.
    double acc = 0.0;
    for (int a = degree_; a >= 0; --a) {
      double row = 0.0;
      for (int b = degree_ - a; b >= 0; --b) row = row * t + (*this)(a, b);
      acc = acc * s + row;
    }
    return acc;
  }

  BivariatePoly du() const {
    BivariatePoly r(degree_);
    for (int a = 1; a <= degree_; ++a)
      for (int b = 0; a + b <= degree_; ++b) r(a - 1, b) = a * (*this)(a, b);
    return r;
  }

  BivariatePoly dv() const {
    BivariatePoly r(degree_);
    for (int a = 0; a <= degree_; ++a)
      for (int b = 1; a + b <= degree_; ++b) r(a, b - 1) = b * (*this)(a, b);
    return r;
  }

  friend BivariatePoly operator+(const BivariatePoly& p, const BivariatePoly& q) {
    BivariatePoly r(std::max(p.degree_, q.degree_));
    for (int a = 0; a <= r.degree_; ++a)
      for (int b = 0; a + b <= r.degree_; ++b) r(a, b) = p(a, b) + q(a, b);
    return r;
  }

  friend BivariatePoly operator*(double c, const BivariatePoly& p) {
    BivariatePoly r = p;
    for (double& x : r.c_) x *= c;
    return r;
  }

  /// Product truncated to total degree `degree`.
  static BivariatePoly mul(const BivariatePoly& p, const BivariatePoly& q, int degree) {
    BivariatePoly r(degree);
    for (int a = 0; a <= p.degree_; ++a)
      for (int b = 0; a + b <= p.degree_; ++b) {
        const double pc = p(a, b);
        if (pc == 0.0) continue;
        for (int c = 0; c <= q.degree_ && a + c <= degree; ++c)
          for (int e = 0; c + e <= q.degree_ && a + b + c + e <= degree; ++e) r(a + c, b + e) += pc * q(c, e);
      }
    return r;
  }

  /// exp(p) truncated to total degree `degree`.
  static BivariatePoly exp(const BivariatePoly& p, int degree) {
    const double c0 = p(0, 0);
    BivariatePoly h = p.truncated(degree);
    h(0, 0) = 0.0;
    BivariatePoly sum(degree), term(degree);
    sum(0, 0) = 1.0;
    term(0, 0) = 1.0;
    for (int k = 1; k <= degree; ++k) {
      term = (1.0 / k) * mul(term, h, degree);
      sum = sum + term;
    }
    return std::exp(c0) * sum;
  }

  BivariatePoly truncated(int degree) const {
    BivariatePoly r(degree);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) r(a, b) = (*this)(a, b);
    return r;
  }

 private:
  std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a * (degree_ + 1) + b); }

  int degree_;
  std::vector<double> c_;
};

/**
 * Free Taylor data for jet_manufacture. Index d holds the degree-d coefficient.
 *
 *  g_u[d] = coefficient of s^d in g = ln|mu| (g_u[0] is the constant term), g_v[d] of t^d.
 *  Nondegenerate: lambda_free[d], nu_free[d] are the t^d coefficients of lambda and nu.
 *  Degenerate:    nu_u[d] is the s^d coefficient of nu(u); lambda_free[d] the s^d coefficient of lambda.
 */
struct JetSeed {
  std::vector<double> g_u, g_v, lambda_free, nu_free, nu_u;
  int sign_mu = 1;

  /// Deterministic seed, degree-d coefficients uniform in [-1/d!, 1/d!]; nu = 1 and mu = sign at the center.
  static JetSeed random(SurfaceCase kind, int order, std::uint64_t seed) {
    std::uint64_t state = seed * 0x9E3779B97F4A7C15ull + 0x2545F4914F6CDD1Dull;
    auto next = [&state] {
      // splitmix64
      std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      z ^= z >> 31;
      return 2.0 * static_cast<double>(z >> 11) * 0x1.0p-53 - 1.0;
    };
    const std::size_t n = static_cast<std::size_t>(order) + 1;
    JetSeed s;
    s.g_u.assign(n, 0.0);
    s.g_v.assign(n, 0.0);
    s.lambda_free.assign(n, 0.0);
    s.nu_free.assign(n, 0.0);
    s.nu_u.assign(n, 0.0);
    // Degree-d data is scaled by 1/d! so the generated coefficients stay O(1/d!) as well.
    std::vector<double> w(n, 1.0);
    for (std::size_t d = 1; d < n; ++d) w[d] = w[d - 1] / static_cast<double>(d);
    for (std::size_t d = 1; d < n; ++d) {
      s.g_u[d] = w[d] * next();
      s.g_v[d] = w[d] * next();
    }
    for (std::size_t d = 0; d < n; ++d) s.lambda_free[d] = w[d] * next();
    if (kind == SurfaceCase::Degenerate) {
      s.nu_u[0] = 1.0;
      s.nu_u[1] = next();
      if (s.nu_u[1] == 0.0) s.nu_u[1] = 0.5;
    } else {
      s.nu_free[0] = 1.0;
      for (std::size_t d = 1; d < n; ++d) s.nu_free[d] = w[d] * next();
    }
    return s;
  }

  /// Seed reproducing the constant solution lambda = 0, mu = 1, nu = 1 (eps = -1).
  static JetSeed constant(int order) {
    const std::size_t n = static_cast<std::size_t>(order) + 1;
    JetSeed s;
    s.g_u.assign(n, 0.0);
    s.g_v.assign(n, 0.0);
    s.lambda_free.assign(n, 0.0);
    s.nu_free.assign(n, 0.0);
    s.nu_u.assign(n, 0.0);
    s.nu_free[0] = 1.0;
    return s;
  }
};

/// Taylor polynomials of lambda, nu and g = ln|mu| about a center point.
struct JetSolution {
  BivariatePoly lambda, nu, g;
  double uc = 0.0, vc = 0.0;
  int sign_mu = 1;
  SurfaceCase kind = SurfaceCase::PositiveKH;
};

namespace detail {

inline void check_seed(const std::vector<double>& v, int order, const char* name) {
  if (v.size() < static_cast<std::size_t>(order) + 1)
    throw Error(ErrorKind::InvalidArgument,
                std::string("seed.") + name + " needs " + std::to_string(order + 1) + " coefficients",
                "natural_systems");
}

}  // namespace detail

/**
 * Order-by-order Taylor solution of the natural system at (uc, vc).
 *
 * For each total degree d the mixed coefficients of g follow from the third
 * equation at degree d-2, then lambda and nu at degree d from the first two
 * equations at degree d-1. With the pure-power coefficients as free data, each
 * degree system is triangular with pivots a*b, a+1 or b+1, so it is never singular.
 * g is carried to degree N+1 (its mixed part there needs lambda, nu only to N-1), so
 * all three residuals vanish to order N at the center.
 */
inline JetSolution solve_jet(SurfaceCase kind, int order, const JetSeed& seed, double uc = 0.0,
                             double vc = 0.0) {
  if (order < 2)
    throw Error(ErrorKind::InvalidArgument, "jet order must be at least 2", "natural_systems");
  detail::check_seed(seed.g_u, order, "g_u");
  detail::check_seed(seed.g_v, order, "g_v");
  detail::check_seed(seed.lambda_free, order, "lambda_free");
  if (kind == SurfaceCase::Degenerate)
    detail::check_seed(seed.nu_u, order, "nu_u");
  else
    detail::check_seed(seed.nu_free, order, "nu_free");

  const int N = order;
  const double eps = epsilon_of(kind);
  JetSolution J{BivariatePoly(N), BivariatePoly(N), BivariatePoly(N + 1), uc, vc, seed.sign_mu, kind};
  BivariatePoly &lam = J.lambda, &nu = J.nu, &g = J.g;

  g(0, 0) = seed.g_u[0];
  if (kind == SurfaceCase::Degenerate) {
    for (int d = 0; d <= N; ++d) nu(d, 0) = seed.nu_u[d];
    lam(0, 0) = seed.lambda_free[0];
  } else {
    lam(0, 0) = seed.lambda_free[0];
    nu(0, 0) = seed.nu_free[0];
  }

  for (int d = 1; d <= N + 1; ++d) {
    // Degree d of g. Its pure powers at degree N + 1 are left at zero.
    if (d <= N) {
      g(d, 0) = seed.g_u[d];
      g(0, d) = seed.g_v[d];
    }
    if (d >= 2) {
      const int m = d - 2;
      const BivariatePoly em = BivariatePoly::exp(-1.0 * g, m);
      BivariatePoly rhs = -1.0 * BivariatePoly::mul(em, BivariatePoly::mul(nu, nu, m), m);
      if (kind != SurfaceCase::Degenerate) {
        rhs = rhs + (-eps) * BivariatePoly::mul(em, BivariatePoly::mul(lam, lam, m), m);
        rhs = rhs + (-eps) * BivariatePoly::exp(g, m);
      }
      for (int a = 1; a < d; ++a) {
        const int b = d - a;
        g(a, b) = rhs(a - 1, b - 1) / (a * b);
      }
    }

    if (d > N) break;

    // Degree d of lambda and nu from the first-order equations at degree d-1.
    const int m = d - 1;
    const BivariatePoly s1 = BivariatePoly::mul(lam, g.dv(), m);
    if (kind == SurfaceCase::Degenerate) {
      lam(d, 0) = seed.lambda_free[d];
      for (int a = d - 1; a >= 0; --a) {
        const int b = d - 1 - a;
        lam(a, b + 1) = (s1(a, b) - (a + 1) * nu(a + 1, b)) / (b + 1);
      }
    } else {
      const BivariatePoly s2 = BivariatePoly::mul(lam, g.du(), m);
      lam(0, d) = seed.lambda_free[d];
      nu(0, d) = seed.nu_free[d];
      for (int a = 0; a < d; ++a) {
        const int b = d - 1 - a;
        nu(a + 1, b) = (s1(a, b) - (b + 1) * lam(a, b + 1)) / (a + 1);
        lam(a + 1, b) = (s2(a, b) + eps * (b + 1) * nu(a, b + 1)) / (a + 1);
      }
    }
  }
  return J;
}

namespace detail {

inline AnalyticForm poly_form(std::shared_ptr<const BivariatePoly> p, double uc, double vc) {
  auto pu = std::make_shared<const BivariatePoly>(p->du());
  auto pv = std::make_shared<const BivariatePoly>(p->dv());
  auto puv = std::make_shared<const BivariatePoly>(pu->dv());
  return {[p, uc, vc](double u, double v) { return p->eval(u - uc, v - vc); },
          [pu, uc, vc](double u, double v) { return pu->eval(u - uc, v - vc); },
          [pv, uc, vc](double u, double v) { return pv->eval(u - uc, v - vc); },
          [puv, uc, vc](double u, double v) { return puv->eval(u - uc, v - vc); }};
}

}  // namespace detail

/// Triple on `grid` with closed-form evaluators: lambda, nu polynomial and mu = sign * exp(g).
inline CanonicalTriple jet_triple(const JetSolution& J, const GridSpec& grid) {
  auto lam = std::make_shared<const BivariatePoly>(J.lambda);
  auto nu = std::make_shared<const BivariatePoly>(J.nu);
  const AnalyticForm gf = detail::poly_form(std::make_shared<const BivariatePoly>(J.g), J.uc, J.vc);
  const double s = J.sign_mu;
  AnalyticForm mu{[gf, s](double u, double v) { return s * std::exp(gf.f(u, v)); },
                  [gf, s](double u, double v) { return s * std::exp(gf.f(u, v)) * gf.fu(u, v); },
                  [gf, s](double u, double v) { return s * std::exp(gf.f(u, v)) * gf.fv(u, v); },
                  [gf, s](double u, double v) {
                    return s * std::exp(gf.f(u, v)) * (gf.fuv(u, v) + gf.fu(u, v) * gf.fv(u, v));
                  }};
  return {ScalarField::from_analytic(grid, detail::poly_form(lam, J.uc, J.vc)),
          ScalarField::from_analytic(grid, std::move(mu)),
          ScalarField::from_analytic(grid, detail::poly_form(nu, J.uc, J.vc)), J.kind};
}

/// Jet solution about (uc, vc) sampled on the square patch of half-width `radius` with n x n nodes.
inline CanonicalTriple jet_manufacture(SurfaceCase kind, int order, const JetSeed& seed, double uc,
                                       double vc, double radius, std::size_t n = 65) {
  if (!(radius > 0.0))
    throw Error(ErrorKind::InvalidArgument, "patch radius must be positive", "natural_systems");
  const JetSolution J = solve_jet(kind, order, seed, uc, vc);
  return jet_triple(J, GridSpec{uc - radius, uc + radius, vc - radius, vc + radius, n, n});
}

}  // namespace pnmc
