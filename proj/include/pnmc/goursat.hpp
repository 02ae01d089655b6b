#pragma once

#include "pnmc/errors.hpp"
#include "pnmc/fields.hpp"
#include "pnmc/natural_systems.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace pnmc {

/// |ln|mu|| beyond this aborts marching: e^{-g} makes the update too stiff to trust.
inline constexpr double kGoursatBlowUp = 50.0;

namespace detail {

inline void check_edge(std::span<const double> e, std::size_t n, const char* name) {
  if (e.size() != n)
    throw Error(ErrorKind::InvalidArgument,
                std::string(name) + " has " + std::to_string(e.size()) + " samples, expected " +
                    std::to_string(n),
                "natural_systems");
  for (double x : e)
    if (!std::isfinite(x))
      throw Error(ErrorKind::InvalidArgument, std::string(name) + " is not finite", "natural_systems");
}

inline void check_corner(double a, double b, const char* what) {
  if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a)))
    throw Error(ErrorKind::InvalidArgument, std::string("corner data mismatch: ") + what,
                "natural_systems");
}

inline void check_blowup(double g, std::size_t i, std::size_t j) {
  if (!std::isfinite(g) || std::abs(g) > kGoursatBlowUp) {
    Error e(ErrorKind::BlowUp,
            "|ln|mu|| exceeded 50 at node (" + std::to_string(i) + "," + std::to_string(j) + ")",
            "natural_systems");
    e.value = g;
    throw e;
  }
}

/**
 * Trapezoidal Goursat step for g_uv = S(g) on one cell:
 *   g_ij = g_{i-1,j} + g_{i,j-1} - g_{i-1,j-1} + k (S_{i-1,j-1} + S_{i-1,j} + S_{i,j-1} + S(g_ij))
 * with k = hu hv / 4. The implicit corner value is found by Newton iteration.
 */
template <class Source, class SourceDeriv>
double goursat_cell(double base, double k, Source&& src, SourceDeriv&& dsrc, double guess) {
  double x = guess;
  for (int it = 0; it < 50; ++it) {
    const double f = x - base - k * src(x);
    const double df = 1.0 - k * dsrc(x);
    const double step = f / df;
    x -= step;
    if (!std::isfinite(x)) break;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

}  // namespace detail

/**
 * Degenerate-class fixture generator. Marches ln|mu| through
 * g_uv = -nu(u)^2 e^{-g} from data on the bottom and left edges, then recovers
 * lambda from lambda_v = lambda g_v - nu_u on each u = const line.
 */
inline CanonicalTriple solve_goursat_degenerate(std::span<const double> nu_of_u,
                                                std::span<const double> g_bottom,
                                                std::span<const double> g_left,
                                                std::span<const double> lambda_bottom, int sign_mu,
                                                const GridSpec& grid) {
  grid.validate();
  const std::size_t nu_n = grid.nu, nv_n = grid.nv;
  detail::check_edge(nu_of_u, nu_n, "nu(u)");
  detail::check_edge(g_bottom, nu_n, "g_bottom");
  detail::check_edge(g_left, nv_n, "g_left");
  detail::check_edge(lambda_bottom, nu_n, "lambda_bottom");
  if (sign_mu != 1 && sign_mu != -1)
    throw Error(ErrorKind::InvalidArgument, "sign_mu must be +1 or -1", "natural_systems");
  const auto [nmin, nmax] = std::minmax_element(nu_of_u.begin(), nu_of_u.end());
  if (*nmax - *nmin <= 1e-12 * (1.0 + std::max(std::abs(*nmin), std::abs(*nmax))))
    throw Error(ErrorKind::InvalidArgument, "nu must not be constant along u", "natural_systems");
  detail::check_corner(g_bottom[0], g_left[0], "g_bottom(u0) != g_left(v0)");

  const double hu = grid.hu(), hv = grid.hv(), k = 0.25 * hu * hv;
  std::vector<double> g(grid.size());
  for (std::size_t i = 0; i < nu_n; ++i) g[grid.index(i, 0)] = g_bottom[i];
  for (std::size_t j = 0; j < nv_n; ++j) g[grid.index(0, j)] = g_left[j];
  for (std::size_t i = 0; i < nu_n; ++i) detail::check_blowup(g[grid.index(i, 0)], i, 0);
  for (std::size_t j = 0; j < nv_n; ++j) detail::check_blowup(g[grid.index(0, j)], 0, j);

  for (std::size_t i = 1; i < nu_n; ++i) {
    const double n0 = nu_of_u[i - 1] * nu_of_u[i - 1];
    const double n1 = nu_of_u[i] * nu_of_u[i];
    for (std::size_t j = 1; j < nv_n; ++j) {
      const double gll = g[grid.index(i - 1, j - 1)], glu = g[grid.index(i - 1, j)],
                   grl = g[grid.index(i, j - 1)];
      const double known = -n0 * std::exp(-gll) - n0 * std::exp(-glu) - n1 * std::exp(-grl);
      const double base = glu + grl - gll + k * known;
      const double x = detail::goursat_cell(
          base, k, [n1](double x) { return -n1 * std::exp(-x); },
          [n1](double x) { return n1 * std::exp(-x); }, glu + grl - gll);
      detail::check_blowup(x, i, j);
      g[grid.index(i, j)] = x;
    }
  }

  // (lambda e^{-g})_v = -nu'(u) e^{-g}, integrated exactly up to quadrature.
  const std::vector<double> dnu = derivative_1d(nu_of_u, hu);
  std::vector<double> lam(grid.size()), nu(grid.size()), mu(grid.size());
  std::vector<double> w(nv_n);
  for (std::size_t i = 0; i < nu_n; ++i) {
    for (std::size_t j = 0; j < nv_n; ++j) w[j] = std::exp(-g[grid.index(i, j)]);
    const std::vector<double> iw = cumulative_simpson(w, hv);
    const double c0 = lambda_bottom[i] * w[0];
    for (std::size_t j = 0; j < nv_n; ++j) {
      const std::size_t idx = grid.index(i, j);
      lam[idx] = (c0 - dnu[i] * iw[j]) / w[j];
      nu[idx] = nu_of_u[i];
      mu[idx] = sign_mu * std::exp(g[idx]);
    }
  }
  return {ScalarField(grid, std::move(lam)), ScalarField(grid, std::move(mu)),
          ScalarField(grid, std::move(nu)), SurfaceCase::Degenerate};
}

/**
 * Characteristic data for the K - H^2 < 0 system in the variables
 * p = lambda + nu, q = lambda - nu, g = ln|mu|:
 *
 *   p_u + p_v = lambda (g_u + g_v)
 *   q_u - q_v = lambda (g_u - g_v)
 *   g_uv      = p q e^{-g} + e^{g}
 *
 * p enters through the bottom and left edges, q through the left and top edges,
 * g is Goursat data on the bottom and left edges.
 */
struct HyperbolicGoursatData {
  GridSpec grid;
  std::vector<double> p_bottom, p_left;  // nu, nv samples
  std::vector<double> q_left, q_top;     // nv, nu samples
  std::vector<double> g_bottom, g_left;  // nu, nv samples
  int sign_mu = 1;
};

struct GoursatSolution {
  CanonicalTriple triple;
  std::size_t sweeps = 0;
  double final_change = 0.0;
  TripleDiagnostics diagnostics;
};

inline constexpr std::size_t kMaxPicardSweeps = 25;
inline constexpr double kPicardTolerance = 1e-10;

/**
 * Picard iteration between the Goursat march for g and upwind transport of p and q
 * along the (1,1) and (1,-1) characteristics.
 */
inline GoursatSolution solve_goursat_hyperbolic(const HyperbolicGoursatData& d) {
  const GridSpec& grid = d.grid;
  grid.validate();
  const std::size_t nu_n = grid.nu, nv_n = grid.nv;
  detail::check_edge(d.p_bottom, nu_n, "p_bottom");
  detail::check_edge(d.p_left, nv_n, "p_left");
  detail::check_edge(d.q_left, nv_n, "q_left");
  detail::check_edge(d.q_top, nu_n, "q_top");
  detail::check_edge(d.g_bottom, nu_n, "g_bottom");
  detail::check_edge(d.g_left, nv_n, "g_left");
  if (d.sign_mu != 1 && d.sign_mu != -1)
    throw Error(ErrorKind::InvalidArgument, "sign_mu must be +1 or -1", "natural_systems");
  detail::check_corner(d.p_bottom[0], d.p_left[0], "p_bottom(u0) != p_left(v0)");
  detail::check_corner(d.q_left[nv_n - 1], d.q_top[0], "q_left(v1) != q_top(u0)");
  detail::check_corner(d.g_bottom[0], d.g_left[0], "g_bottom(u0) != g_left(v0)");

  const double hu = grid.hu(), hv = grid.hv(), k = 0.25 * hu * hv;
  const std::size_t top = nv_n - 1;
  auto at = [&](std::size_t i, std::size_t j) { return grid.index(i, j); };

  // Initial iterate: edge data extended by superposition.
  std::vector<double> p(grid.size()), q(grid.size()), g(grid.size());
  for (std::size_t i = 0; i < nu_n; ++i)
    for (std::size_t j = 0; j < nv_n; ++j) {
      p[at(i, j)] = d.p_bottom[i] + d.p_left[j] - d.p_left[0];
      q[at(i, j)] = d.q_top[i] + d.q_left[j] - d.q_left[top];
      g[at(i, j)] = d.g_bottom[i] + d.g_left[j] - d.g_left[0];
    }

  GoursatSolution sol;
  double change = INFINITY;
  std::size_t sweep = 0;
  while (sweep < kMaxPicardSweeps) {
    ++sweep;
    const std::vector<double> p_old = p, q_old = q, g_old = g;

    // Goursat march for g with the current p q.
    for (std::size_t j = 0; j < nv_n; ++j) g[at(0, j)] = d.g_left[j];
    for (std::size_t i = 0; i < nu_n; ++i) g[at(i, 0)] = d.g_bottom[i];
    auto src = [](double pq, double x) { return pq * std::exp(-x) + std::exp(x); };
    for (std::size_t i = 1; i < nu_n; ++i)
      for (std::size_t j = 1; j < nv_n; ++j) {
        const std::size_t ll = at(i - 1, j - 1), lu = at(i - 1, j), rl = at(i, j - 1), rr = at(i, j);
        const double known = src(p[ll] * q[ll], g[ll]) + src(p[lu] * q[lu], g[lu]) +
                             src(p[rl] * q[rl], g[rl]);
        const double base = g[lu] + g[rl] - g[ll] + k * known;
        const double pq = p[rr] * q[rr];
        const double x = detail::goursat_cell(
            base, k, [pq](double x) { return pq * std::exp(-x) + std::exp(x); },
            [pq](double x) { return -pq * std::exp(-x) + std::exp(x); }, g[rr]);
        detail::check_blowup(x, i, j);
        g[rr] = x;
      }

    const ScalarField gf(grid, g);
    const ScalarField gu = d_du(gf), gv = d_dv(gf);

    // Transport with lambda from the previous iterate. On square cells the characteristics
    // run through the grid diagonals and are stepped with the trapezoidal rule; otherwise
    // a first-order upwind difference is used.
    auto sp = [&](std::size_t n) { return 0.5 * (p_old[n] + q_old[n]) * (gu[n] + gv[n]); };
    auto sq = [&](std::size_t n) { return 0.5 * (p_old[n] + q_old[n]) * (gu[n] - gv[n]); };
    const bool diagonal = std::abs(hu - hv) <= 1e-12 * std::max(hu, hv);
    const double cu = 1.0 / hu, cv = 1.0 / hv;
    for (std::size_t i = 0; i < nu_n; ++i) p[at(i, 0)] = d.p_bottom[i];
    for (std::size_t j = 0; j < nv_n; ++j) p[at(0, j)] = d.p_left[j];
    for (std::size_t i = 1; i < nu_n; ++i)
      for (std::size_t j = 1; j < nv_n; ++j) {
        const std::size_t rr = at(i, j), ll = at(i - 1, j - 1);
        p[rr] = diagonal ? p[ll] + 0.5 * hu * (sp(ll) + sp(rr))
                         : (cu * p[at(i - 1, j)] + cv * p[at(i, j - 1)] + sp(rr)) / (cu + cv);
      }
    for (std::size_t i = 0; i < nu_n; ++i) q[at(i, top)] = d.q_top[i];
    for (std::size_t j = 0; j < nv_n; ++j) q[at(0, j)] = d.q_left[j];
    for (std::size_t i = 1; i < nu_n; ++i)
      for (std::size_t jj = top; jj-- > 0;) {
        const std::size_t rr = at(i, jj), lu = at(i - 1, jj + 1);
        q[rr] = diagonal ? q[lu] + 0.5 * hu * (sq(lu) + sq(rr))
                         : (cu * q[at(i - 1, jj)] + cv * q[at(i, jj + 1)] + sq(rr)) / (cu + cv);
      }

    change = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n)
      change = std::max({change, std::abs(p[n] - p_old[n]), std::abs(q[n] - q_old[n]),
                         std::abs(g[n] - g_old[n])});
    if (change <= kPicardTolerance) break;
  }
  if (change > kPicardTolerance) {
    Error e(ErrorKind::NoConvergence,
            "Picard iteration stalled at change " + std::to_string(change) + " after " +
                std::to_string(sweep) + " sweeps",
            "natural_systems");
    e.value = change;
    throw e;
  }

  std::vector<double> lam(grid.size()), nu(grid.size()), mu(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    lam[n] = 0.5 * (p[n] + q[n]);
    nu[n] = 0.5 * (p[n] - q[n]);
    mu[n] = d.sign_mu * std::exp(g[n]);
  }
  sol.triple = {ScalarField(grid, std::move(lam)), ScalarField(grid, std::move(mu)),
                ScalarField(grid, std::move(nu)), SurfaceCase::NegativeKH};
  sol.sweeps = sweep;
  sol.final_change = change;
  sol.diagnostics = diagnose(sol.triple);
  return sol;
}

}  // namespace pnmc
