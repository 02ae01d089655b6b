#pragma once

#include "pnmc/fields.hpp"
#include "pnmc/goursat.hpp"
#include "pnmc/immersion.hpp"
#include "pnmc/jet.hpp"
#include "pnmc/natural_systems.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

// Builtin test surfaces and triples with pinned parameters.
namespace pnmc::fixtures {

inline constexpr std::uint64_t kJetSeed = 1;
inline constexpr int kJetOrder = 6;
inline constexpr double kJetRadius = 0.1;

/// lambda = 0, mu = 1, nu = 1 with K - H^2 < 0 on [0,1]^2. Exact solution with constant nu.
inline CanonicalTriple constant(std::size_t n = 65) {
  const GridSpec g = GridSpec::square(0.0, 1.0, n);
  return {ScalarField::constant(g, 0.0), ScalarField::constant(g, 1.0), ScalarField::constant(g, 1.0),
          SurfaceCase::NegativeKH};
}

inline CanonicalTriple jet(SurfaceCase kind = SurfaceCase::PositiveKH, int order = kJetOrder,
                           double radius = kJetRadius, std::size_t n = 65, std::uint64_t seed = kJetSeed) {
  return jet_manufacture(kind, order, JetSeed::random(kind, order, seed), 0.0, 0.0, radius, n);
}

/// Edge value of ln|mu| for the degenerate fixture; zero edge data blows up inside [0,1]^2.
inline const double kDegenerateEdgeG = std::log(16.0);

/// Degenerate class with nu(u) = 1 + u on [0,1]^2, ln|mu| = ln 16 and lambda = 0 on the bottom and left edges.
inline CanonicalTriple goursat_degenerate(std::size_t n = 65, double g_edge = kDegenerateEdgeG) {
  const GridSpec g = GridSpec::square(0.0, 1.0, n);
  std::vector<double> nu(n), edge(n, g_edge), zero(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) nu[i] = 1.0 + g.u(i);
  return solve_goursat_degenerate(nu, edge, edge, zero, 1, g);
}

/**
 * Closed-form ln|mu| of the degenerate fixture. With U = ((1+u)^3 - 1)/3 the equation
 * g_uv = -nu^2 e^{-g} becomes Liouville's, solved by e^{-g} = 2c/(1 - c U v)^2, 2c = e^{-g_edge}.
 */
inline double goursat_degenerate_g(double u, double v, double g_edge = kDegenerateEdgeG) {
  const double c = 0.5 * std::exp(-g_edge);
  const double U = ((1.0 + u) * (1.0 + u) * (1.0 + u) - 1.0) / 3.0;
  const double d = 1.0 - c * U * v;
  return -std::log(2.0 * c / (d * d));
}

/**
 * K - H^2 < 0 class from smooth characteristic edge data on [0,0.5]^2. The slopes of
 * p on the bottom edge and of q on the top edge are chosen so that the transport
 * equations hold at the corners (0,0) and (0,v1); otherwise the derivatives of p and
 * q jump across the characteristics through those corners.
 */
inline HyperbolicGoursatData goursat_hyperbolic_data(std::size_t n = 65) {
  HyperbolicGoursatData d;
  d.grid = GridSpec::square(0.0, 0.5, n);
  const double top = d.grid.v1;
  auto p_left = [](double s) { return 1.2 + 0.2 * s * s + 0.1 * s; };
  auto q_left = [](double s) { return -0.8 + 0.25 * std::sin(s); };
  auto g_left = [](double s) { return -0.1 * s + 0.1 * s * s; };
  auto g_bottom = [](double s) { return 0.2 * s; };
  const double dp_left0 = 0.1, dq_left_top = 0.25 * std::cos(top), dg_left0 = -0.1,
               dg_left_top = -0.1 + 0.2 * top, dg_bottom0 = 0.2;

  // g_u along the left edge: g_u(0,0) plus the integral of g_uv = p q e^{-g} + e^{g}.
  const std::size_t m = 2000;
  std::vector<double> guv(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    const double s = top * static_cast<double>(k) / static_cast<double>(m);
    guv[k] = p_left(s) * q_left(s) * std::exp(-g_left(s)) + std::exp(g_left(s));
  }
  const double g_u_top = dg_bottom0 + cumulative_simpson(guv, top / static_cast<double>(m)).back();

  const double lam00 = 0.5 * (p_left(0.0) + q_left(0.0));
  const double lam_top = 0.5 * (p_left(top) + q_left(top));
  const double dp_bottom0 = lam00 * (dg_bottom0 + dg_left0) - dp_left0;
  const double dq_top0 = dq_left_top + lam_top * (g_u_top - dg_left_top);

  d.p_bottom.resize(n);
  d.p_left.resize(n);
  d.q_left.resize(n);
  d.q_top.resize(n);
  d.g_bottom.resize(n);
  d.g_left.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = d.grid.u(k);
    d.p_bottom[k] = p_left(0.0) + dp_bottom0 * s + 0.3 * s * s;
    d.p_left[k] = p_left(s);
    d.q_left[k] = q_left(s);
    d.q_top[k] = q_left(top) + dq_top0 * s - 0.2 * s * s;
    d.g_bottom[k] = g_bottom(s);
    d.g_left[k] = g_left(s);
  }
  return d;
}

inline CanonicalTriple goursat_hyperbolic(std::size_t n = 65) {
  return solve_goursat_hyperbolic(goursat_hyperbolic_data(n)).triple;
}

/// Isotropic cylinder z = (cos t, sin t, 0, s), t = (u - v)/sqrt2, s = (u + v)/sqrt2.
inline MinkVec cylinder_point(double u, double v) {
  const double r = 1.0 / std::sqrt(2.0);
  const double th = (u - v) * r, t = (u + v) * r;
  return {std::cos(th), std::sin(th), 0.0, t};
}

inline Immersion cylinder(std::size_t n = 65) {
  return Immersion::from_function(GridSpec::square(0.0, 1.0, n), cylinder_point);
}

/// (lambda, mu, nu) = (1, e, u) with K - H^2 > 0; violates the first natural equation by 1.
inline CanonicalTriple nonsolution(std::size_t n = 65) {
  const GridSpec g = GridSpec::square(0.0, 1.0, n);
  return {ScalarField::constant(g, 1.0), ScalarField::constant(g, std::exp(1.0)),
          ScalarField::from_analytic(g, {[](double u, double) { return u; }, [](double, double) { return 1.0; },
                                         [](double, double) { return 0.0; }, [](double, double) { return 0.0; }}),
          SurfaceCase::PositiveKH};
}

/// 1 + amplitude * Gaussian bump centred on the grid, with closed-form partials.
inline ScalarField bump_factor(const GridSpec& g, double amplitude = 0.01, double width = 0.15) {
  const double uc = 0.5 * (g.u0 + g.u1), vc = 0.5 * (g.v0 + g.v1), w2 = width * width;
  auto b = [=](double u, double v) { return std::exp(-((u - uc) * (u - uc) + (v - vc) * (v - vc)) / (2.0 * w2)); };
  return ScalarField::from_analytic(
      g, {[=](double u, double v) { return 1.0 + amplitude * b(u, v); },
          [=](double u, double v) { return -amplitude * (u - uc) / w2 * b(u, v); },
          [=](double u, double v) { return -amplitude * (v - vc) / w2 * b(u, v); },
          [=](double u, double v) { return amplitude * (u - uc) * (v - vc) / (w2 * w2) * b(u, v); }});
}

/// The constant fixture with mu multiplied by 1 + 0.01 * bump.
inline CanonicalTriple perturbed(std::size_t n = 65) {
  CanonicalTriple t = constant(n);
  t.mu = t.mu * bump_factor(t.grid());
  return t;
}

}  // namespace pnmc::fixtures
