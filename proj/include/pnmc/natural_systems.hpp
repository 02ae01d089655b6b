#pragma once

#include "pnmc/errors.hpp"
#include "pnmc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

namespace pnmc {

/// The three subclasses of timelike PNMC surfaces, by the sign of K - H^2.
enum class SurfaceCase { PositiveKH, NegativeKH, Degenerate };

/// epsilon = +1 for K - H^2 > 0, -1 for K - H^2 < 0, 0 for the degenerate class.
constexpr int epsilon_of(SurfaceCase c) {
  return c == SurfaceCase::PositiveKH ? 1 : (c == SurfaceCase::NegativeKH ? -1 : 0);
}

constexpr std::string_view case_name(SurfaceCase c) {
  switch (c) {
    case SurfaceCase::PositiveKH: return "positive";
    case SurfaceCase::NegativeKH: return "negative";
    case SurfaceCase::Degenerate: return "degenerate";
  }
  return "?";
}

inline SurfaceCase case_from_name(std::string_view name) {
  if (name == "positive") return SurfaceCase::PositiveKH;
  if (name == "negative") return SurfaceCase::NegativeKH;
  if (name == "degenerate") return SurfaceCase::Degenerate;
  throw Error(ErrorKind::ConfigError, "unknown case '" + std::string(name) + "'", "natural_systems");
}

/// Geometric functions (lambda, mu, nu) in canonical parameters plus the case tag.
struct CanonicalTriple {
  ScalarField lambda, mu, nu;
  SurfaceCase kind = SurfaceCase::NegativeKH;

  const GridSpec& grid() const { return mu.grid(); }
  int epsilon() const { return epsilon_of(kind); }
  int sign_mu() const { return mu[0] < 0.0 ? -1 : 1; }
  bool has_partials() const { return lambda.has_partials() && mu.has_partials() && nu.has_partials(); }

  /// ln|mu|; rejects near-zero or sign-changing mu.
  ScalarField log_abs_mu(double mu_min = kMuMin) const { return ln_abs(mu, mu_min, true); }

  void validate(double mu_min = kMuMin) const {
    ScalarField::check_same_grid(lambda, mu);
    ScalarField::check_same_grid(nu, mu);
    (void)log_abs_mu(mu_min);
    if (kind == SurfaceCase::Degenerate) {
      const double tol = 1e-8 * (1.0 + nu.max_abs());
      const double dv = d_dv(nu).max_abs();
      if (dv > tol)
        throw Error(ErrorKind::InvalidArgument,
                    "degenerate triple needs nu = nu(u); max |nu_v| = " + std::to_string(dv),
                    "natural_systems");
    }
  }
};

/// Non-fatal observations about a triple.
struct TripleDiagnostics {
  bool nu_constant = false;     ///< parallel mean curvature vector rather than PNMC
  bool nu_nonpositive = false;  ///< nu <= 0 somewhere, so nu is not |H| there
};

/// Relative threshold on (max nu - min nu) separating constant from varying nu.
inline constexpr double kNuVariationTol = 1e-4;

inline bool nu_is_constant(double nu_min, double nu_max) {
  return nu_max - nu_min <= kNuVariationTol * (1.0 + std::max(std::abs(nu_min), std::abs(nu_max)));
}

inline TripleDiagnostics diagnose(const CanonicalTriple& t) {
  return {nu_is_constant(t.nu.min(), t.nu.max()), t.nu.min() <= 0.0};
}

/// Left-minus-right sides of the natural equations, sampled on the triple's grid.
struct ResidualReport {
  ScalarField r1, r2, r3;
  double max_abs = 0.0;
  double interior_max_abs = 0.0;
};

/**
 * Residuals of the natural PDE system.
 *
 *   r1 = nu_u + lambda_v - lambda (ln|mu|)_v
 *   r2 = lambda_u - eps nu_v - lambda (ln|mu|)_u     (degenerate: r2 = nu_v)
 *   r3 = |mu| (ln|mu|)_uv + nu^2 + eps (lambda^2 + mu^2)
 *
 * Derivatives come from the fields module, so analytic partials are used when present.
 */
inline ResidualReport residual(const CanonicalTriple& t, double mu_min = kMuMin) {
  ScalarField::check_same_grid(t.lambda, t.mu);
  ScalarField::check_same_grid(t.nu, t.mu);
  const ScalarField g = t.log_abs_mu(mu_min);
  const ScalarField g_u = d_du(g), g_v = d_dv(g), g_uv = d_dudv(g);
  const ScalarField lam_u = d_du(t.lambda), lam_v = d_dv(t.lambda);
  const ScalarField nu_u = d_du(t.nu), nu_v = d_dv(t.nu);
  const double eps = t.epsilon();
  const std::size_t n = t.grid().size();

  std::vector<double> r1(n), r2(n), r3(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = t.lambda[k], mu = t.mu[k], nu = t.nu[k];
    r1[k] = nu_u[k] + lam_v[k] - lam * g_v[k];
    if (t.kind == SurfaceCase::Degenerate) {
      r2[k] = nu_v[k];
      r3[k] = std::abs(mu) * g_uv[k] + nu * nu;
    } else {
      r2[k] = lam_u[k] - eps * nu_v[k] - lam * g_u[k];
      r3[k] = std::abs(mu) * g_uv[k] + nu * nu + eps * (lam * lam + mu * mu);
    }
  }
  ResidualReport rep{ScalarField(t.grid(), std::move(r1)), ScalarField(t.grid(), std::move(r2)),
                     ScalarField(t.grid(), std::move(r3))};
  rep.max_abs = std::max({rep.r1.max_abs(), rep.r2.max_abs(), rep.r3.max_abs()});
  rep.interior_max_abs = std::max(
      {interior_max_abs(rep.r1), interior_max_abs(rep.r2), interior_max_abs(rep.r3)});
  return rep;
}

struct Classification {
  SurfaceCase kind;
  double k_minus_h2;
};

/**
 * K - H^2 = -(mu2/mu1)(lambda1^2 + mu1^2), classified against tol. When mu1 vanishes
 * the roles of (lambda1, mu1) and (lambda2, mu2) are exchanged first.
 */
inline Classification classify_from_frame(double lambda1, double mu1, double lambda2, double mu2,
                                          double tol = 1e-10) {
  if (mu1 == 0.0 && mu2 == 0.0)
    throw Error(ErrorKind::BothMuZero,
                "mu1 = mu2 = 0: inflection configuration, surface lies in a 3-space",
                "natural_systems");
  if (mu1 == 0.0) {
    std::swap(lambda1, lambda2);
    std::swap(mu1, mu2);
  }
  const double kh = -(mu2 / mu1) * (lambda1 * lambda1 + mu1 * mu1);
  if (kh > tol) return {SurfaceCase::PositiveKH, kh};
  if (kh < -tol) return {SurfaceCase::NegativeKH, kh};
  return {SurfaceCase::Degenerate, kh};
}

}  // namespace pnmc
