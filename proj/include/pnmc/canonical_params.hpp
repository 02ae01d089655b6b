#pragma once

#include "pnmc/errors.hpp"
#include "pnmc/fields.hpp"
#include "pnmc/immersion.hpp"
#include "pnmc/natural_systems.hpp"
#include "pnmc/surface_analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace pnmc {

struct Separability {
  double dev_u = 0.0;  ///< max |d/du ln(f^2 |mu2|)|
  double dev_v = 0.0;  ///< max |d/dv ln(f^2 |mu1|)|
  double tol = 0.0;
  bool ok() const { return dev_u <= tol && dev_v <= tol; }
};

namespace detail {

inline ScalarField log_f2_abs(const ScalarField& f, const ScalarField& mu) {
  ScalarField::check_same_grid(f, mu);
  std::vector<double> out(f.grid().size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double a = std::abs(mu[k]);
    if (a < kMuMin)
      throw Error(ErrorKind::NearZeroField, "|mu| below mu_min in separability check", "canonical_params");
    out[k] = std::log(f[k] * f[k] * a);
  }
  return ScalarField(f.grid(), std::move(out));
}

}  // namespace detail

/**
 * Whether f^2|mu1| depends on u only and f^2|mu2| on v only (interior maxima).
 * Pass mu2 = nullptr for the degenerate class, where only the first condition applies.
 */
inline constexpr double kSeparabilityTol = 1e-3;

inline Separability check_separability(const ScalarField& f, const ScalarField& mu1, const ScalarField* mu2,
                                       double rel_tol = kSeparabilityTol) {
  Separability s;
  const ScalarField l1 = detail::log_f2_abs(f, mu1);
  s.dev_v = interior_max_abs(d_dv(l1));
  double scale = l1.max_abs();
  if (mu2 != nullptr) {
    const ScalarField l2 = detail::log_f2_abs(f, *mu2);
    s.dev_u = interior_max_abs(d_du(l2));
    scale = std::max(scale, l2.max_abs());
  }
  s.tol = rel_tol * (1.0 + scale);
  return s;
}

inline Separability check_separability(const ScalarField& f, const ScalarField& mu1, const ScalarField& mu2,
                                       double rel_tol = kSeparabilityTol) {
  return check_separability(f, mu1, &mu2, rel_tol);
}

struct Reparametrization {
  std::vector<double> phi;   ///< f^2 |mu1| over u
  std::vector<double> psi;   ///< f^2 |mu2| over v (general case only)
  std::vector<double> ubar;  ///< ubar at the old u nodes
  std::vector<double> vbar;  ///< vbar at the old v nodes
  GridSpec new_grid;
  SurfaceCase kind = SurfaceCase::NegativeKH;
  bool swapped = false;  ///< u and v exchanged because mu1 vanished
};

struct CanonicalizeOptions {
  double iso_tol = kIsotropyTol;
  double sep_tol = kSeparabilityTol;
  double degenerate_tol = 1e-3;  ///< relative size of mu2 below which the class is degenerate
  /// Degenerate class: integrate phi instead of sqrt(phi). Yields f^2 |mu| = 1/phi, so only
  /// canonical when phi is already 1.
  bool literal_degenerate_quadrature = false;
};

struct CanonicalResult {
  Immersion immersion;
  CanonicalTriple triple;
  Reparametrization reparam;
  Separability separability;
  SurfaceCase case_before = SurfaceCase::NegativeKH;
  SurfaceCase case_after = SurfaceCase::NegativeKH;
  double metric_law = 0.0;        ///< interior max | fbar sqrt|mubar| - 1 |
  double sigma_relation = 0.0;    ///< interior max of sigma(ybar,ybar) + eps sigma(xbar,xbar) in components
  double reanalysis_error = 0.0;  ///< returned triple vs frame functions of the new immersion
};

namespace detail {

inline Immersion transposed(const Immersion& m) {
  const GridSpec& g = m.grid;
  Immersion out{GridSpec{g.v0, g.v1, g.u0, g.u1, g.nv, g.nu}, std::vector<MinkVec>(g.size())};
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j) out(j, i) = m(i, j);
  return out;
}

// Values of the monotone map x -> y (given at nodes) at the targets, by 4-point Lagrange.
inline std::vector<double> interpolate_monotone(const std::vector<double>& x, const std::vector<double>& y,
                                                const std::vector<double>& targets) {
  const std::size_t n = x.size();
  std::vector<double> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double q = std::clamp(targets[t], x.front(), x.back());
    std::size_t hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), q) - x.begin());
    hi = std::clamp<std::size_t>(hi, 1, n - 1);
    const std::size_t k0 = std::min(hi > 2 ? hi - 2 : 0, n - 4);
    double acc = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      double w = 1.0;
      for (std::size_t b = 0; b < 4; ++b)
        if (b != a) w *= (q - x[k0 + b]) / (x[k0 + a] - x[k0 + b]);
      acc += w * y[k0 + a];
    }
    out[t] = std::clamp(acc, y.front(), y.back());
  }
  return out;
}

inline void require_increasing(const std::vector<double>& x, const char* name) {
  for (std::size_t k = 1; k < x.size(); ++k)
    if (!(x[k] > x[k - 1]))
      throw Error(ErrorKind::InvalidArgument, std::string(name) + " is not strictly increasing",
                  "canonical_params");
}

inline SurfaceCase interior_case(const FrameFunctions& fn, const GridSpec& g) {
  bool first = true;
  SurfaceCase kind = SurfaceCase::NegativeKH;
  for (std::size_t i = kInteriorLayers; i + kInteriorLayers < g.nu; ++i)
    for (std::size_t j = kInteriorLayers; j + kInteriorLayers < g.nv; ++j) {
      const std::size_t k = g.index(i, j);
      const SurfaceCase c = classify_from_frame(fn.lambda1[k], fn.mu1[k], fn.lambda2[k], fn.mu2[k]).kind;
      if (first) {
        kind = c;
        first = false;
      } else if (c != kind) {
        throw Error(ErrorKind::InvalidArgument, "sign of K - H^2 changes across the patch", "canonical_params");
      }
    }
  return kind;
}

// Degenerate when mu2 is negligible next to mu1 on the interior.
inline bool negligible(const ScalarField& small, const ScalarField& big, double tol) {
  return interior_max_abs(small) <= tol * (1.0 + interior_max_abs(big));
}

}  // namespace detail

/**
 * Canonical isotropic parameters for an isotropic immersion.
 *
 * General class: ubar = int sqrt(phi) du, vbar = int sqrt(psi) dv with phi = f^2|mu1|,
 * psi = f^2|mu2|; lambda = lambda1 sqrt(|mu1 mu2|)/|mu1|, mu = sign(mu1) sqrt(|mu1 mu2|).
 * Degenerate class (mu2 = 0): vbar = v - v0, ubar = int sqrt(phi) du; lambda = lambda1/sqrt(phi),
 * mu = mu1/sqrt(phi). Both constants of integration are zero at the lower corner.
 */
inline CanonicalResult canonicalize(const Immersion& input, const CanonicalizeOptions& opt = {}) {
  CanonicalResult res;
  Immersion m = input;
  Analysis an = analyze(m, {}, opt.iso_tol);
  bool degenerate = detail::negligible(an.functions.mu2, an.functions.mu1, opt.degenerate_tol);
  if (!degenerate && detail::negligible(an.functions.mu1, an.functions.mu2, opt.degenerate_tol)) {
    m = detail::transposed(input);
    an = analyze(m, {}, opt.iso_tol);
    res.reparam.swapped = true;
    degenerate = true;
  }
  const GridSpec& g = m.grid;
  const FrameFunctions& fn = an.functions;
  res.case_before = degenerate ? SurfaceCase::Degenerate : detail::interior_case(fn, g);
  res.reparam.kind = res.case_before;

  res.separability = check_separability(fn.f, fn.mu1, degenerate ? nullptr : &fn.mu2, opt.sep_tol);
  if (!res.separability.ok()) {
    Error e(ErrorKind::NotSeparable,
            "f^2|mu_i| not separable (dev_u " + std::to_string(res.separability.dev_u) + ", dev_v " +
                std::to_string(res.separability.dev_v) + ", tol " + std::to_string(res.separability.tol) + ")",
            "canonical_params");
    e.value = std::max(res.separability.dev_u, res.separability.dev_v);
    throw e;
  }

  // phi over u and psi over v, averaged across the interior of the other axis.
  const std::size_t L = kInteriorLayers;
  std::vector<double> phi(g.nu, 0.0), psi(g.nv, 0.0);
  for (std::size_t i = 0; i < g.nu; ++i) {
    for (std::size_t j = L; j + L < g.nv; ++j) {
      const std::size_t k = g.index(i, j);
      phi[i] += fn.f[k] * fn.f[k] * std::abs(fn.mu1[k]);
    }
    phi[i] /= static_cast<double>(g.nv - 2 * L);
  }
  if (!degenerate)
    for (std::size_t j = 0; j < g.nv; ++j) {
      for (std::size_t i = L; i + L < g.nu; ++i) {
        const std::size_t k = g.index(i, j);
        psi[j] += fn.f[k] * fn.f[k] * std::abs(fn.mu2[k]);
      }
      psi[j] /= static_cast<double>(g.nu - 2 * L);
    }

  auto sqrt_of = [](std::vector<double> v) {
    for (double& x : v) x = std::sqrt(x);
    return v;
  };
  const bool literal = degenerate && opt.literal_degenerate_quadrature;
  std::vector<double> ubar = cumulative_simpson(literal ? phi : sqrt_of(phi), g.hu());
  std::vector<double> vbar(g.nv);
  if (degenerate) {
    for (std::size_t j = 0; j < g.nv; ++j) vbar[j] = g.v(j) - g.v0;
  } else {
    vbar = cumulative_simpson(sqrt_of(psi), g.hv());
  }
  detail::require_increasing(ubar, "ubar");
  detail::require_increasing(vbar, "vbar");

  const GridSpec ng{ubar.front(), ubar.back(), vbar.front(), vbar.back(), g.nu, g.nv};
  std::vector<double> ut(g.nu), vt(g.nv), u_old(g.nu), v_old(g.nv);
  for (std::size_t i = 0; i < g.nu; ++i) {
    ut[i] = ng.u(i);
    u_old[i] = g.u(i);
  }
  for (std::size_t j = 0; j < g.nv; ++j) {
    vt[j] = ng.v(j);
    v_old[j] = g.v(j);
  }
  const std::vector<double> u_at = detail::interpolate_monotone(ubar, u_old, ut);
  const std::vector<double> v_at = detail::interpolate_monotone(vbar, v_old, vt);

  // New immersion and the formula triple, both sampled at the old-parameter preimages.
  const VectorField z = components(m);
  const VectorField zn = z.apply([&](const ScalarField& s) { return resample(s, u_at, v_at, ng); });
  res.immersion = Immersion{ng, zn.nodes()};

  std::vector<double> lam(g.size()), mu(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double l1 = fn.lambda1[k], m1 = fn.mu1[k], f = fn.f[k];
    if (degenerate) {
      const double w = literal ? f * f * std::abs(m1) : f * std::sqrt(std::abs(m1));
      lam[k] = l1 / w;
      mu[k] = m1 / w;
    } else {
      const double r = std::sqrt(std::abs(m1) * std::abs(fn.mu2[k]));
      lam[k] = l1 * r / std::abs(m1);
      mu[k] = (m1 < 0.0 ? -1.0 : 1.0) * r;
    }
  }
  const ScalarField lam_old(g, std::move(lam)), mu_old(g, std::move(mu));
  res.triple = CanonicalTriple{resample(lam_old, u_at, v_at, ng), resample(mu_old, u_at, v_at, ng),
                               resample(fn.nu, u_at, v_at, ng), res.case_before};

  res.reparam.phi = std::move(phi);
  if (!degenerate) res.reparam.psi = std::move(psi);
  res.reparam.ubar = std::move(ubar);
  res.reparam.vbar = std::move(vbar);
  res.reparam.new_grid = ng;

  // Verify on the new immersion.
  const Analysis after = analyze(res.immersion, {}, opt.iso_tol);
  const FrameFunctions& nf = after.functions;
  const bool deg_after = detail::negligible(nf.mu2, nf.mu1, opt.degenerate_tol);
  res.case_after = deg_after ? SurfaceCase::Degenerate : detail::interior_case(nf, ng);
  const double eps = epsilon_of(res.case_before);
  std::vector<double> law(ng.size()), sig(ng.size()), rec(ng.size());
  for (std::size_t k = 0; k < ng.size(); ++k) {
    law[k] = nf.f[k] * std::sqrt(std::abs(res.triple.mu[k])) - 1.0;
    sig[k] = degenerate ? std::max(std::abs(nf.lambda2[k]), std::abs(nf.mu2[k]))
                        : std::max(std::abs(nf.lambda2[k] + eps * nf.lambda1[k]),
                                   std::abs(nf.mu2[k] + eps * nf.mu1[k]));
    rec[k] = std::max({std::abs(nf.lambda1[k] - res.triple.lambda[k]), std::abs(nf.mu1[k] - res.triple.mu[k]),
                       std::abs(nf.nu[k] - res.triple.nu[k])});
  }
  res.metric_law = interior_max_abs(ScalarField(ng, std::move(law)));
  res.sigma_relation = interior_max_abs(ScalarField(ng, std::move(sig)));
  res.reanalysis_error = interior_max_abs(ScalarField(ng, std::move(rec)));
  return res;
}

}  // namespace pnmc
