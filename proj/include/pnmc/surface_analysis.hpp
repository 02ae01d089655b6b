#pragma once

#include "pnmc/errors.hpp"
#include "pnmc/fields.hpp"
#include "pnmc/frame_integration.hpp"
#include "pnmc/immersion.hpp"
#include "pnmc/minkowski.hpp"
#include "pnmc/natural_systems.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace pnmc {

/// Relative isotropy threshold max(|E|,|G|) / max|F| on interior nodes.
inline constexpr double kIsotropyTol = 1e-2;
/// Mean curvature below this (relative) means minimal or totally geodesic.
inline constexpr double kMinimalTol = 1e-8;
/// Relative zero threshold for the second-fundamental-form coefficients c_ij^k.
inline constexpr double kGeodesicTol = 1e-8;

struct FundamentalForm {
  VectorField z_u, z_v;
  ScalarField E, F, G, W;
  bool is_timelike = false;
  bool is_isotropic = false;
  double isotropy_ratio = 0.0;  ///< interior max(|E|,|G|) / max|F|
};

/**
 * E, F, G from finite-difference tangents. Isotropy is judged on interior nodes,
 * since the order-2 tangents carry an O(h^2) error in E and G.
 */
inline FundamentalForm first_fundamental_form(const Immersion& m, double iso_tol = kIsotropyTol) {
  m.grid.validate();
  const VectorField z = components(m);
  FundamentalForm ff{d_du(z), d_dv(z), {}, {}, {}, {}};
  ff.E = inner(ff.z_u, ff.z_u);
  ff.F = inner(ff.z_u, ff.z_v);
  ff.G = inner(ff.z_v, ff.z_v);
  const std::size_t n = m.grid.size();
  std::vector<double> det(n), w(n);
  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    det[k] = ff.E[k] * ff.G[k] - ff.F[k] * ff.F[k];
    w[k] = std::sqrt(std::abs(det[k]));
    scale = std::max(scale, ff.F[k] * ff.F[k] + std::abs(ff.E[k] * ff.G[k]));
  }
  ff.is_timelike = true;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(det[k]) < 1e-14 * scale || scale == 0.0) {
      Error e(ErrorKind::DegenerateMetric, "first fundamental form is degenerate at node " + std::to_string(k),
              "surface_analysis");
      e.value = det[k];
      throw e;
    }
    if (det[k] >= 0.0) ff.is_timelike = false;
  }
  ff.W = ScalarField(m.grid, std::move(w));
  const double fmax = ff.F.max_abs();
  ff.isotropy_ratio = std::max(interior_max_abs(ff.E), interior_max_abs(ff.G)) / fmax;
  ff.is_isotropic = ff.isotropy_ratio <= iso_tol;
  return ff;
}

struct GeometricFrame {
  FundamentalForm form;
  VectorField x, y, n1, n2;
  VectorField z_uu, z_uv, z_vv;
  ScalarField f, nu;

  FrameField frame_field() const {
    const GridSpec& g = f.grid();
    FrameField out{g, {}};
    out.frames.reserve(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) out.frames.emplace_back(x.at(k), y.at(k), n1.at(k), n2.at(k));
    return out;
  }
};

namespace detail {

// Unit vector w orthogonal to a, b, c with det[a; b; c; w] > 0.
inline MinkVec oriented_normal(const MinkVec& a, const MinkVec& b, const MinkVec& c) {
  Mat4 m;
  m.row(0) = a.transpose();
  m.row(1) = b.transpose();
  m.row(2) = c.transpose();
  MinkVec w;
  for (int k = 0; k < 4; ++k) {
    m.row(3) = MinkVec::Unit(k).transpose();
    w[k] = metric()(k, k) * m.determinant();
  }
  const double n2 = lorentz_norm2(w);
  return w / std::sqrt(std::abs(n2));
}

inline void require_isotropic(const FundamentalForm& ff) {
  if (!ff.is_isotropic) {
    Error e(ErrorKind::NotIsotropic,
            "immersion is not in isotropic parameters (max(|E|,|G|)/max|F| = " +
                std::to_string(ff.isotropy_ratio) +
                "); isotropic coordinates must be constructed before analysis",
            "surface_analysis");
    e.value = ff.isotropy_ratio;
    throw e;
  }
}

}  // namespace detail

/**
 * Geometric frame {x, y, n1, n2} of an isotropic immersion. H = -(z_uv)^normal / f^2;
 * the tangential part is removed with the exact inverse of the tangent Gram matrix,
 * which reduces to -<w,y>x - <w,x>y when E = G = 0.
 */
inline GeometricFrame geometric_frame(const Immersion& m, double iso_tol = kIsotropyTol) {
  GeometricFrame gf{first_fundamental_form(m, iso_tol), {}, {}, {}, {}, {}, {}, {}, {}, {}};
  const FundamentalForm& ff = gf.form;
  detail::require_isotropic(ff);
  if (ff.F.max() >= 0.0)
    throw Error(ErrorKind::NotIsotropic, "isotropic parameters need <z_u, z_v> < 0 everywhere",
                "surface_analysis");
  const GridSpec& g = m.grid;
  const VectorField z = components(m);
  gf.z_uu = d2_du2(z);
  gf.z_uv = d_dudv(z);
  gf.z_vv = d2_dv2(z);
  const std::size_t n = g.size();
  std::vector<MinkVec> x(n), y(n), n1(n), n2(n);
  std::vector<double> f(n), nu(n);
  for (std::size_t k = 0; k < n; ++k) {
    f[k] = std::sqrt(-ff.F[k]);
    const MinkVec zu = ff.z_u.at(k), zv = ff.z_v.at(k), w = gf.z_uv.at(k);
    x[k] = zu / f[k];
    y[k] = zv / f[k];
    const double E = ff.E[k], F = ff.F[k], G = ff.G[k], det = E * G - F * F;
    const double pu = lorentz_inner(w, zu), pv = lorentz_inner(w, zv);
    const double a = (G * pu - F * pv) / det, b = (E * pv - F * pu) / det;
    const MinkVec H = -(w - a * zu - b * zv) / (f[k] * f[k]);
    nu[k] = std::sqrt(std::max(0.0, lorentz_norm2(H)));
    n1[k] = nu[k] > 0.0 ? MinkVec(H / nu[k]) : MinkVec::Zero();
  }
  const double scale = std::max(1.0, *std::max_element(nu.begin(), nu.end()));
  for (std::size_t k = 0; k < n; ++k)
    if (nu[k] < kMinimalTol * scale) {
      Error e(ErrorKind::MinimalOrTotallyGeodesic,
              "mean curvature vector vanishes at node " + std::to_string(k), "surface_analysis");
      e.value = nu[k];
      throw e;
    }
  for (std::size_t k = 0; k < n; ++k) n2[k] = detail::oriented_normal(x[k], y[k], n1[k]);
  gf.x = VectorField::from_nodes(g, x);
  gf.y = VectorField::from_nodes(g, y);
  gf.n1 = VectorField::from_nodes(g, n1);
  gf.n2 = VectorField::from_nodes(g, n2);
  gf.f = ScalarField(g, std::move(f));
  gf.nu = ScalarField(g, std::move(nu));
  return gf;
}

struct FrameFunctions {
  ScalarField gamma1, gamma2, lambda1, mu1, lambda2, mu2, nu, beta1, beta2, f;
};

/**
 * Derivative formulas of the geometric frame, with nabla_x = (1/f) d/du and nabla_y = (1/f) d/dv.
 * Since z_u is tangent, <x_u, n> = <z_uu, n>/f, so lambda_i and mu_i are taken from the
 * compact second differences of z.
 */
inline FrameFunctions frame_functions(const GeometricFrame& gf) {
  const ScalarField lnf = gf.f.map([](double v) { return std::log(v); });
  const ScalarField inv_f = gf.f.map([](double v) { return 1.0 / v; });
  const ScalarField inv_f2 = inv_f * inv_f;
  const VectorField n1_u = d_du(gf.n1), n1_v = d_dv(gf.n1);
  FrameFunctions out;
  out.f = gf.f;
  out.nu = gf.nu;
  out.gamma1 = inv_f * d_du(lnf);
  out.gamma2 = inv_f * d_dv(lnf);
  out.lambda1 = inv_f2 * inner(gf.z_uu, gf.n1);
  out.mu1 = inv_f2 * inner(gf.z_uu, gf.n2);
  out.lambda2 = inv_f2 * inner(gf.z_vv, gf.n1);
  out.mu2 = inv_f2 * inner(gf.z_vv, gf.n2);
  out.beta1 = inv_f * inner(n1_u, gf.n2);
  out.beta2 = inv_f * inner(n1_v, gf.n2);
  return out;
}

inline FrameFunctions frame_functions(const Immersion& m) { return frame_functions(geometric_frame(m)); }

enum class NodeClass { TotallyGeodesic, Minimal, ParallelH, PNMC, Generic };

constexpr std::string_view node_class_name(NodeClass c) {
  switch (c) {
    case NodeClass::TotallyGeodesic: return "TotallyGeodesic";
    case NodeClass::Minimal: return "Minimal";
    case NodeClass::ParallelH: return "ParallelH";
    case NodeClass::PNMC: return "PNMC";
    case NodeClass::Generic: return "Generic";
  }
  return "?";
}

struct ClassifyTolerances {
  double geodesic = kGeodesicTol;  ///< on max |c_ij^k|, relative
  double minimal = kMinimalTol;    ///< on nu, relative
  double beta = 1e-4;              ///< tol_beta = beta * (1 + sigma scale)
};

/// Per-node class from the already-scaled quantities; nu_varies is a whole-patch property.
constexpr NodeClass classify_node(double c_max, double nu, double beta_max, bool nu_varies, double c_tol,
                                  double nu_tol, double beta_tol) {
  if (c_max <= c_tol) return NodeClass::TotallyGeodesic;
  if (nu <= nu_tol) return NodeClass::Minimal;
  if (beta_max <= beta_tol) return nu_varies ? NodeClass::PNMC : NodeClass::ParallelH;
  return NodeClass::Generic;
}

struct InvariantReport {
  ScalarField K_metric, K_frame, H2, KmH2_direct, KmH2_formula;
  ScalarField Delta1, Delta2, Delta3;
  std::vector<NodeClass> classification;
  NodeClass overall = NodeClass::Generic;  ///< unanimous interior class, else Generic
  double nu_variation = 0.0;               ///< interior max nu - min nu
  double beta_max = 0.0;                   ///< interior max(|beta1|, |beta2|)
  double beta_tol = 0.0;
};

struct Analysis {
  GeometricFrame frame;
  FrameFunctions functions;
  InvariantReport invariants;
};

/**
 * Curvatures, inflection determinants and classification. K_metric = (2/f^2)(ln f)_uv,
 * K_frame = nu^2 - lambda1 lambda2 - mu1 mu2, K - H^2 = -(mu2/mu1)(lambda1^2 + mu1^2),
 * with the roles of the two pairs swapped where |mu1| is below tol.
 */
inline InvariantReport invariants(const GeometricFrame& gf, const FrameFunctions& fn,
                                  const ClassifyTolerances& tol = {}) {
  const GridSpec& g = gf.f.grid();
  const std::size_t n = g.size();
  const ScalarField lnf = gf.f.map([](double v) { return std::log(v); });
  const ScalarField lnf_uv = d_dudv(lnf);
  const VectorField& z_uu = gf.z_uu;
  const VectorField& z_vv = gf.z_vv;

  std::vector<double> km(n), kf(n), h2(n), kd(n), kfm(n), d1(n), d2(n), d3(n), cmax(n), bmax(n);
  double c_scale = 0.0, sigma_scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = gf.f[k], l1 = fn.lambda1[k], m1 = fn.mu1[k], l2 = fn.lambda2[k], m2 = fn.mu2[k];
    const double nu = fn.nu[k];
    km[k] = 2.0 / (f * f) * lnf_uv[k];
    kf[k] = nu * nu - l1 * l2 - m1 * m2;
    h2[k] = nu * nu;
    kd[k] = kf[k] - h2[k];
    if (std::abs(m1) > tol.minimal)
      kfm[k] = -(m2 / m1) * (l1 * l1 + m1 * m1);
    else if (std::abs(m2) > tol.minimal)
      kfm[k] = -(m1 / m2) * (l2 * l2 + m2 * m2);
    else
      kfm[k] = 0.0;
    const MinkVec n1 = gf.n1.at(k), n2 = gf.n2.at(k);
    const MinkVec zuu = z_uu.at(k), zuv = gf.z_uv.at(k), zvv = z_vv.at(k);
    const double c111 = lorentz_inner(zuu, n1), c121 = lorentz_inner(zuv, n1), c221 = lorentz_inner(zvv, n1);
    const double c112 = lorentz_inner(zuu, n2), c122 = lorentz_inner(zuv, n2), c222 = lorentz_inner(zvv, n2);
    d1[k] = c111 * c122 - c121 * c112;
    d2[k] = c111 * c222 - c221 * c112;
    d3[k] = c121 * c222 - c221 * c122;
    cmax[k] = std::max({std::abs(c111), std::abs(c121), std::abs(c221), std::abs(c112), std::abs(c122),
                        std::abs(c222)});
    bmax[k] = std::max(std::abs(fn.beta1[k]), std::abs(fn.beta2[k]));
    c_scale = std::max(c_scale, std::max({zuu.norm(), zuv.norm(), zvv.norm()}));
    sigma_scale = std::max({sigma_scale, std::abs(l1), std::abs(m1), std::abs(l2), std::abs(m2), nu});
  }

  InvariantReport r;
  r.K_metric = ScalarField(g, std::move(km));
  r.K_frame = ScalarField(g, std::move(kf));
  r.H2 = ScalarField(g, std::move(h2));
  r.KmH2_direct = ScalarField(g, std::move(kd));
  r.KmH2_formula = ScalarField(g, std::move(kfm));
  r.Delta1 = ScalarField(g, std::move(d1));
  r.Delta2 = ScalarField(g, std::move(d2));
  r.Delta3 = ScalarField(g, std::move(d3));
  r.nu_variation = interior_max(fn.nu) - interior_min(fn.nu);
  const bool nu_varies = !nu_is_constant(interior_min(fn.nu), interior_max(fn.nu));
  r.beta_tol = tol.beta * (1.0 + sigma_scale);
  const ScalarField bfield(g, std::move(bmax));
  r.beta_max = interior_max_abs(bfield);
  const double nu_scale = std::max(1.0, fn.nu.max_abs());

  r.classification.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    r.classification[k] = classify_node(cmax[k], fn.nu[k], bfield[k], nu_varies, tol.geodesic * std::max(1.0, c_scale),
                                        tol.minimal * nu_scale, r.beta_tol);
  bool first = true, unanimous = true;
  for (std::size_t i = kInteriorLayers; i + kInteriorLayers < g.nu; ++i)
    for (std::size_t j = kInteriorLayers; j + kInteriorLayers < g.nv; ++j) {
      const NodeClass c = r.classification[g.index(i, j)];
      if (first) {
        r.overall = c;
        first = false;
      } else if (c != r.overall) {
        unanimous = false;
      }
    }
  if (!unanimous) r.overall = NodeClass::Generic;
  return r;
}

inline Analysis analyze(const Immersion& m, const ClassifyTolerances& tol = {}, double iso_tol = kIsotropyTol) {
  Analysis a{geometric_frame(m, iso_tol), {}, {}};
  a.functions = frame_functions(a.frame);
  a.invariants = invariants(a.frame, a.functions, tol);
  return a;
}

struct Christoffel {
  ScalarField G1_11, G1_12, G1_22, G2_11, G2_12, G2_22;
  double tangential_discrepancy = 0.0;  ///< interior max of the tangential part of z_uu - G1_11 z_u (and vv)
};

/// Christoffel symbols in isotropic parameters: only G1_11 = 2 f_u / f and G2_22 = 2 f_v / f survive.
inline Christoffel christoffel_isotropic(const Immersion& m, double iso_tol = kIsotropyTol) {
  const FundamentalForm ff = first_fundamental_form(m, iso_tol);
  detail::require_isotropic(ff);
  const GridSpec& g = m.grid;
  const ScalarField f = ff.F.map([](double v) { return std::sqrt(std::abs(v)); });
  const ScalarField lnf = f.map([](double v) { return std::log(v); });
  const ScalarField zero(g, 0.0);
  Christoffel c{2.0 * d_du(lnf), zero, zero, zero, zero, 2.0 * d_dv(lnf), 0.0};
  const VectorField z = components(m);
  const VectorField z_uu = d2_du2(z), z_vv = d2_dv2(z);
  std::vector<double> dev(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const MinkVec x = ff.z_u.at(k) / f[k], y = ff.z_v.at(k) / f[k];
    const MinkVec ru = z_uu.at(k) - c.G1_11[k] * ff.z_u.at(k);
    const MinkVec rv = z_vv.at(k) - c.G2_22[k] * ff.z_v.at(k);
    dev[k] = std::max({std::abs(lorentz_inner(ru, x)), std::abs(lorentz_inner(ru, y)),
                       std::abs(lorentz_inner(rv, x)), std::abs(lorentz_inner(rv, y))});
  }
  c.tangential_discrepancy = interior_max_abs(ScalarField(g, std::move(dev)));
  return c;
}

}  // namespace pnmc
