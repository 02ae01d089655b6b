#pragma once

#include "pnmc/errors.hpp"
#include "pnmc/fields.hpp"
#include "pnmc/minkowski.hpp"

#include <array>
#include <functional>
#include <vector>

namespace pnmc {

/// Sampled surface z(u, v) in Minkowski 4-space.
struct Immersion {
  GridSpec grid;
  std::vector<MinkVec> points;

  const MinkVec& operator()(std::size_t i, std::size_t j) const { return points[grid.index(i, j)]; }
  MinkVec& operator()(std::size_t i, std::size_t j) { return points[grid.index(i, j)]; }

  static Immersion from_function(const GridSpec& grid, const std::function<MinkVec(double, double)>& z) {
    grid.validate();
    Immersion m{grid, std::vector<MinkVec>(grid.size())};
    for (std::size_t i = 0; i < grid.nu; ++i)
      for (std::size_t j = 0; j < grid.nv; ++j) m(i, j) = z(grid.u(i), grid.v(j));
    return m;
  }

  /// Same samples on a relabelled grid with identical node counts (affine reparametrization).
  Immersion relabelled(const GridSpec& g) const {
    g.validate();
    if (g.nu != grid.nu || g.nv != grid.nv)
      throw Error(ErrorKind::InvalidArgument, "relabelled grid must keep node counts", "surface_analysis");
    return {g, points};
  }
};

/// Four scalar component fields of a vector-valued function on a grid.
struct VectorField {
  std::array<ScalarField, 4> c;

  const GridSpec& grid() const { return c[0].grid(); }
  MinkVec at(std::size_t k) const { return MinkVec(c[0][k], c[1][k], c[2][k], c[3][k]); }
  MinkVec operator()(std::size_t i, std::size_t j) const { return at(grid().index(i, j)); }

  static VectorField from_nodes(const GridSpec& g, const std::vector<MinkVec>& nodes) {
    VectorField out;
    for (int k = 0; k < 4; ++k) {
      std::vector<double> vals(g.size());
      for (std::size_t n = 0; n < g.size(); ++n) vals[n] = nodes[n][k];
      out.c[static_cast<std::size_t>(k)] = ScalarField(g, std::move(vals));
    }
    return out;
  }

  std::vector<MinkVec> nodes() const {
    std::vector<MinkVec> out(grid().size());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = at(n);
    return out;
  }

  template <class Op>
  VectorField apply(Op&& op) const {
    return {{op(c[0]), op(c[1]), op(c[2]), op(c[3])}};
  }
};

inline VectorField components(const Immersion& m) { return VectorField::from_nodes(m.grid, m.points); }

inline VectorField d_du(const VectorField& f) {
  return f.apply([](const ScalarField& s) { return d_du(s); });
}
inline VectorField d_dv(const VectorField& f) {
  return f.apply([](const ScalarField& s) { return d_dv(s); });
}
inline VectorField d_dudv(const VectorField& f) {
  return f.apply([](const ScalarField& s) { return d_dudv(s); });
}
inline VectorField d2_du2(const VectorField& f) {
  return f.apply([](const ScalarField& s) { return d2_du2(s); });
}
inline VectorField d2_dv2(const VectorField& f) {
  return f.apply([](const ScalarField& s) { return d2_dv2(s); });
}

/// Pointwise Lorentz inner product of two vector fields.
inline ScalarField inner(const VectorField& a, const VectorField& b) {
  const GridSpec& g = a.grid();
  std::vector<double> out(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) out[n] = lorentz_inner(a.at(n), b.at(n));
  return ScalarField(g, std::move(out));
}

}  // namespace pnmc
