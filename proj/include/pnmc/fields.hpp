#pragma once

#include "pnmc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pnmc {

/**
 * Uniform rectangular grid on [u0,u1] x [v0,v1] with nu x nv nodes.
 * Samples are stored u-major: index(i, j) = i * nv + j, so v runs fastest.
 */
struct GridSpec {
  double u0 = 0.0, u1 = 1.0, v0 = 0.0, v1 = 1.0;
  std::size_t nu = 5, nv = 5;

  static constexpr std::size_t kMinNodes = 5;

  double hu() const { return (u1 - u0) / static_cast<double>(nu - 1); }
  double hv() const { return (v1 - v0) / static_cast<double>(nv - 1); }
  double u(std::size_t i) const {
    return i + 1 == nu ? u1 : u0 + static_cast<double>(i) * hu();
  }
  double v(std::size_t j) const {
    return j + 1 == nv ? v1 : v0 + static_cast<double>(j) * hv();
  }
  std::size_t size() const { return nu * nv; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * nv + j; }

  void validate() const {
    if (!(std::isfinite(u0) && std::isfinite(u1) && std::isfinite(v0) && std::isfinite(v1)))
      throw Error(ErrorKind::InvalidArgument, "grid bounds must be finite", "fields");
    if (!(u1 > u0) || !(v1 > v0))
      throw Error(ErrorKind::InvalidArgument, "grid requires u1 > u0 and v1 > v0", "fields");
    if (nu < kMinNodes || nv < kMinNodes)
      throw Error(ErrorKind::GridTooSmall,
                  "grid needs at least 5 nodes per axis, got " + std::to_string(nu) + "x" +
                      std::to_string(nv),
                  "fields");
  }

  /// The grid over the same domain with (n-1)*factor+1 nodes per axis.
  GridSpec refined(std::size_t factor) const {
    GridSpec g = *this;
    g.nu = (nu - 1) * factor + 1;
    g.nv = (nv - 1) * factor + 1;
    return g;
  }

  static GridSpec square(double lo, double hi, std::size_t n) { return {lo, hi, lo, hi, n, n}; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

using Fn2 = std::function<double(double, double)>;

/// Closed-form evaluator with optional analytic first and mixed partials.
struct AnalyticForm {
  Fn2 f, fu, fv, fuv;
  bool has_partials() const { return fu && fv && fuv; }
};

/// Samples of a scalar function on a GridSpec, optionally backed by an AnalyticForm.
class ScalarField {
 public:
  ScalarField() = default;

  ScalarField(const GridSpec& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.size())
      throw Error(ErrorKind::InvalidArgument, "sample count does not match grid", "fields");
    for (double x : values_)
      if (!std::isfinite(x))
        throw Error(ErrorKind::InvalidArgument, "field samples must be finite", "fields");
  }

  ScalarField(const GridSpec& grid, double constant)
      : ScalarField(grid, std::vector<double>(grid.size(), constant)) {}

  static ScalarField from_function(const GridSpec& grid, const Fn2& fn) {
    grid.validate();
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.nu; ++i)
      for (std::size_t j = 0; j < grid.nv; ++j) vals[grid.index(i, j)] = fn(grid.u(i), grid.v(j));
    return ScalarField(grid, std::move(vals));
  }

  static ScalarField from_analytic(const GridSpec& grid, AnalyticForm form) {
    ScalarField s = from_function(grid, form.f);
    s.analytic_ = std::make_shared<const AnalyticForm>(std::move(form));
    return s;
  }

  static ScalarField constant(const GridSpec& grid, double c) {
    return from_analytic(grid, {[c](double, double) { return c; }, zero_fn(), zero_fn(), zero_fn()});
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  double operator[](std::size_t k) const { return values_[k]; }

  const AnalyticForm* analytic() const { return analytic_.get(); }
  bool has_partials() const { return analytic_ && analytic_->has_partials(); }

  ScalarField with_analytic(AnalyticForm form) const {
    for (std::size_t i = 0; i < grid_.nu; ++i)
      for (std::size_t j = 0; j < grid_.nv; ++j) {
        const double x = (*this)(i, j);
        if (std::abs(form.f(grid_.u(i), grid_.v(j)) - x) > 1e-14 * std::max(1.0, std::abs(x)))
          throw Error(ErrorKind::InvalidArgument, "evaluator disagrees with samples", "fields");
      }
    ScalarField out = *this;
    out.analytic_ = std::make_shared<const AnalyticForm>(std::move(form));
    return out;
  }

  /// Copy with the analytic form removed; derivatives then come from finite differences.
  ScalarField sampled_only() const { return ScalarField(grid_, values_); }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
  }

  template <class F>
  ScalarField map(F&& fn) const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), fn);
    return ScalarField(grid_, std::move(out));
  }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return combine(a, b, 1.0, 1.0);
  }
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return combine(a, b, 1.0, -1.0);
  }
  friend ScalarField operator-(const ScalarField& a) { return a * -1.0; }

  friend ScalarField operator*(const ScalarField& a, double c) {
    ScalarField out = a.map([c](double x) { return c * x; });
    if (a.has_partials()) {
      const auto f = a.analytic_;
      out.analytic_ = std::make_shared<const AnalyticForm>(AnalyticForm{
          [f, c](double u, double v) { return c * f->f(u, v); },
          [f, c](double u, double v) { return c * f->fu(u, v); },
          [f, c](double u, double v) { return c * f->fv(u, v); },
          [f, c](double u, double v) { return c * f->fuv(u, v); }});
    }
    return out;
  }
  friend ScalarField operator*(double c, const ScalarField& a) { return a * c; }

  /// Pointwise product; analytic partials follow the product rule when both sides carry them.
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    check_same_grid(a, b);
    std::vector<double> out(a.values_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a.values_[k] * b.values_[k];
    ScalarField r(a.grid_, std::move(out));
    if (a.has_partials() && b.has_partials()) {
      const auto p = a.analytic_, q = b.analytic_;
      r.analytic_ = std::make_shared<const AnalyticForm>(AnalyticForm{
          [p, q](double u, double v) { return p->f(u, v) * q->f(u, v); },
          [p, q](double u, double v) { return p->fu(u, v) * q->f(u, v) + p->f(u, v) * q->fu(u, v); },
          [p, q](double u, double v) { return p->fv(u, v) * q->f(u, v) + p->f(u, v) * q->fv(u, v); },
          [p, q](double u, double v) {
            return p->fuv(u, v) * q->f(u, v) + p->fu(u, v) * q->fv(u, v) +
                   p->fv(u, v) * q->fu(u, v) + p->f(u, v) * q->fuv(u, v);
          }});
    }
    return r;
  }

  static void check_same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid_ == b.grid_))
      throw Error(ErrorKind::InvalidArgument, "fields live on different grids", "fields");
  }

 private:
  static Fn2 zero_fn() {
    return [](double, double) { return 0.0; };
  }

  static ScalarField combine(const ScalarField& a, const ScalarField& b, double ca, double cb) {
    check_same_grid(a, b);
    std::vector<double> out(a.values_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = ca * a.values_[k] + cb * b.values_[k];
    ScalarField r(a.grid_, std::move(out));
    if (a.has_partials() && b.has_partials()) {
      const auto p = a.analytic_, q = b.analytic_;
      auto lin = [ca, cb](Fn2 fp, Fn2 fq) -> Fn2 {
        return [ca, cb, fp, fq](double u, double v) { return ca * fp(u, v) + cb * fq(u, v); };
      };
      r.analytic_ = std::make_shared<const AnalyticForm>(
          AnalyticForm{lin(p->f, q->f), lin(p->fu, q->fu), lin(p->fv, q->fv), lin(p->fuv, q->fuv)});
    }
    return r;
  }

  GridSpec grid_{};
  std::vector<double> values_;
  std::shared_ptr<const AnalyticForm> analytic_;
};

/// Attach a closed form to existing samples. Samples must match the evaluator at every node.
inline ScalarField attach(const ScalarField& s, AnalyticForm form) { return s.with_analytic(std::move(form)); }

enum class DiffMode { Auto, FiniteDifference };

namespace detail {

// Order-2 first derivative along one line: central inside, 3-point one-sided at both ends.
inline void diff_line(const double* in, std::size_t stride, std::size_t n, double h, double* out) {
  const double inv2h = 1.0 / (2.0 * h);
  out[0] = (-3.0 * in[0] + 4.0 * in[stride] - in[2 * stride]) * inv2h;
  for (std::size_t k = 1; k + 1 < n; ++k)
    out[k * stride] = (in[(k + 1) * stride] - in[(k - 1) * stride]) * inv2h;
  const std::size_t l = n - 1;
  out[l * stride] = (3.0 * in[l * stride] - 4.0 * in[(l - 1) * stride] + in[(l - 2) * stride]) * inv2h;
}

// Order-2 second derivative: 3-point central inside, 4-point one-sided at both ends.
inline void diff2_line(const double* in, std::size_t stride, std::size_t n, double h, double* out) {
  const double inv = 1.0 / (h * h);
  auto f = [&](std::size_t k) { return in[k * stride]; };
  out[0] = (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) * inv;
  for (std::size_t k = 1; k + 1 < n; ++k) out[k * stride] = (f(k + 1) - 2.0 * f(k) + f(k - 1)) * inv;
  const std::size_t l = n - 1;
  out[l * stride] = (2.0 * f(l) - 5.0 * f(l - 1) + 4.0 * f(l - 2) - f(l - 3)) * inv;
}

inline ScalarField sample_fn(const GridSpec& g, const Fn2& fn) { return ScalarField::from_function(g, fn); }

}  // namespace detail

inline ScalarField d_du(const ScalarField& s, DiffMode mode = DiffMode::Auto) {
  if (mode == DiffMode::Auto && s.has_partials()) return detail::sample_fn(s.grid(), s.analytic()->fu);
  const GridSpec& g = s.grid();
  std::vector<double> out(g.size());
  for (std::size_t j = 0; j < g.nv; ++j)
    detail::diff_line(s.values().data() + j, g.nv, g.nu, g.hu(), out.data() + j);
  return ScalarField(g, std::move(out));
}

inline ScalarField d_dv(const ScalarField& s, DiffMode mode = DiffMode::Auto) {
  if (mode == DiffMode::Auto && s.has_partials()) return detail::sample_fn(s.grid(), s.analytic()->fv);
  const GridSpec& g = s.grid();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.nu; ++i)
    detail::diff_line(s.values().data() + i * g.nv, 1, g.nv, g.hv(), out.data() + i * g.nv);
  return ScalarField(g, std::move(out));
}

/// Mixed partial: d_du first, then d_dv.
inline ScalarField d_dudv(const ScalarField& s, DiffMode mode = DiffMode::Auto) {
  if (mode == DiffMode::Auto && s.has_partials()) return detail::sample_fn(s.grid(), s.analytic()->fuv);
  return d_dv(d_du(s, DiffMode::FiniteDifference), DiffMode::FiniteDifference);
}

/// Second partials by the compact stencil (finite differences only).
inline ScalarField d2_du2(const ScalarField& s) {
  const GridSpec& g = s.grid();
  std::vector<double> out(g.size());
  for (std::size_t j = 0; j < g.nv; ++j)
    detail::diff2_line(s.values().data() + j, g.nv, g.nu, g.hu(), out.data() + j);
  return ScalarField(g, std::move(out));
}

inline ScalarField d2_dv2(const ScalarField& s) {
  const GridSpec& g = s.grid();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.nu; ++i)
    detail::diff2_line(s.values().data() + i * g.nv, 1, g.nv, g.hv(), out.data() + i * g.nv);
  return ScalarField(g, std::move(out));
}

inline constexpr double kMuMin = 1e-8;

/**
 * Pointwise ln|s|. Rejects samples with |s| < mu_min; with require_constant_sign
 * also rejects fields that change sign. Analytic partials are carried over.
 */
inline ScalarField ln_abs(const ScalarField& s, double mu_min = kMuMin,
                          bool require_constant_sign = false) {
  for (double x : s.values())
    if (std::abs(x) < mu_min)
      throw Error(ErrorKind::NearZeroField,
                  "field magnitude " + std::to_string(std::abs(x)) + " below " + std::to_string(mu_min),
                  "fields");
  if (require_constant_sign && s.min() < 0.0 && s.max() > 0.0)
    throw Error(ErrorKind::NearZeroField, "field changes sign on the grid", "fields");
  ScalarField out = s.map([](double x) { return std::log(std::abs(x)); });
  if (s.has_partials()) {
    const AnalyticForm a = *s.analytic();
    out = attach(std::move(out),
                 {[a](double u, double v) { return std::log(std::abs(a.f(u, v))); },
                  [a](double u, double v) { return a.fu(u, v) / a.f(u, v); },
                  [a](double u, double v) { return a.fv(u, v) / a.f(u, v); },
                  [a](double u, double v) {
                    const double f = a.f(u, v);
                    return a.fuv(u, v) / f - a.fu(u, v) * a.fv(u, v) / (f * f);
                  }});
  }
  return out;
}

namespace detail {

// Four-point Lagrange weights for nodes k0..k0+3 of a uniform axis.
inline std::size_t cubic_stencil(double x, double x0, double h, std::size_t n, std::array<double, 4>& w) {
  const double t = (x - x0) / h;
  long k = static_cast<long>(std::floor(t)) - 1;
  k = std::clamp<long>(k, 0, static_cast<long>(n) - 4);
  const double s = t - static_cast<double>(k);
  w[0] = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
  w[1] = s * (s - 2.0) * (s - 3.0) / 2.0;
  w[2] = -s * (s - 1.0) * (s - 3.0) / 2.0;
  w[3] = s * (s - 1.0) * (s - 2.0) / 6.0;
  return static_cast<std::size_t>(k);
}

inline void check_inside(double x, double lo, double hi, const char* axis) {
  const double slack = 1e-12 * (hi - lo);
  if (x < lo - slack || x > hi + slack)
    throw Error(ErrorKind::OutOfDomain,
                std::string(axis) + "=" + std::to_string(x) + " outside [" + std::to_string(lo) +
                    ", " + std::to_string(hi) + "]",
                "fields");
}

}  // namespace detail

/// Tensor-product cubic Lagrange interpolation; exact on bicubic polynomials.
inline double sample_at(const ScalarField& s, double u, double v) {
  const GridSpec& g = s.grid();
  detail::check_inside(u, g.u0, g.u1, "u");
  detail::check_inside(v, g.v0, g.v1, "v");
  std::array<double, 4> wu{}, wv{};
  const std::size_t iu = detail::cubic_stencil(u, g.u0, g.hu(), g.nu, wu);
  const std::size_t jv = detail::cubic_stencil(v, g.v0, g.hv(), g.nv, wv);
  double acc = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < 4; ++b) row += wv[b] * s(iu + a, jv + b);
    acc += wu[a] * row;
  }
  return acc;
}

/**
 * Interpolates s at the node set u_nodes x v_nodes (inside the source domain) and
 * labels the result with out_grid, which must have matching node counts.
 */
inline ScalarField resample(const ScalarField& s, std::span<const double> u_nodes,
                            std::span<const double> v_nodes, const GridSpec& out_grid) {
  out_grid.validate();
  if (u_nodes.size() != out_grid.nu || v_nodes.size() != out_grid.nv)
    throw Error(ErrorKind::InvalidArgument, "node arrays do not match target grid", "fields");
  std::vector<double> out(out_grid.size());
  for (std::size_t i = 0; i < out_grid.nu; ++i)
    for (std::size_t j = 0; j < out_grid.nv; ++j)
      out[out_grid.index(i, j)] = sample_at(s, u_nodes[i], v_nodes[j]);
  return ScalarField(out_grid, std::move(out));
}

inline ScalarField resample(const ScalarField& s, const GridSpec& out_grid) {
  std::vector<double> us(out_grid.nu), vs(out_grid.nv);
  for (std::size_t i = 0; i < out_grid.nu; ++i) us[i] = out_grid.u(i);
  for (std::size_t j = 0; j < out_grid.nv; ++j) vs[j] = out_grid.v(j);
  return resample(s, us, vs, out_grid);
}

/// Convergence claims exclude this many boundary layers.
inline constexpr std::size_t kInteriorLayers = 2;

inline double interior_max_abs(const ScalarField& s, std::size_t layers = kInteriorLayers) {
  const GridSpec& g = s.grid();
  double m = 0.0;
  for (std::size_t i = layers; i + layers < g.nu; ++i)
    for (std::size_t j = layers; j + layers < g.nv; ++j) m = std::max(m, std::abs(s(i, j)));
  return m;
}

inline double interior_min(const ScalarField& s, std::size_t layers = kInteriorLayers) {
  const GridSpec& g = s.grid();
  double m = INFINITY;
  for (std::size_t i = layers; i + layers < g.nu; ++i)
    for (std::size_t j = layers; j + layers < g.nv; ++j) m = std::min(m, s(i, j));
  return m;
}

inline double interior_max(const ScalarField& s, std::size_t layers = kInteriorLayers) {
  return -interior_min(-s, layers);
}

// ---------------------------------------------------------------------------
// One-dimensional helpers on uniform samples.

/// Order-2 derivative of uniformly spaced samples (same stencils as the 2-D operators).
inline std::vector<double> derivative_1d(std::span<const double> f, double h) {
  if (f.size() < 3) throw Error(ErrorKind::GridTooSmall, "need at least 3 samples", "fields");
  std::vector<double> out(f.size());
  detail::diff_line(f.data(), 1, f.size(), h, out.data());
  return out;
}

/**
 * Cumulative integral of uniformly spaced samples, starting from 0 at the first node.
 * Composite Simpson on even node counts; the last odd interval uses the 3-point
 * end formula, so every node is order 4.
 */
inline std::vector<double> cumulative_simpson(std::span<const double> f, double h) {
  std::vector<double> out(f.size(), 0.0);
  if (f.size() < 2) return out;
  if (f.size() == 2) {
    out[1] = 0.5 * h * (f[0] + f[1]);
    return out;
  }
  out[1] = h * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0;
  for (std::size_t k = 2; k < f.size(); ++k) {
    if (k % 2 == 0)
      out[k] = out[k - 2] + h * (f[k - 2] + 4.0 * f[k - 1] + f[k]) / 3.0;
    else
      out[k] = out[k - 1] + h * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]) / 12.0;
  }
  return out;
}

}  // namespace pnmc
