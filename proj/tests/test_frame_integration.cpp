#include "support.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <gtest/gtest.h>

using namespace pnmc;
using testing_support::min_order;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

CanonicalTriple constant_triple(double lambda, double mu, double nu, SurfaceCase kind, std::size_t n = 17) {
  const GridSpec g = GridSpec::square(0.0, 1.0, n);
  return {ScalarField::constant(g, lambda), ScalarField::constant(g, mu), ScalarField::constant(g, nu), kind};
}

Mat4 rows(std::initializer_list<std::initializer_list<double>> r) {
  Mat4 m;
  int i = 0;
  for (const auto& row : r) {
    int j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

double max_diff(const Mat4& a, const Mat4& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Smooth triple with closed-form sqrt|mu| for term-by-term checks.
struct SmoothTriple {
  static double lam(double u, double v) { return 0.3 * std::sin(u + 2 * v); }
  static double nu(double u, double v) { return 1.0 + 0.2 * u * v; }
  static double mu(double u, double v) { return -std::exp(0.4 * u - 0.3 * v * v); }
  static double root(double u, double v) { return std::exp(0.2 * u - 0.15 * v * v); }
  static double root_u(double u, double v) { return 0.2 * root(u, v); }
  static double root_v(double u, double v) { return -0.3 * v * root(u, v); }
  static CanonicalTriple triple(SurfaceCase kind) {
    const GridSpec g = GridSpec::square(0.0, 1.0, 33);
    return {ScalarField::from_function(g, lam), ScalarField::from_function(g, mu), ScalarField::from_function(g, nu),
            kind};
  }
};

}  // namespace

TEST(CoefficientMatrices, ConstantNegativeCase) {
  const CoefficientMatrices m = coefficient_matrices(constant_triple(0, 1, 2, SurfaceCase::NegativeKH));
  const Mat4 A = rows({{0, 0, 0, 1}, {0, 0, -2, 0}, {-2, 0, 0, 0}, {0, 1, 0, 0}});
  const Mat4 B = rows({{0, 0, -2, 0}, {0, 0, 0, 1}, {0, -2, 0, 0}, {1, 0, 0, 0}});
  for (std::size_t k = 0; k < m.a.size(); k += 37) {
    EXPECT_EQ(max_diff(m.a[k], A), 0.0);
    EXPECT_EQ(max_diff(m.b[k], B), 0.0);
  }
}

TEST(CoefficientMatrices, ConstantPositiveCase) {
  const CoefficientMatrices m = coefficient_matrices(constant_triple(0, 1, 2, SurfaceCase::PositiveKH));
  const Mat4 B = rows({{0, 0, -2, 0}, {0, 0, 0, -1}, {0, -2, 0, 0}, {-1, 0, 0, 0}});
  EXPECT_EQ(max_diff(m.B(3, 4), B), 0.0);
}

TEST(CoefficientMatrices, TermByTermAssembly) {
  for (SurfaceCase kind : {SurfaceCase::PositiveKH, SurfaceCase::NegativeKH, SurfaceCase::Degenerate}) {
    const CanonicalTriple t = SmoothTriple::triple(kind);
    const CoefficientMatrices m = coefficient_matrices(t);
    const double eps = epsilon_of(kind);
    const GridSpec& g = t.grid();
    double worst = 0.0, common = 0.0;
    for (std::size_t i = 2; i + 2 < g.nu; i += 3)
      for (std::size_t j = 2; j + 2 < g.nv; j += 3) {
        const double u = g.u(i), v = g.v(j);
        const double s = SmoothTriple::root(u, v), g1 = -SmoothTriple::root_u(u, v), g2 = -SmoothTriple::root_v(u, v);
        const double l = SmoothTriple::lam(u, v), mu = SmoothTriple::mu(u, v), n = SmoothTriple::nu(u, v);
        const Mat4 A = rows({{g1, 0, l, mu}, {0, -g1, -n, 0}, {-n, l, 0, 0}, {0, mu, 0, 0}}) / s;
        const Mat4 B = kind == SurfaceCase::Degenerate
                           ? Mat4(rows({{-g2, 0, -n, 0}, {0, g2, 0, 0}, {0, -n, 0, 0}, {0, 0, 0, 0}}) / s)
                           : Mat4(rows({{-g2, 0, -n, 0},
                                        {0, g2, -eps * l, -eps * mu},
                                        {-eps * l, -n, 0, 0},
                                        {-eps * mu, 0, 0, 0}}) /
                                  s);
        worst = std::max({worst, max_diff(m.A(i, j), A), max_diff(m.B(i, j), B)});
        // sqrt|mu| A has only entries from the triple and gamma1.
        const Mat4 scaled = s * m.A(i, j);
        common = std::max(common, std::abs(std::abs(scaled(0, 2)) - std::abs(l)) +
                                      std::abs(std::abs(scaled(3, 1)) - std::abs(mu)));
      }
    // gamma from finite differences of ln|mu|.
    EXPECT_LE(worst, 2e-3) << case_name(kind);
    EXPECT_LE(common, 1e-12);
  }
}

TEST(CoefficientMatrices, ApplyToRandomFrame) {
  // A F reproduces x_u = (gamma1 x + lambda n1 + mu n2)/sqrt|mu| and the other three rows.
  const CanonicalTriple t = fixtures::jet(SurfaceCase::PositiveKH, 6, 0.1, 17);
  const CoefficientMatrices m = coefficient_matrices(t);
  std::mt19937_64 rng(9);
  Mat4 F;
  for (int i = 0; i < 4; ++i) F.row(i) = testing_support::random_vec(rng).transpose();
  const std::size_t i = 5, j = 11;
  const double mu = t.mu(i, j), s = std::sqrt(std::abs(mu)), l = t.lambda(i, j), n = t.nu(i, j);
  const double g1 = -0.5 * s * d_du(t.log_abs_mu())(i, j);
  const Eigen::RowVector4d x = F.row(0), y = F.row(1), n1 = F.row(2), n2 = F.row(3);
  Mat4 rhs;
  rhs.row(0) = (g1 * x + l * n1 + mu * n2) / s;
  rhs.row(1) = (-g1 * y - n * n1) / s;
  rhs.row(2) = (-n * x + l * y) / s;
  rhs.row(3) = (mu * y) / s;
  EXPECT_LE(max_diff(m.A(i, j) * F, rhs), 1e-13);
}

TEST(Compatibility, ConstantSolutionIsCompatible) {
  EXPECT_LE(compatibility_residual(fixtures::constant(33)).max_abs(), 1e-12);
}

TEST(Compatibility, CommutatorOfConstantNonSolution) {
  const ScalarField c = compatibility_residual(constant_triple(0, 1, 2, SurfaceCase::NegativeKH));
  EXPECT_NEAR(c.min(), 3.0, 1e-14);
  EXPECT_NEAR(c.max(), 3.0, 1e-14);
}

TEST(Compatibility, JetShrinksWithRadius) {
  const double c1 = compatibility_residual(fixtures::jet(SurfaceCase::PositiveKH, 6, 0.1, 33)).max_abs();
  const double c2 = compatibility_residual(fixtures::jet(SurfaceCase::PositiveKH, 6, 0.05, 33)).max_abs();
  EXPECT_LE(c1, 1e-3);
  EXPECT_GE(std::log2(c1 / c2), 4.0);
}

TEST(Compatibility, VanishesWithResidual) {
  // Compatibility and the natural system measure the same defect.
  for (std::size_t n : {33, 65}) {
    const CanonicalTriple t = fixtures::goursat_hyperbolic(n);
    const double c = interior_max_abs(compatibility_residual(t));
    const double r = residual(t).interior_max_abs;
    EXPECT_LE(c, 2 * r);
  }
}

TEST(IntegrateFrame, ConstantMatchesMatrixExponential) {
  const CanonicalTriple t = fixtures::constant(65);
  const FrameState F0 = standard_frame();
  const FrameIntegration fi = integrate_frame(t, F0);
  const CoefficientMatrices m = coefficient_matrices(t);
  const Mat4 A = m.a[0], B = m.b[0];
  ASSERT_LE(max_diff(A * B, B * A), 1e-15);
  const GridSpec& g = t.grid();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nu; i += 4)
    for (std::size_t j = 0; j < g.nv; j += 4) {
      const Mat4 E = Mat4(A * g.u(i) + B * g.v(j)).exp();
      worst = std::max(worst, max_diff(fi.field(i, j).rows(), E * F0.rows()));
    }
  // RK4 at h = 1/64 leaves 2.6e-9 here; the 129 grid reaches 1.6e-10.
  EXPECT_LE(worst, 3e-9);
  EXPECT_LE(fi.gram_drift, 1e-10);
}

TEST(IntegrateFrame, ConstantConvergesAtFourthOrder) {
  std::vector<double> err;
  for (std::size_t n : {33, 65, 129}) {
    const CanonicalTriple t = fixtures::constant(n);
    const FrameIntegration fi = integrate_frame(t, standard_frame());
    const CoefficientMatrices m = coefficient_matrices(t);
    const GridSpec& g = t.grid();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.nu; i += (n - 1) / 8)
      for (std::size_t j = 0; j < g.nv; j += (n - 1) / 8)
        worst = std::max(worst, max_diff(fi.field(i, j).rows(),
                                         Mat4(m.a[0] * g.u(i) + m.b[0] * g.v(j)).exp() * standard_frame().rows()));
    err.push_back(worst);
  }
  EXPECT_GE(min_order(err), 3.8);
  EXPECT_LE(err[2], 1e-9);
}

TEST(IntegrateFrame, RejectsBadInitialFrame) {
  const FrameState s = standard_frame();
  const FrameState bad(s.x(), s.y(), 1.01 * s.n1(), s.n2());
  EXPECT_EQ(kind_of([&] { integrate_frame(fixtures::constant(17), bad); }), ErrorKind::InvalidArgument);
}

TEST(IntegrateFrame, AcceptsBoostedFrame) {
  const FrameState F0(Mat4(standard_frame().rows() * testing_support::boost14(0.7).transpose()));
  ASSERT_LE(gram_residual(F0), 1e-12);
  const FrameIntegration fi = integrate_frame(fixtures::constant(33), F0);
  // Boosted rows are larger by cosh, so is the drift.
  EXPECT_LE(fi.gram_drift, 1e-8);
}

TEST(IntegrateFrame, StepUnstable) {
  EXPECT_EQ(kind_of([] { integrate_frame(constant_triple(0, 1, 1e4, SurfaceCase::PositiveKH), standard_frame()); }),
            ErrorKind::StepUnstable);
}

TEST(IntegrateFrame, LinearInInitialFrame) {
  const CanonicalTriple t = fixtures::jet(SurfaceCase::NegativeKH, 6, 0.1, 33);
  const auto tab = pnmc::detail::tabulate(t);
  std::mt19937_64 rng(1);
  Mat4 F1, F2;
  for (int i = 0; i < 4; ++i) {
    F1.row(i) = testing_support::random_vec(rng).transpose();
    F2.row(i) = testing_support::random_vec(rng).transpose();
  }
  const double a = 0.7, b = -1.3;
  const auto r1 = pnmc::detail::march_frames(tab, t.grid(), F1, true);
  const auto r2 = pnmc::detail::march_frames(tab, t.grid(), F2, true);
  const auto rc = pnmc::detail::march_frames(tab, t.grid(), Mat4(a * F1 + b * F2), true);
  double worst = 0.0;
  for (std::size_t k = 0; k < rc.size(); ++k) worst = std::max(worst, max_diff(rc[k], a * r1[k] + b * r2[k]));
  EXPECT_LE(worst, 1e-10);
}

TEST(IntegrateFrame, PathDiscrepancyDetectsPerturbation) {
  const FrameIntegration clean = integrate_frame(fixtures::constant(65), standard_frame());
  const FrameIntegration bumped = integrate_frame(fixtures::perturbed(65), standard_frame());
  EXPECT_GE(bumped.path_discrepancy, 10 * clean.path_discrepancy);
  // Stays bounded away from zero under refinement.
  const FrameIntegration fine = integrate_frame(fixtures::perturbed(129), standard_frame());
  EXPECT_GE(fine.path_discrepancy, 0.5 * bumped.path_discrepancy);
  EXPECT_GE(fine.path_discrepancy, 1e-5);
}

TEST(IntegrateFrame, PathIndependenceAndGramUnderRefinement) {
  std::vector<double> path_h, path_d, gram_h;
  for (std::size_t n : {33, 65, 129}) {
    const FrameIntegration h = integrate_frame(fixtures::goursat_hyperbolic(n), standard_frame());
    const FrameIntegration d = integrate_frame(fixtures::goursat_degenerate(n), standard_frame());
    path_h.push_back(h.path_discrepancy);
    path_d.push_back(d.path_discrepancy);
    gram_h.push_back(h.gram_drift);
  }
  EXPECT_GE(min_order(path_h), 2.0 - 0.1);
  EXPECT_GE(min_order(path_d), 2.0 - 0.1);
  EXPECT_GT(gram_h[0], gram_h[1]);
  EXPECT_GT(gram_h[1], gram_h[2]);
}

TEST(IntegratePosition, StartsAtP0AndHasUnitMetric) {
  const CanonicalTriple t = fixtures::constant(65);
  const FrameIntegration fi = integrate_frame(t, standard_frame());
  const MinkVec p0(0.5, -1, 2, 3);
  const PositionIntegration pi = integrate_position(fi.field, t.mu, p0);
  EXPECT_EQ(pi.immersion(0, 0), p0);
  const VectorField z = components(pi.immersion);
  const ScalarField F = inner(d_du(z), d_dv(z));
  EXPECT_LE((F + ScalarField(t.grid(), 1.0)).max_abs(), 1e-6);
}

TEST(IntegratePosition, DegenerateFixtureIsIsotropic) {
  std::vector<double> err;
  for (std::size_t n : {65, 129}) {
    const ReconstructionBundle b = reconstruct(fixtures::goursat_degenerate(n), MinkVec::Zero(), standard_frame());
    const VectorField z = components(b.immersion);
    const VectorField zu = d_du(z), zv = d_dv(z);
    // Relative to the metric scale, since |mu| is far from 1 on this fixture.
    const double scale = inner(zu, zv).max_abs();
    err.push_back(std::max(interior_max_abs(inner(zu, zu)), interior_max_abs(inner(zv, zv))) / scale);
  }
  EXPECT_LE(err[0], 2e-3);
  EXPECT_GE(min_order(err), 1.8);
}

TEST(Reconstruct, ConstantBundle) {
  const MinkVec p0(1, 2, 3, 4);
  const ReconstructionBundle b = reconstruct(fixtures::constant(65), p0, standard_frame());
  EXPECT_EQ(b.immersion(0, 0), p0);
  EXPECT_LE(b.diagnostics.gram_drift, 1e-10);
  EXPECT_LE(b.diagnostics.compat_max, 1e-12);
  EXPECT_GE(b.diagnostics.gram_drift, 0.0);
}

TEST(Reconstruct, RefusesNonSolution) {
  try {
    reconstruct(fixtures::nonsolution(33), MinkVec::Zero(), standard_frame());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResidualTooLarge);
    EXPECT_GT(e.value, 1.0);
    EXPECT_EQ(e.module(), "frame_integration");
  }
  ReconstructOptions force;
  force.force = true;
  EXPECT_NO_THROW(reconstruct(fixtures::nonsolution(33), MinkVec::Zero(), standard_frame(), force));
}

TEST(Reconstruct, JetPathDiscrepancy) {
  const ReconstructionBundle b = reconstruct(fixtures::jet(), MinkVec::Zero(), standard_frame());
  EXPECT_LE(b.diagnostics.path_discrepancy, 1e-6);
}

TEST(Reconstruct, MetricLaw) {
  const CanonicalTriple t = fixtures::jet(SurfaceCase::NegativeKH);
  const ReconstructionBundle b = reconstruct(t, MinkVec::Zero(), standard_frame());
  const VectorField z = components(b.immersion);
  const VectorField zu = d_du(z), zv = d_dv(z);
  const ScalarField target = t.mu.map([](double m) { return -1.0 / std::abs(m); });
  EXPECT_LE(interior_max_abs(inner(zu, zv) - target), 1e-5);
  EXPECT_LE(interior_max_abs(inner(zu, zu)), 1e-5);
  EXPECT_LE(interior_max_abs(inner(zv, zv)), 1e-5);
}
