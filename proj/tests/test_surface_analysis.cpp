#include "support.hpp"

#include <gtest/gtest.h>

using namespace pnmc;
using testing_support::min_order;

namespace {

const double kR2 = std::sqrt(0.5);

Immersion null_plane(std::size_t n = 33) {
  return Immersion::from_function(GridSpec::square(0.0, 1.0, n),
                                  [](double u, double v) { return MinkVec(kR2 * (u - v), 0, 0, kR2 * (u + v)); });
}

Analysis analyze_triple(const CanonicalTriple& t) {
  return analyze(reconstruct(t, MinkVec::Zero(), standard_frame()).immersion);
}

double interior_diff(const ScalarField& a, const ScalarField& b) { return interior_max_abs(a - b); }

}  // namespace

TEST(FundamentalForm, NullPlane) {
  const FundamentalForm ff = first_fundamental_form(null_plane());
  EXPECT_LE(ff.E.max_abs(), 1e-13);
  EXPECT_LE(ff.G.max_abs(), 1e-13);
  EXPECT_LE((ff.F + ScalarField(ff.F.grid(), 1.0)).max_abs(), 1e-13);
  EXPECT_TRUE(ff.is_isotropic);
  EXPECT_TRUE(ff.is_timelike);
}

TEST(FundamentalForm, GraphIsNotIsotropic) {
  const Immersion m = Immersion::from_function(GridSpec::square(0.0, 1.0, 17),
                                               [](double u, double v) { return MinkVec(u, v, 0, 2 * u); });
  const FundamentalForm ff = first_fundamental_form(m);
  EXPECT_NEAR(ff.E(4, 4), -3.0, 1e-12);
  EXPECT_NEAR(ff.G(4, 4), 1.0, 1e-12);
  EXPECT_TRUE(ff.is_timelike);
  EXPECT_FALSE(ff.is_isotropic);
  try {
    analyze(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotIsotropic);
  }
}

TEST(FundamentalForm, SpacelikeSurfaceFlagged) {
  const Immersion m = Immersion::from_function(GridSpec::square(0.0, 1.0, 17),
                                               [](double u, double v) { return MinkVec(u, v, u * v, 0); });
  EXPECT_FALSE(first_fundamental_form(m).is_timelike);
}

TEST(Analysis, NullPlaneHasNoMeanCurvature) {
  try {
    analyze(null_plane());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MinimalOrTotallyGeodesic);
  }
}

TEST(Analysis, Cylinder) {
  const Immersion m = fixtures::cylinder(65);
  const Analysis a = analyze(m);
  const FrameFunctions& fn = a.functions;
  const GridSpec& g = m.grid;
  EXPECT_LE(interior_max_abs(a.frame.form.E), 1e-4);
  EXPECT_LE(interior_diff(a.frame.form.F, ScalarField(g, -1.0)), 1e-4);
  EXPECT_LE(interior_diff(fn.nu, ScalarField(g, 0.5)), 1e-4);
  double nerr = 0.0;
  for (std::size_t i = 2; i + 2 < g.nu; ++i)
    for (std::size_t j = 2; j + 2 < g.nv; ++j) {
      const double th = kR2 * (g.u(i) - g.v(j));
      nerr = std::max(nerr, (a.frame.n1(i, j) - MinkVec(-std::cos(th), -std::sin(th), 0, 0)).cwiseAbs().maxCoeff());
    }
  EXPECT_LE(nerr, 1e-4);
  EXPECT_LE(a.invariants.beta_max, 1e-6);
  EXPECT_LE(interior_max_abs(a.invariants.K_metric), 1e-8);
  EXPECT_LE(interior_max_abs(a.invariants.Delta1), 1e-3);
  EXPECT_LE(interior_max_abs(a.invariants.Delta2), 1e-3);
  EXPECT_LE(interior_max_abs(a.invariants.Delta3), 1e-3);
  EXPECT_EQ(a.invariants.overall, NodeClass::ParallelH);
}

TEST(Analysis, ReconstructedConstantTriple) {
  const Analysis a = analyze_triple(fixtures::constant(65));
  const FrameFunctions& fn = a.functions;
  const GridSpec& g = fn.nu.grid();
  EXPECT_LE(interior_diff(fn.nu, ScalarField(g, 1.0)), 1e-4);
  EXPECT_LE(interior_max_abs(fn.lambda1), 5e-4);
  EXPECT_LE(interior_max_abs(fn.lambda2), 5e-4);
  EXPECT_LE(interior_diff(fn.mu1, ScalarField(g, 1.0)), 1e-4);
  EXPECT_LE(interior_diff(fn.mu2, ScalarField(g, 1.0)), 1e-4);
  EXPECT_LE(interior_max_abs(a.invariants.K_metric), 1e-4);
  EXPECT_LE(interior_diff(a.invariants.KmH2_formula, ScalarField(g, -1.0)), 1e-4);
  EXPECT_LE(interior_diff(a.invariants.KmH2_direct, ScalarField(g, -1.0)), 1e-3);
  EXPECT_EQ(a.invariants.overall, NodeClass::ParallelH);
}

TEST(Analysis, JetRecovery) {
  for (SurfaceCase kind : {SurfaceCase::PositiveKH, SurfaceCase::NegativeKH}) {
    const CanonicalTriple t = fixtures::jet(kind);
    const Analysis a = analyze_triple(t);
    const FrameFunctions& fn = a.functions;
    EXPECT_LE(interior_diff(fn.lambda1, t.lambda), 5e-4) << case_name(kind);
    EXPECT_LE(interior_diff(fn.mu1, t.mu), 5e-4) << case_name(kind);
    EXPECT_LE(interior_diff(fn.nu, t.nu), 5e-4) << case_name(kind);
    const double eps = epsilon_of(kind);
    EXPECT_LE(interior_diff(fn.lambda2, -eps * t.lambda), 5e-4) << case_name(kind);
    EXPECT_LE(interior_diff(fn.mu2, -eps * t.mu), 5e-4) << case_name(kind);
    EXPECT_EQ(a.invariants.overall, NodeClass::PNMC) << case_name(kind);
  }
}

TEST(Analysis, DegenerateCurvatureIsNuSquared) {
  const CanonicalTriple t = fixtures::goursat_degenerate(65);
  const Analysis a = analyze_triple(t);
  const ScalarField nu2 = t.nu * t.nu;
  EXPECT_LE(interior_diff(a.invariants.K_metric, nu2) / interior_max_abs(nu2), 1e-3);
  EXPECT_LE(interior_max_abs(a.functions.mu2) / interior_max_abs(a.functions.mu1), 1e-3);
  EXPECT_EQ(a.invariants.overall, NodeClass::PNMC);
}

TEST(Analysis, TwoCurvaturesAgreeOnSolutions) {
  for (const CanonicalTriple& t : {fixtures::jet(SurfaceCase::PositiveKH), fixtures::jet(SurfaceCase::NegativeKH),
                                   fixtures::goursat_hyperbolic(65)}) {
    const InvariantReport r = analyze_triple(t).invariants;
    EXPECT_LE(interior_diff(r.K_metric, r.K_frame), 1e-3);
    EXPECT_LE(interior_diff(r.KmH2_direct, r.KmH2_formula), 1e-3);
  }
}

TEST(Analysis, SignOfKMinusH2FollowsCase) {
  for (SurfaceCase kind : {SurfaceCase::PositiveKH, SurfaceCase::NegativeKH, SurfaceCase::Degenerate}) {
    const Analysis a = analyze_triple(fixtures::jet(kind));
    const FrameFunctions& fn = a.functions;
    const GridSpec& g = fn.nu.grid();
    for (std::size_t i = 2; i + 2 < g.nu; i += 5)
      for (std::size_t j = 2; j + 2 < g.nv; j += 5) {
        const double s = a.invariants.KmH2_formula(i, j);
        if (kind == SurfaceCase::PositiveKH) {
          EXPECT_GT(s, 0.0);
        }
        if (kind == SurfaceCase::NegativeKH) {
          EXPECT_LT(s, 0.0);
        }
        if (kind == SurfaceCase::Degenerate) {
          EXPECT_LE(std::abs(s), 1e-3);
        }
        // Same sign as -mu1 mu2 when both are nonzero.
        if (kind != SurfaceCase::Degenerate) {
          EXPECT_GT(-fn.mu1(i, j) * fn.mu2(i, j) * s, 0.0);
        }
      }
  }
}

TEST(Analysis, CrossTermVanishes) {
  // mu1 lambda2 - lambda1 mu2 = 0 whenever beta = 0.
  for (SurfaceCase kind : {SurfaceCase::PositiveKH, SurfaceCase::NegativeKH, SurfaceCase::Degenerate}) {
    const FrameFunctions fn = analyze_triple(fixtures::jet(kind)).functions;
    EXPECT_LE(interior_max_abs(fn.mu1 * fn.lambda2 - fn.lambda1 * fn.mu2), 1e-3) << case_name(kind);
  }
}

TEST(Analysis, ForcedNonSolutionLosesIsotropy) {
  ReconstructOptions force;
  force.force = true;
  const Immersion m = reconstruct(fixtures::perturbed(65), MinkVec::Zero(), standard_frame(), force).immersion;
  EXPECT_FALSE(first_fundamental_form(m).is_isotropic);
  try {
    analyze(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotIsotropic);
  }
}

TEST(Analysis, ConstantVersusVaryingNu) {
  EXPECT_EQ(analyze_triple(fixtures::constant(65)).invariants.overall, NodeClass::ParallelH);
  EXPECT_EQ(analyze_triple(fixtures::goursat_hyperbolic(65)).invariants.overall, NodeClass::PNMC);
}

TEST(Analysis, KDifferenceConverges) {
  std::vector<double> err;
  for (std::size_t n : {33, 65, 129}) {
    const InvariantReport r = analyze_triple(fixtures::jet(SurfaceCase::NegativeKH, 10, 0.1, n)).invariants;
    err.push_back(interior_diff(r.K_metric, r.K_frame));
  }
  EXPECT_GE(min_order(err), 1.8);
}

TEST(Analysis, InvariantUnderBoost) {
  const Immersion m = reconstruct(fixtures::jet(), MinkVec::Zero(), standard_frame()).immersion;
  const Mat4 L = testing_support::boost14(0.4);
  Immersion b = m;
  for (auto& p : b.points) p = L * p + MinkVec(1, -2, 0.5, 3);
  const InvariantReport r0 = analyze(m).invariants, r1 = analyze(b).invariants;
  EXPECT_LE(interior_diff(r0.K_metric, r1.K_metric), 1e-8);
  EXPECT_LE(interior_diff(r0.H2, r1.H2), 1e-8);
}

TEST(Christoffel, ConstantMetricVanishes) {
  const Christoffel c = christoffel_isotropic(null_plane());
  EXPECT_LE(c.G1_11.max_abs(), 1e-12);
  EXPECT_LE(c.G2_22.max_abs(), 1e-12);
  EXPECT_LE(c.tangential_discrepancy, 1e-12);
}

TEST(Christoffel, ExponentialConformalFactor) {
  // z = phi(u) l1 + v l2 with phi' = e^{-2u}: f = e^{-u}.
  const MinkVec l1(kR2, 0, 0, kR2), l2(-kR2, 0, 0, kR2);
  const Immersion m = Immersion::from_function(GridSpec::square(0.0, 1.0, 129), [&](double u, double v) {
    return MinkVec((-0.5 * std::exp(-2 * u)) * l1 + v * l2);
  });
  const Christoffel c = christoffel_isotropic(m);
  EXPECT_LE(interior_max_abs(c.G1_11 + ScalarField(m.grid, 2.0)), 1e-3);
  EXPECT_LE(interior_max_abs(c.G2_22), 1e-10);
  EXPECT_LE(c.tangential_discrepancy, 1e-3);
}
