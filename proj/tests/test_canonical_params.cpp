#include "support.hpp"

#include <gtest/gtest.h>

using namespace pnmc;

namespace {

Immersion build(const CanonicalTriple& t) { return reconstruct(t, MinkVec::Zero(), standard_frame()).immersion; }

double node_diff(const ScalarField& a, const ScalarField& b) {
  // Same node counts, possibly different labels.
  double m = 0.0;
  const GridSpec& g = a.grid();
  for (std::size_t i = kInteriorLayers; i + kInteriorLayers < g.nu; ++i)
    for (std::size_t j = kInteriorLayers; j + kInteriorLayers < g.nv; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

double triple_diff(const CanonicalTriple& a, const CanonicalTriple& b) {
  return std::max({node_diff(a.lambda, b.lambda), node_diff(a.mu, b.mu), node_diff(a.nu, b.nu)});
}

}  // namespace

TEST(Separability, Examples) {
  const GridSpec g = GridSpec::square(0.0, 1.0, 33);
  const ScalarField one(g, 1.0);
  EXPECT_TRUE(check_separability(one, one, one).ok());
  const ScalarField eu = ScalarField::from_function(g, [](double u, double) { return std::exp(u); });
  const ScalarField ev = ScalarField::from_function(g, [](double, double v) { return -std::exp(v); });
  EXPECT_TRUE(check_separability(one, eu, ev).ok());
  const ScalarField euv = ScalarField::from_function(g, [](double u, double v) { return std::exp(u * v); });
  const Separability s = check_separability(one, euv, ev);
  EXPECT_FALSE(s.ok());
  EXPECT_GT(s.dev_v, 0.5);
  EXPECT_TRUE(check_separability(one, eu, nullptr).ok());
}

TEST(Separability, ConformalFactorCancels) {
  // f^2 |mu1| = a(u) even though neither factor is.
  const GridSpec g = GridSpec::square(0.0, 1.0, 33);
  const ScalarField f = ScalarField::from_function(g, [](double u, double v) { return std::exp(u * v); });
  const ScalarField mu1 = ScalarField::from_function(g, [](double u, double v) { return std::exp(u - 2 * u * v); });
  EXPECT_TRUE(check_separability(f, mu1, nullptr).ok());
}

TEST(Canonicalize, IdentityOnCanonicalInput) {
  for (SurfaceCase kind : {SurfaceCase::PositiveKH, SurfaceCase::NegativeKH, SurfaceCase::Degenerate}) {
    const CanonicalTriple t = fixtures::jet(kind);
    const CanonicalResult r = canonicalize(build(t));
    EXPECT_EQ(r.case_before, kind) << case_name(kind);
    EXPECT_EQ(r.case_after, kind) << case_name(kind);
    EXPECT_FALSE(r.reparam.swapped);
    const GridSpec& g = t.grid();
    double shift = 0.0;
    for (std::size_t i = 0; i < g.nu; ++i) shift = std::max(shift, std::abs(r.reparam.ubar[i] - (g.u(i) - g.u0)));
    for (std::size_t j = 0; j < g.nv; ++j) shift = std::max(shift, std::abs(r.reparam.vbar[j] - (g.v(j) - g.v0)));
    EXPECT_LE(shift, 5e-4) << case_name(kind);
    EXPECT_LE(triple_diff(r.triple, t), 5e-4) << case_name(kind);
    EXPECT_LE(r.metric_law, 1e-3) << case_name(kind);
    EXPECT_LE(r.reanalysis_error, 1e-3) << case_name(kind);
  }
}

TEST(Canonicalize, UndoesLinearRescaling) {
  const CanonicalTriple t = fixtures::jet(SurfaceCase::NegativeKH);
  const Immersion m = build(t);
  const GridSpec& g = m.grid;
  const Immersion stretched = m.relabelled(GridSpec{2 * g.u0, 2 * g.u1, g.v0, g.v1, g.nu, g.nv});
  const CanonicalResult r = canonicalize(stretched);
  EXPECT_NEAR(r.reparam.new_grid.u1 - r.reparam.new_grid.u0, g.u1 - g.u0, 1e-4);
  EXPECT_LE(triple_diff(r.triple, t), 5e-4);
  EXPECT_EQ(r.case_after, SurfaceCase::NegativeKH);
}

TEST(Canonicalize, Idempotent) {
  const Immersion m = build(fixtures::jet(SurfaceCase::PositiveKH));
  const GridSpec& g = m.grid;
  const Immersion stretched = m.relabelled(GridSpec{g.u0, g.u0 + 3 * (g.u1 - g.u0), g.v0, g.v1, g.nu, g.nv});
  const CanonicalResult once = canonicalize(stretched);
  const CanonicalResult twice = canonicalize(once.immersion);
  EXPECT_LE(triple_diff(once.triple, twice.triple), 5e-4);
  const GridSpec& ng = once.immersion.grid;
  for (std::size_t i = 0; i < ng.nu; ++i) EXPECT_NEAR(twice.reparam.ubar[i], ng.u(i) - ng.u0, 5e-4);
}

TEST(Canonicalize, DegenerateMetricLaw) {
  const CanonicalResult r = canonicalize(build(fixtures::goursat_degenerate(65)));
  EXPECT_EQ(r.case_before, SurfaceCase::Degenerate);
  EXPECT_TRUE(r.reparam.psi.empty());
  EXPECT_LE(r.metric_law, 1e-3);
  EXPECT_LE(r.sigma_relation, 1e-3);
  // vbar = v - v0.
  EXPECT_EQ(r.reparam.vbar.front(), 0.0);
}

TEST(Canonicalize, DegenerateGoursatIdentityConverges) {
  // lambda = lambda1 / (f sqrt|mu1|) amplifies difference error where |mu| is small.
  std::vector<double> err;
  for (std::size_t n : {65, 129}) {
    const CanonicalTriple t = fixtures::goursat_degenerate(n);
    err.push_back(triple_diff(canonicalize(build(t)).triple, t));
  }
  EXPECT_LE(err[1], 1e-3);
  EXPECT_GE(testing_support::min_order(err), 1.8);
}

TEST(Canonicalize, LiteralDegenerateQuadratureBreaksMetricLaw) {
  CanonicalizeOptions opt;
  opt.literal_degenerate_quadrature = true;
  // On canonical input phi = 1 and both quadratures agree, so stretch u first.
  const Immersion c = build(fixtures::goursat_degenerate(65));
  const GridSpec& g = c.grid;
  const Immersion m = c.relabelled(GridSpec{g.u0, g.u0 + 2 * (g.u1 - g.u0), g.v0, g.v1, g.nu, g.nv});
  const CanonicalResult lit = canonicalize(m, opt), root = canonicalize(m);
  EXPECT_GT(lit.metric_law, 100 * root.metric_law);
  EXPECT_GT(std::abs(lit.reparam.ubar.back() - root.reparam.ubar.back()), 1e-2);
}

TEST(Canonicalize, SwapsWhenFirstPairVanishes) {
  const Immersion m = build(fixtures::jet(SurfaceCase::Degenerate));
  const CanonicalResult r = canonicalize(pnmc::detail::transposed(m));
  EXPECT_TRUE(r.reparam.swapped);
  EXPECT_EQ(r.case_before, SurfaceCase::Degenerate);
  EXPECT_LE(r.metric_law, 1e-3);
}

TEST(Canonicalize, RejectsNonIsotropicInput) {
  const Immersion m = Immersion::from_function(GridSpec::square(0.0, 1.0, 17),
                                               [](double u, double v) { return MinkVec(u, v, 0, 2 * u); });
  try {
    canonicalize(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotIsotropic);
  }
}

TEST(Canonicalize, MuRatioLaw) {
  // After canonicalization |mu1| = |mu2| = |mu|, i.e. the ratio is 1 on the new grid.
  const CanonicalTriple t = fixtures::jet(SurfaceCase::PositiveKH);
  const Immersion m = build(t);
  const GridSpec& g = m.grid;
  const CanonicalResult r = canonicalize(m.relabelled(GridSpec{g.u0, g.u1, g.v0, g.v0 + 0.5 * (g.v1 - g.v0), g.nu, g.nv}));
  EXPECT_LE(r.sigma_relation, 1e-3);
  EXPECT_LE(triple_diff(r.triple, t), 5e-4);
}
