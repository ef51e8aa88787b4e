#include <gtest/gtest.h>

#include "dualmink/verifier.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dualmink {
namespace {

GridPtr circle(int n = 128) { return SphereGrid::build(1, {n, 0}); }
GridPtr sphere(int nlat = 24) { return SphereGrid::build(2, {nlat, 2 * nlat}); }

SupportFunction ellipse(const GridPtr& g) { return analytic_support(AnalyticBody::ellipsoid({1.2, 1.0}), g); }
SupportFunction ellipsoid(const GridPtr& g) {
  return analytic_support(AnalyticBody::ellipsoid({1.2, 1.0, 0.9}), g);
}

// Closed form for an ellipsoid with semi-axes A: F(x) = A^2 x / h, det b = (prod A)^2 / h^(n+2).
Field ellipsoid_density(const SphereGrid& g, const std::vector<double>& axes, double q) {
  const int n = g.dim();
  double prod = 1.0;
  for (double a : axes) prod *= a;
  Field out(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    double h2 = 0.0, f2 = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double x = g.nodes()(i, k), a2 = axes[std::size_t(k)] * axes[std::size_t(k)];
      h2 += a2 * x * x;
      f2 += a2 * a2 * x * x;
    }
    const double h = std::sqrt(h2);
    const double rho = std::sqrt(f2) / h;
    out(i) = h * prod * prod / std::pow(h, n + 2) * std::pow(rho, q - (n + 1));
  }
  return out;
}

TEST(DualDensity, BallExamples) {
  for (auto g : {circle(64), sphere(16)}) {
    for (double q : {0.5, 1.0, 2.0, 3.0}) {
      const DualDensity one = dual_density(analytic_support(AnalyticBody::ball(1.0), g), q);
      EXPECT_LT((one.g.array() - 1.0).abs().maxCoeff(), 1e-10);
      EXPECT_NEAR(one.ratio, 1.0, 1e-10);
    }
    const DualDensity two = dual_density(analytic_support(AnalyticBody::ball(2.0), g), 3.0);
    EXPECT_LT((two.g.array() / 8.0 - 1.0).abs().maxCoeff(), 1e-10);
  }
}

TEST(DualDensity, EllipseMatchesClosedForm) {
  for (double q : {0.5, 1.0, 2.0}) {
    auto g = circle(128);
    const DualDensity d = dual_density(ellipse(g), q);
    const Field oracle = ellipsoid_density(*g, {1.2, 1.0}, q);
    EXPECT_LT(((d.g - oracle).array() / oracle.array()).abs().maxCoeff(), 1e-10);
    EXPECT_NEAR(d.ratio, oracle.maxCoeff() / oracle.minCoeff(), 1e-10);
  }
}

TEST(DualDensity, EllipsoidMatchesClosedForm) {
  auto g = sphere(32);
  const DualDensity d = dual_density(ellipsoid(g), 1.5);
  const Field oracle = ellipsoid_density(*g, {1.2, 1.0, 0.9}, 1.5);
  EXPECT_LT(((d.g - oracle).array() / oracle.array()).abs().maxCoeff(), 1e-9);
}

TEST(DualDensity, ScalesWithPowerQ) {
  for (auto g : {circle(64), sphere(16)}) {
    const SupportFunction h = analytic_support(AnalyticBody::perturbed_ball(0.1, {2, 0, false}), g);
    const double lambda = 1.3, q = 1.7;
    const DualDensity a = dual_density(h, q);
    const DualDensity b = dual_density(SupportFunction(g, lambda * h.values(), true), q);
    EXPECT_LT((b.g / std::pow(lambda, q) - a.g).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT(a.g.minCoeff(), 0.0);
  }
}

TEST(DualDensity, RejectsNonConvex) {
  auto g = circle(64);
  const Field h = Field::Ones(64) + 0.6 * evaluate_mode(*g, {2, 0, false});
  EXPECT_THROW(dual_density(SupportFunction(g, h, true), 1.0), NonConvexError);
}

TEST(ComputeBeta, ClosedForms) {
  const StabilityConstants one = compute_beta(1);
  EXPECT_DOUBLE_EQ(one.c1, 1.0 / 6.0);
  EXPECT_NEAR(one.beta, 3.0 * std::sqrt(2.0), 1e-14);
  const StabilityConstants two = compute_beta(2);
  EXPECT_DOUBLE_EQ(two.c1, 1.0 / 8.0);
  EXPECT_NEAR(two.beta, 8.0 / std::sqrt(3.0), 1e-14);
  EXPECT_THROW(compute_beta(3), std::invalid_argument);
}

TEST(ComputeBeta, CapMeasureByQuadrature) {
  // Independent check of c1 by midpoint sums: half the fraction of the sphere with <x, w> >= 1/2.
  const int m = 200000;
  double arc = 0.0, cap = 0.0;
  for (int j = 0; j < m; ++j) {
    const double t = (j + 0.5) * 2.0 * kPi / m;
    if (std::cos(t) >= 0.5) arc += 2.0 * kPi / m;
    const double th = (j + 0.5) * kPi / m;
    if (std::cos(th) >= 0.5) cap += 2.0 * kPi * std::sin(th) * kPi / m;
  }
  EXPECT_NEAR(arc / (2.0 * 2.0 * kPi), compute_beta(1).c1, 1e-4);
  EXPECT_NEAR(cap / (2.0 * 4.0 * kPi), compute_beta(2).c1, 1e-4);
}

TEST(InequalityTolerance, PinnedValues) {
  EXPECT_TRUE(inequality_holds(1.0, 1.0));
  EXPECT_TRUE(inequality_holds(1.0 + 5e-9, 1.0));
  EXPECT_FALSE(inequality_holds(1.0 + 2e-8, 1.0));
  EXPECT_TRUE(inequality_holds(5e-11, 0.0));
  EXPECT_FALSE(inequality_holds(2e-10, 0.0));
}

TEST(CheckStability, Ball) {
  for (auto g : {circle(64), sphere(16)}) {
    const StabilityReport r = check_stability(analytic_support(AnalyticBody::ball(1.7), g), 1.0);
    EXPECT_LT(r.delta2, 1e-14);
    EXPECT_NEAR(r.bound, 0.0, 1e-4);
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.prop33.pass);
  }
}

TEST(CheckStability, EllipseHasStrictMargin) {
  for (double q : {0.5, 1.0, 2.0}) {
    const StabilityReport r = check_stability(ellipse(circle(128)), q);
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.delta2, 0.5 * r.bound);
    EXPECT_TRUE(r.q_in_range);
    EXPECT_TRUE(r.prop33.pass);
    EXPECT_TRUE(r.gradient_step.pass);
    EXPECT_TRUE(r.poincare.pass);
    EXPECT_GT(r.schneider, 0.0);
    EXPECT_NEAR(r.bound, r.beta * std::sqrt(r.ratio - 1.0), 1e-15);
    EXPECT_EQ(r.epsilon, r.ratio - 1.0);
  }
}

TEST(CheckStability, EllipsoidPasses) {
  const StabilityReport r = check_stability(ellipsoid(sphere(24)), 1.0);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.prop33.pass);
  EXPECT_TRUE(r.gradient_step.pass);
}

TEST(CheckStability, FlagsQOutsideHypothesis) {
  EXPECT_FALSE(check_stability(ellipse(circle(64)), 2.5).q_in_range);
  EXPECT_FALSE(check_stability(ellipse(circle(64)), -2.5).q_in_range);
  EXPECT_TRUE(check_stability(ellipse(circle(64)), -2.0).q_in_range);
}

TEST(CheckStability, RejectsOddBody) {
  auto g = circle(64);
  const Field h = Field::Ones(64) + 0.2 * g->nodes().col(0);
  EXPECT_THROW(check_stability(SupportFunction(g, h, false), 1.0), std::invalid_argument);
}

TEST(SpectralInequality, CircleExamples) {
  auto g = circle(64);
  const SupportFunction one = analytic_support(AnalyticBody::ball(1.0), g);
  const InequalityCheck c1 = check_spectral_inequality(one, evaluate_mode(*g, {1, 0, false}));
  EXPECT_NEAR(c1.lhs, kPi, 1e-12);
  EXPECT_NEAR(c1.rhs, kPi, 1e-12);
  EXPECT_TRUE(c1.pass);
  const InequalityCheck c2 = check_spectral_inequality(one, evaluate_mode(*g, {2, 0, false}));
  EXPECT_NEAR(c2.lhs, kPi, 1e-12);
  EXPECT_NEAR(c2.rhs, 4.0 * kPi, 1e-11);
}

TEST(SpectralInequality, EqualityForLinearOverH) {
  // f = <x, v> / h attains equality on any body.
  for (auto [g, h] : {std::pair{circle(128), ellipse(circle(128))}, std::pair{sphere(24), ellipsoid(sphere(24))}}) {
    (void)g;
    const SphereGrid& grid = h.grid();
    SpaceVector v = SpaceVector::Ones(grid.dim() + 1);
    const Field f = ((grid.nodes() * v).array() / h.values().array()).matrix();
    const InequalityCheck c = check_spectral_inequality(h, f);
    EXPECT_NEAR(c.lhs, c.rhs, 1e-8 * c.rhs);
  }
}

TEST(SpectralInequality, RandomTestFunctionsOnEllipse) {
  const SupportFunction h = ellipse(circle(128));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Field f = random_even_field(h.grid(), seed);
    // Odd components too: the inequality holds for every f.
    f += 0.3 * std::sin(double(seed)) * evaluate_mode(h.grid(), {3, 0, false});
    Field projected;
    const InequalityCheck c = check_spectral_inequality(h, f, &projected);
    EXPECT_TRUE(c.pass) << seed << ": " << c.lhs << " > " << c.rhs;
    const BodyGeometry geo = evaluate_geometry(h);
    const double ortho = integrate(h.grid(), (projected.array() * h.values().array() * geo.sigma_n.array()).matrix());
    EXPECT_LT(std::abs(ortho), 1e-12);
  }
}

TEST(SpectralInequality, RandomTestFunctionsOnEllipsoid) {
  const SupportFunction h = ellipsoid(sphere(24));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const InequalityCheck c = check_spectral_inequality(h, random_even_field(h.grid(), seed, 6));
    EXPECT_TRUE(c.pass) << seed;
  }
}

TEST(XAlphaInequality, BallIsEquality) {
  for (auto g : {circle(64), sphere(16)}) {
    const SupportFunction one = analytic_support(AnalyticBody::ball(1.0), g);
    for (double alpha : {-3.0, -1.0, 0.0, 0.5}) {
      const InequalityCheck c = check_X_alpha_inequality(one, alpha);
      EXPECT_NEAR(c.lhs, g->dim() * g->total_measure(), 1e-10);
      EXPECT_NEAR(c.rhs, g->dim() * g->total_measure(), 1e-10);
      EXPECT_TRUE(c.pass);
    }
  }
}

TEST(XAlphaInequality, EllipseAndPerturbedBall) {
  auto g = circle(128);
  for (double q : {0.0, 1.0}) {
    const InequalityCheck c = check_X_alpha_inequality(ellipse(g), q - 2.0);
    EXPECT_TRUE(c.pass) << q;
    EXPECT_LT(c.lhs, c.rhs);
  }
  // alpha = 0 in the plane: the coordinates of X are the equality case.
  const InequalityCheck flat = check_X_alpha_inequality(ellipse(g), 0.0);
  EXPECT_TRUE(flat.pass);
  EXPECT_NEAR(flat.lhs, flat.rhs, 1e-10 * flat.rhs);
  const SupportFunction p = analytic_support(AnalyticBody::perturbed_ball(0.1, {2, 0, false}), g);
  EXPECT_TRUE(check_X_alpha_inequality(p, -1.0).pass);
  for (double q : {0.5, 1.0, 2.0, 3.0}) EXPECT_TRUE(check_X_alpha_inequality(ellipsoid(sphere(24)), q - 3.0).pass);
}

TEST(Prop33, Examples) {
  for (auto g : {circle(64), sphere(16)}) {
    const InequalityCheck c = check_prop33(analytic_support(AnalyticBody::ball(1.0), g), 1.0);
    EXPECT_NEAR(c.lhs, g->dim() * g->total_measure(), 1e-10);
    EXPECT_NEAR(c.rhs, c.lhs, 1e-10);
    EXPECT_TRUE(c.pass);
  }
  EXPECT_TRUE(check_prop33(ellipse(circle(128)), 1.0).pass);
  EXPECT_TRUE(check_prop33(ellipse(circle(128)), 2.0).pass);
  EXPECT_TRUE(check_prop33(ellipsoid(sphere(24)), 2.0).pass);
  EXPECT_TRUE(check_prop33(ellipsoid(sphere(24)), 3.0).pass);
}

TEST(PoincareStep, EvenFunctionsAreStrict) {
  for (auto g : {circle(64), sphere(16)}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const InequalityCheck c = poincare_step(*g, random_even_field(*g, seed, 6));
      EXPECT_TRUE(c.pass);
      // Lowest even eigenvalue 2(n+1) against n: rhs >= 2(n+1)/n lhs.
      EXPECT_GE(c.rhs, 2.0 * (g->dim() + 1) / g->dim() * c.lhs * (1 - 1e-10));
    }
    // Degree-1 modes are the equality case.
    const InequalityCheck lin = poincare_step(*g, g->nodes().col(0));
    EXPECT_NEAR(lin.lhs, lin.rhs, 1e-10);
  }
}

TEST(Schneider, Examples) {
  for (auto g : {circle(64), sphere(16)}) {
    const int n = g->dim();
    const SupportFunction a = analytic_support(AnalyticBody::ball(1.0), g);
    const SupportFunction b = analytic_support(AnalyticBody::ball(1.5), g);
    EXPECT_NEAR(check_schneider(a, b), 0.25 * std::pow(3.0, n) / std::pow(0.5, n + 2), 1e-12);
    EXPECT_EQ(check_schneider(a, a), std::numeric_limits<double>::infinity());
  }
}

TEST(Schneider, RandomPairsBoundedBelow) {
  for (auto g : {circle(64), sphere(16)}) {
    double inf = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto body = [&](std::uint64_t s) {
        Field f = random_even_field(*g, s, 4);
        f = f.array() - sphere_mean(*g, f);
        f *= 0.05 / f.cwiseAbs().maxCoeff();
        return SupportFunction(g, Field::Ones(g->size()) + f, true);
      };
      inf = std::min(inf, check_schneider(body(2 * seed), body(2 * seed + 1)));
    }
    EXPECT_GT(inf, 1e-3);
    std::cout << "dim " << g->dim() << " empirical inf " << inf << '\n';
  }
}

TEST(C0C1Report, Examples) {
  const BoundsSummary ball = c0_c1_report(analytic_support(AnalyticBody::ball(1.0), circle(64)));
  EXPECT_EQ(ball.min_h, 1.0);
  EXPECT_EQ(ball.max_h, 1.0);
  EXPECT_LT(ball.max_grad, 1e-12);
  const BoundsSummary e = c0_c1_report(ellipse(circle(64)));
  EXPECT_NEAR(e.max_h, 1.2, 1e-15);
  EXPECT_NEAR(e.min_h, 1.0, 1e-15);
  EXPECT_NEAR(e.h_ratio, 1.2, 1e-15);
  // Radii of curvature of the ellipse run from b^2/a to a^2/b.
  EXPECT_NEAR(e.min_radius, 1.0 / 1.2, 1e-10);
  EXPECT_NEAR(e.max_radius, 1.44, 1e-10);
}

TEST(Reports, SerializeAndCsv) {
  auto g = circle(32);
  const SupportFunction h = ellipse(g);
  Document doc;
  write_report(doc, check_stability(h, 1.0));
  write_bounds(doc, c0_c1_report(h));
  const DualDensity d = dual_density(h, 1.0);
  write_density(doc, d);
  const Document back = Document::parse(doc.str());
  EXPECT_EQ(back, doc);
  EXPECT_EQ(back.at("density").get_vector("g"), d.g);
  EXPECT_TRUE(back.at("stability").get_bool("pass"));

  std::ostringstream csv;
  write_density_csv(csv, *g, d);
  std::istringstream lines(csv.str());
  std::string line;
  int count = 0;
  std::getline(lines, line);
  EXPECT_EQ(line, "index,x,y,g");
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 32);
}

TEST(RandomEvenField, DeterministicAndEven) {
  for (auto g : {circle(64), sphere(16)}) {
    const Field a = random_even_field(*g, 7);
    EXPECT_EQ(a, random_even_field(*g, 7));
    EXPECT_NE(a, random_even_field(*g, 8));
    EXPECT_LT((a - project_even(*g, a)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

}  // namespace
}  // namespace dualmink
