#include <leinert/bounds.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace leinert;

namespace {

// minimiser of P(t)/t for n equal weights a: sqrt(1 + 4a^2 t^2) = n/(n-2)
double uniform_radius(unsigned n, double a) {
  double q = double(n) / (n - 2);
  double t = std::sqrt(q * q - 1) / (2 * a);
  return t / (1 + 0.5 * n * (q - 1));
}

RadiusProblem problem(unsigned s, double a, DBound d = DBound::zero()) { return RadiusProblem{s, a, d}; }

}  // namespace

TEST(P, Values) {
  std::vector<double> w(4, 1.0);
  EXPECT_DOUBLE_EQ(eval_P(0, w), 1.0);
  EXPECT_NEAR(eval_P(1, w), 1 + 2 * (std::sqrt(5.0) - 1), 1e-14);
  EXPECT_EQ(eval_P_prime(0, w), 0.0);
}

TEST(P, DerivativeMatchesFiniteDifference) {
  std::vector<double> w{0.1, 0.3, 0.2, 0.7, 0.05};
  for (double t : {0.01, 0.5, 1.0, 3.0, 20.0}) {
    double h = 1e-6 * std::max(1.0, t);
    double fd = (eval_P(t + h, w) - eval_P(t - h, w)) / (2 * h);
    EXPECT_NEAR(eval_P_prime(t, w), fd, 1e-7 * std::max(1.0, fd)) << t;
  }
}

TEST(Woess, UniformClosedForm) {
  for (unsigned n = 3; n <= 12; ++n)
    for (double a : {1.0, 1.0 / n, 1.0 / (2 * n)}) {
      auto r = woess_radius(std::vector<double>(n, a));
      EXPECT_FALSE(r.limit);
      EXPECT_NEAR(r.r, uniform_radius(n, a), 1e-12 * uniform_radius(n, a)) << n << ' ' << a;
    }
}

TEST(Woess, KnownValues) {
  EXPECT_NEAR(woess_radius(std::vector<double>(4, 0.25)).r, 2 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(woess_radius(std::vector<double>(6, 1.0 / 6)).r, 3 / std::sqrt(5.0), 1e-12);
}

TEST(Woess, ScalesInverselyWithWeights) {
  std::vector<double> w{0.1, 0.3, 0.2, 0.4};
  auto base = woess_radius(w);
  for (double c : {0.5, 2.0, 7.0}) {
    std::vector<double> wc;
    for (double a : w) wc.push_back(c * a);
    EXPECT_NEAR(woess_radius(wc).r, base.r / c, 1e-10 * base.r / c);
  }
}

TEST(Woess, LimitCases) {
  auto r = woess_radius({0.5, 0.5});
  EXPECT_TRUE(r.limit);
  EXPECT_DOUBLE_EQ(r.r, 1.0);
  EXPECT_TRUE(std::isinf(r.theta));
  EXPECT_TRUE(woess_radius({0.3, 0.0, 0.2}).limit);
  EXPECT_THROW(woess_radius({0.0}), std::invalid_argument);
  EXPECT_THROW(woess_radius({-1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST(VerticalTangent, AgreesWithMinimisation) {
  for (unsigned n : {3u, 4u, 6u, 9u}) {
    std::vector<double> w(n, 1.0 / n);
    auto vt = radius_from_vertical_tangent(w);
    ASSERT_TRUE(vt.converged) << n;
    EXPECT_NEAR(vt.x, woess_radius(w).r, 1e-10) << n;
    EXPECT_NEAR(vt.y, eval_P(vt.x * vt.y, w), 1e-12);
  }
  std::vector<double> mixed{0.1, 0.3, 0.2, 0.4};
  auto vt = radius_from_vertical_tangent(mixed);
  ASSERT_TRUE(vt.converged);
  EXPECT_NEAR(vt.x, woess_radius(mixed).r, 1e-10);
}

TEST(VerticalTangent, NoSolutionForTwoWeights) {
  auto vt = radius_from_vertical_tangent({0.5, 0.5});
  EXPECT_FALSE(vt.converged);
  EXPECT_DOUBLE_EQ(vt.x, 1.0);
}

TEST(DBound, ParseAndEval) {
  EXPECT_EQ(DBound::parse("zero").kind, DBound::Kind::Zero);
  auto g = DBound::parse("c=0.5");
  EXPECT_EQ(g.kind, DBound::Kind::GeometricRate);
  EXPECT_DOUBLE_EQ(g.singularity(), 2.0);
  auto r = DBound::parse("R=5");
  EXPECT_EQ(r.kind, DBound::Kind::RadiusForm);
  EXPECT_DOUBLE_EQ(r.eval(3), 9.0 / 16);
  EXPECT_THROW(DBound::parse("banana"), std::invalid_argument);
  EXPECT_THROW(DBound::parse("R=-1"), std::invalid_argument);
  EXPECT_EQ(DBound::zero().eval(10), 0.0);
  for (double t : {0.1, 1.0, 2.5}) {
    double h = 1e-6;
    EXPECT_NEAR(r.eval_dt(t), (r.eval(t + h) - r.eval(t - h)) / (2 * h), 1e-6);
  }
}

TEST(DBound, GeometricRateEqualsRadiusForm) {
  for (double R : {2.0, 5.0, 10.0}) {
    auto a = bound_report(problem(2, 0.25, DBound::radius(R)));
    auto b = bound_report(problem(2, 0.25, DBound::geometric(1 / R)));
    EXPECT_NEAR(a.r_upper, b.r_upper, 1e-14);
  }
}

TEST(Q, ReducesToPWithoutD) {
  auto pb = problem(2, 0.25);
  auto w = pb.weights();
  for (double t : {0.0, 0.3, 1.0, 2.0}) EXPECT_NEAR(eval_Q(t, 1.0, pb), eval_P(t, w), 1e-14);
  for (double t : {0.3, 1.0})
    for (double g : {1.0, 1.5}) EXPECT_NEAR(eval_Q(t, g, pb), eval_P(t * g, w), 1e-14);
}

TEST(Q, MonotoneAndDerivatives) {
  auto pb = problem(3, 1.0 / 6, DBound::radius(5));
  for (double t : {0.2, 0.8, 1.2})
    for (double g : {1.0, 1.3, 2.0}) {
      double h = 1e-6;
      EXPECT_NEAR(eval_Q_dt(t, g, pb), (eval_Q(t + h, g, pb) - eval_Q(t - h, g, pb)) / (2 * h), 1e-6);
      EXPECT_NEAR(eval_Q_dg(t, g, pb), (eval_Q(t, g + h, pb) - eval_Q(t, g - h, pb)) / (2 * h), 1e-6);
      EXPECT_GT(eval_Q_dt(t, g, pb), 0);
      EXPECT_GT(eval_Q_dg(t, g, pb), 0);
      EXPECT_GE(eval_Q(t, g, pb), eval_P(t * g, pb.weights()));
    }
}

TEST(Quadratic, RootSolvesFixedPointEquation) {
  for (auto d : {DBound::zero(), DBound::radius(5), DBound::radius(10)}) {
    auto pb = problem(2, 0.25, d);
    for (double z : {0.0, 0.2, 0.5, 0.6}) {
      double g = solve_G_upper(z, pb);
      EXPECT_NEAR(eval_Q(z, g, pb), g, 1e-12) << z;
      auto fp = solve_G_fixed_point(z, pb);
      ASSERT_TRUE(fp);
      EXPECT_NEAR(*fp, g, 1e-10) << z;
    }
  }
  EXPECT_DOUBLE_EQ(solve_G_upper(0, problem(2, 0.25)), 1.0);
}

TEST(Quadratic, ZeroDMatchesFreeGroupFormula) {
  // G = (2 - 2s + 2s sqrt(1 - 4a^2(2s-1)z^2)) / (2(1 - 4a^2 s^2 z^2))
  unsigned s = 2;
  double a = 0.25;
  for (double z : {0.1, 0.5, 0.9, 1.1, 1.15}) {
    double want = (2.0 - 2 * s + 2.0 * s * std::sqrt(1 - 4 * a * a * (2 * s - 1) * z * z)) /
                  (2 * (1 - 4 * a * a * s * s * z * z));
    EXPECT_NEAR(solve_G_upper(z, problem(s, a)), want, 1e-12) << z;
  }
  EXPECT_THROW(solve_G_upper(1.2, problem(s, a)), PastRadius);
}

TEST(Discriminant, ZeroBoundGivesFreeRadius) {
  EXPECT_NEAR(radius_from_discriminant(problem(2, 0.25)), 2 / std::sqrt(3.0), 1e-14);
  auto rep = bound_report(problem(2, 0.25));
  EXPECT_NEAR(rep.r_upper, rep.r_lower, 1e-12);
  EXPECT_NEAR(rep.gap, 0, 1e-12);
}

TEST(Discriminant, FrozenRadii) {
  // smallest root of the cubic, cross-checked by bisection on the un-expanded form
  struct Row {
    unsigned s;
    double a, R, z;
  };
  for (auto r : {Row{2, 0.25, 2, 0.688692}, Row{2, 0.25, 5, 1.00796}, Row{2, 0.25, 10, 1.11138},
                 Row{2, 0.25, 100, 1.15424}, Row{3, 1.0 / 6, 2, 0.622377}, Row{3, 1.0 / 6, 5, 1.03894},
                 Row{3, 1.0 / 6, 10, 1.23734}, Row{3, 1.0 / 6, 100, 1.34044}}) {
    auto pb = problem(r.s, r.a, DBound::radius(r.R));
    double z = radius_from_discriminant(pb);
    EXPECT_NEAR(z, r.z, 5e-6) << r.s << ' ' << r.R;
    EXPECT_LT(discriminant_scaled_residual(z, pb), 1e-12);
  }
}

TEST(Discriminant, SignChangeAtRoot) {
  auto pb = problem(2, 0.25, DBound::radius(5));
  double z = radius_from_discriminant(pb);
  EXPECT_GT(discriminant_at(z * (1 - 1e-6), 2, 0.25, 5).value, 0);
  EXPECT_LT(discriminant_at(z * (1 + 1e-6), 2, 0.25, 5).value, 0);
  // every smaller z has a positive discriminant
  for (int i = 1; i < 100; ++i) EXPECT_GT(discriminant_at(z * i / 100.0, 2, 0.25, 5).value, 0);
}

TEST(Discriminant, IncreasesWithR) {
  for (unsigned s : {2u, 3u, 5u}) {
    double a = 1.0 / (2 * s), prev = 0;
    for (double R : {1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0, 1000.0}) {
      double z = radius_from_discriminant(problem(s, a, DBound::radius(R)));
      EXPECT_GT(z, prev) << s << ' ' << R;
      EXPECT_LT(z, problem(s, a).z_free());
      prev = z;
    }
  }
}

TEST(ClosedForm, MinusBranchRoundTrip) {
  for (unsigned s : {2u, 3u}) {
    double a = 1.0 / (2 * s);
    double zf = problem(s, a).z_free();
    for (int i = 1; i <= 20; ++i) {
      double z = zf * i / 21.0;
      double R2 = r_squared_closed_form(z, s, a, RBranch::Minus);
      if (!(R2 > z * z)) continue;
      double R = std::sqrt(R2);
      double back = radius_from_discriminant(problem(s, a, DBound::radius(R)));
      EXPECT_NEAR(back, z, 1e-9 * z) << s << ' ' << i;
    }
  }
}

TEST(ClosedForm, PlusBranchIsAlsoARoot) {
  unsigned s = 2;
  double a = 0.25;
  for (double z : {1.3, 1.6, 2.0}) {
    double R2 = r_squared_closed_form(z, s, a, RBranch::Plus);
    if (!(R2 > z * z)) continue;
    auto e = discriminant_at(z, s, a, std::sqrt(R2));
    EXPECT_LT(std::abs(e.value) / e.scale, 1e-10) << z;
  }
  EXPECT_THROW(r_squared_closed_form(problem(s, a).z_free(), s, a), std::domain_error);
}

TEST(ClosedForm, DValuesZeroTheDiscriminant) {
  for (unsigned s : {2u, 3u, 4u}) {
    double a = 1.0 / (2 * s);
    for (double z : {0.2, 0.7, 1.0}) {
      auto [d1, d2] = d_closed_form(z, s, a);
      for (double D : {d1, d2}) {
        auto [A, B, C] = quadratic_coeffs(z, D, s, a);
        EXPECT_NEAR(B * B - 4 * A * C, 0, 1e-12 * std::max(1.0, B * B));
      }
      auto [zp, zm] = d_closed_form_inverse(d2, s, a);
      EXPECT_NEAR(zp, z, 1e-12);
      EXPECT_NEAR(zm, -z, 1e-12);
    }
  }
}

TEST(Report, UpperRadiusNeverExceedsLower) {
  for (unsigned s = 2; s <= 6; ++s)
    for (double R : {2.0, 5.0, 10.0}) {
      auto rep = bound_report(problem(s, 1.0 / (2 * s), DBound::radius(R)));
      EXPECT_LE(rep.r_upper, rep.r_lower);
      EXPECT_GE(rep.gap, 0);
      EXPECT_NEAR(rep.gap, rep.r_lower - rep.r_upper, 1e-15);
    }
}

TEST(Report, GapShrinksAsRGrows) {
  double prev = 1e9;
  for (double R : {2.0, 5.0, 10.0, 100.0}) {
    auto rep = bound_report(problem(2, 0.25, DBound::radius(R)));
    EXPECT_LT(rep.gap, prev);
    prev = rep.gap;
  }
}

TEST(Sandwich, HoldsInsideTheDisc) {
  auto pb = problem(2, 0.25, DBound::radius(5));
  double zr = radius_from_discriminant(pb);
  std::vector<double> zs;
  for (int i = 1; i <= 20; ++i) zs.push_back(zr * i / 21.0);
  for (const auto& pt : sandwich(pb, zs)) EXPECT_TRUE(pt.holds(1e-12)) << pt.z << ' ' << pt.g;
}

TEST(Curve, RowsAndCsv) {
  auto rows = curve_points(2, 4, [](unsigned s) { return 1.0 / (2 * s); }, DBound::radius(10));
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_LE(r.z_upper, r.z_lower);
    EXPECT_NEAR(r.z_free_formula, 1 / (2 * r.a * std::sqrt(2.0 * r.s - 1)), 1e-14);
  }
  auto csv = curve_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "s,a,z_lower,z_upper,z_free_formula");
}

TEST(Problem, Validation) {
  EXPECT_THROW(problem(0, 0.25).check(), std::invalid_argument);
  EXPECT_THROW(problem(2, -1).check(), std::invalid_argument);
}
