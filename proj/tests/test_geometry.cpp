#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "corrlen/geometry.hpp"

using namespace corrlen;

namespace {

NormSpec octagon() {
  double r = 1.0 / std::sqrt(2.0);
  return make_polyhedral({{1, 0}, {r, r}, {0, 1}, {-r, r}, {-1, 0}, {-r, -r}, {0, -1}, {r, -r}});
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("norm evaluation spot values") {
  CHECK(evaluate_norm(make_ell_p(2, 1), Vec{3, -4}) == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(evaluate_norm(make_ell_p(2, 2), Vec{3, -4}) == doctest::Approx(5.0).epsilon(1e-14));
  double inf = std::numeric_limits<double>::infinity();
  CHECK(evaluate_norm(make_ell_p(2, inf), Vec{3, -4}) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(evaluate_norm(make_ell_p(2, 4), Vec{1, 1}) ==
        doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-14));
  // d = 1 weighted ell_1 with weight 0.7 is the scaled norm 0.7 |n|
  CHECK(evaluate_norm(make_weighted_ell_p(1, 1, {0.7}), IVec{-3}) ==
        doctest::Approx(2.1).epsilon(1e-14));
  // composite ball: facet at the axis, arc at the diagonal
  NormSpec comp = make_composite_arc_facet();
  CHECK(evaluate_norm(comp, Vec{1, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(evaluate_norm(comp, Vec{1, 1}) ==
        doctest::Approx(2.0 * (2.0 - std::sqrt(2.0))).epsilon(1e-13));
  // octagon gauge: 1 at a vertex direction
  CHECK(evaluate_norm(octagon(), Vec{0, 2}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("norm symmetry under lattice symmetries") {
  std::mt19937 rng(7u);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  std::vector<NormSpec> specs = {make_ell_p(2, 1.5), make_ell_p(2, 4),
                                 make_composite_arc_facet(), octagon()};
  for (const auto& spec : specs) {
    for (int k = 0; k < 50; ++k) {
      double a = U(rng), b = U(rng);
      double n0 = evaluate_norm(spec, Vec{a, b});
      CHECK(evaluate_norm(spec, Vec{b, a}) == doctest::Approx(n0).epsilon(1e-12));
      CHECK(evaluate_norm(spec, Vec{-a, b}) == doctest::Approx(n0).epsilon(1e-12));
      CHECK(evaluate_norm(spec, Vec{a, -b}) == doctest::Approx(n0).epsilon(1e-12));
    }
  }
}

TEST_CASE("spec validation rejects bad parameters") {
  CHECK_THROWS_AS(make_ell_p(2, 0.5).validate(), ConfigError);
  CHECK_THROWS_AS(make_weighted_ell_p(2, 2, {1.0, 2.0}).validate(), ConfigError);
  CHECK_THROWS_AS(make_weighted_ell_p(1, 2, {-1.0}).validate(), ConfigError);
  // polyhedral set must be closed under sign flips and the coordinate swap
  CHECK_THROWS_AS(make_polyhedral({{1, 0}, {0, 1}, {-1, 0}}).validate(), ConfigError);
}

TEST_CASE("ell4 duals match the closed forms") {
  NormSpec l4 = make_ell_p(2, 4);
  DualVector axis = dual_vector(l4, Vec{0, 1});
  CHECK(axis.t[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(axis.t[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(axis.unique);

  DualVector diag = dual_vector(l4, Vec{1, 1});
  double want = std::pow(2.0, -0.75);
  CHECK(diag.t[0] == doctest::Approx(want).epsilon(1e-12));
  CHECK(diag.t[1] == doctest::Approx(want).epsilon(1e-12));
  CHECK(diag.residual <= 1e-10);
}

TEST_CASE("duality identity t.s = |s| across families") {
  std::vector<NormSpec> specs = {make_ell_p(2, 1),    make_ell_p(2, 1.5),
                                 make_ell_p(2, 2),    make_ell_p(2, 4),
                                 make_composite_arc_facet(), octagon()};
  for (const auto& spec : specs) {
    for (int k = 0; k < 40; ++k) {
      double th = 0.03 + k * (2 * M_PI - 0.06) / 40.0;
      Vec s{std::cos(th), std::sin(th)};
      DualVector d = dual_vector(spec, s);
      CHECK(dot(d.t, s) == doctest::Approx(evaluate_norm(spec, s)).epsilon(1e-9));
      CHECK(wulff_gauge(spec, d.t) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("closed-form duals agree with the finite-difference route") {
  std::vector<NormSpec> specs = {make_ell_p(2, 1.5), make_ell_p(2, 2), make_ell_p(2, 3),
                                 make_ell_p(2, 4),
                                 make_weighted_ell_p(2, 2, {1.3, 1.3})};
  for (const auto& spec : specs) {
    for (int k = 0; k < 16; ++k) {
      double th = 0.1 + 0.09 * k;  // generic angles, off the symmetry axes
      Vec s{std::cos(th), std::sin(th)};
      DualVector a = dual_vector(spec, s);
      DualVector b = dual_vector_numeric(spec, s);
      REQUIRE(a.unique);
      for (int i = 0; i < 2; ++i) CHECK(a.t[i] == doctest::Approx(b.t[i]).epsilon(1e-8));
    }
  }
  // composite arc side
  Vec s{std::cos(0.66), std::sin(0.66)};
  DualVector a = dual_vector(make_composite_arc_facet(), s);
  DualVector b = dual_vector_numeric(make_composite_arc_facet(), s);
  for (int i = 0; i < 2; ++i) CHECK(a.t[i] == doctest::Approx(b.t[i]).epsilon(1e-7));
  // d = 3 smooth point
  NormSpec l3 = make_ell_p(3, 3);
  DualVector a3 = dual_vector(l3, Vec{1, 2, 3});
  DualVector b3 = dual_vector_numeric(l3, Vec{1, 2, 3});
  for (int i = 0; i < 3; ++i) CHECK(a3.t[i] == doctest::Approx(b3.t[i]).epsilon(1e-7));
}

TEST_CASE("kink duals expose the normal cone") {
  // ell_inf at the diagonal: exposed face of the ell_1 Wulff ball
  DualVector di = dual_vector(make_ell_p(2, std::numeric_limits<double>::infinity()), Vec{1, 1});
  CHECK_FALSE(di.unique);
  CHECK(di.t[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(di.t[1] == doctest::Approx(0.5).epsilon(1e-12));
  // ell_1 at the axis: the square Wulff shape has a facet normal to e1
  DualVector ax = dual_vector(make_ell_p(2, 1), Vec{1, 0});
  CHECK_FALSE(ax.unique);
  CHECK(ax.t[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ax.t[1] == doctest::Approx(0.0).epsilon(1e-12));
  // octagon vertex direction: centroid of the two edge functionals, and the
  // numeric route detects the same kink
  DualVector v = dual_vector(octagon(), Vec{1, 0});
  CHECK_FALSE(v.unique);
  DualVector vn = dual_vector_numeric(octagon(), Vec{1, 0});
  CHECK_FALSE(vn.unique);
  for (int i = 0; i < 2; ++i) CHECK(v.t[i] == doctest::Approx(vn.t[i]).epsilon(1e-5));
}

TEST_CASE("surcharge is the norm minus the tilt") {
  NormSpec l2 = make_ell_p(2, 2);
  Vec t = dual_vector(l2, Vec{1, 2}).t;
  SurchargeDetail d = surcharge_detail(l2, t, Vec{30, 17});
  CHECK(d.value == doctest::Approx(evaluate_norm(l2, Vec{30, 17}) - (30 * t[0] + 17 * t[1]))
                       .epsilon(1e-12));
  CHECK(d.value >= 0.0);
  // along the dual ray the surcharge vanishes (up to the clamp window)
  SurchargeDetail along = surcharge_detail(l2, t, Vec{10, 20});
  CHECK(along.value <= 1e-10);
  CHECK(along.raw >= -1e-12);
  // a tilt outside the Wulff shape is rejected
  CHECK_THROWS_AS(surcharge(l2, scaled(t, 1.5), Vec{10, 20}), NumericError);
}

TEST_CASE("surcharge non-negative on random samples") {
  std::mt19937 rng(19u);
  std::uniform_real_distribution<double> ang(0.0, 2 * M_PI);
  std::uniform_int_distribution<int> coord(-40, 40);
  std::vector<NormSpec> specs = {make_ell_p(2, 1.5), make_ell_p(2, 2), make_ell_p(2, 4),
                                 make_composite_arc_facet(), octagon()};
  for (const auto& spec : specs) {
    for (int k = 0; k < 200; ++k) {
      Vec s{std::cos(ang(rng)), std::sin(ang(rng))};
      Vec t = dual_vector(spec, s).t;
      IVec x{coord(rng), coord(rng)};
      if (x[0] == 0 && x[1] == 0) x[0] = 1;
      CHECK(surcharge(spec, t, x) >= 0.0);
    }
  }
}

TEST_CASE("boundary profile matches closed circle and quartic forms") {
  NormSpec l2 = make_ell_p(2, 2);
  Vec s{0, 1}, t{0, 1}, v{1, 0};
  std::vector<double> taus = {0.05, 0.1, 0.2};
  auto pts = boundary_profile(l2, s, t, v, taus);
  REQUIRE(pts.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    double want = 1.0 - std::sqrt(1.0 - taus[i] * taus[i]);
    CHECK(pts[i].f == doctest::Approx(want).epsilon(1e-9));
  }

  NormSpec l4 = make_ell_p(2, 4);
  auto pts4 = boundary_profile(l4, s, t, v, taus);
  for (size_t i = 0; i < 3; ++i) {
    double want = 1.0 - std::pow(1.0 - std::pow(taus[i], 4.0), 0.25);
    CHECK(pts4[i].f == doctest::Approx(want).epsilon(1e-9));
  }
  // profiles grow with tau
  CHECK(pts4[2].f > pts4[1].f);
  CHECK(pts4[1].f > pts4[0].f);
}

TEST_CASE("isotropy profile: smooth, quartic, cusp, facet") {
  NormSpec l2 = make_ell_p(2, 2);
  IsotropyProfile p2 = fit_isotropy_profile(l2, Vec{0.3, 0.7});
  CHECK(p2.quasi_isotropic);
  CHECK_FALSE(p2.facet);
  CHECK(p2.kappa_bar == doctest::Approx(2.0).epsilon(0.02));

  NormSpec l4 = make_ell_p(2, 4);
  IsotropyProfile ax = fit_isotropy_profile(l4, Vec{0, 1});
  CHECK(ax.quasi_isotropic);
  CHECK(std::abs(ax.kappa_bar - 4.0) <= 0.05);
  IsotropyProfile dg = fit_isotropy_profile(l4, Vec{1, 1});
  CHECK(dg.quasi_isotropic);
  CHECK(std::abs(dg.kappa_bar - 2.0) <= 0.05);

  // ell_1 axis: cusp of the unit sphere, linear profile
  IsotropyProfile cusp = fit_isotropy_profile(make_ell_p(2, 1), Vec{1, 0});
  CHECK_FALSE(cusp.facet);
  CHECK(std::abs(cusp.kappa_bar - 1.0) <= 0.05);

  // ell_1 diagonal: the sphere contains a segment through s0
  IsotropyProfile fc = fit_isotropy_profile(make_ell_p(2, 1), Vec{1, 1});
  CHECK(fc.facet);
  CHECK(fc.quasi_isotropic);

  // d = 1 degenerates to the facet convention
  IsotropyProfile one = fit_isotropy_profile(make_ell_p(1, 2), Vec{1});
  CHECK(one.facet);
  CHECK(one.quasi_isotropic);
}

TEST_CASE("composite ball mixes a facet with an arc") {
  NormSpec comp = make_composite_arc_facet();
  IsotropyProfile mixed = fit_isotropy_profile(comp, Vec{2, 1});
  CHECK(mixed.mixed_flat_curved);
  CHECK_FALSE(mixed.quasi_isotropic);

  IsotropyProfile facet = fit_isotropy_profile(comp, Vec{1, 0});
  CHECK(facet.facet);
  CHECK(facet.quasi_isotropic);

  IsotropyProfile arc = fit_isotropy_profile(comp, Vec{1, 1});
  CHECK_FALSE(arc.facet);
  CHECK(arc.quasi_isotropic);
  CHECK(std::abs(arc.kappa_bar - 2.0) <= 0.05);
}

TEST_CASE("wulff gauge scales linearly in t") {
  NormSpec l4 = make_ell_p(2, 4);
  Vec t = dual_vector(l4, Vec{1, 2}).t;
  CHECK(wulff_gauge(l4, t) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(wulff_gauge(l4, scaled(t, 0.5)) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(wulff_gauge(l4, scaled(t, 2.0)) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("tangent basis is orthonormal and normal to t") {
  Vec that = unit(Vec{1, 2, 2});
  auto basis = tangent_basis(that);
  REQUIRE(basis.size() == 2);
  for (const Vec& b : basis) {
    CHECK(norm2(b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dot(b, that)) <= 1e-12);
  }
  CHECK(std::abs(dot(basis[0], basis[1])) <= 1e-12);
  CHECK(tangent_basis(Vec{1}).empty());
}

}  // TEST_SUITE
