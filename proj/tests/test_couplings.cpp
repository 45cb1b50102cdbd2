#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "corrlen/couplings.hpp"

using namespace corrlen;

namespace {

PrefactorSpec constant_pref(double C = 1.0) {
  PrefactorSpec p;
  p.family = PrefactorFamily::Constant;
  p.C = C;
  return p;
}

PrefactorSpec poly_pref(double alpha, double C = 1.0) {
  PrefactorSpec p;
  p.family = PrefactorFamily::Polynomial;
  p.alpha = alpha;
  p.C = C;
  return p;
}

PrefactorSpec stretched_pref(double a, double gamma, double C = 1.0) {
  PrefactorSpec p;
  p.family = PrefactorFamily::StretchedExp;
  p.a = a;
  p.gamma = gamma;
  p.C = C;
  return p;
}

PrefactorSpec table_pref(std::vector<double> t) {
  PrefactorSpec p;
  p.family = PrefactorFamily::Table;
  p.table = std::move(t);
  return p;
}

}  // namespace

TEST_SUITE("couplings") {

TEST_CASE("Z_J closed forms, d = 1") {
  // constant prefactor: geometric series 2 e^{-1} / (1 - e^{-1})
  auto k = normalize_kernel(make_ell_p(1, 2), constant_pref(), 80);
  double q = std::exp(-1.0);
  CHECK(k.ZJ == doctest::Approx(2 * q / (1 - q)).epsilon(1e-13));

  // polynomial alpha = 2: 2 Li_2(e^{-1})
  auto k2 = normalize_kernel(make_ell_p(1, 2), poly_pref(2.0), 200);
  CHECK(k2.ZJ == doctest::Approx(0.817508574697792538066).epsilon(1e-13));
  CHECK(k2.ZJ == doctest::Approx(2 * polylog(2.0, q)).epsilon(1e-13));

  // scaled norm |n| = 0.7 n: 2 Li_2(e^{-0.7}) with the same prefactor
  auto kw = normalize_kernel(make_weighted_ell_p(1, 1, {0.7}), poly_pref(2.0), 200);
  CHECK(kw.ZJ == doctest::Approx(1.15502777566883449471).epsilon(1e-12));
  auto kwc = normalize_kernel(make_weighted_ell_p(1, 1, {0.7}), constant_pref(), 200);
  double q7 = std::exp(-0.7);
  CHECK(kwc.ZJ == doctest::Approx(2 * q7 / (1 - q7)).epsilon(1e-12));
}

TEST_CASE("Z_J closed form, d = 2 ell_1 constant") {
  auto k = normalize_kernel(make_ell_p(2, 1), constant_pref(), 90);
  double q = std::exp(-1.0);
  double S = (1 + q) / (1 - q);
  CHECK(k.ZJ == doctest::Approx(S * S - 1).epsilon(1e-12));
  CHECK(k.ZJ == doctest::Approx(3.68269437683116928).epsilon(1e-12));
}

TEST_CASE("normalized box mass and symmetry") {
  auto k = normalize_kernel(make_ell_p(2, 2), poly_pref(1.6), 60);
  CHECK(k.rel_tail() <= 1e-10);
  double mass = 0;
  for (double v : k.J) mass += v;
  CHECK(mass <= 1.0 + 1e-14);
  CHECK(mass >= 1.0 - k.rel_tail() - 1e-12);

  CHECK(k.J_at(IVec{0, 0}) == 0.0);
  CHECK(std::isinf(k.logJ_at(IVec{0, 0})));
  CHECK(k.J_at(IVec{3, 5}) == doctest::Approx(k.J_at(IVec{-3, 5})).epsilon(1e-15));
  CHECK(k.J_at(IVec{3, 5}) == doctest::Approx(k.J_at(IVec{5, 3})).epsilon(1e-15));
  CHECK(k.J_at(IVec{2, 7}) > 0.0);
  CHECK(std::exp(k.logJ_at(IVec{2, 7})) == doctest::Approx(k.J_at(IVec{2, 7})).epsilon(1e-13));
  CHECK_THROWS_AS(k.J_at(IVec{61, 0}), ConfigError);

  // hash: stable across rebuilds, sensitive to the box radius
  auto k_again = normalize_kernel(make_ell_p(2, 2), poly_pref(1.6), 60);
  CHECK(k.hash == k_again.hash);
  auto k_other = normalize_kernel(make_ell_p(2, 2), poly_pref(1.6), 61);
  CHECK(k.hash != k_other.hash);
}

TEST_CASE("tail tolerance violation names a larger radius") {
  try {
    normalize_kernel(make_ell_p(1, 2), poly_pref(2.0), 10, 1e-10);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("increase R") != std::string::npos);
  }
}

TEST_CASE("radial envelope sandwiches the prefactor") {
  PrefactorSpec pref = poly_pref(1.6);
  RadialEnvelope env = radial_envelope(pref, 2);
  for (int x = 1; x <= 40; ++x)
    for (int y = 0; y <= x; ++y) {
      double l = x + y;
      double v = pref.evaluate(Vec{double(x), double(y)});
      CHECK(v >= env.lower(l) * (1 - 1e-12));
      CHECK(v <= env.upper(l) * (1 + 1e-12));
    }
}

TEST_CASE("envelope tail matches direct summation in d = 1") {
  RadialEnvelope env = radial_envelope(poly_pref(2.0), 1);
  double tail = envelope_tail(env, 1.0, 1, 50);
  long double direct = 0;
  for (int n = 51; n <= 500; ++n)
    direct += 2.0L * std::pow((long double)n, -2.0L) * std::exp(-1.0L * n);
  CHECK(tail == doctest::Approx(double(direct)).epsilon(1e-5));
}

TEST_CASE("criterion thresholds for polynomial prefactors") {
  NormSpec l4 = make_ell_p(2, 4);
  IsotropyProfile kappa4 = fit_isotropy_profile(l4, Vec{0, 1});
  IsotropyProfile kappa2 = fit_isotropy_profile(l4, Vec{1, 1});
  IsotropyProfile facet = fit_isotropy_profile(make_ell_p(2, 1), Vec{1, 1});

  // kappa = 4: threshold 1 + (1 - 1/4) = 7/4
  CHECK(criterion_classify(poly_pref(1.74), kappa4, 2) == CriterionVerdict::DIVERGENT);
  CHECK(criterion_classify(poly_pref(1.76), kappa4, 2) == CriterionVerdict::CONVERGENT);
  // kappa = 2: threshold 3/2
  CHECK(criterion_classify(poly_pref(1.48), kappa2, 2) == CriterionVerdict::DIVERGENT);
  CHECK(criterion_classify(poly_pref(1.52), kappa2, 2) == CriterionVerdict::CONVERGENT);
  // facet: threshold d, equality diverges
  CHECK(criterion_classify(poly_pref(1.9), facet, 2) == CriterionVerdict::DIVERGENT);
  CHECK(criterion_classify(poly_pref(2.0), facet, 2) == CriterionVerdict::DIVERGENT);
  CHECK(criterion_classify(poly_pref(2.1), facet, 2) == CriterionVerdict::CONVERGENT);

  // d = 1: threshold 1 regardless of the profile
  IsotropyProfile one = fit_isotropy_profile(make_ell_p(1, 2), Vec{1});
  CHECK(criterion_classify(poly_pref(1.0), one, 1) == CriterionVerdict::DIVERGENT);
  CHECK(criterion_classify(poly_pref(1.05), one, 1) == CriterionVerdict::CONVERGENT);

  // families with a fixed verdict
  CHECK(criterion_classify(constant_pref(), kappa4, 2) == CriterionVerdict::DIVERGENT);
  CHECK(criterion_classify(stretched_pref(1.0, 0.5), kappa4, 2) ==
        CriterionVerdict::CONVERGENT);
}

TEST_CASE("criterion verdict is monotone in alpha") {
  IsotropyProfile prof = fit_isotropy_profile(make_ell_p(2, 4), Vec{0, 1});
  bool seen_convergent = false;
  for (double alpha = 1.1; alpha <= 2.55; alpha += 0.1) {
    auto v = criterion_classify(poly_pref(alpha), prof, 2);
    if (v == CriterionVerdict::CONVERGENT) seen_convergent = true;
    if (seen_convergent) CHECK(v == CriterionVerdict::CONVERGENT);
  }
  CHECK(seen_convergent);
}

TEST_CASE("mixed facet/arc profiles are decided by the facet side in d = 2") {
  IsotropyProfile mixed = fit_isotropy_profile(make_composite_arc_facet(), Vec{2, 1});
  REQUIRE(mixed.mixed_flat_curved);
  CHECK(criterion_classify(poly_pref(1.8), mixed, 2) == CriterionVerdict::DIVERGENT);
  CHECK(criterion_classify(poly_pref(2.1), mixed, 2) == CriterionVerdict::CONVERGENT);
  CHECK(criterion_classify(stretched_pref(1.0, 0.5), mixed, 2) ==
        CriterionVerdict::CONVERGENT);
}

TEST_CASE("table prefactors use the dyadic block heuristic") {
  IsotropyProfile one = fit_isotropy_profile(make_ell_p(1, 2), Vec{1});
  std::vector<double> cubic(129), flat(129, 1.0), tiny(8, 1.0);
  cubic[0] = 1.0;
  for (size_t i = 1; i < cubic.size(); ++i) cubic[i] = std::pow(double(i), -3.0);
  CHECK(criterion_classify(table_pref(cubic), one, 1) == CriterionVerdict::CONVERGENT);
  CHECK(criterion_classify(table_pref(flat), one, 1) == CriterionVerdict::DIVERGENT);
  CHECK(criterion_classify(table_pref(tiny), one, 1) == CriterionVerdict::UNKNOWN);
}

TEST_CASE("xi_tilde reproduces the d = 1 closed values") {
  auto k2 = normalize_kernel(make_ell_p(1, 2), poly_pref(2.0), 2000);
  IsotropyProfile prof = fit_isotropy_profile(k2.norm, Vec{1});
  XiTildeResult xi = xi_tilde(k2, Vec{1.0}, 2000, prof);
  CHECK(xi.verdict == CriterionVerdict::CONVERGENT);
  CHECK(xi.value == doctest::Approx(2.18364272129992977685).epsilon(1e-9));
  CHECK(xi.tail_estimate >= 0.0);
  CHECK(xi.partial <= xi.value);

  auto k3 = normalize_kernel(make_ell_p(1, 2), poly_pref(3.0), 2000);
  IsotropyProfile prof3 = fit_isotropy_profile(k3.norm, Vec{1});
  XiTildeResult xi3 = xi_tilde(k3, Vec{1.0}, 2000, prof3);
  CHECK(xi3.value == doctest::Approx(1.73100119406250422862).epsilon(1e-9));

  // without a profile the verdict is withheld
  XiTildeResult noprof = xi_tilde(k2, Vec{1.0}, 2000);
  CHECK(noprof.verdict == CriterionVerdict::UNKNOWN);
  CHECK(noprof.partial > 0.0);
}

TEST_CASE("xi_tilde partial sums grow with the window") {
  auto k = normalize_kernel(make_ell_p(1, 2), poly_pref(2.0), 800);
  IsotropyProfile prof = fit_isotropy_profile(k.norm, Vec{1});
  double prev = 0;
  for (int R : {100, 300, 800}) {
    XiTildeResult xi = xi_tilde(k, Vec{1.0}, R, prof);
    CHECK(xi.partial >= prev - 1e-15);
    prev = xi.partial;
  }
}

TEST_CASE("xi_tilde diverges on a divergent criterion") {
  auto k = normalize_kernel(make_ell_p(1, 2), constant_pref(), 300);
  IsotropyProfile prof = fit_isotropy_profile(k.norm, Vec{1});
  XiTildeResult xi = xi_tilde(k, Vec{1.0}, 300, prof);
  CHECK(xi.verdict == CriterionVerdict::DIVERGENT);
  CHECK(std::isinf(xi.value));
}

TEST_CASE("condensation hypotheses per family") {
  HypothesesReport poly = check_condensation_hypotheses(poly_pref(3.0));
  CHECK(poly.H1);
  CHECK(poly.H2);
  CHECK(poly.a == doctest::Approx(1.0));
  CHECK(poly.c == doctest::Approx(8.0));

  HypothesesReport cst = check_condensation_hypotheses(constant_pref());
  CHECK(cst.H1);
  CHECK(cst.H2);
  CHECK(cst.c == doctest::Approx(1.0));

  HypothesesReport st = check_condensation_hypotheses(stretched_pref(1.0, 0.5));
  CHECK(st.H1);
  CHECK(st.H2);
  CHECK(st.a == doctest::Approx(0.5));
  CHECK(st.c == doctest::Approx(1.0));

  std::vector<double> dec(64), bump(64);
  dec[0] = bump[0] = 1.0;
  for (size_t i = 1; i < 64; ++i) dec[i] = bump[i] = std::pow(double(i), -2.0);
  bump[40] = 1.0;  // break monotonicity
  CHECK(check_condensation_hypotheses(table_pref(dec)).H1);
  CHECK_FALSE(check_condensation_hypotheses(table_pref(bump)).H1);
}

TEST_CASE("subexponential growth check") {
  CHECK(check_subexponential(poly_pref(2.0)).ok);
  CHECK(check_subexponential(stretched_pref(1.0, 0.5)).ok);
  CHECK(check_subexponential(constant_pref()).ok);
}

TEST_CASE("min norm on the ell_inf sphere") {
  CHECK(min_norm_on_linf_sphere(make_ell_p(2, 2)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(min_norm_on_linf_sphere(make_ell_p(2, 1)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(min_norm_on_linf_sphere(make_weighted_ell_p(1, 1, {0.7})) ==
        doctest::Approx(0.7).epsilon(1e-9));
  CHECK(min_norm_on_linf_sphere(make_composite_arc_facet()) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("prefactor validation") {
  CHECK_THROWS_AS(poly_pref(-0.5).validate(), ConfigError);
  CHECK_THROWS_AS(stretched_pref(1.0, 1.5).validate(), ConfigError);
  CHECK_THROWS_AS(stretched_pref(-1.0, 0.5).validate(), ConfigError);
  CHECK_THROWS_AS(table_pref({}).validate(), ConfigError);
  CHECK_THROWS_AS(table_pref({1.0, -2.0}).validate(), ConfigError);
}

}  // TEST_SUITE
