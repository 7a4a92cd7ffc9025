#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "berkson/identify.hpp"
#include "berkson/rng.hpp"
#include "oracle_utils.hpp"

using namespace berkson;

namespace {
const KernelConfig cfg;

// Independent root locator: dense sign scan of the crossing gap plus
// bisection, no case analysis.
std::vector<double> scan_roots(const EquationSpec& spec, int grid,
                               const KernelConfig& kc) {
  auto gap = [&](double x) {
    return smoothed_L(0, {spec.left.b0 + spec.left.b1 * x, spec.left.s}, kc) -
           smoothed_L(0, {spec.right.b0 + spec.right.b1 * x, spec.right.s}, kc);
  };
  std::vector<double> roots;
  const double step = (spec.window.hi - spec.window.lo) / grid;
  double px = spec.window.lo, pg = gap(px);
  for (int i = 1; i <= grid; ++i) {
    const double x = spec.window.lo + i * step;
    const double g = gap(x);
    if (pg == 0.0) {
      roots.push_back(px);
    } else if ((g < 0.0) != (pg < 0.0)) {
      double lo = px, hi = x, glo = pg;
      for (int j = 0; j < 80; ++j) {
        const double mid = 0.5 * (lo + hi);
        const double gm = gap(mid);
        if ((gm < 0.0) == (glo < 0.0)) { lo = mid; glo = gm; } else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    px = x;
    pg = g;
  }
  return roots;
}
}  // namespace

TEST_CASE("implicit_link fixed points and cross-check") {
  CHECK(implicit_link(0.0, 1.0, 4.0, cfg) == 0.0);
  for (double x0 : {-2.0, 0.3, 1.7})
    CHECK(implicit_link(x0, 1.5, 1.5, cfg) == doctest::Approx(x0).epsilon(1e-8));
  // frozen from an extended-precision solve of L_0(y, 0.5) = L_0(2, 2)
  const double y = implicit_link(2.0, 0.5, 2.0, cfg);
  CHECK(y == doctest::Approx(1.6375101106160887).epsilon(1e-7));
  const double z = oracle::L0(2.0, 2.0);
  CHECK(std::abs(oracle::L0(y, 0.5) - z) <= 1e-8);
}

TEST_CASE("implicit_link is odd and increasing") {
  for (double s1 : {0.25, 2.0})
    for (double s2 : {0.5, 4.0}) {
      double prev = -1e300;
      for (double x = -6.0; x <= 6.0; x += 0.5) {
        const double y = implicit_link(x, s1, s2, cfg);
        CHECK(y > prev);
        prev = y;
        CHECK(std::abs(implicit_link(-x, s1, s2, cfg) + y) <= 1e-10);
      }
    }
}

TEST_CASE("link_curvature_sign examples") {
  CHECK(link_curvature_sign(1.0, 0.25, 4.0, cfg) == 1);
  CHECK(link_curvature_sign(-1.0, 0.25, 4.0, cfg) == -1);
  CHECK(link_curvature_sign(1.5, 4.0, 4.0, cfg) == 0);
}

TEST_CASE("curvature law on random draws") {
  Xoshiro256pp rng(99);
  for (int i = 0; i < 200; ++i) {
    double x, s1, s2;
    do { x = -5.0 + 10.0 * rng.uniform(); } while (std::abs(x) < 1e-2);
    do {
      s1 = 9.0 * rng.uniform();
      s2 = 9.0 * rng.uniform();
    } while (std::abs(s1 - s2) < 1e-3);
    const int want = (s2 > s1 ? 1 : -1) * (x > 0 ? 1 : -1);
    CHECK(link_curvature_sign(x, s1, s2, cfg) == want);
  }
}

TEST_CASE("classify: exceptional identity") {
  EquationSpec spec{{0.3, 1.2, 0.8}, {0.3, 1.2, 0.8}, {-50.0, 50.0}};
  const auto rep = classify_equation(spec, cfg);
  CHECK(rep.case_tag == CaseTag::IdentityExceptional);
  CHECK(rep.is_identity);
  CHECK(rep.roots.empty());
}

TEST_CASE("classify: equal variances, linear root") {
  EquationSpec spec{{0.0, 1.0, 1.0}, {1.0, 2.0, 1.0}, {-50.0, 50.0}};
  const auto rep = classify_equation(spec, cfg);
  CHECK(rep.case_tag == CaseTag::EqualVariances);
  REQUIRE(rep.roots.size() == 1);
  CHECK(rep.roots[0] == doctest::Approx(-1.0).epsilon(1e-12));

  // parallel lines, distinct intercepts: no roots
  EquationSpec par{{0.0, 1.0, 1.0}, {0.5, 1.0, 1.0}, {-50.0, 50.0}};
  CHECK(classify_equation(par, cfg).roots.empty());
}

TEST_CASE("classify: one slope zero") {
  EquationSpec spec{{0.2, 1.5, 0.5}, {0.7, 0.0, 2.0}, {-50.0, 50.0}};
  const auto rep = classify_equation(spec, cfg);
  CHECK(rep.case_tag == CaseTag::RightSlopeZero);
  REQUIRE(rep.roots.size() == 1);
  const auto scanned = scan_roots(spec, 200000, cfg);
  REQUIRE(scanned.size() == 1);
  CHECK(std::abs(rep.roots[0] - scanned[0]) <= 1e-8);

  // zero-slope curve on the left is normalized to the same case
  EquationSpec flipped{{0.7, 0.0, 2.0}, {0.2, 1.5, 0.5}, {-50.0, 50.0}};
  const auto rep2 = classify_equation(flipped, cfg);
  REQUIRE(rep2.roots.size() == 1);
  CHECK(rep2.roots[0] == doctest::Approx(rep.roots[0]).epsilon(1e-10));
}

TEST_CASE("classify: both slopes zero") {
  EquationSpec empty{{0.0, 0.0, 1.0}, {1.0, 0.0, 1.0}, {-50.0, 50.0}};
  const auto rep = classify_equation(empty, cfg);
  CHECK(rep.case_tag == CaseTag::BothSlopesZero);
  CHECK_FALSE(rep.is_identity);
  CHECK(rep.roots.empty());

  // matched levels across different variances form an identity
  const double level = smoothed_L(0, {0.8, 2.0}, cfg);
  const double b0 = inverse_mu(level, 0.5, cfg);
  EquationSpec ident{{b0, 0.0, 0.5}, {0.8, 0.0, 2.0}, {-50.0, 50.0}};
  CHECK(classify_equation(ident, cfg).is_identity);
}

TEST_CASE("classify: general case versus fine-grid oracle") {
  EquationSpec spec{{0.0, 1.0, 0.25}, {0.1, 0.8, 2.0}, {-50.0, 50.0}};
  const auto rep = classify_equation(spec, cfg);
  CHECK(rep.case_tag == CaseTag::GeneralCase);
  const auto scanned = scan_roots(spec, 1000000, cfg);
  REQUIRE(rep.roots.size() == scanned.size());
  for (std::size_t i = 0; i < scanned.size(); ++i)
    CHECK(std::abs(rep.roots[i] - scanned[i]) <= 1e-8);
}

TEST_CASE("root-count bound on random specs") {
  Xoshiro256pp rng(2024);
  for (int i = 0; i < 200; ++i) {
    CurveParams l{-2.0 + 4.0 * rng.uniform(), -2.0 + 4.0 * rng.uniform(),
                  4.0 * rng.uniform()};
    CurveParams r{-2.0 + 4.0 * rng.uniform(), -2.0 + 4.0 * rng.uniform(),
                  4.0 * rng.uniform()};
    EquationSpec spec{l, r, default_window(l, r)};
    const auto rep = classify_equation(spec, cfg);
    if (!rep.is_identity) CHECK(rep.roots.size() <= 3);
  }
}

TEST_CASE("classify input validation") {
  EquationSpec bad{{0.0, 1.0, -1.0}, {0.0, 1.0, 1.0}, {-1.0, 1.0}};
  CHECK_THROWS_AS(classify_equation(bad, cfg), std::domain_error);
  EquationSpec nan{{std::nan(""), 1.0, 1.0}, {0.0, 1.0, 1.0}, {-1.0, 1.0}};
  CHECK_THROWS_AS(classify_equation(nan, cfg), std::domain_error);
  EquationSpec win{{0.0, 1.0, 1.0}, {0.0, 2.0, 1.0}, {1.0, -1.0}};
  CHECK_THROWS_AS(classify_equation(win, cfg), std::domain_error);
}

TEST_CASE("functional verdicts") {
  const auto degenerate = verdict_functional({1.0, 1.0, 1.0}, true);
  CHECK_FALSE(degenerate.identifiable);
  CHECK(degenerate.note.find("no conclusion") != std::string::npos);

  CHECK(verdict_functional({0.0, 1.0}, true).identifiable);
  CHECK_FALSE(verdict_functional({0.0, 1.0}, false).identifiable);
  CHECK(verdict_functional({0.0, 1.0, 2.0, 3.0}, false).identifiable);
  CHECK(verdict_functional({0.0, -0.0, 1.0}, true).support_points == 2);
  CHECK_THROWS_AS(verdict_functional({}, true), std::domain_error);
}

TEST_CASE("structural verdicts") {
  CHECK_FALSE(verdict_structural(1, true).identifiable);
  CHECK(verdict_structural(2, true).identifiable);
  CHECK(verdict_structural(4, false).identifiable);
  CHECK_FALSE(verdict_structural(3, false).identifiable);
  CHECK(verdict_structural(0, false, /*infinite=*/true).identifiable);
  CHECK_THROWS_AS(verdict_structural(0, true), std::domain_error);
}

TEST_CASE("verdict monotonicity in added design points") {
  Xoshiro256pp rng(5);
  std::vector<double> design;
  bool was_identifiable = false;
  for (int i = 0; i < 10; ++i) {
    design.push_back(i * 0.5);
    for (bool known : {true, false}) {
      const bool now = verdict_functional(design, known).identifiable;
      if (known) {
        CHECK((!was_identifiable || now));
        was_identifiable = now;
      }
    }
  }
}
