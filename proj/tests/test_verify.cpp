#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "berkson/verify.hpp"

using namespace berkson;

namespace {
const KernelConfig cfg;

// third derivative by a fourth-order central stencil
double fd3(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 3 * h) - 8.0 * f(x - 2 * h) + 13.0 * f(x - h) -
          13.0 * f(x + h) + 8.0 * f(x + 2 * h) - f(x + 3 * h)) /
         (8.0 * h * h * h);
}
}  // namespace

TEST_CASE("key_expression point values") {
  CHECK(std::abs(key_expression(0.0, 1.0, cfg)) <= 1e-12);
  // sigma^2 = 0 closed form e^{3x}(1-e^x)(-2e^x)/(1+e^x)^9 at x = 1
  const double e = std::exp(1.0);
  const double closed = std::pow(e, 3.0) * (1.0 - e) * (-2.0 * e) /
                        std::pow(1.0 + e, 9.0);
  CHECK(closed > 0.0);
  CHECK(key_expression(1.0, 0.0, cfg) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(key_expression(2.0, 1.0, cfg) > 0.0);
}

TEST_CASE("key_expression is odd in x") {
  for (double x : {0.3, 1.0, 2.5, 6.0})
    for (double v : {0.0, 0.5, 2.0, 9.0})
      CHECK(std::abs(key_expression(-x, v, cfg) + key_expression(x, v, cfg)) <=
            1e-12);
}

TEST_CASE("sign(key_expression) = sign(x)") {
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0})
    for (double v : {0.0, 0.25, 1.0, 4.0, 16.0}) {
      CHECK(key_expression(x, v, cfg) > 0.0);
      CHECK(key_expression(-x, v, cfg) < 0.0);
    }
}

TEST_CASE("conditional_mu3") {
  CHECK(std::abs(conditional_mu3(0.0, 1.0, cfg)) <= 1e-10);
  CHECK(conditional_mu3(1.0, 1.0, cfg) > 0.0);
  CHECK_THROWS_AS(conditional_mu3(1.0, 0.0, cfg), std::domain_error);

  // cross identity: mu3 = v^3 * key_expression / L1^3
  const double v = 0.5;
  const double l1 = smoothed_L(1, {1.0, v}, cfg);
  const double expected =
      v * v * v * key_expression(1.0, v, cfg) / (l1 * l1 * l1);
  CHECK(conditional_mu3(1.0, v, cfg) ==
        doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("log_density_d3") {
  CHECK(std::abs(log_density_d3(0.0, 1.0, cfg)) <= 1e-12);
  CHECK_THROWS_AS(log_density_d3(1.0, 0.0, cfg), std::domain_error);

  const double got = log_density_d3(1.0, 1.0, cfg);
  const double fd = fd3(
      [&](double x) { return std::log(smoothed_L(1, {x, 1.0}, cfg)); }, 1.0,
      1e-2);
  CHECK(got == doctest::Approx(fd).epsilon(1e-4));
  CHECK(got == doctest::Approx(conditional_mu3(1.0, 1.0, cfg)).epsilon(1e-4));

  // algebraic restatement: d3 * L1^3 = key_expression
  const double l1 = smoothed_L(1, {1.5, 2.0}, cfg);
  CHECK(log_density_d3(1.5, 2.0, cfg) * l1 * l1 * l1 ==
        doctest::Approx(key_expression(1.5, 2.0, cfg)).epsilon(1e-13));
}

TEST_CASE("FContext: F' decreasing with a unique zero") {
  const FContext ctx(1.0, 1.0);
  CHECK(ctx.fprime(ctx.y0) == doctest::Approx(0.0).epsilon(1e-10));
  for (double dy : {-2.0, -0.5, 0.5, 2.0}) {
    const double y = ctx.y0 + dy;
    CHECK(((ctx.fprime(y) > 0.0) == (dy < 0.0)));
  }
  CHECK_THROWS_AS(FContext(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(FContext(1.0, 0.0), std::domain_error);
}

TEST_CASE("aux_F_check examples") {
  const FContext ctx(1.0, 1.0);
  CHECK(aux_F_check(ctx, ctx.y0 - 0.5).passed);
  CHECK_THROWS_AS(aux_F_check(ctx, ctx.y0 + 0.1), std::domain_error);

  // limit probe: strict signs survive down to y0 - 1e-6
  const AuxFReport probe = aux_F_check(ctx, ctx.y0 - 1e-6);
  CHECK(probe.y4 - ctx.y0 < 1e-4);
  CHECK(probe.passed);

  const FContext wide(0.1, 4.0);
  const AuxFReport far = aux_F_check(wide, wide.y0 - 3.0);
  CHECK(far.passed);
  CHECK(far.margin_value > 0.0);
  CHECK(far.margin_sum > 0.0);
}

TEST_CASE("certify: all default grids pass") {
  for (Lemma lemma : {Lemma::KeyInequality, Lemma::ThirdDerivIdentity,
                      Lemma::CurvatureSign, Lemma::AuxF}) {
    const CertReport rep = certify(lemma, default_grid(lemma), cfg);
    INFO("lemma = ", lemma_name(lemma),
         ", max_violation = ", rep.max_violation);
    CHECK(rep.passed);
    CHECK(rep.max_violation <= rep.tolerance);
  }
}

TEST_CASE("certify: empty grid is rejected") {
  GridSpec empty;
  CHECK_THROWS_AS(certify(Lemma::KeyInequality, empty, cfg),
                  std::domain_error);
}
