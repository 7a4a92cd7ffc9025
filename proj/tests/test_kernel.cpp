#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "berkson/kernel.hpp"
#include "oracle_utils.hpp"

using namespace berkson;

namespace {
const KernelConfig cfg;

bool close_rel(double a, double b, double rel, double floor = 1e-9) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}
}  // namespace

TEST_CASE("logistic_cdf basics") {
  CHECK(logistic_cdf(0.0) == 0.5);
  CHECK(std::abs(logistic_cdf(40.0) - (1.0 - std::exp(-40.0))) <= 1e-16);
  // e/(1+e), frozen from an extended-precision evaluation
  CHECK(logistic_cdf(1.0) == doctest::Approx(0.73105857863000487925).epsilon(1e-15));
  CHECK(logistic_cdf(-1.0) == doctest::Approx(1.0 - 0.73105857863000487925).epsilon(1e-15));
  CHECK_THROWS_AS(logistic_cdf(std::numeric_limits<double>::quiet_NaN()),
                  std::domain_error);
  CHECK_THROWS_AS(logistic_cdf(std::numeric_limits<double>::infinity()),
                  std::domain_error);
}

TEST_CASE("smoothed_L point values") {
  CHECK(smoothed_L(0, {0.0, 3.7}, cfg) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(smoothed_L(1, {0.0, 0.0}, cfg) == 0.25);
  CHECK(std::abs(smoothed_L(2, {0.0, 1.0}, cfg)) <= 1e-14);
  // frozen from an adaptive-quadrature evaluation of the defining integral
  CHECK(smoothed_L(0, {1.0, 1.0}, cfg) ==
        doctest::Approx(0.6967346701436832882).epsilon(1e-12));
  CHECK_THROWS_AS(smoothed_L(5, {0.0, 1.0}, cfg), std::domain_error);
  CHECK_THROWS_AS(smoothed_L(0, {0.0, -1.0}, cfg), std::domain_error);
}

TEST_CASE("smoothed_L agrees with adaptive Simpson oracle") {
  for (double x : {-3.0, -1.0, 0.5, 2.0, 7.0})
    for (double v : {0.25, 1.0, 4.0})
      CHECK(smoothed_L(0, {x, v}, cfg) ==
            doctest::Approx(oracle::L0(x, v)).epsilon(1e-10));
}

TEST_CASE("symmetry: L_k(-x,v) = (-1)^{k-1} L_k(x,v)") {
  for (int k = 1; k <= 4; ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    for (double x = 0.25; x <= 8.0; x += 0.75)
      for (double v : {0.0, 0.5, 2.0, 16.0})
        CHECK(std::abs(smoothed_L(k, {-x, v}, cfg) -
                       sign * smoothed_L(k, {x, v}, cfg)) <= 1e-12);
  }
}

TEST_CASE("CDF structure: L_0 increasing, L_1 positive") {
  for (double v : {0.0, 1.0, 9.0}) {
    double prev = -1.0;
    for (double x = -20.0; x <= 20.0; x += 0.5) {
      const double l0 = smoothed_L(0, {x, v}, cfg);
      CHECK(l0 > prev);
      CHECK(smoothed_L(1, {x, v}, cfg) > 0.0);
      prev = l0;
    }
  }
}

TEST_CASE("derivative chain in x: FD of L_k reproduces L_{k+1}") {
  const double h = 1e-5;
  for (int k = 0; k <= 3; ++k)
    for (double x : {-4.0, -1.5, 0.7, 2.0, 5.0})
      for (double v : {0.0, 0.25, 1.0, 4.0}) {
        const double exact = smoothed_L(k + 1, {x, v}, cfg);
        if (std::abs(exact) < 1e-6) continue;  // away from zeros
        const double fd = (smoothed_L(k, {x + h, v}, cfg) -
                           smoothed_L(k, {x - h, v}, cfg)) /
                          (2.0 * h);
        CHECK(close_rel(fd, exact, 1e-6));
      }
}

TEST_CASE("heat relation: FD in v reproduces dLdv") {
  const double h = 1e-4;
  for (int k = 0; k <= 2; ++k)
    for (double x : {-2.0, 0.9, 1.0, 3.0})
      for (double v : {0.5, 1.0, 4.0}) {
        const double exact = dLdv(k, {x, v}, cfg);
        if (std::abs(exact) < 1e-7) continue;
        const double fd = (smoothed_L(k, {x, v + h}, cfg) -
                           smoothed_L(k, {x, v - h}, cfg)) /
                          (2.0 * h);
        CHECK(close_rel(fd, exact, 1e-5));
      }
}

TEST_CASE("dLdv identities and domain") {
  CHECK(dLdv(0, {0.0, 1.0}, cfg) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(dLdv(2, {2.0, 0.5}, cfg) ==
        doctest::Approx(0.5 * smoothed_L(4, {2.0, 0.5}, cfg)));
  CHECK_THROWS_AS(dLdv(3, {0.0, 1.0}, cfg), std::domain_error);
}

TEST_CASE("boundedness on [-50,50] x [0,100]") {
  for (int k = 0; k <= 4; ++k)
    for (double x = -50.0; x <= 50.0; x += 5.0)
      for (double v : {0.0, 1.0, 25.0, 100.0})
        CHECK(std::isfinite(smoothed_L(k, {x, v}, cfg)));
}

TEST_CASE("inverse_mu") {
  CHECK(inverse_mu(0.5, 2.0, cfg) == 0.0);
  CHECK(std::abs(inverse_mu(logistic_cdf(1.3), 0.0, cfg) - 1.3) <=
        10.0 * cfg.inv_tol());
  // frozen from an extended-precision solve of L_0(mu, 1) = 0.8
  const double mu = inverse_mu(0.8, 1.0, cfg);
  CHECK(mu == doctest::Approx(1.6497033655153749).epsilon(1e-7));
  CHECK(std::abs(mu - oracle::invert_L0(0.8, 1.0)) <= 1e-7);
  CHECK_THROWS_AS(inverse_mu(0.0, 1.0, cfg), std::domain_error);
  CHECK_THROWS_AS(inverse_mu(1.0, 1.0, cfg), std::domain_error);
  CHECK_THROWS_AS(inverse_mu(-0.2, 1.0, cfg), std::domain_error);
}

TEST_CASE("inverse_mu sign and round trip") {
  for (double v : {0.0, 0.5, 3.0}) {
    for (double x = -10.0; x <= 10.0; x += 1.0) {
      const double z = smoothed_L(0, {x, v}, cfg);
      if (!(z > 0.0 && z < 1.0)) continue;
      const double mu = inverse_mu(z, v, cfg);
      CHECK(std::abs(smoothed_L(0, {mu, v}, cfg) - z) <= cfg.inv_tol());
      if (x != 0.0)
        CHECK((mu > 0.0) == (x > 0.0));
      CHECK(std::abs(mu - x) <= 10.0 * cfg.inv_tol());
    }
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(KernelConfig(8), std::domain_error);
  CHECK_THROWS_AS(KernelConfig(64, 1e-3), std::domain_error);
  CHECK_THROWS_AS(KernelConfig(64, 1e-9, -1.0), std::domain_error);
}
