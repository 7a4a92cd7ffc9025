#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "berkson/identify.hpp"
#include "berkson/kernel.hpp"
#include "berkson/quadrature.hpp"
#include "berkson/rng.hpp"

namespace berkson {

// L4 L1^2 - 3 L3 L2 L1 + 2 L2^3, the quantity whose sign equals sign(x).
inline double key_expression(double x, double v, const KernelConfig& cfg) {
  const double l1 = smoothed_L(1, {x, v}, cfg);
  const double l2 = smoothed_L(2, {x, v}, cfg);
  const double l3 = smoothed_L(3, {x, v}, cfg);
  const double l4 = smoothed_L(4, {x, v}, cfg);
  return l4 * l1 * l1 - 3.0 * l3 * l2 * l1 + 2.0 * l2 * l2 * l2;
}

// Third derivative of ln L_1(x, v) in x, via the closed L_k combination.
inline double log_density_d3(double x, double v, const KernelConfig& cfg) {
  if (!(v > 0.0)) throw std::domain_error("log_density_d3: v must be > 0");
  const double l1 = smoothed_L(1, {x, v}, cfg);
  return key_expression(x, v, cfg) / (l1 * l1 * l1);
}

namespace detail {

inline double logistic_pdf(double y) {
  const double t = std::exp(-std::abs(y));
  const double d = 1.0 + t;
  return t / (d * d);
}

}  // namespace detail

// Third central moment of the logistic component eta given eta + xi = x,
// xi ~ N(0, v). Conditional moments are
//   m_k = E[eta^k e^{-(x-eta)^2/(2v)}] / E[e^{-(x-eta)^2/(2v)}],
// integrated against the logistic density with explicit truncation where
// the Gaussian weight has vanished.
inline double conditional_mu3(double x, double v, const KernelConfig& cfg) {
  (void)cfg;
  if (!(v > 0.0)) throw std::domain_error("conditional_mu3: v must be > 0");
  const double half_width = 40.0 * std::sqrt(v);
  const double a = x - half_width;
  const double b = x + half_width;
  auto moment = [&](int k) {
    return integrate_adaptive(
        [&](double y) {
          const double w =
              detail::logistic_pdf(y) * std::exp(-(y - x) * (y - x) / (2.0 * v));
          double p = w;
          for (int i = 0; i < k; ++i) p *= y;
          return p;
        },
        a, b, 1e-13);
  };
  const double m0 = moment(0);
  const double m1 = moment(1) / m0;
  const double m2 = moment(2) / m0;
  const double m3 = moment(3) / m0;
  return m3 - 3.0 * m2 * m1 + 2.0 * m1 * m1 * m1;
}

// F(y) = ln(e^y/(e^y+1)^2) - (y-x)^2/(2 sigma^2) for fixed x > 0, with
// y0 the unique zero of the strictly decreasing F'.
struct FContext {
  double x;
  double v;
  double y0;

  FContext(double x_, double v_) : x(x_), v(v_) {
    if (!(x > 0.0)) throw std::domain_error("FContext: x must be > 0");
    if (!(v > 0.0)) throw std::domain_error("FContext: v must be > 0");
    // F'(y) = 0 implies y in [x - v, x + v]
    double lo = x - v - 1.0, hi = x + v + 1.0;
    while (fprime(lo) < 0.0) lo -= v;
    while (fprime(hi) > 0.0) hi += v;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++i) {
      const double mid = 0.5 * (lo + hi);
      if (fprime(mid) > 0.0) lo = mid; else hi = mid;
    }
    y0 = 0.5 * (lo + hi);
  }

  double f(double y) const {
    const double ay = std::abs(y);
    return -ay - 2.0 * std::log1p(std::exp(-ay)) -
           (y - x) * (y - x) / (2.0 * v);
  }
  double fprime(double y) const {
    return 1.0 - 2.0 * logistic_cdf(y) - (y - x) / v;
  }
  double fsecond(double y) const {
    return -2.0 * detail::logistic_pdf(y) - 1.0 / v;
  }

  // (F')^{-1}(t) by bisection on the strictly decreasing F'
  double fprime_inverse(double t) const {
    double lo = y0, hi = y0;
    double width = 1.0;
    if (t < 0.0) {
      while (fprime(hi) > t) hi += (width *= 2.0);
    } else {
      while (fprime(lo) < t) lo -= (width *= 2.0);
    }
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++i) {
      const double mid = 0.5 * (lo + hi);
      if (fprime(mid) > t) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  }
};

struct AuxFReport {
  double y3 = 0.0;
  double y4 = 0.0;
  // strict-inequality margins; all must be positive
  double margin_order = 0.0;      // min(y0 - y3, y4 - y0)
  double margin_slope = 0.0;      // F'(y3)
  double margin_sum = 0.0;        // y3 + y4
  double margin_curvature = 0.0;  // F''(y4) - F''(y3)
  double margin_negative = 0.0;   // -F''(y4)
  double margin_value = 0.0;      // F(y3) - F(y4)
  bool passed = false;
};

// Checks the four auxiliary conclusions about F at the pair (y3, y4)
// with F'(y3) + F'(y4) = 0.
inline AuxFReport aux_F_check(const FContext& ctx, double y3) {
  if (!(y3 < ctx.y0))
    throw std::domain_error("aux_F_check: y3 must be < y0");
  AuxFReport rep;
  rep.y3 = y3;
  const double t = ctx.fprime(y3);
  rep.y4 = ctx.fprime_inverse(-t);
  rep.margin_order = std::min(ctx.y0 - y3, rep.y4 - ctx.y0);
  rep.margin_slope = t;
  rep.margin_sum = y3 + rep.y4;
  rep.margin_curvature = ctx.fsecond(rep.y4) - ctx.fsecond(y3);
  rep.margin_negative = -ctx.fsecond(rep.y4);
  // F(y3) - F(y4) = -int_{y3}^{y4} F'; integrating F' (which is O(t) on
  // this interval) avoids the catastrophic cancellation of differencing
  // two O(1) values of F when y3 is close to y0
  rep.margin_value = -integrate_adaptive(
      [&ctx](double y) { return ctx.fprime(y); }, y3, rep.y4,
      1e-14 * (rep.y4 - y3) * (1.0 + std::abs(t)));
  rep.passed = rep.margin_order > 0.0 && rep.margin_slope > 0.0 &&
               rep.margin_sum > 0.0 && rep.margin_curvature > 0.0 &&
               rep.margin_negative > 0.0 && rep.margin_value > 0.0;
  return rep;
}

enum class Lemma { KeyInequality, ThirdDerivIdentity, CurvatureSign, AuxF };

struct GridSpec {
  std::vector<double> xs;
  std::vector<double> vs;
  std::uint64_t seed = 20150707;  // CurvatureSign draws
  int draws = 200;
  std::vector<double> y3_offsets;  // AuxF, relative to y0 (negative)
};

inline GridSpec default_grid(Lemma lemma) {
  GridSpec g;
  switch (lemma) {
    case Lemma::KeyInequality:
      for (double a : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        g.xs.push_back(a);
        g.xs.push_back(-a);
      }
      g.xs.push_back(0.0);
      g.vs = {0.0, 0.25, 1.0, 4.0, 16.0};
      break;
    case Lemma::ThirdDerivIdentity:
      for (double x = -5.0; x <= 5.0 + 1e-9; x += 0.5) g.xs.push_back(x);
      g.vs = {0.5, 1.0, 2.0};
      break;
    case Lemma::CurvatureSign:
      break;
    case Lemma::AuxF:
      g.xs = {0.1, 0.5, 1.0, 2.0, 5.0};
      g.vs = {0.25, 1.0, 4.0};
      g.y3_offsets = {-3.0, -1.0, -0.1};
      break;
  }
  return g;
}

struct Offender {
  double x;
  double v;
  double extra;  // lemma-specific third coordinate
  double violation;
};

struct CertReport {
  Lemma lemma;
  std::string grid;
  double tolerance = 0.0;
  double max_violation = 0.0;
  bool passed = false;
  std::vector<Offender> offenders;  // worst points, up to 5
};

namespace detail {

inline void record(CertReport& rep, double x, double v, double extra,
                   double violation) {
  rep.max_violation = std::max(rep.max_violation, violation);
  if (violation > rep.tolerance) {
    rep.offenders.push_back({x, v, extra, violation});
    std::sort(rep.offenders.begin(), rep.offenders.end(),
              [](const Offender& a, const Offender& b) {
                return a.violation > b.violation;
              });
    if (rep.offenders.size() > 5) rep.offenders.resize(5);
  }
}

}  // namespace detail

// Sweeps one lemma over a grid and reports the worst violation.
// Failures are reported in the CertReport, never thrown.
inline CertReport certify(Lemma lemma, const GridSpec& grid,
                          const KernelConfig& cfg) {
  if (lemma != Lemma::CurvatureSign && (grid.xs.empty() || grid.vs.empty()))
    throw std::domain_error("certify: empty grid");

  CertReport rep;
  rep.lemma = lemma;

  switch (lemma) {
    case Lemma::KeyInequality: {
      rep.grid = "x in {0, +/-0.1..10} x v grid";
      rep.tolerance = 0.0;
      for (double v : grid.vs) {
        for (double x : grid.xs) {
          const double e = key_expression(x, v, cfg);
          double violation;
          if (x == 0.0) {
            violation = std::max(0.0, std::abs(e) - 1e-12);
          } else if (std::abs(x) < 0.1) {
            continue;  // near-zero band excluded from strict-sign checks
          } else {
            violation = (x > 0.0) == (e > 0.0) ? 0.0 : std::abs(e) + 1e-300;
          }
          detail::record(rep, x, v, 0.0, violation);
        }
      }
      break;
    }
    case Lemma::ThirdDerivIdentity: {
      rep.grid = "x in [-5,5] x v grid";
      rep.tolerance = 1e-4;
      for (double v : grid.vs) {
        for (double x : grid.xs) {
          const double a = log_density_d3(x, v, cfg);
          const double b = conditional_mu3(x, v, cfg) / (v * v * v);
          const double rel =
              std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
          detail::record(rep, x, v, 0.0, rel);
        }
      }
      break;
    }
    case Lemma::CurvatureSign: {
      rep.grid = "seeded random (x, s1, s2) draws";
      rep.tolerance = 0.0;
      Xoshiro256pp rng(grid.seed);
      for (int i = 0; i < grid.draws; ++i) {
        double x, s1, s2;
        do {
          x = -5.0 + 10.0 * rng.uniform();
        } while (std::abs(x) < 0.01);
        do {
          s1 = 9.0 * rng.uniform();
          s2 = 9.0 * rng.uniform();
        } while (std::abs(s1 - s2) <= 1e-3);
        const int got = link_curvature_sign(x, s1, s2, cfg);
        const int want = (s2 > s1 ? 1 : -1) * (x > 0.0 ? 1 : -1);
        detail::record(rep, x, s1, s2, got == want ? 0.0 : 1.0);
      }
      break;
    }
    case Lemma::AuxF: {
      rep.grid = "(x, v) grid x y3 offsets";
      rep.tolerance = 0.0;
      const std::vector<double>& offsets =
          grid.y3_offsets.empty() ? default_grid(Lemma::AuxF).y3_offsets
                                  : grid.y3_offsets;
      for (double v : grid.vs) {
        for (double x : grid.xs) {
          const FContext ctx(x, v);
          for (double off : offsets) {
            const AuxFReport r = aux_F_check(ctx, ctx.y0 + off);
            const double worst =
                std::min({r.margin_order, r.margin_slope, r.margin_sum,
                          r.margin_curvature, r.margin_negative,
                          r.margin_value});
            detail::record(rep, x, v, off, std::max(0.0, 1e-12 - worst));
          }
        }
      }
      break;
    }
  }

  rep.passed = rep.max_violation <= rep.tolerance;
  return rep;
}

inline std::string lemma_name(Lemma lemma) {
  switch (lemma) {
    case Lemma::KeyInequality: return "key-inequality";
    case Lemma::ThirdDerivIdentity: return "third-derivative";
    case Lemma::CurvatureSign: return "curvature-sign";
    case Lemma::AuxF: return "aux-f";
  }
  return "unknown";
}

}  // namespace berkson
