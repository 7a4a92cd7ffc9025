#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "berkson/quadrature.hpp"

namespace berkson {

// Configuration for evaluating the smoothed logistic function and its
// derivatives. quad_order is a floor on the number of quadrature nodes;
// the rule refines itself further as the smoothing variance grows.
class KernelConfig {
 public:
  explicit KernelConfig(int quad_order = 64, double inv_tol = 1e-9,
                        double tail_cut = 38.0)
      : quad_order_(quad_order), inv_tol_(inv_tol), tail_cut_(tail_cut) {
    if (quad_order < 16)
      throw std::domain_error("KernelConfig: quad_order must be >= 16");
    if (!(inv_tol > 0.0) || inv_tol > 1e-6)
      throw std::domain_error("KernelConfig: inv_tol must be in (0, 1e-6]");
    if (!(tail_cut > 0.0))
      throw std::domain_error("KernelConfig: tail_cut must be > 0");
  }

  int quad_order() const { return quad_order_; }
  double inv_tol() const { return inv_tol_; }
  double tail_cut() const { return tail_cut_; }

 private:
  int quad_order_;
  double inv_tol_;
  double tail_cut_;
};

struct KernelPoint {
  double x;  // argument on the linear-predictor scale
  double v;  // Gaussian smoothing variance, >= 0
};

// Logistic CDF e^x/(1+e^x), evaluated through e^{-|x|} so it never
// overflows.
inline double logistic_cdf(double x) {
  if (!std::isfinite(x)) throw std::domain_error("logistic_cdf: x not finite");
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace detail {

// Closed forms of the logistic CDF derivatives, written in t = e^{-|x|}
// so every power stays in [0, 1]. Parity handles x < 0:
// L_k(-x) = (-1)^{k-1} L_k(x) for k >= 1.
inline double logistic_deriv_closed(int k, double x) {
  const double ax = std::abs(x);
  const double t = std::exp(-ax);
  const double d = 1.0 + t;
  double val;
  switch (k) {
    case 0:
      return x >= 0.0 ? 1.0 / d : t / d;
    case 1:
      val = t / (d * d);
      return val;
    case 2:
      val = t * (t - 1.0) / (d * d * d);
      break;
    case 3:
      val = t * (t * t - 4.0 * t + 1.0) / (d * d * d * d);
      return val;
    case 4:
      val = t * (t - 1.0) * (t * t - 10.0 * t + 1.0) / (d * d * d * d * d);
      break;
    default:
      throw std::domain_error("smoothed_L: k must be in 0..4");
  }
  // k even: odd function of x
  return x >= 0.0 ? val : -val;
}

// Uniform quadrature grid for the Gaussian convolution over xi. The
// trapezoid rule converges geometrically for this analytic integrand;
// the step must resolve both the unit-scale logistic factor (poles at
// +-i pi, step <= 0.49 gives ~7e-18) and the Gaussian of width sqrt(v)
// (step <= 0.66 sqrt(v)). The span +-9 sqrt(v) truncates the Gaussian
// below 3e-18.
struct ConvGrid {
  double step;
  int half;  // nodes at 0, +-step, ..., +-half*step

  ConvGrid(double v, const KernelConfig& cfg) {
    const double sd = std::sqrt(v);
    const double span = 9.0 * sd;
    const double h_max = std::min(0.49, 0.66 * sd);
    half = std::max(static_cast<int>(std::ceil(span / h_max)),
                    (cfg.quad_order() + 1) / 2);
    step = span / half;
  }
};

}  // namespace detail

// L_k(x, v): k-th x-derivative of the Gaussian-smoothed logistic CDF
// E[logistic_cdf(x - xi)], xi ~ N(0, v). v = 0 uses the exact closed
// forms; v > 0 convolves the closed-form derivative with the Gaussian
// density on a uniform grid (differentiation happens under the
// expectation, so no numerical differentiation occurs).
inline double smoothed_L(int k, KernelPoint p, const KernelConfig& cfg) {
  if (k < 0 || k > 4) throw std::domain_error("smoothed_L: k must be in 0..4");
  if (!(p.v >= 0.0)) throw std::domain_error("smoothed_L: v must be >= 0");
  if (!std::isfinite(p.x)) throw std::domain_error("smoothed_L: x not finite");

  if (std::abs(p.x) / std::sqrt(1.0 + p.v) > cfg.tail_cut()) {
    if (k == 0) return p.x > 0.0 ? 1.0 : 0.0;
    return 0.0;
  }
  if (p.v == 0.0) return detail::logistic_deriv_closed(k, p.x);

  const detail::ConvGrid grid(p.v, cfg);
  double sum = detail::logistic_deriv_closed(k, p.x);
  for (int i = 1; i <= grid.half; ++i) {
    const double t = i * grid.step;
    const double w = std::exp(-t * t / (2.0 * p.v));
    sum += w * (detail::logistic_deriv_closed(k, p.x - t) +
                detail::logistic_deriv_closed(k, p.x + t));
  }
  const double inv_sqrt_2pi = 0.3989422804014327;
  return sum * grid.step * inv_sqrt_2pi / std::sqrt(p.v);
}

// d/dv L_k(x, v) = (1/2) L_{k+2}(x, v).
inline double dLdv(int k, KernelPoint p, const KernelConfig& cfg) {
  if (k < 0 || k > 2) throw std::domain_error("dLdv: k must be in 0..2");
  return 0.5 * smoothed_L(k + 2, p, cfg);
}

// Inverse of L_0(., v): returns mu with |L_0(mu, v) - z| <= inv_tol.
// Bisection narrows the bracket, then Newton with L_1 as derivative
// finishes; any Newton step leaving the bracket falls back to bisection.
inline double inverse_mu(double z, double v, const KernelConfig& cfg) {
  if (!(z > 0.0 && z < 1.0))
    throw std::domain_error("inverse_mu: z must be in (0,1)");
  if (!(v >= 0.0)) throw std::domain_error("inverse_mu: v must be >= 0");
  if (z == 0.5) return 0.0;

  const double half_width = cfg.tail_cut() * std::sqrt(1.0 + v);
  double lo = -half_width, hi = half_width;
  if (smoothed_L(0, {lo, v}, cfg) > z || smoothed_L(0, {hi, v}, cfg) < z)
    throw std::runtime_error("inverse_mu: z outside representable range");

  // sign(mu) = sign(z - 0.5): keep the bracket on the correct side
  if (z > 0.5) lo = 0.0; else hi = 0.0;

  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (smoothed_L(0, {mid, v}, cfg) < z) lo = mid; else hi = mid;
  }

  double mu = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = smoothed_L(0, {mu, v}, cfg) - z;
    const double d = smoothed_L(1, {mu, v}, cfg);
    // converge on both the probability scale and the argument scale
    if (std::abs(f) <= cfg.inv_tol() &&
        (d > 0.0 && std::abs(f / d) <= cfg.inv_tol()))
      return mu;
    if (f > 0.0) hi = mu; else lo = mu;
    double next = mu - f / d;
    if (!(d > 0.0) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (next == mu) return mu;  // at floating-point resolution
    mu = next;
  }
  throw std::runtime_error("inverse_mu: did not converge");
}

}  // namespace berkson
