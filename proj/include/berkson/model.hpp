#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "berkson/kernel.hpp"
#include "berkson/rng.hpp"

namespace berkson {

struct ModelParams {
  double b0;
  double b1;
  double tau2;  // >= 0

  double s() const { return b1 * b1 * tau2; }
};

struct Observation {
  double x0;
  int y;  // 0 or 1
};

enum class DatasetKind { Functional, Structural };

struct Dataset {
  std::vector<Observation> rows;
  DatasetKind kind = DatasetKind::Functional;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> source_spec;
};

// Reduced parameter (b0, b1, s) with s = b1^2 tau^2, the quantity the
// data identify when tau^2 is unknown.
struct Theta {
  double b0;
  double b1;
  double s;
};

struct FitOptions {
  double grad_tol = 1e-8;
  int max_iter = 200;
  double param_limit = 1e3;  // separation guard on |b0|, |b1|
};

struct FitResult {
  Theta estimate;
  std::optional<double> tau2_known;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<std::string> warnings;
};

// P[Y = 1 | X0 = x0] = L_0(b0 + b1 x0, b1^2 tau^2).
inline double success_prob(const ModelParams& params, double x0,
                           const KernelConfig& cfg) {
  if (!(params.tau2 >= 0.0))
    throw std::domain_error("success_prob: tau2 must be >= 0");
  return smoothed_L(0, {params.b0 + params.b1 * x0, params.s()}, cfg);
}

struct SamplerSpec {
  enum class Dist { Normal, Uniform, Discrete };
  Dist dist;
  std::vector<double> params;   // normal: mean, sd; uniform: lo, hi
  std::vector<double> atoms;    // discrete only
  std::vector<double> weights;  // discrete only, same length as atoms
  std::size_t n = 0;
};

namespace detail {

inline double draw_regressor(const SamplerSpec& spec, Xoshiro256pp& rng) {
  switch (spec.dist) {
    case SamplerSpec::Dist::Normal:
      return spec.params[0] + spec.params[1] * rng.normal();
    case SamplerSpec::Dist::Uniform:
      return spec.params[0] + (spec.params[1] - spec.params[0]) * rng.uniform();
    case SamplerSpec::Dist::Discrete: {
      double total = 0.0;
      for (double w : spec.weights) total += w;
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
        u -= spec.weights[i];
        if (u < 0.0) return spec.atoms[i];
      }
      return spec.atoms.back();
    }
  }
  throw std::domain_error("simulate: unsupported distribution");
}

}  // namespace detail

// Functional simulation: fixed design, Y_n ~ Bernoulli(success_prob).
inline Dataset simulate(const ModelParams& params,
                        const std::vector<double>& design,
                        std::uint64_t seed, const KernelConfig& cfg) {
  if (design.empty()) throw std::domain_error("simulate: empty design");
  Xoshiro256pp rng(seed);
  Dataset data;
  data.kind = DatasetKind::Functional;
  data.seed = seed;
  data.rows.reserve(design.size());
  for (double x0 : design) {
    const double p = success_prob(params, x0, cfg);
    data.rows.push_back({x0, rng.bernoulli(p) ? 1 : 0});
  }
  return data;
}

// Structural simulation: per observation, draw x0 from the sampler spec
// and then Y ~ Bernoulli(success_prob), in that order.
inline Dataset simulate(const ModelParams& params, const SamplerSpec& spec,
                        std::uint64_t seed, const KernelConfig& cfg) {
  if (spec.n == 0) throw std::domain_error("simulate: n must be >= 1");
  if (spec.dist == SamplerSpec::Dist::Discrete &&
      (spec.atoms.empty() || spec.atoms.size() != spec.weights.size()))
    throw std::domain_error("simulate: bad discrete spec");
  if (spec.dist != SamplerSpec::Dist::Discrete && spec.params.size() != 2)
    throw std::domain_error("simulate: sampler needs two parameters");
  Xoshiro256pp rng(seed);
  Dataset data;
  data.kind = DatasetKind::Structural;
  data.seed = seed;
  data.rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x0 = detail::draw_regressor(spec, rng);
    const double p = success_prob(params, x0, cfg);
    data.rows.push_back({x0, rng.bernoulli(p) ? 1 : 0});
  }
  return data;
}

namespace detail {

struct Kahan {
  double sum = 0.0;
  double c = 0.0;
  void add(double term) {
    const double y = term - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// L_0, L_1, L_2 at one point in a single quadrature pass.
inline void smoothed_L012(double x, double v, const KernelConfig& cfg,
                          double& l0, double& l1, double& l2) {
  if (v == 0.0 || std::abs(x) / std::sqrt(1.0 + v) > cfg.tail_cut()) {
    l0 = smoothed_L(0, {x, v}, cfg);
    l1 = smoothed_L(1, {x, v}, cfg);
    l2 = smoothed_L(2, {x, v}, cfg);
    return;
  }
  const ConvGrid grid(v, cfg);
  Kahan a0, a1, a2;
  a0.add(logistic_deriv_closed(0, x));
  a1.add(logistic_deriv_closed(1, x));
  a2.add(logistic_deriv_closed(2, x));
  for (int i = 1; i <= grid.half; ++i) {
    const double t = i * grid.step;
    const double w = std::exp(-t * t / (2.0 * v));
    a0.add(w * (logistic_deriv_closed(0, x - t) +
                logistic_deriv_closed(0, x + t)));
    a1.add(w * (logistic_deriv_closed(1, x - t) +
                logistic_deriv_closed(1, x + t)));
    a2.add(w * (logistic_deriv_closed(2, x - t) +
                logistic_deriv_closed(2, x + t)));
  }
  const double inv_sqrt_2pi = 0.3989422804014327;
  const double norm = grid.step * inv_sqrt_2pi / std::sqrt(v);
  l0 = a0.sum * norm;
  l1 = a1.sum * norm;
  l2 = a2.sum * norm;
}

inline double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

inline void ll_and_score(const Theta& theta, const Dataset& data,
                         const KernelConfig& cfg, double* ll,
                         std::array<double, 3>* grad) {
  if (data.rows.empty())
    throw std::domain_error("log_likelihood: empty dataset");
  if (!(theta.s >= 0.0))
    throw std::domain_error("log_likelihood: s must be >= 0");
  Kahan acc, g0, g1, gs;
  for (const Observation& row : data.rows) {
    const double lin = theta.b0 + theta.b1 * row.x0;
    double l0, l1, l2;
    smoothed_L012(lin, theta.s, cfg, l0, l1, l2);
    if (ll) acc.add(row.y ? safe_log(l0) : safe_log(1.0 - l0));
    if (grad) {
      const double w = row.y ? 1.0 / std::max(l0, 1e-300)
                             : -1.0 / std::max(1.0 - l0, 1e-300);
      g0.add(w * l1);
      g1.add(w * row.x0 * l1);
      gs.add(w * 0.5 * l2);
    }
  }
  if (ll) *ll = acc.sum;
  if (grad) *grad = {g0.sum, g1.sum, gs.sum};
}

}  // namespace detail

// Bernoulli log-likelihood in the reduced parameterization (b0, b1, s).
inline double log_likelihood(const Theta& theta, const Dataset& data,
                             const KernelConfig& cfg) {
  double ll;
  detail::ll_and_score(theta, data, cfg, &ll, nullptr);
  return ll;
}

// Analytic gradient of log_likelihood: per row, d p/d b0 = L_1,
// d p/d b1 = x0 L_1, d p/d s = L_2 / 2.
inline std::array<double, 3> score(const Theta& theta, const Dataset& data,
                                   const KernelConfig& cfg) {
  std::array<double, 3> g;
  detail::ll_and_score(theta, data, cfg, nullptr, &g);
  return g;
}

namespace detail {

template <int N>
struct Objective {
  std::function<double(const std::array<double, N>&)> value;
  std::function<std::array<double, N>(const std::array<double, N>&)> grad;
};

template <int N>
inline bool solve_linear(std::array<std::array<double, N>, N> a,
                         std::array<double, N> b, std::array<double, N>& out) {
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int row = col + 1; row < N; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int row = col + 1; row < N; ++row) {
      const double f = a[row][col] / a[col][col];
      for (int k = col; k < N; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  for (int row = N - 1; row >= 0; --row) {
    double s = b[row];
    for (int k = row + 1; k < N; ++k) s -= a[row][k] * out[k];
    out[row] = s / a[row][row];
  }
  return true;
}

template <int N>
inline double norm_inf(const std::array<double, N>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Newton ascent with a finite-difference Hessian of the analytic
// gradient and Armijo backtracking. Every accepted step strictly
// increases the objective.
template <int N>
inline FitResult maximize(const Objective<N>& obj, std::array<double, N> x,
                          const FitOptions& opts) {
  FitResult result;
  double f = obj.value(x);
  std::array<double, N> g = obj.grad(x);
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    if (norm_inf<N>(g) <= opts.grad_tol) {
      result.converged = true;
      break;
    }
    if (std::abs(x[0]) > opts.param_limit || std::abs(x[1]) > opts.param_limit) {
      result.warnings.push_back(
          "parameters diverging; data may be separated");
      break;
    }

    std::array<std::array<double, N>, N> hess{};
    for (int j = 0; j < N; ++j) {
      const double h = 1e-5 * (1.0 + std::abs(x[j]));
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto gp = obj.grad(xp);
      const auto gm = obj.grad(xm);
      for (int i = 0; i < N; ++i) hess[i][j] = (gp[i] - gm[i]) / (2.0 * h);
    }
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) {
        const double m = 0.5 * (hess[i][j] + hess[j][i]);
        hess[i][j] = hess[j][i] = m;
      }

    std::array<double, N> dir{};
    std::array<double, N> neg_g = g;
    for (double& v : neg_g) v = -v;
    bool newton_ok = solve_linear<N>(hess, neg_g, dir);
    double slope = 0.0;
    if (newton_ok)
      for (int i = 0; i < N; ++i) slope += dir[i] * g[i];
    if (!newton_ok || slope <= 0.0) {
      dir = g;  // fall back to steepest ascent
      slope = 0.0;
      for (int i = 0; i < N; ++i) slope += g[i] * g[i];
    }

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      auto xn = x;
      for (int i = 0; i < N; ++i) xn[i] += t * dir[i];
      const double fn = obj.value(xn);
      if (std::isfinite(fn) && fn > f + 1e-4 * t * slope) {
        x = xn;
        f = fn;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // near the optimum the predicted gain underflows the roundoff in
      // the objective, so Armijo cannot certify an ascent; accept the
      // raw Newton step as long as it still shrinks the gradient
      bool rescued = false;
      // only for genuinely tiny steps: a large step that fails Armijo
      // (e.g. a separated likelihood creeping toward saturation) must
      // still terminate as non-converged
      if (newton_ok &&
          detail::norm_inf<N>(dir) <= 1e-4 * (1.0 + detail::norm_inf<N>(x))) {
        auto xn = x;
        for (int i = 0; i < N; ++i) xn[i] += dir[i];
        const auto gn = obj.grad(xn);
        if (detail::norm_inf<N>(gn) < detail::norm_inf<N>(g)) {
          x = xn;
          g = gn;
          f = obj.value(x);
          rescued = true;
        }
      }
      if (!rescued) break;  // no progress possible at machine precision
      continue;
    }
    g = obj.grad(x);
  }
  result.iterations = iter;
  result.loglik = f;
  result.gradient_norm = norm_inf<N>(g);
  if (!result.converged && result.gradient_norm <= opts.grad_tol)
    result.converged = true;
  result.estimate = {x[0], x[1], N > 2 ? x[2] * x[2] : 0.0};
  return result;
}

// True when every fitted probability is saturated toward its observed
// response: the likelihood has escaped to the boundary (separation) and
// a zero gradient there does not mean an interior maximum.
inline bool fitted_separated(const Theta& est, const Dataset& data,
                             const KernelConfig& cfg) {
  for (const Observation& row : data.rows) {
    const double p = smoothed_L(0, {est.b0 + est.b1 * row.x0, est.s}, cfg);
    if (row.y ? p < 1.0 - 1e-6 : p > 1e-6) return false;
  }
  return true;
}

inline bool all_responses_equal(const Dataset& data) {
  for (const Observation& row : data.rows)
    if (row.y != data.rows.front().y) return false;
  return true;
}

inline int distinct_design_points(const Dataset& data) {
  std::vector<double> xs;
  xs.reserve(data.rows.size());
  for (const Observation& row : data.rows) xs.push_back(row.x0);
  std::sort(xs.begin(), xs.end());
  return static_cast<int>(std::unique(xs.begin(), xs.end()) - xs.begin());
}

}  // namespace detail

// Ordinary logistic Newton fit (tau2 = 0), used to seed both fitters.
inline std::array<double, 2> naive_logistic_init(const Dataset& data,
                                                 const KernelConfig& cfg) {
  detail::Objective<2> obj;
  obj.value = [&](const std::array<double, 2>& p) {
    return log_likelihood({p[0], p[1], 0.0}, data, cfg);
  };
  obj.grad = [&](const std::array<double, 2>& p) {
    const auto g = score({p[0], p[1], 0.0}, data, cfg);
    return std::array<double, 2>{g[0], g[1]};
  };
  FitOptions opts;
  opts.grad_tol = 1e-6;
  opts.max_iter = 100;
  const FitResult r = detail::maximize<2>(obj, {0.0, 0.0}, opts);
  return {r.estimate.b0, r.estimate.b1};
}

// MLE of (b0, b1) for known tau^2, with s = b1^2 tau^2 substituted into
// the likelihood (the chain rule adds 2 b1 tau^2 ds-terms to the slope
// component of the gradient).
inline FitResult fit_known_tau(const Dataset& data, double tau2,
                               std::optional<std::array<double, 2>> init,
                               const FitOptions& opts,
                               const KernelConfig& cfg) {
  if (data.rows.empty()) throw std::domain_error("fit_known_tau: empty data");
  if (!(tau2 >= 0.0)) throw std::domain_error("fit_known_tau: tau2 < 0");

  std::vector<std::string> warnings;
  if (detail::distinct_design_points(data) < 2)
    warnings.push_back("fewer than 2 distinct design points; "
                       "identifiability condition not met");
  if (detail::all_responses_equal(data))
    warnings.push_back("all responses equal; likelihood is separated");

  detail::Objective<2> obj;
  obj.value = [&](const std::array<double, 2>& p) {
    return log_likelihood({p[0], p[1], p[1] * p[1] * tau2}, data, cfg);
  };
  obj.grad = [&](const std::array<double, 2>& p) {
    const auto g = score({p[0], p[1], p[1] * p[1] * tau2}, data, cfg);
    return std::array<double, 2>{g[0], g[1] + 2.0 * p[1] * tau2 * g[2]};
  };

  const std::array<double, 2> start =
      init ? *init : naive_logistic_init(data, cfg);
  FitResult result = detail::maximize<2>(obj, start, opts);
  result.estimate.s = result.estimate.b1 * result.estimate.b1 * tau2;
  result.tau2_known = tau2;
  if (result.converged &&
      detail::fitted_separated(result.estimate, data, cfg)) {
    result.converged = false;
    warnings.push_back("fit saturated every response; data may be separated");
  }
  result.warnings.insert(result.warnings.begin(), warnings.begin(),
                         warnings.end());
  return result;
}

// MLE of (b0, b1, s) with unknown tau^2. The constraint s >= 0 is
// enforced by optimizing over r with s = r^2. Only the reduced
// parameter s = b1^2 tau^2 is reported; tau^2 alone is not identified.
inline FitResult fit_unknown_tau(const Dataset& data,
                                 std::optional<Theta> init,
                                 const FitOptions& opts,
                                 const KernelConfig& cfg) {
  if (data.rows.empty()) throw std::domain_error("fit_unknown_tau: empty data");

  std::vector<std::string> warnings;
  if (detail::distinct_design_points(data) < 4)
    warnings.push_back("fewer than 4 distinct design points; "
                       "identifiability condition not met");
  if (detail::all_responses_equal(data))
    warnings.push_back("all responses equal; likelihood is separated");

  detail::Objective<3> obj;
  obj.value = [&](const std::array<double, 3>& p) {
    return log_likelihood({p[0], p[1], p[2] * p[2]}, data, cfg);
  };
  obj.grad = [&](const std::array<double, 3>& p) {
    const auto g = score({p[0], p[1], p[2] * p[2]}, data, cfg);
    return std::array<double, 3>{g[0], g[1], 2.0 * p[2] * g[2]};
  };

  std::array<double, 3> start;
  if (init) {
    start = {init->b0, init->b1, std::sqrt(std::max(init->s, 0.0))};
  } else {
    const auto naive = naive_logistic_init(data, cfg);
    start = {naive[0], naive[1], 0.3};  // keep r off the s = 0 boundary
  }
  if (start[2] == 0.0) start[2] = 0.3;

  FitResult result = detail::maximize<3>(obj, start, opts);
  if (result.converged &&
      detail::fitted_separated(result.estimate, data, cfg)) {
    result.converged = false;
    warnings.push_back("fit saturated every response; data may be separated");
  }
  result.warnings.insert(result.warnings.begin(), warnings.begin(),
                         warnings.end());
  return result;
}

}  // namespace berkson
