#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace berkson {

// Gauss-Hermite rule for integrals of the form  int exp(-u^2) f(u) du.
// Nodes and weights are found by Newton iteration on the scaled Hermite
// recurrence, so no tabulated rules are needed and any order works.
class GaussHermite {
 public:
  explicit GaussHermite(int n) : nodes_(n), weights_(n) {
    if (n < 1) throw std::domain_error("GaussHermite: order must be >= 1");
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
      if (i == 0) {
        z = std::sqrt(2.0 * n + 1.0) -
            1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
      } else if (i == 1) {
        z -= 1.14 * std::pow(n, 0.426) / z;
      } else if (i == 2) {
        z = 1.86 * z - 0.86 * nodes_[0];
      } else if (i == 3) {
        z = 1.91 * z - 0.91 * nodes_[1];
      } else {
        z = 2.0 * z - nodes_[i - 2];
      }
      double pp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p1 = pim4;
        double p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
        }
        pp = std::sqrt(2.0 * n) * p2;
        const double dz = p1 / pp;
        z -= dz;
        if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) break;
      }
      nodes_[i] = z;
      nodes_[n - 1 - i] = -z;
      weights_[i] = 2.0 / (pp * pp);
      weights_[n - 1 - i] = weights_[i];
    }
    if (n % 2 == 1) nodes_[n / 2] = 0.0;
  }

  int order() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0, c = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double term = weights_[i] * f(nodes_[i]);
      const double y = term - c;
      const double t = acc + y;
      c = (t - acc) - y;
      acc = t;
    }
    return acc;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
inline void gk15(F&& f, double a, double b, double& result, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kKronrodNodes[i];
    double fv;
    if (i == 7) {
      fv = f(c);
      resk += kKronrodWeights[i] * fv;
      resg += kGaussWeights[3] * fv;
    } else {
      fv = f(c - dx) + f(c + dx);
      resk += kKronrodWeights[i] * fv;
      if (i % 2 == 1) resg += kGaussWeights[i / 2] * fv;
    }
  }
  result = resk * h;
  err = std::abs((resk - resg) * h);
}

template <class F>
inline double adapt_gk(F&& f, double a, double b, double tol, int depth) {
  double r, e;
  gk15(f, a, b, r, e);
  if (e <= tol || depth >= 48) return r;
  const double c = 0.5 * (a + b);
  return adapt_gk(f, a, c, 0.5 * tol, depth + 1) +
         adapt_gk(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a, b].
template <class F>
inline double integrate_adaptive(F&& f, double a, double b,
                                 double tol = 1e-12) {
  if (!(a < b)) throw std::domain_error("integrate_adaptive: empty interval");
  return detail::adapt_gk(f, a, b, tol, 0);
}

}  // namespace berkson
