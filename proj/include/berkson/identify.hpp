#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "berkson/kernel.hpp"

namespace berkson {

// One side of the crossing equation L_0(b0 + b1 x, s).
struct CurveParams {
  double b0;
  double b1;
  double s;  // smoothing variance, >= 0; equals b1^2 tau^2 in the model
};

struct Interval {
  double lo;
  double hi;
};

struct EquationSpec {
  CurveParams left;
  CurveParams right;
  Interval window;
};

enum class CaseTag {
  EqualVariances,
  RightSlopeZero,
  BothSlopesZero,
  GeneralCase,
  IdentityExceptional,
};

struct SolutionReport {
  CaseTag case_tag;
  std::vector<double> roots;  // sorted, strictly increasing, within window
  bool is_identity = false;
  bool truncated = false;
  bool tangency = false;  // a refined bracket collapsed to a repeated root
};

enum class TheoremTag {
  FuncKnownTau,
  StructKnownTau,
  FuncUnknownTau,
  StructUnknownTau,
};

struct Verdict {
  bool identifiable;
  TheoremTag theorem;
  int support_points;
  std::string note;
};

// y(x) defined by L_0(y, s1) = L_0(x, s2); odd and strictly increasing.
inline double implicit_link(double x, double s1, double s2,
                            const KernelConfig& cfg) {
  if (!std::isfinite(x)) throw std::domain_error("implicit_link: x not finite");
  if (x == 0.0) return 0.0;
  const double z = smoothed_L(0, {x, s2}, cfg);
  if (!(z > 0.0 && z < 1.0)) {
    // beyond the tail cut both scales are saturated; the link is
    // asymptotically the identity up to a bounded shift
    return x;
  }
  return inverse_mu(z, s1, cfg);
}

// Sign of d^2y/dx^2 of the implicit link, with a dead zone around 0.
// Expected law: sign = sign(s2 - s1) * sign(x).
inline int link_curvature_sign(double x, double s1, double s2,
                               const KernelConfig& cfg,
                               double curvature_tol = 1e-12) {
  const double y = implicit_link(x, s1, s2, cfg);
  const double l1x = smoothed_L(1, {x, s2}, cfg);
  const double l2x = smoothed_L(2, {x, s2}, cfg);
  const double l1y = smoothed_L(1, {y, s1}, cfg);
  const double l2y = smoothed_L(2, {y, s1}, cfg);
  const double d2 =
      (l2x / (l1x * l1x) - l2y / (l1y * l1y)) * (l1x * l1x) / l1y;
  if (std::abs(d2) <= curvature_tol) return 0;
  return d2 > 0.0 ? 1 : -1;
}

// Default search window for the general case; wide enough that both
// curves are saturated at the ends for typical parameters.
inline Interval default_window(const CurveParams& a, const CurveParams& b) {
  double scale = 0.0;
  for (const CurveParams* c : {&a, &b}) {
    const double slope = std::max(std::abs(c->b1), 1e-6);
    scale = std::max(scale,
                     (std::abs(c->b0) + std::sqrt(1.0 + c->s)) / slope);
  }
  const double w = 50.0 * (1.0 + scale);
  return {-w, w};
}

namespace detail {

inline bool saturated(double value) {
  return value < 1e-12 || value > 1.0 - 1e-12;
}

// Gap of the crossing equation at x. When both curves are saturated on
// the same side the difference is pure roundoff (or an exact 0 from the
// tail clamp), so it is snapped to zero and flagged; such plateaus are
// asymptotic agreement, not roots.
struct GapValue {
  double g;
  bool snapped;
};

inline GapValue crossing_gap_ex(const EquationSpec& spec, double x,
                                const KernelConfig& cfg) {
  const double cl =
      smoothed_L(0, {spec.left.b0 + spec.left.b1 * x, spec.left.s}, cfg);
  const double cr =
      smoothed_L(0, {spec.right.b0 + spec.right.b1 * x, spec.right.s}, cfg);
  if ((cl < 1e-12 && cr < 1e-12) ||
      (cl > 1.0 - 1e-12 && cr > 1.0 - 1e-12))
    return {0.0, true};
  return {cl - cr, false};
}

inline double crossing_gap(const EquationSpec& spec, double x,
                           const KernelConfig& cfg) {
  return crossing_gap_ex(spec, x, cfg).g;
}

inline double refine_root(const EquationSpec& spec, double lo, double hi,
                          double glo, const KernelConfig& cfg) {
  for (int i = 0; i < 80 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = crossing_gap(spec, mid, cfg);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Classifies the crossing equation
//   L_0(b0l + b1l x, sl) = L_0(b0r + b1r x, sr)
// into its structural cases and finds all roots in the window. Outside
// the exceptional identities the equation has at most three solutions;
// finding more is treated as an internal error.
inline SolutionReport classify_equation(const EquationSpec& spec,
                                        const KernelConfig& cfg) {
  const CurveParams& l = spec.left;
  const CurveParams& r = spec.right;
  for (double p : {l.b0, l.b1, l.s, r.b0, r.b1, r.s})
    if (!std::isfinite(p))
      throw std::domain_error("classify_equation: non-finite parameter");
  if (!(l.s >= 0.0 && r.s >= 0.0))
    throw std::domain_error("classify_equation: s must be >= 0");
  if (!(spec.window.lo < spec.window.hi))
    throw std::domain_error("classify_equation: empty window");

  constexpr double kTol = 1e-12;
  SolutionReport rep;

  const bool same_params = std::abs(l.b0 - r.b0) <= kTol &&
                           std::abs(l.b1 - r.b1) <= kTol &&
                           std::abs(l.s - r.s) <= kTol;
  if (same_params) {
    rep.case_tag = CaseTag::IdentityExceptional;
    rep.is_identity = true;
    return rep;
  }

  const bool left_flat = l.b1 == 0.0;
  const bool right_flat = r.b1 == 0.0;

  if (left_flat && right_flat) {
    rep.case_tag = CaseTag::BothSlopesZero;
    const double pl = smoothed_L(0, {l.b0, l.s}, cfg);
    const double pr = smoothed_L(0, {r.b0, r.s}, cfg);
    // levels are only known to the inversion tolerance of inverse_mu,
    // so match them on that scale rather than at kTol
    rep.is_identity = std::abs(pl - pr) <= std::max(kTol, 10.0 * cfg.inv_tol());
    return rep;
  }

  if (std::abs(l.s - r.s) <= kTol) {
    rep.case_tag = CaseTag::EqualVariances;
    if (std::abs(l.b1 - r.b1) <= kTol) return rep;  // parallel, no root
    const double root = (r.b0 - l.b0) / (l.b1 - r.b1);
    if (root >= spec.window.lo && root <= spec.window.hi)
      rep.roots.push_back(root);
    return rep;
  }

  if (left_flat || right_flat) {
    rep.case_tag = CaseTag::RightSlopeZero;
    const CurveParams& flat = left_flat ? l : r;
    const CurveParams& sloped = left_flat ? r : l;
    const double level = smoothed_L(0, {flat.b0, flat.s}, cfg);
    const double root =
        (inverse_mu(level, sloped.s, cfg) - sloped.b0) / sloped.b1;
    if (root >= spec.window.lo && root <= spec.window.hi)
      rep.roots.push_back(root);
    return rep;
  }

  // General case: grid scan for sign changes, then bisection, with an
  // 8x rescan around each bracket to split near-tangential root pairs.
  rep.case_tag = CaseTag::GeneralCase;
  constexpr int kGrid = 4096;
  const double lo = spec.window.lo, hi = spec.window.hi;
  const double step = (hi - lo) / kGrid;

  for (double e : {lo, hi}) {
    const double cl = smoothed_L(0, {l.b0 + l.b1 * e, l.s}, cfg);
    const double cr = smoothed_L(0, {r.b0 + r.b1 * e, r.s}, cfg);
    if (!detail::saturated(cl) || !detail::saturated(cr)) rep.truncated = true;
  }

  detail::GapValue pg = detail::crossing_gap_ex(spec, lo, cfg);
  double px = lo;
  for (int i = 1; i <= kGrid; ++i) {
    const double x = lo + i * step;
    const detail::GapValue gv = detail::crossing_gap_ex(spec, x, cfg);
    const double g = gv.g, prev = pg.g;
    if (prev == 0.0) {
      if (!pg.snapped) rep.roots.push_back(px);
    } else if ((g < 0.0) != (prev < 0.0) && g != 0.0) {
      // rescan at 8x density inside the bracket
      double a = px, ga = prev;
      for (int j = 1; j <= 8; ++j) {
        const double b = px + j * step / 8.0;
        const double gb = j == 8 ? g : detail::crossing_gap(spec, b, cfg);
        if (gb == 0.0) {
          rep.roots.push_back(b);
          a = b;
          ga = -ga;  // treat the exact zero as a crossing
          continue;
        }
        if ((gb < 0.0) != (ga < 0.0))
          rep.roots.push_back(detail::refine_root(spec, a, b, ga, cfg));
        a = b;
        ga = gb;
      }
    }
    pg = gv;
    px = x;
  }

  std::sort(rep.roots.begin(), rep.roots.end());
  // merge numerically coincident roots (tangency reported once)
  std::vector<double> merged;
  for (double root : rep.roots) {
    if (!merged.empty() && root - merged.back() < 1e-9 * (1.0 + std::abs(root)))
      rep.tangency = true;
    else
      merged.push_back(root);
  }
  rep.roots = std::move(merged);

  if (rep.roots.size() > 3)
    throw std::logic_error(
        "classify_equation: more than three roots found; kernel accuracy bug");
  return rep;
}

namespace detail {

inline Verdict make_verdict(int distinct, bool tau_known, bool functional) {
  const int threshold = tau_known ? 2 : 4;
  Verdict v;
  v.support_points = distinct;
  v.identifiable = distinct >= threshold;
  if (functional)
    v.theorem = tau_known ? TheoremTag::FuncKnownTau : TheoremTag::FuncUnknownTau;
  else
    v.theorem = tau_known ? TheoremTag::StructKnownTau : TheoremTag::StructUnknownTau;
  if (v.identifiable) {
    v.note = tau_known
                 ? "sufficient condition met; (b0, b1) identifiable"
                 : "sufficient condition met; (b0, b1) and b1^2*tau^2 "
                   "identifiable";
  } else {
    v.note = "sufficient condition fails; no conclusion";
  }
  return v;
}

}  // namespace detail

// Identifiability verdict for a functional design (fixed x0 values).
inline Verdict verdict_functional(const std::vector<double>& design,
                                  bool tau_known) {
  if (design.empty())
    throw std::domain_error("verdict_functional: empty design");
  std::vector<double> d = design;
  for (double& x : d)
    if (x == 0.0) x = 0.0;  // canonicalize -0
  std::sort(d.begin(), d.end());
  const int distinct =
      static_cast<int>(std::unique(d.begin(), d.end()) - d.begin());
  return detail::make_verdict(distinct, tau_known, /*functional=*/true);
}

// Identifiability verdict for a structural model with the given support
// size; pass infinite = true for continuous regressor distributions.
inline Verdict verdict_structural(int support_count, bool tau_known,
                                  bool infinite = false) {
  if (!infinite && support_count < 1)
    throw std::domain_error("verdict_structural: support_count must be >= 1");
  const int distinct = infinite ? std::max(support_count, 4) : support_count;
  return detail::make_verdict(distinct, tau_known, /*functional=*/false);
}

}  // namespace berkson
