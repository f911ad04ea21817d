#include "wlan/logconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wlan/csv.hpp"

namespace wlan::logconv {

namespace {

constexpr double kRootRelTol = 1e-12;   // on |F(delta) - target| / target
constexpr double kStarRelTol = 1e-13;   // bracket width when locating delta_star
constexpr double kBoxSlack = 1e-11;     // rounding slack on x_star <= x_bar

void check_y(std::span<const double> y, const WlanParams& p,
             const char* where) {
  if (y.size() != static_cast<std::size_t>(p.n))
    throw std::invalid_argument(std::string(where) + ": y has wrong length");
  for (double v : y)
    if (!(v > 0.0))
      throw std::invalid_argument(std::string(where) +
                                  ": y must be strictly positive");
}

double eval_f(double delta, std::span<const double> y, const WlanParams& p) {
  std::vector<double> scaled(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) scaled[i] = y[i] / delta;
  return delta * x_denominator(scaled, p);
}

// Safeguarded Newton for the root of fn (with derivative dfn) inside a
// bracket [lo, hi] with fn(lo) < 0 < fn(hi).  Falls back to bisection when
// the Newton step leaves the bracket or stops shrinking it.
template <typename Fn, typename DFn, typename Stop>
double newton_bisect(Fn fn, DFn dfn, double lo, double hi, Stop stop) {
  double x = 0.5 * (lo + hi);
  double fx = fn(x);
  double step_prev = hi - lo;
  for (int iter = 0; iter < 200; ++iter) {
    if (stop(x, fx, lo, hi)) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    const double d = dfn(x);
    double x_next = x - fx / d;
    double step = std::abs(x_next - x);
    const bool newton_ok = std::isfinite(x_next) && x_next > lo &&
                           x_next < hi && step < 0.5 * step_prev;
    if (!newton_ok) {
      x_next = 0.5 * (lo + hi);
      step = 0.5 * (hi - lo);
    }
    step_prev = step;
    x = x_next;
    fx = fn(x);
  }
  return x;
}

double locate_star(std::span<const double> y, const WlanParams& p) {
  auto d1 = [&](double d) { return lhs_f_derivatives(d, y, p).first; };
  auto d2 = [&](double d) { return lhs_f_derivatives(d, y, p).second; };
  // F' runs from -inf (delta -> 0) to a > 0 (delta -> inf) for n >= 2.
  double lo = 1.0, hi = 1.0;
  if (d1(1.0) < 0.0) {
    while (d1(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300)
        throw std::runtime_error("solve_delta: minimizer bracket overflow");
    }
  } else {
    while (d1(lo) >= 0.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300)
        throw std::runtime_error("solve_delta: minimizer bracket underflow");
    }
  }
  auto stop = [&](double x, double fx, double blo, double bhi) {
    return fx == 0.0 || (bhi - blo) <= kStarRelTol * x;
  };
  return newton_bisect(d1, d2, lo, hi, stop);
}

// One root of F(delta) = target on a monotone branch.  Brackets [lo, hi]
// such that F - target changes sign; `increasing` names the branch.
double solve_branch(std::span<const double> y, const WlanParams& p,
                    double target, double lo, double hi, bool increasing) {
  auto g = [&](double d) {
    double v = eval_f(d, y, p) - target;
    return increasing ? v : -v;
  };
  auto dg = [&](double d) {
    double v = lhs_f_derivatives(d, y, p).first;
    return increasing ? v : -v;
  };
  auto stop = [&](double x, double fx, double blo, double bhi) {
    (void)x;
    return std::abs(fx) <= kRootRelTol * target ||
           (bhi - blo) <= 4.0 * std::numeric_limits<double>::epsilon() * bhi;
  };
  return newton_bisect(g, dg, lo, hi, stop);
}

}  // namespace

std::vector<double> geometric_combination(std::span<const double> x1,
                                          std::span<const double> x2,
                                          double alpha) {
  if (x1.size() != x2.size())
    throw std::invalid_argument("geometric_combination: length mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("geometric_combination: alpha must be in [0,1]");
  for (std::size_t i = 0; i < x1.size(); ++i)
    if (!(x1[i] > 0.0) || !(x2[i] > 0.0))
      throw std::invalid_argument(
          "geometric_combination: boundary point (some x_i <= 0, i.e. tau_i "
          "in {0,1}); throughput is continuous there, mix interior points");
  std::vector<double> y(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    if (alpha == 0.0)
      y[i] = x2[i];
    else if (alpha == 1.0)
      y[i] = x1[i];
    else if (x1[i] == x2[i])
      y[i] = x1[i];
    else
      y[i] = std::exp(alpha * std::log(x1[i]) +
                      (1.0 - alpha) * std::log(x2[i]));
  }
  return y;
}

double lhs_f(double delta, std::span<const double> y, const WlanParams& p) {
  check_y(y, p, "lhs_f");
  if (!(delta > 0.0))
    throw std::invalid_argument("lhs_f: delta must be > 0");
  return eval_f(delta, y, p);
}

Derivatives lhs_f_derivatives(double delta, std::span<const double> y,
                              const WlanParams& p) {
  check_y(y, p, "lhs_f_derivatives");
  if (!(delta > 0.0))
    throw std::invalid_argument("lhs_f_derivatives: delta must be > 0");
  // With P = prod(1+y_i/delta), r_i = (y_i/delta)/(1+y_i/delta) and
  // w_i = y_i/(1+y_i/delta):
  //   F'  = a - 1 + P*(1 - sum r_i)
  //   F'' = P/delta^3 * ((sum w_i)^2 - sum w_i^2)
  std::vector<double> scaled(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) scaled[i] = y[i] / delta;
  const double prod = prod_one_plus(scaled);
  double sum_r = 0.0, sum_w = 0.0, sum_w2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double one_plus = 1.0 + scaled[i];
    sum_r += scaled[i] / one_plus;
    const double w = y[i] / one_plus;
    sum_w += w;
    sum_w2 += w * w;
  }
  Derivatives d;
  d.first = p.a - 1.0 + prod * (1.0 - sum_r);
  d.second = prod / (delta * delta * delta) * (sum_w * sum_w - sum_w2);
  return d;
}

DeltaRoots solve_delta(std::span<const double> y, double target,
                       const WlanParams& p) {
  check_y(y, p, "solve_delta");
  if (!(target > 0.0))
    throw std::invalid_argument("solve_delta: target must be > 0");

  DeltaRoots roots;
  if (p.n == 1) {
    // F is affine: a*delta + (K+1)*y1.
    const double root = (target - (p.big_k + 1.0) * y[0]) / p.a;
    if (!(root > 0.0))
      throw std::runtime_error("solve_delta: infeasible target (n = 1)");
    roots.lower = roots.star = roots.upper = root;
    return roots;
  }

  const double star = locate_star(y, p);
  const double f_star = eval_f(star, y, p);
  roots.star = star;
  if (target < f_star * (1.0 - 1e-13))
    throw std::runtime_error(
        "solve_delta: infeasible target below the minimum of F");
  if (target <= f_star * (1.0 + 1e-13)) {
    roots.lower = roots.upper = star;  // tangency
    roots.near_tangent = true;
    return roots;
  }

  // Upper root: F increases beyond star; grow the bracket by doubling from
  // max(1, star).
  double lo = star, hi = std::max(1.0, star);
  while (eval_f(hi, y, p) <= target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300)
      throw std::runtime_error("solve_delta: upper bracket overflow");
  }
  roots.upper = solve_branch(y, p, target, lo, hi, /*increasing=*/true);

  // Lower root: F decreases toward star; shrink by halving from min(1, star).
  hi = star;
  lo = std::min(1.0, star);
  while (eval_f(lo, y, p) <= target) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300)
      throw std::runtime_error("solve_delta: lower bracket underflow");
  }
  roots.lower = solve_branch(y, p, target, lo, hi, /*increasing=*/false);

  roots.near_tangent = (roots.upper - roots.lower) < 1e-8 * roots.star;
  return roots;
}

CombinationWitness midpoint_witness(const AttemptVector& t1,
                                    const AttemptVector& t2, double alpha,
                                    const WlanParams& p, Branch branch) {
  const std::size_t n = static_cast<std::size_t>(p.n);
  if (t1.size() != n || t2.size() != n)
    throw std::invalid_argument("midpoint_witness: endpoint length mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(t1.tau[i] > 0.0 && t1.tau[i] < 1.0 && t2.tau[i] > 0.0 &&
          t2.tau[i] < 1.0))
      throw std::invalid_argument(
          "midpoint_witness: endpoints must be interior (all tau in (0,1))");

  CombinationWitness w;
  w.t1 = t1;
  w.t2 = t2;
  w.alpha = alpha;
  w.y = geometric_combination(t1.x, t2.x, alpha);

  if (alpha == 0.0 || alpha == 1.0) {
    w.target = x_denominator(w.y, p);
  } else {
    const double x1d = x_denominator(t1.x, p);
    const double x2d = x_denominator(t2.x, p);
    w.target =
        std::exp(alpha * std::log(x1d) + (1.0 - alpha) * std::log(x2d));
  }

  const DeltaRoots roots = solve_delta(w.y, w.target, p);
  w.delta_lower = roots.lower;
  w.delta_star = roots.star;
  w.delta_upper = roots.upper;
  if (alpha == 0.0 || alpha == 1.0) {
    // F(1) equals the target exactly here; echo the endpoint.
    w.delta = 1.0;
    w.x_star = alpha == 0.0 ? t2.x : t1.x;
    w.t_star = alpha == 0.0 ? t2 : t1;
  } else {
    w.delta = branch == Branch::upper ? roots.upper : roots.lower;
    w.x_star.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.x_star[i] = w.y[i] / w.delta;
    w.t_star = AttemptVector::from_x(w.x_star);
  }

  const ThroughputVector s1 = throughput(t1, p);
  const ThroughputVector s2 = throughput(t2, p);
  const ThroughputVector ss = throughput(w.t_star, p);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    res = std::max(res, std::abs(alpha * s1.log_s[i] +
                                 (1.0 - alpha) * s2.log_s[i] - ss.log_s[i]));
  w.residual = res;

  w.in_box = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!(w.x_star[i] <= p.x_bar[i] * (1.0 + kBoxSlack))) {
      w.in_box = false;
      break;
    }
  return w;
}

SegmentReport verify_segment(const AttemptVector& t1, const AttemptVector& t2,
                             const WlanParams& p, int num_alphas, double tol) {
  if (num_alphas < 2)
    throw std::invalid_argument("verify_segment: need at least 2 alphas");
  SegmentReport report;
  report.tol = tol;
  for (int k = 0; k < num_alphas; ++k) {
    const double alpha = static_cast<double>(k) / (num_alphas - 1);
    const CombinationWitness w = midpoint_witness(t1, t2, alpha, p);
    report.rows.push_back({alpha, w.delta_lower, w.delta_star, w.delta_upper,
                           w.residual, w.in_box});
    report.max_residual = std::max(report.max_residual, w.residual);
    report.all_in_box = report.all_in_box && w.in_box;
  }
  report.passed = report.max_residual <= tol;
  return report;
}

std::string SegmentReport::to_csv() const {
  std::string out = "alpha,delta_lower,delta_star,delta_upper,residual,in_box\n";
  for (const SegmentRow& r : rows) {
    out += join_csv({g12(r.alpha), g12(r.delta_lower), g12(r.delta_star),
                     g12(r.delta_upper), g12(r.residual),
                     r.in_box ? "1" : "0"});
    out += '\n';
  }
  return out;
}

}  // namespace wlan::logconv
