#include "wlan/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wlan/csv.hpp"

namespace wlan::fairness {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kOffIterations = 100;

struct Box {
  std::vector<double> lo, hi;
};

Box default_box(const FairnessProblem& prob) {
  Box box;
  const std::size_t n = static_cast<std::size_t>(prob.params.n);
  box.lo.assign(n, prob.u_floor);
  box.hi.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    box.hi[i] = std::log(std::min(prob.params.x_bar[i], kLargeXSurrogate));
  return box;
}

// Objective/gradient with throughputs measured relative to s_scale.  The
// shift (alpha = 1) or positive scaling (alpha > 1) of the objective leaves
// the argmax untouched; values are accumulated in long double so the Armijo
// test can still resolve gains near an 1e-8 stationary point.
struct Evaluator {
  const FairnessProblem& prob;
  double log_scale;  // log of the reference rate

  struct Result {
    double value;
    std::vector<double> gradient;
    std::vector<double> log_s;
    std::vector<double> x;
  };

  Result eval(std::span<const double> u) const {
    const WlanParams& p = prob.params;
    const std::size_t n = static_cast<std::size_t>(p.n);
    Result r;
    r.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.x[i] = std::exp(u[i]);
    const double denom = x_denominator(r.x, p);
    const double log_denom = std::log(denom);
    const double prod = prod_one_plus(r.x);

    r.log_s.resize(n);
    std::vector<double> marginal(n);  // w_i f~'(z_i)
    long double value = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      r.log_s[i] =
          u[i] + std::log(p.payloads[i] / p.t_c) - log_denom - log_scale;
      const double z = r.log_s[i];
      if (prob.fair_alpha == 1.0) {
        value += static_cast<long double>(prob.weights[i]) * z;
        marginal[i] = prob.weights[i];
      } else {
        const double e = std::exp((1.0 - prob.fair_alpha) * z);
        value += static_cast<long double>(prob.weights[i]) * e /
                 (1.0 - prob.fair_alpha);
        marginal[i] = prob.weights[i] * e;
      }
    }
    const double marginal_sum =
        std::accumulate(marginal.begin(), marginal.end(), 0.0);

    r.gradient.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      // d log s_i / du_j = [i == j] - x_j * dX/dx_j / X
      const double dx = p.big_k + prod / (1.0 + r.x[j]);
      r.gradient[j] = marginal[j] - r.x[j] * dx / denom * marginal_sum;
    }
    r.value = static_cast<double>(value);
    return r;
  }

  long double value_only(std::span<const double> u) const {
    const WlanParams& p = prob.params;
    const std::size_t n = static_cast<std::size_t>(p.n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(u[i]);
    const double log_denom = std::log(x_denominator(x, p));
    long double value = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const double z =
          u[i] + std::log(p.payloads[i] / p.t_c) - log_denom - log_scale;
      if (prob.fair_alpha == 1.0)
        value += static_cast<long double>(prob.weights[i]) * z;
      else
        value += static_cast<long double>(prob.weights[i]) *
                 std::exp((1.0 - prob.fair_alpha) * z) /
                 (1.0 - prob.fair_alpha);
    }
    return value;
  }
};

std::vector<double> clamp_to_box(std::vector<double> u, const Box& box) {
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = std::clamp(u[i], box.lo[i], box.hi[i]);
  return u;
}

double projected_gradient_norm(std::span<const double> u,
                               std::span<const double> g, const Box& box) {
  double norm = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double pg = g[i];
    if (u[i] >= box.hi[i] - 1e-12 && pg > 0.0) pg = 0.0;
    if (u[i] <= box.lo[i] + 1e-12 && pg < 0.0) pg = 0.0;
    norm = std::max(norm, std::abs(pg));
  }
  return norm;
}

FairAllocation finish_allocation(const FairnessProblem& prob,
                                 const std::vector<double>& u,
                                 double kkt_residual, int iterations,
                                 std::vector<std::uint8_t> off) {
  FairAllocation alloc;
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) x[i] = std::exp(u[i]);
  alloc.tau_opt = AttemptVector::from_x(std::move(x));
  alloc.s_opt = throughput(alloc.tau_opt, prob.params);
  alloc.objective = objective_and_gradient(u, prob).value;
  alloc.kkt_residual = kkt_residual;
  alloc.iterations = iterations;
  alloc.effectively_off = std::move(off);
  return alloc;
}

FairAllocation solve_in_box(const FairnessProblem& prob, const Box& box,
                            const SolveOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(prob.params.n);
  std::vector<double> u;
  if (opts.start) {
    if (opts.start->size() != n)
      throw std::invalid_argument("solve_fair: start has wrong length");
    u = clamp_to_box(*opts.start, box);
  } else {
    u.resize(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::min(0.0, box.hi[i]);
    u = clamp_to_box(std::move(u), box);
  }

  Evaluator ev{prob, 0.0};
  {
    // reference rate: smallest throughput at the start point
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(u[i]);
    const ThroughputVector s0 =
        throughput(AttemptVector::from_x(std::move(x)), prob.params);
    ev.log_scale = std::log(*std::min_element(s0.s.begin(), s0.s.end()));
  }

  std::vector<int> floor_streak(n, 0);
  auto cur = ev.eval(u);
  int iter = 0;
  double kkt = projected_gradient_norm(u, cur.gradient, box);
  bool stalled = false;

  while (kkt > opts.tol && iter < opts.max_iterations && !stalled) {
    ++iter;
    double t = 1.0;
    bool accepted = false;
    const long double f0 = ev.value_only(u);
    for (int ls = 0; ls < 60; ++ls) {
      std::vector<double> trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * cur.gradient[i];
      trial = clamp_to_box(std::move(trial), box);
      long double inner = 0.0L;
      for (std::size_t i = 0; i < n; ++i)
        inner += static_cast<long double>(cur.gradient[i]) *
                 (trial[i] - u[i]);
      if (inner <= 0.0L) break;  // every ascent direction is blocked
      const long double f_trial = ev.value_only(trial);
      if (f_trial >= f0 + kArmijo * inner) {
        u = std::move(trial);
        accepted = true;
        break;
      }
      t *= kBacktrack;
    }
    if (!accepted) {
      stalled = true;
      break;
    }
    cur = ev.eval(u);
    kkt = projected_gradient_norm(u, cur.gradient, box);
    for (std::size_t i = 0; i < n; ++i)
      floor_streak[i] =
          u[i] <= box.lo[i] + 1e-9 ? floor_streak[i] + 1 : 0;
  }

  std::vector<std::uint8_t> off(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    off[i] = floor_streak[i] >= kOffIterations ? 1 : 0;

  if (kkt > opts.tol)
    throw NonConvergence(
        stalled ? "solve_fair: line search stalled before reaching tolerance"
                : "solve_fair: iteration limit reached",
        finish_allocation(prob, u, kkt, iter, std::move(off)));
  return finish_allocation(prob, u, kkt, iter, std::move(off));
}

}  // namespace

FairnessProblem::FairnessProblem(WlanParams params_,
                                 std::vector<double> weights_,
                                 double fair_alpha_, double u_floor_)
    : params(std::move(params_)),
      weights(std::move(weights_)),
      fair_alpha(fair_alpha_),
      u_floor(u_floor_) {
  if (weights.size() != static_cast<std::size_t>(params.n))
    throw std::invalid_argument("FairnessProblem: weights must have length n");
  for (double w : weights)
    if (!(w > 0.0))
      throw std::invalid_argument("FairnessProblem: weights must be > 0");
  if (!(fair_alpha >= 1.0))
    throw std::invalid_argument(
        "FairnessProblem: fairness exponent must be >= 1");
  for (double xb : params.x_bar)
    if (!(xb > 0.0))
      throw std::invalid_argument(
          "FairnessProblem: tau_bar must be positive (a zero cap has no "
          "finite log-utility)");
  if (!(u_floor < 0.0))
    throw std::invalid_argument("FairnessProblem: u_floor must be < 0");
}

double utility(double z, double w, double fair_alpha) {
  if (!(fair_alpha >= 1.0))
    throw std::invalid_argument("utility: fairness exponent must be >= 1");
  if (!std::isfinite(z)) throw std::invalid_argument("utility: z must be finite");
  if (fair_alpha == 1.0) return w * z;
  return w * std::exp((1.0 - fair_alpha) * z) / (1.0 - fair_alpha);
}

ObjGrad objective_and_gradient(std::span<const double> u,
                               const FairnessProblem& prob) {
  const std::size_t n = static_cast<std::size_t>(prob.params.n);
  if (u.size() != n)
    throw std::invalid_argument("objective_and_gradient: u has wrong length");
  const Box box = default_box(prob);
  for (std::size_t i = 0; i < n; ++i)
    if (!(u[i] >= box.lo[i] - 1e-12 && u[i] <= box.hi[i] + 1e-12))
      throw std::invalid_argument(
          "objective_and_gradient: u outside [u_floor, log x_bar]");
  Evaluator ev{prob, 0.0};
  auto r = ev.eval(u);
  return {r.value, std::move(r.gradient)};
}

FairAllocation solve_fair(const FairnessProblem& prob,
                          const SolveOptions& opts) {
  return solve_in_box(prob, default_box(prob), opts);
}

namespace {

// t(theta): the common rate when every station runs at x_i = theta / L_i.
// log t is concave in log theta, so the golden-section search below is
// global.
double ray_rate(double theta, const WlanParams& p) {
  std::vector<double> x(static_cast<std::size_t>(p.n));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = theta / p.payloads[i];
  return theta / (p.t_c * x_denominator(x, p));
}

FairAllocation maxmin_on_ray(const WlanParams& p) {
  const std::size_t n = static_cast<std::size_t>(p.n);
  double theta_max = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    theta_max = std::min(theta_max,
                         std::min(p.x_bar[i], kLargeXSurrogate) * p.payloads[i]);

  double lo = theta_max * 1e-12, hi = theta_max;
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double m1 = hi - inv_phi * (hi - lo), m2 = lo + inv_phi * (hi - lo);
  double f1 = ray_rate(m1, p), f2 = ray_rate(m2, p);
  int iters = 0;
  while ((hi - lo) > 1e-12 * hi && iters < 500) {
    ++iters;
    if (f1 < f2) {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + inv_phi * (hi - lo);
      f2 = ray_rate(m2, p);
    } else {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - inv_phi * (hi - lo);
      f1 = ray_rate(m1, p);
    }
  }
  // the cap is the argmax whenever the rate is still rising there
  double theta = 0.5 * (lo + hi);
  if (ray_rate(theta_max, p) >= ray_rate(theta, p)) theta = theta_max;

  FairAllocation alloc;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::min(theta / p.payloads[i], std::min(p.x_bar[i], kLargeXSurrogate));
  alloc.tau_opt = AttemptVector::from_x(std::move(x));
  alloc.s_opt = throughput(alloc.tau_opt, p);
  alloc.objective = *std::min_element(alloc.s_opt.s.begin(), alloc.s_opt.s.end());
  alloc.kkt_residual = (hi - lo) / hi;
  alloc.iterations = iters;
  alloc.effectively_off.assign(n, 0);
  return alloc;
}

}  // namespace

FairAllocation maxmin_fair(const WlanParams& p,
                           std::optional<std::vector<double>> tau_bar) {
  const WlanParams params =
      tau_bar ? WlanParams(p.n, p.sigma, p.t_s, p.t_c, p.payloads, *tau_bar)
              : p;
  const std::size_t n = static_cast<std::size_t>(params.n);

  // Surrogate stage: alpha = 16, unit weights, then pin binding caps and
  // re-solve the rest once.
  FairnessProblem prob(params, std::vector<double>(n, 1.0), 16.0);
  Box box = default_box(prob);
  FairAllocation approx;
  try {
    approx = solve_in_box(prob, box, {});
    bool any_binding = false, all_binding = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double u_i = std::log(approx.tau_opt.x[i]);
      if (u_i >= box.hi[i] - 1e-9) {
        box.lo[i] = box.hi[i];
        any_binding = true;
      } else {
        all_binding = false;
      }
    }
    if (any_binding && !all_binding) approx = solve_in_box(prob, box, {});
  } catch (const NonConvergence& e) {
    approx = e.best;  // the exact stage below does not depend on it
  }

  // Exact stage: every max-min optimum of this region equalizes the rates
  // (min_i s_i only falls when any x_i moves off the common-rate ray), so a
  // 1-D search over the ray finishes the job; the surrogate result is kept
  // only if it somehow beats the ray (it cannot, but the check is free).
  FairAllocation exact = maxmin_on_ray(params);
  const double approx_min =
      approx.s_opt.s.empty()
          ? -std::numeric_limits<double>::infinity()
          : *std::min_element(approx.s_opt.s.begin(), approx.s_opt.s.end());
  if (approx_min > exact.objective) return approx;
  return exact;
}

FairnessProblem fairness_problem_from_config(const ConfigMap& cfg) {
  WlanParams params = wlan_params_from_config(cfg);
  std::vector<double> weights(static_cast<std::size_t>(params.n), 1.0);
  if (auto it = cfg.find("weights"); it != cfg.end()) {
    weights = parse_double_list(it->second, "weights");
    if (weights.size() == 1 && params.n > 1)
      weights.assign(static_cast<std::size_t>(params.n), weights[0]);
  }
  double fair_alpha = 1.0;
  if (auto it = cfg.find("fair_alpha"); it != cfg.end()) {
    std::size_t pos = 0;
    fair_alpha = std::stod(it->second, &pos);
    if (pos != it->second.size())
      throw std::invalid_argument("key 'fair_alpha': not a number");
  }
  return FairnessProblem(std::move(params), std::move(weights), fair_alpha);
}

std::string allocation_csv(const FairAllocation& alloc) {
  const std::size_t n = alloc.tau_opt.size();
  std::vector<std::string> head, cells;
  for (std::size_t i = 0; i < n; ++i) head.push_back("tau" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) head.push_back("s" + std::to_string(i + 1));
  head.insert(head.end(), {"objective", "kkt_residual", "iterations"});
  for (double tau : alloc.tau_opt.tau) cells.push_back(g12(tau));
  for (double s : alloc.s_opt.s) cells.push_back(g12(s));
  cells.push_back(g12(alloc.objective));
  cells.push_back(g12(alloc.kkt_residual));
  cells.push_back(std::to_string(alloc.iterations));
  return join_csv(head) + "\n" + join_csv(cells) + "\n";
}

}  // namespace wlan::fairness
