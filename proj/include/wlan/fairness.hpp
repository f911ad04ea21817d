#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wlan/config.hpp"
#include "wlan/model.hpp"

namespace wlan::fairness {

// Utility-fair allocation in u = log x coordinates, where log s_i is concave
// and the box constraints are trivial to project.
struct FairnessProblem {
  WlanParams params;
  std::vector<double> weights;  // all > 0
  double fair_alpha = 1.0;      // fairness exponent, >= 1 (1 = proportional)
  double u_floor = -30.0;       // lower clamp on u = log x

  // Caps must be positive: tau_bar_i = 0 forces s_i = 0 and the log-domain
  // objective has no finite value there.
  FairnessProblem(WlanParams params, std::vector<double> weights,
                  double fair_alpha, double u_floor = -30.0);
};

/// f~_{w,alpha}(z) = w*exp((1-alpha)z)/(1-alpha) for alpha > 1, w*z at
/// alpha = 1: the utility of a rate given by its log.  Rejects alpha < 1.
double utility(double z, double w, double fair_alpha);

struct ObjGrad {
  double value = 0.0;
  std::vector<double> gradient;
};

// value = sum_i w_i f~(log s_i(u)); analytic gradient via
// d log s_i/du_j = [i=j] - x_j*dX/dx_j / X.  u must lie in
// [u_floor, log min(x_bar, surrogate)] componentwise.
ObjGrad objective_and_gradient(std::span<const double> u,
                               const FairnessProblem& prob);

struct FairAllocation {
  AttemptVector tau_opt;
  ThroughputVector s_opt;
  double objective = 0.0;      // sum_i w_i f~(log s_i), unscaled
  double kkt_residual = 0.0;   // max |projected gradient| at the solution
                               // (internally scale-normalized; see solve_fair)
  int iterations = 0;
  std::vector<std::uint8_t> effectively_off;  // pinned at u_floor >= 100 iters
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iterations = 100000;
  std::optional<std::vector<double>> start;  // in u coordinates
};

struct NonConvergence : std::runtime_error {
  NonConvergence(const std::string& what, FairAllocation best_so_far)
      : std::runtime_error(what), best(std::move(best_so_far)) {}
  FairAllocation best;
};

// Projected gradient ascent with Armijo backtracking.  The transformed
// problem is concave over a box, so any KKT point is a global optimum.
// Internally the objective is rescaled by a constant (throughputs measured
// relative to a reference rate, which moves neither argmax nor, for
// alpha = 1, the gradient) so the 1e-8 stationarity test is meaningful at
// any payload/duration scale.  Throws NonConvergence past max_iterations.
FairAllocation solve_fair(const FairnessProblem& prob,
                          const SolveOptions& opts = {});

// Max-min fair rates.  The alpha = 16, unit-weight surrogate with one round
// of cap tightening initializes; an exact 1-D search over the
// equal-rate ray x_i = theta/L_i (where every max-min optimum of this
// single-collision-domain region lies) finishes.  kkt_residual reports the
// final bracket width of the 1-D search.
FairAllocation maxmin_fair(const WlanParams& p,
                           std::optional<std::vector<double>> tau_bar = {});

// Reads weights (default all-1) and fair_alpha (default 1) on top of the
// WlanParams keys.
FairnessProblem fairness_problem_from_config(const ConfigMap& cfg);

/// Solution as one CSV row: tau_1..n, s_1..n, objective, kkt_residual,
/// iterations (with header).
std::string allocation_csv(const FairAllocation& alloc);

}  // namespace wlan::fairness
