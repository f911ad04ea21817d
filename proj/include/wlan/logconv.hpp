#pragma once

#include <span>
#include <string>
#include <vector>

#include "wlan/model.hpp"

namespace wlan::logconv {

enum class Branch { upper, lower };

// y_k = x1_k^alpha * x2_k^(1-alpha), in the log domain.  Components must be
// strictly positive: boundary points (tau in {0,1}) are limits of interior
// ones by continuity and are rejected rather than mixed.
std::vector<double> geometric_combination(std::span<const double> x1,
                                          std::span<const double> x2,
                                          double alpha);

/// F(delta) = delta * (a + K*sum(y_i/delta) + prod(1+y_i/delta) - 1).
/// F(1) coincides with x_denominator(y, p).
double lhs_f(double delta, std::span<const double> y, const WlanParams& p);

struct Derivatives {
  double first = 0.0;
  double second = 0.0;
};

// Analytic F' and F''.  F'' > 0 for n >= 2 with positive y; for n = 1 the
// function is affine and F'' = 0.
Derivatives lhs_f_derivatives(double delta, std::span<const double> y,
                              const WlanParams& p);

struct DeltaRoots {
  double lower = 0.0;
  double star = 0.0;   // unique minimizer of F (the root itself when n = 1)
  double upper = 0.0;  // always >= 1 for targets produced by witness mixing
  bool near_tangent = false;  // upper - lower < 1e-8 * star
};

// Both roots of F(delta) = target around the minimizer delta_star.
// Requires target >= F(delta_star); equal roots at tangency.  n = 1 is the
// affine special case with the single root (target - (K+1)*y1)/a.
DeltaRoots solve_delta(std::span<const double> y, double target,
                       const WlanParams& p);

// Record proving one log-midpoint achievable: throughput at t_star equals
// the componentwise geometric mean of the endpoint throughputs.
struct CombinationWitness {
  AttemptVector t1, t2;
  double alpha = 0.0;  // mixing weight (not the fairness exponent)
  std::vector<double> y;
  double target = 0.0;  // X(T1)^alpha * X(T2)^(1-alpha)
  double delta_lower = 0.0;
  double delta_star = 0.0;
  double delta_upper = 0.0;
  double delta = 0.0;  // root used for x_star (chosen branch)
  std::vector<double> x_star;
  AttemptVector t_star;
  double residual = 0.0;  // max_i |alpha*log s1_i + (1-alpha)*log s2_i - log s*_i|
  bool in_box = false;    // x_star <= x_bar componentwise
};

// Witness for alpha*log S(t1) + (1-alpha)*log S(t2).  branch=upper takes the
// root >= 1, so x_star <= y and capped endpoints stay capped.  Endpoints must
// be interior (all tau in (0,1)).
CombinationWitness midpoint_witness(const AttemptVector& t1,
                                    const AttemptVector& t2, double alpha,
                                    const WlanParams& p,
                                    Branch branch = Branch::upper);

struct SegmentRow {
  double alpha = 0.0;
  double delta_lower = 0.0;
  double delta_star = 0.0;
  double delta_upper = 0.0;
  double residual = 0.0;
  bool in_box = false;
};

struct SegmentReport {
  std::vector<SegmentRow> rows;
  double max_residual = 0.0;
  bool all_in_box = true;
  double tol = 0.0;
  bool passed = false;  // max_residual <= tol

  std::string to_csv() const;
};

// Witnesses at num_alphas evenly spaced mixing weights in [0,1].
SegmentReport verify_segment(const AttemptVector& t1, const AttemptVector& t2,
                             const WlanParams& p, int num_alphas, double tol);

}  // namespace wlan::logconv
