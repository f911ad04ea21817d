#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wlan/model.hpp"

namespace wlan::rateregion {

enum class Normalization { raw, phy_rate };

// Per-axis tau grid: 0 and the cap exactly, interior points uniform in
// log x between x_floor and x_knee (frontier curvature concentrates at
// extreme x).  Caps beyond the knee (notably tau_bar = 1, via the large-x
// surrogate) become a single endpoint past the log-spaced block.
struct GridSpec {
  int points_per_axis = 201;
  double x_floor = 1e-3;
  double x_knee = 1e3;
  std::size_t max_points = 10'000'000;
  // When nonempty, overrides the generated grid: one tau list per axis,
  // values in [0, tau_bar_i]; tau = 1 is mapped through the surrogate.
  std::vector<std::vector<double>> explicit_tau;
};

struct RegionPoint {
  AttemptVector t;
  ThroughputVector s;
};

struct RegionSample {
  std::vector<RegionPoint> points;  // row-major over axes_tau
  std::vector<std::vector<double>> axes_tau;
  Normalization normalization = Normalization::raw;
};

// Cartesian tau-grid over the capped domain, evaluated through throughput().
// Chunks are computed on `threads` workers and merged by grid index, so the
// result does not depend on the thread count.
RegionSample sample_region(const WlanParams& p, const GridSpec& grid,
                           Normalization norm = Normalization::raw,
                           int threads = 1);

// 1 where no other sample point componentwise dominates the point.
std::vector<std::uint8_t> pareto_mask(const RegionSample& sample);

RegionSample pareto_filter(const RegionSample& sample);

struct ProbeReport {
  int trials = 0;
  double max_residual = 0.0;
  bool all_in_box = true;
  bool witnesses_pass = true;  // residuals <= tol and all witnesses in box
  // Raw-region chord certificate: midpoint of the segment between the
  // max-s1 and max-s2 sample points, and how far short (in the worst
  // coordinate) every sample point falls of dominating it.
  std::vector<double> chord_a, chord_b, chord_mid;
  double margin = 0.0;
  double margin_threshold = 0.0;  // 10x grid resolution
  bool nonconvexity_certified = false;
};

// Random log-midpoints between interior sample points must be realized by
// witnesses; the chord certificate exhibits the raw region's non-convexity.
ProbeReport convexity_probe(const RegionSample& sample, const WlanParams& p,
                            int trials, double tol, std::uint64_t seed = 1);

struct FigureData {
  std::string region_csv;     // tau1,tau2,s1,s2,frontier
  std::string logregion_csv;  // log_s1,log_s2,frontier (interior rows only)
  std::string frontier_csv;   // frontier subset, tau/s columns
};

// CSV payloads from an existing sample.  logregion_csv is produced only for
// n = 2 (empty string otherwise).
FigureData figure_payloads(const RegionSample& sample,
                           const std::vector<std::uint8_t>& frontier);

// Two-station figure data at `resolution` points per axis, normalized by
// the PHY rate L/t_s.  Rejects n != 2.
FigureData figure_data(const WlanParams& p, int resolution);

}  // namespace wlan::rateregion
