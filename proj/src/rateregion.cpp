#include "wlan/rateregion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "wlan/csv.hpp"
#include "wlan/logconv.hpp"

namespace wlan::rateregion {

namespace {

std::vector<double> axis_tau(double tau_bar, const GridSpec& grid) {
  if (tau_bar <= 0.0) return {0.0};
  const double x_cap =
      tau_bar >= 1.0 ? kLargeXSurrogate : tau_to_x(tau_bar);
  const int m = grid.points_per_axis;
  const double hi = std::min(x_cap, grid.x_knee);
  const double lo = std::min(grid.x_floor, hi / 100.0);
  const bool cap_beyond_knee = x_cap > hi;
  const int interior = m - 1 - (cap_beyond_knee ? 1 : 0);

  std::vector<double> taus;
  taus.reserve(static_cast<std::size_t>(m));
  taus.push_back(0.0);
  if (interior == 1) {
    taus.push_back(x_to_tau(hi));
  } else {
    const double step = std::log(hi / lo) / (interior - 1);
    for (int k = 0; k < interior; ++k)
      taus.push_back(x_to_tau(lo * std::exp(step * k)));
  }
  if (cap_beyond_knee) taus.push_back(x_to_tau(x_cap));
  // the cap endpoint exactly (up to the x round trip at the surrogate)
  if (tau_bar < 1.0) taus.back() = tau_bar;
  return taus;
}

void normalize_phy(ThroughputVector& s, const WlanParams& p) {
  for (std::size_t i = 0; i < s.s.size(); ++i) {
    const double phy = p.payloads[i] / p.t_s;
    s.s[i] /= phy;
    s.log_s[i] -= std::log(phy);
  }
}

}  // namespace

RegionSample sample_region(const WlanParams& p, const GridSpec& grid,
                           Normalization norm, int threads) {
  const std::size_t n = static_cast<std::size_t>(p.n);
  RegionSample sample;
  sample.normalization = norm;

  if (!grid.explicit_tau.empty()) {
    if (grid.explicit_tau.size() != n)
      throw std::invalid_argument("sample_region: explicit grid needs one tau "
                                  "list per station");
    for (std::size_t i = 0; i < n; ++i) {
      if (grid.explicit_tau[i].size() < 2)
        throw std::invalid_argument(
            "sample_region: need >= 2 grid points per axis");
      std::vector<double> axis;
      for (double tau : grid.explicit_tau[i]) {
        if (!(tau >= 0.0 && tau <= p.tau_bar[i]))
          throw std::invalid_argument(
              "sample_region: explicit tau outside [0, tau_bar]");
        axis.push_back(tau == 1.0 ? x_to_tau(kLargeXSurrogate) : tau);
      }
      sample.axes_tau.push_back(std::move(axis));
    }
  } else {
    if (grid.points_per_axis < 2)
      throw std::invalid_argument(
          "sample_region: need >= 2 grid points per axis");
    for (std::size_t i = 0; i < n; ++i)
      sample.axes_tau.push_back(axis_tau(p.tau_bar[i], grid));
  }

  std::size_t total = 1;
  for (const auto& axis : sample.axes_tau) {
    if (axis.size() > grid.max_points / total)
      throw std::invalid_argument("sample_region: grid exceeds max_points");
    total *= axis.size();
  }
  sample.points.resize(total);

  auto worker = [&](std::size_t begin, std::size_t end) {
    std::vector<double> tau(n);
    for (std::size_t idx = begin; idx < end; ++idx) {
      std::size_t rest = idx;
      for (std::size_t d = n; d-- > 0;) {
        const auto& axis = sample.axes_tau[d];
        tau[d] = axis[rest % axis.size()];
        rest /= axis.size();
      }
      RegionPoint& pt = sample.points[idx];
      pt.t = AttemptVector::from_tau(tau);
      pt.s = throughput(pt.t, p);
      if (norm == Normalization::phy_rate) normalize_phy(pt.s, p);
    }
  };

  const int nthreads = std::clamp(threads, 1, 64);
  if (nthreads == 1 || total < 1024) {
    worker(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t begin = chunk * t;
      if (begin >= total) break;
      pool.emplace_back(worker, begin, std::min(total, begin + chunk));
    }
    for (auto& th : pool) th.join();
  }
  return sample;
}

std::vector<std::uint8_t> pareto_mask(const RegionSample& sample) {
  const std::size_t m = sample.points.size();
  std::vector<std::uint8_t> keep(m, 1);
  if (m == 0) return keep;
  const std::size_t n = sample.points[0].s.s.size();

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);

  if (n == 2) {
    // Sweep in (s1 desc, s2 desc); a point is dominated by anything with
    // strictly larger s1 and >= s2, or equal s1 and strictly larger s2.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& sa = sample.points[a].s.s;
      const auto& sb = sample.points[b].s.s;
      if (sa[0] != sb[0]) return sa[0] > sb[0];
      return sa[1] > sb[1];
    });
    double best_s2_strict = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < m) {
      std::size_t j = i;
      const double s1 = sample.points[order[i]].s.s[0];
      double group_max_s2 = -std::numeric_limits<double>::infinity();
      while (j < m && sample.points[order[j]].s.s[0] == s1) {
        group_max_s2 = std::max(group_max_s2, sample.points[order[j]].s.s[1]);
        ++j;
      }
      for (std::size_t k = i; k < j; ++k) {
        const double s2 = sample.points[order[k]].s.s[1];
        if (s2 <= best_s2_strict || s2 < group_max_s2) keep[order[k]] = 0;
      }
      best_s2_strict = std::max(best_s2_strict, group_max_s2);
      i = j;
    }
    return keep;
  }

  // General n: scan in decreasing coordinate sum; only already-kept points
  // can dominate later ones.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = sample.points[a].s.s;
    const auto& sb = sample.points[b].s.s;
    return std::accumulate(sa.begin(), sa.end(), 0.0) >
           std::accumulate(sb.begin(), sb.end(), 0.0);
  });
  std::vector<std::size_t> frontier;
  for (std::size_t idx : order) {
    const auto& s = sample.points[idx].s.s;
    bool dominated = false;
    for (std::size_t f : frontier) {
      const auto& sf = sample.points[f].s.s;
      bool all_ge = true, any_gt = false;
      for (std::size_t d = 0; d < n; ++d) {
        if (sf[d] < s[d]) {
          all_ge = false;
          break;
        }
        if (sf[d] > s[d]) any_gt = true;
      }
      if (all_ge && any_gt) {
        dominated = true;
        break;
      }
    }
    if (dominated)
      keep[idx] = 0;
    else
      frontier.push_back(idx);
  }
  return keep;
}

RegionSample pareto_filter(const RegionSample& sample) {
  if (sample.points.empty())
    throw std::invalid_argument("pareto_filter: empty sample");
  const auto keep = pareto_mask(sample);
  RegionSample out;
  out.axes_tau = sample.axes_tau;
  out.normalization = sample.normalization;
  for (std::size_t i = 0; i < sample.points.size(); ++i)
    if (keep[i]) out.points.push_back(sample.points[i]);
  return out;
}

ProbeReport convexity_probe(const RegionSample& sample, const WlanParams& p,
                            int trials, double tol, std::uint64_t seed) {
  if (trials < 0) throw std::invalid_argument("convexity_probe: trials < 0");
  ProbeReport report;
  report.trials = trials;

  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const auto& tau = sample.points[i].t.tau;
    if (std::all_of(tau.begin(), tau.end(),
                    [](double t) { return t > 0.0 && t < 1.0; }))
      interior.push_back(i);
  }
  if (trials > 0 && interior.size() < 2)
    throw std::invalid_argument("convexity_probe: no interior sample points");

  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const std::size_t i = interior[rng() % interior.size()];
    const std::size_t j = interior[rng() % interior.size()];
    const double alpha = (rng() >> 11) * 0x1.0p-53;
    const auto w = logconv::midpoint_witness(sample.points[i].t,
                                             sample.points[j].t, alpha, p);
    report.max_residual = std::max(report.max_residual, w.residual);
    report.all_in_box = report.all_in_box && w.in_box;
  }
  report.witnesses_pass =
      report.max_residual <= tol && report.all_in_box;

  // Chord certificate between the extreme points of the first two axes.
  const std::size_t n = static_cast<std::size_t>(p.n);
  if (n >= 2 && !sample.points.empty()) {
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
      if (sample.points[i].s.s[0] > sample.points[ia].s.s[0]) ia = i;
      if (sample.points[i].s.s[1] > sample.points[ib].s.s[1]) ib = i;
    }
    report.chord_a = sample.points[ia].s.s;
    report.chord_b = sample.points[ib].s.s;
    report.chord_mid.resize(n);
    for (std::size_t d = 0; d < n; ++d)
      report.chord_mid[d] = 0.5 * (report.chord_a[d] + report.chord_b[d]);

    double best = -std::numeric_limits<double>::infinity();
    for (const RegionPoint& pt : sample.points) {
      double shortfall = std::numeric_limits<double>::infinity();
      for (std::size_t d = 0; d < n; ++d)
        shortfall = std::min(shortfall, pt.s.s[d] - report.chord_mid[d]);
      best = std::max(best, shortfall);
    }
    report.margin = -best;  // > 0: nothing sampled dominates the midpoint

    double grid_res = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      double s_min = std::numeric_limits<double>::infinity(), s_max = 0.0;
      for (const RegionPoint& pt : sample.points) {
        s_min = std::min(s_min, pt.s.s[d]);
        s_max = std::max(s_max, pt.s.s[d]);
      }
      const double axis_pts =
          static_cast<double>(std::max<std::size_t>(sample.axes_tau.empty()
                                                        ? 2
                                                        : sample.axes_tau[d].size(),
                                                    2));
      grid_res = std::max(grid_res, (s_max - s_min) / (axis_pts - 1.0));
    }
    report.margin_threshold = 10.0 * grid_res;
    report.nonconvexity_certified = report.margin > report.margin_threshold;
  }
  return report;
}

FigureData figure_payloads(const RegionSample& sample,
                           const std::vector<std::uint8_t>& frontier) {
  if (frontier.size() != sample.points.size())
    throw std::invalid_argument("figure_payloads: mask length mismatch");
  const std::size_t n =
      sample.points.empty() ? 0 : sample.points[0].t.tau.size();

  FigureData out;
  std::vector<std::string> head;
  for (std::size_t d = 0; d < n; ++d) head.push_back("tau" + std::to_string(d + 1));
  for (std::size_t d = 0; d < n; ++d) head.push_back("s" + std::to_string(d + 1));
  const std::string tau_s_header = join_csv(head);
  out.region_csv = tau_s_header + ",frontier\n";
  out.frontier_csv = tau_s_header + "\n";
  if (n == 2) out.logregion_csv = "log_s1,log_s2,frontier\n";

  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const RegionPoint& pt = sample.points[i];
    std::vector<std::string> cells;
    for (double tau : pt.t.tau) cells.push_back(g12(tau));
    for (double s : pt.s.s) cells.push_back(g12(s));
    const std::string row = join_csv(cells);
    out.region_csv += row + (frontier[i] ? ",1\n" : ",0\n");
    if (frontier[i]) out.frontier_csv += row + "\n";
    if (n == 2 && pt.t.tau[0] > 0.0 && pt.t.tau[1] > 0.0) {
      out.logregion_csv += join_csv({g12(pt.s.log_s[0]), g12(pt.s.log_s[1]),
                                     frontier[i] ? "1" : "0"});
      out.logregion_csv += '\n';
    }
  }
  return out;
}

FigureData figure_data(const WlanParams& p, int resolution) {
  if (p.n != 2)
    throw std::invalid_argument("figure_data: defined for n = 2 only");
  GridSpec grid;
  grid.points_per_axis = resolution;
  const RegionSample sample =
      sample_region(p, grid, Normalization::phy_rate);
  return figure_payloads(sample, pareto_mask(sample));
}

}  // namespace wlan::rateregion
