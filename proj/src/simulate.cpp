#include "wlan/simulate.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "wlan/csv.hpp"

namespace wlan::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& gen) {
  // top 53 bits; identical across standard libraries
  return (gen() >> 11) * 0x1.0p-53;
}

}  // namespace

SimResult run_slots(const WlanParams& p, const AttemptVector& t,
                    const SimConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(p.n);
  if (t.size() != n)
    throw std::invalid_argument("run_slots: attempt vector has wrong length");
  for (double tau : t.tau)
    if (tau >= 1.0)
      throw std::invalid_argument(
          "run_slots: tau = 1 is not simulated; the saturated limit is "
          "analytic (throughput as x -> inf)");
  if (cfg.batches < 2 || cfg.slots < static_cast<std::uint64_t>(cfg.batches))
    throw std::invalid_argument("run_slots: need slots >= batches >= 2");

  // one substream per station, derived from the master seed
  std::vector<std::mt19937_64> gen;
  gen.reserve(n);
  std::uint64_t state = cfg.seed;
  for (std::size_t i = 0; i < n; ++i) gen.emplace_back(splitmix64(state));

  const std::size_t batches = static_cast<std::size_t>(cfg.batches);
  std::vector<double> batch_time(batches, 0.0);
  std::vector<std::vector<double>> batch_bits(
      batches, std::vector<double>(n, 0.0));

  SimResult res;
  res.success_slots.assign(n, 0);

  for (std::uint64_t slot = 0; slot < cfg.slots; ++slot) {
    int attempts = 0;
    std::size_t who = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (uniform01(gen[i]) < t.tau[i]) {
        ++attempts;
        who = i;
      }
    }
    const std::size_t b =
        static_cast<std::size_t>(slot * batches / cfg.slots);
    double duration;
    if (attempts == 0) {
      duration = p.sigma;
      ++res.idle_slots;
    } else if (attempts == 1) {
      duration = p.t_s;
      ++res.success_slots[who];
      batch_bits[b][who] += p.payloads[who];
    } else {
      duration = p.t_c;
      ++res.collision_slots;
    }
    batch_time[b] += duration;
    res.elapsed_model_time += duration;
  }

  res.s_hat.resize(n);
  res.stderr_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.s_hat[i] = static_cast<double>(res.success_slots[i]) * p.payloads[i] /
                   res.elapsed_model_time;
    double mean = 0.0;
    std::vector<double> m(batches);
    for (std::size_t b = 0; b < batches; ++b) {
      m[b] = batch_bits[b][i] / batch_time[b];
      mean += m[b];
    }
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (std::size_t b = 0; b < batches; ++b)
      var += (m[b] - mean) * (m[b] - mean);
    var /= static_cast<double>(batches - 1);
    res.stderr_[i] = std::sqrt(var / static_cast<double>(batches));
  }
  return res;
}

CompareReport compare_against(const WlanParams& p, const AttemptVector& t,
                              const SimConfig& cfg,
                              std::span<const double> s_expected) {
  if (s_expected.size() != static_cast<std::size_t>(p.n))
    throw std::invalid_argument("compare: expected rates have wrong length");
  const SimResult res = run_slots(p, t, cfg);
  CompareReport report;
  report.passed = true;
  for (std::size_t i = 0; i < s_expected.size(); ++i) {
    CompareRow row;
    row.station = static_cast<int>(i) + 1;
    row.s_analytic = s_expected[i];
    row.s_hat = res.s_hat[i];
    row.stderr_ = res.stderr_[i];
    const double diff = res.s_hat[i] - s_expected[i];
    if (res.stderr_[i] > 0.0)
      row.z = diff / res.stderr_[i];
    else
      row.z = diff == 0.0 ? 0.0
                          : std::numeric_limits<double>::infinity() *
                                (diff > 0 ? 1.0 : -1.0);
    const double rel = s_expected[i] > 0.0
                           ? std::abs(diff) / s_expected[i]
                           : (res.s_hat[i] == 0.0 ? 0.0 : 1.0);
    report.max_abs_z = std::max(report.max_abs_z, std::abs(row.z));
    report.max_rel_err = std::max(report.max_rel_err, rel);
    report.rows.push_back(row);
  }
  report.passed = report.max_abs_z <= 4.0 && report.max_rel_err <= 0.01;
  return report;
}

CompareReport compare(const WlanParams& p, const AttemptVector& t,
                      const SimConfig& cfg) {
  const ThroughputVector s = throughput(t, p);
  return compare_against(p, t, cfg, s.s);
}

std::string CompareReport::to_csv() const {
  std::string out = "station,s_analytic,s_hat,stderr,z\n";
  for (const CompareRow& r : rows) {
    out += join_csv({std::to_string(r.station), g12(r.s_analytic),
                     g12(r.s_hat), g12(r.stderr_), g12(r.z)});
    out += '\n';
  }
  return out;
}

}  // namespace wlan::sim
