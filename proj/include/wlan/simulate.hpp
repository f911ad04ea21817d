#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wlan/model.hpp"

namespace wlan::sim {

struct SimConfig {
  std::uint64_t slots = 0;
  std::uint64_t seed = 0;
  int batches = 20;  // batch-means error estimation; slots >= batches >= 2
};

struct SimResult {
  std::vector<double> s_hat;       // success_i * L_i / elapsed_model_time
  std::vector<double> stderr_;     // batch-means standard error
  std::uint64_t idle_slots = 0;
  std::vector<std::uint64_t> success_slots;  // per station
  std::uint64_t collision_slots = 0;
  double elapsed_model_time = 0.0;
};

// Slot-level Monte Carlo: each MAC slot every station attempts independently
// with probability tau_i; 0 attempts = idle (sigma), 1 = success (t_s,
// payload delivered), >1 = collision (t_c).  Deterministic given the seed;
// station i draws from its own substream, so adding stations never perturbs
// the others' draws.  tau_i = 1 is rejected (the limit is analytic, not
// simulated).
SimResult run_slots(const WlanParams& p, const AttemptVector& t,
                    const SimConfig& cfg);

struct CompareRow {
  int station = 0;
  double s_analytic = 0.0;
  double s_hat = 0.0;
  double stderr_ = 0.0;
  double z = 0.0;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  double max_abs_z = 0.0;
  double max_rel_err = 0.0;
  bool passed = false;  // all |z| <= 4 and relative error <= 1%

  std::string to_csv() const;  // station,s_analytic,s_hat,stderr,z
};

CompareReport compare(const WlanParams& p, const AttemptVector& t,
                      const SimConfig& cfg);

// Same harness against caller-supplied expectations (self-test hook).
CompareReport compare_against(const WlanParams& p, const AttemptVector& t,
                              const SimConfig& cfg,
                              std::span<const double> s_expected);

}  // namespace wlan::sim
