#pragma once

#include <span>
#include <vector>

namespace wlan {

// Finite stand-in for x = tau/(1-tau) at tau = 1.  Any throughput evaluated
// through it differs from the tau -> 1 limit by at most ~2e-9 relative.
inline constexpr double kLargeXSurrogate = 1e9;

/// tau/(1-tau).  Rejects tau = 1; saturated caps go through kLargeXSurrogate.
double tau_to_x(double tau);

/// x/(1+x), the exact inverse of tau_to_x.  Maps +inf to 1.
double x_to_tau(double x);

/// Attempt probability from MAC knobs when CW_max = CW_min: min(2q/cw_min, 1).
/// q is the packet-availability probability; post-backoff is ignored.
double tau_from_mac(double q, int cw_min);

/// prod(1+v_i).  Sums log1p terms when the factor count exceeds 16 or any
/// v_i > 1e6, so products at extreme x stay representable.
double prod_one_plus(std::span<const double> v);

// Physical/MAC constants of one WLAN.  All durations share one time unit
// (microseconds recommended); payloads are in bits; throughputs come out in
// bits per time unit.
struct WlanParams {
  int n = 0;
  double sigma = 0.0;  // PHY idle slot duration
  double t_s = 0.0;    // successful-transmission duration
  double t_c = 0.0;    // collision duration
  std::vector<double> payloads;  // mean frame payload per station, bits
  std::vector<double> tau_bar;   // per-station attempt-probability caps

  // derived
  double a = 0.0;      // sigma/t_c, in (0,1]
  double big_k = 0.0;  // t_s/t_c - 1, >= 0
  std::vector<double> x_bar;  // caps in x coordinates; +inf where tau_bar = 1

  // Requires 0 < sigma <= t_c <= t_s, positive payloads, caps in [0,1],
  // and both sequences of length n.  Empty tau_bar defaults to all-1.
  WlanParams(int n, double sigma, double t_s, double t_c,
             std::vector<double> payloads, std::vector<double> tau_bar = {});

  /// Identical stations: one payload (and optionally one cap) fanned out.
  static WlanParams uniform(int n, double sigma, double t_s, double t_c,
                            double payload, double tau_bar = 1.0);
};

// Per-station attempt probabilities with their x = tau/(1-tau) images kept
// in lockstep.
struct AttemptVector {
  std::vector<double> tau;
  std::vector<double> x;

  static AttemptVector from_tau(std::vector<double> tau);
  static AttemptVector from_x(std::vector<double> x);
  std::size_t size() const { return tau.size(); }
};

struct SlotStats {
  double p_idle = 0.0;
  double p_succ = 0.0;
  double p_coll = 0.0;
  double mean_slot = 0.0;  // sigma*p_idle + t_s*p_succ + t_c*p_coll
};

struct ThroughputVector {
  std::vector<double> s;      // bits per time unit
  std::vector<double> log_s;  // -inf where s = 0
};

SlotStats slot_stats(const AttemptVector& t, const WlanParams& p);

/// X(T) = a + K*sum(x) + prod(1+x) - 1, the common throughput denominator.
double x_denominator(std::span<const double> x, const WlanParams& p);

/// Station throughputs s_i = x_i * (L_i/t_c) / X(T).  Canonical route.
ThroughputVector throughput(const AttemptVector& t, const WlanParams& p);

/// Same quantity evaluated straight from the slot trichotomy:
/// s_i = tau_i * prod_{k!=i}(1-tau_k) * L_i / mean_slot.
ThroughputVector throughput_tau_form(const AttemptVector& t, const WlanParams& p);

}  // namespace wlan
