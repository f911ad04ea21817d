#include "wlan/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace wlan {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double tau_to_x(double tau) {
  if (!(tau >= 0.0) || tau > 1.0)
    throw std::invalid_argument("tau_to_x: tau must lie in [0,1)");
  if (tau == 1.0)
    throw std::domain_error(
        "tau_to_x: saturated cap (tau = 1); represent the limit with "
        "kLargeXSurrogate");
  return tau / (1.0 - tau);
}

double x_to_tau(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("x_to_tau: x must be >= 0");
  if (std::isinf(x)) return 1.0;
  return x / (1.0 + x);
}

double tau_from_mac(double q, int cw_min) {
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("tau_from_mac: q must lie in [0,1]");
  if (cw_min < 2)
    throw std::invalid_argument("tau_from_mac: cw_min must be >= 2");
  return std::min(2.0 * q / static_cast<double>(cw_min), 1.0);
}

double prod_one_plus(std::span<const double> v) {
  bool use_logs = v.size() > 16;
  if (!use_logs) {
    for (double q : v)
      if (q > 1e6) {
        use_logs = true;
        break;
      }
  }
  if (!use_logs) {
    double prod = 1.0;
    for (double q : v) prod *= 1.0 + q;
    return prod;
  }
  double sum = 0.0;
  for (double q : v) sum += std::log1p(q);
  return std::exp(sum);
}

WlanParams::WlanParams(int n_, double sigma_, double t_s_, double t_c_,
                       std::vector<double> payloads_,
                       std::vector<double> tau_bar_)
    : n(n_),
      sigma(sigma_),
      t_s(t_s_),
      t_c(t_c_),
      payloads(std::move(payloads_)),
      tau_bar(std::move(tau_bar_)) {
  if (n < 1) throw std::invalid_argument("WlanParams: n must be >= 1");
  if (!(sigma > 0.0 && sigma <= t_c && t_c <= t_s))
    throw std::invalid_argument(
        "WlanParams: need 0 < sigma <= t_c <= t_s (so a in (0,1], K >= 0)");
  if (tau_bar.empty()) tau_bar.assign(static_cast<std::size_t>(n), 1.0);
  if (payloads.size() != static_cast<std::size_t>(n) ||
      tau_bar.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument(
        "WlanParams: payloads and tau_bar must have length n");
  for (double l : payloads)
    if (!(l > 0.0))
      throw std::invalid_argument("WlanParams: payloads must be > 0");
  a = sigma / t_c;
  big_k = t_s / t_c - 1.0;
  x_bar.reserve(tau_bar.size());
  for (double tb : tau_bar) {
    if (!(tb >= 0.0 && tb <= 1.0))
      throw std::invalid_argument("WlanParams: tau_bar entries must be in [0,1]");
    x_bar.push_back(tb == 1.0 ? kInf : tb / (1.0 - tb));
  }
}

WlanParams WlanParams::uniform(int n, double sigma, double t_s, double t_c,
                               double payload, double tau_bar) {
  return WlanParams(n, sigma, t_s, t_c,
                    std::vector<double>(static_cast<std::size_t>(n), payload),
                    std::vector<double>(static_cast<std::size_t>(n), tau_bar));
}

AttemptVector AttemptVector::from_tau(std::vector<double> tau) {
  AttemptVector out;
  out.x.reserve(tau.size());
  for (double t : tau) out.x.push_back(tau_to_x(t));
  out.tau = std::move(tau);
  return out;
}

AttemptVector AttemptVector::from_x(std::vector<double> x) {
  AttemptVector out;
  out.tau.reserve(x.size());
  for (double v : x) {
    if (!(v >= 0.0) || std::isinf(v))
      throw std::invalid_argument("AttemptVector: x must be finite and >= 0");
    out.tau.push_back(x_to_tau(v));
  }
  out.x = std::move(x);
  return out;
}

SlotStats slot_stats(const AttemptVector& t, const WlanParams& p) {
  const std::size_t n = static_cast<std::size_t>(p.n);
  if (t.size() != n)
    throw std::invalid_argument("slot_stats: attempt vector has wrong length");
  // prefix[i] = prod_{k<i}(1-tau_k), suffix[i] = prod_{k>=i}(1-tau_k)
  std::vector<double> prefix(n + 1, 1.0), suffix(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    prefix[i + 1] = prefix[i] * (1.0 - t.tau[i]);
  for (std::size_t i = n; i-- > 0;)
    suffix[i] = suffix[i + 1] * (1.0 - t.tau[i]);

  SlotStats st;
  st.p_idle = prefix[n];
  for (std::size_t i = 0; i < n; ++i)
    st.p_succ += t.tau[i] * prefix[i] * suffix[i + 1];
  st.p_coll = std::max(0.0, 1.0 - st.p_idle - st.p_succ);
  st.mean_slot = p.sigma * st.p_idle + p.t_s * st.p_succ + p.t_c * st.p_coll;
  return st;
}

double x_denominator(std::span<const double> x, const WlanParams& p) {
  if (x.size() != static_cast<std::size_t>(p.n))
    throw std::invalid_argument("x_denominator: x has wrong length");
  double sum = 0.0;
  for (double v : x) {
    if (!(v >= 0.0))
      throw std::invalid_argument("x_denominator: x must be >= 0");
    sum += v;
  }
  return p.a + p.big_k * sum + (prod_one_plus(x) - 1.0);
}

ThroughputVector throughput(const AttemptVector& t, const WlanParams& p) {
  const std::size_t n = static_cast<std::size_t>(p.n);
  if (t.size() != n)
    throw std::invalid_argument("throughput: attempt vector has wrong length");
  const double denom = x_denominator(t.x, p);
  const double log_denom = std::log(denom);
  ThroughputVector out;
  out.s.resize(n);
  out.log_s.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = p.payloads[i] / p.t_c;
    out.s[i] = t.x[i] * rate / denom;
    out.log_s[i] = t.x[i] > 0.0
                       ? std::log(t.x[i]) + std::log(rate) - log_denom
                       : -std::numeric_limits<double>::infinity();
  }
  return out;
}

ThroughputVector throughput_tau_form(const AttemptVector& t,
                                     const WlanParams& p) {
  const std::size_t n = static_cast<std::size_t>(p.n);
  if (t.size() != n)
    throw std::invalid_argument("throughput: attempt vector has wrong length");
  const SlotStats st = slot_stats(t, p);
  std::vector<double> prefix(n + 1, 1.0), suffix(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    prefix[i + 1] = prefix[i] * (1.0 - t.tau[i]);
  for (std::size_t i = n; i-- > 0;)
    suffix[i] = suffix[i + 1] * (1.0 - t.tau[i]);
  ThroughputVector out;
  out.s.resize(n);
  out.log_s.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.s[i] = t.tau[i] * prefix[i] * suffix[i + 1] * p.payloads[i] /
               st.mean_slot;
    out.log_s[i] = std::log(out.s[i]);
  }
  return out;
}

}  // namespace wlan
