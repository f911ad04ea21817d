#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wlan/logconv.hpp"
#include "wlan/model.hpp"

using namespace wlan;
using namespace wlan::logconv;

namespace {

// a = 0.1, K = 0 throughout the worked two-station instance
const WlanParams kFig = WlanParams::uniform(2, 10.0, 100.0, 100.0, 1000.0);

AttemptVector random_interior(std::mt19937_64& rng, int n, double tau_hi) {
  return AttemptVector::from_tau(oracles::uniform_vec(rng, n, 0.02, tau_hi));
}

WlanParams random_params(std::mt19937_64& rng, int n,
                         std::vector<double> tau_bar = {}) {
  const double sigma = oracles::uniform(rng, 5.0, 50.0);
  const double t_c = oracles::uniform(rng, sigma, 200.0);
  const double t_s = oracles::uniform(rng, t_c, 400.0);
  return WlanParams(n, sigma, t_s, t_c,
                    std::vector<double>(static_cast<std::size_t>(n), 1000.0),
                    std::move(tau_bar));
}

}  // namespace

TEST_CASE("geometric_combination basics") {
  const std::vector<double> v{0.3, 1.7, 2.0};
  CHECK(geometric_combination(v, v, 0.37) == v);  // identity, bitwise

  const std::vector<double> x1{1.0, 4.0}, x2{4.0, 1.0};
  CHECK(geometric_combination(x1, x2, 1.0) == x1);
  CHECK(geometric_combination(x1, x2, 0.0) == x2);
  const auto mid = geometric_combination(x1, x2, 0.5);
  CHECK(mid[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(mid[1] == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(geometric_combination(std::vector<double>{0.0, 1.0}, x2, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(geometric_combination(x1, x2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(geometric_combination(x1, std::vector<double>{1.0}, 0.5),
                  std::invalid_argument);
}

TEST_CASE("lhs_f values and tails") {
  const std::vector<double> ones{1.0, 1.0};
  CHECK(lhs_f(1.0, ones, kFig) == doctest::Approx(3.1).epsilon(1e-14));
  CHECK(lhs_f(1.0, ones, kFig) == x_denominator(ones, kFig));

  // n = 2, K = 0 closed form a*d + sum(y) + prod(y)/d
  const double y0 = std::sqrt(0.2);
  const std::vector<double> y{y0, y0};
  CHECK(lhs_f(1.0, y, kFig) == doctest::Approx(0.1 + 2.0 * y0 + 0.2).epsilon(1e-14));
  CHECK(lhs_f(1.0, y, kFig) == doctest::Approx(1.19443).epsilon(1e-5));
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const double d = oracles::uniform(rng, 0.05, 20.0);
    const auto yy = oracles::uniform_vec(rng, 2, 0.05, 5.0);
    CHECK(lhs_f(d, yy, kFig) ==
          doctest::Approx(0.1 * d + yy[0] + yy[1] + yy[0] * yy[1] / d)
              .epsilon(1e-13));
  }

  // unbounded at both ends: ~a*delta for large delta, blows up at 0+
  CHECK(lhs_f(1e12, y, kFig) / 1e12 == doctest::Approx(kFig.a).epsilon(1e-3));
  CHECK(lhs_f(1e-9, y, kFig) > 1e8);

  CHECK_THROWS_AS(lhs_f(0.0, y, kFig), std::invalid_argument);
  CHECK_THROWS_AS(lhs_f(-1.0, y, kFig), std::invalid_argument);
  CHECK_THROWS_AS(lhs_f(1.0, std::vector<double>{0.5}, kFig),
                  std::invalid_argument);
}

TEST_CASE("lhs_f_derivatives against finite differences") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const WlanParams p = random_params(rng, n);
    const auto y = oracles::uniform_vec(rng, n, 0.05, 4.0);
    const double d = oracles::uniform(rng, 0.2, 8.0);
    auto f = [&](double q) { return lhs_f(q, y, p); };
    const double h = 1e-4 * d;
    const auto der = lhs_f_derivatives(d, y, p);
    CHECK(der.first ==
          doctest::Approx(oracles::central_diff(f, d, h)).epsilon(1e-6));
    CHECK(der.second ==
          doctest::Approx(oracles::central_diff2(f, d, h)).epsilon(1e-5));
    CHECK(der.second > 0.0);
  }
}

TEST_CASE("lhs_f_derivatives closed forms") {
  // n = 2, K = 0: F'' = 2 y1 y2 / d^3
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto y = oracles::uniform_vec(rng, 2, 0.05, 5.0);
    const double d = oracles::uniform(rng, 0.1, 10.0);
    CHECK(lhs_f_derivatives(d, y, kFig).second ==
          doctest::Approx(2.0 * y[0] * y[1] / (d * d * d)).epsilon(1e-12));
  }
  // n = 1: affine, slope a, zero curvature
  const WlanParams p1 = WlanParams::uniform(1, 10.0, 120.0, 100.0, 1000.0);
  const std::vector<double> y1{0.7};
  for (double d : {0.2, 1.0, 7.0}) {
    const auto der = lhs_f_derivatives(d, y1, p1);
    CHECK(der.first == doctest::Approx(p1.a).epsilon(1e-12));
    CHECK(der.second == 0.0);
  }
}

TEST_CASE("solve_delta reproduces the quadratic reduction") {
  const double y0 = std::sqrt(0.2);
  const std::vector<double> y{y0, y0};
  const double target = std::sqrt(3.1 * 0.54);
  const auto roots = solve_delta(y, target, kFig);
  const auto quad = oracles::quad_delta_roots(0.1, y0, y0, target);

  CHECK(roots.lower == doctest::Approx(quad.lower).epsilon(1e-10));
  CHECK(roots.upper == doctest::Approx(quad.upper).epsilon(1e-10));
  CHECK(std::abs(roots.lower - 0.5871) < 1e-3);
  CHECK(std::abs(roots.upper - 3.4070) < 1e-3);
  CHECK(roots.lower <= roots.star);
  CHECK(roots.star <= roots.upper);
  CHECK(roots.upper >= 1.0);
  CHECK_FALSE(roots.near_tangent);

  // both roots satisfy F(delta) = target to the solver tolerance
  CHECK(lhs_f(roots.lower, y, kFig) == doctest::Approx(target).epsilon(1e-11));
  CHECK(lhs_f(roots.upper, y, kFig) == doctest::Approx(target).epsilon(1e-11));
}

TEST_CASE("solve_delta identity mixing has a root at 1") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const WlanParams p = random_params(rng, n);
    const auto y = oracles::uniform_vec(rng, n, 0.05, 3.0);
    const double target = x_denominator(y, p);  // F(1)
    const auto roots = solve_delta(y, target, p);
    const bool lower_is_one = std::abs(roots.lower - 1.0) < 1e-9;
    const bool upper_is_one = std::abs(roots.upper - 1.0) < 1e-9;
    CHECK((lower_is_one || upper_is_one));
    CHECK(roots.upper >= 1.0 - 1e-12);
  }
}

TEST_CASE("solve_delta tangency and infeasible targets") {
  const std::vector<double> y{1.0, 1.0};
  // locate the minimum by golden section on F
  auto f = [&](double d) { return -lhs_f(d, y, kFig); };
  const double star = oracles::golden_max(f, 0.01, 100.0);
  const double f_star = lhs_f(star, y, kFig);

  const auto roots = solve_delta(y, f_star, kFig);
  CHECK(roots.near_tangent);
  CHECK(roots.lower == doctest::Approx(roots.upper).epsilon(1e-9));
  CHECK(roots.star == doctest::Approx(star).epsilon(1e-8));

  CHECK_THROWS_AS(solve_delta(y, 0.9 * f_star, kFig), std::runtime_error);
}

TEST_CASE("solve_delta n = 1 closed form") {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 50; ++i) {
    const WlanParams p = random_params(rng, 1);
    const double y = oracles::uniform(rng, 0.05, 5.0);
    const double target = oracles::uniform(rng, 1.0, 3.0) *
                          ((p.big_k + 1.0) * y + p.a);
    const auto roots = solve_delta(std::vector<double>{y}, target, p);
    const double expected = (target - (p.big_k + 1.0) * y) / p.a;
    CHECK(roots.lower == roots.upper);
    CHECK(roots.upper == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("Hoelder bound on the mixing target") {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const WlanParams p = random_params(rng, n);
    const auto x1 = oracles::uniform_vec(rng, n, 0.02, 6.0);
    const auto x2 = oracles::uniform_vec(rng, n, 0.02, 6.0);
    const double alpha = oracles::uniform(rng, 0.0, 1.0);
    const double target = std::exp(alpha * std::log(x_denominator(x1, p)) +
                                   (1.0 - alpha) * std::log(x_denominator(x2, p)));
    const auto y = geometric_combination(x1, x2, alpha);
    const double f1 = lhs_f(1.0, y, p);
    CHECK(target >= f1 * (1.0 - 1e-12));
  }

  // equality exactly at the ends and for identical endpoints
  const std::vector<double> x1{0.5, 2.0}, x2{1.0, 0.25};
  for (double alpha : {0.0, 1.0}) {
    const auto y = geometric_combination(x1, x2, alpha);
    const double target = std::exp(alpha * std::log(x_denominator(x1, kFig)) +
                                   (1.0 - alpha) * std::log(x_denominator(x2, kFig)));
    CHECK(target == doctest::Approx(lhs_f(1.0, y, kFig)).epsilon(1e-14));
  }
  // strict inequality away from them
  const auto y = geometric_combination(x1, x2, 0.5);
  const double target = std::sqrt(x_denominator(x1, kFig) * x_denominator(x2, kFig));
  CHECK(target > lhs_f(1.0, y, kFig) * (1.0 + 1e-12));
}

TEST_CASE("midpoint_witness worked instance, both branches") {
  const auto t1 = AttemptVector::from_x({1.0, 1.0});
  const auto t2 = AttemptVector::from_x({0.2, 0.2});

  const auto upper = midpoint_witness(t1, t2, 0.5, kFig, Branch::upper);
  CHECK(std::abs(upper.x_star[0] - 0.13126) < 1e-4);
  CHECK(std::abs(upper.x_star[1] - 0.13126) < 1e-4);
  CHECK(upper.residual <= 1e-9);
  CHECK(upper.in_box);

  // normalized witness throughput = geometric mean of endpoint rates
  const auto s = throughput(upper.t_star, kFig);
  const double normalized = s.s[0] * kFig.t_c / kFig.payloads[0];
  CHECK(std::abs(normalized - 0.34566) < 1e-4);
  CHECK(normalized ==
        doctest::Approx(std::sqrt((1.0 / 3.1) * (0.2 / 0.54))).epsilon(1e-9));

  const auto lower = midpoint_witness(t1, t2, 0.5, kFig, Branch::lower);
  CHECK(std::abs(lower.x_star[0] - 0.76174) < 1e-4);
  CHECK(lower.residual <= 1e-9);
  const auto sl = throughput(lower.t_star, kFig);
  CHECK(sl.s[0] == doctest::Approx(s.s[0]).epsilon(1e-10));  // same rates
}

TEST_CASE("midpoint_witness endpoint mixing weights echo the endpoints") {
  const auto t1 = AttemptVector::from_tau({0.3, 0.6});
  const auto t2 = AttemptVector::from_tau({0.1, 0.2});
  const auto w0 = midpoint_witness(t1, t2, 0.0, kFig);
  CHECK(w0.t_star.tau == t2.tau);
  CHECK(w0.residual == 0.0);
  const auto w1 = midpoint_witness(t1, t2, 1.0, kFig);
  CHECK(w1.t_star.tau == t1.tau);
}

TEST_CASE("midpoint_witness rejects boundary endpoints") {
  const auto interior = AttemptVector::from_tau({0.3, 0.6});
  CHECK_THROWS_AS(
      midpoint_witness(AttemptVector::from_tau({0.0, 0.5}), interior, 0.5, kFig),
      std::invalid_argument);
}

TEST_CASE("witnesses are independent of payloads") {
  std::mt19937_64 rng(27);
  const auto t1 = random_interior(rng, 3, 0.9);
  const auto t2 = random_interior(rng, 3, 0.9);
  const WlanParams pa(3, 10.0, 120.0, 100.0, {1000.0, 1000.0, 1000.0});
  const WlanParams pb(3, 10.0, 120.0, 100.0, {123.0, 4567.0, 89.0});
  const auto wa = midpoint_witness(t1, t2, 0.37, pa);
  const auto wb = midpoint_witness(t1, t2, 0.37, pb);
  CHECK(wa.x_star == wb.x_star);  // identical doubles: L never enters
  CHECK(wa.delta_upper == wb.delta_upper);
}

TEST_CASE("random witnesses: residual, ordering, box preservation") {
  std::mt19937_64 rng(28);
  for (const int n : {2, 3, 5}) {
    for (int trial = 0; trial < 200; ++trial) {
      const bool capped = trial % 2 == 1;
      std::vector<double> tau_bar;
      if (capped)
        tau_bar = oracles::uniform_vec(rng, n, 0.3, 0.9);
      WlanParams p = random_params(rng, n, tau_bar);
      const double tau_hi = capped ? 0.25 : 0.95;  // keep endpoints in the box
      const auto t1 = random_interior(rng, n, tau_hi);
      const auto t2 = random_interior(rng, n, tau_hi);
      const double alpha = oracles::uniform(rng, 0.0, 1.0);
      const auto w = midpoint_witness(t1, t2, alpha, p);
      CHECK(w.residual <= 1e-9);
      CHECK(w.delta_lower <= w.delta_star * (1 + 1e-12));
      CHECK(w.delta_upper >= w.delta_star * (1 - 1e-12));
      CHECK(w.delta_upper >= 1.0 - 1e-12);
      CHECK(w.in_box);
      for (int i = 0; i < n; ++i)
        CHECK(w.x_star[i] <= w.y[i] * (1 + 1e-12));  // upper branch contracts
    }
  }
}

TEST_CASE("verify_segment") {
  const auto t1 = AttemptVector::from_tau({0.4, 0.4});
  const auto same = verify_segment(t1, t1, kFig, 5, 1e-9);
  CHECK(same.passed);
  CHECK(same.max_residual <= 1e-12);

  std::mt19937_64 rng(29);
  for (const int n : {2, 3, 5}) {
    const WlanParams p = random_params(rng, n);
    const auto a = random_interior(rng, n, 0.9);
    const auto b = random_interior(rng, n, 0.9);
    const auto report = verify_segment(a, b, p, 11, 1e-9);
    CHECK(report.passed);
    CHECK(report.all_in_box);
    CHECK(report.rows.size() == 11);
    CHECK(report.rows.front().alpha == 0.0);
    CHECK(report.rows.back().alpha == 1.0);
  }

  // capped: endpoints inside the box force every witness inside the box
  const WlanParams capped(2, 10.0, 100.0, 100.0, {1000.0, 1000.0}, {0.5, 0.5});
  const auto a = AttemptVector::from_tau({0.45, 0.2});
  const auto b = AttemptVector::from_tau({0.1, 0.49});
  const auto report = verify_segment(a, b, capped, 11, 1e-9);
  CHECK(report.passed);
  CHECK(report.all_in_box);

  const auto csv = report.to_csv();
  CHECK(csv.rfind("alpha,delta_lower,delta_star,delta_upper,residual,in_box\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);  // header + 11 rows

  CHECK_THROWS_AS(verify_segment(a, b, capped, 1, 1e-9), std::invalid_argument);
}

TEST_CASE("two roots can differ while producing the same rates") {
  // equal endpoints mixed at alpha = 0.5: y = x, target = F(1), and when the
  // minimizer sits right of 1 the upper root is a genuinely different tau
  // with identical throughput
  const auto t = AttemptVector::from_x({1.0, 1.0});
  const auto w = midpoint_witness(t, t, 0.5, kFig);
  CHECK(w.delta_upper == doctest::Approx(10.0).epsilon(1e-9));  // 0.1 d^2 - 1.1 d + 1
  CHECK(w.delta_lower == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.residual <= 1e-12);
  const auto s_t = throughput(t, kFig);
  const auto s_w = throughput(w.t_star, kFig);
  CHECK(s_w.s[0] == doctest::Approx(s_t.s[0]).epsilon(1e-10));
}
