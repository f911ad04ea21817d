// Command-line front end: region sampling and figure data, log-convexity
// witnesses, utility-fair allocations and the slot-level simulator, all with
// reproducible seeded runs, flat key=value configs and CSV outputs.
//
// Exit codes: 0 success/pass, 1 usage or input error, 2 numerical failure
// (residual breach, non-convergence, simulation mismatch).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wlan/config.hpp"
#include "wlan/csv.hpp"
#include "wlan/fairness.hpp"
#include "wlan/logconv.hpp"
#include "wlan/model.hpp"
#include "wlan/rateregion.hpp"
#include "wlan/simulate.hpp"
#include "wlan/version.hpp"

namespace {

namespace fs = std::filesystem;

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string config;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed = 1;
};

std::string default_out_dir() {
  const char* env = std::getenv("RATEREGION_OUT");
  return env && *env ? env : ".";
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// Every command drops a manifest next to its outputs: command, version,
// resolved parameters, output list.  No timestamps, so reruns are
// byte-identical.
void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& params,
                    const std::vector<std::string>& outputs) {
  std::string text = "command=" + command + "\n";
  text += std::string("version=") + wlan::kVersion + "\n";
  for (const auto& [k, v] : params) text += k + "=" + v + "\n";
  std::string joined;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (i) joined += ',';
    joined += outputs[i];
  }
  text += "outputs=" + joined + "\n";
  write_file(dir / (command + ".manifest"), text);
}

wlan::WlanParams load_params(const Global& g) {
  if (g.config.empty())
    throw CLI::ValidationError("--config", "a config file is required");
  return wlan::wlan_params_from_config(wlan::parse_config_file(g.config));
}

wlan::AttemptVector parse_tau_list(const std::string& arg, int n,
                                   const char* flag) {
  auto values = wlan::parse_double_list(arg, flag);
  if (values.size() != static_cast<std::size_t>(n))
    throw CLI::ValidationError(flag, "expected " + std::to_string(n) +
                                         " comma-separated values");
  return wlan::AttemptVector::from_tau(std::move(values));
}

int cmd_region(const Global& g, int grid, const std::string& normalize) {
  const wlan::WlanParams p = load_params(g);
  wlan::rateregion::GridSpec spec;
  spec.points_per_axis = grid;
  const auto norm = normalize == "raw" ? wlan::rateregion::Normalization::raw
                                       : wlan::rateregion::Normalization::phy_rate;
  const auto sample = wlan::rateregion::sample_region(p, spec, norm, g.threads);
  const auto mask = wlan::rateregion::pareto_mask(sample);
  const auto payloads = wlan::rateregion::figure_payloads(sample, mask);

  const fs::path dir = ensure_out_dir(g.out_dir);
  std::vector<std::string> outputs{"region.csv", "frontier.csv"};
  write_file(dir / "region.csv", payloads.region_csv);
  write_file(dir / "frontier.csv", payloads.frontier_csv);
  if (p.n == 2) {
    write_file(dir / "logregion.csv", payloads.logregion_csv);
    outputs.push_back("logregion.csv");
  }
  write_manifest(dir, "region",
                 {{"config", g.config},
                  {"grid", std::to_string(grid)},
                  {"normalize", normalize},
                  {"threads", std::to_string(g.threads)},
                  {"seed", std::to_string(g.seed)}},
                 outputs);
  std::size_t frontier_points = 0;
  for (auto m : mask) frontier_points += m;
  std::cout << "region: " << sample.points.size() << " points, "
            << frontier_points << " on the frontier -> "
            << (dir / "region.csv").string() << "\n";
  return 0;
}

int cmd_witness(const Global& g, const std::string& t1_arg,
                const std::string& t2_arg, double alpha,
                const std::string& branch) {
  const wlan::WlanParams p = load_params(g);
  const auto t1 = parse_tau_list(t1_arg, p.n, "--t1");
  const auto t2 = parse_tau_list(t2_arg, p.n, "--t2");
  const auto br = branch == "lower" ? wlan::logconv::Branch::lower
                                    : wlan::logconv::Branch::upper;
  const auto w = wlan::logconv::midpoint_witness(t1, t2, alpha, p, br);

  std::cout << "alpha        " << wlan::g12(w.alpha) << "\n"
            << "delta_lower  " << wlan::g12(w.delta_lower) << "\n"
            << "delta_star   " << wlan::g12(w.delta_star) << "\n"
            << "delta_upper  " << wlan::g12(w.delta_upper) << "\n"
            << "delta_used   " << wlan::g12(w.delta) << "\n";
  std::cout << "tau_star     ";
  for (std::size_t i = 0; i < w.t_star.tau.size(); ++i)
    std::cout << (i ? "," : "") << wlan::g12(w.t_star.tau[i]);
  std::cout << "\nresidual     " << wlan::g12(w.residual) << "\n"
            << "in_box       " << (w.in_box ? 1 : 0) << "\n";

  const fs::path dir = ensure_out_dir(g.out_dir);
  std::string csv = "alpha,delta_lower,delta_star,delta_upper,residual,in_box\n";
  csv += wlan::join_csv({wlan::g12(w.alpha), wlan::g12(w.delta_lower),
                         wlan::g12(w.delta_star), wlan::g12(w.delta_upper),
                         wlan::g12(w.residual), w.in_box ? "1" : "0"});
  csv += '\n';
  write_file(dir / "witness.csv", csv);
  write_manifest(dir, "witness",
                 {{"config", g.config},
                  {"t1", t1_arg},
                  {"t2", t2_arg},
                  {"alpha", wlan::g12(alpha)},
                  {"branch", branch},
                  {"threads", std::to_string(g.threads)},
                  {"seed", std::to_string(g.seed)}},
                 {"witness.csv"});
  if (w.residual > 1e-9)
    throw NumericalFailure("witness residual " + wlan::g12(w.residual) +
                           " exceeds 1e-9");
  return 0;
}

int cmd_verify(const Global& g, const std::string& t1_arg,
               const std::string& t2_arg, int alphas, double tol) {
  const wlan::WlanParams p = load_params(g);
  const auto t1 = parse_tau_list(t1_arg, p.n, "--t1");
  const auto t2 = parse_tau_list(t2_arg, p.n, "--t2");
  const auto report = wlan::logconv::verify_segment(t1, t2, p, alphas, tol);

  const fs::path dir = ensure_out_dir(g.out_dir);
  write_file(dir / "segment.csv", report.to_csv());
  write_manifest(dir, "verify",
                 {{"config", g.config},
                  {"t1", t1_arg},
                  {"t2", t2_arg},
                  {"alphas", std::to_string(alphas)},
                  {"tol", wlan::g12(tol)},
                  {"threads", std::to_string(g.threads)},
                  {"seed", std::to_string(g.seed)}},
                 {"segment.csv"});
  std::cout << "verify: " << report.rows.size()
            << " mixing weights, max residual " << wlan::g12(report.max_residual)
            << ", all_in_box " << (report.all_in_box ? 1 : 0) << " -> "
            << (report.passed ? "pass" : "FAIL") << "\n";
  if (!report.passed)
    throw NumericalFailure("segment residual " + wlan::g12(report.max_residual) +
                           " exceeds " + wlan::g12(tol));
  return 0;
}

int cmd_fair(const Global& g, std::optional<double> alpha,
             const std::string& weights_arg, bool maxmin) {
  if (g.config.empty())
    throw CLI::ValidationError("--config", "a config file is required");
  auto cfg = wlan::parse_config_file(g.config);
  if (alpha) cfg["fair_alpha"] = wlan::g12(*alpha);
  if (!weights_arg.empty()) cfg["weights"] = weights_arg;

  wlan::fairness::FairAllocation alloc;
  if (maxmin) {
    const wlan::WlanParams p = wlan::wlan_params_from_config(cfg);
    alloc = wlan::fairness::maxmin_fair(p);
  } else {
    const auto prob = wlan::fairness::fairness_problem_from_config(cfg);
    alloc = wlan::fairness::solve_fair(prob);
  }

  const fs::path dir = ensure_out_dir(g.out_dir);
  write_file(dir / "fair.csv", wlan::fairness::allocation_csv(alloc));
  write_manifest(dir, "fair",
                 {{"config", g.config},
                  {"fair_alpha", alpha ? wlan::g12(*alpha) : "config"},
                  {"weights", weights_arg.empty() ? "config" : weights_arg},
                  {"maxmin", maxmin ? "1" : "0"},
                  {"threads", std::to_string(g.threads)},
                  {"seed", std::to_string(g.seed)}},
                 {"fair.csv"});
  std::cout << (maxmin ? "maxmin" : "fair") << ": tau = ";
  for (std::size_t i = 0; i < alloc.tau_opt.tau.size(); ++i)
    std::cout << (i ? "," : "") << wlan::g12(alloc.tau_opt.tau[i]);
  std::cout << ", objective " << wlan::g12(alloc.objective)
            << ", kkt " << wlan::g12(alloc.kkt_residual) << ", "
            << alloc.iterations << " iterations\n";
  return 0;
}

int cmd_simulate(const Global& g, const std::string& tau_arg,
                 std::uint64_t slots, int batches) {
  const wlan::WlanParams p = load_params(g);
  const auto t = parse_tau_list(tau_arg, p.n, "--tau");
  wlan::sim::SimConfig cfg;
  cfg.slots = slots;
  cfg.seed = g.seed;
  cfg.batches = batches;
  const auto report = wlan::sim::compare(p, t, cfg);

  const fs::path dir = ensure_out_dir(g.out_dir);
  write_file(dir / "compare.csv", report.to_csv());
  write_manifest(dir, "simulate",
                 {{"config", g.config},
                  {"tau", tau_arg},
                  {"slots", std::to_string(slots)},
                  {"batches", std::to_string(batches)},
                  {"threads", std::to_string(g.threads)},
                  {"seed", std::to_string(g.seed)}},
                 {"compare.csv"});
  std::cout << report.to_csv();
  std::cout << "simulate: max |z| " << wlan::g12(report.max_abs_z)
            << ", max rel err " << wlan::g12(report.max_rel_err) << " -> "
            << (report.passed ? "pass" : "FAIL") << "\n";
  if (!report.passed)
    throw NumericalFailure("simulation disagrees with the analytic rates");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"802.11 rate-region toolkit: throughput model, log-convexity "
               "witnesses, utility-fair allocation, slot-level simulation"};
  app.require_subcommand(1);

  Global g;
  g.out_dir = default_out_dir();
  app.add_option("--config", g.config, "flat key=value parameter file")
      ->envname("RATEREGION_CONFIG");
  app.add_option("--out-dir", g.out_dir, "output directory (default $RATEREGION_OUT or .)");
  app.add_option("--threads", g.threads, "worker threads (results are identical for any value)");
  app.add_option("--seed", g.seed, "RNG seed for seeded commands");

  auto* region = app.add_subcommand("region", "sample the rate region, mark the Pareto frontier, emit figure CSVs");
  int grid = 201;
  std::string normalize = "phy";
  region->add_option("--grid", grid, "points per tau axis");
  region->add_option("--normalize", normalize, "phy|raw throughput normalization")
      ->check(CLI::IsMember({"phy", "raw"}));

  auto* witness = app.add_subcommand("witness", "construct one log-midpoint witness");
  std::string t1_arg, t2_arg, branch = "upper";
  double alpha = 0.5;
  witness->add_option("--t1", t1_arg, "first endpoint, comma-separated tau")->required();
  witness->add_option("--t2", t2_arg, "second endpoint, comma-separated tau")->required();
  witness->add_option("--alpha", alpha, "mixing weight in [0,1]");
  witness->add_option("--branch", branch, "which root of the delta equation")
      ->check(CLI::IsMember({"upper", "lower"}));

  auto* verify = app.add_subcommand("verify", "sweep witnesses along a segment of endpoints");
  int alphas = 11;
  double tol = 1e-9;
  verify->add_option("--t1", t1_arg, "first endpoint")->required();
  verify->add_option("--t2", t2_arg, "second endpoint")->required();
  verify->add_option("--alphas", alphas, "number of evenly spaced mixing weights");
  verify->add_option("--tol", tol, "residual tolerance");

  auto* fair = app.add_subcommand("fair", "solve the utility-fair allocation");
  std::optional<double> fair_alpha;
  std::string weights_arg;
  bool maxmin = false;
  fair->add_option("--alpha", fair_alpha, "fairness exponent >= 1 (overrides config)");
  fair->add_option("--weights", weights_arg, "comma-separated weights (overrides config)");
  fair->add_flag("--maxmin", maxmin, "max-min fair rates instead of the alpha family");

  auto* simulate = app.add_subcommand("simulate", "validate the analytic rates by slot-level Monte Carlo");
  std::string tau_arg;
  std::uint64_t slots = 1000000;
  int batches = 20;
  simulate->add_option("--tau", tau_arg, "attempt probabilities, comma-separated")->required();
  simulate->add_option("--slots", slots, "number of MAC slots");
  simulate->add_option("--batches", batches, "batches for the error estimate");

  try {
    app.parse(argc, argv);
    if (region->parsed()) return cmd_region(g, grid, normalize);
    if (witness->parsed()) return cmd_witness(g, t1_arg, t2_arg, alpha, branch);
    if (verify->parsed()) return cmd_verify(g, t1_arg, t2_arg, alphas, tol);
    if (fair->parsed()) return cmd_fair(g, fair_alpha, weights_arg, maxmin);
    if (simulate->parsed()) return cmd_simulate(g, tau_arg, slots, batches);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const wlan::fairness::NonConvergence& e) {
    std::cerr << "error: " << e.what() << " (best kkt residual "
              << wlan::g12(e.best.kkt_residual) << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
