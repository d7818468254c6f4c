// ziptail: command-line front end for the tail estimators, the samplers and
// the Monte-Carlo harness.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ziptail/csv.hpp"
#include "ziptail/dgp.hpp"
#include "ziptail/error.hpp"
#include "ziptail/experiments.hpp"
#include "ziptail/nummelin.hpp"
#include "ziptail/regen_markov.hpp"
#include "ziptail/tail_core.hpp"

namespace {

using namespace ziptail;
using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

struct EstimateArgs {
  std::string input;
  std::optional<int> k;
  std::vector<int> k_range;
  int avg_m = 0;
  std::optional<double> ci;
  std::optional<double> bound_delta;
  std::string spec;
};

int run_estimate(const EstimateArgs& a) {
  std::ifstream in(a.input);
  if (!in) throw ConfigError("cannot open " + a.input);
  const auto batch = read_batch(in);

  LevelRange ks;
  if (a.k) {
    ks = {*a.k, *a.k};
  } else {
    ks = {a.k_range.at(0), a.k_range.at(1)};
    if (ks.last < ks.first) throw ConfigError("--k-range needs A <= B");
  }
  if (ks.first < 0) throw ConfigError("levels must be >= 0");
  if (a.ci && !(*a.ci > 0.0 && *a.ci < 1.0)) throw ConfigError("--ci must lie in (0, 1)");

  std::optional<HeavyTailSpec> truth;
  if (!a.spec.empty()) truth = heavy_tail_from_json(load_json(a.spec));

  auto& out = std::cout;
  out << "k,m,beta_hat,ci_lo,ci_hi,p_hat_k,p_hat_k1,degenerate";
  if (a.bound_delta) out << ",bound_mode,u_n,bound,applicable";
  out << '\n';

  for (int k = ks.first; k <= ks.last; ++k) {
    TailEstimate est = a.avg_m > 0 ? beta_hat_averaged(batch, k, a.avg_m) : beta_hat(batch, k);
    std::optional<ConfidenceInterval> ci;
    if (a.ci && a.avg_m == 0) {
      if (est.p_hat_k > 0.0) ci = studentized_interval(est.beta_hat, est.n, est.p_hat_k, *a.ci);
      else throw StatError("no tail mass at level " + std::to_string(k));
    }
    out << k << ',' << a.avg_m << ',' << fmt_real(est.beta_hat) << ','
        << fmt_real(ci ? ci->lo : NAN) << ',' << fmt_real(ci ? ci->hi : NAN) << ','
        << fmt_real(est.p_hat_k) << ',' << fmt_real(est.p_hat_k1) << ',' << (est.degenerate ? 1 : 0);
    if (a.bound_delta) {
      const double p = truth ? truth->survival(level_threshold(k + 1)) : est.p_hat_k1;
      const auto b = deviation_bound(batch.size(), *a.bound_delta, p);
      out << ',' << (truth ? "oracle" : "plug-in") << ',' << fmt_real(b.u_n) << ',' << fmt_real(b.bound) << ','
          << (b.applicable ? 1 : 0);
    }
    out << '\n';
  }
  return 0;
}

struct SimulateArgs {
  std::string spec;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string blocks;
};

int run_simulate(const SimulateArgs& a) {
  const auto j = load_json(a.spec);
  Rng rng = make_stream(a.seed, 0);
  auto out = open_out(a.out);

  if (is_chain_json(j)) {
    const auto spec = chain_from_json(j);
    const auto traj = simulate(spec, a.n, rng);
    for (const double x : traj.states) out << fmt_real(x) << '\n';
    if (!a.blocks.empty()) {
      auto bout = open_out(a.blocks);
      write_blocks_csv(bout, regeneration_times(traj, default_atom(spec)));
    }
    return 0;
  }
  if (!a.blocks.empty()) throw ConfigError("--blocks needs a chain spec");
  if (j.is_object() && j.value("kind", std::string()) == "zeta") {
    write_batch(out, sample_zeta(zeta_from_json(j), rng, a.n));
  } else {
    write_batch(out, sample(heavy_tail_from_json(j), rng, a.n));
  }
  return 0;
}

struct McArgs {
  std::string config;
  std::string out_dir;
  std::optional<unsigned> threads;
};

int run_mc(const McArgs& a) {
  auto config = config_from_json(load_json(a.config));
  if (a.threads) config.threads = *a.threads;
  const auto manifest = run_scenario(config, a.out_dir);
  std::cerr << "wrote " << manifest.outputs.size() << " files to " << a.out_dir << " in "
            << fmt_real(manifest.wall_clock_seconds) << " s (" << manifest.failed_replicates
            << " failed replicates)\n";
  return 0;
}

struct SplitArgs {
  std::string trajectory;
  double sigma = 1.0;
  std::optional<double> x0;
  std::vector<double> eps_range{0.05, 3.0, 0.05};
  std::uint64_t seed = 0;
  std::optional<int> k;
  std::string curve_out;
  std::string audit_out;
};

int run_split(const SplitArgs& a) {
  std::ifstream in(a.trajectory);
  if (!in) throw ConfigError("cannot open " + a.trajectory);
  std::vector<double> states;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      std::size_t used = 0;
      states.push_back(std::stod(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw ConfigError("line " + std::to_string(line_no) + ": not a number");
    }
  }

  const double lo = a.eps_range[0], hi = a.eps_range[1], step = a.eps_range[2];
  if (!(lo > 0.0 && hi >= lo && step > 0.0)) throw ConfigError("--eps-range needs 0 < MIN <= MAX and STEP > 0");
  std::vector<double> grid;
  for (std::size_t i = 0; lo + step * static_cast<double>(i) <= hi + 1e-12; ++i) {
    grid.push_back(lo + step * static_cast<double>(i));
  }

  const auto kernel = KernelDensity::gaussian_walk(a.sigma);
  Rng rng = make_stream(a.seed, 0);
  const auto res = estimate_beta_split(states, kernel, a.x0, grid, rng, a.k);

  if (!a.curve_out.empty()) {
    auto out = open_out(a.curve_out);
    write_epsilon_curve_csv(out, res.curve);
  }
  if (!a.audit_out.empty()) {
    auto out = open_out(a.audit_out);
    write_split_audit_csv(out, states, res.small, res.split);
  }
  std::cout << "x0,epsilon,delta,pseudo_hits,N_n,k,beta_hat,degenerate\n"
            << fmt_real(res.small.x0) << ',' << fmt_real(res.small.eps) << ',' << fmt_real(res.small.delta) << ','
            << res.split.hit_count() << ',' << res.split.n_blocks() << ',' << res.estimate.k << ','
            << fmt_real(res.estimate.beta_hat) << ',' << (res.estimate.degenerate ? 1 : 0) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail-index estimation for discrete heavy-tailed laws and regenerative chains"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the tail index of an integer sample");
  estimate->add_option("--input", est.input, "File with one positive integer per line")->required();
  auto* k_opt = estimate->add_option("--k", est.k, "Level k");
  auto* range_opt = estimate->add_option("--k-range", est.k_range, "Scan levels A..B")->expected(2);
  k_opt->excludes(range_opt);
  range_opt->excludes(k_opt);
  estimate->add_option("--avg-m", est.avg_m, "Average over levels k-m..k+m")->check(CLI::NonNegativeNumber);
  estimate->add_option("--ci", est.ci, "Studentized confidence level");
  estimate->add_option("--bound-delta", est.bound_delta, "Report the deviation bound at this delta");
  estimate->add_option("--spec", est.spec, "True law (JSON); switches the bound to oracle mode");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Draw a sample or a chain path");
  simulate_cmd->add_option("--spec", sim.spec, "Heavy-tail, zeta or chain spec (JSON)")->required();
  simulate_cmd->add_option("--n", sim.n, "Sample size or number of steps")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", sim.seed, "Seed")->required();
  simulate_cmd->add_option("--out", sim.out, "Output file")->required();
  simulate_cmd->add_option("--blocks", sim.blocks, "Also write regeneration blocks (chains only)");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Run a Monte-Carlo scenario");
  mc_cmd->add_option("--config", mc.config, "Scenario config (JSON)")->required();
  mc_cmd->add_option("--out-dir", mc.out_dir, "Output directory")->required();
  mc_cmd->add_option("--threads", mc.threads, "Worker threads (default: all cores)");

  SplitArgs sp;
  auto* split_cmd = app.add_subcommand("split", "Split-chain estimate on a Gaussian random walk path");
  split_cmd->add_option("--trajectory", sp.trajectory, "File with one state per line")->required();
  split_cmd->add_option("--sigma", sp.sigma, "Innovation standard deviation");
  split_cmd->add_option("--x0", sp.x0, "Small-set centre (default: path median)");
  split_cmd->add_option("--eps-range", sp.eps_range, "MIN MAX STEP of the half-width grid")->expected(3);
  split_cmd->add_option("--seed", sp.seed, "Seed for the Bernoulli draws");
  split_cmd->add_option("--k", sp.k, "Level k (default: round(ln N_n))");
  split_cmd->add_option("--curve-out", sp.curve_out, "Write the expected-blocks curve");
  split_cmd->add_option("--audit-out", sp.audit_out, "Write the per-step split audit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (estimate->parsed() && !est.k && est.k_range.empty()) {
    std::cerr << "error: estimate needs --k or --k-range\n";
    return 2;
  }

  try {
    if (estimate->parsed()) return run_estimate(est);
    if (simulate_cmd->parsed()) return run_simulate(sim);
    if (mc_cmd->parsed()) return run_mc(mc);
    if (split_cmd->parsed()) return run_split(sp);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
