#include "ziptail/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ziptail/csv.hpp"
#include "ziptail/dgp.hpp"
#include "ziptail/nummelin.hpp"
#include "ziptail/regen_markov.hpp"
#include "ziptail/tail_core.hpp"

#ifndef ZIPTAIL_VERSION
#define ZIPTAIL_VERSION "unknown"
#endif

namespace ziptail {

using nlohmann::json;

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw StatError("quantile of an empty sequence");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values, double level) {
  if (values.empty()) throw StatError("cannot summarize an empty sequence");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("summary level must lie in (0, 1)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  Summary s;
  s.count = sorted.size();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (const double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  s.q_lo = quantile_sorted(sorted, (1.0 - level) / 2.0);
  s.q_hi = quantile_sorted(sorted, (1.0 + level) / 2.0);
  return s;
}

namespace {

const std::map<std::string, Scenario>& scenario_names() {
  static const std::map<std::string, Scenario> names = {
      {"iid_scan", Scenario::iid_scan},
      {"bias_variance", Scenario::bias_variance},
      {"loglog_occupation", Scenario::loglog_occupation},
      {"markov_kde", Scenario::markov_kde},
      {"split_chain", Scenario::split_chain},
      {"averaged_estimator", Scenario::averaged_estimator},
      {"positive_recurrent", Scenario::positive_recurrent},
  };
  return names;
}

struct Defaults {
  std::size_t n;
  std::size_t replicates;
};

Defaults defaults_for(Scenario s) {
  switch (s) {
    case Scenario::iid_scan: return {1'000'000, 1};
    case Scenario::bias_variance: return {10'000, 100};
    case Scenario::loglog_occupation: return {100'000, 100};
    case Scenario::markov_kde: return {1'000'000, 50};
    case Scenario::split_chain: return {1'000'000, 1};
    case Scenario::averaged_estimator: return {100'000, 100};
    case Scenario::positive_recurrent: return {1'000'000, 50};
  }
  return {10'000, 1};
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double get_real(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> real_list(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(std::string("field '") + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  if (v.is_object()) {
    // {"min": a, "max": b, "step": s}
    const double lo = get_real(v, "min", 0.0), hi = get_real(v, "max", 0.0), step = get_real(v, "step", 0.0);
    if (!(step > 0.0) || !(hi >= lo)) throw ConfigError(std::string("bad range in '") + key + "'");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
  }
  throw ConfigError(std::string("field '") + key + "' must be an array or a {min,max,step} object");
}

// Holds an open CSV output and its manifest entry.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot open output file " + (dir_ / name).string());
    files_.push_back(name);
    return out;
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct RunContext {
  const ScenarioConfig& config;
  OutputSet& outputs;
  std::vector<std::uint64_t>& seeds;
  std::size_t failed = 0;
  std::size_t attempted = 0;

  template <class R>
  std::vector<R> replicate(std::size_t count, std::uint64_t master,
                           const std::function<R(Rng&, std::size_t)>& f) {
    auto results = run_replicates<R>(count, master, config.threads, f);
    std::vector<R> ok;
    for (std::size_t i = 0; i < count; ++i) {
      seeds.push_back(stream_seed(master, i));
      if (results[i]) ok.push_back(std::move(*results[i]));
    }
    failed += count - ok.size();
    attempted += count;
    if (static_cast<double>(count - ok.size()) > kMaxFailedFraction * static_cast<double>(count)) {
      throw StatError(std::to_string(count - ok.size()) + " of " + std::to_string(count) +
                      " replicates failed; aborting run");
    }
    return ok;
  }
};

void write_summary_row(std::ostream& out, const Summary& s) {
  out << fmt_real(s.mean) << ',' << fmt_real(s.q_lo) << ',' << fmt_real(s.q_hi) << ',' << fmt_real(s.sd) << ','
      << s.count;
}

struct SpecOrZeta {
  std::optional<HeavyTailSpec> heavy;
  std::optional<ZetaSpec> zeta;

  SampleBatch sample(Rng& rng, std::size_t n) const {
    return heavy ? ziptail::sample(*heavy, rng, n) : sample_zeta(*zeta, rng, n);
  }
};

SpecOrZeta distribution_from_json(const json& j) {
  SpecOrZeta d;
  if (j.is_object() && j.value("kind", std::string()) == "zeta") {
    d.zeta = zeta_from_json(j);
  } else {
    d.heavy = heavy_tail_from_json(j);
  }
  return d;
}

// Per-level aggregate of beta_hat over replicates, non-degenerate ones only.
void write_level_summary(std::ostream& out, LevelRange ks, const std::vector<std::vector<ScanRow>>& scans,
                         double level, const std::optional<HeavyTailSpec>& truth) {
  out << "k,mean,q_lo,q_hi,sd,count" << (truth ? ",beta_k_exact" : "") << '\n';
  for (int k = ks.first; k <= ks.last; ++k) {
    std::vector<double> vals;
    for (const auto& scan : scans) {
      const auto& row = scan[static_cast<std::size_t>(k - ks.first)];
      if (!row.degenerate) vals.push_back(row.beta_hat);
    }
    out << k << ',';
    if (vals.empty()) {
      out << "nan,nan,nan,nan,0";
    } else {
      write_summary_row(out, summarize(vals, level));
    }
    if (truth) out << ',' << fmt_real(beta_k_exact(*truth, k));
    out << '\n';
  }
}

LevelRange level_range(const json& p, std::size_t n) {
  const int k_max_default = static_cast<int>(std::floor(std::log(static_cast<double>(n))));
  const auto first = static_cast<int>(get_real(p, "k_min", 0));
  const auto last = static_cast<int>(get_real(p, "k_max", k_max_default));
  if (first < 0 || last < first) throw ConfigError("bad k range");
  return {first, last};
}

void run_iid_scan(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& p = cfg.params;
  const auto dist = distribution_from_json(p.value("dist", json{{"kind", "zeta"}, {"s", 1.15}}));
  const auto ks = level_range(p, cfg.n);

  auto scans = ctx.replicate<std::vector<ScanRow>>(cfg.replicates, cfg.seed, [&](Rng& rng, std::size_t) {
    return stability_scan(dist.sample(rng, cfg.n), ks, cfg.level);
  });
  if (scans.empty()) return;
  {
    auto out = ctx.outputs.open("iid_scan.csv");
    write_scan_csv(out, scans.front());
  }
  auto out = ctx.outputs.open("iid_scan_summary.csv");
  write_level_summary(out, ks, scans, cfg.level, dist.heavy);
}

std::string svf_label(const json& svf, std::size_t index, const std::vector<std::string>& taken) {
  std::string label = svf.contains("label") ? svf.at("label").get<std::string>()
                                            : svf.value("kind", std::string("constant"));
  if (std::find(taken.begin(), taken.end(), label) != taken.end()) label += "_" + std::to_string(index);
  return label;
}

void run_bias_variance(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& p = cfg.params;
  const double beta = get_real(p, "beta", 0.5);
  const json svfs = p.value("svfs", json::array({json{{"kind", "constant"}, {"C", 1.0}}, json{{"kind", "log"}, {"C", 1.0}}}));
  if (!svfs.is_array() || svfs.empty()) throw ConfigError("'svfs' must be a non-empty array");

  std::vector<HeavyTailSpec> specs;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < svfs.size(); ++i) {
    specs.push_back(heavy_tail_from_json(json{{"beta", beta}, {"svf", svfs[i]}}));
    labels.push_back(svf_label(svfs[i], i, labels));
  }
  const auto ks = level_range(p, cfg.n);

  using PerSpec = std::vector<std::vector<ScanRow>>;
  auto reps = ctx.replicate<PerSpec>(cfg.replicates, cfg.seed, [&](Rng& rng, std::size_t) {
    PerSpec out;
    for (const auto& spec : specs) out.push_back(stability_scan(sample(spec, rng, cfg.n), ks, cfg.level));
    return out;
  });
  for (std::size_t s = 0; s < specs.size(); ++s) {
    std::vector<std::vector<ScanRow>> scans;
    for (const auto& r : reps) scans.push_back(r[s]);
    auto out = ctx.outputs.open("bias_variance_" + labels[s] + ".csv");
    write_level_summary(out, ks, scans, cfg.level, specs[s]);
  }
}

StateSet state_set_from_json(const json& j, const StateSet& fallback) {
  if (j.is_null()) return fallback;
  const auto kind = j.value("kind", std::string());
  if (kind == "point") return StateSet::point(get_real(j, "x", 0.0));
  if (kind == "interval") return StateSet::interval(get_real(j, "lo", 0.0), get_real(j, "hi", 1.0));
  if (kind == "all") return StateSet::everything();
  throw ConfigError("state set kind must be point, interval or all");
}

void run_loglog_occupation(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& p = cfg.params;
  const auto spec = chain_from_json(p.value("chain", json{{"kind", "ssrw"}}));
  const auto set = state_set_from_json(p.value("set", json()), default_atom(spec));
  const auto grid = real_list(p, "t_grid", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  const double beta_ref = get_real(p, "beta_ref", 0.5);
  if (cfg.n < 2) throw ConfigError("loglog_occupation needs n >= 2");

  struct Rep {
    std::vector<double> counts;  // Sigma_{floor(nt)}(B) per grid point
    std::int64_t total = 0;
    std::vector<double> process;
  };
  auto reps = ctx.replicate<Rep>(cfg.replicates, cfg.seed, [&](Rng& rng, std::size_t) {
    const auto traj = simulate(spec, cfg.n, rng);
    Rep r;
    r.process = occupation_process(traj, set, grid, beta_ref, 1.0);
    const double scale = std::pow(static_cast<double>(cfg.n), beta_ref);
    for (const double v : r.process) {
      r.counts.push_back(std::round(v * scale));
    }
    r.total = occupation_time(traj, set);
    return r;
  });
  if (reps.empty()) return;

  {
    auto out = ctx.outputs.open("loglog_occupation.csv");
    // Paths that have not yet returned at time nt are left out of that row.
    out << "t,ln_nt,mean_ln_sigma,q_lo,q_hi,count,reference\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::vector<double> logs;
      for (const auto& r : reps) {
        if (r.counts[g] >= 1.0) logs.push_back(std::log(r.counts[g]));
      }
      const double ln_nt = std::log(std::floor(static_cast<double>(cfg.n) * grid[g]));
      out << fmt_real(grid[g]) << ',' << fmt_real(ln_nt) << ',';
      if (logs.empty()) {
        out << "nan,nan,nan,0";
      } else {
        const auto s = summarize(logs, cfg.level);
        out << fmt_real(s.mean) << ',' << fmt_real(s.q_lo) << ',' << fmt_real(s.q_hi) << ',' << s.count;
      }
      out << ',' << fmt_real(beta_ref * ln_nt) << '\n';
    }
  }
  {
    auto out = ctx.outputs.open("occupation_process.csv");
    out << "t,sigma_n\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out << fmt_real(grid[g]) << ',' << fmt_real(reps.front().process[g]) << '\n';
    }
  }
  std::vector<double> tildes;
  {
    auto out = ctx.outputs.open("beta_tilde.csv");
    out << "replicate,occupation,beta_tilde\n";
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const double bt = beta_tilde(reps[i].total, cfg.n);
      tildes.push_back(bt);
      out << i << ',' << reps[i].total << ',' << fmt_real(bt) << '\n';
    }
  }
  auto out = ctx.outputs.open("beta_tilde_summary.csv");
  out << "mean,q_lo,q_hi,sd,count\n";
  write_summary_row(out, summarize(tildes, cfg.level));
  out << '\n';
}

void write_histogram(std::ostream& out, const std::string& label, const std::string& estimator,
                     const std::vector<double>& values, int bins) {
  if (values.empty()) return;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn, hi = *mx;
  const double width = (hi - lo) / bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (const double v : values) {
    auto b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
    counts[std::min(b, counts.size() - 1)]++;
  }
  for (int b = 0; b < bins; ++b) {
    out << label << ',' << estimator << ',' << fmt_real(lo + width * b) << ',' << fmt_real(lo + width * (b + 1))
        << ',' << counts[static_cast<std::size_t>(b)] << '\n';
  }
}

void run_markov_kde(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& p = cfg.params;
  const json chains = p.value("chains", json::array({json{{"label", "ssrw"}, {"chain", {{"kind", "ssrw"}}}},
                                                     json{{"label", "bessel"}, {"chain", {{"kind", "bessel"}, {"delta", 0.2}}}}}));
  if (!chains.is_array() || chains.empty()) throw ConfigError("'chains' must be a non-empty array");
  const int bins = static_cast<int>(get_u64(p, "bins", 50));
  if (bins < 1) throw ConfigError("'bins' must be >= 1");

  struct Rep {
    std::size_t n_blocks = 0;
    TailEstimate est;
    double tilde = 0.0;
  };

  auto estimates = ctx.outputs.open("markov_estimates.csv");
  estimates << "label,replicate,N_n,k,beta_hat,degenerate,beta_tilde\n";
  auto hist = ctx.outputs.open("markov_histogram.csv");
  hist << "label,estimator,bin_lo,bin_hi,count\n";
  auto summary = ctx.outputs.open("markov_summary.csv");
  summary << "label,estimator,mean,q_lo,q_hi,sd,count\n";

  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto& entry = chains[c];
    const auto spec = chain_from_json(entry.at("chain"));
    const auto label = entry.value("label", "chain" + std::to_string(c));
    const auto atom = state_set_from_json(entry.value("atom", json()), default_atom(spec));
    const std::size_t count = get_u64(entry, "replicates", cfg.replicates);
    const std::size_t n = get_u64(entry, "n", cfg.n);

    auto reps = ctx.replicate<Rep>(count, stream_seed(cfg.seed, c), [&](Rng& rng, std::size_t) {
      const auto s = simulate_streaming(spec, n, rng, atom, atom);
      return Rep{s.blocks.n_blocks(), beta_hat_markov(s.blocks), beta_tilde(s.occupation, n)};
    });

    std::vector<double> hats, tildes;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const auto& r = reps[i];
      estimates << label << ',' << i << ',' << r.n_blocks << ',' << r.est.k << ',' << fmt_real(r.est.beta_hat)
                << ',' << (r.est.degenerate ? 1 : 0) << ',' << fmt_real(r.tilde) << '\n';
      hats.push_back(r.est.beta_hat);
      tildes.push_back(r.tilde);
    }
    write_histogram(hist, label, "beta_hat", hats, bins);
    write_histogram(hist, label, "beta_tilde", tildes, bins);
    if (!hats.empty()) {
      summary << label << ",beta_hat,";
      write_summary_row(summary, summarize(hats, cfg.level));
      summary << '\n' << label << ",beta_tilde,";
      write_summary_row(summary, summarize(tildes, cfg.level));
      summary << '\n';
    }
  }
}

void run_split_chain(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& p = cfg.params;
  const double sigma = get_real(p, "sigma", 1.0);
  const auto spec = gaussian_walk(sigma);
  const auto kernel = KernelDensity::gaussian_walk(sigma);
  const auto grid = real_list(p, "eps_grid", real_list(json{{"g", {{"min", 0.05}, {"max", 3.0}, {"step", 0.05}}}}, "g", {}));
  const std::optional<double> x0 = p.contains("x0") ? std::optional<double>(get_real(p, "x0", 0.0)) : std::nullopt;
  const std::optional<int> k = p.contains("k") ? std::optional<int>(static_cast<int>(get_real(p, "k", 0))) : std::nullopt;

  struct Rep {
    SplitEstimate split;
    std::vector<ScanRow> by_k;
  };
  auto reps = ctx.replicate<Rep>(cfg.replicates, cfg.seed, [&](Rng& rng, std::size_t) {
    const auto traj = simulate(spec, cfg.n, rng);
    Rep r{estimate_beta_split(traj.states, kernel, x0, grid, rng, k), {}};
    const int top = static_cast<int>(std::ceil(std::log(static_cast<double>(r.split.split.n_blocks())))) + 2;
    r.by_k = stability_scan(SampleBatch(r.split.split.durations), {0, top}, cfg.level);
    return r;
  });
  if (reps.empty()) return;

  {
    auto out = ctx.outputs.open("split_chain.csv");
    out << "replicate,x0,epsilon,delta,expected_blocks,pseudo_hits,N_n,k,beta_hat,degenerate\n";
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const auto& s = reps[i].split;
      const auto best = std::find(s.curve.eps.begin(), s.curve.eps.end(), s.curve.best_eps) - s.curve.eps.begin();
      out << i << ',' << fmt_real(s.small.x0) << ',' << fmt_real(s.small.eps) << ',' << fmt_real(s.small.delta) << ','
          << fmt_real(s.curve.expected[static_cast<std::size_t>(best)]) << ',' << s.split.hit_count() << ','
          << s.split.n_blocks() << ',' << s.estimate.k << ',' << fmt_real(s.estimate.beta_hat) << ','
          << (s.estimate.degenerate ? 1 : 0) << '\n';
    }
  }
  {
    auto out = ctx.outputs.open("split_epsilon_curve.csv");
    write_epsilon_curve_csv(out, reps.front().split.curve);
  }
  {
    auto out = ctx.outputs.open("split_beta_by_k.csv");
    write_scan_csv(out, reps.front().by_k);
  }
  std::vector<double> hats;
  for (const auto& r : reps) hats.push_back(r.split.estimate.beta_hat);
  auto out = ctx.outputs.open("split_summary.csv");
  out << "mean,q_lo,q_hi,sd,count\n";
  write_summary_row(out, summarize(hats, cfg.level));
  out << '\n';
}

void run_averaged_estimator(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& p = cfg.params;
  const auto spec = heavy_tail_from_json(p.value("dist", json{{"beta", 0.5}}));
  const double A = get_real(p, "A", 1.0);
  const auto ms = real_list(p, "m_values", {0, 1, 2, 3});
  const int k = p.contains("k") ? static_cast<int>(get_real(p, "k", 0)) : k_ln_rule(cfg.n, A);
  for (const double m : ms) {
    if (m < 0 || static_cast<int>(m) > k) throw ConfigError("window exceeds level");
  }

  auto reps = ctx.replicate<std::vector<double>>(cfg.replicates, cfg.seed, [&](Rng& rng, std::size_t) {
    const auto batch = sample(spec, rng, cfg.n);
    std::vector<double> out;
    for (const double m : ms) out.push_back(beta_hat_averaged(batch, k, static_cast<int>(m)).beta_hat);
    return out;
  });
  auto out = ctx.outputs.open("averaged_estimator.csv");
  out << "m,k,mean,q_lo,q_hi,sd,count,beta_km_exact\n";
  for (std::size_t j = 0; j < ms.size(); ++j) {
    const int m = static_cast<int>(ms[j]);
    std::vector<double> vals;
    for (const auto& r : reps) vals.push_back(r[j]);
    double exact = 0.0;
    for (int i = -m; i <= m; ++i) exact += beta_k_exact(spec, k + i);
    exact /= 2 * m + 1;
    out << m << ',' << k << ',';
    write_summary_row(out, summarize(vals, cfg.level));
    out << ',' << fmt_real(exact) << '\n';
  }
}

void run_positive_recurrent(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& p = cfg.params;
  const auto eta = heavy_tail_from_json(p.value("eta", json{{"beta", 1.5}}));
  // round(ln N_n) leaves no tail mass once the durations have a finite mean;
  // A must stay below 1 / beta'.
  const double A = get_real(p, "A", 0.4);
  if (!(A > 0.0 && A < 1.0 / eta.beta())) throw ConfigError("positive_recurrent needs 0 < A < 1 / beta'");
  const ChainSpec spec = chain::Renewal{eta};
  const auto atom = default_atom(spec);

  struct Rep {
    std::size_t n_blocks;
    TailEstimate est;
    double beta_k;
    double studentized;
  };
  auto reps = ctx.replicate<Rep>(cfg.replicates, cfg.seed, [&](Rng& rng, std::size_t) {
    const auto s = simulate_streaming(spec, cfg.n, rng, atom, atom);
    if (s.blocks.n_blocks() < 2) throw StatError("insufficient regenerations");
    const auto est = beta_hat_markov(s.blocks, k_ln_rule(s.blocks.n_blocks(), A));
    if (est.degenerate) throw StatError("degenerate estimate");
    const double bk = beta_k_exact(eta, est.k);
    const double stud = std::sqrt(static_cast<double>(est.n) * est.p_hat_k) * (est.beta_hat - bk) /
                        std::sqrt(std::expm1(est.beta_hat));
    return Rep{s.blocks.n_blocks(), est, bk, stud};
  });
  std::vector<double> hats, studs;
  {
    auto out = ctx.outputs.open("positive_recurrent.csv");
    out << "replicate,N_n,k,beta_hat,beta_k_exact,studentized\n";
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const auto& r = reps[i];
      out << i << ',' << r.n_blocks << ',' << r.est.k << ',' << fmt_real(r.est.beta_hat) << ','
          << fmt_real(r.beta_k) << ',' << fmt_real(r.studentized) << '\n';
      hats.push_back(r.est.beta_hat);
      studs.push_back(r.studentized);
    }
  }
  if (hats.empty()) return;
  auto out = ctx.outputs.open("positive_recurrent_summary.csv");
  out << "quantity,mean,q_lo,q_hi,sd,count\nbeta_hat,";
  write_summary_row(out, summarize(hats, cfg.level));
  out << "\nstudentized,";
  write_summary_row(out, summarize(studs, cfg.level));
  out << '\n';
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& [name, value] : scenario_names()) {
    if (value == s) return name;
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  const auto it = scenario_names().find(name);
  if (it == scenario_names().end()) throw ConfigError("unknown scenario '" + name + "'");
  return it->second;
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("scenario") || !j.at("scenario").is_string()) throw ConfigError("config needs a 'scenario' string");
  ScenarioConfig c;
  c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  const auto d = defaults_for(c.scenario);
  c.replicates = get_u64(j, "replicates", d.replicates);
  c.n = get_u64(j, "n", d.n);
  c.seed = get_u64(j, "seed", 0);
  c.threads = static_cast<unsigned>(get_u64(j, "threads", 0));
  c.level = get_real(j, "level", 0.95);
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("'params' must be an object");
    c.params = j.at("params");
  }
  if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (c.n < 2) throw ConfigError("n must be >= 2");
  if (!(c.level > 0.0 && c.level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  return c;
}

json to_json(const ScenarioConfig& c) {
  return {{"scenario", to_string(c.scenario)}, {"replicates", c.replicates}, {"n", c.n}, {"seed", c.seed},
          {"threads", c.threads}, {"level", c.level}, {"params", c.params}};
}

json RunManifest::to_json() const {
  return {{"config", config},
          {"code_version", code_version},
          {"seeds", seeds},
          {"outputs", outputs},
          {"failed_replicates", failed_replicates},
          {"wall_clock_seconds", wall_clock_seconds}};
}

std::string code_version() { return ZIPTAIL_VERSION; }

RunManifest run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  OutputSet outputs(out_dir);
  RunManifest manifest;
  manifest.config = to_json(config);
  manifest.code_version = code_version();
  RunContext ctx{config, outputs, manifest.seeds};

  switch (config.scenario) {
    case Scenario::iid_scan: run_iid_scan(ctx); break;
    case Scenario::bias_variance: run_bias_variance(ctx); break;
    case Scenario::loglog_occupation: run_loglog_occupation(ctx); break;
    case Scenario::markov_kde: run_markov_kde(ctx); break;
    case Scenario::split_chain: run_split_chain(ctx); break;
    case Scenario::averaged_estimator: run_averaged_estimator(ctx); break;
    case Scenario::positive_recurrent: run_positive_recurrent(ctx); break;
  }

  manifest.outputs = outputs.files();
  manifest.failed_replicates = ctx.failed;
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out(out_dir / "manifest.json");
  out << manifest.to_json().dump(2) << '\n';
  return manifest;
}

}  // namespace ziptail
