#include "ziptail/regen_markov.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "ziptail/error.hpp"

namespace ziptail {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double bessel_up_probability(const chain::Bessel& b, double k) {
  const double h = b.h_c == 0.0 ? 0.0 : b.h_c / (k * std::log(k + 1.0));
  return (1.0 + h - b.delta / (2.0 * k)) / 2.0;
}

}  // namespace

double chain::renewal_transition(double x, double eta) {
  if (x >= 0.0 && x <= 1.0) return eta;
  return x > 1.0 ? x - 1.0 : 0.0;
}

double chain::tar_transition(const Tar& tar, double x, double innovation) {
  return (x <= tar.threshold ? tar.alpha1 * x : x) + innovation;
}

ChainSpec gaussian_walk(double sigma) { return chain::Tar{1.0, 0.0, sigma}; }

StateSet default_atom(const ChainSpec& spec) {
  return std::visit(overloaded{
                        [](const chain::Ssrw&) { return StateSet::point(0.0); },
                        [](const chain::Bessel&) { return StateSet::point(0.0); },
                        [](const chain::Renewal&) { return StateSet::interval(0.0, 1.0); },
                        [](const chain::Tar&) -> StateSet {
                          throw ConfigError("TAR chains have no accessible atom");
                        },
                    },
                    spec);
}

double initial_state(const ChainSpec& spec) {
  return std::holds_alternative<chain::Renewal>(spec) ? 0.5 : 0.0;
}

ChainStepper::ChainStepper(ChainSpec spec) : spec_(std::move(spec)), x_(initial_state(spec_)) {
  std::visit(overloaded{
                 [](const chain::Ssrw&) {},
                 [](const chain::Bessel& b) {
                   if (!(b.delta >= -1.0) || !std::isfinite(b.delta)) {
                     throw ConfigError("Bessel drift delta must be >= -1");
                   }
                   if (!std::isfinite(b.h_c)) throw ConfigError("Bessel h_c must be finite");
                 },
                 [](const chain::Renewal&) {},
                 [](const chain::Tar& t) {
                   if (!(t.sigma > 0.0)) throw ConfigError("TAR noise sigma must be positive");
                   if (!std::isfinite(t.alpha1) || !std::isfinite(t.threshold)) {
                     throw ConfigError("TAR parameters must be finite");
                   }
                 },
             },
             spec_);
}

double ChainStepper::step(Rng& rng) {
  x_ = std::visit(
      overloaded{
          [&](const chain::Ssrw& w) {
            const bool up = uniform01(rng) < 0.5;
            if (w.reflected && x_ == 0.0) return 1.0;
            return up ? x_ + 1.0 : x_ - 1.0;
          },
          [&](const chain::Bessel& b) {
            const double u = uniform01(rng);
            if (x_ == 0.0) return 1.0;
            const double p = bessel_up_probability(b, x_);
            if (!(p > 0.0 && p < 1.0)) {
              throw StatError("Bessel up-probability " + std::to_string(p) + " outside (0, 1) at k = " +
                              std::to_string(static_cast<long long>(x_)));
            }
            return u < p ? x_ + 1.0 : x_ - 1.0;
          },
          [&](const chain::Renewal& r) {
            const bool on_atom = x_ >= 0.0 && x_ <= 1.0;
            return chain::renewal_transition(x_, on_atom ? static_cast<double>(draw(r.eta, rng)) : 0.0);
          },
          [&](const chain::Tar& t) { return chain::tar_transition(t, x_, t.sigma * normal_(rng)); },
      },
      spec_);
  return x_;
}

Trajectory simulate(const ChainSpec& spec, std::size_t n, Rng& rng) {
  if (n < 1) throw ConfigError("trajectory length must be >= 1");
  ChainStepper stepper(spec);
  Trajectory traj;
  traj.states.reserve(n + 1);
  traj.states.push_back(stepper.state());
  for (std::size_t i = 0; i < n; ++i) traj.states.push_back(stepper.step(rng));
  return traj;
}

RegenerationBlocks regeneration_times(std::span<const double> states, const StateSet& atom) {
  RegenerationBlocks blocks;
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (!atom.contains(states[i])) continue;
    const auto t = static_cast<std::int64_t>(i);
    if (!blocks.hit_times.empty()) blocks.durations.push_back(t - blocks.hit_times.back());
    blocks.hit_times.push_back(t);
  }
  return blocks;
}

StreamSummary simulate_streaming(const ChainSpec& spec, std::size_t n, Rng& rng,
                                 const StateSet& atom, const StateSet& occupation_set) {
  if (n < 1) throw ConfigError("trajectory length must be >= 1");
  ChainStepper stepper(spec);
  StreamSummary out;
  out.n = n;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = stepper.step(rng);
    if (occupation_set.contains(x)) ++out.occupation;
    if (atom.contains(x)) {
      const auto t = static_cast<std::int64_t>(i);
      if (!out.blocks.hit_times.empty()) out.blocks.durations.push_back(t - out.blocks.hit_times.back());
      out.blocks.hit_times.push_back(t);
    }
  }
  return out;
}

TailEstimate beta_hat_markov(const RegenerationBlocks& blocks, std::optional<int> k) {
  const auto n_blocks = blocks.n_blocks();
  if (n_blocks < 2) throw StatError("insufficient regenerations");
  const int level = k.value_or(static_cast<int>(std::lround(std::log(static_cast<double>(n_blocks)))));
  return beta_hat(SampleBatch(blocks.durations), level);
}

TailEstimate beta_hat_markov(const Trajectory& traj, const StateSet& atom, std::optional<int> k) {
  return beta_hat_markov(regeneration_times(traj, atom), k);
}

std::int64_t occupation_time(std::span<const double> states, const StateSet& B) {
  std::int64_t count = 0;
  for (std::size_t i = 1; i < states.size(); ++i) count += B.contains(states[i]) ? 1 : 0;
  return count;
}

double beta_tilde(std::int64_t occupation, std::size_t n) {
  if (n < 2) throw ConfigError("beta_tilde needs n >= 2");
  if (occupation < 1) throw StatError("set never visited");
  return std::log(static_cast<double>(occupation)) / std::log(static_cast<double>(n));
}

double beta_tilde(const Trajectory& traj, const StateSet& B) {
  return beta_tilde(occupation_time(traj, B), traj.n());
}

std::vector<double> occupation_process(const Trajectory& traj, const StateSet& B,
                                       std::span<const double> grid, double beta, double L_value) {
  if (!(L_value > 0.0)) throw ConfigError("L_value must be positive");
  const std::size_t n = traj.n();

  // Running counts Sigma_m(B) for m = 0..n.
  std::vector<std::int64_t> running(n + 1, 0);
  for (std::size_t m = 1; m <= n; ++m) {
    running[m] = running[m - 1] + (B.contains(traj.states[m]) ? 1 : 0);
  }

  const double scale = std::pow(static_cast<double>(n), beta) * L_value;
  std::vector<double> out;
  out.reserve(grid.size());
  for (const double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("occupation grid points must lie in [0, 1]");
    const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * t));
    out.push_back(static_cast<double>(running[std::min(m, n)]) / scale);
  }
  return out;
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw ConfigError("log_gamma needs x > 0");
  static constexpr std::array<double, 9> p = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double a = p[0];
  for (std::size_t i = 1; i < p.size(); ++i) a += p[i] / (z + static_cast<double>(i));
  const double t = z + g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

double mittag_leffler_moment(double beta, int m) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("Mittag-Leffler index must lie in (0, 1)");
  if (m < 0) throw ConfigError("moment order must be >= 0");
  if (m == 0) return 1.0;
  return std::exp(log_gamma(m + 1.0) - log_gamma(1.0 + m * beta));
}

void write_blocks_csv(std::ostream& out, const RegenerationBlocks& blocks) {
  out << "j,hit_time,duration\n";
  for (std::size_t j = 0; j < blocks.durations.size(); ++j) {
    out << (j + 1) << ',' << blocks.hit_times[j] << ',' << blocks.durations[j] << '\n';
  }
}

namespace {

double num(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

bool is_chain_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) return false;
  const auto kind = j.at("kind").get<std::string>();
  return kind == "ssrw" || kind == "bessel" || kind == "renewal" || kind == "tar" || kind == "gaussian_walk";
}

ChainSpec chain_from_json(const nlohmann::json& j) {
  if (!is_chain_json(j)) throw ConfigError("chain spec needs a kind among ssrw, bessel, renewal, tar");
  const auto kind = j.at("kind").get<std::string>();
  ChainSpec spec;
  if (kind == "ssrw") {
    spec = chain::Ssrw{j.value("reflected", false)};
  } else if (kind == "bessel") {
    spec = chain::Bessel{num(j, "delta", 0.0), num(j, "h_c", 0.0)};
  } else if (kind == "renewal") {
    if (!j.contains("eta")) throw ConfigError("renewal chain needs an 'eta' heavy-tail spec");
    spec = chain::Renewal{heavy_tail_from_json(j.at("eta"))};
  } else if (kind == "tar") {
    spec = chain::Tar{num(j, "alpha1", 1.0), num(j, "threshold", 0.0), num(j, "sigma", 1.0)};
  } else {
    spec = gaussian_walk(num(j, "sigma", 1.0));
  }
  ChainStepper validate(spec);
  return spec;
}

}  // namespace ziptail
