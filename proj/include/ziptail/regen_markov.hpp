#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ziptail/dgp.hpp"
#include "ziptail/rng.hpp"
#include "ziptail/tail_core.hpp"

namespace ziptail {

namespace chain {

/// Simple symmetric random walk on Z, or on N reflected at 0.
struct Ssrw {
  bool reflected = false;
};

/// Bessel random walk on N, reflected at 0, with up-probability
/// (1 + h(k) - delta / (2k)) / 2 at k >= 1 and h(k) = h_c / (k ln(k + 1)).
struct Bessel {
  double delta = 0.0;
  double h_c = 0.0;
};

/// X_n = (X_{n-1} - 1) 1{X_{n-1} > 1} + eta_n 1{X_{n-1} in [0, 1]}.
struct Renewal {
  HeavyTailSpec eta;
};

/// X_n = alpha1 X_{n-1} 1{X_{n-1} <= threshold} + X_{n-1} 1{X_{n-1} > threshold}
///       + sigma N(0, 1).
struct Tar {
  double alpha1 = 1.0;
  double threshold = 0.0;
  double sigma = 1.0;
};

/// One transition of the renewal chain given the draw eta used on the atom.
double renewal_transition(double x, double eta);

/// One TAR transition given the innovation (already scaled by sigma).
double tar_transition(const Tar& tar, double x, double innovation);

}  // namespace chain

using ChainSpec = std::variant<chain::Ssrw, chain::Bessel, chain::Renewal, chain::Tar>;

/// Gaussian random walk X_{n+1} = X_n + sigma Z_n, expressed as a TAR chain.
ChainSpec gaussian_walk(double sigma = 1.0);

/// Membership test for a set of states.
struct StateSet {
  enum class Kind { point, interval, all };
  Kind kind = Kind::all;
  double lo = 0.0;
  double hi = 0.0;

  static StateSet point(double x) { return {Kind::point, x, x}; }
  static StateSet interval(double lo, double hi) { return {Kind::interval, lo, hi}; }
  static StateSet everything() { return {}; }

  bool contains(double x) const {
    switch (kind) {
      case Kind::point: return x == lo;
      case Kind::interval: return x >= lo && x <= hi;
      case Kind::all: return true;
    }
    return false;
  }
};

/// Atom of a regenerative chain: {0} for the walks, [0, 1] for the renewal
/// chain. Throws ConfigError for TAR, which has no accessible atom.
StateSet default_atom(const ChainSpec& spec);

/// Initial state: 0 for the walks and TAR, 0.5 for the renewal chain.
double initial_state(const ChainSpec& spec);

/// Generates one path step by step.
class ChainStepper {
 public:
  /// Validates the parameters; throws ConfigError.
  explicit ChainStepper(ChainSpec spec);

  double state() const { return x_; }

  /// Advances one step and returns the new state. Throws StatError when a
  /// Bessel up-probability at a visited state falls outside (0, 1).
  double step(Rng& rng);

 private:
  ChainSpec spec_;
  double x_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// X_0 .. X_n.
struct Trajectory {
  std::vector<double> states;
  std::size_t n() const { return states.empty() ? 0 : states.size() - 1; }
};

Trajectory simulate(const ChainSpec& spec, std::size_t n, Rng& rng);

struct RegenerationBlocks {
  std::vector<std::int64_t> hit_times;  // {i >= 1 : X_i in atom}
  std::vector<std::int64_t> durations;  // consecutive gaps of hit_times
  std::size_t n_blocks() const { return durations.size(); }
};

RegenerationBlocks regeneration_times(std::span<const double> states, const StateSet& atom);
inline RegenerationBlocks regeneration_times(const Trajectory& traj, const StateSet& atom) {
  return regeneration_times(traj.states, atom);
}

/// Summary kept while streaming a long path without storing its states.
struct StreamSummary {
  RegenerationBlocks blocks;
  std::int64_t occupation = 0;  // visits to the occupation set among X_1..X_n
  std::size_t n = 0;
};

/// Simulates n steps and keeps only atom hit times and the occupation count
/// of `occupation_set`.
StreamSummary simulate_streaming(const ChainSpec& spec, std::size_t n, Rng& rng,
                                 const StateSet& atom, const StateSet& occupation_set);

/// tail_core::beta_hat on the block durations, k defaulting to round(ln N_n).
/// Throws StatError("insufficient regenerations") when N_n < 2.
TailEstimate beta_hat_markov(const RegenerationBlocks& blocks, std::optional<int> k = std::nullopt);
TailEstimate beta_hat_markov(const Trajectory& traj, const StateSet& atom,
                             std::optional<int> k = std::nullopt);

/// #{1 <= i <= n : X_i in B}.
std::int64_t occupation_time(std::span<const double> states, const StateSet& B);
inline std::int64_t occupation_time(const Trajectory& traj, const StateSet& B) {
  return occupation_time(traj.states, B);
}

/// ln(Sigma_n(B)) / ln(n).
double beta_tilde(std::int64_t occupation, std::size_t n);
double beta_tilde(const Trajectory& traj, const StateSet& B);

/// Sigma_{floor(n t)}(B) / (n^beta L_value) at each t of `grid`; the values are
/// only defined up to the unknown slowly varying normalization.
std::vector<double> occupation_process(const Trajectory& traj, const StateSet& B,
                                       std::span<const double> grid, double beta,
                                       double L_value = 1.0);

/// log Gamma(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);

/// m! / Gamma(1 + m beta): m-th moment of the Mittag-Leffler law M_beta(1).
double mittag_leffler_moment(double beta, int m);

/// CSV `j,hit_time,duration`; row j reports the block starting at hit j.
void write_blocks_csv(std::ostream& out, const RegenerationBlocks& blocks);

// {"kind":"bessel","delta":0.2}, {"kind":"ssrw","reflected":false},
// {"kind":"renewal","eta":{...}}, {"kind":"tar","alpha1":0.5,"threshold":0,"sigma":1}
ChainSpec chain_from_json(const nlohmann::json& j);
bool is_chain_json(const nlohmann::json& j);

}  // namespace ziptail
