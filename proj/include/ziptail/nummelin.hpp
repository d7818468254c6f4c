#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ziptail/regen_markov.hpp"
#include "ziptail/rng.hpp"
#include "ziptail/tail_core.hpp"

namespace ziptail {

/// Transition density pi(x, y) with respect to Lebesgue measure.
struct KernelDensity {
  std::function<double(double, double)> eval;
  // Set when pi(x, y) = f(y - x) with f symmetric and unimodal; the
  // minorization constant is then exact.
  std::function<double(double)> increment_density;

  double operator()(double x, double y) const { return eval(x, y); }

  static KernelDensity gaussian_walk(double sigma = 1.0);
  static KernelDensity tar(const chain::Tar& tar);
};

/// V = [x0 - eps, x0 + eps] with the uniform minorizing density 1 / (2 eps).
struct SmallSet {
  double x0 = 0.0;
  double eps = 0.0;
  double delta = 0.0;      // 2 eps inf_{V^2} pi
  double psi_const = 0.0;  // 1 / (2 eps)

  bool contains(double x) const { return x >= x0 - eps && x <= x0 + eps; }

  /// Computes delta from the kernel: 2 eps f(2 eps) for convolution kernels,
  /// otherwise 2 eps times the minimum of pi over a 64 x 64 lattice on V^2
  /// (an approximation of the infimum). Throws ConfigError unless
  /// 0 < delta <= 1.
  static SmallSet make(const KernelDensity& kernel, double x0, double eps);
};

/// Conditional expectation of the number of pseudo-regenerations given the
/// path, (delta / 2 eps) sum_i 1{(X_i, X_{i+1}) in V^2} / pi(X_i, X_{i+1}),
/// over i = 1 .. n-1.
double expected_blocks(std::span<const double> states, const KernelDensity& kernel,
                       const SmallSet& small);
double expected_blocks(std::span<const double> states, const KernelDensity& kernel, double x0,
                       double eps);

struct EpsilonCurve {
  double best_eps = 0.0;
  std::vector<double> eps;
  std::vector<double> expected;
};

/// Grid point maximizing expected_blocks (first one on ties), with the whole
/// curve. Throws StatError("small set never visited") if every value is 0.
EpsilonCurve select_epsilon(std::span<const double> states, const KernelDensity& kernel, double x0,
                            std::span<const double> eps_grid);

struct SplitChainResult {
  std::vector<std::int64_t> k_visits;  // i in 1..n-1 with X_i in K
  std::vector<std::uint8_t> y_flags;   // Y_i at each of k_visits
  std::vector<std::int64_t> pseudo_hit_times;
  std::vector<std::int64_t> durations;

  std::size_t hit_count() const { return pseudo_hit_times.size(); }
  std::size_t n_blocks() const { return durations.size(); }
};

/// Draws Y_i ~ Bernoulli(delta psi(X_{i+1}) / pi(X_i, X_{i+1})) at each visit
/// to K (parameter 0 when X_{i+1} leaves K). Throws StatError("minorization
/// violated") if a parameter exceeds 1 + 1e-12.
SplitChainResult sample_split_chain(std::span<const double> states, const KernelDensity& kernel,
                                    const SmallSet& small, Rng& rng);

/// Bernoulli parameter used for the pair (x, y) with x in K.
double split_probability(const KernelDensity& kernel, const SmallSet& small, double x, double y);

struct SplitEstimate {
  SmallSet small;
  EpsilonCurve curve;
  SplitChainResult split;
  TailEstimate estimate;
};

double median(std::span<const double> values);

/// select_epsilon -> sample_split_chain -> beta_hat on pseudo-block durations
/// with k defaulting to round(ln N_n). x0 defaults to the path median.
SplitEstimate estimate_beta_split(std::span<const double> states, const KernelDensity& kernel,
                                  std::optional<double> x0, std::span<const double> eps_grid,
                                  Rng& rng, std::optional<int> k = std::nullopt);

void write_epsilon_curve_csv(std::ostream& out, const EpsilonCurve& curve);

/// Audit dump `i,X_i,in_K,Y_i` for i = 1..n-1; Y_i is empty outside K.
void write_split_audit_csv(std::ostream& out, std::span<const double> states, const SmallSet& small,
                           const SplitChainResult& split);

}  // namespace ziptail
