#include "ziptail/nummelin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "ziptail/csv.hpp"
#include "ziptail/error.hpp"

namespace ziptail {
namespace {

double normal_pdf(double z, double sigma) {
  const double u = z / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

constexpr int kLattice = 64;

}  // namespace

KernelDensity KernelDensity::gaussian_walk(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("kernel sigma must be positive");
  KernelDensity k;
  k.eval = [sigma](double x, double y) { return normal_pdf(y - x, sigma); };
  k.increment_density = [sigma](double z) { return normal_pdf(z, sigma); };
  return k;
}

KernelDensity KernelDensity::tar(const chain::Tar& tar) {
  if (tar.alpha1 == 1.0) return gaussian_walk(tar.sigma);
  KernelDensity k;
  k.eval = [tar](double x, double y) {
    return normal_pdf(y - chain::tar_transition(tar, x, 0.0), tar.sigma);
  };
  return k;
}

SmallSet SmallSet::make(const KernelDensity& kernel, double x0, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("small-set half-width must be positive");
  SmallSet s;
  s.x0 = x0;
  s.eps = eps;
  s.psi_const = 1.0 / (2.0 * eps);

  double inf_pi;
  if (kernel.increment_density) {
    inf_pi = kernel.increment_density(2.0 * eps);
  } else {
    inf_pi = std::numeric_limits<double>::infinity();
    for (int a = 0; a < kLattice; ++a) {
      const double x = x0 - eps + 2.0 * eps * a / (kLattice - 1);
      for (int b = 0; b < kLattice; ++b) {
        const double y = x0 - eps + 2.0 * eps * b / (kLattice - 1);
        inf_pi = std::min(inf_pi, kernel(x, y));
      }
    }
  }
  s.delta = 2.0 * eps * inf_pi;
  if (!(s.delta > 0.0 && s.delta <= 1.0)) {
    throw ConfigError("minorization constant " + std::to_string(s.delta) + " outside (0, 1] for eps = " +
                      std::to_string(eps));
  }
  return s;
}

double expected_blocks(std::span<const double> states, const KernelDensity& kernel,
                       const SmallSet& small) {
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < states.size(); ++i) {
    if (!small.contains(states[i]) || !small.contains(states[i + 1])) continue;
    const double p = kernel(states[i], states[i + 1]);
    if (!(p > 0.0)) throw StatError("kernel vanishes on small set");
    sum += 1.0 / p;
  }
  return small.delta * small.psi_const * sum;
}

double expected_blocks(std::span<const double> states, const KernelDensity& kernel, double x0,
                       double eps) {
  return expected_blocks(states, kernel, SmallSet::make(kernel, x0, eps));
}

EpsilonCurve select_epsilon(std::span<const double> states, const KernelDensity& kernel, double x0,
                            std::span<const double> eps_grid) {
  if (eps_grid.empty()) throw ConfigError("epsilon grid is empty");
  const double widest = *std::max_element(eps_grid.begin(), eps_grid.end());

  // Only pairs inside the widest window can contribute; gather them once.
  struct Pair {
    double x, y;
    double inv_pi;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 1; i + 1 < states.size(); ++i) {
    const auto inside = [&](double x) { return x >= x0 - widest && x <= x0 + widest; };
    if (!inside(states[i]) || !inside(states[i + 1])) continue;
    const double p = kernel(states[i], states[i + 1]);
    pairs.push_back({states[i], states[i + 1], p > 0.0 ? 1.0 / p : std::numeric_limits<double>::infinity()});
  }

  EpsilonCurve curve;
  curve.eps.assign(eps_grid.begin(), eps_grid.end());
  curve.expected.reserve(eps_grid.size());
  double best = 0.0;
  for (const double eps : eps_grid) {
    const auto small = SmallSet::make(kernel, x0, eps);
    double sum = 0.0;
    for (const auto& pr : pairs) {
      if (!small.contains(pr.x) || !small.contains(pr.y)) continue;
      if (std::isinf(pr.inv_pi)) throw StatError("kernel vanishes on small set");
      sum += pr.inv_pi;
    }
    const double value = small.delta * small.psi_const * sum;
    curve.expected.push_back(value);
    if (value > best) {
      best = value;
      curve.best_eps = eps;
    }
  }
  if (!(best > 0.0)) throw StatError("small set never visited");
  return curve;
}

double split_probability(const KernelDensity& kernel, const SmallSet& small, double x, double y) {
  if (!small.contains(y)) return 0.0;
  const double p = kernel(x, y);
  if (!(p > 0.0)) throw StatError("kernel vanishes on small set");
  return small.delta * small.psi_const / p;
}

SplitChainResult sample_split_chain(std::span<const double> states, const KernelDensity& kernel,
                                    const SmallSet& small, Rng& rng) {
  if (states.size() < 3) throw ConfigError("split chain needs a trajectory with n >= 2");
  SplitChainResult out;
  for (std::size_t i = 1; i + 1 < states.size(); ++i) {
    if (!small.contains(states[i])) continue;
    const double prob = split_probability(kernel, small, states[i], states[i + 1]);
    if (prob > 1.0 + 1e-12) throw StatError("minorization violated");
    const bool y = uniform01(rng) < prob;
    const auto t = static_cast<std::int64_t>(i);
    out.k_visits.push_back(t);
    out.y_flags.push_back(y ? 1 : 0);
    if (y) {
      if (!out.pseudo_hit_times.empty()) out.durations.push_back(t - out.pseudo_hit_times.back());
      out.pseudo_hit_times.push_back(t);
    }
  }
  return out;
}

double median(std::span<const double> values) {
  if (values.empty()) throw StatError("median of an empty sequence");
  std::vector<double> v(values.begin(), values.end());
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

SplitEstimate estimate_beta_split(std::span<const double> states, const KernelDensity& kernel,
                                  std::optional<double> x0, std::span<const double> eps_grid,
                                  Rng& rng, std::optional<int> k) {
  const double center = x0.value_or(median(states));
  SplitEstimate out;
  out.curve = select_epsilon(states, kernel, center, eps_grid);
  out.small = SmallSet::make(kernel, center, out.curve.best_eps);
  out.split = sample_split_chain(states, kernel, out.small, rng);
  const auto n_blocks = out.split.n_blocks();
  if (n_blocks < 2) throw StatError("insufficient regenerations");
  const int level = k.value_or(static_cast<int>(std::lround(std::log(static_cast<double>(n_blocks)))));
  out.estimate = beta_hat(SampleBatch(out.split.durations), level);
  return out;
}

void write_epsilon_curve_csv(std::ostream& out, const EpsilonCurve& curve) {
  out << "epsilon,expected_blocks\n";
  for (std::size_t i = 0; i < curve.eps.size(); ++i) {
    out << fmt_real(curve.eps[i]) << ',' << fmt_real(curve.expected[i]) << '\n';
  }
}

void write_split_audit_csv(std::ostream& out, std::span<const double> states, const SmallSet& small,
                           const SplitChainResult& split) {
  out << "i,X_i,in_K,Y_i\n";
  std::size_t next = 0;
  for (std::size_t i = 1; i + 1 < states.size(); ++i) {
    out << i << ',' << fmt_real(states[i]) << ',';
    if (next < split.k_visits.size() && split.k_visits[next] == static_cast<std::int64_t>(i)) {
      out << "1," << static_cast<int>(split.y_flags[next]) << '\n';
      ++next;
    } else {
      out << (small.contains(states[i]) ? 1 : 0) << ",\n";
    }
  }
}

}  // namespace ziptail
