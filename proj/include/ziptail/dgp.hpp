#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "ziptail/rng.hpp"
#include "ziptail/tail_core.hpp"

namespace ziptail {

// Slowly varying factors L(n) of the model P(S > n) = min(1, n^-beta L(n)).
namespace svf {

struct Constant {
  double C = 1.0;
};

/// L(n) = C ln(e n), i.e. C (1 + ln n), so that L(1) = C > 0.
struct Log {
  double C = 1.0;
};

/// L(n) = C / ln(e n).
struct InvLog {
  double C = 1.0;
};

/// L(n) = C (1 - (c / |rho|) U n^rho): second-order slow variation with a
/// constant U and g(n) = U n^rho.
struct SR2 {
  double c = 1.0;
  double rho = -1.0;
  double U = 1.0;
  double C = 1.0;
};

/// L(n) = e^C0 (1 + n^-lambda).
struct AsympConst {
  double C0 = 0.0;
  double lambda = 1.0;
};

}  // namespace svf

using SlowlyVaryingSpec = std::variant<svf::Constant, svf::Log, svf::InvLog, svf::SR2, svf::AsympConst>;

/// Evaluates L at a real argument x >= 1.
double svf_value(const SlowlyVaryingSpec& svf, double x);

/// A validated discrete heavy-tailed law P(S > n) = min(1, n^-beta L(n)).
class HeavyTailSpec {
 public:
  /// Throws ConfigError when parameters are out of range or the induced map
  /// is not a survival function on [1, 1e7].
  HeavyTailSpec(double beta, SlowlyVaryingSpec svf);

  double beta() const { return beta_; }
  const SlowlyVaryingSpec& svf() const { return svf_; }

  /// True for Constant with C = 1, where P(S > n) = n^-beta exactly.
  bool is_exact_pareto() const;

  /// P(S > n); equals 1 for n <= 0.
  double survival(std::int64_t n) const;

 private:
  double beta_;
  SlowlyVaryingSpec svf_;
};

/// Pmf P(W = j) proportional to j^-s; tail index s - 1.
class ZetaSpec {
 public:
  explicit ZetaSpec(double s);
  double s() const { return s_; }
  double tail_index() const { return s_ - 1.0; }

 private:
  double s_;
};

double survival_exact(const HeavyTailSpec& spec, std::int64_t n);

/// One draw by inversion. `u` in (0, 1]. Closed form ceil(u^(-1/beta)) for the
/// exact Pareto law; otherwise min{n >= 1 : survival(n) < u} by doubling and
/// bisection. Saturates at kValueCap.
std::int64_t invert_survival(const HeavyTailSpec& spec, double u);

std::int64_t draw(const HeavyTailSpec& spec, Rng& rng);
SampleBatch sample(const HeavyTailSpec& spec, Rng& rng, std::size_t count);

/// ln p_k - ln p_{k+1} with p_l = survival(floor(e^l)).
double beta_k_exact(const HeavyTailSpec& spec, int k);

/// Leading term -c |rho|^-1 n^(-A|rho|) U (1 - e^-|rho|) of
/// ln(L(n^A) / L(e n^A)) under SR2 with constant U.
double sr2_bias(double c, double rho, double U_const, double A, std::int64_t n);

/// Devroye's rejection sampler for Zipf integers; saturates at kValueCap.
std::int64_t draw_zeta(const ZetaSpec& spec, Rng& rng);
SampleBatch sample_zeta(const ZetaSpec& spec, Rng& rng, std::size_t count);

// JSON form: {"beta":0.5,"svf":{"kind":"constant","C":1.0}}.
HeavyTailSpec heavy_tail_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HeavyTailSpec& spec);
// {"kind":"zeta","s":1.15}
ZetaSpec zeta_from_json(const nlohmann::json& j);

}  // namespace ziptail
