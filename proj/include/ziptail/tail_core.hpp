#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace ziptail {

/// Largest representable observation. Samplers saturate here; every level
/// threshold used in practice (l <= 43) lies strictly below it, so exceedance
/// counts are unaffected by the saturation.
inline constexpr std::int64_t kValueCap = std::numeric_limits<std::int64_t>::max();

/// A finite multiset of positive integer observations.
class SampleBatch {
 public:
  /// Throws StatError("empty sample") on an empty vector and ConfigError on
  /// any value below 1.
  explicit SampleBatch(std::vector<std::int64_t> values);

  std::span<const std::int64_t> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::int64_t max() const;

 private:
  std::vector<std::int64_t> values_;
};

/// Inclusive range of integer levels [first, last].
struct LevelRange {
  int first = 0;
  int last = 0;

  int size() const { return last >= first ? last - first + 1 : 0; }
};

/// floor(e^level), saturated to kValueCap. For an integer value v,
/// `v > e^level` holds exactly when `v > level_threshold(level)`.
std::int64_t level_threshold(int level);

struct SurvivalCurve {
  std::vector<int> levels;
  std::vector<std::int64_t> exceedances;  // #{i : S_i > e^l}
  std::vector<double> probs;              // exceedances / n
  std::size_t n = 0;

  /// Probability at `level`; throws std::out_of_range outside the curve.
  double at(int level) const;
};

/// Empirical tail probabilities p_l = #{S_i > e^l} / n for every level in
/// `levels`, computed in one pass over the data.
SurvivalCurve empirical_survival(const SampleBatch& batch, LevelRange levels);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;
};

struct TailEstimate {
  double beta_hat = 0.0;
  int k = 0;
  std::size_t n = 0;
  double p_hat_k = 0.0;
  double p_hat_k1 = 0.0;
  // Set when some p_hat at level k+1 (or any level of an averaging window)
  // is zero; beta_hat then follows the zero convention.
  bool degenerate = false;
  std::optional<ConfidenceInterval> ci;
};

/// ln(p_k) - ln(p_{k+1}), or 0 flagged degenerate when p_{k+1} = 0.
TailEstimate beta_hat(const SampleBatch& batch, int k);

/// Same estimator evaluated on an already computed curve. The curve must
/// cover levels k and k+1.
TailEstimate beta_hat(const SurvivalCurve& curve, int k);

/// Mean of beta_hat(k + j) for j in [-m, m]. Requires k >= m >= 0 so that
/// every level in the window is non-negative.
TailEstimate beta_hat_averaged(const SampleBatch& batch, int k, int m);

struct DeviationBound {
  double delta = 0.0;
  double u_n = 0.0;
  double bound = 0.0;
  bool applicable = false;  // p_{k+1} >= 16 u_n
};

/// Finite-sample deviation bound 6 sqrt(u_n / p_{k+1}) with
/// u_n = ln(2/delta) / n. Holds with probability >= 1 - 2 delta around the
/// population proxy when `applicable`. `p_k1` may be the true tail
/// probability or its plug-in estimate; the caller decides.
DeviationBound deviation_bound(std::size_t n, double delta, double p_k1);

/// Standard normal quantile (Acklam's rational approximation followed by one
/// Halley step), absolute error below 1e-12 on (1e-300, 1 - 1e-16).
double normal_quantile(double p);

/// beta_hat +/- z sqrt((e^beta_hat - 1) / (n p_hat_k)), lower end clamped at 0.
ConfidenceInterval studentized_interval(double beta_hat, std::size_t n,
                                        double p_hat_k, double level);

/// beta_hat(batch, k) with a studentized interval at `level`.
/// Throws StatError when p_hat_k = 0.
TailEstimate studentized_ci(const SampleBatch& batch, int k, double level);

/// round(A ln n). Valid for consistency only when A < 1 / beta, which cannot
/// be checked without knowing beta.
int k_ln_rule(std::size_t n, double A);

struct ScanRow {
  int k = 0;
  double beta_hat = 0.0;
  std::optional<ConfidenceInterval> ci;  // absent when p_hat_k = 0
  double p_hat_k = 0.0;
  double p_hat_k1 = 0.0;
  bool degenerate = false;  // p_hat_{k+1} = 0
  bool admissible = false;  // at least 5 observations above e^{k+1}
};

/// beta_hat with a studentized interval for every k in `ks`. Degenerate
/// levels are kept and flagged.
std::vector<ScanRow> stability_scan(const SampleBatch& batch, LevelRange ks,
                                    double level = 0.95);

/// Minimum number of exceedances of e^{k+1} for a scan row to count as
/// admissible.
inline constexpr std::int64_t kMinTailExceedances = 5;

/// CSV with header k,beta_hat,ci_lo,ci_hi,p_hat_k,p_hat_k1,degenerate.
void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows);

/// Reads newline-delimited integers. Blank lines and lines starting with '#'
/// are skipped; anything else that is not an integer >= 1 is a ConfigError.
SampleBatch read_batch(std::istream& in);
void write_batch(std::ostream& out, const SampleBatch& batch);

}  // namespace ziptail
