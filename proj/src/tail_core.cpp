#include "ziptail/tail_core.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ziptail/csv.hpp"
#include "ziptail/error.hpp"

namespace ziptail {

SampleBatch::SampleBatch(std::vector<std::int64_t> values) : values_(std::move(values)) {
  if (values_.empty()) throw StatError("empty sample");
  for (auto v : values_) {
    if (v < 1) throw ConfigError("sample values must be >= 1, got " + std::to_string(v));
  }
}

std::int64_t SampleBatch::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

std::int64_t level_threshold(int level) {
  // long double keeps floor(e^l) exact well past 2^53.
  const long double t = std::floor(std::exp(static_cast<long double>(level)));
  if (t >= static_cast<long double>(kValueCap)) return kValueCap;
  return static_cast<std::int64_t>(t);
}

double SurvivalCurve::at(int level) const {
  if (levels.empty() || level < levels.front() || level > levels.back()) {
    throw std::out_of_range("level " + std::to_string(level) + " outside survival curve");
  }
  return probs[static_cast<std::size_t>(level - levels.front())];
}

SurvivalCurve empirical_survival(const SampleBatch& batch, LevelRange levels) {
  if (levels.size() == 0) throw ConfigError("empty level range");

  const auto count = static_cast<std::size_t>(levels.size());
  std::vector<std::int64_t> thresholds(count);
  for (std::size_t i = 0; i < count; ++i) {
    thresholds[i] = level_threshold(levels.first + static_cast<int>(i));
  }

  // A value exceeds the thresholds of a prefix of the (ascending) levels;
  // record where each prefix ends, then accumulate from the top.
  std::vector<std::int64_t> ends_at(count + 1, 0);
  for (const auto v : batch.values()) {
    const auto above = std::lower_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin();
    ++ends_at[static_cast<std::size_t>(above)];
  }

  SurvivalCurve curve;
  curve.n = batch.size();
  curve.levels.resize(count);
  curve.exceedances.resize(count);
  curve.probs.resize(count);
  std::int64_t running = 0;
  for (std::size_t i = count; i-- > 0;) {
    running += ends_at[i + 1];
    curve.levels[i] = levels.first + static_cast<int>(i);
    curve.exceedances[i] = running;
    curve.probs[i] = static_cast<double>(running) / static_cast<double>(curve.n);
  }
  return curve;
}

TailEstimate beta_hat(const SurvivalCurve& curve, int k) {
  TailEstimate est;
  est.k = k;
  est.n = curve.n;
  est.p_hat_k = curve.at(k);
  est.p_hat_k1 = curve.at(k + 1);
  if (est.p_hat_k1 > 0.0) {
    est.beta_hat = std::log(est.p_hat_k) - std::log(est.p_hat_k1);
  } else {
    est.beta_hat = 0.0;
    est.degenerate = true;
  }
  return est;
}

TailEstimate beta_hat(const SampleBatch& batch, int k) {
  if (k < 0) throw ConfigError("k must be >= 0");
  return beta_hat(empirical_survival(batch, {k, k + 1}), k);
}

TailEstimate beta_hat_averaged(const SampleBatch& batch, int k, int m) {
  if (m < 0) throw ConfigError("m must be >= 0");
  if (k < m) throw ConfigError("window exceeds level");
  if (k < 0) throw ConfigError("k must be >= 0");

  const auto curve = empirical_survival(batch, {k - m, k + m + 1});
  TailEstimate avg = beta_hat(curve, k);
  double sum = 0.0;
  for (int j = -m; j <= m; ++j) {
    const auto term = beta_hat(curve, k + j);
    sum += term.beta_hat;
    avg.degenerate = avg.degenerate || term.degenerate;
  }
  avg.beta_hat = sum / static_cast<double>(2 * m + 1);
  return avg;
}

DeviationBound deviation_bound(std::size_t n, double delta, double p_k1) {
  if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("delta must lie in (0, 1/2)");
  if (!(p_k1 > 0.0 && p_k1 <= 1.0)) throw ConfigError("p_k1 must lie in (0, 1]");
  if (n == 0) throw ConfigError("n must be >= 1");

  DeviationBound b;
  b.delta = delta;
  b.u_n = std::log(2.0 / delta) / static_cast<double>(n);
  b.applicable = p_k1 >= 16.0 * b.u_n;
  b.bound = 6.0 * std::sqrt(b.u_n / p_k1);
  return b;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal quantile needs p in (0, 1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the exact CDF.
  // Upper half works with 1 - p, which is exact there.
  const double e = p > 0.5 ? (1.0 - p) - 0.5 * std::erfc(x / std::sqrt(2.0))
                           : 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

ConfidenceInterval studentized_interval(double beta_hat, std::size_t n, double p_hat_k,
                                        double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  if (!(p_hat_k > 0.0)) throw StatError("no tail mass at level k");
  const double z = normal_quantile((1.0 + level) / 2.0);
  const double half = z * std::sqrt(std::expm1(beta_hat) / (static_cast<double>(n) * p_hat_k));
  return {std::max(0.0, beta_hat - half), beta_hat + half, level};
}

TailEstimate studentized_ci(const SampleBatch& batch, int k, double level) {
  auto est = beta_hat(batch, k);
  est.ci = studentized_interval(est.beta_hat, est.n, est.p_hat_k, level);
  return est;
}

int k_ln_rule(std::size_t n, double A) {
  if (n < 2) throw ConfigError("k_ln_rule needs n >= 2");
  if (!(A > 0.0)) throw ConfigError("k_ln_rule needs A > 0");
  return static_cast<int>(std::lround(A * std::log(static_cast<double>(n))));
}

std::vector<ScanRow> stability_scan(const SampleBatch& batch, LevelRange ks, double level) {
  if (ks.size() == 0) return {};
  const auto curve = empirical_survival(batch, {ks.first, ks.last + 1});

  std::vector<ScanRow> rows;
  rows.reserve(static_cast<std::size_t>(ks.size()));
  for (int k = ks.first; k <= ks.last; ++k) {
    const auto est = beta_hat(curve, k);
    ScanRow row;
    row.k = k;
    row.beta_hat = est.beta_hat;
    row.p_hat_k = est.p_hat_k;
    row.p_hat_k1 = est.p_hat_k1;
    row.degenerate = est.degenerate;
    row.admissible = curve.exceedances[static_cast<std::size_t>(k + 1 - ks.first)] >= kMinTailExceedances;
    if (est.p_hat_k > 0.0) row.ci = studentized_interval(est.beta_hat, est.n, est.p_hat_k, level);
    rows.push_back(row);
  }
  return rows;
}

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows) {
  out << "k,beta_hat,ci_lo,ci_hi,p_hat_k,p_hat_k1,degenerate\n";
  for (const auto& r : rows) {
    const double nan = std::nan("");
    out << r.k << ',' << fmt_real(r.beta_hat) << ',' << fmt_real(r.ci ? r.ci->lo : nan) << ','
        << fmt_real(r.ci ? r.ci->hi : nan) << ',' << fmt_real(r.p_hat_k) << ','
        << fmt_real(r.p_hat_k1) << ',' << (r.degenerate ? 1 : 0) << '\n';
  }
}

SampleBatch read_batch(std::istream& in) {
  std::vector<std::int64_t> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const auto token = line.substr(first, last - first + 1);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || v < 1) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected an integer >= 1, got '" +
                        token + "'");
    }
    values.push_back(v);
  }
  return SampleBatch(std::move(values));
}

void write_batch(std::ostream& out, const SampleBatch& batch) {
  for (const auto v : batch.values()) out << v << '\n';
}

}  // namespace ziptail
