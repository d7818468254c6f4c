#include "ziptail/dgp.hpp"

#include <cmath>
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

constexpr std::int64_t kValidationLimit = 10'000'000;

double log_svf(const SlowlyVaryingSpec& svf, double x) {
  const double lx = std::log(x);
  return std::visit(
      overloaded{
          [&](const svf::Constant& s) { return std::log(s.C); },
          [&](const svf::Log& s) { return std::log(s.C) + std::log1p(lx); },
          [&](const svf::InvLog& s) { return std::log(s.C) - std::log1p(lx); },
          [&](const svf::SR2& s) {
            return std::log(s.C) + std::log1p(-(s.c / std::abs(s.rho)) * s.U * std::exp(s.rho * lx));
          },
          [&](const svf::AsympConst& s) { return s.C0 + std::log1p(std::exp(-s.lambda * lx)); },
      },
      svf);
}

void check_parameters(double beta, const SlowlyVaryingSpec& svf) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a positive finite number");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  std::visit(overloaded{
                 [&](const svf::Constant& s) { positive(s.C, "C"); },
                 [&](const svf::Log& s) { positive(s.C, "C"); },
                 [&](const svf::InvLog& s) { positive(s.C, "C"); },
                 [&](const svf::SR2& s) {
                   positive(s.C, "C");
                   positive(s.U, "U");
                   if (!(s.rho < 0.0)) throw ConfigError("SR2 needs rho < 0");
                   if (!(s.c >= 0.0)) throw ConfigError("SR2 needs c >= 0");
                   if (!(s.c * s.U / std::abs(s.rho) < 1.0)) {
                     throw ConfigError("SR2 needs c U / |rho| < 1 so that L stays positive");
                   }
                 },
                 [&](const svf::AsympConst& s) {
                   positive(s.lambda, "lambda");
                   if (!std::isfinite(s.C0)) throw ConfigError("C0 must be finite");
                 },
             },
             svf);
}

// Log survival min(0, -beta ln n + ln L(n)) for n >= 1.
double log_survival_at(double beta, const SlowlyVaryingSpec& svf, double n) {
  return std::min(0.0, -beta * std::log(n) + log_svf(svf, n));
}

}  // namespace

double svf_value(const SlowlyVaryingSpec& svf, double x) { return std::exp(log_svf(svf, x)); }

HeavyTailSpec::HeavyTailSpec(double beta, SlowlyVaryingSpec svf) : beta_(beta), svf_(svf) {
  check_parameters(beta_, svf_);

  // Monotonicity over [1, 1e7]: every integer up to 4096, then the
  // neighbourhood of each point of a fine geometric grid.
  auto fail = [](std::int64_t at) {
    throw ConfigError("tail specification is not a survival function near n = " + std::to_string(at));
  };
  double prev = 1.0;
  for (std::int64_t n = 1; n <= 4096; ++n) {
    const double cur = survival(n);
    if (!(cur >= 0.0 && cur <= 1.0) || cur > prev) fail(n);
    prev = cur;
  }
  std::int64_t last = 4096;
  for (double x = 4096.0; x <= static_cast<double>(kValidationLimit); x *= 1.05) {
    const auto n = static_cast<std::int64_t>(x);
    const double a = survival(n - 1), b = survival(n), c = survival(n + 1);
    if (!(b >= 0.0 && b <= 1.0) || b > a || c > b || b > survival(last)) fail(n);
    last = n;
  }
}

bool HeavyTailSpec::is_exact_pareto() const {
  const auto* c = std::get_if<svf::Constant>(&svf_);
  return c != nullptr && c->C == 1.0;
}

double HeavyTailSpec::survival(std::int64_t n) const {
  if (n <= 0) return 1.0;
  if (is_exact_pareto()) return std::pow(static_cast<double>(n), -beta_);
  return std::exp(log_survival_at(beta_, svf_, static_cast<double>(n)));
}

ZetaSpec::ZetaSpec(double s) : s_(s) {
  if (!(s > 1.0) || !std::isfinite(s)) throw ConfigError("zeta exponent s must be > 1");
}

double survival_exact(const HeavyTailSpec& spec, std::int64_t n) {
  if (n < 1) throw ConfigError("survival_exact needs n >= 1");
  return spec.survival(n);
}

std::int64_t invert_survival(const HeavyTailSpec& spec, double u) {
  if (spec.is_exact_pareto()) {
    const double x = std::ceil(std::pow(u, -1.0 / spec.beta()));
    if (!(x < static_cast<double>(kValueCap))) return kValueCap;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(x));
  }

  if (spec.survival(1) < u) return 1;
  // Invariant: survival(lo) >= u > survival(hi).
  std::int64_t lo = 1;
  std::int64_t hi = 2;
  while (spec.survival(hi) >= u) {
    if (hi > kValueCap / 2) {
      if (spec.survival(kValueCap) >= u) return kValueCap;
      lo = hi;
      hi = kValueCap;
      break;
    }
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (spec.survival(mid) >= u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

std::int64_t draw(const HeavyTailSpec& spec, Rng& rng) {
  return invert_survival(spec, uniform_open_closed(rng));
}

SampleBatch sample(const HeavyTailSpec& spec, Rng& rng, std::size_t count) {
  std::vector<std::int64_t> values(count);
  for (auto& v : values) v = draw(spec, rng);
  return SampleBatch(std::move(values));
}

double beta_k_exact(const HeavyTailSpec& spec, int k) {
  if (k < 0) throw ConfigError("beta_k_exact needs k >= 0");
  const auto lo = static_cast<double>(level_threshold(k));
  const auto hi = static_cast<double>(level_threshold(k + 1));
  if (spec.is_exact_pareto()) return spec.beta() * (std::log(hi) - std::log(lo));
  return log_survival_at(spec.beta(), spec.svf(), lo) - log_survival_at(spec.beta(), spec.svf(), hi);
}

double sr2_bias(double c, double rho, double U_const, double A, std::int64_t n) {
  if (!(rho < 0.0)) throw ConfigError("sr2_bias needs rho < 0");
  if (n < 2) throw ConfigError("sr2_bias needs n >= 2");
  const double r = std::abs(rho);
  return -c / r * std::pow(static_cast<double>(n), -A * r) * U_const * (-std::expm1(-r));
}

std::int64_t draw_zeta(const ZetaSpec& spec, Rng& rng) {
  const double a1 = spec.s() - 1.0;
  const double b = std::exp2(a1);
  for (;;) {
    const double u = uniform_open_closed(rng);
    const double v = uniform01(rng);
    const double x = std::floor(std::pow(u, -1.0 / a1));
    // X (T - 1) and T with T = (1 + 1/X)^(s-1); both tend to finite limits.
    double xt1, t;
    if (std::isfinite(x)) {
      const double l = a1 * std::log1p(1.0 / x);
      xt1 = x * std::expm1(l);
      t = std::exp(l);
    } else {
      xt1 = a1;
      t = 1.0;
    }
    if (v * xt1 / (b - 1.0) <= t / b) {
      if (!(x < static_cast<double>(kValueCap))) return kValueCap;
      return static_cast<std::int64_t>(x);
    }
  }
}

SampleBatch sample_zeta(const ZetaSpec& spec, Rng& rng, std::size_t count) {
  std::vector<std::int64_t> values(count);
  for (auto& v : values) v = draw_zeta(spec, rng);
  return SampleBatch(std::move(values));
}

namespace {

double number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

double required_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return number(j, key, 0.0);
}

SlowlyVaryingSpec svf_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("svf must be a JSON object");
  const auto kind = j.value("kind", std::string("constant"));
  if (kind == "constant") return svf::Constant{number(j, "C", 1.0)};
  if (kind == "log") return svf::Log{number(j, "C", 1.0)};
  if (kind == "invlog") return svf::InvLog{number(j, "C", 1.0)};
  if (kind == "sr2") {
    return svf::SR2{required_number(j, "c"), required_number(j, "rho"), number(j, "U", 1.0),
                    number(j, "C", 1.0)};
  }
  if (kind == "asymp_const") return svf::AsympConst{number(j, "C0", 0.0), required_number(j, "lambda")};
  throw ConfigError("unknown svf kind '" + kind + "'");
}

}  // namespace

HeavyTailSpec heavy_tail_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("heavy-tail spec must be a JSON object");
  const double beta = required_number(j, "beta");
  const SlowlyVaryingSpec s = j.contains("svf") ? svf_from_json(j.at("svf")) : SlowlyVaryingSpec{svf::Constant{}};
  return HeavyTailSpec(beta, s);
}

nlohmann::json to_json(const HeavyTailSpec& spec) {
  nlohmann::json s = std::visit(
      overloaded{
          [](const svf::Constant& v) { return nlohmann::json{{"kind", "constant"}, {"C", v.C}}; },
          [](const svf::Log& v) { return nlohmann::json{{"kind", "log"}, {"C", v.C}}; },
          [](const svf::InvLog& v) { return nlohmann::json{{"kind", "invlog"}, {"C", v.C}}; },
          [](const svf::SR2& v) {
            return nlohmann::json{{"kind", "sr2"}, {"c", v.c}, {"rho", v.rho}, {"U", v.U}, {"C", v.C}};
          },
          [](const svf::AsympConst& v) {
            return nlohmann::json{{"kind", "asymp_const"}, {"C0", v.C0}, {"lambda", v.lambda}};
          },
      },
      spec.svf());
  return {{"beta", spec.beta()}, {"svf", s}};
}

ZetaSpec zeta_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("zeta spec must be a JSON object");
  return ZetaSpec(required_number(j, "s"));
}

}  // namespace ziptail
