#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "ziptail/error.hpp"
#include "ziptail/regen_markov.hpp"

using namespace ziptail;

namespace {

// First seed whose walk starts with the requested +/-1 steps.
std::uint64_t seed_for_steps(const std::vector<int>& steps) {
  for (std::uint64_t seed = 0;; ++seed) {
    Rng rng(seed);
    const auto traj = simulate(chain::Ssrw{}, steps.size(), rng);
    bool match = true;
    for (std::size_t i = 0; i < steps.size() && match; ++i) {
      match = traj.states[i + 1] - traj.states[i] == steps[i];
    }
    if (match) return seed;
  }
}

// E[#{1 <= i <= n : X_i = 0}] for the free walk: sum over k <= n/2 of
// C(2k, k) 4^-k.
double expected_zero_visits(std::size_t n) {
  double term = 1.0, sum = 0.0;
  for (std::size_t k = 1; 2 * k <= n; ++k) {
    term *= (2.0 * k - 1.0) / (2.0 * k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(Simulate, SsrwHandWalk) {
  Rng rng(seed_for_steps({+1, -1, +1, +1}));
  const auto traj = simulate(chain::Ssrw{}, 4, rng);
  EXPECT_EQ(traj.states, (std::vector<double>{0, 1, 0, 1, 2}));
  EXPECT_EQ(traj.n(), 4u);
}

TEST(Simulate, ReflectedWalkStaysNonNegative) {
  Rng rng(8);
  const auto traj = simulate(chain::Ssrw{true}, 5000, rng);
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    ASSERT_GE(traj.states[i], 0.0);
    ASSERT_EQ(std::abs(traj.states[i] - traj.states[i - 1]), 1.0);
    if (traj.states[i - 1] == 0.0) ASSERT_EQ(traj.states[i], 1.0);
  }
}

TEST(Simulate, BesselWithoutDriftIsReflectedWalk) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    const auto bessel = simulate(chain::Bessel{0.0, 0.0}, 20000, a);
    const auto walk = simulate(chain::Ssrw{true}, 20000, b);
    ASSERT_EQ(bessel.states, walk.states) << seed;
  }
}

TEST(Simulate, BesselInvalidProbabilityNamesState) {
  Rng rng(1);
  try {
    simulate(chain::Bessel{3.0, 0.0}, 10, rng);
    FAIL();
  } catch (const StatError& e) {
    EXPECT_NE(std::string(e.what()).find("k = 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ChainStepper(chain::Bessel{-2.0, 0.0}), ConfigError);
}

TEST(Simulate, RenewalRecursionByHand) {
  EXPECT_DOUBLE_EQ(chain::renewal_transition(0.5, 3.2), 3.2);
  EXPECT_DOUBLE_EQ(chain::renewal_transition(3.2, 99.0), 2.2);
  EXPECT_NEAR(chain::renewal_transition(2.2, 99.0), 1.2, 1e-15);
  EXPECT_NEAR(chain::renewal_transition(1.2, 99.0), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(chain::renewal_transition(0.2, 7.0), 7.0);
  EXPECT_DOUBLE_EQ(chain::renewal_transition(1.0, 4.0), 4.0);
}

TEST(Simulate, TarTransition) {
  const chain::Tar tar{0.5, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(chain::tar_transition(tar, -2.0, 0.1), -0.9);
  EXPECT_DOUBLE_EQ(chain::tar_transition(tar, 2.0, 0.1), 2.1);
  EXPECT_THROW(default_atom(ChainSpec{tar}), ConfigError);
  EXPECT_THROW(ChainStepper(chain::Tar{1.0, 0.0, 0.0}), ConfigError);
}

TEST(Simulate, InitialStates) {
  const HeavyTailSpec eta(0.3, svf::Constant{1.0});
  EXPECT_EQ(initial_state(chain::Renewal{eta}), 0.5);
  EXPECT_EQ(initial_state(chain::Ssrw{}), 0.0);
  EXPECT_EQ(initial_state(gaussian_walk()), 0.0);
}

TEST(Regeneration, HandExample) {
  const std::vector<double> states{0, 1, 0, -1, 0};
  const auto blocks = regeneration_times(states, StateSet::point(0.0));
  EXPECT_EQ(blocks.hit_times, (std::vector<std::int64_t>{2, 4}));
  EXPECT_EQ(blocks.durations, (std::vector<std::int64_t>{2}));
  EXPECT_EQ(blocks.n_blocks(), 1u);
  EXPECT_EQ(occupation_time(states, StateSet::point(0.0)), 2);
  EXPECT_EQ(occupation_time(states, StateSet::everything()), 4);
}

TEST(Regeneration, NoReturnMeansNoBlocks) {
  const std::vector<double> states{0, 1, 2, 3, 4};
  const auto blocks = regeneration_times(states, StateSet::point(0.0));
  EXPECT_EQ(blocks.n_blocks(), 0u);
  EXPECT_THROW(beta_hat_markov(blocks), StatError);
}

TEST(Regeneration, BlockConsistencyAgainstBruteForce) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 100000;
    const auto traj = simulate(chain::Ssrw{}, n, rng);
    const auto blocks = regeneration_times(traj, StateSet::point(0.0));

    std::vector<std::int64_t> hits;
    for (std::size_t i = 1; i <= n; ++i) {
      if (traj.states[i] == 0.0) hits.push_back(static_cast<std::int64_t>(i));
    }
    ASSERT_EQ(blocks.hit_times, hits);
    ASSERT_EQ(blocks.durations.size() + 1, std::max<std::size_t>(hits.size(), 1));
    std::int64_t total = 0;
    for (std::size_t j = 0; j < blocks.durations.size(); ++j) {
      ASSERT_GE(blocks.durations[j], 1);
      ASSERT_EQ(blocks.durations[j], hits[j + 1] - hits[j]);
      total += blocks.durations[j];
    }
    if (!hits.empty()) ASSERT_LE(total + hits.front(), static_cast<std::int64_t>(n));
  }
}

TEST(Regeneration, StreamingMatchesStoredPath) {
  const std::vector<ChainSpec> specs = {chain::Ssrw{}, chain::Bessel{0.2, 0.0},
                                        chain::Renewal{HeavyTailSpec(0.4, svf::Constant{1.0})}};
  for (const auto& spec : specs) {
    Rng a(42), b(42);
    const auto atom = default_atom(spec);
    const auto traj = simulate(spec, 50000, a);
    const auto stream = simulate_streaming(spec, 50000, b, atom, atom);
    const auto blocks = regeneration_times(traj, atom);
    EXPECT_EQ(stream.blocks.hit_times, blocks.hit_times);
    EXPECT_EQ(stream.blocks.durations, blocks.durations);
    EXPECT_EQ(stream.occupation, occupation_time(traj, atom));
  }
}

// Each renewal block lasts exactly the eta drawn at its start.
TEST(Regeneration, RenewalBlocksAreEtaDraws) {
  const HeavyTailSpec eta(0.3, svf::Constant{1.0});
  const ChainSpec spec = chain::Renewal{eta};
  Rng chain_rng(7), eta_rng(7);
  const auto traj = simulate(spec, 200000, chain_rng);
  const auto blocks = regeneration_times(traj, default_atom(spec));
  ASSERT_GT(blocks.n_blocks(), 5u);

  std::vector<std::int64_t> draws;
  for (std::size_t j = 0; j < blocks.n_blocks() + 1; ++j) draws.push_back(draw(eta, eta_rng));
  ASSERT_EQ(blocks.hit_times.front(), draws.front());
  for (std::size_t j = 0; j < blocks.n_blocks(); ++j) ASSERT_EQ(blocks.durations[j], draws[j + 1]) << j;
}

TEST(Regeneration, RenewalEstimateAcrossSeeds) {
  const HeavyTailSpec eta(0.3, svf::Constant{1.0});
  const ChainSpec spec = chain::Renewal{eta};
  const auto atom = default_atom(spec);
  double sum = 0.0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    Rng rng = make_stream(303, s);
    sum += beta_hat_markov(simulate_streaming(spec, 1000000, rng, atom, atom).blocks).beta_hat;
  }
  EXPECT_NEAR(sum / seeds, 0.3, 0.07);
}

TEST(Occupation, BetaTildeArithmetic) {
  EXPECT_DOUBLE_EQ(beta_tilde(2, 4), 0.5);
  EXPECT_THROW(beta_tilde(0, 100), StatError);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto traj = simulate(chain::Bessel{0.2, 0.0}, 1000, rng);
    EXPECT_DOUBLE_EQ(beta_tilde(traj, StateSet::everything()), 1.0);
  }
}

TEST(Occupation, ProcessEndpoints) {
  Rng rng(10);
  const auto traj = simulate(chain::Ssrw{}, 10000, rng);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto sigma = occupation_process(traj, StateSet::point(0.0), grid, 0.5, 1.0);
  EXPECT_EQ(sigma[0], 0.0);
  EXPECT_DOUBLE_EQ(sigma[2], occupation_time(traj, StateSet::point(0.0)) / 100.0);
  EXPECT_LE(sigma[1], sigma[2]);
  EXPECT_THROW(occupation_process(traj, StateSet::point(0.0), grid, 0.5, 0.0), ConfigError);
}

TEST(Occupation, SquareRootGrowthBand) {
  const std::size_t n = 100000;
  int inside = 0;
  for (int s = 0; s < 100; ++s) {
    Rng rng = make_stream(55, s);
    const auto occ = simulate_streaming(chain::Ssrw{}, n, rng, StateSet::point(0.0), StateSet::point(0.0)).occupation;
    const double r = occ / std::sqrt(static_cast<double>(n));
    inside += r > 0.05 && r < 20.0 ? 1 : 0;
  }
  // The limit law |N(0,1)| puts about 4% below 0.05.
  EXPECT_GE(inside, 90);
}

TEST(Occupation, MomentsMatchMittagLeffler) {
  const std::size_t n = 100000;
  const int seeds = 400;
  double m1 = 0.0, m2 = 0.0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng = make_stream(66, s);
    Trajectory traj = simulate(chain::Ssrw{}, n, rng);
    const double sigma = occupation_process(traj, StateSet::point(0.0), std::vector<double>{1.0}, 0.5)[0];
    m1 += sigma;
    m2 += sigma * sigma;
  }
  m1 /= seeds;
  m2 /= seeds;
  EXPECT_NEAR(m1 / (expected_zero_visits(n) / std::sqrt(static_cast<double>(n))), 1.0, 0.3);
  // Ratio of moments is free of the unknown normalization.
  const double ratio = mittag_leffler_moment(0.5, 2) / std::pow(mittag_leffler_moment(0.5, 1), 2);
  EXPECT_NEAR(ratio, std::numbers::pi / 2.0, 1e-12);
  EXPECT_NEAR(m2 / (m1 * m1), ratio, 0.2 * ratio);
}

TEST(MittagLeffler, Examples) {
  EXPECT_EQ(mittag_leffler_moment(0.5, 0), 1.0);
  EXPECT_NEAR(mittag_leffler_moment(0.5, 1), 2.0 / std::sqrt(std::numbers::pi), 1e-12);
  EXPECT_NEAR(mittag_leffler_moment(0.5, 1), 1.128379, 1e-6);
  EXPECT_NEAR(mittag_leffler_moment(0.5, 2), 2.0, 1e-12);
  EXPECT_THROW(mittag_leffler_moment(1.0, 1), ConfigError);
}

TEST(MittagLeffler, AgreesWithHighPrecisionGamma) {
  using big = boost::multiprecision::cpp_bin_float_50;
  for (int b = 1; b <= 9; ++b) {
    const double beta = b / 10.0;
    for (int m = 0; m <= 6; ++m) {
      const big ref = boost::math::tgamma(big(m + 1)) / boost::math::tgamma(big(1) + big(m) * big(beta));
      const double got = mittag_leffler_moment(beta, m);
      EXPECT_NEAR(got / ref.convert_to<double>(), 1.0, 1e-8) << beta << ' ' << m;
    }
  }
}

TEST(MittagLeffler, LogGammaAccuracy) {
  for (double x = 0.05; x < 60.0; x *= 1.37) {
    EXPECT_NEAR(log_gamma(x), boost::math::lgamma(x), 1e-12 * std::max(1.0, std::abs(boost::math::lgamma(x)))) << x;
  }
  EXPECT_THROW(log_gamma(0.0), ConfigError);
}

TEST(ChainJson, KindsAndErrors) {
  EXPECT_TRUE(std::holds_alternative<chain::Bessel>(chain_from_json(nlohmann::json::parse(R"({"kind":"bessel","delta":0.2})"))));
  EXPECT_TRUE(std::get<chain::Ssrw>(chain_from_json(nlohmann::json::parse(R"({"kind":"ssrw","reflected":true})"))).reflected);
  const auto gw = chain_from_json(nlohmann::json::parse(R"({"kind":"gaussian_walk","sigma":2})"));
  EXPECT_EQ(std::get<chain::Tar>(gw).alpha1, 1.0);
  EXPECT_EQ(std::get<chain::Tar>(gw).sigma, 2.0);
  EXPECT_THROW(chain_from_json(nlohmann::json::parse(R"({"kind":"renewal"})")), ConfigError);
  EXPECT_THROW(chain_from_json(nlohmann::json::parse(R"({"kind":"levy"})")), ConfigError);
  EXPECT_FALSE(is_chain_json(nlohmann::json::parse(R"({"beta":0.5})")));
}

TEST(BlocksCsv, Layout) {
  const std::vector<double> states{0, 1, 0, -1, 0, 1, 0};
  std::ostringstream out;
  write_blocks_csv(out, regeneration_times(states, StateSet::point(0.0)));
  EXPECT_EQ(out.str(), "j,hit_time,duration\n1,2,2\n2,4,2\n");
}
