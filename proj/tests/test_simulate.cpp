#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gwcls/moments.hpp"
#include "gwcls/simulate.hpp"
#include "gwcls/stats.hpp"

using namespace gwcls;

namespace {

ModelSpec with_immigration(const ModelSpec& base, FiniteLaw2D imm) {
  return build_model(base.offspring1(), base.offspring2(), std::move(imm), base.name());
}

/// Offspring and immigration of one generation, drawn separately so that
/// the immigration term is observable.
struct Draw {
  Count2 offspring;
  Count2 immigration;
};

}  // namespace

TEST(Step, EmptyPopulationReturnsImmigration) {
  const auto spec = with_immigration(model_general(), FiniteLaw2D::point_mass({1, 1}));
  RngStream rng(1, 0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(step(spec, {0, 0}, rng), (Count2{1, 1}));
}

TEST(Step, UnitTotalConservesCount) {
  // Offspring sums only; immigration would add to the count.
  const auto b = model_unit_total(0.6);
  const LawSampler s1(b.offspring1()), s2(b.offspring2());
  RngStream rng(2, 0);
  for (int i = 0; i < 1000; ++i) {
    const Count2 a = s1.sample_sum(3, rng);
    const Count2 c = s2.sample_sum(2, rng);
    EXPECT_EQ(a.first + a.second + c.first + c.second, 5);
  }
  for (int i = 0; i < 100; ++i) {
    const Count2 big = s1.sample_sum(100000, rng);
    EXPECT_EQ(big.first + big.second, 100000);
  }
}

TEST(Step, ConditionalMeanModelA) {
  const auto spec = model_general(0.3);
  const Simulator sim(spec);
  RngStream rng(3, 0);
  const std::size_t draws = 100000;
  std::vector<double> x1(draws), x2(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    const Count2 x = sim.step({2, 1}, rng);
    x1[i] = static_cast<double>(x.first);
    x2[i] = static_cast<double>(x.second);
  }
  const double se1 = sample_sd(x1) / std::sqrt(double(draws));
  const double se2 = sample_sd(x2) / std::sqrt(double(draws));
  EXPECT_NEAR(sample_mean(x1), 1.8, 3 * se1);
  EXPECT_NEAR(sample_mean(x2), 2.2, 3 * se2);
}

TEST(Step, RejectsNegativeState) {
  RngStream rng(1, 0);
  EXPECT_THROW(step(model_general(), {-1, 0}, rng), Error);
}

TEST(Step, OverflowGuard) {
  const LawSampler big(FiniteLaw2D::point_mass({4, 0}));
  RngStream rng(4, 0);
  try {
    big.sample_sum(std::int64_t{1} << 52, rng);
    FAIL() << "expected Overflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Overflow);
  }
  EXPECT_EQ(big.sample_sum(std::int64_t{1} << 51, rng).first, std::int64_t{1} << 53);
}

TEST(LawSampler, MultinomialMatchesIndividualDraws) {
  // Same parent count, once below and once above the multinomial threshold
  // (via repeated small sums), must give the same distribution of the sum.
  const auto spec = model_general(0.3);
  const LawSampler s(spec.offspring1());
  const std::int64_t parents = 4 * kMultinomialThreshold;
  RngStream r1(5, 0), r2(5, 1);
  std::vector<double> multi, indiv;
  for (int i = 0; i < 20000; ++i) {
    multi.push_back(static_cast<double>(s.sample_sum(parents, r1).second));
    Count2 acc{};
    for (int q = 0; q < 4; ++q) {
      const Count2 c = s.sample_sum(kMultinomialThreshold, r2);
      acc.first += c.first;
      acc.second += c.second;
    }
    indiv.push_back(static_cast<double>(acc.second));
  }
  EXPECT_LT(ks_two_sample(multi, indiv), 0.025);
  // Exact moments: second component is 2 * Binomial-like count of (0,2) atoms.
  const double m = 0.7 * parents;
  const double v = 4.0 * parents * 0.35 * 0.65;
  EXPECT_NEAR(sample_mean(multi), m, 4 * std::sqrt(v / 20000));
  EXPECT_NEAR(sample_variance(multi) / v, 1.0, 0.05);
}

TEST(Simulate, FirstStepIsImmigration) {
  for (const auto& spec : {model_general(), model_unit_total(), model_equal_pair()}) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto t = simulate(spec, 1, 11, s);
      ASSERT_EQ(t.states.size(), 2u);
      EXPECT_EQ(t.states[0], (Count2{0, 0}));
      const Vec2 want = Vec2(t.states[1]) - spec.immigration_mean();
      EXPECT_EQ(t.m_seq[1], want);
      EXPECT_GE(t.states[1].first, 0);
      EXPECT_LE(t.states[1].first, 1);
    }
  }
}

TEST(Simulate, Deterministic) {
  const auto spec = model_general();
  const auto a = simulate(spec, 500, 42, 7);
  const auto b = simulate(spec, 500, 42, 7);
  const auto c = simulate(spec, 500, 42, 8);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.states, c.states);
  EXPECT_EQ(a.seed, 42u);
  EXPECT_EQ(a.stream, 7u);
}

TEST(Simulate, RejectsZeroLength) {
  EXPECT_THROW(simulate(model_general(), 0, 1, 0), Error);
}

TEST(Simulate, ProjectionAndRecursionInvariants) {
  for (const auto& spec : {model_general(0.3), model_general(0.8), model_unit_total(0.6),
                           model_equal_pair(), model_equal_pair_null_immigration()}) {
    const auto t = simulate(spec, 1000, 9, 1);
    const double d = spec.delta();
    const Vec2 me = spec.immigration_mean();
    for (std::size_t k = 0; k <= t.n(); ++k) {
      const auto x = t.states[k];
      EXPECT_GE(t.u_seq[k], 0);
      EXPECT_EQ(t.u_seq[k], x.first + x.second);
      EXPECT_EQ(t.v_seq[k], x.first - x.second);
      EXPECT_EQ((t.u_seq[k] + t.v_seq[k]) / 2, x.first);
      EXPECT_EQ((t.u_seq[k] - t.v_seq[k]) / 2, x.second);
      if (k == 0) continue;
      const auto u = static_cast<double>(t.u_seq[k]), up = static_cast<double>(t.u_seq[k - 1]);
      const auto v = static_cast<double>(t.v_seq[k]), vp = static_cast<double>(t.v_seq[k - 1]);
      EXPECT_NEAR(u, up + dot(kOnes, me) + dot(kOnes, t.m_seq[k]), 1e-9);
      EXPECT_NEAR(v, d * vp + dot(kContrast, me) + dot(kContrast, t.m_seq[k]), 1e-9);
    }
  }
}

TEST(Simulate, UnitTotalWithTypeOneImmigrationGrowsLinearly) {
  const auto spec = model_unit_total(0.6, FiniteLaw2D::point_mass({1, 0}));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto t = simulate(spec, 300, 5, s);
    for (std::size_t k = 0; k <= t.n(); ++k) EXPECT_EQ(t.u_seq[k], static_cast<std::int64_t>(k));
  }
}

namespace {

/// Simulates a path while recording each generation's immigrants.
std::vector<Draw> simulate_recording(const ModelSpec& spec, std::size_t n, RngStream& rng,
                                     std::vector<Count2>& states) {
  const LawSampler o1(spec.offspring1()), o2(spec.offspring2()), im(spec.immigration());
  std::vector<Draw> draws;
  states.assign(1, Count2{});
  for (std::size_t k = 1; k <= n; ++k) {
    const Count2 p = states.back();
    const Count2 a = o1.sample_sum(p.first, rng);
    const Count2 b = o2.sample_sum(p.second, rng);
    const Count2 e = im.sample(rng);
    draws.push_back({{a.first + b.first, a.second + b.second}, e});
    states.push_back({a.first + b.first + e.first, a.second + b.second + e.second});
  }
  return draws;
}

}  // namespace

TEST(PathIdentity, UnitTotalSumsImmigrants) {
  const auto spec = model_unit_total(0.6);
  RngStream rng(6, 0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Count2> states;
    const auto draws = simulate_recording(spec, 400, rng, states);
    std::int64_t total = 0;
    for (std::size_t k = 1; k < states.size(); ++k) {
      total += draws[k - 1].immigration.first + draws[k - 1].immigration.second;
      EXPECT_EQ(states[k].first + states[k].second, total);
    }
  }
}

TEST(PathIdentity, EqualPairContrastIsImmigrationContrast) {
  const auto spec = model_equal_pair();
  RngStream rng(7, 0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Count2> states;
    const auto draws = simulate_recording(spec, 400, rng, states);
    for (std::size_t k = 1; k < states.size(); ++k)
      EXPECT_EQ(states[k].first - states[k].second,
                draws[k - 1].immigration.first - draws[k - 1].immigration.second);
  }
  // Through the public simulator the contrast can only be -1, 0 or 1.
  const auto t = simulate(spec, 2000, 1, 1);
  for (auto v : t.v_seq) EXPECT_LE(std::abs(v), 1);
}

TEST(Martingale, ConditionalMeanAndCovariance) {
  for (const auto& spec : {model_general(0.3), model_unit_total(0.6), model_equal_pair()}) {
    const Simulator sim(spec);
    for (const Count2 x : {Count2{0, 0}, Count2{2, 1}, Count2{5, 7}}) {
      RngStream rng(8, static_cast<std::uint64_t>(x.first * 100 + x.second));
      const std::size_t draws = 100000;
      std::vector<double> m1(draws), m2(draws);
      const Vec2 centre = spec.mean_matrix() * Vec2(x) + spec.immigration_mean();
      for (std::size_t i = 0; i < draws; ++i) {
        const Vec2 m = Vec2(sim.step(x, rng)) - centre;
        m1[i] = m.x;
        m2[i] = m.y;
      }
      const double nd = static_cast<double>(draws);
      EXPECT_NEAR(sample_mean(m1), 0.0, 4 * sample_sd(m1) / std::sqrt(nd) + 1e-12);
      EXPECT_NEAR(sample_mean(m2), 0.0, 4 * sample_sd(m2) / std::sqrt(nd) + 1e-12);

      const Mat2 want = conditional_cov_oracle(spec, x);
      // The residual mean is known to be zero, so compare raw product means.
      auto check = [&](const std::vector<double>& a, const std::vector<double>& b, double target) {
        std::vector<double> prod(draws);
        for (std::size_t i = 0; i < draws; ++i) prod[i] = a[i] * b[i];
        const double se = sample_sd(prod) / std::sqrt(nd);
        EXPECT_NEAR(sample_mean(prod), target, 4 * se + 1e-12)
            << spec.name() << " x=(" << x.first << "," << x.second << ")";
      };
      check(m1, m1, want.a11);
      check(m1, m2, want.a12);
      check(m2, m2, want.a22);
    }
  }
}

TEST(EmpiricalMeanState, MatchesClosedForm) {
  struct Case {
    ModelSpec spec;
    std::size_t k;
  };
  for (const auto& c : {Case{model_general(0.3), 1}, Case{model_general(0.3), 10},
                        Case{model_unit_total(0.6), 25}}) {
    const auto est = empirical_mean_state(c.spec, c.k, 20000, 99, 2);
    const Vec2 want = expected_state(c.spec, c.k);
    EXPECT_NEAR(est.mean.x, want.x, 3 * est.standard_error.x) << c.spec.name() << " k=" << c.k;
    EXPECT_NEAR(est.mean.y, want.y, 3 * est.standard_error.y) << c.spec.name() << " k=" << c.k;
  }
  const Vec2 b25 = expected_state(model_unit_total(0.6), 25);
  EXPECT_NEAR(b25.x, 12.5, 1e-12);
  EXPECT_NEAR(b25.y, 12.5, 1e-12);
}

TEST(EmpiricalMeanState, IndependentOfThreadCount) {
  const auto spec = model_general();
  const auto a = empirical_mean_state(spec, 30, 500, 3, 1);
  const auto b = empirical_mean_state(spec, 30, 500, 3, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);
}
