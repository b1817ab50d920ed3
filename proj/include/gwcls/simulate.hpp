#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gwcls/error.hpp"
#include "gwcls/law.hpp"
#include "gwcls/linalg.hpp"
#include "gwcls/model.hpp"
#include "gwcls/parallel.hpp"
#include "gwcls/rng.hpp"
#include "gwcls/summation.hpp"

namespace gwcls {

/// Largest population component accepted from a single step (2^53).
inline constexpr std::int64_t kMaxPopulation = std::int64_t{1} << 53;

/// Above this many parents of one type, the iid offspring sum is drawn from
/// multinomial atom multiplicities instead of individual by individual.
inline constexpr std::int64_t kMultinomialThreshold = 32;

/// Sampler for a FiniteLaw2D and for iid sums of it.
class LawSampler {
 public:
  explicit LawSampler(const FiniteLaw2D& law) {
    const auto& atoms = law.atoms();
    points_.reserve(atoms.size());
    cumulative_.reserve(atoms.size());
    probs_.reserve(atoms.size());
    CompensatedSum running;
    for (const auto& a : atoms) {
      points_.push_back(a.point);
      probs_.push_back(a.probability);
      running += a.probability;
      cumulative_.push_back(running.value());
    }
    cumulative_.back() = 1.0;
    tail_.assign(atoms.size(), 0.0);
    CompensatedSum t;
    for (std::size_t i = atoms.size(); i-- > 0;) {
      t += probs_[i];
      tail_[i] = t.value();
    }
  }

  /// One draw by inverse CDF.
  Count2 sample(RngStream& rng) const {
    const double u = rng.uniform();
    for (std::size_t i = 0; i < cumulative_.size(); ++i)
      if (u < cumulative_[i]) return points_[i];
    return points_.back();
  }

  /// Sum of `count` independent draws.
  Count2 sample_sum(std::int64_t count, RngStream& rng) const {
    Count2 total{};
    if (count <= 0) return total;
    if (count <= kMultinomialThreshold) {
      for (std::int64_t j = 0; j < count; ++j) {
        const Count2 c = sample(rng);
        total.first += c.first;
        total.second += c.second;
      }
      check(total);
      return total;
    }
    // Multinomial multiplicities via sequential conditional binomials.
    std::int64_t remaining = count;
    for (std::size_t i = 0; i < points_.size() && remaining > 0; ++i) {
      std::int64_t hits = 0;
      if (i + 1 == points_.size()) {
        hits = remaining;
      } else if (probs_[i] > 0.0) {
        const double p = std::clamp(probs_[i] / tail_[i], 0.0, 1.0);
        std::binomial_distribution<std::int64_t> bin(remaining, p);
        hits = bin(rng);
      }
      remaining -= hits;
      add_scaled(total, points_[i], hits);
    }
    return total;
  }

 private:
  static void check(const Count2& c) {
    if (c.first > kMaxPopulation || c.second > kMaxPopulation)
      throw Error(ErrorCode::Overflow, "population component exceeds 2^53");
  }

  static void add_component(std::int64_t& acc, std::int64_t value, std::int64_t times) {
    if (value == 0 || times == 0) return;
    if (value > (kMaxPopulation - acc) / times)
      throw Error(ErrorCode::Overflow, "population component exceeds 2^53");
    acc += value * times;
  }

  static void add_scaled(Count2& acc, Count2 point, std::int64_t times) {
    add_component(acc.first, point.first, times);
    add_component(acc.second, point.second, times);
  }

  std::vector<Count2> points_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  std::vector<double> tail_;
};

/// Draws generations of one model. Holds the three samplers so that repeated
/// steps do not rebuild them.
class Simulator {
 public:
  explicit Simulator(const ModelSpec& spec)
      : spec_(&spec), offspring1_(spec.offspring1()), offspring2_(spec.offspring2()),
        immigration_(spec.immigration()) {}

  /// One generation: offspring of type 1 parents, of type 2 parents, then
  /// the immigrants.
  Count2 step(Count2 x_prev, RngStream& rng) const {
    if (x_prev.first < 0 || x_prev.second < 0)
      throw Error(ErrorCode::InvalidArgument, "negative population");
    const Count2 a = offspring1_.sample_sum(x_prev.first, rng);
    const Count2 b = offspring2_.sample_sum(x_prev.second, rng);
    const Count2 e = immigration_.sample(rng);
    auto sum3 = [](std::int64_t x, std::int64_t y, std::int64_t z) {
      if (x > kMaxPopulation - y || x + y > kMaxPopulation - z)
        throw Error(ErrorCode::Overflow, "population component exceeds 2^53");
      return x + y + z;
    };
    const Count2 out{sum3(a.first, b.first, e.first), sum3(a.second, b.second, e.second)};
    return out;
  }

  const ModelSpec& spec() const { return *spec_; }

 private:
  const ModelSpec* spec_;
  LawSampler offspring1_;
  LawSampler offspring2_;
  LawSampler immigration_;
};

inline Count2 step(const ModelSpec& spec, Count2 x_prev, RngStream& rng) {
  return Simulator(spec).step(x_prev, rng);
}

/// One observed path X_0 = 0, X_1, ..., X_n with its derived sequences.
///
/// u_seq[k] = X_{k,1} + X_{k,2}, v_seq[k] = X_{k,1} - X_{k,2}. When the path
/// is tied to a model, m_seq[k] = X_k - m_xi X_{k-1} - m_eps for k >= 1 and
/// m_seq[0] = 0; otherwise m_seq is empty.
struct Trajectory {
  std::vector<Count2> states;
  std::vector<std::int64_t> u_seq;
  std::vector<std::int64_t> v_seq;
  std::vector<Vec2> m_seq;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string spec_name;

  /// Number of observed generations.
  std::size_t n() const { return states.empty() ? 0 : states.size() - 1; }
  bool has_martingale() const { return !m_seq.empty(); }
};

namespace detail {
inline void fill_projections(Trajectory& t) {
  t.u_seq.resize(t.states.size());
  t.v_seq.resize(t.states.size());
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    t.u_seq[k] = t.states[k].first + t.states[k].second;
    t.v_seq[k] = t.states[k].first - t.states[k].second;
  }
}

inline void require_zero_start(const std::vector<Count2>& states) {
  if (states.size() < 2) throw Error(ErrorCode::InvalidArgument, "trajectory needs n >= 1");
  if (states.front() != Count2{})
    throw Error(ErrorCode::InvalidArgument, "trajectory must start at X_0 = (0,0)");
  for (const auto& s : states)
    if (s.first < 0 || s.second < 0)
      throw Error(ErrorCode::InvalidArgument, "negative population in trajectory");
}
}  // namespace detail

/// Trajectory from raw states, without martingale differences.
inline Trajectory make_trajectory(std::vector<Count2> states) {
  detail::require_zero_start(states);
  Trajectory t;
  t.states = std::move(states);
  detail::fill_projections(t);
  return t;
}

/// Trajectory from raw states, with martingale differences under `spec`.
inline Trajectory make_trajectory(const ModelSpec& spec, std::vector<Count2> states,
                                  std::uint64_t seed = 0, std::uint64_t stream = 0) {
  Trajectory t = make_trajectory(std::move(states));
  t.seed = seed;
  t.stream = stream;
  t.spec_name = spec.name();
  const Mat2& m = spec.mean_matrix();
  const Vec2 me = spec.immigration_mean();
  t.m_seq.assign(t.states.size(), Vec2{});
  for (std::size_t k = 1; k < t.states.size(); ++k)
    t.m_seq[k] = Vec2(t.states[k]) - m * Vec2(t.states[k - 1]) - me;
  return t;
}

inline Trajectory simulate(const Simulator& sim, std::size_t n, std::uint64_t seed,
                           std::uint64_t stream) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  RngStream rng(seed, stream);
  std::vector<Count2> states(n + 1);
  for (std::size_t k = 1; k <= n; ++k) states[k] = sim.step(states[k - 1], rng);
  return make_trajectory(sim.spec(), std::move(states), seed, stream);
}

inline Trajectory simulate(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
                           std::uint64_t stream) {
  return simulate(Simulator(spec), n, seed, stream);
}

struct MeanEstimate {
  Vec2 mean;
  Vec2 standard_error;
};

/// Monte Carlo average of X_k over independent zero-start paths.
inline MeanEstimate empirical_mean_state(const ModelSpec& spec, std::size_t k,
                                         std::size_t replicas, std::uint64_t seed,
                                         unsigned threads = 1) {
  if (k < 1 || replicas < 1)
    throw Error(ErrorCode::InvalidArgument, "need k >= 1 and replicas >= 1");
  const Simulator sim(spec);
  std::vector<Count2> finals(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    RngStream rng(seed, stream_id(StreamDomain::MeanState, 0, r));
    Count2 x{};
    for (std::size_t j = 0; j < k; ++j) x = sim.step(x, rng);
    finals[r] = x;
  });
  CompensatedSum s1, s2, q1, q2;
  for (const auto& x : finals) {
    s1 += static_cast<double>(x.first);
    s2 += static_cast<double>(x.second);
  }
  const double nr = static_cast<double>(replicas);
  const Vec2 mean{s1.value() / nr, s2.value() / nr};
  for (const auto& x : finals) {
    const double d1 = static_cast<double>(x.first) - mean.x;
    const double d2 = static_cast<double>(x.second) - mean.y;
    q1 += d1 * d1;
    q2 += d2 * d2;
  }
  const double denom = replicas > 1 ? nr - 1.0 : 1.0;
  return {mean, {std::sqrt(q1.value() / denom / nr), std::sqrt(q2.value() / denom / nr)}};
}

}  // namespace gwcls
