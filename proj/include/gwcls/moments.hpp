#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gwcls/error.hpp"
#include "gwcls/law.hpp"
#include "gwcls/linalg.hpp"
#include "gwcls/model.hpp"
#include "gwcls/parallel.hpp"
#include "gwcls/rng.hpp"
#include "gwcls/simulate.hpp"
#include "gwcls/stats.hpp"
#include "gwcls/summation.hpp"

namespace gwcls {

/// m_xi^j = J/2 + (alpha - beta)^j K/2, valid when alpha + beta = 1.
inline Mat2 mean_matrix_power(double alpha, double beta, std::uint64_t j) {
  if (alpha < 0.0 || beta < 0.0 || alpha > 1.0 || beta > 1.0 ||
      std::abs(alpha + beta - 1.0) > ModelSpec::kShapeTolerance)
    throw Error(ErrorCode::InvalidArgument, "need alpha, beta in [0,1] with alpha + beta = 1");
  const double lam = j == 0 ? 1.0 : std::pow(alpha - beta, static_cast<double>(j));
  return 0.5 * Mat2::ones() + (0.5 * lam) * Mat2::contrast();
}

/// E X_k for the zero-start process, in closed form.
inline Vec2 expected_state(const ModelSpec& spec, std::uint64_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const double lam_k = std::pow(spec.delta(), static_cast<double>(k));
  const Vec2 me = spec.immigration_mean();
  return (0.5 * static_cast<double>(k)) * (Mat2::ones() * me) +
         ((1.0 - lam_k) / (4.0 * spec.beta())) * (Mat2::contrast() * me);
}

/// E[M_k M_k^T | X_{k-1} = x] = x_1 V_xi1 + x_2 V_xi2 + V_eps.
inline Mat2 conditional_cov_oracle(const ModelSpec& spec, Count2 x_prev) {
  return static_cast<double>(x_prev.first) * spec.offspring_cov1() +
         static_cast<double>(x_prev.second) * spec.offspring_cov2() + spec.immigration_cov();
}

/// E[M_k^{(x)3} | X_{k-1} = x], as an 8-vector (entry (i,j,l) at 4i+2j+l).
inline Kron3 conditional_third_oracle(const ModelSpec& spec, Count2 x_prev) {
  const Kron3 k1 = law_central_kron3(spec.offspring1());
  const Kron3 k2 = law_central_kron3(spec.offspring2());
  const Kron3 ke = law_central_kron3(spec.immigration());
  Kron3 out{};
  for (std::size_t i = 0; i < 8; ++i)
    out[i] = static_cast<double>(x_prev.first) * k1[i] +
             static_cast<double>(x_prev.second) * k2[i] + ke[i];
  return out;
}

inline constexpr std::size_t kMaxEnumerationSupport = 10'000'000;

using OutcomeLaw = std::map<Count2, double>;

namespace detail {
inline OutcomeLaw convolve(const OutcomeLaw& acc, const FiniteLaw2D& law, std::size_t cap) {
  OutcomeLaw out;
  for (const auto& [pt, p] : acc) {
    for (const auto& a : law.atoms()) {
      if (a.probability == 0.0) continue;
      out[{pt.first + a.point.first, pt.second + a.point.second}] += p * a.probability;
      if (out.size() > cap)
        throw Error(ErrorCode::EnumerationTooLarge,
                    "outcome support exceeds " + std::to_string(cap));
    }
  }
  return out;
}
}  // namespace detail

/// Exact law of X_k given X_{k-1} = x_prev: x_prev.first-fold and
/// x_prev.second-fold convolutions of the offspring laws, convolved with the
/// immigration law.
inline OutcomeLaw enumerate_outcome_law(const ModelSpec& spec, Count2 x_prev,
                                        std::size_t max_support = kMaxEnumerationSupport) {
  OutcomeLaw acc{{Count2{}, 1.0}};
  for (std::int64_t j = 0; j < x_prev.first; ++j)
    acc = detail::convolve(acc, spec.offspring1(), max_support);
  for (std::int64_t j = 0; j < x_prev.second; ++j)
    acc = detail::convolve(acc, spec.offspring2(), max_support);
  return detail::convolve(acc, spec.immigration(), max_support);
}

/// Second and third central moments of X_k - m_xi x_prev - m_eps, taken
/// over the enumerated outcome law.
struct EnumeratedMoments {
  Vec2 mean_residual;
  Mat2 cov;
  Kron3 third{};
};

inline EnumeratedMoments brute_force_conditional_moments(const ModelSpec& spec, Count2 x_prev) {
  const OutcomeLaw law = enumerate_outcome_law(spec, x_prev);
  const Vec2 centre = spec.mean_matrix() * Vec2(x_prev) + spec.immigration_mean();
  CompensatedSum r1, r2, c11, c12, c22;
  std::array<CompensatedSum, 8> t;
  for (const auto& [pt, p] : law) {
    const Vec2 d = Vec2(pt) - centre;
    r1 += p * d.x;
    r2 += p * d.y;
    c11 += p * d.x * d.x;
    c12 += p * d.x * d.y;
    c22 += p * d.y * d.y;
    const Kron3 k = kron3(d);
    for (std::size_t i = 0; i < 8; ++i) t[i] += p * k[i];
  }
  EnumeratedMoments m;
  m.mean_residual = {r1.value(), r2.value()};
  m.cov = {c11.value(), c12.value(), c12.value(), c22.value()};
  for (std::size_t i = 0; i < 8; ++i) m.third[i] = t[i].value();
  return m;
}

enum class MomentTarget { UPower, VEvenPower, MNormPower, XNormPower };

constexpr std::string_view to_string(MomentTarget t) {
  switch (t) {
    case MomentTarget::UPower: return "U";
    case MomentTarget::VEvenPower: return "V";
    case MomentTarget::MNormPower: return "M";
    case MomentTarget::XNormPower: return "X";
  }
  return "?";
}

inline MomentTarget parse_moment_target(std::string_view s) {
  if (s == "U") return MomentTarget::UPower;
  if (s == "V") return MomentTarget::VEvenPower;
  if (s == "M") return MomentTarget::MNormPower;
  if (s == "X") return MomentTarget::XNormPower;
  throw Error(ErrorCode::InvalidArgument, "unknown moment target '" + std::string(s) + "'");
}

/// Monte Carlo moment estimates across time and their log-log growth slope.
///
/// `order` is the power l for U^l, |M|^l and |X|^l, and j for V^{2j}.
struct MomentGrowthReport {
  MomentTarget target = MomentTarget::UPower;
  unsigned order = 0;
  std::vector<std::uint64_t> ks;
  std::vector<double> estimates;
  std::vector<double> standard_errors;
  double fitted_slope = 0.0;
  double target_slope = 0.0;

  bool within(double band) const { return std::abs(fitted_slope - target_slope) <= band; }
};

inline double growth_target_slope(MomentTarget target, unsigned order) {
  switch (target) {
    case MomentTarget::UPower:
    case MomentTarget::XNormPower:
    case MomentTarget::VEvenPower: return static_cast<double>(order);
    case MomentTarget::MNormPower: return static_cast<double>(order / 2);
  }
  return 0.0;
}

inline MomentGrowthReport moment_growth(const ModelSpec& spec, MomentTarget target,
                                        unsigned order, std::vector<std::uint64_t> ks,
                                        std::size_t replicas, std::uint64_t seed,
                                        unsigned threads = 1) {
  if (ks.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two time points");
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "order must be >= 1");
  if (replicas < 2) throw Error(ErrorCode::InvalidArgument, "need at least two replicas");
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks[i] < 1 || (i > 0 && ks[i] <= ks[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "time points must be positive and increasing");

  const Simulator sim(spec);
  const Mat2& mxi = spec.mean_matrix();
  const Vec2 me = spec.immigration_mean();
  const std::uint64_t kmax = ks.back();
  const double power = target == MomentTarget::VEvenPower ? 2.0 * order : order;

  auto functional = [&](Count2 x, Count2 prev) -> double {
    switch (target) {
      case MomentTarget::UPower:
        return std::pow(static_cast<double>(x.first + x.second), power);
      case MomentTarget::VEvenPower:
        return std::pow(static_cast<double>(x.first - x.second), power);
      case MomentTarget::MNormPower: {
        const Vec2 m = Vec2(x) - mxi * Vec2(prev) - me;
        return std::pow(std::sqrt(dot(m, m)), power);
      }
      case MomentTarget::XNormPower: {
        const Vec2 v(x);
        return std::pow(std::sqrt(dot(v, v)), power);
      }
    }
    return 0.0;
  };

  // values[r * |ks| + i] = functional at ks[i] on replica r
  std::vector<double> values(replicas * ks.size());
  parallel_for(replicas, threads, [&](std::size_t r) {
    RngStream rng(seed, stream_id(StreamDomain::MomentGrowth, 0, r));
    Count2 x{};
    std::size_t next = 0;
    for (std::uint64_t k = 1; k <= kmax; ++k) {
      const Count2 prev = x;
      x = sim.step(x, rng);
      if (k == ks[next]) values[r * ks.size() + next++] = functional(x, prev);
    }
  });

  MomentGrowthReport rep;
  rep.target = target;
  rep.order = order;
  rep.target_slope = growth_target_slope(target, order);
  std::vector<double> logk, loge;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    std::vector<double> col(replicas);
    for (std::size_t r = 0; r < replicas; ++r) col[r] = values[r * ks.size() + i];
    const double m = sample_mean(col);
    rep.estimates.push_back(m);
    rep.standard_errors.push_back(sample_sd(col) / std::sqrt(static_cast<double>(replicas)));
    logk.push_back(std::log(static_cast<double>(ks[i])));
    loge.push_back(std::log(m));
  }
  rep.ks = std::move(ks);
  rep.fitted_slope = ols_slope(logk, loge);
  return rep;
}

}  // namespace gwcls
