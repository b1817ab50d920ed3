#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "gwcls/error.hpp"
#include "gwcls/model.hpp"
#include "gwcls/parallel.hpp"
#include "gwcls/rng.hpp"
#include "gwcls/summation.hpp"

namespace gwcls {

inline constexpr std::size_t kDefaultSdeSteps = std::size_t{1} << 14;

/// Discretised path of dY = a dt + sqrt(c Y^+) dW on [0,1], Y_0 = 0.
///
/// Alongside Y the path carries the increments of W and of two further
/// Brownian motions independent of W (and of each other), used by the
/// stochastic integrals of the limit vectors.
struct DiffusionPath {
  double drift = 0.0;      // a = <1, m_eps>
  double diffusion = 0.0;  // c = <Vbar 1, 1>
  std::vector<double> y;   // Y at t_i = i/N, i = 0..N
  std::vector<double> dw;
  std::vector<double> dw_tilde;
  std::vector<double> dw_tilde2;
  std::size_t clamped_steps = 0;

  std::size_t steps() const { return dw.size(); }
  double dt() const { return 1.0 / static_cast<double>(steps()); }
  double time(std::size_t i) const { return static_cast<double>(i) * dt(); }
};

/// Euler-Maruyama with full truncation, driven by given increments.
inline DiffusionPath integrate_Y(double a, double c, std::vector<double> dw,
                                 std::vector<double> dw_tilde, std::vector<double> dw_tilde2) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "drift a must be > 0");
  if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "diffusion c must be >= 0");
  const std::size_t n = dw.size();
  if (n < 2 || dw_tilde.size() != n || dw_tilde2.size() != n)
    throw Error(ErrorCode::InvalidArgument, "need N >= 2 increments of each driver");
  DiffusionPath p;
  p.drift = a;
  p.diffusion = c;
  p.y.assign(n + 1, 0.0);
  const double h = 1.0 / static_cast<double>(n);
  if (c == 0.0) {
    for (std::size_t i = 0; i <= n; ++i) p.y[i] = a * (static_cast<double>(i) * h);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = p.y[i];
      double next = yi + a * h + std::sqrt(c * std::max(yi, 0.0)) * dw[i];
      if (next < 0.0) {
        next = 0.0;
        ++p.clamped_steps;
      }
      p.y[i + 1] = next;
    }
  }
  p.dw = std::move(dw);
  p.dw_tilde = std::move(dw_tilde);
  p.dw_tilde2 = std::move(dw_tilde2);
  return p;
}

inline DiffusionPath simulate_Y(double a, double c, std::size_t steps, RngStream& rng) {
  if (steps < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 steps");
  const double sd = std::sqrt(1.0 / static_cast<double>(steps));
  std::vector<double> dw(steps), dwt(steps), dwtt(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    dw[i] = sd * rng.normal();
    dwt[i] = sd * rng.normal();
    dwtt[i] = sd * rng.normal();
  }
  return integrate_Y(a, c, std::move(dw), std::move(dwt), std::move(dwtt));
}

/// Same Brownian paths on a grid of half the resolution (pairwise summed
/// increments), for coupled refinement studies.
inline DiffusionPath coarsen(const DiffusionPath& fine) {
  const std::size_t n = fine.steps() / 2;
  std::vector<double> dw(n), dwt(n), dwtt(n);
  for (std::size_t i = 0; i < n; ++i) {
    dw[i] = fine.dw[2 * i] + fine.dw[2 * i + 1];
    dwt[i] = fine.dw_tilde[2 * i] + fine.dw_tilde[2 * i + 1];
    dwtt[i] = fine.dw_tilde2[2 * i] + fine.dw_tilde2[2 * i + 1];
  }
  return integrate_Y(fine.drift, fine.diffusion, std::move(dw), std::move(dwt), std::move(dwtt));
}

/// Path functionals entering the limit laws.
struct LimitSample {
  double int_Y2 = 0.0;     // int Y^2 dt
  double int_Y = 0.0;      // int Y dt
  double int_Y_dM = 0.0;   // int Y d(Y - a t)
  double int_Y_dWt = 0.0;  // int Y dW~
  double int_Y_dWtt = 0.0; // int Y dW~~ (second independent driver)
  double wt_end = 0.0;     // W~_1
};

/// Lebesgue integrals by the trapezoid rule; stochastic integrals by
/// left-point (Ito) sums on the same grid.
inline LimitSample limit_functionals(const DiffusionPath& p) {
  const std::size_t n = p.steps();
  const double h = p.dt();
  CompensatedSum y2, y1, ydm, ydwt, ydwtt, wt;
  for (std::size_t i = 0; i < n; ++i) {
    const double yl = p.y[i], yr = p.y[i + 1];
    y2 += 0.5 * h * (yl * yl + yr * yr);
    y1 += 0.5 * h * (yl + yr);
    ydm += yl * (yr - yl - p.drift * h);
    ydwt += yl * p.dw_tilde[i];
    ydwtt += yl * p.dw_tilde2[i];
    wt += p.dw_tilde[i];
  }
  return {y2.value(), y1.value(), ydm.value(), ydwt.value(), ydwtt.value(), wt.value()};
}

inline constexpr double kMinLimitDenominator = 1e-14;

/// int Y d(Y - a t) / int Y^2 dt.
inline double limit_rho_sample(const LimitSample& s) {
  if (s.int_Y2 < kMinLimitDenominator)
    throw Error(ErrorCode::DegenerateDenominator, "int Y^2 dt below 1e-14");
  return s.int_Y_dM / s.int_Y2;
}

inline double limit_rho_sample(const DiffusionPath& path) {
  return limit_rho_sample(limit_functionals(path));
}

/// sqrt(alpha beta) int Y dW~ / int Y dt times (1, -1).
inline std::pair<double, double> limit_ab_sample(const LimitSample& s, double alpha,
                                                 double beta) {
  if (s.int_Y < kMinLimitDenominator)
    throw Error(ErrorCode::DegenerateDenominator, "int Y dt below 1e-14");
  const double v = std::sqrt(alpha * beta) * s.int_Y_dWt / s.int_Y;
  return {v, -v};
}

inline std::pair<double, double> limit_ab_sample(const DiffusionPath& path, double alpha,
                                                 double beta) {
  return limit_ab_sample(limit_functionals(path), alpha, beta);
}

/// Variance of the normal limit of n^{3/2}(rho_hat - 1) for unit-total offspring.
inline double limit_rho_degenerate_sigma2(const ModelSpec& spec) {
  if (classify_regime(spec) != Regime::TotalDegenerate)
    throw Error(ErrorCode::WrongRegime, "requires TotalDegenerate regime");
  const double a = spec.immigration_total_mean();
  return 3.0 * spec.immigration_total_variance() / (a * a);
}

/// Variance of the normal limit of sqrt(n)(alpha_hat - alpha) when the two
/// offspring counts of every individual coincide.
inline double limit_ab_degenerate_sigma2(const ModelSpec& spec) {
  const Regime r = classify_regime(spec);
  if (r == Regime::DiffDegenerateImmigrationNull)
    throw Error(ErrorCode::DivisionByZero, "E<u~, eps>^2 = 0");
  if (r != Regime::DiffDegenerateImmigrationActive)
    throw Error(ErrorCode::WrongRegime, "requires DiffDegenerateImmigrationActive regime");
  return spec.immigration_contrast_variance() / (4.0 * spec.immigration_contrast_second_moment());
}

/// Limit of the regime's normalised sum vector, evaluated on one sample.
inline std::array<double, 4> joint_limit_sample(const ModelSpec& spec, const LimitSample& s) {
  const double alpha = spec.alpha(), beta = spec.beta();
  const double q = spec.contrast_offspring_variance();
  switch (classify_regime(spec)) {
    case Regime::General:
      return {s.int_Y2, q / (4.0 * alpha * beta) * s.int_Y, s.int_Y_dM,
              q / (2.0 * std::sqrt(alpha * beta)) * s.int_Y_dWt};
    case Regime::TotalDegenerate:
      return {s.int_Y2, q / (4.0 * alpha * beta) * s.int_Y,
              std::sqrt(spec.immigration_total_variance()) * s.int_Y_dWtt,
              q / (2.0 * std::sqrt(alpha * beta)) * s.int_Y_dWt};
    case Regime::DiffDegenerateImmigrationActive:
    case Regime::DiffDegenerateImmigrationNull: {
      const double e2 = spec.immigration_contrast_second_moment();
      return {s.int_Y2, e2, s.int_Y_dM,
              std::sqrt(spec.immigration_contrast_variance() * e2) * s.wt_end};
    }
  }
  throw Error(ErrorCode::WrongRegime, "unknown regime");
}

/// Checks that the path was generated with the model's drift and diffusion.
inline std::array<double, 4> joint_limit_sample(const ModelSpec& spec, const DiffusionPath& path) {
  const double a = spec.immigration_total_mean();
  const double c = spec.total_offspring_variance() <= ModelSpec::kZeroTolerance
                       ? 0.0
                       : spec.total_offspring_variance();
  if (std::abs(path.drift - a) > 1e-12 || std::abs(path.diffusion - c) > 1e-12)
    throw Error(ErrorCode::WrongRegime, "path coefficients do not match the model");
  return joint_limit_sample(spec, limit_functionals(path));
}

/// Drift and diffusion coefficients of the limit process for `spec`.
inline std::pair<double, double> limit_coefficients(const ModelSpec& spec) {
  const double c = spec.total_offspring_variance();
  return {spec.immigration_total_mean(), c <= ModelSpec::kZeroTolerance ? 0.0 : c};
}

/// Functionals of `paths` independent limit paths; path i uses stream
/// stream_id(LimitPath, group, i).
inline std::vector<LimitSample> sample_limit_functionals(double a, double c, std::size_t steps,
                                                         std::size_t paths, std::uint64_t seed,
                                                         std::uint64_t group, unsigned threads) {
  std::vector<LimitSample> out(paths);
  parallel_for(paths, threads, [&](std::size_t i) {
    RngStream rng(seed, stream_id(StreamDomain::LimitPath, group, i));
    out[i] = limit_functionals(simulate_Y(a, c, steps, rng));
  });
  return out;
}

}  // namespace gwcls
