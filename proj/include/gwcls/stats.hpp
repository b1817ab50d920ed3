#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gwcls/error.hpp"
#include "gwcls/summation.hpp"

namespace gwcls {

inline double sample_mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptySample, "mean of empty sample");
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value() / static_cast<double>(xs.size());
}

/// Unbiased sample variance.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(ErrorCode::EmptySample, "variance needs two values");
  const double m = sample_mean(xs);
  CompensatedSum s;
  for (double x : xs) s += (x - m) * (x - m);
  return s.value() / static_cast<double>(xs.size() - 1);
}

inline double sample_sd(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

inline double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error(ErrorCode::EmptySample, "covariance needs two paired values");
  const double mx = sample_mean(xs), my = sample_mean(ys);
  CompensatedSum s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (xs[i] - mx) * (ys[i] - my);
  return s.value() / static_cast<double>(xs.size() - 1);
}

inline double sample_correlation(std::span<const double> xs, std::span<const double> ys) {
  return sample_covariance(xs, ys) / std::sqrt(sample_variance(xs) * sample_variance(ys));
}

/// Moment skewness m3 / m2^{3/2}.
inline double sample_skewness(std::span<const double> xs) {
  const double m = sample_mean(xs);
  CompensatedSum s2, s3;
  for (double x : xs) {
    const double d = x - m;
    s2 += d * d;
    s3 += d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  const double m2 = s2.value() / n;
  return (s3.value() / n) / std::pow(m2, 1.5);
}

inline double sample_median(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptySample, "median of empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
///
/// Sorts copies and walks both samples in merged order, advancing past all
/// copies of a tied value before measuring the gap.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySample, "KS needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

/// Ordinary least squares slope of ys on xs.
inline double ols_slope(std::span<const double> xs, std::span<const double> ys) {
  return sample_covariance(xs, ys) / sample_variance(xs);
}

}  // namespace gwcls
