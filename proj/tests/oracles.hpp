#pragma once

// Independent reference computations used only by the tests. None of these
// call into the routines they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "gwcls/law.hpp"
#include "gwcls/linalg.hpp"
#include "gwcls/model.hpp"

namespace oracle {

using gwcls::Count2;
using gwcls::FiniteLaw2D;
using gwcls::Mat2;
using gwcls::Vec2;

/// Mean via plain raw-moment sums.
inline std::array<double, 2> mean(const FiniteLaw2D& law) {
  double s1 = 0, s2 = 0;
  for (const auto& a : law.atoms()) {
    s1 += a.probability * static_cast<double>(a.point.first);
    s2 += a.probability * static_cast<double>(a.point.second);
  }
  return {s1, s2};
}

/// Covariance as E[xy] - E[x]E[y] (raw moments, no centring pass).
inline std::array<double, 4> cov(const FiniteLaw2D& law) {
  const auto m = mean(law);
  double e11 = 0, e12 = 0, e22 = 0;
  for (const auto& a : law.atoms()) {
    const double x = static_cast<double>(a.point.first), y = static_cast<double>(a.point.second);
    e11 += a.probability * x * x;
    e12 += a.probability * x * y;
    e22 += a.probability * y * y;
  }
  return {e11 - m[0] * m[0], e12 - m[0] * m[1], e12 - m[0] * m[1], e22 - m[1] * m[1]};
}

/// m^j by repeated multiplication.
inline Mat2 power_by_multiplication(double alpha, double beta, unsigned j) {
  Mat2 out = Mat2::identity();
  const Mat2 m{alpha, beta, beta, alpha};
  for (unsigned i = 0; i < j; ++i) out = out * m;
  return out;
}

/// sum_{j=0}^{k-1} m^j m_eps by direct iteration E X_k = m E X_{k-1} + m_eps.
inline Vec2 expected_state_by_iteration(double alpha, double beta, Vec2 m_eps, unsigned k) {
  const Mat2 m{alpha, beta, beta, alpha};
  Vec2 x{};
  for (unsigned i = 0; i < k; ++i) x = m * x + m_eps;
  return x;
}

/// Outcome law of X_k given X_{k-1} = x, by enumerating every combination of
/// individual offspring atoms (no incremental convolution).
inline std::map<Count2, double> outcome_law_by_tuples(const gwcls::ModelSpec& spec, Count2 x) {
  std::vector<const FiniteLaw2D*> laws;
  for (std::int64_t i = 0; i < x.first; ++i) laws.push_back(&spec.offspring1());
  for (std::int64_t i = 0; i < x.second; ++i) laws.push_back(&spec.offspring2());
  laws.push_back(&spec.immigration());
  std::vector<std::size_t> idx(laws.size(), 0);
  std::map<Count2, double> out;
  for (;;) {
    Count2 total{};
    double p = 1.0;
    for (std::size_t i = 0; i < laws.size(); ++i) {
      const auto& atom = laws[i]->atoms()[idx[i]];
      total.first += atom.point.first;
      total.second += atom.point.second;
      p *= atom.probability;
    }
    out[total] += p;
    std::size_t pos = 0;
    while (pos < laws.size() && ++idx[pos] == laws[pos]->size()) idx[pos++] = 0;
    if (pos == laws.size()) break;
  }
  return out;
}

/// Central second and third moments of an outcome law about its own mean.
struct CentralMoments {
  std::array<double, 2> mean{};
  std::array<double, 4> cov{};
  std::array<double, 8> third{};
};

inline CentralMoments central_moments(const std::map<Count2, double>& law) {
  CentralMoments cm;
  for (const auto& [pt, p] : law) {
    cm.mean[0] += p * static_cast<double>(pt.first);
    cm.mean[1] += p * static_cast<double>(pt.second);
  }
  for (const auto& [pt, p] : law) {
    const double d[2] = {static_cast<double>(pt.first) - cm.mean[0],
                         static_cast<double>(pt.second) - cm.mean[1]};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        cm.cov[2 * i + j] += p * d[i] * d[j];
        for (int l = 0; l < 2; ++l) cm.third[4 * i + 2 * j + l] += p * d[i] * d[j] * d[l];
      }
  }
  return cm;
}

/// KS statistic by evaluating both empirical CDFs at every pooled point.
inline double ks_brute_force(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  double d = 0;
  for (double t : pooled) {
    const double fa = static_cast<double>(std::count_if(a.begin(), a.end(), [&](double v) { return v <= t; })) /
                      static_cast<double>(a.size());
    const double fb = static_cast<double>(std::count_if(b.begin(), b.end(), [&](double v) { return v <= t; })) /
                      static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

/// Estimators evaluated straight from their defining ratio, in long double.
inline long double rho_direct(const std::vector<Count2>& x, Vec2 m_eps) {
  long double num = 0, den = 0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    const long double prev = static_cast<long double>(x[k - 1].first + x[k - 1].second);
    num += (static_cast<long double>(x[k].first + x[k].second) - m_eps.x - m_eps.y) * prev;
    den += prev * prev;
  }
  return num / den;
}

inline long double delta_direct(const std::vector<Count2>& x, Vec2 m_eps) {
  long double num = 0, den = 0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    const long double prev = static_cast<long double>(x[k - 1].first - x[k - 1].second);
    num += (static_cast<long double>(x[k].first - x[k].second) - (m_eps.x - m_eps.y)) * prev;
    den += prev * prev;
  }
  return num / den;
}

}  // namespace oracle
