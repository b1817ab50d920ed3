#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "gwcls/error.hpp"
#include "gwcls/linalg.hpp"
#include "gwcls/simulate.hpp"
#include "gwcls/summation.hpp"

namespace gwcls {

/// Conditional least squares estimates from one sample.
///
/// rho_hat exists iff in_Hn, delta_hat iff in_tHn, and the offspring-mean
/// pair iff both. Absent values are std::nullopt, never NaN.
struct ClsResult {
  std::optional<double> rho_hat;
  std::optional<double> delta_hat;
  std::optional<double> alpha_hat;
  std::optional<double> beta_hat;
  bool in_Hn = false;
  bool in_tHn = false;
  std::size_t n = 0;
};

namespace detail {
/// Sums of <w, X_{k-1}>^2 and <w, X_k - m_eps><w, X_{k-1}> over k = 1..n.
struct ProjectedSums {
  double denominator = 0.0;
  double numerator = 0.0;
};

inline ProjectedSums projected_sums(const Trajectory& traj, Vec2 w, Vec2 m_eps) {
  CompensatedSum den, num;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double prev = dot(w, Vec2(traj.states[k - 1]));
    den += prev * prev;
    num += dot(w, Vec2(traj.states[k]) - m_eps) * prev;
  }
  return {den.value(), num.value()};
}

inline bool any_nonzero_projection(const Trajectory& traj, bool total) {
  // Integer test, so membership never depends on rounding.
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    if (total ? (s.first + s.second != 0) : (s.first != s.second)) return true;
  }
  return false;
}
}  // namespace detail

/// Sum_{k=1}^n U_{k-1}^2 > 0.
inline bool in_Hn(const Trajectory& traj) { return detail::any_nonzero_projection(traj, true); }

/// Sum_{k=1}^n V_{k-1}^2 > 0.
inline bool in_tHn(const Trajectory& traj) { return detail::any_nonzero_projection(traj, false); }

inline double estimate_rho(const Trajectory& traj, Vec2 m_eps) {
  if (!in_Hn(traj)) throw Error(ErrorCode::DenominatorZero, "sample not in H_n");
  const auto s = detail::projected_sums(traj, kOnes, m_eps);
  return s.numerator / s.denominator;
}

inline double estimate_delta(const Trajectory& traj, Vec2 m_eps) {
  if (!in_tHn(traj)) throw Error(ErrorCode::DenominatorZero, "sample not in tilde H_n");
  const auto s = detail::projected_sums(traj, kContrast, m_eps);
  return s.numerator / s.denominator;
}

/// (alpha_hat, beta_hat) = ((rho + delta)/2, (rho - delta)/2).
inline std::pair<double, double> alpha_beta_from(double rho_hat, double delta_hat) {
  return {(rho_hat + delta_hat) / 2.0, (rho_hat - delta_hat) / 2.0};
}

inline std::pair<double, double> estimate_alpha_beta(const Trajectory& traj, Vec2 m_eps) {
  const bool h = in_Hn(traj), th = in_tHn(traj);
  if (!h && !th) throw Error(ErrorCode::DenominatorZero, "sample in neither H_n nor tilde H_n");
  if (!h) throw Error(ErrorCode::DenominatorZero, "sample not in H_n");
  if (!th) throw Error(ErrorCode::DenominatorZero, "sample not in tilde H_n");
  return alpha_beta_from(estimate_rho(traj, m_eps), estimate_delta(traj, m_eps));
}

/// Direct least-squares solve for (alpha, beta): A_n^{-1} b_n with
/// A_n = Sum B_{k-1}^2, b_n = Sum B_{k-1}(X_k - m_eps), B = [[x1,x2],[x2,x1]].
inline std::pair<double, double> estimate_via_normal_equations(const Trajectory& traj,
                                                               Vec2 m_eps) {
  CompensatedSum diag, off, b1, b2;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const Vec2 p(traj.states[k - 1]);
    const Vec2 r = Vec2(traj.states[k]) - m_eps;
    diag += p.x * p.x + p.y * p.y;
    off += 2.0 * p.x * p.y;
    b1 += p.x * r.x + p.y * r.y;
    b2 += p.y * r.x + p.x * r.y;
  }
  const double a = diag.value(), b = off.value();
  // det = (a - b)(a + b); both factors are sums of squares of projections.
  const double det = (a - b) * (a + b);
  const double norm = std::abs(a) + std::abs(b);  // 1-norm of [[a,b],[b,a]]
  if (det == 0.0 || !std::isfinite(det))
    throw Error(ErrorCode::SingularNormalMatrix, "normal matrix is singular");
  const double cond = norm * norm / std::abs(det);
  if (cond > 1e12)
    throw Error(ErrorCode::SingularNormalMatrix,
                "normal matrix condition estimate " + std::to_string(cond) + " exceeds 1e12");
  const double r1 = b1.value(), r2 = b2.value();
  return {(a * r1 - b * r2) / det, (a * r2 - b * r1) / det};
}

/// Least-squares objective Q_n at (rho', delta').
inline double objective_Q(const Trajectory& traj, Vec2 m_eps, double rho_prime,
                          double delta_prime) {
  const Mat2 m = 0.5 * Mat2{rho_prime + delta_prime, rho_prime - delta_prime,
                            rho_prime - delta_prime, rho_prime + delta_prime};
  CompensatedSum q;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const Vec2 r = Vec2(traj.states[k]) - m * Vec2(traj.states[k - 1]) - m_eps;
    q += dot(r, r);
  }
  return q.value();
}

/// All estimators with their existence flags.
inline ClsResult estimate_all(const Trajectory& traj, Vec2 m_eps) {
  ClsResult r;
  r.n = traj.n();
  r.in_Hn = in_Hn(traj);
  r.in_tHn = in_tHn(traj);
  if (r.in_Hn) r.rho_hat = estimate_rho(traj, m_eps);
  if (r.in_tHn) r.delta_hat = estimate_delta(traj, m_eps);
  if (r.rho_hat && r.delta_hat) {
    const auto [a, b] = alpha_beta_from(*r.rho_hat, *r.delta_hat);
    r.alpha_hat = a;
    r.beta_hat = b;
  }
  return r;
}

}  // namespace gwcls
