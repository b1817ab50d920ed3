#pragma once

#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gwcls/error.hpp"
#include "gwcls/linalg.hpp"
#include "gwcls/summation.hpp"

namespace gwcls {

struct Atom {
  Count2 point;
  double probability = 0.0;
};

/// Finite-support probability law on pairs of non-negative integers.
///
/// Used for both the offspring laws and the immigration law. Construction
/// validates the support (non-empty, distinct non-negative points) and that
/// the probabilities are non-negative and sum to one within 1e-12.
class FiniteLaw2D {
 public:
  static constexpr double kSumTolerance = 1e-12;

  FiniteLaw2D() = delete;

  explicit FiniteLaw2D(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw Error(ErrorCode::InvalidLaw, "law has no atoms");
    std::set<Count2> seen;
    CompensatedSum total;
    for (const auto& a : atoms_) {
      if (a.point.first < 0 || a.point.second < 0)
        throw Error(ErrorCode::InvalidLaw, "atom with negative component");
      if (!(a.probability >= 0.0) || a.probability > 1.0)
        throw Error(ErrorCode::InvalidLaw, "probability outside [0,1]");
      if (!seen.insert(a.point).second)
        throw Error(ErrorCode::InvalidLaw,
                    "duplicate atom (" + std::to_string(a.point.first) + "," +
                        std::to_string(a.point.second) + ")");
      total += a.probability;
    }
    if (std::abs(total.value() - 1.0) > kSumTolerance)
      throw Error(ErrorCode::InvalidLaw, "probabilities do not sum to 1");
  }

  static FiniteLaw2D point_mass(Count2 point) { return FiniteLaw2D({{point, 1.0}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

 private:
  std::vector<Atom> atoms_;
};

inline Vec2 law_mean(const FiniteLaw2D& law) {
  CompensatedSum sx, sy;
  for (const auto& a : law.atoms()) {
    sx += a.probability * static_cast<double>(a.point.first);
    sy += a.probability * static_cast<double>(a.point.second);
  }
  return {sx.value(), sy.value()};
}

/// Covariance matrix, computed from centred atoms.
inline Mat2 law_cov(const FiniteLaw2D& law) {
  const Vec2 m = law_mean(law);
  CompensatedSum s11, s12, s22;
  for (const auto& a : law.atoms()) {
    const Vec2 d = Vec2(a.point) - m;
    s11 += a.probability * d.x * d.x;
    s12 += a.probability * d.x * d.y;
    s22 += a.probability * d.y * d.y;
  }
  return {s11.value(), s12.value(), s12.value(), s22.value()};
}

/// Centred third Kronecker moment E[(z - Ez)^{(x)3}].
inline Kron3 law_central_kron3(const FiniteLaw2D& law) {
  const Vec2 m = law_mean(law);
  std::array<CompensatedSum, 8> acc;
  for (const auto& a : law.atoms()) {
    const Kron3 k = kron3(Vec2(a.point) - m);
    for (std::size_t i = 0; i < 8; ++i) acc[i] += a.probability * k[i];
  }
  Kron3 out{};
  for (std::size_t i = 0; i < 8; ++i) out[i] = acc[i].value();
  return out;
}

/// Second moment of a linear functional, E <w, z>^2 (not centred).
inline double law_raw_second(const FiniteLaw2D& law, Vec2 w) {
  CompensatedSum s;
  for (const auto& a : law.atoms()) {
    const double p = dot(w, Vec2(a.point));
    s += a.probability * p * p;
  }
  return s.value();
}

}  // namespace gwcls
