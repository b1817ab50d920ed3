#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "gwcls/error.hpp"
#include "gwcls/law.hpp"
#include "gwcls/linalg.hpp"

namespace gwcls {

enum class Regime {
  General,
  TotalDegenerate,
  DiffDegenerateImmigrationActive,
  DiffDegenerateImmigrationNull,
};

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::General: return "General";
    case Regime::TotalDegenerate: return "TotalDegenerate";
    case Regime::DiffDegenerateImmigrationActive: return "DiffDegenerateImmigrationActive";
    case Regime::DiffDegenerateImmigrationNull: return "DiffDegenerateImmigrationNull";
  }
  return "Unknown";
}

constexpr bool is_diff_degenerate(Regime r) {
  return r == Regime::DiffDegenerateImmigrationActive ||
         r == Regime::DiffDegenerateImmigrationNull;
}

/// Critical, positively regular, doubly symmetric 2-type model with immigration.
///
/// Immutable once built; all moment objects are enumerated exactly from the
/// atoms at construction. Column i of the mean matrix is the mean offspring
/// vector of a type i individual.
class ModelSpec {
 public:
  static constexpr double kShapeTolerance = 1e-10;
  static constexpr double kZeroTolerance = 1e-12;

  const FiniteLaw2D& offspring1() const { return offspring1_; }
  const FiniteLaw2D& offspring2() const { return offspring2_; }
  const FiniteLaw2D& immigration() const { return immigration_; }
  const std::string& name() const { return name_; }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  /// alpha - beta, the stable eigenvalue of the mean matrix.
  double delta() const { return alpha_ - beta_; }
  const Mat2& mean_matrix() const { return mean_matrix_; }
  const Mat2& offspring_cov1() const { return v_xi1_; }
  const Mat2& offspring_cov2() const { return v_xi2_; }
  const Mat2& offspring_cov_avg() const { return vbar_xi_; }
  Vec2 immigration_mean() const { return m_eps_; }
  const Mat2& immigration_cov() const { return v_eps_; }

  /// <Vbar 1, 1>: the diffusion coefficient of the limit process.
  double total_offspring_variance() const { return quad_form(vbar_xi_, kOnes); }
  /// <Vbar u~, u~>.
  double contrast_offspring_variance() const { return quad_form(vbar_xi_, kContrast); }
  /// <1, m_eps>: the drift of the limit process.
  double immigration_total_mean() const { return dot(kOnes, m_eps_); }
  /// <V_eps 1, 1>.
  double immigration_total_variance() const { return quad_form(v_eps_, kOnes); }
  /// <V_eps u~, u~>.
  double immigration_contrast_variance() const { return quad_form(v_eps_, kContrast); }
  /// E <u~, eps>^2 (raw, not centred).
  double immigration_contrast_second_moment() const {
    return law_raw_second(immigration_, kContrast);
  }

  friend ModelSpec build_model(FiniteLaw2D, FiniteLaw2D, FiniteLaw2D, std::string);

 private:
  ModelSpec(FiniteLaw2D o1, FiniteLaw2D o2, FiniteLaw2D imm, std::string name)
      : offspring1_(std::move(o1)), offspring2_(std::move(o2)),
        immigration_(std::move(imm)), name_(std::move(name)) {}

  FiniteLaw2D offspring1_;
  FiniteLaw2D offspring2_;
  FiniteLaw2D immigration_;
  std::string name_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  Mat2 mean_matrix_;
  Mat2 v_xi1_, v_xi2_, vbar_xi_;
  Vec2 m_eps_;
  Mat2 v_eps_;
};

inline ModelSpec build_model(FiniteLaw2D offspring1, FiniteLaw2D offspring2,
                             FiniteLaw2D immigration, std::string name = "custom") {
  ModelSpec spec(std::move(offspring1), std::move(offspring2), std::move(immigration),
                 std::move(name));
  const Vec2 m1 = law_mean(spec.offspring1_);
  const Vec2 m2 = law_mean(spec.offspring2_);
  spec.mean_matrix_ = {m1.x, m2.x, m1.y, m2.y};
  const auto& m = spec.mean_matrix_;

  auto describe = [&] {
    std::ostringstream os;
    os << "mean matrix [[" << m.a11 << "," << m.a12 << "],[" << m.a21 << "," << m.a22 << "]]";
    return os.str();
  };
  if (std::abs(m.a11 - m.a22) > ModelSpec::kShapeTolerance ||
      std::abs(m.a12 - m.a21) > ModelSpec::kShapeTolerance)
    throw Error(ErrorCode::NotDoublySymmetric, describe());
  spec.alpha_ = m.a11;
  spec.beta_ = m.a12;
  if (std::abs(spec.alpha_ + spec.beta_ - 1.0) > ModelSpec::kShapeTolerance)
    throw Error(ErrorCode::NotCritical, describe() + " has alpha + beta != 1");
  if (spec.alpha_ <= 0.0 || spec.beta_ <= 0.0)
    throw Error(ErrorCode::NotPositivelyRegular, describe());

  spec.m_eps_ = law_mean(spec.immigration_);
  if (spec.m_eps_.x == 0.0 && spec.m_eps_.y == 0.0)
    throw Error(ErrorCode::ZeroImmigrationMean, "immigration law is the point mass at (0,0)");

  spec.v_xi1_ = law_cov(spec.offspring1_);
  spec.v_xi2_ = law_cov(spec.offspring2_);
  spec.vbar_xi_ = 0.5 * (spec.v_xi1_ + spec.v_xi2_);
  spec.v_eps_ = law_cov(spec.immigration_);
  return spec;
}

/// Exact-zero tests on the three quadratic forms at tolerance 1e-12.
inline Regime classify_regime(const ModelSpec& spec) {
  if (spec.total_offspring_variance() <= ModelSpec::kZeroTolerance) return Regime::TotalDegenerate;
  if (spec.contrast_offspring_variance() <= ModelSpec::kZeroTolerance) {
    return spec.immigration_contrast_second_moment() <= ModelSpec::kZeroTolerance
               ? Regime::DiffDegenerateImmigrationNull
               : Regime::DiffDegenerateImmigrationActive;
  }
  return Regime::General;
}

// Canonical builders.

/// Uniform law on {0,1}^2.
inline FiniteLaw2D uniform_unit_square() {
  return FiniteLaw2D({{{0, 0}, 0.25}, {{1, 0}, 0.25}, {{0, 1}, 0.25}, {{1, 1}, 0.25}});
}

namespace detail {
inline void require_open_unit(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
}
}  // namespace detail

/// Model A: generic regime. A type 1 parent has one type 1 child with
/// probability alpha, two type 2 children with probability (1-alpha)/2, and
/// nothing otherwise; type 2 is the mirror image.
inline ModelSpec model_general(double alpha = 0.3,
                               std::optional<FiniteLaw2D> immigration = std::nullopt) {
  detail::require_open_unit(alpha);
  const double rest = (1.0 - alpha) / 2.0;
  FiniteLaw2D o1({{{0, 0}, rest}, {{1, 0}, alpha}, {{0, 2}, rest}});
  FiniteLaw2D o2({{{0, 0}, rest}, {{0, 1}, alpha}, {{2, 0}, rest}});
  return build_model(std::move(o1), std::move(o2),
                     immigration.value_or(uniform_unit_square()), "general");
}

/// Model B: every individual has exactly one child, of its own type with
/// probability alpha.
inline ModelSpec model_unit_total(double alpha = 0.6,
                                  std::optional<FiniteLaw2D> immigration = std::nullopt) {
  detail::require_open_unit(alpha);
  FiniteLaw2D o1({{{1, 0}, alpha}, {{0, 1}, 1.0 - alpha}});
  FiniteLaw2D o2({{{0, 1}, alpha}, {{1, 0}, 1.0 - alpha}});
  return build_model(std::move(o1), std::move(o2),
                     immigration.value_or(uniform_unit_square()), "unit_total");
}

/// Model C: alpha = beta = 1/2, each individual has either no children or
/// one child of each type.
inline ModelSpec model_equal_pair(std::optional<FiniteLaw2D> immigration = std::nullopt) {
  FiniteLaw2D o({{{0, 0}, 0.5}, {{1, 1}, 0.5}});
  return build_model(o, o, immigration.value_or(uniform_unit_square()), "equal_pair");
}

/// Model C with immigrants arriving in equal-count pairs, so X_{k,1} = X_{k,2}.
inline ModelSpec model_equal_pair_null_immigration() {
  FiniteLaw2D o({{{0, 0}, 0.5}, {{1, 1}, 0.5}});
  FiniteLaw2D diagonal({{{0, 0}, 0.5}, {{1, 1}, 0.5}});
  return build_model(o, o, std::move(diagonal), "equal_pair_null");
}

}  // namespace gwcls
