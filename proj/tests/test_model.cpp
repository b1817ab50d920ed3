#include <gtest/gtest.h>

#include <random>

#include "gwcls/model.hpp"
#include "oracles.hpp"

using namespace gwcls;

namespace {

FiniteLaw2D law(std::vector<Atom> atoms) { return FiniteLaw2D(std::move(atoms)); }

void expect_mat_near(const Mat2& m, std::array<double, 4> want, double tol) {
  EXPECT_NEAR(m.a11, want[0], tol);
  EXPECT_NEAR(m.a12, want[1], tol);
  EXPECT_NEAR(m.a21, want[2], tol);
  EXPECT_NEAR(m.a22, want[3], tol);
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(FiniteLaw, RejectsInvalidLaws) {
  EXPECT_EQ(error_of([] { law({}); }), ErrorCode::InvalidLaw);
  EXPECT_EQ(error_of([] { law({{{0, 0}, 0.5}, {{0, 0}, 0.5}}); }), ErrorCode::InvalidLaw);
  EXPECT_EQ(error_of([] { law({{{-1, 0}, 1.0}}); }), ErrorCode::InvalidLaw);
  EXPECT_EQ(error_of([] { law({{{0, 0}, 0.6}, {{1, 0}, 0.6}}); }), ErrorCode::InvalidLaw);
  EXPECT_EQ(error_of([] { law({{{0, 0}, -0.1}, {{1, 0}, 1.1}}); }), ErrorCode::InvalidLaw);
  EXPECT_NO_THROW(law({{{0, 0}, 0.3}, {{1, 0}, 0.7 + 5e-13}}));
}

TEST(LawMean, Examples) {
  EXPECT_EQ(law_mean(FiniteLaw2D::point_mass({1, 1})), Vec2(1.0, 1.0));
  const Vec2 m2 = law_mean(law({{{1, 0}, 0.6}, {{0, 1}, 0.4}}));
  EXPECT_NEAR(m2.x, 0.6, 1e-15);
  EXPECT_NEAR(m2.y, 0.4, 1e-15);
  const Vec2 m3 = law_mean(law({{{0, 0}, 0.35}, {{1, 0}, 0.30}, {{0, 2}, 0.35}}));
  EXPECT_NEAR(m3.x, 0.30, 1e-15);
  EXPECT_NEAR(m3.y, 0.70, 1e-15);
}

TEST(LawCov, Examples) {
  expect_mat_near(law_cov(FiniteLaw2D::point_mass({2, 0})), {0, 0, 0, 0}, 0.0);
  expect_mat_near(law_cov(law({{{1, 0}, 0.5}, {{0, 1}, 0.5}})), {0.25, -0.25, -0.25, 0.25}, 1e-15);
  expect_mat_near(law_cov(uniform_unit_square()), {0.25, 0, 0, 0.25}, 1e-15);
}

TEST(BuildModel, ModelBMoments) {
  const auto spec = model_unit_total(0.6);
  EXPECT_NEAR(spec.alpha(), 0.6, 1e-15);
  EXPECT_NEAR(spec.beta(), 0.4, 1e-15);
  EXPECT_NEAR(spec.total_offspring_variance(), 0.0, 1e-15);
}

TEST(BuildModel, Errors) {
  // Mirrored mean (0.3, 0.6): doubly symmetric but alpha + beta = 0.9.
  auto o1 = law({{{0, 0}, 0.1}, {{1, 0}, 0.3}, {{0, 1}, 0.6}});
  auto o2 = law({{{0, 0}, 0.1}, {{0, 1}, 0.3}, {{1, 0}, 0.6}});
  EXPECT_EQ(error_of([&] { build_model(o1, o2, uniform_unit_square()); }), ErrorCode::NotCritical);
  EXPECT_EQ(error_of([&] {
              build_model(model_general().offspring1(), model_general().offspring2(),
                          FiniteLaw2D::point_mass({0, 0}));
            }),
            ErrorCode::ZeroImmigrationMean);
  // Not mirrored: type 2 mean (0.3, 0.7) equals type 1's.
  EXPECT_EQ(error_of([] {
              const auto a = model_general();
              build_model(a.offspring1(), a.offspring1(), uniform_unit_square());
            }),
            ErrorCode::NotDoublySymmetric);
  // alpha = 1, beta = 0 is critical but reducible.
  EXPECT_EQ(error_of([] {
              build_model(FiniteLaw2D::point_mass({1, 0}), FiniteLaw2D::point_mass({0, 1}),
                          uniform_unit_square());
            }),
            ErrorCode::NotPositivelyRegular);
  EXPECT_EQ(error_of([] { model_general(1.0); }), ErrorCode::InvalidArgument);
}

TEST(ClassifyRegime, CanonicalModels) {
  EXPECT_EQ(classify_regime(model_general(0.3)), Regime::General);
  EXPECT_EQ(classify_regime(model_unit_total(0.6)), Regime::TotalDegenerate);
  EXPECT_EQ(classify_regime(model_equal_pair()), Regime::DiffDegenerateImmigrationActive);
  EXPECT_NEAR(model_equal_pair().immigration_contrast_second_moment(), 0.5, 1e-15);
  EXPECT_EQ(classify_regime(model_equal_pair_null_immigration()),
            Regime::DiffDegenerateImmigrationNull);
  const auto a = model_general(0.3);
  EXPECT_NEAR(a.total_offspring_variance(), 0.7, 1e-14);
  EXPECT_NEAR(a.contrast_offspring_variance(), 1.54, 1e-14);
}

TEST(ClassifyRegime, UnitTotalGrid) {
  for (int i = 1; i <= 9; ++i) {
    const auto spec = model_unit_total(0.1 * i);
    EXPECT_EQ(classify_regime(spec), Regime::TotalDegenerate) << "alpha=" << 0.1 * i;
    EXPECT_GT(spec.contrast_offspring_variance(), 1e-12);
  }
}

TEST(BuildModel, StoredMomentsMatchEnumeration) {
  for (const auto& spec : {model_general(0.3), model_general(0.7), model_unit_total(0.6),
                           model_equal_pair(), model_equal_pair_null_immigration()}) {
    const auto m1 = oracle::mean(spec.offspring1());
    const auto m2 = oracle::mean(spec.offspring2());
    EXPECT_DOUBLE_EQ(spec.mean_matrix().a11, m1[0]);
    EXPECT_DOUBLE_EQ(spec.mean_matrix().a21, m1[1]);
    EXPECT_DOUBLE_EQ(spec.mean_matrix().a12, m2[0]);
    EXPECT_DOUBLE_EQ(spec.mean_matrix().a22, m2[1]);
    expect_mat_near(spec.offspring_cov1(), oracle::cov(spec.offspring1()), 1e-14);
    expect_mat_near(spec.offspring_cov2(), oracle::cov(spec.offspring2()), 1e-14);
    expect_mat_near(spec.immigration_cov(), oracle::cov(spec.immigration()), 1e-14);
    const auto em = oracle::mean(spec.immigration());
    EXPECT_DOUBLE_EQ(spec.immigration_mean().x, em[0]);
    EXPECT_DOUBLE_EQ(spec.immigration_mean().y, em[1]);
    const Mat2 avg = 0.5 * (spec.offspring_cov1() + spec.offspring_cov2());
    EXPECT_EQ(spec.offspring_cov_avg(), avg);
    EXPECT_NEAR(spec.alpha() + spec.beta(), 1.0, 1e-10);
  }
}

namespace {

/// Random critical doubly symmetric offspring pair: a random law on
/// {0..3}^2 mixed with (0,0) or (2,0)-type points until its mean total is 1,
/// and its mirror image for type 2. Optionally forces unit totals or equal
/// components.
enum class Shape { Free, UnitTotal, EqualComponents };

std::optional<ModelSpec> random_model(std::mt19937_64& gen, Shape shape) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Count2> candidates;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b) {
      if (shape == Shape::UnitTotal && a + b != 1) continue;
      if (shape == Shape::EqualComponents && a != b) continue;
      candidates.push_back({a, b});
    }
  std::vector<std::pair<Count2, double>> atoms;
  double total = 0;
  for (const auto& c : candidates)
    if (u(gen) < 0.6) {
      const double w = u(gen) + 0.05;
      atoms.push_back({c, w});
      total += w;
    }
  if (atoms.empty()) return std::nullopt;
  double mean_total = 0;
  for (auto& [c, w] : atoms) {
    w /= total;
    mean_total += w * static_cast<double>(c.first + c.second);
  }
  auto mix_with = [&](Count2 anchor, double anchor_total) {
    // p * mean_total + (1 - p) * anchor_total = 1
    const double p = (1.0 - anchor_total) / (mean_total - anchor_total);
    bool merged = false;
    for (auto& [c, w] : atoms) {
      w *= p;
      if (c == anchor) {
        w += 1.0 - p;
        merged = true;
      }
    }
    if (!merged) atoms.push_back({anchor, 1.0 - p});
  };
  if (shape == Shape::EqualComponents) {
    // Totals are even; the mixture with (0,0) needs mean_total > 1.
    if (mean_total <= 1.0) return std::nullopt;
    mix_with({0, 0}, 0.0);
  } else if (shape == Shape::Free) {
    if (std::abs(mean_total - 1.0) < 1e-9) {
    } else if (mean_total > 1.0) {
      mix_with({0, 0}, 0.0);
    } else {
      mix_with({1, 1}, 2.0);
    }
  }
  std::vector<Atom> a1, a2;
  for (const auto& [c, w] : atoms) {
    a1.push_back({c, w});
    a2.push_back({{c.second, c.first}, w});
  }
  try {
    return build_model(FiniteLaw2D(a1), FiniteLaw2D(a2), uniform_unit_square());
  } catch (const Error&) {
    return std::nullopt;  // e.g. alpha or beta = 0
  }
}

bool all_atoms(const FiniteLaw2D& law, auto pred) {
  for (const auto& a : law.atoms())
    if (a.probability > 0 && !pred(a.point)) return false;
  return true;
}

}  // namespace

TEST(ClassifyRegime, DegeneracyCharacterisationProperty) {
  std::mt19937_64 gen(20240917);
  int built[3] = {0, 0, 0};
  for (int trial = 0; trial < 3000; ++trial) {
    const Shape shape = static_cast<Shape>(trial % 3);
    const auto spec = random_model(gen, shape);
    if (!spec) continue;
    ++built[trial % 3];
    auto unit = [](Count2 c) { return c.first + c.second == 1; };
    auto equal = [](Count2 c) { return c.first == c.second; };
    const bool total_zero = spec->total_offspring_variance() <= ModelSpec::kZeroTolerance;
    const bool contrast_zero = spec->contrast_offspring_variance() <= ModelSpec::kZeroTolerance;
    EXPECT_EQ(total_zero, all_atoms(spec->offspring1(), unit) && all_atoms(spec->offspring2(), unit));
    EXPECT_EQ(contrast_zero, std::abs(spec->alpha() - 0.5) < 1e-10 &&
                                 all_atoms(spec->offspring1(), equal) &&
                                 all_atoms(spec->offspring2(), equal));
    EXPECT_FALSE(total_zero && contrast_zero);
    const Regime r = classify_regime(*spec);
    EXPECT_EQ(r == Regime::TotalDegenerate, total_zero);
    EXPECT_EQ(is_diff_degenerate(r), contrast_zero);
  }
  for (int s = 0; s < 3; ++s) EXPECT_GT(built[s], 50) << "shape " << s;
}
