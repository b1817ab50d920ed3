#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace gwcls {

/// Population state: counts of type 1 and type 2 individuals.
struct Count2 {
  std::int64_t first = 0;
  std::int64_t second = 0;

  friend bool operator==(const Count2&, const Count2&) = default;
  friend auto operator<=>(const Count2&, const Count2&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double a, double b) : x(a), y(b) {}
  constexpr explicit Vec2(Count2 c)
      : x(static_cast<double>(c.first)), y(static_cast<double>(c.second)) {}

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Row-major 2x2 matrix.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  /// All-ones matrix.
  static constexpr Mat2 ones() { return {1.0, 1.0, 1.0, 1.0}; }
  /// [[1,-1],[-1,1]], the projector direction orthogonal to the all-ones vector.
  static constexpr Mat2 contrast() { return {1.0, -1.0, -1.0, 1.0}; }

  constexpr Mat2& operator+=(const Mat2& o) {
    a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
    return *this;
  }
  friend constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
  }
  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;

  constexpr double determinant() const { return a11 * a22 - a12 * a21; }
};

inline constexpr Vec2 kOnes{1.0, 1.0};
/// The contrast direction (1, -1).
inline constexpr Vec2 kContrast{1.0, -1.0};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Quadratic form <M v, v>.
constexpr double quad_form(const Mat2& m, Vec2 v) { return dot(m * v, v); }

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
  return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12),
                   std::abs(a.a21 - b.a21), std::abs(a.a22 - b.a22)});
}

inline double max_abs_diff(Vec2 a, Vec2 b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

/// Third Kronecker power E[v (x) v (x) v]; entry (i,j,l) lives at 4i + 2j + l.
using Kron3 = std::array<double, 8>;

inline Kron3 kron3(Vec2 v) {
  const std::array<double, 2> c{v.x, v.y};
  Kron3 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) out[4 * i + 2 * j + l] = c[i] * c[j] * c[l];
  return out;
}

}  // namespace gwcls
