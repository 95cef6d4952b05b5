// Copyright 2026 The simreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "simreg/errors.hpp"

namespace simreg {

/// Symmetric-friendly 2x2 matrix, enough linear algebra for the
/// two-parameter covariance bookkeeping.
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // [[a, b], [c, d]]

  static Mat2 zero() { return {}; }
  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 outer(const std::array<double, 2>& v) {
    return {v[0] * v[0], v[0] * v[1], v[1] * v[0], v[1] * v[1]};
  }

  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
  Mat2& operator+=(const Mat2& o) {
    a += o.a; b += o.b; c += o.c; d += o.d;
    return *this;
  }

  double det() const { return a * d - b * c; }
  double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }

  /// Condition number in the 2-norm for a symmetric matrix.
  double sym_condition() const {
    const double tr = a + d;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det()));
    const double l1 = std::abs(tr / 2.0 + disc);
    const double l2 = std::abs(tr / 2.0 - disc);
    const double hi = std::max(l1, l2);
    const double lo = std::min(l1, l2);
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
  }

  Mat2 inverse() const {
    const double dt = det();
    if (dt == 0.0 || !std::isfinite(1.0 / dt)) {
      throw NumericalError("Mat2: singular matrix has no inverse");
    }
    return {d / dt, -b / dt, -c / dt, a / dt};
  }

  bool symmetric(double tol = 1e-10) const { return std::abs(b - c) <= tol; }
};

inline double frobenius_distance(const Mat2& x, const Mat2& y) {
  const Mat2 diff{x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  return diff.frobenius();
}

}  // namespace simreg
