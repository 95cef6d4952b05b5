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

#include "simreg/curve.hpp"

namespace simreg {

/// One curve's deformation parameters: rotation angle and vertical scale.
struct TransformParams {
  double theta = 0.0;
  double lambda = 1.0;
};

/// Parameter domain [-theta0, theta1] x [lambda_min, lambda_max].
struct ParamBox {
  double theta0 = 1.0471975511965976;    // pi/3
  double theta1 = 0.10471975511965977;   // pi/30
  double lambda_min = 0.05;
  double lambda_max = 20.0;

  void validate() const;
  bool contains(const TransformParams& p, double tol = 0.0) const;
  TransformParams clamp(const TransformParams& p) const;

  double theta_lo() const { return -theta0; }
  double theta_hi() const { return theta1; }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class MonotonePolicy {
  kRequire,  // error when the design map is not strictly increasing
  kAllow,    // accept any bracketing configuration (deterministic root pick)
};

struct PreimageOptions {
  double residual_tol = 1e-12;  // |T1(u) - x| target
  double bisect_width = 1e-13;
  int max_newton = 3;
  MonotonePolicy policy = MonotonePolicy::kRequire;
  int monotone_grid = 64;  // resolution of the derivative sign check
};

/// Plane similarity H_lambda . S_theta . R_theta applied to the graph of an
/// admissible function, in the closed form
///   u = ((x-1) cos t - f(x) sin t) / (cos t + f(0) sin t) + 1
///   v = lambda ((x-1) sin t + f(x) cos t).
/// Trigonometry and f(0) are cached per (alpha, f) pair so the per-point
/// operations stay cheap in the estimation loop.
class SimilarityTransform {
 public:
  SimilarityTransform(const TransformParams& alpha, const AdmissibleFunction& f);

  const TransformParams& params() const { return alpha_; }

  /// First coordinate T1 of the transformed curve point at design x.
  double abscissa(double x) const;
  /// Second coordinate T2 (the deformed ordinate) at design x.
  double ordinate(double x) const;
  /// d/dx of the first coordinate: (cos t - f'(x) sin t) / denom.
  double abscissa_deriv(double x) const;
  /// Rotated ordinate before vertical scaling: (x-1) sin t + f(x) cos t.
  double rotated_ordinate(double x) const;

  Point2 apply(double x) const { return {abscissa(x), ordinate(x)}; }

  /// Solves T1(u, f(u)) = x for u in [0, 1].
  double preimage(double x, const PreimageOptions& opts = {}) const;

  /// Minimum over a uniform grid of dT1/du; positive means the design map
  /// is strictly increasing at the grid resolution.
  double monotone_margin(int grid_size = 256) const;

  /// Minimum rotated ordinate over a uniform grid (A2 diagnostic) together
  /// with the location of the minimum and the curve scale.
  struct A2Report {
    double min_ordinate = 0.0;
    double at_x = 0.0;
    double scale = 1.0;  // max rotated ordinate, floor 1
    bool ok = true;
  };
  A2Report check_a2(int grid_size = 256, double rel_tol = kA2RelTol) const;

  double denom() const { return denom_; }

  /// Relative tolerance on negative rotated ordinates. Any admissible
  /// function dips slightly below zero near x=1 once theta > 0, so the check
  /// only rejects violations that are large against the curve scale.
  static constexpr double kA2RelTol = 1e-2;

 private:
  TransformParams alpha_;
  AdmissibleFunction f_;
  double sin_t_ = 0.0;
  double cos_t_ = 1.0;
  double f0_ = 0.0;
  double denom_ = 1.0;
};

/// T_alpha applied to (x, f(x)). Errors when the rotated ordinate at x is
/// negative beyond the relative A2 tolerance.
Point2 transform_point(const TransformParams& alpha, double x,
                       const AdmissibleFunction& f);

/// Design preimage x(alpha): the u in [0,1] with T1(u, g(u)) = x.
double solve_design_preimage(const TransformParams& alpha, double x,
                             const AdmissibleFunction& g,
                             const PreimageOptions& opts = {});

/// T2 evaluated at the design preimage: the deformed curve as a function of
/// the observed abscissa.
double transformed_value(const TransformParams& alpha, double x,
                         const AdmissibleFunction& g,
                         const PreimageOptions& opts = {});

/// Central finite-difference gradient (d/dtheta, d/dlambda) of
/// transformed_value, step 1e-6 * max(1, |parameter|).
std::array<double, 2> grad_transformed_value(const TransformParams& alpha,
                                             double x,
                                             const AdmissibleFunction& g,
                                             const PreimageOptions& opts = {});

/// Inverse of the plane similarity applied to a transformed point; does not
/// require solving the preimage equation.
Point2 inverse_transform_point(const TransformParams& alpha, const Point2& uv,
                               const AdmissibleFunction& f);

}  // namespace simreg
