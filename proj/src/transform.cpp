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

#include "simreg/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace simreg {

namespace {
constexpr double kHalfPi = 1.5707963267948966;
}

void ParamBox::validate() const {
  // Note: theta0 > theta1 is allowed. The toy regime uses [-pi/3, pi/30],
  // an asymmetric box with the wider side on the negative angles.
  if (!(theta0 > 0.0) || !(theta0 < kHalfPi) || !(theta1 > 0.0) ||
      !(theta1 < kHalfPi)) {
    throw ConfigError("ParamBox: theta bounds must lie in (0, pi/2)");
  }
  if (!(lambda_min > 0.0) || !(lambda_min < lambda_max)) {
    throw ConfigError("ParamBox: need 0 < lambda_min < lambda_max");
  }
}

bool ParamBox::contains(const TransformParams& p, double tol) const {
  return p.theta >= -theta0 - tol && p.theta <= theta1 + tol &&
         p.lambda >= lambda_min - tol && p.lambda <= lambda_max + tol;
}

TransformParams ParamBox::clamp(const TransformParams& p) const {
  TransformParams q = p;
  q.theta = std::min(std::max(q.theta, -theta0), theta1);
  q.lambda = std::min(std::max(q.lambda, lambda_min), lambda_max);
  return q;
}

SimilarityTransform::SimilarityTransform(const TransformParams& alpha,
                                         const AdmissibleFunction& f)
    : alpha_(alpha), f_(f) {
  sin_t_ = std::sin(alpha.theta);
  cos_t_ = std::cos(alpha.theta);
  f0_ = f_.value(0.0);
  if (!std::isfinite(f0_)) {
    throw NumericalError("SimilarityTransform: non-finite f(0)");
  }
  denom_ = cos_t_ + f0_ * sin_t_;
  if (denom_ == 0.0) {
    throw ModelViolation(
        "SimilarityTransform: degenerate rescaling, cos(theta) + f(0) "
        "sin(theta) = 0 at theta=" +
        std::to_string(alpha.theta));
  }
}

double SimilarityTransform::abscissa(double x) const {
  return ((x - 1.0) * cos_t_ - f_.value(x) * sin_t_) / denom_ + 1.0;
}

double SimilarityTransform::rotated_ordinate(double x) const {
  return (x - 1.0) * sin_t_ + f_.value(x) * cos_t_;
}

double SimilarityTransform::ordinate(double x) const {
  return alpha_.lambda * rotated_ordinate(x);
}

double SimilarityTransform::abscissa_deriv(double x) const {
  return (cos_t_ - f_.deriv(x) * sin_t_) / denom_;
}

double SimilarityTransform::monotone_margin(int grid_size) const {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_size; ++k) {
    const double u = static_cast<double>(k) / (grid_size - 1);
    m = std::min(m, abscissa_deriv(u));
  }
  return m;
}

SimilarityTransform::A2Report SimilarityTransform::check_a2(
    int grid_size, double rel_tol) const {
  A2Report r;
  double max_w = 0.0;
  r.min_ordinate = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_size; ++k) {
    const double x = static_cast<double>(k) / (grid_size - 1);
    const double w = rotated_ordinate(x);
    if (!std::isfinite(w)) {
      throw NumericalError(
          "check_a2: non-finite rotated ordinate at x=" + std::to_string(x));
    }
    if (w < r.min_ordinate) {
      r.min_ordinate = w;
      r.at_x = x;
    }
    max_w = std::max(max_w, w);
  }
  r.scale = std::max(1.0, max_w);
  r.ok = r.min_ordinate >= -rel_tol * r.scale;
  return r;
}

double SimilarityTransform::preimage(double x,
                                     const PreimageOptions& opts) const {
  if (!std::isfinite(x)) {
    throw NumericalError("preimage: non-finite target abscissa");
  }
  if (x < -1e-9 || x > 1.0 + 1e-9) {
    throw DataError("preimage: x=" + std::to_string(x) +
                    " outside the image [0, 1] of the design map");
  }
  const double xt = std::min(std::max(x, 0.0), 1.0);

  if (opts.policy == MonotonePolicy::kRequire) {
    const int n = std::max(2, opts.monotone_grid);
    for (int k = 0; k < n; ++k) {
      const double u = static_cast<double>(k) / (n - 1);
      if (!(abscissa_deriv(u) > 0.0)) {
        throw ModelViolation(
            "preimage: design map not strictly increasing at u=" +
            std::to_string(u) + " for theta=" + std::to_string(alpha_.theta));
      }
    }
  }

  // T1(0)=0 and T1(1)=1 exactly, so [0,1] always brackets a root. The
  // endpoints are handled first so that x=1 maps to the fixed point u=1 even
  // when the design map folds.
  double lo = 0.0, hi = 1.0;
  double r_lo = -xt;  // T1(0) - x
  double r_hi = 1.0 - xt;
  if (std::abs(r_lo) <= opts.residual_tol) return 0.0;
  if (std::abs(r_hi) <= opts.residual_tol) return 1.0;
  if (r_lo > 0.0 || r_hi < 0.0) {
    throw NumericalError("preimage: endpoint bracket failed at x=" +
                         std::to_string(x));
  }

  while (hi - lo > opts.bisect_width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r_mid = abscissa(mid) - xt;
    if (r_mid == 0.0) return mid;
    if (!std::isfinite(r_mid)) {
      throw NumericalError("preimage: non-finite design map at u=" +
                           std::to_string(mid));
    }
    if (r_mid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  double u = 0.5 * (lo + hi);
  double res = abscissa(u) - xt;
  for (int k = 0; k < opts.max_newton && std::abs(res) > opts.residual_tol;
       ++k) {
    const double d = abscissa_deriv(u);
    if (!std::isfinite(d) || std::abs(d) < 1e-14) break;
    const double step = res / d;
    const double candidate = u - step;
    if (candidate < 0.0 || candidate > 1.0 || !std::isfinite(candidate)) break;
    const double cres = abscissa(candidate) - xt;
    if (std::abs(cres) >= std::abs(res)) break;
    u = candidate;
    res = cres;
  }
  return u;
}

Point2 transform_point(const TransformParams& alpha, double x,
                       const AdmissibleFunction& f) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DataError("transform_point: x=" + std::to_string(x) +
                    " outside [0, 1]");
  }
  SimilarityTransform t(alpha, f);
  const double w = t.rotated_ordinate(x);
  const double v = alpha.lambda * w;
  // A2: the rotated ordinate must be nonnegative up to the relative scale of
  // the curve; per-point violations beyond that indicate a transform outside
  // the model class.
  const double scale = std::max(1.0, std::abs(alpha.lambda * f.value(0.0)));
  if (v < -SimilarityTransform::kA2RelTol * scale) {
    throw ModelViolation("transform_point: A2 violated, rotated ordinate " +
                         std::to_string(w) + " at x=" + std::to_string(x) +
                         ", theta=" + std::to_string(alpha.theta));
  }
  return {t.abscissa(x), v};
}

double solve_design_preimage(const TransformParams& alpha, double x,
                             const AdmissibleFunction& g,
                             const PreimageOptions& opts) {
  return SimilarityTransform(alpha, g).preimage(x, opts);
}

double transformed_value(const TransformParams& alpha, double x,
                         const AdmissibleFunction& g,
                         const PreimageOptions& opts) {
  SimilarityTransform t(alpha, g);
  return t.ordinate(t.preimage(x, opts));
}

std::array<double, 2> grad_transformed_value(const TransformParams& alpha,
                                             double x,
                                             const AdmissibleFunction& g,
                                             const PreimageOptions& opts) {
  const double h_theta = 1e-6 * std::max(1.0, std::abs(alpha.theta));
  const double h_lambda = 1e-6 * std::max(1.0, std::abs(alpha.lambda));

  const auto eval = [&](double theta, double lambda) {
    return transformed_value({theta, lambda}, x, g, opts);
  };
  const double d_theta =
      (eval(alpha.theta + h_theta, alpha.lambda) -
       eval(alpha.theta - h_theta, alpha.lambda)) /
      (2.0 * h_theta);
  const double d_lambda =
      (eval(alpha.theta, alpha.lambda + h_lambda) -
       eval(alpha.theta, alpha.lambda - h_lambda)) /
      (2.0 * h_lambda);
  if (!std::isfinite(d_theta) || !std::isfinite(d_lambda)) {
    throw NumericalError("grad_transformed_value: non-finite difference");
  }
  return {d_theta, d_lambda};
}

Point2 inverse_transform_point(const TransformParams& alpha, const Point2& uv,
                               const AdmissibleFunction& f) {
  SimilarityTransform t(alpha, f);
  const double sin_t = std::sin(alpha.theta);
  const double cos_t = std::cos(alpha.theta);
  // Undo H_lambda, then S_theta (affine with a = 1 - denom), then R_theta.
  const double y2 = uv.y / alpha.lambda;
  const double a = 1.0 - t.denom();
  const double x2 = a + uv.x * t.denom();
  const double x = (x2 - 1.0) * cos_t + y2 * sin_t + 1.0;
  const double y = -(x2 - 1.0) * sin_t + y2 * cos_t;
  if (x < -1e-9 || x > 1.0 + 1e-9) {
    throw DataError(
        "inverse_transform_point: point maps outside the design space, x=" +
        std::to_string(x));
  }
  return {std::min(std::max(x, 0.0), 1.0), y};
}

}  // namespace simreg
