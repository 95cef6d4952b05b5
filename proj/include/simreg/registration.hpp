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

#include <string>

#include "simreg/curve.hpp"
#include "simreg/mat2.hpp"
#include "simreg/transform.hpp"

namespace simreg {

struct SolverOptions {
  TransformParams init{0.0, 1.0};
  double grad_tol = 1e-8;    // contrast gradient, parameter units
  double step_tol = 1e-10;   // parameter step
  int max_iterations = 200;
  bool multistart = true;    // 3x3 coarse grid on boundary hits or failures
  double fd_step_rel = 1e-6;
  PreimageOptions preimage{1e-12, 1e-13, 3, MonotonePolicy::kAllow, 64};
};

enum class ReferenceMode { kExact, kInterpolated };

/// One curve to register against a reference within a parameter box.
struct RegistrationProblem {
  SampledCurve target;
  AdmissibleFunction reference;
  ParamBox box;
  SolverOptions options;
  ReferenceMode mode = ReferenceMode::kExact;
};

struct RegistrationResult {
  TransformParams alpha_hat;
  double contrast_value = 0.0;
  double sigma2_hat = 0.0;
  Mat2 gamma_hat;
  bool converged = false;
  int iterations = 0;
  ReferenceMode mode = ReferenceMode::kExact;

  // Diagnostics.
  bool boundary = false;          // minimizer pinned to the box boundary
  bool gamma_singular = false;    // covariance system was near singular
  bool a2_ok = true;              // A2 check at alpha_hat
  double a2_min_rel = 0.0;        // min rotated ordinate / scale at alpha_hat
  double monotone_margin = 0.0;   // min dT1/du at alpha_hat
  double interp_gap = 0.0;        // max_spacing of the reference grid
  bool high_interp_gap = false;
  int starts_used = 1;
  std::string curve_id;
};

/// Empirical contrast M_N(alpha): mean squared gap between the observed
/// values and the transformed reference evaluated at the design preimages.
double contrast(const TransformParams& alpha, const RegistrationProblem& p);

/// Gradient of the contrast assembled from per-point transformed-value
/// gradients: -(2/N) sum r_i grad m_i.
std::array<double, 2> contrast_gradient(const TransformParams& alpha,
                                        const RegistrationProblem& p);

/// Minimizes the contrast over the box: BFGS on a logit/log-logit
/// reparameterization so iterates never leave the parameter domain, starting
/// from (theta, lambda) = (0, 1), with a deterministic 3x3 multistart when
/// the first run fails or lands on the boundary.
RegistrationResult estimate(const RegistrationProblem& p);

/// Registration against a reference known only on the target's grid: builds
/// the linear interpolate and runs estimate in interpolated mode.
RegistrationResult estimate_interpolated(const SampledCurve& target,
                                         const SampledCurve& reference_samples,
                                         const ParamBox& box,
                                         const SolverOptions& options = {});

/// Mean squared residual at alpha_hat, the plug-in estimate of the noise
/// variance (denominator N).
double residual_variance(const RegistrationProblem& p,
                         const TransformParams& alpha_hat);

/// Plug-in asymptotic covariance of sqrt(N)(alpha_hat - alpha*):
/// V = (2/N) sum grad grad^T, Gamma = V^{-1} 2 sigma^2. Throws when the
/// empirical information matrix is near singular (condition > 1e12).
Mat2 asymptotic_covariance(const RegistrationProblem& p,
                           const TransformParams& alpha_hat,
                           double sigma2_hat);

}  // namespace simreg
