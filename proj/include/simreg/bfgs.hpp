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

#include <functional>
#include <vector>

namespace simreg {

struct BfgsOptions {
  double grad_tol = 1e-9;       // infinity norm of the gradient
  double step_tol = 1e-12;      // infinity norm of an accepted step
  int max_iterations = 200;
  int max_linesearch = 50;
  double fd_step_rel = 1e-6;    // finite-difference step, relative floor 1
  double max_step = 0.0;        // cap on |step|_inf per iteration; 0 = none
};

struct BfgsResult {
  std::vector<double> x;
  double fx = 0.0;
  std::vector<double> grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

using ObjectiveFn = std::function<double(const std::vector<double>&)>;
using GradientFn =
    std::function<std::vector<double>(const std::vector<double>&)>;

/// Central finite-difference gradient with step fd_step_rel * max(1, |x_i|).
std::vector<double> finite_difference_gradient(const ObjectiveFn& f,
                                               const std::vector<double>& x,
                                               double fd_step_rel = 1e-6);

/// Quasi-Newton minimization with the inverse-Hessian BFGS update and an
/// Armijo backtracking line search. The gradient defaults to central finite
/// differences when no gradient callback is supplied.
BfgsResult minimize_bfgs(const ObjectiveFn& f, std::vector<double> x0,
                         const BfgsOptions& options = {},
                         const GradientFn& grad = nullptr);

}  // namespace simreg
