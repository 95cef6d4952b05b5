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

#include "simreg/bfgs.hpp"

#include <algorithm>
#include <cmath>

namespace simreg {

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> finite_difference_gradient(const ObjectiveFn& f,
                                               const std::vector<double>& x,
                                               double fd_step_rel) {
  std::vector<double> g(x.size());
  std::vector<double> p = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = fd_step_rel * std::max(1.0, std::abs(x[i]));
    p[i] = x[i] + h;
    const double fp = f(p);
    p[i] = x[i] - h;
    const double fm = f(p);
    p[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

BfgsResult minimize_bfgs(const ObjectiveFn& f, std::vector<double> x0,
                         const BfgsOptions& options, const GradientFn& grad) {
  const std::size_t n = x0.size();
  auto eval_grad = [&](const std::vector<double>& x) {
    if (grad) return grad(x);
    return finite_difference_gradient(f, x, options.fd_step_rel);
  };

  BfgsResult result;
  std::vector<double> x = std::move(x0);
  double fx = f(x);
  result.evaluations = 1;
  std::vector<double> gx = eval_grad(x);

  // Inverse Hessian estimate, dense row-major.
  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

  const double c1 = 1e-4;
  std::vector<double> p(n), xn(n), gn(n), s(n), y(n), Hy(n);

  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it;
    if (inf_norm(gx) <= options.grad_tol) {
      result.converged = true;
      break;
    }

    // p = -H g, reset to steepest descent when not a descent direction.
    for (std::size_t i = 0; i < n; ++i) {
      double s_i = 0.0;
      for (std::size_t j = 0; j < n; ++j) s_i += H[i * n + j] * gx[j];
      p[i] = -s_i;
    }
    double slope = dot(gx, p);
    if (!(slope < 0.0)) {
      std::fill(H.begin(), H.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
      for (std::size_t i = 0; i < n; ++i) p[i] = -gx[i];
      slope = dot(gx, p);
      if (!(slope < 0.0)) {
        result.converged = true;  // zero gradient
        break;
      }
    }

    // Saturating reparameterizations need bounded steps: a huge jump into a
    // flat tail can zero the mapped gradient and fake convergence.
    if (options.max_step > 0.0) {
      const double pn = inf_norm(p);
      if (pn > options.max_step) {
        const double shrink = options.max_step / pn;
        for (auto& v : p) v *= shrink;
        slope *= shrink;
      }
    }

    double step = 1.0;
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < options.max_linesearch; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * p[i];
      fn = f(xn);
      ++result.evaluations;
      if (std::isfinite(fn) && fn <= fx + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.line_search_failed = true;
      break;
    }

    for (std::size_t i = 0; i < n; ++i) s[i] = xn[i] - x[i];
    gn = eval_grad(xn);
    for (std::size_t i = 0; i < n; ++i) y[i] = gn[i] - gx[i];

    const double step_norm = inf_norm(s);
    x = xn;
    fx = fn;
    gx = gn;

    if (step_norm <= options.step_tol) {
      result.converged = true;
      break;
    }

    const double ys = dot(y, s);
    if (ys > 1e-12 * inf_norm(y) * inf_norm(s) && ys > 0.0) {
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      const double rho = 1.0 / ys;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * y[j];
        Hy[i] = acc;
      }
      const double yHy = dot(y, Hy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += -rho * (Hy[i] * s[j] + s[i] * Hy[j]) +
                          rho * rho * yHy * s[i] * s[j] + rho * s[i] * s[j];
        }
      }
    } else {
      std::fill(H.begin(), H.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
    }
  }

  result.x = std::move(x);
  result.fx = fx;
  result.grad = std::move(gx);
  return result;
}

}  // namespace simreg
