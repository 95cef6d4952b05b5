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

#include "simreg/registration.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "simreg/bfgs.hpp"

namespace simreg {

namespace {

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

/// Bijection between the open parameter box and R^2: logit over the theta
/// range, logit over log(lambda). Keeps BFGS iterates inside the box without
/// touching interior minimizers.
struct Reparam {
  explicit Reparam(const ParamBox& box)
      : theta_lo(box.theta_lo()),
        theta_range(box.theta_hi() - box.theta_lo()),
        ln_lo(std::log(box.lambda_min)),
        ln_range(std::log(box.lambda_max) - std::log(box.lambda_min)) {}

  TransformParams to_alpha(const std::vector<double>& z) const {
    const double p = stable_sigmoid(z[0]);
    const double q = stable_sigmoid(z[1]);
    return {theta_lo + theta_range * p, std::exp(ln_lo + ln_range * q)};
  }

  std::vector<double> to_z(const TransformParams& a) const {
    const double margin = 1e-3;
    double p = (a.theta - theta_lo) / theta_range;
    double q = (std::log(std::max(a.lambda, 1e-300)) - ln_lo) / ln_range;
    p = std::min(std::max(p, margin), 1.0 - margin);
    q = std::min(std::max(q, margin), 1.0 - margin);
    return {logit(p), logit(q)};
  }

  std::array<double, 2> unit_coords(const std::vector<double>& z) const {
    return {stable_sigmoid(z[0]), stable_sigmoid(z[1])};
  }

  double theta_lo, theta_range, ln_lo, ln_range;
};

struct StartOutcome {
  bool ok = false;
  bool boundary = false;
  bool converged = false;
  TransformParams alpha;
  double contrast = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string error;
};

StartOutcome run_start(const RegistrationProblem& p, const Reparam& map,
                       const TransformParams& init) {
  StartOutcome out;
  try {
    const ObjectiveFn objective = [&](const std::vector<double>& z) {
      return contrast(map.to_alpha(z), p);
    };
    BfgsOptions bo;
    bo.grad_tol = 1e-9;
    bo.step_tol = 1e-12;
    bo.max_iterations = p.options.max_iterations;
    bo.fd_step_rel = p.options.fd_step_rel;
    bo.max_step = 8.0;  // in logit units; keeps iterates off the flat tails
    const BfgsResult r = minimize_bfgs(objective, map.to_z(init), bo);

    out.alpha = map.to_alpha(r.x);
    out.contrast = r.fx;
    out.iterations = r.iterations;
    const auto pq = map.unit_coords(r.x);
    out.boundary = pq[0] < 1e-3 || pq[0] > 1.0 - 1e-3 || pq[1] < 1e-3 ||
                   pq[1] > 1.0 - 1e-3;
    out.converged = r.converged;
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

bool lex_less(const TransformParams& a, const TransformParams& b) {
  if (a.theta != b.theta) return a.theta < b.theta;
  return a.lambda < b.lambda;
}

/// The model value is linear in lambda, so the contrast minimizes over
/// lambda in closed form at fixed theta. Scanning the profiled contrast
/// over theta locates the global basin even where the landscape folds.
std::vector<TransformParams> profiled_starts(const RegistrationProblem& p,
                                             int grid, int keep) {
  const auto& x = p.target.grid.points();
  const auto& y = p.target.values;
  std::vector<std::pair<double, TransformParams>> scored;
  for (int k = 0; k < grid; ++k) {
    const double theta =
        p.box.theta_lo() +
        (p.box.theta_hi() - p.box.theta_lo()) * (k + 0.5) / grid;
    try {
      const SimilarityTransform t({theta, 1.0}, p.reference);
      double yw = 0.0, ww = 0.0;
      std::vector<double> w(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        w[i] = t.ordinate(t.preimage(x[i], p.options.preimage));
        yw += y[i] * w[i];
        ww += w[i] * w[i];
      }
      if (!(ww > 0.0)) continue;
      double lambda = yw / ww;
      lambda = std::min(std::max(lambda, p.box.lambda_min), p.box.lambda_max);
      double sum = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - lambda * w[i];
        sum += r * r;
      }
      scored.push_back({sum / x.size(), {theta, lambda}});
    } catch (const Error&) {
      // skip thetas where the preimage is unsolvable
    }
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<TransformParams> starts;
  for (int i = 0; i < keep && i < static_cast<int>(scored.size()); ++i) {
    starts.push_back(scored[i].second);
  }
  return starts;
}

}  // namespace

double contrast(const TransformParams& alpha, const RegistrationProblem& p) {
  if (!p.box.contains(alpha, 1e-12)) {
    throw ConfigError("contrast: alpha outside the parameter box");
  }
  const SimilarityTransform t(alpha, p.reference);
  const auto& x = p.target.grid.points();
  const auto& y = p.target.values;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double u;
    try {
      u = t.preimage(x[i], p.options.preimage);
    } catch (const Error& e) {
      throw NumericalError("contrast: preimage failed at X_i=" +
                           std::to_string(x[i]) + ": " + e.what());
    }
    const double r = y[i] - t.ordinate(u);
    sum += r * r;
  }
  return sum / static_cast<double>(x.size());
}

std::array<double, 2> contrast_gradient(const TransformParams& alpha,
                                        const RegistrationProblem& p) {
  const SimilarityTransform t(alpha, p.reference);
  const auto& x = p.target.grid.points();
  const auto& y = p.target.values;
  double g0 = 0.0, g1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = t.ordinate(t.preimage(x[i], p.options.preimage));
    const auto gm =
        grad_transformed_value(alpha, x[i], p.reference, p.options.preimage);
    const double r = y[i] - m;
    g0 -= 2.0 * r * gm[0];
    g1 -= 2.0 * r * gm[1];
  }
  const double n = static_cast<double>(x.size());
  return {g0 / n, g1 / n};
}

RegistrationResult estimate(const RegistrationProblem& p) {
  p.box.validate();
  const Reparam map(p.box);

  std::vector<StartOutcome> outcomes;
  outcomes.push_back(run_start(p, map, p.box.clamp(p.options.init)));
  int starts_used = 1;

  const auto interior_success = [](const StartOutcome& o) {
    return o.ok && o.converged && !o.boundary;
  };

  // The lambda-profiled theta scan yields feasible points, so its minimum
  // gates converged runs: landing well above it means a local minimum, a
  // substantive failure even when the iteration formally converged.
  std::vector<TransformParams> profile;
  if (p.options.multistart) profile = profiled_starts(p, 64, 2);
  const auto profile_gate = [&](const StartOutcome& o) {
    if (profile.empty()) return true;
    const double m_p = contrast(profile.front(), p);
    return o.contrast <= 1.2 * m_p + 1e-12;
  };

  const bool need_multistart =
      p.options.multistart && (!interior_success(outcomes.front()) ||
                               !profile_gate(outcomes.front()));
  if (need_multistart) {
    // Deterministic 3x3 grid at the quartiles of the reparameterized box,
    // then the best profiled points.
    for (double pu : {0.25, 0.5, 0.75}) {
      for (double qu : {0.25, 0.5, 0.75}) {
        const TransformParams start = map.to_alpha({logit(pu), logit(qu)});
        outcomes.push_back(run_start(p, map, start));
        ++starts_used;
      }
    }
    for (const auto& start : profile) {
      outcomes.push_back(run_start(p, map, start));
      ++starts_used;
    }
  }

  const StartOutcome* best = nullptr;
  for (const auto& o : outcomes) {
    if (!o.ok || !o.converged) continue;
    if (best == nullptr || o.contrast < best->contrast ||
        (o.contrast == best->contrast && lex_less(o.alpha, best->alpha))) {
      best = &o;
    }
  }
  if (best == nullptr) {
    // Fall back to the best completed run even without formal convergence.
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      if (best == nullptr || o.contrast < best->contrast) best = &o;
    }
  }
  if (best == nullptr) {
    std::string detail;
    for (const auto& o : outcomes) {
      if (!o.error.empty()) detail += "\n  " + o.error;
    }
    throw NumericalError("estimate: all starts failed" + detail);
  }

  RegistrationResult result;
  result.alpha_hat = best->alpha;
  result.contrast_value = best->contrast;
  result.converged = best->converged;
  result.iterations = best->iterations;
  result.boundary = best->boundary;
  result.starts_used = starts_used;
  result.mode = p.mode;
  result.sigma2_hat = best->contrast;  // residual_variance(alpha_hat)

  const SimilarityTransform t(result.alpha_hat, p.reference);
  const auto a2 = t.check_a2();
  result.a2_ok = a2.ok;
  result.a2_min_rel = a2.min_ordinate / a2.scale;
  result.monotone_margin = t.monotone_margin();
  result.interp_gap = max_spacing(p.target.grid);
  result.high_interp_gap =
      p.mode == ReferenceMode::kInterpolated && result.interp_gap > 0.1;

  try {
    result.gamma_hat =
        asymptotic_covariance(p, result.alpha_hat, result.sigma2_hat);
  } catch (const NumericalError&) {
    result.gamma_singular = true;
    result.gamma_hat = Mat2::zero();
  }
  return result;
}

RegistrationResult estimate_interpolated(const SampledCurve& target,
                                         const SampledCurve& reference_samples,
                                         const ParamBox& box,
                                         const SolverOptions& options) {
  const auto& gt = target.grid.points();
  const auto& gr = reference_samples.grid.points();
  if (gt.size() != gr.size() ||
      !std::equal(gt.begin(), gt.end(), gr.begin())) {
    throw DataError(
        "estimate_interpolated: reference grid differs from target grid");
  }
  RegistrationProblem p{target, linear_interpolate(reference_samples), box,
                        options, ReferenceMode::kInterpolated};
  return estimate(p);
}

double residual_variance(const RegistrationProblem& p,
                         const TransformParams& alpha_hat) {
  return contrast(alpha_hat, p);
}

Mat2 asymptotic_covariance(const RegistrationProblem& p,
                           const TransformParams& alpha_hat,
                           double sigma2_hat) {
  const auto& x = p.target.grid.points();
  Mat2 v = Mat2::zero();
  for (double xi : x) {
    const auto g =
        grad_transformed_value(alpha_hat, xi, p.reference, p.options.preimage);
    v += Mat2::outer(g);
  }
  v = v * (2.0 / static_cast<double>(x.size()));
  if (sigma2_hat == 0.0) return Mat2::zero();
  if (v.sym_condition() > 1e12) {
    throw NumericalError(
        "asymptotic_covariance: near-singular information matrix "
        "(degenerate design)");
  }
  Mat2 gamma = v.inverse() * (2.0 * sigma2_hat);
  const double off = 0.5 * (gamma.b + gamma.c);
  gamma.b = off;
  gamma.c = off;
  return gamma;
}

}  // namespace simreg
