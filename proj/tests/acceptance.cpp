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

// Acceptance suite: one check per shipped criterion, each printing a single
// PASS/FAIL line with its measurements and runtime.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "simreg/montecarlo.hpp"
#include "simreg/pipeline.hpp"
#include "simreg/rng.hpp"

using namespace simreg;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Outcome {
  bool pass = false;
  std::string detail;
  double limit_seconds = 0.0;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

// --- 1: identity and fixed point -------------------------------------------

Outcome criterion_identity(int) {
  Outcome out;
  out.limit_seconds = 1.0;
  SplitRng rng(1001);
  double worst_identity = 0.0;
  for (int i = 0; i < 10000; ++i) {
    // Random admissible curve: scaled cosine arch with varying sharpness.
    const double c = rng.uniform(0.5, 5.0);
    const double p = rng.uniform(1.0, 2.0);
    const auto f = analytic_function(
        [c, p](double x) {
          return c * std::pow(0.5 * (1.0 + std::cos(kPi * x)), p);
        },
        [c, p](double x) {
          const double base = 0.5 * (1.0 + std::cos(kPi * x));
          return base <= 0.0 ? 0.0
                             : c * p * std::pow(base, p - 1.0) *
                                   (-0.5 * kPi) * std::sin(kPi * x);
        });
    const double x = rng.uniform01();
    const Point2 pt = transform_point({0.0, 1.0}, x, f);
    worst_identity = std::max(worst_identity, std::abs(pt.x - x));
    worst_identity = std::max(worst_identity, std::abs(pt.y - f.value(x)));
  }

  const ParamBox box;
  const auto g = toy_reference();
  double worst_fixed = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const TransformParams alpha{rng.uniform(box.theta_lo(), box.theta_hi()),
                                rng.uniform(box.lambda_min, box.lambda_max)};
    const Point2 pt = transform_point(alpha, 1.0, g);
    worst_fixed = std::max(worst_fixed, std::abs(pt.x - 1.0));
    worst_fixed = std::max(worst_fixed, std::abs(pt.y));
  }
  out.pass = worst_identity <= 1e-12 && worst_fixed <= 1e-12;
  out.detail = "max identity err " + fmt(worst_identity) +
               ", max fixed-point err " + fmt(worst_fixed);
  return out;
}

// --- 2: noiseless recovery --------------------------------------------------

Outcome criterion_noiseless(int) {
  Outcome out;
  out.limit_seconds = 30.0;
  ToySpec spec;
  spec.n_points = 200;
  spec.n_curves = 25;
  spec.sigma = 0.0;
  spec.seed = 1002;
  spec.param_law = {spec.box.theta_lo(), spec.box.theta_hi(),
                    spec.box.lambda_min, spec.box.lambda_max};
  const ToyDataset data = generate_toy(spec);
  double worst = 0.0;
  int failures = 0;
  for (int j = 0; j < spec.n_curves; ++j) {
    RegistrationProblem p{data.curves[j], data.reference, spec.box,
                          SolverOptions{}, ReferenceMode::kExact};
    try {
      const RegistrationResult res = estimate(p);
      const double err =
          std::max(std::abs(res.alpha_hat.theta - data.true_params[j].theta),
                   std::abs(res.alpha_hat.lambda - data.true_params[j].lambda));
      worst = std::max(worst, err);
    } catch (const Error&) {
      ++failures;
    }
  }
  out.pass = failures == 0 && worst <= 1e-5;
  out.detail = "25 curves, max |alpha_hat - alpha*|_inf = " + fmt(worst) +
               (failures > 0 ? ", failures " + std::to_string(failures) : "");
  return out;
}

// --- 3: toy reproduction ----------------------------------------------------

Outcome criterion_toy(int) {
  Outcome out;
  out.limit_seconds = 60.0;
  ToySpec spec;  // the published regime: N=100, K=25, sigma^2=0.01
  spec.n_points = 100;
  spec.n_curves = 25;
  spec.sigma = 0.1;
  spec.seed = 1003;
  const ToyDataset data = generate_toy(spec);
  double mean_contrast = 0.0;
  int converged = 0;
  for (int j = 0; j < spec.n_curves; ++j) {
    RegistrationProblem p{data.curves[j], data.reference, spec.box,
                          SolverOptions{}, ReferenceMode::kExact};
    const RegistrationResult res = estimate(p);
    if (res.converged) ++converged;
    mean_contrast += res.contrast_value;
  }
  mean_contrast /= spec.n_curves;
  const double sigma2 = spec.sigma * spec.sigma;
  out.pass = converged == 25 && mean_contrast >= 0.5 * sigma2 &&
             mean_contrast <= 1.5 * sigma2;
  out.detail = std::to_string(converged) + "/25 converged, mean contrast " +
               fmt(mean_contrast) + " vs sigma^2 " + fmt(sigma2);
  return out;
}

// --- 4: CLT validation ------------------------------------------------------

Outcome criterion_clt(int threads) {
  Outcome out;
  out.limit_seconds = 600.0;
  const MonteCarloReport r =
      run_clt_check({-0.3, 2.5}, 2000, 0.1, 500, 1004, threads);
  const double skew = std::max(std::abs(r.skewness[0]), std::abs(r.skewness[1]));
  const double kurt = std::max(std::abs(r.excess_kurtosis[0]),
                               std::abs(r.excess_kurtosis[1]));
  out.pass = r.frobenius_rel_err <= 0.20 && skew <= 0.3 && kurt <= 0.5;
  out.detail = "frobenius rel err " + fmt(r.frobenius_rel_err) +
               ", max |skew| " + fmt(skew) + ", max |ex.kurt| " + fmt(kurt) +
               ", failures " + std::to_string(r.failures);
  return out;
}

// --- 5: consistency rate ----------------------------------------------------

Outcome criterion_rate(int threads) {
  Outcome out;
  out.limit_seconds = 600.0;
  ToySpec spec;
  spec.sigma = 0.1;
  spec.seed = 1005;
  const auto rows =
      run_consistency_sweep(spec, {-0.3, 2.5}, {100, 400, 1600}, 200, threads);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double rt = rows[i + 1].rmse_theta / rows[i].rmse_theta;
    const double rl = rows[i + 1].rmse_lambda / rows[i].rmse_lambda;
    ok = ok && rt >= 0.35 && rt <= 0.7 && rl >= 0.35 && rl <= 0.7;
    detail += "N" + std::to_string(rows[i].n) + "->N" +
              std::to_string(rows[i + 1].n) + ": theta " + fmt(rt) +
              ", lambda " + fmt(rl) + "; ";
  }
  out.pass = ok;
  out.detail = detail + "(target [0.35, 0.7])";
  return out;
}

// --- 6: interpolated estimator ---------------------------------------------

Outcome criterion_interp(int threads) {
  Outcome out;
  out.limit_seconds = 600.0;
  const auto rows = run_interp_gap_check({-0.3, 2.5}, {100, 400, 1600}, 0.05,
                                         100, 1006, threads);
  int inversions = 0;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].second >= rows[i - 1].second) ++inversions;
    detail += "N" + std::to_string(rows[i].first) + ": " +
              fmt(rows[i].second) + "; ";
  }
  out.pass = inversions <= 1;
  out.detail = "mean sqrt(N) gaps " + detail + "inversions " +
               std::to_string(inversions) + " (<= 1)";
  return out;
}

// --- 7: spacing bound -------------------------------------------------------

Outcome criterion_spacing(int) {
  Outcome out;
  out.limit_seconds = 60.0;
  const auto rows =
      run_spacing_check({100, 1000}, {0.02, 0.05, 0.1}, 10000, 1007);
  bool ok = true;
  int shown = 0;
  std::string detail;
  for (const auto& r : rows) {
    ok = ok && r.ok;
    if (!r.ok || shown < 3) {
      detail += "N" + std::to_string(r.n) + ",eps" + fmt(r.epsilon) + ": " +
                fmt(r.frequency) + "<=" + fmt(r.bound + r.slack) + "; ";
      ++shown;
    }
  }
  out.pass = ok;
  out.detail = detail + std::to_string(rows.size()) + " combinations checked";
  return out;
}

// --- 8: gradient correctness ------------------------------------------------

Outcome criterion_gradient(int) {
  Outcome out;
  out.limit_seconds = 60.0;
  ToySpec spec;
  spec.n_points = 100;
  spec.n_curves = 1;
  spec.sigma = 0.05;
  spec.seed = 1008;
  spec.param_law = {-0.3, -0.3, 2.0, 2.0};
  const ToyDataset data = generate_toy(spec);
  RegistrationProblem p{data.curves[0], data.reference, spec.box,
                        SolverOptions{}, ReferenceMode::kExact};
  SplitRng rng(1008);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    // Interior points: keep a margin from the box edges.
    const TransformParams alpha{rng.uniform(-0.9, 0.08),
                                rng.uniform(0.2, 15.0)};
    const auto assembled = contrast_gradient(alpha, p);
    const double ht = 1e-6 * std::max(1.0, std::abs(alpha.theta));
    const double hl = 1e-6 * std::max(1.0, std::abs(alpha.lambda));
    const double fd_t = (contrast({alpha.theta + ht, alpha.lambda}, p) -
                         contrast({alpha.theta - ht, alpha.lambda}, p)) /
                        (2.0 * ht);
    const double fd_l = (contrast({alpha.theta, alpha.lambda + hl}, p) -
                         contrast({alpha.theta, alpha.lambda - hl}, p)) /
                        (2.0 * hl);
    const double num = std::hypot(assembled[0] - fd_t, assembled[1] - fd_l);
    const double den = std::max(std::hypot(fd_t, fd_l), 1e-8);
    worst = std::max(worst, num / den);
  }
  out.pass = worst <= 1e-4;
  out.detail = "20 interior points, max relative error " + fmt(worst);
  return out;
}

// --- 9: OGA recovery --------------------------------------------------------

Outcome criterion_oga(int) {
  Outcome out;
  out.limit_seconds = 120.0;

  // Noiseless: exact support recovery with cv_size equal to the sparsity.
  SplitRng rng(1009);
  const int n0 = 200, p0 = 28;
  std::vector<std::vector<double>> x0(n0, std::vector<double>(p0));
  std::vector<double> y0(n0);
  for (int i = 0; i < n0; ++i) {
    for (auto& v : x0[i]) v = rng.uniform(-1.0, 1.0);
    y0[i] = 1.5 * x0[i][4] - 2.0 * x0[i][9] + 0.8 * x0[i][21];
  }
  const auto clean = oga_fit(x0, y0, 5, p0);
  std::vector<int> sel = clean.selected_features;
  std::sort(sel.begin(), sel.end());
  const bool clean_ok =
      clean.cv_size == 3 && sel == std::vector<int>{4, 9, 21};

  // Noisy study: 5 active of 28, n = 864, sigma = 0.1, 50 seeds.
  const int n = 864, p = 28;
  int recovered = 0;
  for (int seed = 0; seed < 50; ++seed) {
    SplitRng srng(2000 + seed);
    std::vector<int> active;
    while (static_cast<int>(active.size()) < 5) {
      const int j = static_cast<int>(srng.below(p));
      if (std::find(active.begin(), active.end(), j) == active.end()) {
        active.push_back(j);
      }
    }
    std::vector<double> beta(5);
    for (auto& b : beta) {
      b = srng.uniform(0.5, 2.0) * (srng.uniform01() < 0.5 ? -1.0 : 1.0);
    }
    std::vector<std::vector<double>> x(n, std::vector<double>(p));
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      for (auto& v : x[i]) v = srng.uniform(-1.0, 1.0);
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += beta[k] * x[i][active[k]];
      y[i] = s + 0.1 * srng.normal();
    }
    const auto model = oga_fit(x, y, 5, 12);
    bool all_in = true;
    for (int a : active) {
      if (std::find(model.selected_features.begin(),
                    model.selected_features.end(),
                    a) == model.selected_features.end()) {
        all_in = false;
      }
    }
    if (all_in) ++recovered;
  }
  out.pass = clean_ok && recovered >= 45;  // >= 90% of 50 runs
  out.detail = std::string("noiseless: cv_size ") +
               std::to_string(clean.cv_size) + (clean_ok ? " (exact)" : " (WRONG)") +
               ", noisy support recovery " + std::to_string(recovered) + "/50";
  return out;
}

// --- 10: end-to-end pipeline -------------------------------------------------

Outcome criterion_pipeline(int threads) {
  Outcome out;
  out.limit_seconds = 900.0;
  LoadsAnalogSpec spec;  // 1152 curves, 28 inputs, 45 stations, {3, 20}
  spec.seed = 1010;
  const LoadsAnalog analog = generate_loads_analog(spec);

  PipelineOptions options;
  options.threads = threads;
  options.seed = 20260810;
  const TrainedPipeline trained = train_pipeline(analog.set, options);

  // Table-2 style report keys exist with sane values.
  const bool schema_ok =
      trained.report.g1 >= 0.0 && trained.report.g10 <= 1.0 &&
      trained.report.g1 <= trained.report.g2 &&
      trained.report.g2 <= trained.report.g5 &&
      trained.report.g5 <= trained.report.g10 &&
      std::isfinite(trained.report.mean_error);

  // Feature round trip on every training curve.
  const ExtractionResult fx =
      extract_features(analog.set, trained.model, trained.train_indices, options);
  double worst_rt = 0.0;
  int rt_failures = 0;
  for (std::size_t i = 0; i < trained.train_indices.size(); ++i) {
    if (!fx.failures[i].empty()) {
      ++rt_failures;
      continue;
    }
    const auto rebuilt = reconstruct_curve(fx.features[i], trained.model,
                                           options.box, &fx.normalizations[i]);
    worst_rt = std::max(
        worst_rt,
        error_rate(rebuilt, analog.set.curves[trained.train_indices[i]]));
  }

  const double ratio =
      trained.report.mean_error / trained.report.oracle_mean_error;
  out.pass = schema_ok && rt_failures == 0 && worst_rt <= 0.02 &&
             ratio <= 3.0;
  out.detail = "round-trip max " + fmt(worst_rt) + " (<= 0.02), mean test err " +
               fmt(trained.report.mean_error) + ", oracle " +
               fmt(trained.report.oracle_mean_error) + ", ratio " + fmt(ratio) +
               " (<= 3), G(5%) " + fmt(trained.report.g5);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(int)> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  int threads = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      threads = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N] [--threads T]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "identity and fixed point", criterion_identity},
      {2, "noiseless recovery", criterion_noiseless},
      {3, "toy reproduction", criterion_toy},
      {4, "CLT validation", criterion_clt},
      {5, "consistency rate", criterion_rate},
      {6, "interpolated estimator", criterion_interp},
      {7, "spacing bound", criterion_spacing},
      {8, "gradient correctness", criterion_gradient},
      {9, "OGA recovery", criterion_oga},
      {10, "pipeline end to end", criterion_pipeline},
  };

  bool all_pass = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run(threads);
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
      outcome.limit_seconds = 1e9;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_time = seconds <= outcome.limit_seconds;
    const bool pass = outcome.pass && in_time;
    all_pass = all_pass && pass;
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << " ("
              << c.name << "): " << outcome.detail << " [" << fmt(seconds)
              << "s / limit " << fmt(outcome.limit_seconds) << "s]"
              << std::endl;
  }
  return all_pass ? 0 : 1;
}
