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

#include <cstdint>
#include <utility>
#include <vector>

#include "simreg/registration.hpp"

namespace simreg {

/// The toy reference g(x) = 2(cos(pi x) + 1).
AdmissibleFunction toy_reference();

/// How synthetic curve values are produced.
///  - kTransformedCurve: the deformed curve as a function of the observed
///    abscissa (model-consistent: the noiseless contrast vanishes at the
///    true parameters).
///  - kRotatedOrdinate: lambda ((x-1) sin t + g(x) cos t) read at the raw
///    abscissa, the generator used for the published toy figures.
enum class ToyValueModel { kTransformedCurve, kRotatedOrdinate };

struct ParamLaw {
  double theta_lo = -1.0471975511965976;  // -pi/3
  double theta_hi = 0.10471975511965977;  // pi/30
  double lambda_lo = 0.0;
  double lambda_hi = 15.0;
};

struct ToySpec {
  int n_points = 100;
  int n_curves = 25;
  double sigma = 0.1;
  ParamBox box;
  std::uint64_t seed = 0;
  ParamLaw param_law;
  bool shared_grid = true;  // one design draw for all curves of a dataset
  ToyValueModel value_model = ToyValueModel::kTransformedCurve;

  void validate() const;
};

struct ToyDataset {
  AdmissibleFunction reference;
  DesignGrid grid;
  SampledCurve reference_samples;  // reference on the shared grid
  std::vector<SampledCurve> curves;
  std::vector<TransformParams> true_params;
  std::vector<bool> clamped;  // parameter draw clamped into the box
};

/// Deterministic toy dataset: uniform iid design, per-curve parameters drawn
/// uniformly from param_law and clamped into the box, N(0, sigma^2) noise.
ToyDataset generate_toy(const ToySpec& spec);

/// Samples a function on a grid.
SampledCurve sample_on(const AdmissibleFunction& f, const DesignGrid& grid);

struct SweepPoint {
  int n = 0;
  double rmse_theta = 0.0;
  double rmse_lambda = 0.0;
  int failures = 0;
};

/// RMSE of the estimator at a fixed alpha* over independent replicates, one
/// row per design size; more than 5% estimation failures is a harness error.
std::vector<SweepPoint> run_consistency_sweep(const ToySpec& spec,
                                              const TransformParams& alpha_star,
                                              const std::vector<int>& n_list,
                                              int replicates, int threads = 0);

struct MonteCarloReport {
  int replicates = 0;
  int failures = 0;
  Mat2 empirical_cov;     // covariance of sqrt(N)(alpha_hat - alpha*)
  Mat2 gamma_reference;   // plug-in Gamma at alpha* with the true sigma^2
  double frobenius_rel_err = 0.0;
  std::array<double, 2> skewness{0.0, 0.0};
  std::array<double, 2> excess_kurtosis{0.0, 0.0};
  std::vector<std::pair<int, double>> rmse_by_n;  // filled by sweep harnesses
  std::vector<std::array<double, 2>> estimates;   // per-replicate alpha_hat
};

/// Theorem-3 check: empirical law of sqrt(N)(alpha_hat - alpha*) against the
/// plug-in normal limit.
MonteCarloReport run_clt_check(const TransformParams& alpha_star, int n,
                               double sigma, int replicates,
                               std::uint64_t seed, int threads = 0,
                               const ParamBox& box = {});

/// Theorem-4 check: mean sqrt(N) distance between the interpolated-reference
/// and exact-reference estimators, one row per design size.
std::vector<std::pair<int, double>> run_interp_gap_check(
    const TransformParams& alpha_star, const std::vector<int>& n_list,
    double sigma, int replicates, std::uint64_t seed, int threads = 0,
    const ParamBox& box = {});

struct SpacingRow {
  int n = 0;
  double epsilon = 0.0;
  double frequency = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // 3 binomial standard errors
  bool ok = false;
};

/// Lemma-1 check: empirical tail frequency of the maximal spacing against
/// N(1-eps)^(N-1) plus sampling slack.
std::vector<SpacingRow> run_spacing_check(const std::vector<int>& n_list,
                                          const std::vector<double>& epsilons,
                                          int replicates, std::uint64_t seed);

/// Plug-in asymptotic covariance at alpha* computed by midpoint quadrature
/// of V = 2 E[grad grad^T] over the uniform design.
Mat2 plugin_gamma(const TransformParams& alpha_star,
                  const AdmissibleFunction& reference, double sigma2,
                  int quadrature_points = 4096);

}  // namespace simreg
