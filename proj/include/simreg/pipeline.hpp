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
#include <string>
#include <vector>

#include "simreg/registration.hpp"

namespace simreg {

/// A family of curves observed on a common station axis with configuration
/// inputs, sectioned at discontinuity breakpoints.
struct SectionedCurveSet {
  std::vector<double> station_axis;            // increasing station positions
  std::vector<int> breakpoints;                // station indices, left-closed
  std::vector<std::vector<double>> curves;     // n_curves x n_stations
  std::vector<std::vector<double>> inputs;     // n_curves x n_inputs
  std::vector<std::string> curve_ids;          // optional, sized n_curves
  std::vector<std::string> input_names;        // optional, sized n_inputs

  std::size_t n_curves() const { return curves.size(); }
  std::size_t n_stations() const { return station_axis.size(); }
  void validate() const;
};

/// One section: the station indices it owns and its sub-axis rescaled to
/// [0, 1]. The breakpoint station belongs to the left section.
struct Section {
  std::vector<int> stations;
  std::vector<double> axis01;
};

std::vector<Section> split_sections(const SectionedCurveSet& set);

/// Affine normalization of one curve section to [0,1]x[0,1], with the
/// orientation flip needed to end at the minimum (f(1) = 0).
struct SectionNormalization {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  bool flipped = false;
};

std::pair<SampledCurve, SectionNormalization> normalize_section(
    const std::vector<double>& axis01, const std::vector<double>& values);

/// Per-section registration reference: projected mean of normalized curves.
struct SectionReference {
  SampledCurve samples;
  AdmissibleFunction interpolant;
  bool projection_changed = false;  // isotonic projection moved the mean
  bool flipped_default = false;     // majority orientation of the curves
};

/// Registration context shared across curves: the section layout and one
/// reference per section.
struct SectionModel {
  std::vector<Section> sections;
  std::vector<SectionReference> references;
};

/// Builds references as the pointwise mean of the normalized curves listed
/// in `reference_curves`, restored to admissibility by an isotonic
/// decreasing projection and right-endpoint pinning.
SectionModel build_section_model(const SectionedCurveSet& set,
                                 const std::vector<int>& reference_curves);

/// Same layout with caller-provided analytic references (used when the true
/// generating reference is known).
SectionModel section_model_with_references(
    const SectionedCurveSet& set,
    const std::vector<AdmissibleFunction>& references);

/// Feature layout per curve: theta_1..S, lambda_1..S, min_1..S, max_1..S.
std::vector<std::string> feature_names(std::size_t n_sections);

struct PipelineOptions {
  ParamBox box{0.39269908169872414, 0.39269908169872414, 0.05, 20.0};  // pi/8
  SolverOptions solver;
  int cv_folds = 5;
  int max_model_size = 0;  // 0 -> min(n_inputs, 20)
  double train_fraction = 0.75;
  int threads = 0;
  std::uint64_t seed = 0;
};

struct ExtractionResult {
  std::vector<std::vector<double>> features;  // n_curves x 4*n_sections
  std::vector<std::vector<SectionNormalization>> normalizations;
  std::vector<std::string> failures;          // empty string = curve ok
  std::vector<std::vector<RegistrationResult>> registrations;
};

/// Registers every listed curve section against the model references and
/// assembles the deformation features. Failures are recorded per curve, not
/// dropped.
ExtractionResult extract_features(const SectionedCurveSet& set,
                                  const SectionModel& model,
                                  const std::vector<int>& curve_indices,
                                  const PipelineOptions& options);

/// Rebuilds a full-station curve from one feature row. Out-of-box (theta,
/// lambda) entries are clamped. Per-curve flip flags are used when given,
/// otherwise each section's default orientation.
std::vector<double> reconstruct_curve(
    const std::vector<double>& feature_row, const SectionModel& model,
    const ParamBox& box,
    const std::vector<SectionNormalization>* normalizations = nullptr);

/// Relative L2 prediction error over the full station axis.
double error_rate(const std::vector<double>& predicted,
                  const std::vector<double>& actual);

/// Empirical CDF of the error list at the given thresholds.
std::vector<double> empirical_cdf(const std::vector<double>& errors,
                                  const std::vector<double>& alphas);

/// Sparse linear model from orthogonal greedy selection with least-squares
/// refit; model size picked by k-fold cross-validation.
struct SparseLinearModel {
  std::vector<int> selected_features;
  std::vector<double> coefficients;   // on standardized features
  double intercept = 0.0;
  std::vector<double> feature_mean;   // aligned with selected_features
  std::vector<double> feature_scale;
  int cv_size = 0;
  bool ridge_jitter = false;
  std::vector<double> cv_mse;         // by model size, diagnostics

  double predict(const std::vector<double>& x) const;
};

SparseLinearModel oga_fit(const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& target, int cv_folds = 5,
                          int max_size = 0);

/// Greedy path on the full data: selection order, coefficients and training
/// MSE per model size. Building block of oga_fit, exposed for testing.
struct OgaPath {
  std::vector<int> order;
  std::vector<std::vector<double>> coef_by_size;  // size k uses order[0..k)
  std::vector<double> mse_by_size;                // index 0 = intercept only
  std::vector<double> feature_mean;               // per input column
  std::vector<double> feature_scale;
  double target_mean = 0.0;
  bool ridge_jitter = false;
};

OgaPath oga_path(const std::vector<std::vector<double>>& inputs,
                 const std::vector<double>& target, int max_size);

struct PipelineReport {
  double g1 = 0.0, g2 = 0.0, g5 = 0.0, g10 = 0.0;
  double mean_error = 0.0;
  double oracle_mean_error = 0.0;  // error of refitting features directly
  std::vector<double> per_curve_errors;
  std::vector<int> test_indices;
  std::vector<std::vector<double>> predicted_curves;  // aligned with test set
  std::vector<double> cdf_grid;    // fine grid for plotting
  std::vector<double> cdf_values;
  int flagged_train_curves = 0;
  int flagged_test_curves = 0;
};

struct TrainedPipeline {
  SectionModel model;
  std::vector<SparseLinearModel> models;  // one per feature column
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  PipelineReport report;
};

/// Full application pattern: split/normalize, build references, register the
/// training curves, fit one sparse model per deformation output, and report
/// test error rates of curves rebuilt from predicted features.
TrainedPipeline train_pipeline(const SectionedCurveSet& set,
                               const PipelineOptions& options);

/// Synthetic analog of the aeronautic loads data: curve families generated
/// from per-section plane-similarity deformations whose parameters are
/// sparse linear maps of the configuration inputs.
struct LoadsAnalogSpec {
  int n_curves = 1152;
  int n_inputs = 28;
  int n_stations = 45;
  std::vector<int> breakpoints{3, 20};
  double sigma_rel = 1e-3;  // value noise relative to the section span
  int active_per_feature = 3;
  std::uint64_t seed = 0;
};

struct LoadsAnalog {
  SectionedCurveSet set;
  std::vector<std::vector<double>> true_features;
  std::vector<std::vector<int>> active_inputs;    // per feature column
  std::vector<std::vector<double>> true_weights;  // per feature column
};

LoadsAnalog generate_loads_analog(const LoadsAnalogSpec& spec);

}  // namespace simreg
