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
#include <string>
#include <vector>

#include "simreg/errors.hpp"

namespace simreg {

/// Relative tolerance for the boundary equalities (f(1)=0, f'(1)=0) of the
/// admissible class; exact equalities are unreachable in floating point.
inline constexpr double kAdmissibilityTol = 1e-8;

/// Sorted design points in [0, 1], the order statistics of one observation
/// grid. Exact duplicates are kept here and merged at interpolation time.
class DesignGrid {
 public:
  explicit DesignGrid(std::vector<double> points);

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

 private:
  std::vector<double> points_;
};

/// One observed curve: values[i] = f(X_(i)) on a shared design grid.
struct SampledCurve {
  SampledCurve(DesignGrid grid_in, std::vector<double> values_in);

  DesignGrid grid;
  std::vector<double> values;
};

enum class Provenance { kAnalytic, kInterpolated };

/// Evaluable curve function on [0, 1] with a derivative evaluator. The
/// admissibility constraints are checked externally (check_admissibility),
/// not enforced by this type.
struct AdmissibleFunction {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  Provenance provenance = Provenance::kAnalytic;

  double operator()(double x) const { return value(x); }
};

/// Wraps analytic value/derivative callables.
AdmissibleFunction analytic_function(std::function<double(double)> value,
                                     std::function<double(double)> deriv);

/// Wraps a value callable with a central finite-difference derivative.
AdmissibleFunction analytic_function(std::function<double(double)> value);

/// Piecewise-linear interpolant with strictly increasing knots, extended
/// constantly outside the knot range. Derivatives are left limits at knots
/// and zero in the extension zones.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

  double value(double x) const;
  double deriv(double x) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& knot_values() const { return values_; }
  double max_abs_slope() const;

 private:
  std::size_t segment(double x) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Linear interpolate of a sampled curve. Duplicate design points are merged
/// with averaged values before interpolation; fewer than two distinct points
/// is an error.
AdmissibleFunction linear_interpolate(const SampledCurve& curve);

/// Same, returning the underlying interpolant for direct knot access.
PiecewiseLinear linear_interpolant(const SampledCurve& curve);

struct ConstraintCheck {
  std::string name;
  double measured = 0.0;
  bool ok = false;
};

struct AdmissibilityReport {
  bool pass = false;
  std::vector<ConstraintCheck> constraints;
  double tolerance = kAdmissibilityTol;

  const ConstraintCheck& constraint(const std::string& name) const;
};

/// Checks the five admissibility constraints of the deformation class on a
/// uniform validation grid of `grid_size` points:
///   f(0) > 0, |f(1)| ~ 0, f' <= 0, f'(1) ~ 0, f'(0) > -cot(theta0).
/// Boundary equalities use `tol` relative to the curve scale max(1, |f(0)|).
AdmissibilityReport check_admissibility(const AdmissibleFunction& f,
                                        double theta0, int grid_size,
                                        double tol = kAdmissibilityTol);

/// Largest gap between consecutive order statistics. Boundary gaps against
/// 0 and 1 are excluded; only interior gaps X_(j+1)-X_(j) count.
double max_spacing(const DesignGrid& grid);

/// Tail bound N(1-eps)^(N-1) on the probability that the maximal spacing of
/// N uniform order statistics exceeds eps.
double spacing_tail_bound(int n, double epsilon);

struct SpacingReport {
  double max_spacing = 0.0;
  double epsilon = 0.0;
  double tail_bound = 0.0;
  int n = 0;
};

SpacingReport spacing_report(const DesignGrid& grid, double epsilon);

}  // namespace simreg
