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

#include "simreg/curve.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace simreg {

DesignGrid::DesignGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw DataError("DesignGrid: need at least 2 design points, got " +
                    std::to_string(points_.size()));
  }
  std::sort(points_.begin(), points_.end());
  for (double x : points_) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw DataError("DesignGrid: design point " + std::to_string(x) +
                      " outside [0, 1]");
    }
  }
}

SampledCurve::SampledCurve(DesignGrid grid_in, std::vector<double> values_in)
    : grid(std::move(grid_in)), values(std::move(values_in)) {
  if (grid.size() != values.size()) {
    throw DataError("SampledCurve: grid has " + std::to_string(grid.size()) +
                    " points but " + std::to_string(values.size()) + " values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("SampledCurve: non-finite value");
  }
}

AdmissibleFunction analytic_function(std::function<double(double)> value,
                                     std::function<double(double)> deriv) {
  return AdmissibleFunction{std::move(value), std::move(deriv),
                            Provenance::kAnalytic};
}

AdmissibleFunction analytic_function(std::function<double(double)> value) {
  auto fd = [value](double x) {
    const double h = 1e-7;
    const double lo = std::max(0.0, x - h);
    const double hi = std::min(1.0, x + h);
    return (value(hi) - value(lo)) / (hi - lo);
  };
  return AdmissibleFunction{std::move(value), std::move(fd),
                            Provenance::kAnalytic};
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots,
                                 std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() < 2) {
    throw DataError("PiecewiseLinear: need at least 2 knots");
  }
  if (knots_.size() != values_.size()) {
    throw DataError("PiecewiseLinear: knot/value length mismatch");
  }
  slopes_.resize(knots_.size() - 1);
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const double dx = knots_[i + 1] - knots_[i];
    if (!(dx > 0.0)) {
      throw DataError("PiecewiseLinear: knots must be strictly increasing");
    }
    slopes_[i] = (values_[i + 1] - values_[i]) / dx;
  }
}

std::size_t PiecewiseLinear::segment(double x) const {
  // Index i with knots_[i] <= x < knots_[i+1], clamped to valid segments.
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  if (i >= slopes_.size()) i = slopes_.size() - 1;
  return i;
}

double PiecewiseLinear::value(double x) const {
  if (x <= knots_.front()) return values_.front();
  if (x >= knots_.back()) return values_.back();
  const std::size_t i = segment(x);
  return values_[i] + slopes_[i] * (x - knots_[i]);
}

double PiecewiseLinear::deriv(double x) const {
  // Left-limit convention at knots; constant extension has zero slope.
  if (x <= knots_.front() || x > knots_.back()) return 0.0;
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
  if (it != knots_.end() && *it == x && it != knots_.begin()) {
    return slopes_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }
  return slopes_[segment(x)];
}

double PiecewiseLinear::max_abs_slope() const {
  double m = 0.0;
  for (double s : slopes_) m = std::max(m, std::abs(s));
  return m;
}

namespace {

PiecewiseLinear build_interpolant(const SampledCurve& curve) {
  const auto& x = curve.grid.points();
  std::vector<double> knots;
  std::vector<double> vals;
  knots.reserve(x.size());
  vals.reserve(x.size());
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < x.size() && x[j] == x[i]) sum += curve.values[j++];
    knots.push_back(x[i]);
    vals.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  if (knots.size() < 2) {
    throw DataError(
        "linear_interpolate: fewer than 2 distinct design points");
  }
  return PiecewiseLinear(std::move(knots), std::move(vals));
}

}  // namespace

PiecewiseLinear linear_interpolant(const SampledCurve& curve) {
  return build_interpolant(curve);
}

AdmissibleFunction linear_interpolate(const SampledCurve& curve) {
  auto interp = std::make_shared<PiecewiseLinear>(build_interpolant(curve));
  AdmissibleFunction f;
  f.value = [interp](double x) { return interp->value(x); };
  f.deriv = [interp](double x) { return interp->deriv(x); };
  f.provenance = Provenance::kInterpolated;
  return f;
}

const ConstraintCheck& AdmissibilityReport::constraint(
    const std::string& name) const {
  for (const auto& c : constraints) {
    if (c.name == name) return c;
  }
  throw ConfigError("AdmissibilityReport: unknown constraint " + name);
}

AdmissibilityReport check_admissibility(const AdmissibleFunction& f,
                                        double theta0, int grid_size,
                                        double tol) {
  if (grid_size < 3) {
    throw ConfigError("check_admissibility: grid_size must be >= 3");
  }
  if (!(theta0 > 0.0) || !(theta0 < 1.5707963267948966)) {
    throw ConfigError("check_admissibility: theta0 must lie in (0, pi/2)");
  }

  std::vector<double> fx(static_cast<std::size_t>(grid_size));
  std::vector<double> dfx(static_cast<std::size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) {
    const double x = static_cast<double>(k) / (grid_size - 1);
    fx[k] = f.value(x);
    dfx[k] = f.deriv(x);
    if (!std::isfinite(fx[k]) || !std::isfinite(dfx[k])) {
      throw NumericalError("check_admissibility: non-finite evaluation at x=" +
                           std::to_string(x));
    }
  }

  const double scale = std::max(1.0, std::abs(fx.front()));
  double max_deriv = dfx[0];
  for (double d : dfx) max_deriv = std::max(max_deriv, d);
  const double deriv_scale = [&] {
    double m = 0.0;
    for (double d : dfx) m = std::max(m, std::abs(d));
    return std::max(1.0, m);
  }();

  AdmissibilityReport report;
  report.tolerance = tol;
  report.constraints = {
      {"f(0)>0", fx.front(), fx.front() > 0.0},
      {"f(1)=0", fx.back(), std::abs(fx.back()) <= tol * scale},
      {"f'<=0", max_deriv, max_deriv <= tol * deriv_scale},
      {"f'(1)=0", dfx.back(), std::abs(dfx.back()) <= tol * deriv_scale},
      {"f'(0)>-cot(theta0)", dfx.front(),
       dfx.front() > -1.0 / std::tan(theta0)},
  };
  report.pass = std::all_of(report.constraints.begin(),
                            report.constraints.end(),
                            [](const ConstraintCheck& c) { return c.ok; });
  return report;
}

double max_spacing(const DesignGrid& grid) {
  const auto& x = grid.points();
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    m = std::max(m, x[i + 1] - x[i]);
  }
  return m;
}

double spacing_tail_bound(int n, double epsilon) {
  if (n < 2) throw ConfigError("spacing_tail_bound: n must be >= 2");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw ConfigError("spacing_tail_bound: epsilon must lie in (0, 1)");
  }
  return static_cast<double>(n) * std::pow(1.0 - epsilon, n - 1);
}

SpacingReport spacing_report(const DesignGrid& grid, double epsilon) {
  SpacingReport r;
  r.n = static_cast<int>(grid.size());
  r.epsilon = epsilon;
  r.max_spacing = max_spacing(grid);
  r.tail_bound = spacing_tail_bound(r.n, epsilon);
  return r;
}

}  // namespace simreg
