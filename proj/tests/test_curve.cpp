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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "simreg/curve.hpp"
#include "simreg/montecarlo.hpp"
#include "simreg/rng.hpp"

using namespace simreg;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTheta0 = kPi / 3.0;

SampledCurve sample(const AdmissibleFunction& f, const std::vector<double>& x) {
  DesignGrid grid(x);  // sorts; evaluate on the sorted points
  std::vector<double> v;
  for (double xi : grid.points()) v.push_back(f.value(xi));
  return SampledCurve(std::move(grid), std::move(v));
}
}  // namespace

TEST_CASE("toy reference passes admissibility for theta0 = pi/3") {
  const auto report = check_admissibility(toy_reference(), kTheta0, 257);
  CHECK(report.pass);
  CHECK(report.constraint("f(0)>0").measured == doctest::Approx(4.0));
  CHECK(report.constraint("f(1)=0").measured == doctest::Approx(0.0));
  CHECK(report.constraint("f'(0)>-cot(theta0)").measured ==
        doctest::Approx(0.0));
}

TEST_CASE("linear function fails the flat-right-end constraint") {
  const auto f = analytic_function([](double x) { return 1.0 - x; },
                                   [](double) { return -1.0; });
  const auto report = check_admissibility(f, kPi / 4.0, 33);
  CHECK_FALSE(report.pass);
  CHECK_FALSE(report.constraint("f'(1)=0").ok);
  CHECK(report.constraint("f'(1)=0").measured == doctest::Approx(-1.0));
  CHECK(report.constraint("f(0)>0").ok);
  CHECK(report.constraint("f(1)=0").ok);
}

TEST_CASE("increasing function fails f(1)=0 and decreasingness") {
  const auto f = analytic_function([](double x) { return x; },
                                   [](double) { return 1.0; });
  const auto report = check_admissibility(f, kPi / 4.0, 33);
  CHECK_FALSE(report.pass);
  CHECK_FALSE(report.constraint("f(1)=0").ok);
  CHECK_FALSE(report.constraint("f'<=0").ok);
}

TEST_CASE("non-finite evaluation is reported with the offending point") {
  const auto f = analytic_function(
      [](double x) { return x == 0.5 ? std::nan("") : 1.0 - x; },
      [](double) { return -1.0; });
  CHECK_THROWS_AS(check_admissibility(f, kPi / 4.0, 3), NumericalError);
}

TEST_CASE("interpolation: midpoint of bracketing knots") {
  // Knots {0, 0.5, 1} of the toy g: f(0.25) = (g(0) + g(0.5)) / 2 = 3.
  const auto curve = sample(toy_reference(), {0.0, 0.5, 1.0});
  const auto f = linear_interpolate(curve);
  CHECK(f.value(0.25) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(f.provenance == Provenance::kInterpolated);
}

TEST_CASE("interpolation reproduces samples exactly at knots") {
  SplitRng rng(20260810);
  std::vector<double> x;
  for (int i = 0; i < 57; ++i) x.push_back(rng.uniform01());
  const auto curve = sample(toy_reference(), x);
  const auto f = linear_interpolate(curve);
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    CHECK(f.value(curve.grid.points()[i]) == curve.values[i]);
  }
}

TEST_CASE("interpolation requires two distinct points") {
  CHECK_THROWS_AS(SampledCurve(DesignGrid({0.5}), {1.0}), DataError);
  const SampledCurve two_equal(DesignGrid({0.5, 0.5}), {1.0, 3.0});
  CHECK_THROWS_AS(linear_interpolate(two_equal), DataError);
}

TEST_CASE("duplicate design points are merged by averaging") {
  const SampledCurve curve(DesignGrid({0.0, 0.5, 0.5, 1.0}),
                           {4.0, 3.0, 1.0, 0.0});
  const auto interp = linear_interpolant(curve);
  REQUIRE(interp.knots().size() == 3);
  CHECK(interp.value(0.5) == doctest::Approx(2.0));
}

TEST_CASE("constant extension outside the knot range") {
  const SampledCurve curve(DesignGrid({0.2, 0.8}), {3.0, 1.0});
  const auto f = linear_interpolate(curve);
  CHECK(f.value(0.0) == 3.0);
  CHECK(f.value(1.0) == 1.0);
  CHECK(f.deriv(0.1) == 0.0);
  CHECK(f.deriv(0.95) == 0.0);
  // Left-limit convention at interior knots.
  CHECK(f.deriv(0.8) == doctest::Approx((1.0 - 3.0) / 0.6));
}

TEST_CASE("max_spacing over interior gaps") {
  CHECK(max_spacing(DesignGrid({0.1, 0.4, 0.9})) == doctest::Approx(0.5));
  // Equally spaced points: 1/(N-1).
  std::vector<double> x;
  const int n = 11;
  for (int i = 0; i < n; ++i) x.push_back(static_cast<double>(i) / (n - 1));
  CHECK(max_spacing(DesignGrid(x)) == doctest::Approx(0.1));
  CHECK(max_spacing(DesignGrid({0.5, 0.5 + 1e-9})) ==
        doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("spacing tail bound values") {
  CHECK(spacing_tail_bound(2, 0.5) == doctest::Approx(1.0));
  // 1000 * 0.98^999, computed with 40-digit arithmetic.
  CHECK(spacing_tail_bound(1000, 0.02) ==
        doctest::Approx(1.71731363e-6).epsilon(1e-8));
  CHECK(spacing_tail_bound(10, 1e-12) == doctest::Approx(10.0));
  CHECK_THROWS_AS(spacing_tail_bound(10, 1.0), ConfigError);
  CHECK_THROWS_AS(spacing_tail_bound(10, -0.1), ConfigError);
  CHECK_THROWS_AS(spacing_tail_bound(1, 0.5), ConfigError);
}

TEST_CASE("spacing report assembles bound and measurement") {
  const auto r = spacing_report(DesignGrid({0.1, 0.4, 0.9}), 0.3);
  CHECK(r.n == 3);
  CHECK(r.max_spacing == doctest::Approx(0.5));
  CHECK(r.tail_bound == doctest::Approx(3.0 * 0.49));
  CHECK(r.tail_bound >= 0.0);
  CHECK(r.tail_bound <= r.n);
}

TEST_CASE("lemma-1 tail frequency stays under the bound (Monte Carlo)") {
  const auto rows = run_spacing_check({50}, {0.1, 0.15}, 2000, 987654321);
  for (const auto& row : rows) {
    CAPTURE(row.n);
    CAPTURE(row.epsilon);
    CHECK(row.frequency <= row.bound + row.slack);
    CHECK(row.ok);
  }
}

TEST_CASE("interpolant of an admissible sample is admissible at scale") {
  // The boundary equality f(1)=0 holds at the sampling resolution only:
  // the interpolant is g(X_(N)) beyond the last knot, of order
  // (1 - X_(N))^2 by the flat right end of g. The constant extension makes
  // the boundary derivatives exact, so the remaining constraints hold at
  // the default tolerance.
  for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
    SplitRng rng(seed);
    std::vector<double> x;
    for (int i = 0; i < 200; ++i) x.push_back(rng.uniform01());
    const auto curve = sample(toy_reference(), x);
    const auto f = linear_interpolate(curve);
    const double right_gap = 1.0 - curve.grid.back();
    const double tol =
        std::max(kAdmissibilityTol, 3.0 * right_gap * right_gap);
    const auto report = check_admissibility(f, kTheta0, 257, tol);
    CAPTURE(seed);
    CHECK(report.pass);
    CHECK(report.constraint("f(0)>0").ok);
    CHECK(report.constraint("f(1)=0").ok);
    CHECK(report.constraint("f'(1)=0").ok);  // exact: constant extension
    CHECK(report.constraint("f'<=0").ok);
    CHECK(report.constraint("f'(0)>-cot(theta0)").ok);
  }
}

TEST_CASE("sup-norm interpolation error bounded by slope times spacing") {
  // |f~ - g| <= sup|g'| * max interior gap on the interpolation range.
  const double lipschitz = 2.0 * kPi;
  for (std::uint64_t seed : {101u, 202u}) {
    SplitRng rng(seed);
    std::vector<double> x;
    for (int i = 0; i < 100; ++i) x.push_back(rng.uniform01());
    const auto curve = sample(toy_reference(), x);
    const auto f = linear_interpolate(curve);
    const double gap = max_spacing(curve.grid);
    const double lo = curve.grid.front();
    const double hi = curve.grid.back();
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k) {
      const double u = lo + (hi - lo) * k / 2000.0;
      worst = std::max(worst,
                       std::abs(f.value(u) - toy_reference().value(u)));
    }
    CAPTURE(seed);
    CHECK(worst <= lipschitz * gap);
  }
}

TEST_CASE("design grid validation") {
  CHECK_THROWS_AS(DesignGrid({0.1}), DataError);
  CHECK_THROWS_AS(DesignGrid({0.1, 1.2}), DataError);
  CHECK_THROWS_AS(DesignGrid({-0.1, 0.5}), DataError);
  const DesignGrid g({0.9, 0.1, 0.5});
  CHECK(g.points().front() == 0.1);  // sorted on construction
  CHECK(g.points().back() == 0.9);
}

TEST_CASE("sampled curve validation") {
  CHECK_THROWS_AS(SampledCurve(DesignGrid({0.1, 0.5}), {1.0}), DataError);
  CHECK_THROWS_AS(
      SampledCurve(DesignGrid({0.1, 0.5}), {1.0, std::nan("")}), DataError);
}
