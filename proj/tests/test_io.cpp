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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "simreg/io.hpp"
#include "simreg/rng.hpp"

using namespace simreg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("simreg_io_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("curve csv round trips exactly") {
  TempDir tmp;
  SplitRng rng(1);
  std::vector<double> x;
  for (int i = 0; i < 40; ++i) x.push_back(rng.uniform01());
  std::sort(x.begin(), x.end());
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) y.push_back(rng.normal() * 1e3);
  const SampledCurve curve(DesignGrid(x), y);
  write_curve_csv(tmp.file("c.csv"), curve);
  const auto back = read_curve_csv(tmp.file("c.csv"));
  CHECK(back.grid.points() == curve.grid.points());
  CHECK(back.values == curve.values);
}

TEST_CASE("multi-curve csv keeps ids and order") {
  TempDir tmp;
  std::vector<NamedCurve> curves;
  curves.push_back({"a", SampledCurve(DesignGrid({0.0, 0.5, 1.0}),
                                      {3.0, 2.0, 0.0})});
  curves.push_back({"b", SampledCurve(DesignGrid({0.25, 0.75}),
                                      {1.0, 0.5})});
  write_multi_curve_csv(tmp.file("m.csv"), curves);
  const auto back = read_multi_curve_csv(tmp.file("m.csv"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "a");
  CHECK(back[1].id == "b");
  CHECK(back[0].curve.values == curves[0].curve.values);
  CHECK(back[1].curve.grid.points() == curves[1].curve.grid.points());
}

TEST_CASE("csv parse errors carry the line number") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("bad.csv"));
    out << "x,y\n0.1,2.0\nnot_a_number,3\n";
  }
  try {
    read_curve_csv(tmp.file("bad.csv"));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_curve_csv(tmp.file("missing.csv")), DataError);
}

TEST_CASE("station curves csv round trips") {
  TempDir tmp;
  const std::vector<std::string> ids{"c1", "c2"};
  const std::vector<std::vector<double>> curves{{1.0, 2.0, 3.0},
                                                {4.0, 5.0, 6.5}};
  write_station_curves_csv(tmp.file("s.csv"), ids, curves);
  const auto back = read_station_curves_csv(tmp.file("s.csv"));
  CHECK(back.ids == ids);
  CHECK(back.curves == curves);
}

TEST_CASE("loads dataset files round trip through the loaders") {
  TempDir tmp;
  SectionedCurveSet set;
  set.station_axis = {0.0, 0.25, 0.5, 0.75, 1.0};
  set.breakpoints = {};
  set.curve_ids = {"c1", "c2"};
  set.input_names = {"mass", "speed"};
  SplitRng rng(2);
  for (int c = 0; c < 2; ++c) {
    std::vector<double> row;
    for (int k = 0; k < 5; ++k) row.push_back(5.0 - k + 0.01 * rng.normal());
    set.curves.push_back(row);
    set.inputs.push_back({rng.uniform01(), rng.uniform01()});
  }
  write_inputs_csv(tmp.file("inputs.csv"), set);
  write_station_curves_csv(tmp.file("curves.csv"), set.curve_ids, set.curves);
  const auto back =
      read_loads_dataset(tmp.file("inputs.csv"), tmp.file("curves.csv"), {});
  CHECK(back.curves == set.curves);
  CHECK(back.inputs == set.inputs);
  CHECK(back.curve_ids == set.curve_ids);
  CHECK(back.input_names == set.input_names);
}

TEST_CASE("registration result json carries the documented schema") {
  RegistrationResult r;
  r.curve_id = "curve_0";
  r.alpha_hat = {-0.25, 2.5};
  r.contrast_value = 0.01;
  r.sigma2_hat = 0.01;
  r.gamma_hat = {1.0, 0.1, 0.1, 2.0};
  r.converged = true;
  r.iterations = 17;
  r.mode = ReferenceMode::kInterpolated;
  const Json j = registration_to_json(r);
  for (const char* key : {"curve_id", "theta_hat", "lambda_hat", "contrast",
                          "sigma2", "gamma", "converged", "iterations",
                          "mode"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["mode"] == "interpolated-reference");
  CHECK(j["gamma"][0][1] == 0.1);
  CHECK(j["theta_hat"] == -0.25);
}

TEST_CASE("pipeline report json matches the published row schema") {
  PipelineReport r;
  r.g1 = 0.17;
  r.g2 = 0.45;
  r.g5 = 0.88;
  r.g10 = 0.98;
  r.mean_error = 0.029;
  const Json j = pipeline_report_to_json(r);
  CHECK(j["p_error_le_1pct"] == 0.17);
  CHECK(j["p_error_le_2pct"] == 0.45);
  CHECK(j["p_error_le_5pct"] == 0.88);
  CHECK(j["p_error_le_10pct"] == 0.98);
  CHECK(j["mean_error"] == 0.029);
}

TEST_CASE("format_double survives a parse round trip") {
  SplitRng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double v = std::exp(rng.uniform(-30.0, 30.0)) *
                     (rng.uniform01() < 0.5 ? -1.0 : 1.0);
    const double back = std::stod(format_double(v));
    CHECK(back == v);
  }
}

TEST_CASE("config validation rejects bad ranges") {
  CHECK_NOTHROW(validate_config(Json::object()));
  CHECK_THROWS_AS(validate_config(Json::parse(R"({"simulate":{"sigma":-1}})")),
                  ConfigError);
  CHECK_THROWS_AS(
      validate_config(Json::parse(R"({"pipeline":{"train_fraction":1.0}})")),
      ConfigError);
  CHECK_THROWS_AS(
      validate_config(Json::parse(
          R"({"box":{"theta0":-1.0,"theta1":0.1,"lambda_min":0.1,"lambda_max":2}})")),
      ConfigError);
  CHECK_NOTHROW(validate_config(Json::parse(
      R"({"box":{"theta0":1.0,"theta1":0.1,"lambda_min":0.1,"lambda_max":2}})")));
}

TEST_CASE("box_from_json applies partial overrides") {
  const Json j = Json::parse(R"({"box":{"lambda_max":8.0}})");
  const ParamBox box = box_from_json(j);
  CHECK(box.lambda_max == 8.0);
  CHECK(box.lambda_min == doctest::Approx(0.05));
}
