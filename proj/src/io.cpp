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

#include "simreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace simreg {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw DataError(path + ":" + std::to_string(line) +
                    ": cannot parse number '" + s + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  return out;
}

Json mat2_to_json(const Mat2& m) {
  return Json::array({Json::array({m.a, m.b}), Json::array({m.c, m.d})});
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SampledCurve read_curve_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || split_line(lines[0]) != std::vector<std::string>{"x", "y"}) {
    throw DataError(path + ": expected header 'x,y'");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_line(lines[i]);
    if (fields.size() != 2) {
      throw DataError(path + ":" + std::to_string(i + 1) + ": expected 2 fields");
    }
    xs.push_back(parse_double(fields[0], path, static_cast<int>(i + 1)));
    ys.push_back(parse_double(fields[1], path, static_cast<int>(i + 1)));
  }
  // DesignGrid sorts; keep values paired with their points.
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> sx(xs.size()), sy(ys.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sx[i] = xs[order[i]];
    sy[i] = ys[order[i]];
  }
  return SampledCurve(DesignGrid(std::move(sx)), std::move(sy));
}

void write_curve_csv(const std::string& path, const SampledCurve& curve) {
  auto out = open_out(path);
  out << "x,y\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << format_double(curve.grid.points()[i]) << ','
        << format_double(curve.values[i]) << '\n';
  }
}

std::vector<NamedCurve> read_multi_curve_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() ||
      split_line(lines[0]) != std::vector<std::string>{"curve_id", "x", "y"}) {
    throw DataError(path + ": expected header 'curve_id,x,y'");
  }
  std::vector<std::string> ids;
  std::vector<std::vector<double>> xs, ys;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_line(lines[i]);
    if (fields.size() != 3) {
      throw DataError(path + ":" + std::to_string(i + 1) + ": expected 3 fields");
    }
    if (ids.empty() || ids.back() != fields[0]) {
      const auto seen = std::find(ids.begin(), ids.end(), fields[0]);
      if (seen != ids.end()) {
        throw DataError(path + ": curve '" + fields[0] +
                        "' appears in non-contiguous blocks");
      }
      ids.push_back(fields[0]);
      xs.emplace_back();
      ys.emplace_back();
    }
    xs.back().push_back(parse_double(fields[1], path, static_cast<int>(i + 1)));
    ys.back().push_back(parse_double(fields[2], path, static_cast<int>(i + 1)));
  }
  std::vector<NamedCurve> out;
  for (std::size_t c = 0; c < ids.size(); ++c) {
    std::vector<std::size_t> order(xs[c].size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return xs[c][a] < xs[c][b];
    });
    std::vector<double> sx(order.size()), sy(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sx[i] = xs[c][order[i]];
      sy[i] = ys[c][order[i]];
    }
    out.push_back(
        {ids[c], SampledCurve(DesignGrid(std::move(sx)), std::move(sy))});
  }
  return out;
}

void write_multi_curve_csv(const std::string& path,
                           const std::vector<NamedCurve>& curves) {
  auto out = open_out(path);
  out << "curve_id,x,y\n";
  for (const auto& nc : curves) {
    for (std::size_t i = 0; i < nc.curve.grid.size(); ++i) {
      out << nc.id << ',' << format_double(nc.curve.grid.points()[i]) << ','
          << format_double(nc.curve.values[i]) << '\n';
    }
  }
}

void write_inputs_csv(const std::string& path, const SectionedCurveSet& set) {
  auto out = open_out(path);
  out << "curve_id";
  for (const auto& name : set.input_names) out << ',' << name;
  out << '\n';
  for (std::size_t c = 0; c < set.n_curves(); ++c) {
    out << set.curve_ids[c];
    for (double v : set.inputs[c]) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_station_curves_csv(const std::string& path,
                              const std::vector<std::string>& curve_ids,
                              const std::vector<std::vector<double>>& curves) {
  auto out = open_out(path);
  out << "curve_id";
  const std::size_t s = curves.empty() ? 0 : curves.front().size();
  for (std::size_t k = 0; k < s; ++k) out << ",station_" << k;
  out << '\n';
  for (std::size_t c = 0; c < curves.size(); ++c) {
    out << curve_ids[c];
    for (double v : curves[c]) out << ',' << format_double(v);
    out << '\n';
  }
}

StationCurves read_station_curves_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty curves file");
  const auto header = split_line(lines[0]);
  if (header.size() < 2 || header[0] != "curve_id") {
    throw DataError(path + ": expected header 'curve_id,station_0,...'");
  }
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "station_" + std::to_string(k - 1)) {
      throw DataError(path + ": unexpected station column '" + header[k] + "'");
    }
  }
  StationCurves out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_line(lines[i]);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(i + 1) +
                      ": wrong field count");
    }
    out.ids.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      row.push_back(parse_double(fields[k], path, static_cast<int>(i + 1)));
    }
    out.curves.push_back(std::move(row));
  }
  return out;
}

SectionedCurveSet read_loads_dataset(const std::string& inputs_csv,
                                     const std::string& curves_csv,
                                     const std::vector<int>& breakpoints) {
  const auto lines = read_lines(inputs_csv);
  if (lines.empty()) throw DataError(inputs_csv + ": empty inputs file");
  const auto header = split_line(lines[0]);
  if (header.size() < 2 || header[0] != "curve_id") {
    throw DataError(inputs_csv + ": expected header 'curve_id,<feature...>'");
  }
  SectionedCurveSet set;
  set.input_names.assign(header.begin() + 1, header.end());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_line(lines[i]);
    if (fields.size() != header.size()) {
      throw DataError(inputs_csv + ":" + std::to_string(i + 1) +
                      ": wrong field count");
    }
    set.curve_ids.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      row.push_back(parse_double(fields[k], inputs_csv, static_cast<int>(i + 1)));
    }
    set.inputs.push_back(std::move(row));
  }

  const StationCurves curves = read_station_curves_csv(curves_csv);
  if (curves.ids != set.curve_ids) {
    throw DataError("inputs and curves files disagree on curve ids/order");
  }
  set.curves = curves.curves;
  const std::size_t s = set.curves.empty() ? 0 : set.curves.front().size();
  set.station_axis.resize(s);
  for (std::size_t k = 0; k < s; ++k) {
    set.station_axis[k] = s > 1 ? static_cast<double>(k) / (s - 1) : 0.0;
  }
  set.breakpoints = breakpoints;
  set.validate();
  return set;
}

Json registration_to_json(const RegistrationResult& r) {
  Json j;
  j["curve_id"] = r.curve_id;
  j["theta_hat"] = r.alpha_hat.theta;
  j["lambda_hat"] = r.alpha_hat.lambda;
  j["contrast"] = r.contrast_value;
  j["sigma2"] = r.sigma2_hat;
  j["gamma"] = mat2_to_json(r.gamma_hat);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["mode"] = r.mode == ReferenceMode::kExact ? "exact-reference"
                                              : "interpolated-reference";
  j["diagnostics"] = Json{{"boundary", r.boundary},
                          {"gamma_singular", r.gamma_singular},
                          {"a2_ok", r.a2_ok},
                          {"a2_min_rel", r.a2_min_rel},
                          {"monotone_margin", r.monotone_margin},
                          {"interp_gap", r.interp_gap},
                          {"high_interp_gap", r.high_interp_gap},
                          {"starts_used", r.starts_used}};
  return j;
}

Json model_to_json(const SparseLinearModel& m,
                   const std::vector<std::string>& input_names) {
  Json j;
  j["selected_features"] = m.selected_features;
  if (!input_names.empty()) {
    Json names = Json::array();
    for (int idx : m.selected_features) {
      names.push_back(input_names.at(static_cast<std::size_t>(idx)));
    }
    j["selected_names"] = names;
  }
  j["coefficients"] = m.coefficients;
  j["intercept"] = m.intercept;
  j["feature_mean"] = m.feature_mean;
  j["feature_scale"] = m.feature_scale;
  j["cv_size"] = m.cv_size;
  j["ridge_jitter"] = m.ridge_jitter;
  j["cv_mse"] = m.cv_mse;
  return j;
}

Json clt_report_to_json(const MonteCarloReport& r) {
  Json j;
  j["replicates"] = r.replicates;
  j["failures"] = r.failures;
  j["empirical_cov"] = mat2_to_json(r.empirical_cov);
  j["gamma_reference"] = mat2_to_json(r.gamma_reference);
  j["frobenius_rel_err"] = r.frobenius_rel_err;
  j["skewness"] = r.skewness;
  j["excess_kurtosis"] = r.excess_kurtosis;
  if (!r.rmse_by_n.empty()) {
    Json rows = Json::array();
    for (const auto& [n, rmse] : r.rmse_by_n) {
      rows.push_back(Json{{"n", n}, {"rmse", rmse}});
    }
    j["rmse_by_n"] = rows;
  }
  return j;
}

Json sweep_to_json(const std::vector<SweepPoint>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"n", r.n},
                       {"rmse_theta", r.rmse_theta},
                       {"rmse_lambda", r.rmse_lambda},
                       {"failures", r.failures}});
  }
  return Json{{"consistency_sweep", arr}};
}

Json interp_gap_to_json(const std::vector<std::pair<int, double>>& rows) {
  Json arr = Json::array();
  for (const auto& [n, gap] : rows) {
    arr.push_back(Json{{"n", n}, {"mean_sqrtn_gap", gap}});
  }
  return Json{{"interp_gap", arr}};
}

Json spacing_rows_to_json(const std::vector<SpacingRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"n", r.n},
                       {"epsilon", r.epsilon},
                       {"frequency", r.frequency},
                       {"bound", r.bound},
                       {"slack", r.slack},
                       {"ok", r.ok}});
  }
  return Json{{"spacing", arr}};
}

Json pipeline_report_to_json(const PipelineReport& r) {
  Json j;
  j["p_error_le_1pct"] = r.g1;
  j["p_error_le_2pct"] = r.g2;
  j["p_error_le_5pct"] = r.g5;
  j["p_error_le_10pct"] = r.g10;
  j["mean_error"] = r.mean_error;
  j["oracle_mean_error"] = r.oracle_mean_error;
  j["n_test"] = r.per_curve_errors.size();
  j["flagged_train_curves"] = r.flagged_train_curves;
  j["flagged_test_curves"] = r.flagged_test_curves;
  j["cdf_grid"] = r.cdf_grid;
  j["cdf_values"] = r.cdf_values;
  return j;
}

void write_json(const std::string& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  validate_config(j);
  return j;
}

ParamBox box_from_json(const Json& j, const ParamBox& fallback) {
  ParamBox box = fallback;
  if (j.contains("box")) {
    const Json& b = j["box"];
    box.theta0 = b.value("theta0", box.theta0);
    box.theta1 = b.value("theta1", box.theta1);
    box.lambda_min = b.value("lambda_min", box.lambda_min);
    box.lambda_max = b.value("lambda_max", box.lambda_max);
  }
  box.validate();
  return box;
}

void validate_config(const Json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (config.contains("box")) box_from_json(config);
  if (config.contains("simulate")) {
    const Json& s = config["simulate"];
    if (s.contains("sigma") && s["sigma"].get<double>() < 0.0) {
      throw ConfigError("config: simulate.sigma must be >= 0");
    }
    if (s.contains("n_points") && s["n_points"].get<int>() < 2) {
      throw ConfigError("config: simulate.n_points must be >= 2");
    }
  }
  if (config.contains("pipeline")) {
    const Json& p = config["pipeline"];
    if (p.contains("train_fraction")) {
      const double f = p["train_fraction"].get<double>();
      if (!(f > 0.0) || !(f < 1.0)) {
        throw ConfigError("config: pipeline.train_fraction must lie in (0,1)");
      }
    }
    if (p.contains("cv_folds") && p["cv_folds"].get<int>() < 2) {
      throw ConfigError("config: pipeline.cv_folds must be >= 2");
    }
  }
  if (config.contains("validate")) {
    const Json& v = config["validate"];
    if (v.contains("sigma") && v["sigma"].get<double>() < 0.0) {
      throw ConfigError("config: validate.sigma must be >= 0");
    }
    if (v.contains("replicates") && v["replicates"].get<int>() < 1) {
      throw ConfigError("config: validate.replicates must be >= 1");
    }
  }
}

}  // namespace simreg
