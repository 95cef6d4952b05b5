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

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "simreg/io.hpp"

namespace fs = std::filesystem;
using simreg::Json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 0;
  Json config = Json::object();

  std::string out(const std::string& name) const {
    return (fs::path(out_dir) / name).string();
  }
};

// Config value helpers: a CLI flag wins over the config file, which wins
// over the built-in default.
template <typename T>
T pick(const CLI::Option* opt, const T& flag_value, const Json& section,
       const std::string& key, const T& fallback) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (section.contains(key)) return section[key].get<T>();
  return fallback;
}

Json section(const Json& config, const std::string& name) {
  return config.contains(name) ? config[name] : Json::object();
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

simreg::ParamBox resolve_box(const GlobalOpts& g, const std::string& spec,
                             const simreg::ParamBox& fallback) {
  simreg::ParamBox box = simreg::box_from_json(g.config, fallback);
  if (!spec.empty()) {
    const auto v = parse_double_list(spec);
    if (v.size() != 4) {
      throw simreg::ConfigError(
          "--box expects 'theta0,theta1,lambda_min,lambda_max'");
    }
    box = {v[0], v[1], v[2], v[3]};
  }
  box.validate();
  return box;
}

simreg::AdmissibleFunction resolve_reference(const std::string& name,
                                             bool& interpolated,
                                             simreg::SampledCurve** samples,
                                             simreg::SampledCurve& storage) {
  if (name == "toy") {
    interpolated = false;
    *samples = nullptr;
    return simreg::toy_reference();
  }
  if (!fs::exists(name)) {
    throw simreg::DataError("reference '" + name +
                            "' is neither a named reference nor a file");
  }
  storage = simreg::read_curve_csv(name);
  interpolated = true;
  *samples = &storage;
  return simreg::linear_interpolate(storage);
}

int cmd_simulate(const GlobalOpts& g, const std::string& mode, int n, int k,
                 double sigma, const std::string& value_model,
                 bool fresh_grids, int loads_curves, int loads_inputs,
                 int loads_stations, const std::vector<int>& breakpoints,
                 double sigma_rel) {
  fs::create_directories(g.out_dir);
  if (mode == "toy") {
    simreg::ToySpec spec;
    spec.n_points = n;
    spec.n_curves = k;
    spec.sigma = sigma;
    spec.seed = g.seed;
    spec.shared_grid = !fresh_grids;
    spec.box = simreg::box_from_json(g.config);
    if (value_model == "rotated-ordinate") {
      spec.value_model = simreg::ToyValueModel::kRotatedOrdinate;
    } else if (value_model != "transformed-curve") {
      throw simreg::ConfigError("unknown value model '" + value_model + "'");
    }
    const simreg::ToyDataset data = simreg::generate_toy(spec);

    std::vector<simreg::NamedCurve> curves;
    Json truth;
    truth["seed"] = g.seed;
    truth["sigma"] = sigma;
    truth["value_model"] = value_model;
    Json params = Json::array();
    for (std::size_t j = 0; j < data.curves.size(); ++j) {
      const std::string id = "curve_" + std::to_string(j);
      curves.push_back({id, data.curves[j]});
      params.push_back(Json{{"curve_id", id},
                            {"theta", data.true_params[j].theta},
                            {"lambda", data.true_params[j].lambda},
                            {"clamped", static_cast<bool>(data.clamped[j])}});
    }
    truth["curves"] = params;
    simreg::write_multi_curve_csv(g.out("curves.csv"), curves);
    simreg::write_curve_csv(g.out("reference.csv"), data.reference_samples);
    simreg::write_json(g.out("truth.json"), truth);
    std::cerr << "simulate: wrote " << data.curves.size() << " toy curves to "
              << g.out_dir << "\n";
    return 0;
  }
  if (mode == "loads") {
    simreg::LoadsAnalogSpec spec;
    spec.n_curves = loads_curves;
    spec.n_inputs = loads_inputs;
    spec.n_stations = loads_stations;
    spec.breakpoints = breakpoints;
    spec.sigma_rel = sigma_rel;
    spec.seed = g.seed;
    const simreg::LoadsAnalog data = simreg::generate_loads_analog(spec);
    simreg::write_inputs_csv(g.out("inputs.csv"), data.set);
    simreg::write_station_curves_csv(g.out("curves.csv"), data.set.curve_ids,
                                     data.set.curves);
    Json truth;
    truth["seed"] = g.seed;
    truth["sigma_rel"] = sigma_rel;
    truth["breakpoints"] = spec.breakpoints;
    truth["feature_names"] = simreg::feature_names(
        data.true_features.empty() ? 0 : data.true_features[0].size() / 4);
    truth["true_features"] = data.true_features;
    truth["active_inputs"] = data.active_inputs;
    truth["true_weights"] = data.true_weights;
    simreg::write_json(g.out("truth.json"), truth);
    std::cerr << "simulate: wrote loads analog (" << data.set.n_curves()
              << " curves) to " << g.out_dir << "\n";
    return 0;
  }
  throw simreg::ConfigError("simulate: mode must be 'toy' or 'loads'");
}

int cmd_register(const GlobalOpts& g, const std::string& curves_path,
                 const std::string& reference, const std::string& box_spec) {
  fs::create_directories(g.out_dir);
  const auto curves = simreg::read_multi_curve_csv(curves_path);
  if (curves.empty()) throw simreg::DataError("register: no curves in input");

  bool interpolated = false;
  simreg::SampledCurve* ref_samples = nullptr;
  simreg::SampledCurve storage{simreg::DesignGrid({0.0, 1.0}), {0.0, 0.0}};
  const simreg::AdmissibleFunction ref =
      resolve_reference(reference, interpolated, &ref_samples, storage);
  const simreg::ParamBox box = resolve_box(g, box_spec, {});

  Json results = Json::array();
  std::vector<simreg::NamedCurve> fitted;
  for (const auto& nc : curves) {
    simreg::RegistrationResult res;
    if (interpolated) {
      res = simreg::estimate_interpolated(nc.curve, *ref_samples, box, {});
    } else {
      simreg::RegistrationProblem problem{nc.curve, ref, box, {},
                                          simreg::ReferenceMode::kExact};
      res = simreg::estimate(problem);
    }
    res.curve_id = nc.id;
    results.push_back(simreg::registration_to_json(res));

    const simreg::SimilarityTransform t(res.alpha_hat, ref);
    simreg::PreimageOptions preimage;
    preimage.policy = simreg::MonotonePolicy::kAllow;
    std::vector<double> fit(nc.curve.grid.size());
    for (std::size_t i = 0; i < fit.size(); ++i) {
      fit[i] = t.ordinate(t.preimage(nc.curve.grid.points()[i], preimage));
    }
    fitted.push_back({nc.id, simreg::SampledCurve(nc.curve.grid, fit)});
  }
  simreg::write_json(g.out("results.json"), results);
  simreg::write_multi_curve_csv(g.out("fitted.csv"), fitted);
  std::cerr << "register: " << curves.size() << " curves registered\n";
  return 0;
}

int cmd_validate(const GlobalOpts& g, const std::vector<std::string>& checks,
                 const std::string& alpha_spec, double sigma, int n,
                 int replicates, const std::string& n_list_spec,
                 const std::string& eps_spec) {
  fs::create_directories(g.out_dir);
  const auto alpha_v = parse_double_list(alpha_spec);
  if (alpha_v.size() != 2) {
    throw simreg::ConfigError("--alpha-star expects 'theta,lambda'");
  }
  const simreg::TransformParams alpha_star{alpha_v[0], alpha_v[1]};
  const std::vector<int> n_list = parse_int_list(n_list_spec);
  const std::vector<double> epsilons = parse_double_list(eps_spec);
  const simreg::ParamBox box = simreg::box_from_json(g.config);

  auto wants = [&](const std::string& c) {
    return std::find(checks.begin(), checks.end(), "all") != checks.end() ||
           std::find(checks.begin(), checks.end(), c) != checks.end();
  };

  if (wants("clt")) {
    if (replicates < 500) {
      std::cerr << "validate: warning, clt replicate budget " << replicates
                << " is below the recommended 500\n";
    }
    const auto report = simreg::run_clt_check(alpha_star, n, sigma, replicates,
                                              g.seed, g.threads, box);
    simreg::write_json(g.out("clt.json"), simreg::clt_report_to_json(report));
    std::string csv = "replicate,theta_hat,lambda_hat\n";
    for (std::size_t r = 0; r < report.estimates.size(); ++r) {
      csv += std::to_string(r) + ',' +
             simreg::format_double(report.estimates[r][0]) + ',' +
             simreg::format_double(report.estimates[r][1]) + '\n';
    }
    simreg::write_text(g.out("clt_replicates.csv"), csv);
    std::cerr << "validate: clt frobenius_rel_err="
              << report.frobenius_rel_err << "\n";
  }
  if (wants("sweep")) {
    simreg::ToySpec spec;
    spec.sigma = sigma;
    spec.seed = g.seed;
    spec.box = box;
    const auto rows = simreg::run_consistency_sweep(spec, alpha_star, n_list,
                                                    replicates, g.threads);
    simreg::write_json(g.out("sweep.json"), simreg::sweep_to_json(rows));
    std::string csv = "n,rmse_theta,rmse_lambda,failures\n";
    for (const auto& r : rows) {
      csv += std::to_string(r.n) + ',' + simreg::format_double(r.rmse_theta) +
             ',' + simreg::format_double(r.rmse_lambda) + ',' +
             std::to_string(r.failures) + '\n';
    }
    simreg::write_text(g.out("sweep.csv"), csv);
    std::cerr << "validate: sweep done over " << rows.size() << " sizes\n";
  }
  if (wants("interp")) {
    const auto rows = simreg::run_interp_gap_check(
        alpha_star, n_list, sigma, replicates, g.seed, g.threads, box);
    simreg::write_json(g.out("interp.json"), simreg::interp_gap_to_json(rows));
    std::string csv = "n,mean_sqrtn_gap\n";
    for (const auto& [nn, gap] : rows) {
      csv += std::to_string(nn) + ',' + simreg::format_double(gap) + '\n';
    }
    simreg::write_text(g.out("interp.csv"), csv);
    std::cerr << "validate: interp gap check done\n";
  }
  if (wants("spacing")) {
    if (replicates < 1000) {
      std::cerr << "validate: warning, spacing replicate budget " << replicates
                << " is below the recommended 1000\n";
    }
    const auto rows =
        simreg::run_spacing_check(n_list, epsilons, replicates, g.seed);
    simreg::write_json(g.out("spacing.json"),
                       simreg::spacing_rows_to_json(rows));
    std::string csv = "n,epsilon,frequency,bound,slack,ok\n";
    for (const auto& r : rows) {
      csv += std::to_string(r.n) + ',' + simreg::format_double(r.epsilon) +
             ',' + simreg::format_double(r.frequency) + ',' +
             simreg::format_double(r.bound) + ',' +
             simreg::format_double(r.slack) + ',' + (r.ok ? "1" : "0") + '\n';
    }
    simreg::write_text(g.out("spacing.csv"), csv);
    std::cerr << "validate: spacing check done\n";
  }
  return 0;
}

int cmd_pipeline(const GlobalOpts& g, const std::string& inputs_path,
                 const std::string& curves_path,
                 const std::vector<int>& breakpoints, double train_fraction,
                 int cv_folds, int max_size, const std::string& box_spec) {
  fs::create_directories(g.out_dir);
  const simreg::SectionedCurveSet set =
      simreg::read_loads_dataset(inputs_path, curves_path, breakpoints);

  simreg::PipelineOptions options;
  options.train_fraction = train_fraction;
  options.cv_folds = cv_folds;
  options.max_model_size = max_size;
  options.threads = g.threads;
  options.seed = g.seed;
  options.box = resolve_box(g, box_spec, options.box);

  const simreg::TrainedPipeline trained = simreg::train_pipeline(set, options);

  const auto names = simreg::feature_names(trained.model.sections.size());
  Json models = Json::object();
  for (std::size_t o = 0; o < trained.models.size(); ++o) {
    models[names[o]] =
        simreg::model_to_json(trained.models[o], set.input_names);
  }
  simreg::write_json(g.out("models.json"), models);
  simreg::write_json(g.out("report.json"),
                     simreg::pipeline_report_to_json(trained.report));

  std::string csv = "curve_id,error_rate\n";
  std::vector<std::string> pred_ids;
  for (std::size_t i = 0; i < trained.test_indices.size(); ++i) {
    const int c = trained.test_indices[i];
    csv += set.curve_ids[c] + ',' +
           simreg::format_double(trained.report.per_curve_errors[i]) + '\n';
    pred_ids.push_back(set.curve_ids[c]);
  }
  simreg::write_text(g.out("per_curve.csv"), csv);
  simreg::write_station_curves_csv(g.out("predictions.csv"), pred_ids,
                                   trained.report.predicted_curves);
  std::cerr << "pipeline: mean test error " << trained.report.mean_error
            << " over " << pred_ids.size() << " curves\n";
  return 0;
}

int cmd_report(const GlobalOpts& g, const std::string& pred_path,
               const std::string& actual_path) {
  fs::create_directories(g.out_dir);
  const simreg::StationCurves pred = simreg::read_station_curves_csv(pred_path);
  const simreg::StationCurves actual =
      simreg::read_station_curves_csv(actual_path);

  std::vector<double> errors;
  std::string csv = "curve_id,error_rate\n";
  for (std::size_t i = 0; i < pred.ids.size(); ++i) {
    const auto it =
        std::find(actual.ids.begin(), actual.ids.end(), pred.ids[i]);
    if (it == actual.ids.end()) {
      throw simreg::DataError("report: curve '" + pred.ids[i] +
                              "' missing from the actual file");
    }
    const std::size_t j = static_cast<std::size_t>(it - actual.ids.begin());
    const double err = simreg::error_rate(pred.curves[i], actual.curves[j]);
    errors.push_back(err);
    csv += pred.ids[i] + ',' + simreg::format_double(err) + '\n';
  }
  if (errors.empty()) throw simreg::DataError("report: no curves to score");

  const auto gvals = simreg::empirical_cdf(errors, {0.01, 0.02, 0.05, 0.10});
  Json j;
  j["p_error_le_1pct"] = gvals[0];
  j["p_error_le_2pct"] = gvals[1];
  j["p_error_le_5pct"] = gvals[2];
  j["p_error_le_10pct"] = gvals[3];
  double mean = 0.0;
  for (double e : errors) mean += e;
  j["mean_error"] = mean / errors.size();
  j["n_test"] = errors.size();
  simreg::write_json(g.out("report.json"), j);
  simreg::write_text(g.out("per_curve.csv"), csv);
  std::cerr << "report: mean error " << mean / errors.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simreg: plane-similarity curve registration toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  auto* config_opt =
      app.add_option("--config", g.config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed");
  auto* out_opt = app.add_option("--out-dir", g.out_dir, "output directory");
  auto* threads_opt =
      app.add_option("--threads", g.threads, "worker threads (0 = auto)");

  // Global flags may appear after the subcommand name.
  app.fallthrough();

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate synthetic datasets");
  sim->fallthrough();
  std::string sim_mode = "toy";
  bool sim_toy = false, sim_loads = false;
  sim->add_flag("--toy", sim_toy, "toy dataset (default)");
  sim->add_flag("--loads", sim_loads, "loads-analog dataset");
  int sim_n = 100, sim_k = 25;
  double sim_sigma = 0.1;
  std::string sim_value_model = "transformed-curve";
  bool sim_fresh = false;
  auto* sim_n_opt = sim->add_option("--n", sim_n, "points per curve");
  auto* sim_k_opt = sim->add_option("--k", sim_k, "number of curves");
  auto* sim_sigma_opt = sim->add_option("--sigma", sim_sigma, "noise sd");
  sim->add_option("--value-model", sim_value_model,
                  "transformed-curve | rotated-ordinate");
  sim->add_flag("--fresh-grids", sim_fresh, "one design draw per curve");
  int sim_lc = 1152, sim_li = 28, sim_ls = 45;
  double sim_sigma_rel = 1e-3;
  std::string sim_bp = "3,20";
  sim->add_option("--curves", sim_lc, "loads: number of curves");
  sim->add_option("--inputs", sim_li, "loads: number of input features");
  sim->add_option("--stations", sim_ls, "loads: number of stations");
  sim->add_option("--breakpoints", sim_bp, "loads: section breakpoints");
  sim->add_option("--sigma-rel", sim_sigma_rel, "loads: relative noise");

  // register
  auto* reg = app.add_subcommand("register", "fit deformation parameters");
  reg->fallthrough();
  std::string reg_curves, reg_reference = "toy", reg_box;
  reg->add_option("--curves", reg_curves, "multi-curve CSV")->required();
  reg->add_option("--reference", reg_reference,
                  "'toy' or a sampled reference CSV");
  reg->add_option("--box", reg_box, "theta0,theta1,lambda_min,lambda_max");

  // validate
  auto* val = app.add_subcommand("validate", "Monte Carlo validation");
  val->fallthrough();
  std::vector<std::string> val_checks{"all"};
  val->add_option("--check", val_checks,
                  "all | clt | sweep | interp | spacing");
  std::string val_alpha = "-0.3,2.5";
  double val_sigma = 0.1;
  int val_n = 2000, val_reps = 500;
  std::string val_nlist = "100,400,1600", val_eps = "0.02,0.05,0.1";
  auto* val_alpha_opt = val->add_option("--alpha-star", val_alpha, "theta,lambda");
  auto* val_sigma_opt = val->add_option("--sigma", val_sigma, "noise sd");
  auto* val_n_opt = val->add_option("--n", val_n, "design size for clt");
  auto* val_reps_opt = val->add_option("--replicates", val_reps, "replicates");
  val->add_option("--n-list", val_nlist, "sizes for sweep/interp checks");
  val->add_option("--epsilons", val_eps, "spacing thresholds");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "sectioned loads pipeline");
  pipe->fallthrough();
  std::string pipe_inputs, pipe_curves, pipe_bp = "3,20", pipe_box;
  double pipe_frac = 0.75;
  int pipe_cv = 5, pipe_max = 0;
  pipe->add_option("--inputs", pipe_inputs, "inputs CSV")->required();
  pipe->add_option("--curves", pipe_curves, "station curves CSV")->required();
  auto* pipe_bp_opt = pipe->add_option("--breakpoints", pipe_bp, "e.g. 3,20");
  auto* pipe_frac_opt =
      pipe->add_option("--train-fraction", pipe_frac, "default 0.75");
  auto* pipe_cv_opt = pipe->add_option("--cv-folds", pipe_cv, "default 5");
  pipe->add_option("--max-size", pipe_max, "max model size (0 = auto)");
  pipe->add_option("--box", pipe_box, "theta0,theta1,lambda_min,lambda_max");

  // report
  auto* rep = app.add_subcommand("report", "error-rate CDF of predictions");
  rep->fallthrough();
  std::string rep_pred, rep_actual;
  rep->add_option("--pred", rep_pred, "predicted station curves CSV")
      ->required();
  rep->add_option("--actual", rep_actual, "actual station curves CSV")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    g.config = simreg::load_config(g.config_path);
    const Json empty = Json::object();
    if (seed_opt->count() == 0 && g.config.contains("seed")) {
      g.seed = g.config["seed"].get<std::uint64_t>();
    }
    if (out_opt->count() == 0 && g.config.contains("out_dir")) {
      g.out_dir = g.config["out_dir"].get<std::string>();
    }
    if (threads_opt->count() == 0 && g.config.contains("threads")) {
      g.threads = g.config["threads"].get<int>();
    }
    (void)config_opt;

    if (sim->parsed()) {
      const Json s = section(g.config, "simulate");
      if (sim_loads && !sim_toy) sim_mode = "loads";
      if (!sim_loads && !sim_toy && s.contains("mode")) {
        sim_mode = s["mode"].get<std::string>();
      }
      return cmd_simulate(
          g, sim_mode, pick(sim_n_opt, sim_n, s, "n_points", sim_n),
          pick(sim_k_opt, sim_k, s, "n_curves", sim_k),
          pick(sim_sigma_opt, sim_sigma, s, "sigma", sim_sigma),
          sim_value_model, sim_fresh, sim_lc, sim_li, sim_ls,
          parse_int_list(sim_bp), sim_sigma_rel);
    }
    if (reg->parsed()) {
      return cmd_register(g, reg_curves, reg_reference, reg_box);
    }
    if (val->parsed()) {
      const Json v = section(g.config, "validate");
      return cmd_validate(
          g, val_checks, pick(val_alpha_opt, val_alpha, v, "alpha_star", val_alpha),
          pick(val_sigma_opt, val_sigma, v, "sigma", val_sigma),
          pick(val_n_opt, val_n, v, "n", val_n),
          pick(val_reps_opt, val_reps, v, "replicates", val_reps), val_nlist,
          val_eps);
    }
    if (pipe->parsed()) {
      const Json pj = section(g.config, "pipeline");
      return cmd_pipeline(
          g, pipe_inputs, pipe_curves, parse_int_list(pipe_bp),
          pick(pipe_frac_opt, pipe_frac, pj, "train_fraction", pipe_frac),
          pick(pipe_cv_opt, pipe_cv, pj, "cv_folds", pipe_cv), pipe_max,
          pipe_box);
    }
    if (rep->parsed()) {
      return cmd_report(g, rep_pred, rep_actual);
    }
    (void)pipe_bp_opt;
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const simreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const simreg::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const simreg::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
