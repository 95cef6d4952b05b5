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

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "simreg/montecarlo.hpp"
#include "simreg/pipeline.hpp"

namespace py = pybind11;
using namespace simreg;

namespace {

SampledCurve make_curve(const std::vector<double>& x,
                        const std::vector<double>& y) {
  return SampledCurve(DesignGrid(x), y);
}

py::dict report_to_dict(const AdmissibilityReport& r) {
  py::dict d;
  d["pass"] = r.pass;
  py::list constraints;
  for (const auto& c : r.constraints) {
    py::dict e;
    e["name"] = c.name;
    e["measured"] = c.measured;
    e["ok"] = c.ok;
    constraints.append(e);
  }
  d["constraints"] = constraints;
  return d;
}

py::dict mat_to_dict(const Mat2& m) {
  py::dict d;
  d["rows"] = std::vector<std::vector<double>>{{m.a, m.b}, {m.c, m.d}};
  return d;
}

}  // namespace

PYBIND11_MODULE(_simreg, m) {
  m.doc() = "Plane-similarity curve registration core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_RuntimeError);

  py::class_<TransformParams>(m, "TransformParams")
      .def(py::init<double, double>(), py::arg("theta") = 0.0,
           py::arg("lambda_") = 1.0)
      .def_readwrite("theta", &TransformParams::theta)
      .def_readwrite("lambda_", &TransformParams::lambda)
      .def("__repr__", [](const TransformParams& p) {
        return "TransformParams(theta=" + std::to_string(p.theta) +
               ", lambda_=" + std::to_string(p.lambda) + ")";
      });

  py::class_<ParamBox>(m, "ParamBox")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("theta0"),
           py::arg("theta1"), py::arg("lambda_min"), py::arg("lambda_max"))
      .def_readwrite("theta0", &ParamBox::theta0)
      .def_readwrite("theta1", &ParamBox::theta1)
      .def_readwrite("lambda_min", &ParamBox::lambda_min)
      .def_readwrite("lambda_max", &ParamBox::lambda_max)
      .def("contains",
           [](const ParamBox& b, const TransformParams& p) {
             return b.contains(p);
           });

  py::class_<SampledCurve>(m, "SampledCurve")
      .def(py::init(&make_curve), py::arg("x"), py::arg("y"))
      .def_property_readonly(
          "x", [](const SampledCurve& c) { return c.grid.points(); })
      .def_property_readonly(
          "y", [](const SampledCurve& c) { return c.values; });

  py::class_<AdmissibleFunction>(m, "AdmissibleFunction")
      .def("__call__",
           [](const AdmissibleFunction& f, double x) { return f.value(x); })
      .def("deriv",
           [](const AdmissibleFunction& f, double x) { return f.deriv(x); });

  m.def("toy_reference", &toy_reference,
        "The toy reference g(x) = 2(cos(pi x) + 1)");
  m.def(
      "linear_interpolate",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return linear_interpolate(make_curve(x, y));
      },
      py::arg("x"), py::arg("y"),
      "Piecewise-linear interpolant with constant extension");

  m.def(
      "check_admissibility",
      [](const AdmissibleFunction& f, double theta0, int grid_size) {
        return report_to_dict(check_admissibility(f, theta0, grid_size));
      },
      py::arg("f"), py::arg("theta0"), py::arg("grid_size") = 257);

  m.def("max_spacing",
        [](const std::vector<double>& x) { return max_spacing(DesignGrid(x)); });
  m.def("spacing_tail_bound", &spacing_tail_bound, py::arg("n"),
        py::arg("epsilon"));

  m.def(
      "transform_point",
      [](const TransformParams& alpha, double x, const AdmissibleFunction& f) {
        const Point2 p = transform_point(alpha, x, f);
        return std::make_pair(p.x, p.y);
      },
      py::arg("alpha"), py::arg("x"), py::arg("f"));
  m.def(
      "solve_design_preimage",
      [](const TransformParams& alpha, double x, const AdmissibleFunction& g,
         bool require_monotone) {
        PreimageOptions opts;
        opts.policy = require_monotone ? MonotonePolicy::kRequire
                                       : MonotonePolicy::kAllow;
        return solve_design_preimage(alpha, x, g, opts);
      },
      py::arg("alpha"), py::arg("x"), py::arg("g"),
      py::arg("require_monotone") = true);
  m.def(
      "transformed_value",
      [](const TransformParams& alpha, double x, const AdmissibleFunction& g) {
        PreimageOptions opts;
        opts.policy = MonotonePolicy::kAllow;
        return transformed_value(alpha, x, g, opts);
      },
      py::arg("alpha"), py::arg("x"), py::arg("g"));
  m.def(
      "grad_transformed_value",
      [](const TransformParams& alpha, double x, const AdmissibleFunction& g) {
        PreimageOptions opts;
        opts.policy = MonotonePolicy::kAllow;
        const auto grad = grad_transformed_value(alpha, x, g, opts);
        return std::make_pair(grad[0], grad[1]);
      },
      py::arg("alpha"), py::arg("x"), py::arg("g"));
  m.def(
      "inverse_transform_point",
      [](const TransformParams& alpha, double u, double v,
         const AdmissibleFunction& f) {
        const Point2 p = inverse_transform_point(alpha, {u, v}, f);
        return std::make_pair(p.x, p.y);
      },
      py::arg("alpha"), py::arg("u"), py::arg("v"), py::arg("f"));

  py::class_<RegistrationResult>(m, "RegistrationResult")
      .def_property_readonly(
          "alpha_hat", [](const RegistrationResult& r) { return r.alpha_hat; })
      .def_readonly("contrast", &RegistrationResult::contrast_value)
      .def_readonly("sigma2", &RegistrationResult::sigma2_hat)
      .def_property_readonly(
          "gamma", [](const RegistrationResult& r) { return mat_to_dict(r.gamma_hat); })
      .def_readonly("converged", &RegistrationResult::converged)
      .def_readonly("iterations", &RegistrationResult::iterations)
      .def_readonly("boundary", &RegistrationResult::boundary)
      .def_property_readonly("mode", [](const RegistrationResult& r) {
        return r.mode == ReferenceMode::kExact ? "exact-reference"
                                               : "interpolated-reference";
      });

  m.def(
      "estimate",
      [](const SampledCurve& target, const AdmissibleFunction& reference,
         const ParamBox& box) {
        RegistrationProblem p{target, reference, box, SolverOptions{},
                              ReferenceMode::kExact};
        return estimate(p);
      },
      py::arg("target"), py::arg("reference"), py::arg("box") = ParamBox{},
      "Minimize the registration contrast over the parameter box");
  m.def(
      "estimate_interpolated",
      [](const SampledCurve& target, const SampledCurve& reference_samples,
         const ParamBox& box) {
        return estimate_interpolated(target, reference_samples, box, {});
      },
      py::arg("target"), py::arg("reference_samples"),
      py::arg("box") = ParamBox{});
  m.def(
      "contrast",
      [](const TransformParams& alpha, const SampledCurve& target,
         const AdmissibleFunction& reference, const ParamBox& box) {
        RegistrationProblem p{target, reference, box, SolverOptions{},
                              ReferenceMode::kExact};
        return contrast(alpha, p);
      },
      py::arg("alpha"), py::arg("target"), py::arg("reference"),
      py::arg("box") = ParamBox{});

  py::class_<ToyDataset>(m, "ToyDataset")
      .def_readonly("curves", &ToyDataset::curves)
      .def_readonly("true_params", &ToyDataset::true_params)
      .def_readonly("clamped", &ToyDataset::clamped)
      .def_property_readonly(
          "grid", [](const ToyDataset& d) { return d.grid.points(); })
      .def_property_readonly("reference_samples", [](const ToyDataset& d) {
        return d.reference_samples;
      });

  m.def(
      "generate_toy",
      [](int n_points, int n_curves, double sigma, std::uint64_t seed,
         bool paper_values) {
        ToySpec spec;
        spec.n_points = n_points;
        spec.n_curves = n_curves;
        spec.sigma = sigma;
        spec.seed = seed;
        if (paper_values) {
          spec.value_model = ToyValueModel::kRotatedOrdinate;
        }
        return generate_toy(spec);
      },
      py::arg("n_points") = 100, py::arg("n_curves") = 25,
      py::arg("sigma") = 0.1, py::arg("seed") = 0,
      py::arg("paper_values") = false);

  py::class_<SparseLinearModel>(m, "SparseLinearModel")
      .def_readonly("selected_features", &SparseLinearModel::selected_features)
      .def_readonly("coefficients", &SparseLinearModel::coefficients)
      .def_readonly("intercept", &SparseLinearModel::intercept)
      .def_readonly("cv_size", &SparseLinearModel::cv_size)
      .def_readonly("ridge_jitter", &SparseLinearModel::ridge_jitter)
      .def("predict", &SparseLinearModel::predict);

  m.def("oga_fit", &oga_fit, py::arg("inputs"), py::arg("target"),
        py::arg("cv_folds") = 5, py::arg("max_size") = 0,
        "Orthogonal greedy regression with cross-validated size");
  m.def("error_rate", &error_rate, py::arg("predicted"), py::arg("actual"));
  m.def("empirical_cdf", &empirical_cdf, py::arg("errors"), py::arg("alphas"));

  m.attr("__version__") = "0.1.0";
}
