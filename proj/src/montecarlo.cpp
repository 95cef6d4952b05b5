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

#include "simreg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "simreg/parallel.hpp"
#include "simreg/rng.hpp"

namespace simreg {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Substream ids inside one dataset seed.
constexpr std::uint64_t kParamStream = 1;
constexpr std::uint64_t kGridStream = 2;
constexpr std::uint64_t kNoiseStreamBase = 3;
constexpr std::uint64_t kFreshGridStreamBase = 1u << 20;

DesignGrid draw_grid(std::uint64_t seed, std::uint64_t stream, int n) {
  SplitRng rng(seed, stream);
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (auto& x : pts) x = rng.uniform01();
  return DesignGrid(std::move(pts));
}

}  // namespace

AdmissibleFunction toy_reference() {
  return analytic_function(
      [](double x) { return 2.0 * (std::cos(kPi * x) + 1.0); },
      [](double x) { return -2.0 * kPi * std::sin(kPi * x); });
}

void ToySpec::validate() const {
  if (n_points < 10) throw ConfigError("ToySpec: n_points must be >= 10");
  if (n_curves < 1) throw ConfigError("ToySpec: n_curves must be >= 1");
  if (!(sigma >= 0.0)) throw ConfigError("ToySpec: sigma must be >= 0");
  box.validate();
  if (param_law.theta_lo > param_law.theta_hi ||
      param_law.lambda_lo > param_law.lambda_hi) {
    throw ConfigError("ToySpec: empty parameter law range");
  }
  // The law may exceed the box (draws get clamped) but must overlap it.
  if (param_law.theta_hi < box.theta_lo() ||
      param_law.theta_lo > box.theta_hi() ||
      param_law.lambda_hi < box.lambda_min ||
      param_law.lambda_lo > box.lambda_max) {
    throw ConfigError("ToySpec: parameter law does not intersect the box");
  }
}

SampledCurve sample_on(const AdmissibleFunction& f, const DesignGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f.value(grid.points()[i]);
  return SampledCurve(grid, std::move(v));
}

ToyDataset generate_toy(const ToySpec& spec) {
  spec.validate();
  const AdmissibleFunction g = toy_reference();

  SplitRng param_rng(spec.seed, kParamStream);
  std::vector<TransformParams> params(static_cast<std::size_t>(spec.n_curves));
  std::vector<bool> clamped(static_cast<std::size_t>(spec.n_curves), false);
  for (int j = 0; j < spec.n_curves; ++j) {
    TransformParams draw{
        param_rng.uniform(spec.param_law.theta_lo, spec.param_law.theta_hi),
        param_rng.uniform(spec.param_law.lambda_lo, spec.param_law.lambda_hi)};
    const TransformParams inside = spec.box.clamp(draw);
    clamped[j] = inside.theta != draw.theta || inside.lambda != draw.lambda;
    params[j] = inside;
  }

  DesignGrid shared = draw_grid(spec.seed, kGridStream, spec.n_points);

  PreimageOptions preimage;
  preimage.policy = MonotonePolicy::kAllow;

  std::vector<SampledCurve> curves;
  curves.reserve(params.size());
  for (int j = 0; j < spec.n_curves; ++j) {
    const DesignGrid grid =
        spec.shared_grid
            ? shared
            : draw_grid(spec.seed, kFreshGridStreamBase + j, spec.n_points);
    const SimilarityTransform t(params[j], g);
    SplitRng noise(spec.seed, kNoiseStreamBase + static_cast<std::uint64_t>(j));
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.points()[i];
      double v = 0.0;
      if (spec.value_model == ToyValueModel::kTransformedCurve) {
        v = t.ordinate(t.preimage(x, preimage));
      } else {
        v = t.ordinate(x);
      }
      values[i] = v + spec.sigma * noise.normal();
    }
    curves.emplace_back(grid, std::move(values));
  }

  ToyDataset out{g, shared, sample_on(g, shared), std::move(curves),
                 std::move(params), std::move(clamped)};
  return out;
}

namespace {

struct ReplicateSpec {
  TransformParams alpha_star;
  int n = 0;
  double sigma = 0.0;
  ParamBox box;
};

/// One dataset with a single curve at fixed alpha*, fully determined by the
/// derived seed.
ToyDataset replicate_dataset(const ReplicateSpec& r, std::uint64_t seed) {
  ToySpec spec;
  spec.n_points = r.n;
  spec.n_curves = 1;
  spec.sigma = r.sigma;
  spec.box = r.box;
  spec.seed = seed;
  spec.param_law = {r.alpha_star.theta, r.alpha_star.theta,
                    r.alpha_star.lambda, r.alpha_star.lambda};
  return generate_toy(spec);
}

struct ReplicateFit {
  bool ok = false;
  TransformParams alpha_hat;
  TransformParams alpha_hat_interp;
  double spacing = 0.0;
};

void check_failures(int failures, int replicates, const char* what) {
  if (failures * 20 > replicates) {  // > 5%
    throw NumericalError(std::string(what) +
                         ": more than 5% estimation failures (" +
                         std::to_string(failures) + "/" +
                         std::to_string(replicates) + ")");
  }
}

}  // namespace

std::vector<SweepPoint> run_consistency_sweep(const ToySpec& spec,
                                              const TransformParams& alpha_star,
                                              const std::vector<int>& n_list,
                                              int replicates, int threads) {
  if (replicates < 2) {
    throw ConfigError("run_consistency_sweep: need at least 2 replicates");
  }
  std::vector<SweepPoint> out;
  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  for (int n : ns) {
    ReplicateSpec rs{alpha_star, n, spec.sigma, spec.box};
    std::vector<std::optional<TransformParams>> fits(
        static_cast<std::size_t>(replicates));
    parallel_for(static_cast<std::size_t>(replicates), threads,
                 [&](std::size_t r) {
                   const std::uint64_t s = SplitRng::mix(
                       spec.seed, static_cast<std::uint64_t>(n), r);
                   const ToyDataset data = replicate_dataset(rs, s);
                   try {
                     RegistrationProblem p{data.curves[0], data.reference,
                                           spec.box, SolverOptions{},
                                           ReferenceMode::kExact};
                     const RegistrationResult res = estimate(p);
                     if (res.converged) fits[r] = res.alpha_hat;
                   } catch (const Error&) {
                     // counted below
                   }
                 });
    SweepPoint pt;
    pt.n = n;
    double st = 0.0, sl = 0.0;
    int good = 0;
    for (const auto& f : fits) {
      if (!f) continue;
      ++good;
      st += (f->theta - alpha_star.theta) * (f->theta - alpha_star.theta);
      sl += (f->lambda - alpha_star.lambda) * (f->lambda - alpha_star.lambda);
    }
    pt.failures = replicates - good;
    check_failures(pt.failures, replicates, "run_consistency_sweep");
    pt.rmse_theta = std::sqrt(st / good);
    pt.rmse_lambda = std::sqrt(sl / good);
    out.push_back(pt);
  }
  return out;
}

Mat2 plugin_gamma(const TransformParams& alpha_star,
                  const AdmissibleFunction& reference, double sigma2,
                  int quadrature_points) {
  PreimageOptions preimage;
  preimage.policy = MonotonePolicy::kAllow;
  Mat2 v = Mat2::zero();
  for (int k = 0; k < quadrature_points; ++k) {
    const double x = (k + 0.5) / quadrature_points;
    v += Mat2::outer(grad_transformed_value(alpha_star, x, reference, preimage));
  }
  v = v * (2.0 / quadrature_points);
  return v.inverse() * (2.0 * sigma2);
}

MonteCarloReport run_clt_check(const TransformParams& alpha_star, int n,
                               double sigma, int replicates,
                               std::uint64_t seed, int threads,
                               const ParamBox& box) {
  if (replicates < 8) {
    throw ConfigError("run_clt_check: need at least 8 replicates");
  }
  ReplicateSpec rs{alpha_star, n, sigma, box};
  std::vector<std::optional<TransformParams>> fits(
      static_cast<std::size_t>(replicates));
  parallel_for(static_cast<std::size_t>(replicates), threads,
               [&](std::size_t r) {
                 const std::uint64_t s = SplitRng::mix(seed, 17, r);
                 const ToyDataset data = replicate_dataset(rs, s);
                 try {
                   RegistrationProblem p{data.curves[0], data.reference, box,
                                         SolverOptions{},
                                         ReferenceMode::kExact};
                   const RegistrationResult res = estimate(p);
                   if (res.converged) fits[r] = res.alpha_hat;
                 } catch (const Error&) {
                 }
               });

  MonteCarloReport report;
  report.replicates = replicates;
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<std::array<double, 2>> deltas;
  for (const auto& f : fits) {
    if (!f) continue;
    deltas.push_back({root_n * (f->theta - alpha_star.theta),
                      root_n * (f->lambda - alpha_star.lambda)});
    report.estimates.push_back({f->theta, f->lambda});
  }
  report.failures = replicates - static_cast<int>(deltas.size());
  check_failures(report.failures, replicates, "run_clt_check");

  const double m = static_cast<double>(deltas.size());
  std::array<double, 2> mean{0.0, 0.0};
  for (const auto& d : deltas) {
    mean[0] += d[0];
    mean[1] += d[1];
  }
  mean[0] /= m;
  mean[1] /= m;

  Mat2 cov = Mat2::zero();
  std::array<double, 2> m2{0.0, 0.0}, m3{0.0, 0.0}, m4{0.0, 0.0};
  for (const auto& d : deltas) {
    const double c0 = d[0] - mean[0];
    const double c1 = d[1] - mean[1];
    cov += Mat2{c0 * c0, c0 * c1, c1 * c0, c1 * c1};
    m2[0] += c0 * c0;
    m3[0] += c0 * c0 * c0;
    m4[0] += c0 * c0 * c0 * c0;
    m2[1] += c1 * c1;
    m3[1] += c1 * c1 * c1;
    m4[1] += c1 * c1 * c1 * c1;
  }
  cov = cov * (1.0 / (m - 1.0));
  report.empirical_cov = cov;
  for (int c = 0; c < 2; ++c) {
    m2[c] /= m;
    m3[c] /= m;
    m4[c] /= m;
    const double sd = std::sqrt(m2[c]);
    report.skewness[c] = sd > 0.0 ? m3[c] / (sd * sd * sd) : 0.0;
    report.excess_kurtosis[c] =
        m2[c] > 0.0 ? m4[c] / (m2[c] * m2[c]) - 3.0 : 0.0;
  }

  const AdmissibleFunction g = toy_reference();
  report.gamma_reference = plugin_gamma(alpha_star, g, sigma * sigma);
  const double denom = report.gamma_reference.frobenius();
  report.frobenius_rel_err =
      denom > 0.0
          ? frobenius_distance(report.empirical_cov, report.gamma_reference) /
                denom
          : report.empirical_cov.frobenius();
  return report;
}

std::vector<std::pair<int, double>> run_interp_gap_check(
    const TransformParams& alpha_star, const std::vector<int>& n_list,
    double sigma, int replicates, std::uint64_t seed, int threads,
    const ParamBox& box) {
  if (replicates < 2) {
    throw ConfigError("run_interp_gap_check: need at least 2 replicates");
  }
  std::vector<std::pair<int, double>> out;
  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  for (int n : ns) {
    ReplicateSpec rs{alpha_star, n, sigma, box};
    std::vector<std::optional<double>> gaps(
        static_cast<std::size_t>(replicates));
    parallel_for(
        static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
          const std::uint64_t s =
              SplitRng::mix(seed, 31 + static_cast<std::uint64_t>(n), r);
          const ToyDataset data = replicate_dataset(rs, s);
          try {
            RegistrationProblem p{data.curves[0], data.reference, box,
                                  SolverOptions{}, ReferenceMode::kExact};
            const RegistrationResult exact = estimate(p);
            const RegistrationResult interp = estimate_interpolated(
                data.curves[0], data.reference_samples, box, SolverOptions{});
            if (exact.converged && interp.converged) {
              const double dt =
                  interp.alpha_hat.theta - exact.alpha_hat.theta;
              const double dl =
                  interp.alpha_hat.lambda - exact.alpha_hat.lambda;
              gaps[r] = std::sqrt(static_cast<double>(n)) *
                        std::sqrt(dt * dt + dl * dl);
            }
          } catch (const Error&) {
          }
        });
    double sum = 0.0;
    int good = 0;
    for (const auto& gp : gaps) {
      if (!gp) continue;
      sum += *gp;
      ++good;
    }
    check_failures(replicates - good, replicates, "run_interp_gap_check");
    out.emplace_back(n, sum / good);
  }
  return out;
}

std::vector<SpacingRow> run_spacing_check(const std::vector<int>& n_list,
                                          const std::vector<double>& epsilons,
                                          int replicates, std::uint64_t seed) {
  if (replicates < 1) {
    throw ConfigError("run_spacing_check: need at least 1 replicate");
  }
  std::vector<SpacingRow> rows;
  for (int n : n_list) {
    std::vector<double> max_gaps(static_cast<std::size_t>(replicates));
    for (int r = 0; r < replicates; ++r) {
      const DesignGrid grid = draw_grid(
          SplitRng::mix(seed, 53 + static_cast<std::uint64_t>(n), r), 0, n);
      max_gaps[r] = max_spacing(grid);
    }
    for (double eps : epsilons) {
      SpacingRow row;
      row.n = n;
      row.epsilon = eps;
      row.bound = spacing_tail_bound(n, eps);
      int hits = 0;
      for (double mg : max_gaps) {
        if (mg >= eps) ++hits;
      }
      row.frequency = static_cast<double>(hits) / replicates;
      row.slack =
          3.0 * std::sqrt(row.frequency * (1.0 - row.frequency) / replicates);
      row.ok = row.frequency <= row.bound + row.slack;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace simreg
