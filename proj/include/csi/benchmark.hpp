#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 The csi-select Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "csi/metrics.hpp"
#include "csi/objectives.hpp"
#include "csi/optimize.hpp"
#include "csi/similarity.hpp"
#include "csi/synthgen.hpp"

namespace csi {

/// RBF bandwidth used by the benchmark, as a multiple of the median-heuristic sigma (our default).
inline constexpr double kDefaultBandwidthScale = 0.5;
inline constexpr double kDefaultBudgetFraction = 0.1;

/**
 * Seed layout: run r generates its dataset with seed derive_seed(seed, r);
 * the median-heuristic pair sample for that run uses derive_seed(run_seed, 4).
 */
struct BenchmarkConfig
{
  SyntheticSpec       spec{default_benchmark_spec()};
  std::uint64_t       seed{7};
  Index               runs{10};
  double              budget_fraction{kDefaultBudgetFraction};
  double              bandwidth_scale{kDefaultBandwidthScale};
  std::vector<Method> methods{all_methods()};
  ObjectiveSpec       params{};  // kind is overwritten per method
  bool                lazy{true};
};

struct BenchmarkRun
{
  Method             method;
  Index              run{0};
  std::uint64_t      seed{0};
  double             sigma{0.0};
  std::vector<Index> selected;
  GreedyTrace        trace;
  MetricsReport      metrics;
};

struct BenchmarkRow
{
  Method method;
  double minority_coverage_ratio{0.0};
  double outlier_rate{0.0};
  double kl_selected_vs_full{0.0};
  double kl_selected_vs_complement{0.0};
  double manifold_coverage_distance{0.0};
};

struct BenchmarkResult
{
  std::vector<BenchmarkRun> runs;  // method-major, then run
  std::vector<BenchmarkRow> rows;  // means over runs, in method order
};

inline Index budget_for(Index n, double fraction)
{
  auto const k = static_cast<Index>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  return std::max<Index>(k, 1);
}

inline BenchmarkResult run_benchmark(BenchmarkConfig const &cfg)
{
  if (cfg.runs < 1 || cfg.methods.empty())
  {
    throw config_error("InvalidConfig", "benchmark needs at least one run and one method");
  }
  if (!(cfg.budget_fraction > 0.0 && cfg.budget_fraction <= 1.0) || !(cfg.bandwidth_scale > 0.0))
  {
    throw config_error("InvalidConfig", "budget fraction must be in (0, 1] and bandwidth scale > 0");
  }
  validate(cfg.spec, true);

  std::vector<std::vector<BenchmarkRun>> per_method(cfg.methods.size());
  for (Index r = 0; r < cfg.runs; ++r)
  {
    SyntheticSpec spec = cfg.spec;
    spec.seed          = derive_seed(cfg.seed, r);
    auto const data    = generate(spec);
    double const sigma = cfg.bandwidth_scale * median_heuristic_sigma(data.embeddings, derive_seed(spec.seed, 4));
    auto const sim     = std::make_shared<SimilarityMatrix const>(rbf_kernel(data.embeddings, sigma));
    Index const k      = budget_for(data.size(), cfg.budget_fraction);

    for (Index m = 0; m < cfg.methods.size(); ++m)
    {
      ObjectiveSpec os = cfg.params;
      os.kind          = cfg.methods[m].kind;
      auto const obj   = make_objective(os, sim);
      GreedyOptions opt;
      opt.lazy    = cfg.lazy;
      auto result = greedy(obj, cfg.methods[m].mode, k, opt);

      BenchmarkRun run;
      run.method             = cfg.methods[m];
      run.run                = r;
      run.seed               = spec.seed;
      run.sigma              = sigma;
      run.metrics            = evaluate_run(data, result.selected);
      run.metrics.objective  = method_name(cfg.methods[m]);
      run.metrics.seed       = spec.seed;
      run.metrics.budget     = k;
      run.selected           = std::move(result.selected);
      run.trace              = std::move(result.trace);
      per_method[m].push_back(std::move(run));
    }
  }

  BenchmarkResult out;
  for (Index m = 0; m < cfg.methods.size(); ++m)
  {
    BenchmarkRow row;
    row.method     = cfg.methods[m];
    auto const cnt = static_cast<double>(per_method[m].size());
    for (auto &run : per_method[m])
    {
      row.minority_coverage_ratio += run.metrics.minority_coverage_ratio / cnt;
      row.outlier_rate += run.metrics.outlier_rate / cnt;
      row.kl_selected_vs_full += run.metrics.kl_selected_vs_full / cnt;
      row.kl_selected_vs_complement += run.metrics.kl_selected_vs_complement / cnt;
      row.manifold_coverage_distance += run.metrics.manifold_coverage_distance / cnt;
      out.runs.push_back(std::move(run));
    }
    out.rows.push_back(row);
  }
  return out;
}

/// One row per method with the five mean metrics, fixed six-decimal formatting.
inline std::string benchmark_csv(BenchmarkResult const &result)
{
  std::string out =
      "method,minority_coverage,outlier_rate,kl_selected_vs_full,kl_selected_vs_complement,coverage_distance\n";
  char buf[256];
  for (auto const &row : result.rows)
  {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", method_name(row.method).c_str(),
                  row.minority_coverage_ratio, row.outlier_rate, row.kl_selected_vs_full,
                  row.kl_selected_vs_complement, row.manifold_coverage_distance);
    out += buf;
  }
  return out;
}

}  // namespace csi
