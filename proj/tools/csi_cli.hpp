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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csi/benchmark.hpp"
#include "csi/io.hpp"
#include "csi/metrics.hpp"
#include "csi/objectives.hpp"
#include "csi/optimize.hpp"
#include "csi/serialization.hpp"
#include "csi/similarity.hpp"
#include "csi/slices.hpp"
#include "csi/synthgen.hpp"

namespace csi::cli {

namespace fs = std::filesystem;

inline constexpr char const *kToolVersion = "0.1.0";

enum ExitCode : int
{
  kExitOk        = 0,
  kExitConfig    = 2,
  kExitNumerical = 3,
  kExitIo        = 4
};

inline int exit_code_for(ErrorKind kind)
{
  switch (kind)
  {
  case ErrorKind::Config:
    return kExitConfig;
  case ErrorKind::Numerical:
    return kExitNumerical;
  case ErrorKind::Io:
    return kExitIo;
  }
  return 1;
}

inline std::vector<Method> parse_method_list(std::string const &list)
{
  std::vector<Method> out;
  std::stringstream   ss(list);
  std::string         item;
  while (std::getline(ss, item, ','))
  {
    if (!item.empty())
    {
      out.push_back(parse_method(item));
    }
  }
  if (out.empty())
  {
    throw config_error("UnknownObjective", "no objective given");
  }
  return out;
}

inline void write_json(fs::path const &path, Json const &j)
{
  write_text(path, j.dump(2) + "\n");
}

/// Parameters shared by every command that builds objectives.
struct ObjectiveFlags
{
  double                      lambda{0.5};
  std::optional<double>       alpha;
  std::string                 psi{"sqrt"};
  double                      jitter{1.0};
  std::optional<std::string>  coverage;
  std::optional<std::string>  features;

  void attach(CLI::App *cmd)
  {
    cmd->add_option("--lambda", lambda, "graph-cut diversity weight (our default: 0.5)");
    cmd->add_option("--alpha", alpha, "saturation threshold (our default: 0.25 x mean row sum of S)");
    cmd->add_option("--psi", psi, "feature-based concave function: sqrt, log1p, identity (our default: sqrt)");
    cmd->add_option("--jitter", jitter, "log-det diagonal jitter (our default: 1.0)");
    cmd->add_option("--coverage", coverage, "PSC probability matrix, CSV or .bin (our default: p = S)");
    cmd->add_option("--features", features, "feature matrix with one row per point, CSV or .bin (our default: x = S)");
  }

  ObjectiveSpec spec() const
  {
    ObjectiveSpec s;
    s.lambda = lambda;
    s.alpha  = alpha;
    s.psi    = parse_concave(psi);
    s.jitter = jitter;
    if (coverage)
    {
      s.coverage_path = *coverage;
    }
    if (features)
    {
      s.features_path = *features;
    }
    return s;
  }

  std::shared_ptr<Matrix const> coverage_matrix() const
  {
    return coverage ? std::make_shared<Matrix const>(read_matrix_file(*coverage)) : nullptr;
  }

  std::shared_ptr<Matrix const> feature_matrix() const
  {
    return features ? std::make_shared<Matrix const>(read_matrix_file(*features)) : nullptr;
  }
};

/// Input points plus whatever evaluation metadata the file carried.
struct LoadedInput
{
  std::optional<Matrix>           embeddings;
  std::shared_ptr<SimilarityMatrix const> similarity;
  std::optional<SyntheticDataset> synthetic;
  std::optional<SlicedDataset>    sliced;
  std::optional<std::vector<int>> labels;
  std::string                     format;

  Index size() const
  {
    return similarity ? similarity->size() : embeddings->rows();
  }

  std::optional<EvaluationView> view() const
  {
    if (synthetic)
    {
      return evaluation_view(*synthetic);
    }
    if (sliced)
    {
      return evaluation_view(*sliced);
    }
    return std::nullopt;
  }
};

inline LoadedInput load_dataset(fs::path const &path)
{
  auto const  table = read_csv(path);
  LoadedInput in;
  if (is_synthetic_table(table))
  {
    in.synthetic  = synthetic_from_table(table, path.string());
    in.embeddings = in.synthetic->embeddings;
    in.format     = "synthetic";
  }
  else if (is_sliced_table(table))
  {
    in.sliced     = sliced_from_table(table, path.string());
    in.embeddings = in.sliced->embeddings;
    in.labels     = in.sliced->class_label;
    in.format     = "sliced";
  }
  else
  {
    auto labeled  = read_labeled_embeddings_csv(path);
    in.embeddings = std::move(labeled.embeddings);
    in.labels     = std::move(labeled.labels);
    in.format     = "embeddings";
  }
  return in;
}

/// How the similarity matrix is derived from embeddings.
struct KernelFlags
{
  std::optional<double>      sigma;
  double                     bandwidth_scale{kDefaultBandwidthScale};
  bool                       normalize{false};
  std::optional<std::string> cache_dir;

  void attach(CLI::App *cmd)
  {
    cmd->add_option("--sigma", sigma, "RBF bandwidth (our default: bandwidth-scale x median heuristic)");
    cmd->add_option("--bandwidth-scale", bandwidth_scale, "multiplier on the median-heuristic sigma (our default: 0.5)");
    cmd->add_flag("--normalize", normalize, "L2-normalize embedding rows before the kernel");
    cmd->add_option("--cache-dir", cache_dir, "directory for cached similarity matrices keyed by content hash");
  }

  /// Returns the sigma actually used.
  double build(LoadedInput &in, std::uint64_t seed) const
  {
    if (in.similarity)
    {
      return 0.0;
    }
    Matrix e = normalize ? l2_normalize_rows(*in.embeddings) : *in.embeddings;
    double const s = sigma ? *sigma : bandwidth_scale * median_heuristic_sigma(e, derive_seed(seed, 4));
    std::optional<fs::path> dir;
    if (cache_dir)
    {
      dir = fs::path(*cache_dir);
    }
    in.similarity = std::make_shared<SimilarityMatrix const>(cached_rbf_kernel(e, s, dir));
    return s;
  }

  Json to_json(double used_sigma) const
  {
    return {{"sigma", used_sigma},
            {"sigma_source", sigma ? "explicit" : "median_heuristic"},
            {"bandwidth_scale", bandwidth_scale},
            {"normalize", normalize},
            {"cache_dir", cache_dir ? Json(*cache_dir) : Json(nullptr)}};
  }
};

inline Index resolve_budget(std::optional<Index> k, std::optional<double> fraction, Index n, double fallback_fraction)
{
  if (k && fraction)
  {
    throw config_error("InvalidBudget", "give either --k or --fraction, not both");
  }
  if (k)
  {
    return *k;
  }
  double const f = fraction ? *fraction : fallback_fraction;
  if (!(f > 0.0 && f <= 1.0))
  {
    throw config_error("InvalidBudget", "fraction must lie in (0, 1]");
  }
  return budget_for(n, f);
}

inline Json selection_metrics(LoadedInput const &in, std::vector<Index> const &selected, Method m, std::uint64_t seed)
{
  auto view = in.view();
  if (!view || selected.empty())
  {
    return nullptr;
  }
  if (std::count(view->role.begin(), view->role.end(), Role::Tail) == 0)
  {
    return nullptr;
  }
  auto report      = evaluate_run(*view, selected);
  report.objective = method_name(m);
  report.seed      = seed;
  return to_json(report);
}

// ---------------------------------------------------------------- gen-synthetic

struct GenSyntheticCmd
{
  bool                         use_default{false};
  std::optional<std::string>   spec_path;
  std::optional<std::uint64_t> seed;
  std::string                  out_dir;

  void attach(CLI::App &app)
  {
    auto *cmd = app.add_subcommand("gen-synthetic", "generate a Gaussian-cluster dataset with head/medium/tail roles");
    auto *def = cmd->add_flag("--default", use_default,
                              "use the built-in configuration: 3x150 head, 3x50 medium, 3x15 tail, 30 outliers, 2-D");
    cmd->add_option("--spec", spec_path, "JSON spec; missing fields take the built-in values")->excludes(def);
    cmd->add_option("--seed", seed, "override the spec seed (our default: 7)");
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->callback([this] { run(); });
  }

  void run() const
  {
    SyntheticSpec spec = default_benchmark_spec();
    if (spec_path)
    {
      Json j;
      try
      {
        j = Json::parse(read_text(*spec_path));
      }
      catch (nlohmann::json::parse_error const &e)
      {
        throw config_error("InvalidSpec", std::string("spec is not valid JSON: ") + e.what());
      }
      spec = synthetic_spec_from_json(j);
    }
    if (seed)
    {
      spec.seed = *seed;
    }
    auto const data = generate(spec);
    fs::path   dir(out_dir);
    write_synthetic_csv(dir / "dataset.csv", data);
    Json prov{{"command", "gen-synthetic"},
              {"tool_version", kToolVersion},
              {"spec", to_json(spec)},
              {"points", data.size()}};
    write_json(dir / "dataset.json", prov);
  }
};

// ---------------------------------------------------------------- select

struct SelectCmd
{
  std::optional<std::string> dataset;
  std::optional<std::string> embeddings;
  std::optional<std::string> similarity;
  std::string                objectives{"flci"};
  std::optional<Index>       k;
  std::optional<double>      fraction;
  std::uint64_t              seed{7};
  bool                       naive{false};
  bool                       stop_on_negative{false};
  bool                       brute_force{false};
  std::string                out_dir;
  ObjectiveFlags             objective_flags;
  KernelFlags                kernel;
  std::ostream              *log{&std::cout};

  void attach(CLI::App &app)
  {
    auto *cmd = app.add_subcommand("select", "greedy subset selection with trace, curvature and bound reports");
    auto *d   = cmd->add_option("--dataset", dataset, "CSV from gen-synthetic/split or plain embeddings CSV");
    auto *e   = cmd->add_option("--embeddings", embeddings, "embeddings CSV (metadata columns ignored)");
    auto *s   = cmd->add_option("--similarity", similarity, "precomputed similarity matrix, CSV or .bin");
    d->excludes(e)->excludes(s);
    e->excludes(s);
    cmd->add_option("--objective,--objectives", objectives,
                    "comma-separated list from fl, gc, logdet, psc, sc, fb and their ci variants (our default: flci)");
    cmd->add_option("--k", k, "budget");
    cmd->add_option("--fraction", fraction, "budget as a fraction of n (our default: 0.1)");
    cmd->add_option("--seed", seed, "master seed for sampled bandwidth estimation (our default: 7)");
    cmd->add_flag("--naive", naive, "plain greedy instead of lazy greedy");
    cmd->add_flag("--stop-on-negative", stop_on_negative, "stop when the best gain is negative (our default: off)");
    cmd->add_flag("--brute-force", brute_force, "also compute the exact optimum when the instance is small");
    cmd->add_option("--out", out_dir, "output directory")->required();
    objective_flags.attach(cmd);
    kernel.attach(cmd);
    cmd->callback([this] { run(); });
  }

  void run()
  {
    LoadedInput in;
    std::string source;
    if (dataset)
    {
      in     = load_dataset(*dataset);
      source = *dataset;
    }
    else if (embeddings)
    {
      in.embeddings = read_embeddings_csv(*embeddings);
      in.format     = "embeddings";
      source        = *embeddings;
    }
    else if (similarity)
    {
      in.similarity = std::make_shared<SimilarityMatrix const>(read_matrix_file(*similarity));
      in.format     = "similarity";
      source        = *similarity;
    }
    else
    {
      throw config_error("MissingInput", "one of --dataset, --embeddings or --similarity is required");
    }
    auto const methods = parse_method_list(objectives);
    auto const spec    = objective_flags.spec();
    double const sigma = kernel.build(in, seed);
    Index const n      = in.size();
    Index const budget = resolve_budget(k, fraction, n, kDefaultBudgetFraction);
    auto const coverage = objective_flags.coverage_matrix();
    auto const features = objective_flags.feature_matrix();

    fs::path dir(out_dir);
    Json     runs = Json::array();
    for (Method m : methods)
    {
      ObjectiveSpec os = spec;
      os.kind          = m.kind;
      auto const obj   = make_objective(os, in.similarity, coverage, features);
      GreedyOptions opt;
      opt.lazy             = !naive;
      opt.stop_on_negative = stop_on_negative;
      auto const result    = greedy(obj, m.mode, budget, opt);
      auto const name      = method_name(m);

      auto const curvature = curvature_report(obj, budget);
      std::optional<double> optimum;
      if (brute_force && count_subsets_up_to(n, budget) <= kBruteForceLimit)
      {
        optimum = brute_force_max(obj, m.mode, budget).value;
      }
      auto const bounds = greedy_bounds(result.trace, curvature, optimum);

      write_indices(dir / (name + ".selected.txt"), result.selected);
      write_json(dir / (name + ".trace.json"), to_json(result.trace));
      Json curv      = to_json(curvature);
      curv["bounds"] = to_json(bounds);
      write_json(dir / (name + ".curvature.json"), curv);
      Json metrics = selection_metrics(in, result.selected, m, seed);
      if (!metrics.is_null())
      {
        write_json(dir / (name + ".metrics.json"), metrics);
      }
      *log << name << ": selected " << result.selected.size() << ", value " << format_double(result.trace.final_value())
           << "\n";
      runs.push_back({{"objective", name}, {"selected", result.selected.size()}, {"value", result.trace.final_value()}});
    }

    Json objective = to_json(spec);
    objective.erase("kind");
    Json prov{{"command", "select"},
              {"tool_version", kToolVersion},
              {"input", {{"path", source}, {"format", in.format}, {"points", n}}},
              {"objectives", objectives},
              {"parameters", objective},
              {"kernel", in.format == "similarity" ? Json(nullptr) : kernel.to_json(sigma)},
              {"budget", budget},
              {"seed", seed},
              {"lazy", !naive},
              {"stop_on_negative", stop_on_negative},
              {"runs", runs}};
    write_json(dir / "provenance.json", prov);
  }
};

// ---------------------------------------------------------------- benchmark

struct BenchmarkCmd
{
  std::optional<std::string> spec_path;
  std::uint64_t              seed{7};
  Index                      runs{10};
  double                     budget_fraction{kDefaultBudgetFraction};
  double                     bandwidth_scale{kDefaultBandwidthScale};
  std::string                objectives;
  bool                       naive{false};
  std::string                out_dir;
  ObjectiveFlags             objective_flags;

  void attach(CLI::App &app)
  {
    auto *cmd = app.add_subcommand("benchmark", "objective x seed sweep on synthetic data; writes table.csv");
    cmd->add_option("--spec", spec_path, "synthetic spec JSON (our default: built-in configuration)");
    cmd->add_option("--seed", seed, "master seed; run r uses derive_seed(seed, r) (our default: 7)");
    cmd->add_option("--runs", runs, "number of seeds (our default: 10)");
    cmd->add_option("--budget-fraction", budget_fraction, "budget as floor(fraction x n) (our default: 0.1)");
    cmd->add_option("--bandwidth-scale", bandwidth_scale, "multiplier on the median-heuristic sigma (our default: 0.5)");
    cmd->add_option("--objectives", objectives, "comma-separated subset (our default: all twelve)");
    cmd->add_flag("--naive", naive, "plain greedy instead of lazy greedy");
    cmd->add_option("--out", out_dir, "output directory")->required();
    objective_flags.attach(cmd);
    cmd->callback([this] { run(); });
  }

  void run() const
  {
    BenchmarkConfig cfg;
    if (spec_path)
    {
      Json j;
      try
      {
        j = Json::parse(read_text(*spec_path));
      }
      catch (nlohmann::json::parse_error const &e)
      {
        throw config_error("InvalidSpec", std::string("spec is not valid JSON: ") + e.what());
      }
      cfg.spec = synthetic_spec_from_json(j);
    }
    cfg.seed            = seed;
    cfg.runs            = runs;
    cfg.budget_fraction = budget_fraction;
    cfg.bandwidth_scale = bandwidth_scale;
    if (!objectives.empty())
    {
      cfg.methods = parse_method_list(objectives);
    }
    cfg.params = objective_flags.spec();
    if (objective_flags.coverage || objective_flags.features)
    {
      throw config_error("InvalidConfig", "benchmark regenerates data per seed; --coverage/--features do not apply");
    }
    cfg.lazy = !naive;

    auto const result = run_benchmark(cfg);
    fs::path   dir(out_dir);
    write_text(dir / "table.csv", benchmark_csv(result));
    for (auto const &run : result.runs)
    {
      Json j{{"objective", method_name(run.method)},
             {"run", run.run},
             {"seed", run.seed},
             {"sigma", run.sigma},
             {"selected", run.selected},
             {"trace", to_json(run.trace)},
             {"metrics", to_json(run.metrics)}};
      write_json(dir / "runs" / (method_name(run.method) + "_run" + std::to_string(run.run) + ".json"), j);
    }
    Json method_names = Json::array();
    for (Method m : cfg.methods)
    {
      method_names.push_back(method_name(m));
    }
    Json params = to_json(cfg.params);
    params.erase("kind");
    Json run_seeds = Json::array();
    for (Index r = 0; r < cfg.runs; ++r)
    {
      run_seeds.push_back(derive_seed(cfg.seed, r));
    }
    write_json(dir / "provenance.json", {{"command", "benchmark"},
                                         {"tool_version", kToolVersion},
                                         {"spec", to_json(cfg.spec)},
                                         {"seed", cfg.seed},
                                         {"run_seeds", run_seeds},
                                         {"runs", cfg.runs},
                                         {"budget_fraction", cfg.budget_fraction},
                                         {"bandwidth_scale", cfg.bandwidth_scale},
                                         {"objectives", method_names},
                                         {"parameters", params},
                                         {"lazy", cfg.lazy}});
  }
};

// ---------------------------------------------------------------- split

struct SplitCmd
{
  std::optional<std::string> dataset;
  std::string                objective{"flci"};
  std::optional<Index>       k;
  std::optional<double>      fraction;
  bool                       slice{false};
  SlicePipelineOptions       pipeline;
  std::string                out_dir;
  ObjectiveFlags             objective_flags;
  KernelFlags                kernel;

  void attach(CLI::App &app)
  {
    auto *cmd = app.add_subcommand("split", "select a k-sized split and its complement");
    cmd->add_option("--dataset,--embeddings", dataset, "embeddings CSV, optionally with a label/class column")
        ->required();
    cmd->add_option("--objective", objective, "one objective name (our default: flci)");
    cmd->add_option("--k", k, "split size");
    cmd->add_option("--fraction", fraction, "split size as a fraction of n (our default: 0.2)");
    cmd->add_flag("--slice", slice, "run the hidden-slice pipeline on labelled input first");
    cmd->add_option("--k-per-class", pipeline.k_per_class, "k-means slices per class (our default: 5)");
    cmd->add_option("--keep-head", pipeline.retention.head, "head retention probability (reference default: 1.0)");
    cmd->add_option("--keep-medium", pipeline.retention.medium, "medium retention probability (reference default: 0.5)");
    cmd->add_option("--keep-tail", pipeline.retention.tail, "tail retention probability (reference default: 0.15)");
    cmd->add_option("--rho-out", pipeline.injection.rho_out, "fraction of injected shell outliers (our default: 0.05)");
    cmd->add_option("--noise-frac", pipeline.injection.noise_frac, "fraction of perturbed points (our default: 0.05)");
    cmd->add_option("--seed", pipeline.seed, "master seed for the pipeline and bandwidth sampling (our default: 7)");
    cmd->add_option("--out", out_dir, "output directory")->required();
    objective_flags.attach(cmd);
    kernel.attach(cmd);
    pipeline.seed = 7;
    cmd->callback([this] { run(); });
  }

  void run()
  {
    LoadedInput in     = load_dataset(*dataset);
    fs::path    dir(out_dir);
    if (slice)
    {
      if (!in.labels)
      {
        throw config_error("MissingLabels", "--slice needs a label or class column");
      }
      auto processed = run_slice_pipeline(*in.embeddings, *in.labels, pipeline);
      write_sliced_csv(dir / "sliced.csv", processed);
      in.embeddings = processed.embeddings;
      in.sliced     = std::move(processed);
      in.synthetic.reset();
      in.format = "sliced";
    }
    Method const m = parse_method(objective);
    double const sigma = kernel.build(in, pipeline.seed);
    Index const  n     = in.size();
    Index const  budget = resolve_budget(k, fraction, n, 0.2);
    ObjectiveSpec os   = objective_flags.spec();
    os.kind            = m.kind;
    auto const obj     = make_objective(os, in.similarity, objective_flags.coverage_matrix(),
                                        objective_flags.feature_matrix());
    auto const result  = greedy(obj, m.mode, budget);
    auto const rest    = complement_of(result.selected, n);
    write_indices(dir / "split.txt", result.selected);
    write_indices(dir / "complement.txt", rest);
    Json metrics = selection_metrics(in, result.selected, m, pipeline.seed);
    if (!metrics.is_null())
    {
      write_json(dir / "metrics.json", metrics);
    }
    write_json(dir / "provenance.json", {{"command", "split"},
                                         {"tool_version", kToolVersion},
                                         {"input", {{"path", *dataset}, {"format", in.format}, {"points", n}}},
                                         {"objective", method_name(m)},
                                         {"parameters", to_json(os)},
                                         {"kernel", kernel.to_json(sigma)},
                                         {"budget", budget},
                                         {"pipeline", slice ? to_json(pipeline) : Json(nullptr)},
                                         {"metrics_attached", !metrics.is_null()}});
  }
};

// ---------------------------------------------------------------- verify-trace

inline constexpr double kTraceTolerance = 1e-9;

struct VerifyTraceCmd
{
  std::string                trace_path;
  std::optional<std::string> selected_path;
  std::ostream              *log{&std::cout};

  void attach(CLI::App &app)
  {
    auto *cmd = app.add_subcommand("verify-trace", "check that a trace telescopes and matches its index file");
    cmd->add_option("--trace", trace_path, "trace JSON written by select")->required();
    cmd->add_option("--selected", selected_path, "index file to compare against the trace");
    cmd->callback([this] { run(); });
  }

  void run() const
  {
    Json j;
    try
    {
      j = Json::parse(read_text(trace_path));
    }
    catch (nlohmann::json::parse_error const &e)
    {
      throw io_error(std::string("trace is not valid JSON: ") + e.what());
    }
    auto const   trace = trace_from_json(j);
    double const err   = trace_telescoping_error(trace);
    if (err > kTraceTolerance)
    {
      throw numerical_error("TraceMismatch", "telescoping error " + format_double(err));
    }
    std::vector<Index> order;
    for (auto const &s : trace.steps)
    {
      order.push_back(s.index);
    }
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    {
      throw numerical_error("TraceMismatch", "trace selects an index twice");
    }
    if (selected_path && read_indices(*selected_path) != order)
    {
      throw numerical_error("TraceMismatch", "index file differs from the trace");
    }
    *log << "trace ok: " << trace.steps.size() << " steps, telescoping error " << format_double(err) << "\n";
  }
};

/// Entry point shared by the executable and the tests.
inline int run(int argc, char const *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
  CLI::App app{"Complement-aware submodular subset selection", "csi-select"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GenSyntheticCmd gen;
  SelectCmd       select;
  BenchmarkCmd    bench;
  SplitCmd        split;
  VerifyTraceCmd  verify;
  select.log = &out;
  verify.log = &out;
  gen.attach(app);
  select.attach(app);
  bench.attach(app);
  split.attach(app);
  verify.attach(app);

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::CallForHelp const &e)
  {
    return app.exit(e, out, err);
  }
  catch (CLI::CallForAllHelp const &e)
  {
    return app.exit(e, out, err);
  }
  catch (CLI::CallForVersion const &e)
  {
    return app.exit(e, out, err);
  }
  catch (CLI::ParseError const &e)
  {
    app.exit(e, out, err);
    return kExitConfig;
  }
  catch (Error const &e)
  {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  catch (fs::filesystem_error const &e)
  {
    err << "error: Io: " << e.what() << "\n";
    return kExitIo;
  }
  catch (std::exception const &e)
  {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

}  // namespace csi::cli
