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

#include <string>

#include <json.hpp>

#include "csi/metrics.hpp"
#include "csi/objectives.hpp"
#include "csi/optimize.hpp"
#include "csi/slices.hpp"
#include "csi/synthgen.hpp"

namespace csi {

using Json = nlohmann::ordered_json;

namespace detail {

template <typename T>
T json_get(Json const &j, char const *key, T fallback)
{
  if (!j.contains(key))
  {
    return fallback;
  }
  try
  {
    return j.at(key).get<T>();
  }
  catch (nlohmann::json::exception const &e)
  {
    throw config_error("InvalidSpec", std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline Json to_json(ObjectiveSpec const &s)
{
  Json j;
  j["kind"]   = std::string(kind_name(s.kind));
  j["lambda"] = s.lambda;
  j["alpha"]  = s.alpha ? Json(*s.alpha) : Json(nullptr);
  j["psi"]    = std::string(concave_name(s.psi));
  j["jitter"] = s.jitter;
  if (!s.coverage_path.empty())
  {
    j["coverage_path"] = s.coverage_path;
  }
  if (!s.features_path.empty())
  {
    j["features_path"] = s.features_path;
  }
  return j;
}

inline Json to_json(GreedyTrace const &t)
{
  Json steps = Json::array();
  for (auto const &s : t.steps)
  {
    steps.push_back({{"index", s.index}, {"gain", s.gain}, {"value", s.value}});
  }
  return {{"budget", t.budget},
          {"lazy", t.lazy},
          {"evaluations", t.evaluations},
          {"final_value", t.final_value()},
          {"steps", steps}};
}

inline GreedyTrace trace_from_json(Json const &j)
{
  GreedyTrace t;
  try
  {
    t.budget      = j.at("budget").get<Index>();
    t.lazy        = j.value("lazy", true);
    t.evaluations = j.value("evaluations", std::size_t{0});
    for (auto const &s : j.at("steps"))
    {
      t.steps.push_back({s.at("index").get<Index>(), s.at("gain").get<double>(), s.at("value").get<double>()});
    }
  }
  catch (nlohmann::json::exception const &e)
  {
    throw io_error(std::string("malformed trace JSON: ") + e.what());
  }
  return t;
}

inline Json to_json(CurvatureReport const &c)
{
  Json j;
  j["kappa_k"]            = c.kappa_k ? Json(*c.kappa_k) : Json(nullptr);
  j["kappa_global"]       = c.kappa_global;
  j["kappa_used"]         = c.kappa_used();
  j["source"]             = std::string(curvature_source_name(c.source));
  j["max_singleton"]      = c.max_singleton;
  j["epsilon"]            = c.epsilon;
  j["greedy_bound_slack"] = c.greedy_bound_slack;
  j["budget"]             = c.budget;
  j["skipped"]            = c.skipped;
  return j;
}

inline Json to_json(BoundReport const &b)
{
  auto opt = [](auto const &o) { return o ? Json(*o) : Json(nullptr); };
  return {{"greedy_value", b.greedy_value}, {"epsilon", b.epsilon},         {"slack", b.slack},
          {"optimum", opt(b.optimum)},      {"lower_bound", opt(b.lower_bound)}, {"ratio", opt(b.ratio)},
          {"holds", opt(b.holds)}};
}

inline Json to_json(MetricsReport const &m)
{
  return {{"minority_coverage_ratio", m.minority_coverage_ratio},
          {"tail_fraction_selected", m.tail_fraction_selected},
          {"outlier_rate", m.outlier_rate},
          {"kl_selected_vs_full", m.kl_selected_vs_full},
          {"kl_selected_vs_complement", m.kl_selected_vs_complement},
          {"manifold_coverage_distance", m.manifold_coverage_distance},
          {"selection_size", m.selection_size},
          {"ground_size", m.ground_size},
          {"objective", m.objective},
          {"seed", m.seed},
          {"budget", m.budget}};
}

inline MetricsReport metrics_from_json(Json const &j)
{
  MetricsReport m;
  try
  {
    m.minority_coverage_ratio    = j.at("minority_coverage_ratio").get<double>();
    m.tail_fraction_selected     = j.at("tail_fraction_selected").get<double>();
    m.outlier_rate               = j.at("outlier_rate").get<double>();
    m.kl_selected_vs_full        = j.at("kl_selected_vs_full").get<double>();
    m.kl_selected_vs_complement  = j.at("kl_selected_vs_complement").get<double>();
    m.manifold_coverage_distance = j.at("manifold_coverage_distance").get<double>();
    m.selection_size             = j.at("selection_size").get<Index>();
    m.ground_size                = j.at("ground_size").get<Index>();
    m.objective                  = j.value("objective", std::string{});
    m.seed                       = j.value("seed", std::uint64_t{0});
    m.budget                     = j.value("budget", Index{0});
  }
  catch (nlohmann::json::exception const &e)
  {
    throw io_error(std::string("malformed metrics JSON: ") + e.what());
  }
  return m;
}

inline Json to_json(SyntheticSpec const &s)
{
  Json clusters = Json::array();
  for (auto const &c : s.clusters)
  {
    clusters.push_back({{"size", c.size}, {"role", role_name(c.role)}});
  }
  return {{"clusters", clusters},
          {"dim", s.dim},
          {"cluster_std", s.cluster_std},
          {"center_spread", s.center_spread},
          {"min_center_gap", s.min_center_gap},
          {"n_outliers", s.n_outliers},
          {"outlier_mode", outlier_mode_name(s.outlier_mode)},
          {"outlier_scale", s.outlier_scale},
          {"central_radius_fraction", s.central_radius_fraction},
          {"seed", s.seed}};
}

/// Missing fields fall back to default_benchmark_spec(); the result is validated.
inline SyntheticSpec synthetic_spec_from_json(Json const &j)
{
  if (!j.is_object())
  {
    throw config_error("InvalidSpec", "synthetic spec must be a JSON object");
  }
  SyntheticSpec s = default_benchmark_spec();
  if (j.contains("clusters"))
  {
    if (!j.at("clusters").is_array())
    {
      throw config_error("InvalidSpec", "clusters must be an array");
    }
    s.clusters.clear();
    for (auto const &c : j.at("clusters"))
    {
      long long const size = detail::json_get<long long>(c, "size", 0);
      if (size < 1)
      {
        throw config_error("InvalidSpec", "cluster sizes must be >= 1");
      }
      s.clusters.push_back({static_cast<Index>(size), parse_role(detail::json_get<std::string>(c, "role", "head"))});
    }
  }
  long long const dim        = detail::json_get<long long>(j, "dim", static_cast<long long>(s.dim));
  long long const n_outliers = detail::json_get<long long>(j, "n_outliers", static_cast<long long>(s.n_outliers));
  if (dim < 1 || n_outliers < 0)
  {
    throw config_error("InvalidSpec", "dim must be >= 1 and n_outliers >= 0");
  }
  s.dim                     = static_cast<Index>(dim);
  s.n_outliers              = static_cast<Index>(n_outliers);
  s.cluster_std             = detail::json_get(j, "cluster_std", s.cluster_std);
  s.center_spread           = detail::json_get(j, "center_spread", s.center_spread);
  s.min_center_gap          = detail::json_get(j, "min_center_gap", s.min_center_gap);
  s.outlier_scale           = detail::json_get(j, "outlier_scale", s.outlier_scale);
  s.central_radius_fraction = detail::json_get(j, "central_radius_fraction", s.central_radius_fraction);
  s.seed                    = detail::json_get(j, "seed", s.seed);
  if (j.contains("outlier_mode"))
  {
    s.outlier_mode = parse_outlier_mode(detail::json_get<std::string>(j, "outlier_mode", ""));
  }
  validate(s);
  return s;
}

inline Json to_json(SlicePipelineOptions const &o)
{
  return {{"k_per_class", o.k_per_class},
          {"retention", {{"head", o.retention.head}, {"medium", o.retention.medium}, {"tail", o.retention.tail}}},
          {"rho_out", o.injection.rho_out},
          {"noise_frac", o.injection.noise_frac},
          {"shell_factor", o.injection.shell_factor},
          {"noise_scale", o.injection.noise_scale},
          {"seed", o.seed},
          {"stage_seeds",
           {{"kmeans", derive_seed(o.seed, 1)}, {"subsample", derive_seed(o.seed, 2)}, {"inject", derive_seed(o.seed, 3)}}}};
}

}  // namespace csi
