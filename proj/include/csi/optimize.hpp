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
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "csi/csi.hpp"
#include "csi/objectives.hpp"

namespace csi {

/// Maximize the base function f, or its complement information I_f(A; V\A).
enum class Mode
{
  Base,
  Complement
};

/// One of the twelve selectable methods: a base kind maximized as-is or through its CSI.
struct Method
{
  Kind kind{Kind::FacilityLocation};
  Mode mode{Mode::Base};

  bool operator==(Method const &) const = default;
};

inline std::string method_name(Method m)
{
  return std::string(kind_name(m.kind)) + (m.mode == Mode::Complement ? "ci" : "");
}

inline Method parse_method(std::string_view name)
{
  for (Kind k : kAllKinds)
  {
    auto const base = kind_name(k);
    if (name == base)
    {
      return {k, Mode::Base};
    }
    if (name.size() == base.size() + 2 && name.substr(0, base.size()) == base && name.substr(base.size()) == "ci")
    {
      return {k, Mode::Complement};
    }
  }
  throw config_error("UnknownObjective", "unknown objective '" + std::string(name) +
                                             "' (expected fl, gc, logdet, psc, sc, fb with optional ci suffix)");
}

/// fl, flci, gc, gcci, logdet, logdetci, psc, pscci, sc, scci, fb, fbci.
inline std::vector<Method> all_methods()
{
  std::vector<Method> out;
  for (Kind k : kAllKinds)
  {
    out.push_back({k, Mode::Base});
    out.push_back({k, Mode::Complement});
  }
  return out;
}

struct GreedyStep
{
  Index  index{0};
  double gain{0.0};
  double value{0.0};  // objective value after the commit

  bool operator==(GreedyStep const &) const = default;
};

struct GreedyTrace
{
  std::vector<GreedyStep> steps;
  Index                   budget{0};
  bool                    lazy{true};
  std::size_t             evaluations{0};
  double                  wall_seconds{0.0};

  double final_value() const
  {
    return steps.empty() ? 0.0 : steps.back().value;
  }
};

struct GreedyOptions
{
  bool lazy{true};
  bool stop_on_negative{false};
};

struct GreedyResult
{
  std::vector<Index> selected;
  GreedyTrace        trace;
};

namespace detail {

inline double gain_of(DualSelectionState const &state, Mode mode, Index e)
{
  return mode == Mode::Base ? state.forward_gain(e) : state.csi_gain(e);
}

inline double value_of(DualSelectionState const &state, Mode mode)
{
  return mode == Mode::Base ? state.forward_value() : state.csi_value();
}

inline void check_budget(Index k, Index n)
{
  if (k == 0)
  {
    throw config_error("InvalidBudget", "budget must be at least 1");
  }
  if (k > n)
  {
    throw config_error("BudgetExceedsGroundSet",
                       "budget " + std::to_string(k) + " exceeds ground set size " + std::to_string(n));
  }
}

struct HeapEntry
{
  double gain;
  Index  index;
  Index  stamp;
};

// Max-heap on gain; equal gains pop the lower index first.
struct HeapOrder
{
  bool operator()(HeapEntry const &a, HeapEntry const &b) const
  {
    if (a.gain != b.gain)
    {
      return a.gain < b.gain;
    }
    return a.index > b.index;
  }
};

inline void naive_run(DualSelectionState &state, Mode mode, Index k, GreedyOptions const &options,
                      GreedyResult &out)
{
  while (state.selected().size() < k && !state.remaining().empty())
  {
    Index  best      = state.remaining().front();
    double best_gain = -std::numeric_limits<double>::infinity();
    bool   first     = true;
    for (Index e : state.remaining())
    {
      double const g = gain_of(state, mode, e);
      ++out.trace.evaluations;
      if (first || g > best_gain)
      {
        best      = e;
        best_gain = g;
        first     = false;
      }
    }
    if (options.stop_on_negative && best_gain < 0.0)
    {
      break;
    }
    state.commit(best);
    out.selected.push_back(best);
    out.trace.steps.push_back({best, best_gain, value_of(state, mode)});
  }
}

/// Window below a fresh head inside which stale bounds are re-checked. Rounding
/// can push a refreshed gain slightly above its earlier value even though the
/// objective is submodular.
inline double stale_window(double gain)
{
  return std::isfinite(gain) ? 1e-9 * std::max(1.0, std::abs(gain)) : 0.0;
}

inline void lazy_run(DualSelectionState &state, Mode mode, Index k, GreedyOptions const &options,
                     GreedyResult &out)
{
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap;
  for (Index e : state.remaining())
  {
    heap.push({gain_of(state, mode, e), e, 0});
    ++out.trace.evaluations;
  }
  Index                  round = 0;
  std::vector<HeapEntry> window;
  while (state.selected().size() < k && !heap.empty())
  {
    HeapEntry top = heap.top();
    heap.pop();
    if (top.stamp != round)
    {
      top.gain  = gain_of(state, mode, top.index);
      top.stamp = round;
      ++out.trace.evaluations;
      heap.push(top);
      continue;
    }
    // Fresh head: refresh every stale entry whose bound is within the window.
    window.clear();
    bool         refreshed = false;
    double const floor     = top.gain - stale_window(top.gain);
    while (!heap.empty() && heap.top().gain >= floor)
    {
      HeapEntry e = heap.top();
      heap.pop();
      if (e.stamp != round)
      {
        e.gain  = gain_of(state, mode, e.index);
        e.stamp = round;
        ++out.trace.evaluations;
        refreshed = true;
      }
      window.push_back(e);
    }
    for (auto const &e : window)
    {
      heap.push(e);
    }
    if (refreshed)
    {
      heap.push(top);
      continue;
    }
    if (options.stop_on_negative && top.gain < 0.0)
    {
      break;
    }
    state.commit(top.index);
    out.selected.push_back(top.index);
    out.trace.steps.push_back({top.index, top.gain, value_of(state, mode)});
    ++round;
  }
}

}  // namespace detail

/**
 * Greedy maximization under |A| <= k. Picks the largest marginal gain each
 * round, lowest index on ties, and keeps going through negative gains unless
 * `stop_on_negative` is set. With `lazy` the stale gains sit in a max-heap and
 * only the head is refreshed; the selected sequence is the same as the plain
 * scan.
 */
inline GreedyResult greedy(Objective const &objective, Mode mode, Index k, GreedyOptions const &options = {})
{
  detail::check_budget(k, objective.ground_size());
  auto const         start = std::chrono::steady_clock::now();
  DualSelectionState state(objective, mode == Mode::Complement);
  GreedyResult       out;
  out.trace.budget = k;
  out.trace.lazy   = options.lazy;
  if (options.lazy)
  {
    detail::lazy_run(state, mode, k, options, out);
  }
  else
  {
    detail::naive_run(state, mode, k, options, out);
  }
  out.trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline GreedyResult lazy_greedy(Objective const &objective, Mode mode, Index k, GreedyOptions options = {})
{
  options.lazy = true;
  return greedy(objective, mode, k, options);
}

/// Largest |value(t) - value(t-1) - gain(t)| / max(1, |value(t)|) along the trace.
inline double trace_telescoping_error(GreedyTrace const &trace)
{
  double previous = 0.0;
  double worst    = 0.0;
  for (auto const &step : trace.steps)
  {
    double const err = std::abs(step.value - previous - step.gain) / std::max(1.0, std::abs(step.value));
    worst            = std::max(worst, err);
    previous         = step.value;
  }
  return worst;
}

inline double min_observed_gain(GreedyTrace const &trace)
{
  if (trace.steps.empty())
  {
    throw config_error("EmptyTrace", "trace has no steps");
  }
  double m = std::numeric_limits<double>::infinity();
  for (auto const &step : trace.steps)
  {
    m = std::min(m, step.gain);
  }
  return m;
}

inline constexpr double kBruteForceLimit = 1e6;

inline double count_subsets_up_to(Index n, Index k)
{
  double total = 0.0;
  double c     = 1.0;
  for (Index s = 0; s <= k && s <= n; ++s)
  {
    total += c;
    c = c * static_cast<double>(n - s) / static_cast<double>(s + 1);
  }
  return total;
}

namespace detail {

/// Calls visit(subset) for every subset of {0..n-1} with size <= max_size, in lexicographic DFS order.
inline void for_each_subset(Index n, Index max_size, std::function<void(std::vector<Index> const &)> const &visit)
{
  std::vector<Index>                       current;
  std::function<void(Index)> recurse = [&](Index start) {
    visit(current);
    if (current.size() == max_size)
    {
      return;
    }
    for (Index e = start; e < n; ++e)
    {
      current.push_back(e);
      recurse(e + 1);
      current.pop_back();
    }
  };
  recurse(0);
}

}  // namespace detail

struct BruteForceResult
{
  std::vector<Index> subset;
  double             value{0.0};
};

/// Exact maximizer over all |A| <= k. Guarded at 1e6 candidate sets.
inline BruteForceResult brute_force_max(Objective const &objective, Mode mode, Index k)
{
  Index const n = objective.ground_size();
  if (count_subsets_up_to(n, k) > kBruteForceLimit)
  {
    throw config_error("InstanceTooLarge", "brute force over " + std::to_string(n) + " choose <=" +
                                               std::to_string(k) + " exceeds the enumeration limit");
  }
  BruteForceResult best;
  bool             first = true;
  detail::for_each_subset(n, std::min(k, n), [&](std::vector<Index> const &subset) {
    double const v = mode == Mode::Base ? base_eval(objective, subset) : csi_eval(objective, subset);
    if (first || v > best.value)
    {
      best.subset = subset;
      best.value  = v;
      first       = false;
    }
  });
  return best;
}

inline constexpr double kSingletonFloor = 1e-12;

struct GlobalCurvature
{
  double             kappa{0.0};
  double             max_singleton{0.0};
  std::vector<Index> skipped;  // elements with f({e}) <= 1e-12
};

/// kappa = 1 - min_e f(e | V \ e) / f({e}) over elements with f({e}) > 1e-12.
inline GlobalCurvature estimate_curvature_global(Objective const &objective)
{
  DualSelectionState state(objective, true);
  GlobalCurvature    out;
  double             min_ratio = std::numeric_limits<double>::infinity();
  for (Index e = 0; e < objective.ground_size(); ++e)
  {
    double const single = state.forward_gain(e);
    out.max_singleton   = std::max(out.max_singleton, single);
    if (single <= kSingletonFloor)
    {
      out.skipped.push_back(e);
      continue;
    }
    min_ratio = std::min(min_ratio, state.complement_removal_gain(e) / single);
  }
  if (out.skipped.size() == objective.ground_size())
  {
    throw numerical_error("AllSingletonsZero", "every singleton value is zero; curvature undefined");
  }
  out.kappa = std::clamp(1.0 - min_ratio, 0.0, 1.0);
  return out;
}

inline constexpr Index kExactCurvatureMaxN = 16;

/// kappa_k = 1 - min over |A| < k, e not in A of f(e | A) / f({e}). Brute force, n <= 16.
inline double curvature_exact_restricted(Objective const &objective, Index k)
{
  Index const n = objective.ground_size();
  if (n > kExactCurvatureMaxN)
  {
    throw config_error("InstanceTooLarge", "exact restricted curvature is limited to n <= 16");
  }
  if (k == 0)
  {
    return 0.0;
  }
  DualSelectionState  root(objective, false);
  std::vector<double> single(n);
  for (Index e = 0; e < n; ++e)
  {
    single[e] = root.forward_gain(e);
  }
  double                           min_ratio = 1.0;
  std::function<void(DualSelectionState const &, Index)> recurse = [&](DualSelectionState const &state,
                                                                       Index start) {
    for (Index e : state.remaining())
    {
      if (single[e] > kSingletonFloor)
      {
        min_ratio = std::min(min_ratio, state.forward_gain(e) / single[e]);
      }
    }
    if (state.selected().size() + 1 >= k)
    {
      return;
    }
    for (Index e = start; e < n; ++e)
    {
      DualSelectionState child = state;
      child.commit(e);
      recurse(child, e + 1);
    }
  };
  recurse(root, 0);
  return std::clamp(1.0 - min_ratio, 0.0, 1.0);
}

/// min over |A| < k, e not in A of the complement-information gain. Brute force.
inline double worst_csi_gain(Objective const &objective, Index k)
{
  Index const n = objective.ground_size();
  if (count_subsets_up_to(n, k == 0 ? 0 : k - 1) * static_cast<double>(n) > kBruteForceLimit)
  {
    throw config_error("InstanceTooLarge", "gain sweep exceeds the enumeration limit");
  }
  double                                                 worst = std::numeric_limits<double>::infinity();
  std::function<void(DualSelectionState const &, Index)> recurse = [&](DualSelectionState const &state,
                                                                       Index start) {
    for (Index e : state.remaining())
    {
      worst = std::min(worst, state.csi_gain(e));
    }
    if (state.selected().size() + 1 >= k)
    {
      return;
    }
    for (Index e = start; e < n; ++e)
    {
      DualSelectionState child = state;
      child.commit(e);
      recurse(child, e + 1);
    }
  };
  if (k > 0)
  {
    recurse(DualSelectionState(objective, true), 0);
  }
  return worst;
}

enum class CurvatureSource
{
  RestrictedExact,
  GlobalBound
};

inline std::string_view curvature_source_name(CurvatureSource s)
{
  return s == CurvatureSource::RestrictedExact ? "restricted_exact" : "global_bound";
}

struct CurvatureReport
{
  std::optional<double> kappa_k;
  double                kappa_global{0.0};
  double                max_singleton{0.0};
  double                epsilon{0.0};
  double                greedy_bound_slack{0.0};
  Index                 budget{0};
  CurvatureSource       source{CurvatureSource::GlobalBound};
  std::vector<Index>    skipped;

  double kappa_used() const
  {
    return source == CurvatureSource::RestrictedExact ? *kappa_k : kappa_global;
  }
};

/**
 * Curvature summary for budget k: exact kappa_k when the instance is small
 * enough to enumerate, otherwise the global curvature as an upper bound.
 * epsilon = kappa_used * max_e f({e}); slack = k * epsilon / e.
 */
inline CurvatureReport curvature_report(Objective const &objective, Index k)
{
  CurvatureReport r;
  r.budget          = k;
  auto const global = estimate_curvature_global(objective);
  r.kappa_global    = global.kappa;
  r.max_singleton   = global.max_singleton;
  r.skipped         = global.skipped;
  if (objective.ground_size() <= kExactCurvatureMaxN)
  {
    r.kappa_k = std::min(curvature_exact_restricted(objective, k), r.kappa_global);
    r.source  = CurvatureSource::RestrictedExact;
  }
  r.epsilon            = r.kappa_used() * r.max_singleton;
  r.greedy_bound_slack = static_cast<double>(k) * r.epsilon / std::numbers::e;
  return r;
}

struct BoundReport
{
  double                greedy_value{0.0};
  double                epsilon{0.0};
  double                slack{0.0};
  std::optional<double> optimum;
  std::optional<double> lower_bound;  // (1 - 1/e) OPT - k eps / e
  std::optional<double> ratio;        // greedy / OPT when OPT > 0
  std::optional<bool>   holds;
};

inline constexpr double kBoundTolerance = 1e-8;

inline BoundReport greedy_bounds(GreedyTrace const &trace, CurvatureReport const &curvature,
                                  std::optional<double> optimum = std::nullopt)
{
  BoundReport b;
  b.greedy_value = trace.final_value();
  b.epsilon      = curvature.epsilon;
  b.slack        = static_cast<double>(trace.budget) * curvature.epsilon / std::numbers::e;
  if (optimum)
  {
    b.optimum     = optimum;
    b.lower_bound = (1.0 - 1.0 / std::numbers::e) * *optimum - b.slack;
    b.holds       = b.greedy_value >= *b.lower_bound - kBoundTolerance;
    if (*optimum > 0.0)
    {
      b.ratio = b.greedy_value / *optimum;
    }
  }
  return b;
}

}  // namespace csi
