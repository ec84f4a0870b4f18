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
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "csi/common.hpp"
#include "csi/synthgen.hpp"

namespace csi {

inline constexpr double kDefaultKlSmoothing = 0.5;

namespace detail {

inline void require_nonempty(std::span<Index const> selected)
{
  if (selected.empty())
  {
    throw config_error("EmptySelection", "metrics need at least one selected point");
  }
}

inline void require_in_range(std::span<Index const> selected, Index n)
{
  for (Index i : selected)
  {
    if (i >= n)
    {
      throw config_error("IndexOutOfRange", "selected index " + std::to_string(i) + " >= " + std::to_string(n));
    }
  }
}

}  // namespace detail

struct MinorityCoverage
{
  double ratio{0.0};          // (|A∩tail|/|A|) / (|tail|/|V|)
  double tail_fraction{0.0};  // |A∩tail| / |tail|
};

inline MinorityCoverage minority_coverage(std::span<Index const> selected, std::span<Role const> roles)
{
  detail::require_nonempty(selected);
  detail::require_in_range(selected, roles.size());
  auto const tail_total = static_cast<double>(std::count(roles.begin(), roles.end(), Role::Tail));
  if (tail_total == 0.0)
  {
    throw config_error("NoTailPoints", "dataset has no tail points");
  }
  double hit = 0.0;
  for (Index i : selected)
  {
    hit += roles[i] == Role::Tail ? 1.0 : 0.0;
  }
  auto const a = static_cast<double>(selected.size());
  auto const n = static_cast<double>(roles.size());
  return {(hit / a) / (tail_total / n), hit / tail_total};
}

inline double minority_coverage_ratio(std::span<Index const> selected, std::span<Role const> roles)
{
  return minority_coverage(selected, roles).ratio;
}

inline double outlier_rate(std::span<Index const> selected, std::vector<bool> const &outlier_flags)
{
  detail::require_nonempty(selected);
  detail::require_in_range(selected, outlier_flags.size());
  double hit = 0.0;
  for (Index i : selected)
  {
    hit += outlier_flags[i] ? 1.0 : 0.0;
  }
  return hit / static_cast<double>(selected.size());
}

/**
 * KL(P || Q) between two count vectors over the same bins. Each bin gets
 * `smoothing` pseudo-counts before normalization. With zero smoothing a bin
 * where P > 0 and Q = 0 yields +inf.
 */
inline double kl_cluster_divergence(std::span<double const> p_counts, std::span<double const> q_counts,
                                    double smoothing = kDefaultKlSmoothing)
{
  if (p_counts.size() != q_counts.size())
  {
    throw config_error("BinMismatch", "P and Q must share the same bins");
  }
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing))
  {
    throw config_error("InvalidSmoothing", "smoothing must be a finite value >= 0");
  }
  double p_total = 0.0;
  double q_total = 0.0;
  for (Index b = 0; b < p_counts.size(); ++b)
  {
    if (p_counts[b] < 0.0 || q_counts[b] < 0.0)
    {
      throw config_error("NegativeCount", "counts must be nonnegative");
    }
    p_total += p_counts[b] + smoothing;
    q_total += q_counts[b] + smoothing;
  }
  if (!(p_total > 0.0) || !(q_total > 0.0))
  {
    throw config_error("EmptyDistribution", "a distribution has zero total mass");
  }
  double kl = 0.0;
  for (Index b = 0; b < p_counts.size(); ++b)
  {
    double const p = (p_counts[b] + smoothing) / p_total;
    double const q = (q_counts[b] + smoothing) / q_total;
    if (p == 0.0)
    {
      continue;
    }
    if (q == 0.0)
    {
      return std::numeric_limits<double>::infinity();
    }
    kl += p * std::log(p / q);
  }
  return std::max(kl, 0.0);
}

/// Per-label counts for the selection, the full set and the complement, over the sorted label set.
struct LabelHistograms
{
  std::vector<int>    labels;
  std::vector<double> selected;
  std::vector<double> full;
  std::vector<double> complement;
};

inline LabelHistograms label_histograms(std::span<Index const> selected, std::span<int const> labels)
{
  detail::require_in_range(selected, labels.size());
  LabelHistograms h;
  h.labels.assign(labels.begin(), labels.end());
  std::sort(h.labels.begin(), h.labels.end());
  h.labels.erase(std::unique(h.labels.begin(), h.labels.end()), h.labels.end());
  std::map<int, Index> bin;
  for (Index b = 0; b < h.labels.size(); ++b)
  {
    bin[h.labels[b]] = b;
  }
  h.selected.assign(h.labels.size(), 0.0);
  h.full.assign(h.labels.size(), 0.0);
  for (int l : labels)
  {
    h.full[bin[l]] += 1.0;
  }
  for (Index i : selected)
  {
    h.selected[bin[labels[i]]] += 1.0;
  }
  h.complement.resize(h.labels.size());
  for (Index b = 0; b < h.labels.size(); ++b)
  {
    h.complement[b] = h.full[b] - h.selected[b];
  }
  return h;
}

/// Mean over all points of the distance to the nearest selected point.
inline double manifold_coverage_distance(std::span<Index const> selected, Matrix const &embeddings)
{
  detail::require_nonempty(selected);
  detail::require_in_range(selected, embeddings.rows());
  double total = 0.0;
  for (Index i = 0; i < embeddings.rows(); ++i)
  {
    double best = std::numeric_limits<double>::infinity();
    for (Index j : selected)
    {
      best = std::min(best, squared_distance(embeddings.row(i), embeddings.row(j)));
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(embeddings.rows());
}

struct MetricsReport
{
  double        minority_coverage_ratio{0.0};
  double        tail_fraction_selected{0.0};
  double        outlier_rate{0.0};
  double        kl_selected_vs_full{0.0};
  double        kl_selected_vs_complement{0.0};
  double        manifold_coverage_distance{0.0};
  Index         selection_size{0};
  Index         ground_size{0};
  std::string   objective;
  std::uint64_t seed{0};
  Index         budget{0};

  bool operator==(MetricsReport const &) const = default;
};

/// Everything the metrics read from a labelled dataset. Selection code never sees this.
struct EvaluationView
{
  Matrix const            *embeddings{nullptr};
  std::vector<int>         group_label;  // cluster or slice; outliers share one sentinel bin
  std::vector<Role>        role;
  std::vector<bool>        outlier_flag;
};

inline MetricsReport evaluate_run(EvaluationView const &view, std::span<Index const> selected,
                                  double smoothing = kDefaultKlSmoothing)
{
  detail::require_nonempty(selected);
  MetricsReport r;
  auto const    coverage = minority_coverage(selected, view.role);
  r.minority_coverage_ratio    = coverage.ratio;
  r.tail_fraction_selected     = coverage.tail_fraction;
  r.outlier_rate               = outlier_rate(selected, view.outlier_flag);
  auto const h                 = label_histograms(selected, view.group_label);
  r.kl_selected_vs_full        = kl_cluster_divergence(h.selected, h.full, smoothing);
  r.kl_selected_vs_complement  = kl_cluster_divergence(h.selected, h.complement, smoothing);
  r.manifold_coverage_distance = manifold_coverage_distance(selected, *view.embeddings);
  r.selection_size             = selected.size();
  r.ground_size                = view.embeddings->rows();
  r.budget                     = selected.size();
  return r;
}

inline EvaluationView evaluation_view(SyntheticDataset const &data)
{
  EvaluationView v;
  v.embeddings  = &data.embeddings;
  v.group_label = data.cluster_label;
  v.role        = data.role;
  v.outlier_flag.resize(data.size());
  for (Index i = 0; i < data.size(); ++i)
  {
    v.outlier_flag[i] = data.role[i] == Role::Outlier;
  }
  return v;
}

inline MetricsReport evaluate_run(SyntheticDataset const &data, std::span<Index const> selected,
                                  double smoothing = kDefaultKlSmoothing)
{
  return evaluate_run(evaluation_view(data), selected, smoothing);
}

}  // namespace csi
