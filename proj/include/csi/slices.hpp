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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "csi/common.hpp"
#include "csi/metrics.hpp"
#include "csi/rng.hpp"

namespace csi {

inline constexpr int    kKMeansMaxIterations = 300;
inline constexpr double kKMeansTolerance     = 1e-6;
inline constexpr Index  kNoOrigin            = std::numeric_limits<Index>::max();

struct KMeansResult
{
  std::vector<int> labels;
  Matrix           centers;
  double           inertia{0.0};
  int              iterations{0};
};

namespace detail {

inline Index nearest_center(std::span<double const> x, Matrix const &centers, double *best_out = nullptr)
{
  Index  best   = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centers.rows(); ++c)
  {
    double const d = squared_distance(x, centers.row(c));
    if (d < best_d)
    {
      best_d = d;
      best   = c;
    }
  }
  if (best_out != nullptr)
  {
    *best_out = best_d;
  }
  return best;
}

inline Matrix kmeans_plus_plus(Matrix const &e, Index k, Rng &rng)
{
  Index const n = e.rows();
  Matrix      centers(k, e.cols());
  std::vector<bool>   chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  Index pick = rng.below(n);
  for (Index c = 0; c < k; ++c)
  {
    if (c > 0)
    {
      double const total = std::accumulate(d2.begin(), d2.end(), 0.0);
      if (total > 0.0)
      {
        double target = rng.uniform() * total;
        pick          = n;
        for (Index i = 0; i < n; ++i)
        {
          if (d2[i] <= 0.0)
          {
            continue;
          }
          target -= d2[i];
          pick = i;
          if (target < 0.0)
          {
            break;
          }
        }
      }
      else
      {
        // every point coincides with a center: take the first unused row
        pick = static_cast<Index>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      }
    }
    chosen[pick] = true;
    std::copy(e.row(pick).begin(), e.row(pick).end(), centers.row(c).begin());
    for (Index i = 0; i < n; ++i)
    {
      d2[i] = chosen[i] ? 0.0 : std::min(d2[i], squared_distance(e.row(i), centers.row(c)));
    }
  }
  return centers;
}

}  // namespace detail

/// Lloyd iterations from k-means++ seeding. Deterministic for a given seed.
inline KMeansResult kmeans(Matrix const &e, Index k, std::uint64_t seed)
{
  Index const n = e.rows();
  if (k < 1 || k > n)
  {
    throw config_error("KTooLarge", "k-means needs 1 <= K <= n (K=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  Index const d = e.cols();
  Rng         rng(seed);
  KMeansResult r;
  r.centers = detail::kmeans_plus_plus(e, k, rng);
  r.labels.assign(n, 0);
  std::vector<double> dist(n, 0.0);

  for (r.iterations = 1; r.iterations <= kKMeansMaxIterations; ++r.iterations)
  {
    for (Index i = 0; i < n; ++i)
    {
      r.labels[i] = static_cast<int>(detail::nearest_center(e.row(i), r.centers, &dist[i]));
    }
    Matrix             next(k, d, 0.0);
    std::vector<Index> count(k, 0);
    for (Index i = 0; i < n; ++i)
    {
      auto const c = static_cast<Index>(r.labels[i]);
      ++count[c];
      for (Index j = 0; j < d; ++j)
      {
        next(c, j) += e(i, j);
      }
    }
    std::vector<bool> taken(n, false);
    for (Index c = 0; c < k; ++c)
    {
      if (count[c] > 0)
      {
        for (Index j = 0; j < d; ++j)
        {
          next(c, j) /= static_cast<double>(count[c]);
        }
        continue;
      }
      Index far = 0;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i)
      {
        if (!taken[i] && dist[i] > far_d)
        {
          far_d = dist[i];
          far   = i;
        }
      }
      taken[far] = true;
      std::copy(e.row(far).begin(), e.row(far).end(), next.row(c).begin());
    }
    double shift = 0.0;
    for (Index c = 0; c < k; ++c)
    {
      shift = std::max(shift, distance(next.row(c), r.centers.row(c)));
    }
    r.centers = std::move(next);
    if (shift <= kKMeansTolerance)
    {
      break;
    }
  }
  r.iterations = std::min(r.iterations, kKMeansMaxIterations);
  r.inertia    = 0.0;
  for (Index i = 0; i < n; ++i)
  {
    double di   = 0.0;
    r.labels[i] = static_cast<int>(detail::nearest_center(e.row(i), r.centers, &di));
    r.inertia += di;
  }
  return r;
}

/**
 * Embeddings with hidden slice structure. `slice_role` is indexed by slice
 * id. Injected outliers carry kOutlierLabel as class and slice; `origin`
 * maps each row back to the input row (kNoOrigin for injected points).
 */
struct SlicedDataset
{
  Matrix             embeddings;
  std::vector<int>   class_label;
  std::vector<int>   slice_label;
  std::vector<Role>  slice_role;
  std::vector<bool>  outlier_flag;
  std::vector<bool>  noise_flag;
  std::vector<Index> origin;

  Index size() const
  {
    return embeddings.rows();
  }

  Role point_role(Index i) const
  {
    if (outlier_flag[i] || slice_label[i] < 0)
    {
      return Role::Outlier;
    }
    return slice_role[static_cast<Index>(slice_label[i])];
  }
};

/**
 * Roles per slice id: within each class, slices ranked by size (descending,
 * lower id first on ties) are cut into thirds by floor(3 * rank / count).
 */
inline std::vector<Role> assign_slice_roles(std::span<int const> class_label, std::span<int const> slice_label)
{
  std::map<int, std::map<int, Index>> sizes;  // class -> slice -> size
  int max_slice = -1;
  for (Index i = 0; i < slice_label.size(); ++i)
  {
    if (slice_label[i] < 0)
    {
      continue;
    }
    ++sizes[class_label[i]][slice_label[i]];
    max_slice = std::max(max_slice, slice_label[i]);
  }
  std::vector<Role> roles(static_cast<Index>(max_slice + 1), Role::Medium);
  for (auto const &[cls, per_slice] : sizes)
  {
    if (per_slice.size() < 3)
    {
      throw config_error("TooFewSlices", "class " + std::to_string(cls) + " has fewer than 3 slices");
    }
    std::vector<std::pair<int, Index>> ranked(per_slice.begin(), per_slice.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](auto const &a, auto const &b) { return a.second > b.second; });
    Index const m = ranked.size();
    for (Index r = 0; r < m; ++r)
    {
      static constexpr std::array<Role, 3> kThirds{Role::Head, Role::Medium, Role::Tail};
      roles[static_cast<Index>(ranked[r].first)] = kThirds[(3 * r) / m];
    }
  }
  return roles;
}

/// Per-class k-means; slice ids are class-major and contiguous.
inline SlicedDataset build_slices(Matrix const &e, std::span<int const> class_label, Index k_per_class,
                                  std::uint64_t seed, bool assign_roles = true)
{
  check_embeddings(e);
  if (class_label.size() != e.rows())
  {
    throw config_error("LabelMismatch", "one class label per embedding row is required");
  }
  std::map<int, std::vector<Index>> members;
  for (Index i = 0; i < class_label.size(); ++i)
  {
    if (class_label[i] < 0)
    {
      throw config_error("InvalidLabel", "class labels must be >= 0");
    }
    members[class_label[i]].push_back(i);
  }
  SlicedDataset out;
  out.embeddings = e;
  out.class_label.assign(class_label.begin(), class_label.end());
  out.slice_label.assign(e.rows(), 0);
  out.outlier_flag.assign(e.rows(), false);
  out.noise_flag.assign(e.rows(), false);
  out.origin = iota_indices(e.rows());

  int next_id = 0;
  for (auto const &[cls, rows] : members)
  {
    if (rows.size() < k_per_class)
    {
      throw config_error("ClassTooSmall", "class " + std::to_string(cls) + " has " + std::to_string(rows.size()) +
                                              " points, fewer than K=" + std::to_string(k_per_class));
    }
    Matrix sub(rows.size(), e.cols());
    for (Index r = 0; r < rows.size(); ++r)
    {
      std::copy(e.row(rows[r]).begin(), e.row(rows[r]).end(), sub.row(r).begin());
    }
    auto const km = kmeans(sub, k_per_class, derive_seed(seed, static_cast<std::uint64_t>(cls)));
    for (Index r = 0; r < rows.size(); ++r)
    {
      out.slice_label[rows[r]] = next_id + km.labels[r];
    }
    next_id += static_cast<int>(k_per_class);
  }
  if (assign_roles)
  {
    out.slice_role = assign_slice_roles(out.class_label, out.slice_label);
  }
  else
  {
    out.slice_role.assign(static_cast<Index>(next_id), Role::Medium);
  }
  return out;
}

struct RetentionProbabilities
{
  double head{1.0};
  double medium{0.5};
  double tail{0.15};
};

namespace detail {

inline SlicedDataset take_rows(SlicedDataset const &d, std::span<Index const> rows)
{
  SlicedDataset out;
  out.embeddings = Matrix(rows.size(), d.embeddings.cols());
  out.slice_role = d.slice_role;
  for (Index r = 0; r < rows.size(); ++r)
  {
    Index const i = rows[r];
    std::copy(d.embeddings.row(i).begin(), d.embeddings.row(i).end(), out.embeddings.row(r).begin());
    out.class_label.push_back(d.class_label[i]);
    out.slice_label.push_back(d.slice_label[i]);
    out.outlier_flag.push_back(d.outlier_flag[i]);
    out.noise_flag.push_back(d.noise_flag[i]);
    out.origin.push_back(d.origin[i]);
  }
  return out;
}

}  // namespace detail

/// Independent Bernoulli retention by slice role. Outlier rows are always kept.
inline SlicedDataset subsample_slices(SlicedDataset const &d, RetentionProbabilities const &probs, std::uint64_t seed)
{
  for (double p : {probs.head, probs.medium, probs.tail})
  {
    if (!(p >= 0.0 && p <= 1.0))
    {
      throw config_error("InvalidProbability", "retention probabilities must lie in [0, 1]");
    }
  }
  Rng                rng(seed);
  std::vector<Index> keep;
  for (Index i = 0; i < d.size(); ++i)
  {
    double p = 1.0;
    switch (d.point_role(i))
    {
    case Role::Head:
      p = probs.head;
      break;
    case Role::Medium:
      p = probs.medium;
      break;
    case Role::Tail:
      p = probs.tail;
      break;
    case Role::Outlier:
      break;
    }
    // one draw per row keeps the stream aligned across probability settings
    if (rng.uniform() < p)
    {
      keep.push_back(i);
    }
  }
  return detail::take_rows(d, keep);
}

struct InjectionOptions
{
  double rho_out{0.05};
  double noise_frac{0.05};
  double shell_factor{3.0};  // shell radius in units of the RMS radius
  double noise_scale{1.0};   // perturbation std in units of per-dimension std
};

inline Index count_for_fraction(double fraction, Index n, bool round_up)
{
  double const x = fraction * static_cast<double>(n);
  return static_cast<Index>(round_up ? std::ceil(x - 1e-9) : std::floor(x + 1e-9));
}

/**
 * Appends ceil(rho_out * n) shell outliers around the data mean and perturbs
 * floor(noise_frac * n) distinct existing rows with isotropic Gaussian noise.
 * Statistics are taken from the input before any change.
 */
inline SlicedDataset inject_outliers(SlicedDataset const &d, InjectionOptions const &opt, std::uint64_t seed)
{
  for (double f : {opt.rho_out, opt.noise_frac})
  {
    if (!(f >= 0.0 && f < 1.0))
    {
      throw config_error("InvalidFraction", "injection fractions must lie in [0, 1)");
    }
  }
  if (!(opt.shell_factor > 0.0) || !(opt.noise_scale >= 0.0))
  {
    throw config_error("InvalidSpec", "shell_factor must be > 0 and noise_scale >= 0");
  }
  Index const n   = d.size();
  Index const dim = d.embeddings.cols();
  SlicedDataset out = d;
  if (n == 0)
  {
    return out;
  }

  std::vector<double> mean(dim, 0.0);
  for (Index i = 0; i < n; ++i)
  {
    for (Index j = 0; j < dim; ++j)
    {
      mean[j] += d.embeddings(i, j) / static_cast<double>(n);
    }
  }
  std::vector<double> var(dim, 0.0);
  double              rms = 0.0;
  for (Index i = 0; i < n; ++i)
  {
    for (Index j = 0; j < dim; ++j)
    {
      double const c = d.embeddings(i, j) - mean[j];
      var[j] += c * c / static_cast<double>(n);
      rms += c * c / static_cast<double>(n);
    }
  }
  rms = std::sqrt(rms);

  Index const n_noise = count_for_fraction(opt.noise_frac, n, false);
  Rng         noise_rng(derive_seed(seed, 1));
  auto        order = iota_indices(n);
  for (Index t = 0; t < n_noise; ++t)
  {
    std::swap(order[t], order[t + noise_rng.below(n - t)]);
    Index const i = order[t];
    for (Index j = 0; j < dim; ++j)
    {
      out.embeddings(i, j) += opt.noise_scale * std::sqrt(var[j]) * noise_rng.normal();
    }
    out.noise_flag[i] = true;
  }

  Index const n_out = count_for_fraction(opt.rho_out, n, true);
  Rng         shell_rng(derive_seed(seed, 2));
  Matrix      grown(n + n_out, dim);
  std::copy(out.embeddings.data().begin(), out.embeddings.data().end(), grown.data().begin());
  for (Index o = 0; o < n_out; ++o)
  {
    auto const dir = detail::random_direction(shell_rng, dim);
    for (Index j = 0; j < dim; ++j)
    {
      grown(n + o, j) = mean[j] + opt.shell_factor * rms * dir[j];
    }
    out.class_label.push_back(kOutlierLabel);
    out.slice_label.push_back(kOutlierLabel);
    out.outlier_flag.push_back(true);
    out.noise_flag.push_back(false);
    out.origin.push_back(kNoOrigin);
  }
  out.embeddings = std::move(grown);
  return out;
}

inline SlicedDataset inject_outliers(SlicedDataset const &d, double rho_out, double noise_frac, std::uint64_t seed)
{
  InjectionOptions opt;
  opt.rho_out    = rho_out;
  opt.noise_frac = noise_frac;
  return inject_outliers(d, opt, seed);
}

struct SlicePipelineOptions
{
  Index                  k_per_class{5};
  RetentionProbabilities retention{};
  InjectionOptions       injection{};
  std::uint64_t          seed{0};
};

/// build_slices -> subsample_slices -> inject_outliers, each stage on its own derived seed.
inline SlicedDataset run_slice_pipeline(Matrix const &e, std::span<int const> class_label,
                                        SlicePipelineOptions const &opt)
{
  auto sliced = build_slices(e, class_label, opt.k_per_class, derive_seed(opt.seed, 1));
  auto kept   = subsample_slices(sliced, opt.retention, derive_seed(opt.seed, 2));
  return inject_outliers(kept, opt.injection, derive_seed(opt.seed, 3));
}

inline EvaluationView evaluation_view(SlicedDataset const &data)
{
  EvaluationView v;
  v.embeddings  = &data.embeddings;
  v.group_label = data.slice_label;
  v.outlier_flag = data.outlier_flag;
  v.role.resize(data.size());
  for (Index i = 0; i < data.size(); ++i)
  {
    v.role[i] = data.point_role(i);
  }
  return v;
}

inline MetricsReport evaluate_run(SlicedDataset const &data, std::span<Index const> selected,
                                  double smoothing = kDefaultKlSmoothing)
{
  return evaluate_run(evaluation_view(data), selected, smoothing);
}

}  // namespace csi
