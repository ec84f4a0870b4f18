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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "csi/common.hpp"
#include "csi/rng.hpp"
#include "csi/similarity.hpp"

namespace csi {

enum class OutlierMode
{
  Central,     // uniform in a small ball at the origin
  Surrounding  // uniform on a shell around the clusters
};

inline std::string outlier_mode_name(OutlierMode m)
{
  return m == OutlierMode::Central ? "central" : "surrounding";
}

inline OutlierMode parse_outlier_mode(std::string const &name)
{
  if (name == "central")
  {
    return OutlierMode::Central;
  }
  if (name == "surrounding")
  {
    return OutlierMode::Surrounding;
  }
  throw config_error("InvalidSpec", "outlier_mode must be central or surrounding");
}

struct ClusterSpec
{
  Index size{1};
  Role  role{Role::Head};
};

/**
 * Gaussian-cluster benchmark description. Centers are uniform in a ball of
 * radius `center_spread`; with `min_center_gap` > 0 a draw closer than that to
 * an earlier center is rejected and redrawn. Central outliers are uniform in a
 * ball of radius `central_radius_fraction * center_spread`; surrounding
 * outliers lie on the sphere of radius `outlier_scale * center_spread`.
 */
struct SyntheticSpec
{
  std::vector<ClusterSpec> clusters;
  Index                    dim{2};
  double                   cluster_std{1.0};
  double                   center_spread{10.0};
  double                   min_center_gap{0.0};
  Index                    n_outliers{0};
  OutlierMode              outlier_mode{OutlierMode::Surrounding};
  double                   outlier_scale{1.5};
  double                   central_radius_fraction{0.1};
  std::uint64_t            seed{0};

  Index total_points() const
  {
    Index n = n_outliers;
    for (auto const &c : clusters)
    {
      n += c.size;
    }
    return n;
  }
};

struct SyntheticDataset
{
  EmbeddingMatrix   embeddings;
  std::vector<int>  cluster_label;  // kOutlierLabel for outliers
  std::vector<Role> role;

  Index size() const
  {
    return embeddings.rows();
  }
};

inline void validate(SyntheticSpec const &spec, bool require_head_and_tail = false)
{
  auto fail = [](std::string const &m) { throw config_error("InvalidSpec", m); };
  if (spec.clusters.empty())
  {
    fail("at least one cluster is required");
  }
  bool head = false;
  bool tail = false;
  for (auto const &c : spec.clusters)
  {
    if (c.size < 1)
    {
      fail("cluster sizes must be >= 1");
    }
    if (c.role == Role::Outlier)
    {
      fail("cluster role must be head, medium or tail");
    }
    head = head || c.role == Role::Head;
    tail = tail || c.role == Role::Tail;
  }
  if (require_head_and_tail && !(head && tail))
  {
    fail("tail metrics need at least one head and one tail cluster");
  }
  if (spec.dim < 1)
  {
    fail("dim must be >= 1");
  }
  for (double v : {spec.cluster_std, spec.center_spread, spec.outlier_scale, spec.central_radius_fraction})
  {
    if (!(v > 0.0) || !std::isfinite(v))
    {
      fail("scales must be positive and finite");
    }
  }
  if (!(spec.min_center_gap >= 0.0))
  {
    fail("min_center_gap must be >= 0");
  }
}

namespace detail {

inline std::vector<double> random_direction(Rng &rng, Index dim)
{
  std::vector<double> v(dim);
  double              norm = 0.0;
  while (norm < 1e-12)
  {
    norm = 0.0;
    for (double &x : v)
    {
      x = rng.normal();
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (double &x : v)
  {
    x /= norm;
  }
  return v;
}

inline std::vector<double> uniform_in_ball(Rng &rng, Index dim, double radius)
{
  auto         v = random_direction(rng, dim);
  double const r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
  for (double &x : v)
  {
    x *= r;
  }
  return v;
}

}  // namespace detail

inline constexpr int kMaxCenterRejections = 10000;

/// Pure function of the spec (seed included).
inline SyntheticDataset generate(SyntheticSpec const &spec)
{
  validate(spec);
  Index const n = spec.total_points();
  Index const d = spec.dim;

  Rng center_rng(derive_seed(spec.seed, 1));
  Rng point_rng(derive_seed(spec.seed, 2));
  Rng outlier_rng(derive_seed(spec.seed, 3));

  std::vector<std::vector<double>> centers;
  for (Index c = 0; c < spec.clusters.size(); ++c)
  {
    std::vector<double> candidate;
    for (int attempt = 0;; ++attempt)
    {
      candidate = detail::uniform_in_ball(center_rng, d, spec.center_spread);
      bool far  = true;
      for (auto const &other : centers)
      {
        far = far && distance(candidate, other) >= spec.min_center_gap;
      }
      if (far)
      {
        break;
      }
      if (attempt >= kMaxCenterRejections)
      {
        throw config_error("InvalidSpec", "min_center_gap too large to place all cluster centers");
      }
    }
    centers.push_back(std::move(candidate));
  }

  SyntheticDataset out;
  out.embeddings = Matrix(n, d);
  out.cluster_label.reserve(n);
  out.role.reserve(n);
  Index row = 0;
  for (Index c = 0; c < spec.clusters.size(); ++c)
  {
    for (Index p = 0; p < spec.clusters[c].size; ++p, ++row)
    {
      auto r = out.embeddings.row(row);
      for (Index k = 0; k < d; ++k)
      {
        r[k] = centers[c][k] + spec.cluster_std * point_rng.normal();
      }
      out.cluster_label.push_back(static_cast<int>(c));
      out.role.push_back(spec.clusters[c].role);
    }
  }
  for (Index o = 0; o < spec.n_outliers; ++o, ++row)
  {
    std::vector<double> v;
    if (spec.outlier_mode == OutlierMode::Central)
    {
      v = detail::uniform_in_ball(outlier_rng, d, spec.central_radius_fraction * spec.center_spread);
    }
    else
    {
      v = detail::random_direction(outlier_rng, d);
      for (double &x : v)
      {
        x *= spec.outlier_scale * spec.center_spread;
      }
    }
    std::copy(v.begin(), v.end(), out.embeddings.row(row).begin());
    out.cluster_label.push_back(kOutlierLabel);
    out.role.push_back(Role::Outlier);
  }
  return out;
}

/**
 * Reference configuration used by the benchmark and acceptance suite:
 * 3 head clusters of 150, 3 medium of 50, 3 tail of 15 and 30 surrounding
 * outliers in 2-D (675 points, tail share 45/675).
 */
inline SyntheticSpec default_benchmark_spec()
{
  SyntheticSpec spec;
  for (Index c = 0; c < 3; ++c)
  {
    spec.clusters.push_back({150, Role::Head});
  }
  for (Index c = 0; c < 3; ++c)
  {
    spec.clusters.push_back({50, Role::Medium});
  }
  for (Index c = 0; c < 3; ++c)
  {
    spec.clusters.push_back({15, Role::Tail});
  }
  spec.dim            = 2;
  spec.cluster_std    = 0.8;
  spec.center_spread  = 10.0;
  spec.min_center_gap = 3.0;
  spec.n_outliers     = 30;
  spec.outlier_mode   = OutlierMode::Surrounding;
  spec.outlier_scale  = 3.0;
  spec.seed           = 7;
  return spec;
}

}  // namespace csi
