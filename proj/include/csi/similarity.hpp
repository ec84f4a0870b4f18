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
#include <string>
#include <vector>

#include "csi/common.hpp"
#include "csi/rng.hpp"

namespace csi {

/// n x d matrix; row i is the embedding of point i.
using EmbeddingMatrix = Matrix;

/// Square similarity kernel s_ij. Read-only once built.
class SimilarityMatrix
{
public:
  SimilarityMatrix() = default;

  explicit SimilarityMatrix(Matrix values)
    : values_(std::move(values))
  {
    if (values_.rows() != values_.cols())
    {
      throw config_error("NotSquare", "similarity matrix must be square");
    }
  }

  Index size() const noexcept
  {
    return values_.rows();
  }
  double operator()(Index i, Index j) const noexcept
  {
    return values_(i, j);
  }
  std::span<double const> row(Index i) const noexcept
  {
    return values_.row(i);
  }
  Matrix const &matrix() const noexcept
  {
    return values_;
  }

private:
  Matrix values_;
};

inline void check_embeddings(EmbeddingMatrix const &e)
{
  if (e.rows() == 0 || e.cols() == 0)
  {
    throw config_error("EmptyEmbeddings", "embedding matrix needs n >= 1 and d >= 1");
  }
  for (double v : e.data())
  {
    if (!std::isfinite(v))
    {
      throw config_error("NonFiniteEmbedding", "embedding contains a non-finite value");
    }
  }
}

inline EmbeddingMatrix l2_normalize_rows(EmbeddingMatrix e)
{
  for (Index i = 0; i < e.rows(); ++i)
  {
    auto   r    = e.row(i);
    double norm = 0.0;
    for (double v : r)
    {
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-15)
    {
      throw numerical_error("ZeroRow", "row " + std::to_string(i) + " has zero norm");
    }
    for (double &v : r)
    {
      v /= norm;
    }
  }
  return e;
}

/// s_ij = exp(-||z_i - z_j||^2 / (2 sigma^2)). Upper triangle computed, then mirrored.
inline SimilarityMatrix rbf_kernel(EmbeddingMatrix const &e, double sigma)
{
  if (!(sigma > 0.0) || !std::isfinite(sigma))
  {
    throw config_error("NonPositiveSigma", "RBF bandwidth must be positive");
  }
  Index const  n = e.rows();
  Matrix       s(n, n);
  double const scale = 1.0 / (2.0 * sigma * sigma);
  for (Index i = 0; i < n; ++i)
  {
    s(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j)
    {
      double const v = std::exp(-squared_distance(e.row(i), e.row(j)) * scale);
      s(i, j)        = v;
      s(j, i)        = v;
    }
  }
  return SimilarityMatrix(std::move(s));
}

inline constexpr std::size_t kMedianPairSampleSize = 10000;

/**
 * Median pairwise Euclidean distance. Uses every pair when there are at most
 * 10,000 of them, otherwise a seeded uniform sample of 10,000 pairs (i < j).
 * Even counts use the mean of the two middle values.
 */
inline double median_heuristic_sigma(EmbeddingMatrix const &e, std::uint64_t seed = 0)
{
  Index const n = e.rows();
  if (n < 2)
  {
    throw config_error("TooFewPoints", "median heuristic needs at least two points");
  }
  std::vector<double> d;
  double const        pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (pairs <= static_cast<double>(kMedianPairSampleSize))
  {
    d.reserve(static_cast<std::size_t>(pairs));
    for (Index i = 0; i < n; ++i)
    {
      for (Index j = i + 1; j < n; ++j)
      {
        d.push_back(distance(e.row(i), e.row(j)));
      }
    }
  }
  else
  {
    Rng rng(derive_seed(seed, 0x5167A));
    d.reserve(kMedianPairSampleSize);
    while (d.size() < kMedianPairSampleSize)
    {
      Index const i = rng.below(n);
      Index const j = rng.below(n);
      if (i == j)
      {
        continue;
      }
      d.push_back(distance(e.row(i), e.row(j)));
    }
  }
  auto const mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double median = *mid;
  if (d.size() % 2 == 0)
  {
    median = 0.5 * (median + *std::max_element(d.begin(), mid));
  }
  if (!(median > 0.0))
  {
    throw numerical_error("DegenerateDistances", "median pairwise distance is zero");
  }
  return median;
}

struct SimilarityValidation
{
  double max_asymmetry{0.0};
  Index  out_of_range{0};
  Index  non_finite{0};
  bool   square{true};

  bool passed() const noexcept
  {
    return square && max_asymmetry == 0.0 && out_of_range == 0 && non_finite == 0;
  }
};

inline SimilarityValidation validate_similarity(Matrix const &s)
{
  SimilarityValidation r;
  if (s.rows() != s.cols())
  {
    r.square = false;
    return r;
  }
  for (Index i = 0; i < s.rows(); ++i)
  {
    for (Index j = 0; j < s.cols(); ++j)
    {
      double const v = s(i, j);
      if (!std::isfinite(v))
      {
        ++r.non_finite;
        continue;
      }
      if (v < 0.0 || v > 1.0)
      {
        ++r.out_of_range;
      }
      double const w = s(j, i);
      if (std::isfinite(w))
      {
        r.max_asymmetry = std::max(r.max_asymmetry, std::abs(v - w));
      }
    }
  }
  return r;
}

inline SimilarityValidation validate_similarity(SimilarityMatrix const &s)
{
  return validate_similarity(s.matrix());
}

}  // namespace csi
