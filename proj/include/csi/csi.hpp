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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csi/objectives.hpp"

namespace csi {

/// I_f(A; V \ A) = f(A) + f(V \ A) - f(V), by direct evaluation of f.
inline double csi_eval(Objective const &obj, std::span<Index const> subset)
{
  Index const n   = obj.ground_size();
  auto const  rest = complement_of(subset, n);
  auto const  all  = iota_indices(n);
  return base_eval(obj, subset) + base_eval(obj, rest) - base_eval(obj, all);
}

inline double csi_gain(DualSelectionState const &state, Index e)
{
  return state.csi_gain(e);
}

// Closed forms, written without the memoized caches or base_eval; the test
// suites use them as oracles.

namespace detail {

inline std::vector<char> membership(std::span<Index const> subset, Index n)
{
  std::vector<char> in(n, 0);
  for (Index j : subset)
  {
    in.at(j) = 1;
  }
  return in;
}

inline bool is_trivial_split(std::span<Index const> subset, Index n)
{
  auto const in    = membership(subset, n);
  Index      count = 0;
  for (char c : in)
  {
    count += c ? 1 : 0;
  }
  return count == 0 || count == n;
}

}  // namespace detail

/// sum_i min(max_{j in A} s_ij, max_{j in V\A} s_ij); 0 when either side is empty.
inline double flci_closed(Matrix const &s, std::span<Index const> subset)
{
  Index const n = s.rows();
  if (detail::is_trivial_split(subset, n))
  {
    return 0.0;
  }
  auto const in    = detail::membership(subset, n);
  double     total = 0.0;
  for (Index i = 0; i < n; ++i)
  {
    double inside  = 0.0;
    double outside = 0.0;
    for (Index j = 0; j < n; ++j)
    {
      double &side = in[j] ? inside : outside;
      side         = std::max(side, s(i, j));
    }
    total += std::min(inside, outside);
  }
  return total;
}

/// 2 * lambda * sum_{i in A, j in V\A} s_ij. Equals the plain cut at lambda = 1/2.
inline double gcci_closed(Matrix const &s, std::span<Index const> subset, double lambda)
{
  Index const n   = s.rows();
  auto const  in  = detail::membership(subset, n);
  double      cut = 0.0;
  for (Index i = 0; i < n; ++i)
  {
    if (!in[i])
    {
      continue;
    }
    for (Index j = 0; j < n; ++j)
    {
      if (!in[j])
      {
        cut += s(i, j);
      }
    }
  }
  return 2.0 * lambda * cut;
}

namespace detail {

inline double eigen_logdet(Matrix const &s, std::span<Index const> subset, double jitter)
{
  if (subset.empty())
  {
    return 0.0;
  }
  auto const      m = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd block(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
  {
    for (Eigen::Index b = 0; b < m; ++b)
    {
      block(a, b) = s(subset[static_cast<Index>(a)], subset[static_cast<Index>(b)]);
    }
    block(a, a) += jitter;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() != Eigen::Success)
  {
    throw numerical_error("SingularSubmatrix", "submatrix is not positive definite");
  }
  double ld = 0.0;
  for (Eigen::Index a = 0; a < m; ++a)
  {
    double const d = llt.matrixLLT()(a, a) * llt.matrixLLT()(a, a);
    if (!(d >= kPivotFloor))
    {
      throw numerical_error("SingularSubmatrix", "submatrix is numerically singular");
    }
    ld += std::log(d);
  }
  return ld;
}

}  // namespace detail

/// log det(S_A) + log det(S_{V\A}) - log det(S_V), each with jitter on the diagonal.
inline double logdetci_closed(Matrix const &s, std::span<Index const> subset, double jitter)
{
  Index const n    = s.rows();
  auto const  rest = complement_of(subset, n);
  auto const  all  = iota_indices(n);
  return detail::eigen_logdet(s, subset, jitter) + detail::eigen_logdet(s, rest, jitter) -
         detail::eigen_logdet(s, all, jitter);
}

/// sum_i (1 - prod_{j in A}(1 - p_ij)) (1 - prod_{j in V\A}(1 - p_ij))
inline double pscci_closed(Matrix const &p, std::span<Index const> subset)
{
  Index const n     = p.rows();
  auto const  in    = detail::membership(subset, n);
  double      total = 0.0;
  for (Index i = 0; i < n; ++i)
  {
    double miss_in  = 1.0;
    double miss_out = 1.0;
    for (Index j = 0; j < n; ++j)
    {
      (in[j] ? miss_in : miss_out) *= 1.0 - p(i, j);
    }
    total += (1.0 - miss_in) * (1.0 - miss_out);
  }
  return total;
}

/// sum_i min{a_i, b_i, alpha, (a_i + b_i - alpha)_+}
inline double scci_closed(Matrix const &s, std::span<Index const> subset, double alpha)
{
  Index const n     = s.rows();
  auto const  in    = detail::membership(subset, n);
  double      total = 0.0;
  for (Index i = 0; i < n; ++i)
  {
    double a = 0.0;
    double b = 0.0;
    for (Index j = 0; j < n; ++j)
    {
      (in[j] ? a : b) += s(i, j);
    }
    total += std::min({a, b, alpha, std::max(a + b - alpha, 0.0)});
  }
  return total;
}

/// sum_l psi(sum_A x) + psi(sum_{V\A} x) - psi(sum_V x)
inline double fbci_closed(Matrix const &x, std::span<Index const> subset, Concave psi)
{
  Index const n     = x.rows();
  auto const  in    = detail::membership(subset, n);
  double      total = 0.0;
  for (Index l = 0; l < x.cols(); ++l)
  {
    double a = 0.0;
    double b = 0.0;
    for (Index j = 0; j < n; ++j)
    {
      (in[j] ? a : b) += x(j, l);
    }
    total += apply_concave(psi, a) + apply_concave(psi, b) - apply_concave(psi, a + b);
  }
  return total;
}

/// Dispatches to the closed form matching the objective's kind.
inline double csi_closed(Objective const &obj, std::span<Index const> subset)
{
  switch (obj.kind())
  {
  case Kind::FacilityLocation:
    return flci_closed(obj.similarity().matrix(), subset);
  case Kind::GraphCut:
    return gcci_closed(obj.similarity().matrix(), subset, obj.lambda());
  case Kind::LogDet:
    return logdetci_closed(obj.similarity().matrix(), subset, obj.jitter());
  case Kind::ProbabilisticSetCover:
    return pscci_closed(obj.coverage(), subset);
  case Kind::SaturatedCoverage:
    return scci_closed(obj.similarity().matrix(), subset, obj.alpha());
  case Kind::FeatureBased:
    return fbci_closed(obj.features(), subset, obj.psi());
  }
  return 0.0;
}

}  // namespace csi
