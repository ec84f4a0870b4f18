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
#include <limits>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "csi/common.hpp"
#include "csi/similarity.hpp"

namespace csi {

enum class Kind
{
  FacilityLocation,
  GraphCut,
  LogDet,
  ProbabilisticSetCover,
  SaturatedCoverage,
  FeatureBased
};

inline constexpr std::array<Kind, 6> kAllKinds = {
    Kind::FacilityLocation,      Kind::GraphCut,          Kind::LogDet,
    Kind::ProbabilisticSetCover, Kind::SaturatedCoverage, Kind::FeatureBased};

enum class Concave
{
  Sqrt,
  Log1p,
  Identity  // linear; makes FB modular
};

inline std::string_view kind_name(Kind k)
{
  switch (k)
  {
  case Kind::FacilityLocation:
    return "fl";
  case Kind::GraphCut:
    return "gc";
  case Kind::LogDet:
    return "logdet";
  case Kind::ProbabilisticSetCover:
    return "psc";
  case Kind::SaturatedCoverage:
    return "sc";
  case Kind::FeatureBased:
    return "fb";
  }
  return "?";
}

inline Kind parse_kind(std::string_view name)
{
  for (Kind k : kAllKinds)
  {
    if (kind_name(k) == name)
    {
      return k;
    }
  }
  throw config_error("UnknownObjective", "unknown objective kind '" + std::string(name) + "'");
}

inline std::string_view concave_name(Concave c)
{
  switch (c)
  {
  case Concave::Sqrt:
    return "sqrt";
  case Concave::Log1p:
    return "log1p";
  case Concave::Identity:
    return "identity";
  }
  return "?";
}

inline Concave parse_concave(std::string_view name)
{
  if (name == "sqrt")
  {
    return Concave::Sqrt;
  }
  if (name == "log1p")
  {
    return Concave::Log1p;
  }
  if (name == "identity")
  {
    return Concave::Identity;
  }
  throw config_error("UnknownConcave", "psi must be sqrt, log1p or identity, got '" + std::string(name) + "'");
}

inline double apply_concave(Concave c, double x) noexcept
{
  x = std::max(x, 0.0);
  switch (c)
  {
  case Concave::Sqrt:
    return std::sqrt(x);
  case Concave::Log1p:
    return std::log1p(x);
  case Concave::Identity:
    return x;
  }
  return x;
}

/**
 * Which base function to build and its parameters. Unset `alpha` resolves to
 * 0.25 * mean row sum of S when the objective is built. The two path fields
 * are only carried for serialization; the loaded matrices are passed to
 * make_objective directly.
 */
struct ObjectiveSpec
{
  Kind                  kind{Kind::FacilityLocation};
  double                lambda{0.5};
  std::optional<double> alpha;
  Concave               psi{Concave::Sqrt};
  double                jitter{1.0};
  std::string           coverage_path;
  std::string           features_path;
};

inline constexpr double kDefaultAlphaFraction = 0.25;
inline constexpr double kPivotFloor           = 1e-10;

/// A base objective bound to its data. Cheap to copy; matrices are shared.
class Objective
{
public:
  Kind kind() const noexcept
  {
    return spec_.kind;
  }
  ObjectiveSpec const &spec() const noexcept
  {
    return spec_;
  }
  Index ground_size() const noexcept
  {
    return n_;
  }
  double lambda() const noexcept
  {
    return spec_.lambda;
  }
  double alpha() const noexcept
  {
    return *spec_.alpha;
  }
  double jitter() const noexcept
  {
    return spec_.jitter;
  }
  Concave psi() const noexcept
  {
    return spec_.psi;
  }

  SimilarityMatrix const &similarity() const
  {
    return *similarity_;
  }
  /// p_ij: row i is the covered point, column j the covering item.
  Matrix const &coverage() const
  {
    return *coverage_;
  }
  /// x_jl: row j is the item, column l the feature.
  Matrix const &features() const
  {
    return *features_;
  }

  friend Objective make_objective(ObjectiveSpec spec, std::shared_ptr<SimilarityMatrix const> similarity,
                                  std::shared_ptr<Matrix const> coverage,
                                  std::shared_ptr<Matrix const> features);

private:
  ObjectiveSpec                           spec_;
  Index                                   n_{0};
  std::shared_ptr<SimilarityMatrix const> similarity_;
  std::shared_ptr<Matrix const>           coverage_;
  std::shared_ptr<Matrix const>           features_;
};

/**
 * Validates parameters and binds data. PSC falls back to p = S and FB to x = S
 * when no explicit matrix is supplied.
 */
inline Objective make_objective(ObjectiveSpec spec, std::shared_ptr<SimilarityMatrix const> similarity,
                                std::shared_ptr<Matrix const> coverage = nullptr,
                                std::shared_ptr<Matrix const> features = nullptr)
{
  if (!similarity)
  {
    throw config_error("MissingSimilarity", "objective needs a similarity matrix");
  }
  Index const n = similarity->size();
  if (n == 0)
  {
    throw config_error("EmptyGroundSet", "ground set is empty");
  }
  auto const check = validate_similarity(*similarity);
  if (check.max_asymmetry != 0.0 || check.non_finite != 0)
  {
    throw config_error("InvalidSimilarity", "similarity must be finite and exactly symmetric");
  }
  for (double v : similarity->matrix().data())
  {
    if (v < 0.0)
    {
      throw config_error("InvalidSimilarity", "similarity entries must be nonnegative");
    }
  }

  Objective obj;
  obj.n_          = n;
  obj.similarity_ = similarity;

  switch (spec.kind)
  {
  case Kind::GraphCut:
    if (!(spec.lambda >= 0.0))
    {
      throw config_error("InvalidSpec", "lambda must be >= 0");
    }
    break;
  case Kind::LogDet:
    if (!(spec.jitter >= 0.0))
    {
      throw config_error("InvalidSpec", "jitter must be >= 0");
    }
    break;
  case Kind::SaturatedCoverage:
    if (!spec.alpha)
    {
      double total = 0.0;
      for (double v : similarity->matrix().data())
      {
        total += v;
      }
      spec.alpha = kDefaultAlphaFraction * total / static_cast<double>(n);
    }
    if (!(*spec.alpha > 0.0))
    {
      throw config_error("InvalidSpec", "alpha must be > 0");
    }
    break;
  case Kind::ProbabilisticSetCover:
    if (!coverage)
    {
      coverage = std::shared_ptr<Matrix const>(similarity, &similarity->matrix());
    }
    if (coverage->rows() != n || coverage->cols() != n)
    {
      throw config_error("InvalidSpec", "coverage matrix must be n x n");
    }
    for (double v : coverage->data())
    {
      if (!(v >= 0.0 && v <= 1.0))
      {
        throw config_error("InvalidSpec", "coverage probabilities must lie in [0,1]");
      }
    }
    obj.coverage_ = std::move(coverage);
    break;
  case Kind::FeatureBased:
    if (!features)
    {
      features = std::shared_ptr<Matrix const>(similarity, &similarity->matrix());
    }
    if (features->rows() != n || features->cols() == 0)
    {
      throw config_error("InvalidSpec", "feature matrix must have n rows and d >= 1 columns");
    }
    for (double v : features->data())
    {
      if (!(v >= 0.0) || !std::isfinite(v))
      {
        throw config_error("InvalidSpec", "features must be finite and nonnegative");
      }
    }
    obj.features_ = std::move(features);
    break;
  case Kind::FacilityLocation:
    break;
  }
  obj.spec_ = std::move(spec);
  return obj;
}

namespace detail {

/// Plain Cholesky; returns log det or nullopt when a pivot falls below kPivotFloor.
inline std::optional<double> naive_logdet(Matrix m)
{
  Index const n      = m.rows();
  double      logdet = 0.0;
  for (Index j = 0; j < n; ++j)
  {
    double d = m(j, j);
    for (Index k = 0; k < j; ++k)
    {
      d -= m(j, k) * m(j, k);
    }
    if (!(d >= kPivotFloor))
    {
      return std::nullopt;
    }
    double const l = std::sqrt(d);
    m(j, j)        = l;
    logdet += std::log(d);
    for (Index i = j + 1; i < n; ++i)
    {
      double v = m(i, j);
      for (Index k = 0; k < j; ++k)
      {
        v -= m(i, k) * m(j, k);
      }
      m(i, j) = v / l;
    }
  }
  return logdet;
}

inline Matrix jittered_submatrix(SimilarityMatrix const &s, std::span<Index const> subset, double jitter)
{
  Matrix m(subset.size(), subset.size());
  for (Index a = 0; a < subset.size(); ++a)
  {
    for (Index b = 0; b < subset.size(); ++b)
    {
      m(a, b) = s(subset[a], subset[b]);
    }
    m(a, a) += jitter;
  }
  return m;
}

}  // namespace detail

/// Direct evaluation of f(A) from its definition. O(n |A|) or O(|A|^3) for LogDet.
inline double base_eval(Objective const &obj, std::span<Index const> subset)
{
  Index const n = obj.ground_size();
  if (subset.empty())
  {
    return 0.0;
  }
  switch (obj.kind())
  {
  case Kind::FacilityLocation: {
    auto const &s     = obj.similarity();
    double      total = 0.0;
    for (Index i = 0; i < n; ++i)
    {
      double best = 0.0;
      for (Index j : subset)
      {
        best = std::max(best, s(i, j));
      }
      total += best;
    }
    return total;
  }
  case Kind::GraphCut: {
    auto const &s     = obj.similarity();
    double      cover = 0.0;
    double      inner = 0.0;
    for (Index j : subset)
    {
      for (Index i = 0; i < n; ++i)
      {
        cover += s(i, j);
      }
      for (Index i : subset)
      {
        inner += s(i, j);
      }
    }
    return cover - obj.lambda() * inner;
  }
  case Kind::LogDet: {
    auto const v = detail::naive_logdet(detail::jittered_submatrix(obj.similarity(), subset, obj.jitter()));
    if (!v)
    {
      throw numerical_error("SingularSubmatrix", "S_A + jitter*I is not positive definite");
    }
    return *v;
  }
  case Kind::ProbabilisticSetCover: {
    auto const &p     = obj.coverage();
    double      total = 0.0;
    for (Index i = 0; i < n; ++i)
    {
      double miss = 1.0;
      for (Index j : subset)
      {
        miss *= 1.0 - p(i, j);
      }
      total += 1.0 - miss;
    }
    return total;
  }
  case Kind::SaturatedCoverage: {
    auto const &s     = obj.similarity();
    double      total = 0.0;
    for (Index i = 0; i < n; ++i)
    {
      double acc = 0.0;
      for (Index j : subset)
      {
        acc += s(i, j);
      }
      total += std::min(obj.alpha(), acc);
    }
    return total;
  }
  case Kind::FeatureBased: {
    auto const &x     = obj.features();
    double      total = 0.0;
    for (Index l = 0; l < x.cols(); ++l)
    {
      double acc = 0.0;
      for (Index j : subset)
      {
        acc += x(j, l);
      }
      total += apply_concave(obj.psi(), acc);
    }
    return total;
  }
  }
  return 0.0;
}

namespace detail {

inline constexpr Index kNoIndex = static_cast<Index>(-1);

// Each cache pairs a forward memo over A with a complement memo over W = V \ A.
// build() initializes both from scratch for an arbitrary split; commit(e) moves
// e from W to A. `remaining` passed to commit already excludes e.

struct FacilityCache
{
  struct Top2
  {
    double v1{0.0};
    double v2{0.0};
    Index  i1{kNoIndex};
    Index  i2{kNoIndex};
  };

  std::vector<double> best;  // max_{j in A} s_ij
  std::vector<Top2>   top;   // top-2 of s_ij over j in W

  static Top2 scan(std::span<double const> row, std::span<Index const> remaining)
  {
    Top2 t;
    for (Index j : remaining)
    {
      double const v = row[j];
      if (t.i1 == kNoIndex || v > t.v1)
      {
        t.v2 = t.v1;
        t.i2 = t.i1;
        t.v1 = v;
        t.i1 = j;
      }
      else if (t.i2 == kNoIndex || v > t.v2)
      {
        t.v2 = v;
        t.i2 = j;
      }
    }
    if (t.i2 == kNoIndex)
    {
      t.v2 = 0.0;
    }
    if (t.i1 == kNoIndex)
    {
      t.v1 = 0.0;
    }
    return t;
  }

  static FacilityCache build(Objective const &obj, std::span<Index const> selected,
                             std::span<Index const> remaining, bool complement)
  {
    auto const   &s = obj.similarity();
    Index const   n = obj.ground_size();
    FacilityCache c;
    c.best.assign(n, 0.0);
    for (Index i = 0; i < n; ++i)
    {
      for (Index j : selected)
      {
        c.best[i] = std::max(c.best[i], s(i, j));
      }
    }
    if (complement)
    {
      c.top.resize(n);
      for (Index i = 0; i < n; ++i)
      {
        c.top[i] = scan(s.row(i), remaining);
      }
    }
    return c;
  }

  double forward_gain(Objective const &obj, Index e) const
  {
    auto const row  = obj.similarity().row(e);
    double     gain = 0.0;
    for (Index i = 0; i < best.size(); ++i)
    {
      gain += std::max(0.0, row[i] - best[i]);
    }
    return gain;
  }

  double removal_gain(Objective const &, Index e) const
  {
    double gain = 0.0;
    for (auto const &t : top)
    {
      if (t.i1 == e)
      {
        gain += t.v1 - t.v2;
      }
    }
    return gain;
  }

  void commit(Objective const &obj, Index e, std::span<Index const> remaining, bool complement)
  {
    auto const &s   = obj.similarity();
    auto const  row = s.row(e);
    for (Index i = 0; i < best.size(); ++i)
    {
      best[i] = std::max(best[i], row[i]);
    }
    if (complement)
    {
      for (Index i = 0; i < top.size(); ++i)
      {
        if (top[i].i1 == e || top[i].i2 == e)
        {
          top[i] = scan(s.row(i), remaining);
        }
      }
    }
  }

  double forward_value(Objective const &) const
  {
    double v = 0.0;
    for (double b : best)
    {
      v += b;
    }
    return v;
  }

  double complement_value(Objective const &) const
  {
    double v = 0.0;
    for (auto const &t : top)
    {
      v += t.v1;
    }
    return v;
  }
};

struct GraphCutCache
{
  std::vector<double> column_sum;    // sum_{i in V} s_ij
  std::vector<double> selected_sum;  // sum_{j in A} s_ij
  std::vector<double> remaining_sum; // sum_{j in W} s_ij

  static GraphCutCache build(Objective const &obj, std::span<Index const> selected,
                             std::span<Index const> remaining, bool)
  {
    auto const   &s = obj.similarity();
    Index const   n = obj.ground_size();
    GraphCutCache c;
    c.column_sum.assign(n, 0.0);
    c.selected_sum.assign(n, 0.0);
    c.remaining_sum.assign(n, 0.0);
    for (Index i = 0; i < n; ++i)
    {
      auto const row = s.row(i);
      for (Index j = 0; j < n; ++j)
      {
        c.column_sum[i] += row[j];
      }
      for (Index j : selected)
      {
        c.selected_sum[i] += row[j];
      }
      for (Index j : remaining)
      {
        c.remaining_sum[i] += row[j];
      }
    }
    return c;
  }

  double forward_gain(Objective const &obj, Index e) const
  {
    return column_sum[e] - obj.lambda() * (2.0 * selected_sum[e] + obj.similarity()(e, e));
  }

  double removal_gain(Objective const &obj, Index e) const
  {
    return column_sum[e] - obj.lambda() * (2.0 * remaining_sum[e] - obj.similarity()(e, e));
  }

  void commit(Objective const &obj, Index e, std::span<Index const>, bool)
  {
    auto const row = obj.similarity().row(e);
    for (Index i = 0; i < column_sum.size(); ++i)
    {
      selected_sum[i] += row[i];
      remaining_sum[i] -= row[i];
    }
  }

  double value_over(Objective const &obj, std::vector<double> const &inner, bool selected_side,
                    std::vector<char> const &member) const
  {
    double v = 0.0;
    for (Index j = 0; j < column_sum.size(); ++j)
    {
      if (static_cast<bool>(member[j]) == selected_side)
      {
        v += column_sum[j] - obj.lambda() * inner[j];
      }
    }
    return v;
  }
};

struct LogDetCache
{
  // Forward: incremental Cholesky of M_A, M = S + jitter*I. For every e, chol[e]
  // holds L_A^{-1} M_{A,e} and residual[e] = M_ee - ||chol[e]||^2.
  std::vector<std::vector<double>> chol;
  std::vector<double>              residual;
  double                           selected_logdet{0.0};

  // Complement: inverse of M_W in position order, plus log det M_W.
  Eigen::MatrixXd    inverse;
  std::vector<Index> position;  // position of j in `inverse`, kNoIndex when j not in W
  std::vector<Index> order;     // order[p] = element at position p
  double             remaining_logdet{0.0};
  int                downdates_since_refactor{0};
  int                refactorizations{0};

  static constexpr int kRefactorEvery = 64;

  static double entry(Objective const &obj, Index i, Index j)
  {
    return obj.similarity()(i, j) + (i == j ? obj.jitter() : 0.0);
  }

  void factor_remaining(Objective const &obj, std::span<Index const> remaining)
  {
    Index const m = remaining.size();
    order.assign(remaining.begin(), remaining.end());
    position.assign(obj.ground_size(), kNoIndex);
    for (Index p = 0; p < m; ++p)
    {
      position[order[p]] = p;
    }
    downdates_since_refactor = 0;
    ++refactorizations;
    if (m == 0)
    {
      inverse.resize(0, 0);
      remaining_logdet = 0.0;
      return;
    }
    Eigen::MatrixXd block(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (Index a = 0; a < m; ++a)
    {
      for (Index b = 0; b < m; ++b)
      {
        block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = entry(obj, order[a], order[b]);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success)
    {
      throw numerical_error("SingularSubmatrix", "S_W + jitter*I is not positive definite");
    }
    Eigen::MatrixXd const &lower = llt.matrixLLT();
    double                 ld    = 0.0;
    for (Eigen::Index p = 0; p < lower.rows(); ++p)
    {
      double const d = lower(p, p) * lower(p, p);
      if (!(d >= kPivotFloor))
      {
        throw numerical_error("SingularSubmatrix", "S_W + jitter*I is numerically singular");
      }
      ld += std::log(d);
    }
    remaining_logdet = ld;
    inverse          = llt.solve(Eigen::MatrixXd::Identity(block.rows(), block.cols()));
    inverse          = 0.5 * (inverse + inverse.transpose()).eval();
  }

  static LogDetCache build(Objective const &obj, std::span<Index const> selected,
                           std::span<Index const> remaining, bool complement)
  {
    Index const n = obj.ground_size();
    LogDetCache c;
    c.chol.assign(n, {});
    c.residual.resize(n);
    for (Index e = 0; e < n; ++e)
    {
      c.residual[e] = entry(obj, e, e);
    }
    for (Index j : selected)
    {
      c.extend_forward(obj, j);
    }
    if (complement)
    {
      c.factor_remaining(obj, remaining);
      c.refactorizations = 0;
    }
    return c;
  }

  void extend_forward(Objective const &obj, Index j)
  {
    double const d = residual[j];
    if (!(d >= kPivotFloor))
    {
      throw numerical_error("SingularSubmatrix", "adding element " + std::to_string(j) +
                                                     " makes S_A + jitter*I singular");
    }
    double const root = std::sqrt(d);
    selected_logdet += std::log(d);
    auto const &cj = chol[j];
    for (Index e = 0; e < chol.size(); ++e)
    {
      if (e == j || residual[e] < 0.0)
      {
        continue;
      }
      auto        &ce  = chol[e];
      double       dot = 0.0;
      for (Index t = 0; t < cj.size(); ++t)
      {
        dot += cj[t] * ce[t];
      }
      double const v = (entry(obj, e, j) - dot) / root;
      ce.push_back(v);
      residual[e] -= v * v;
    }
    chol[j].push_back(root);
    // -1 marks a committed element so later updates skip it.
    residual[j] = -1.0;
  }

  double forward_gain(Objective const &, Index e) const
  {
    double const r = residual[e];
    return r > 0.0 ? std::log(r) : -std::numeric_limits<double>::infinity();
  }

  double removal_gain(Objective const &, Index e) const
  {
    auto const p = static_cast<Eigen::Index>(position[e]);
    return -std::log(inverse(p, p));
  }

  void commit(Objective const &obj, Index e, std::span<Index const> remaining, bool complement)
  {
    extend_forward(obj, e);
    if (!complement)
    {
      return;
    }
    auto const   p     = static_cast<Eigen::Index>(position[e]);
    double const pivot = inverse(p, p);
    bool         ok    = std::isfinite(pivot) && pivot > 0.0 && 1.0 / pivot >= kPivotFloor;
    if (ok)
    {
      remaining_logdet += std::log(pivot);
      Eigen::VectorXd const col = inverse.col(p);
      inverse.noalias() -= (col / pivot) * col.transpose();
      // Swap-remove position p.
      Eigen::Index const last = inverse.rows() - 1;
      if (p != last)
      {
        inverse.row(p) = inverse.row(last);
        inverse.col(p) = inverse.col(last);
        Index const moved = order[static_cast<Index>(last)];
        order[static_cast<Index>(p)] = moved;
        position[moved]              = static_cast<Index>(p);
      }
      order.pop_back();
      position[e] = kNoIndex;
      inverse.conservativeResize(last, last);
      ++downdates_since_refactor;
      for (Eigen::Index q = 0; q < inverse.rows() && ok; ++q)
      {
        double const d = inverse(q, q);
        ok             = std::isfinite(d) && d > 0.0 && 1.0 / d >= kPivotFloor;
      }
    }
    if (!ok || downdates_since_refactor >= kRefactorEvery)
    {
      factor_remaining(obj, remaining);
    }
  }
};

struct PscCache
{
  // Products are kept in log space over factors with p < 1 and a separate count of
  // p == 1 factors, so removals never divide by zero and nothing underflows.
  std::shared_ptr<Matrix const> transposed;  // transposed(e, i) = p_ie
  std::vector<double>           sel_log;
  std::vector<Index>            sel_ones;
  std::vector<double>           sel_miss;  // prod_{j in A} (1 - p_ij)
  std::vector<double>           rem_log;
  std::vector<Index>            rem_ones;
  std::vector<double>           rem_free;  // prod over W of factors with p < 1

  static double miss(double log_sum, Index ones)
  {
    return ones > 0 ? 0.0 : std::exp(log_sum);
  }

  static PscCache build(Objective const &obj, std::span<Index const> selected,
                        std::span<Index const> remaining, bool complement)
  {
    auto const &p = obj.coverage();
    Index const n = obj.ground_size();
    PscCache    c;
    auto        t = std::make_shared<Matrix>(n, n);
    for (Index i = 0; i < n; ++i)
    {
      for (Index j = 0; j < n; ++j)
      {
        (*t)(j, i) = p(i, j);
      }
    }
    c.transposed = std::move(t);
    auto accumulate = [&](std::span<Index const> set, std::vector<double> &logs, std::vector<Index> &ones) {
      logs.assign(n, 0.0);
      ones.assign(n, 0);
      for (Index i = 0; i < n; ++i)
      {
        for (Index j : set)
        {
          double const v = p(i, j);
          if (v >= 1.0)
          {
            ++ones[i];
          }
          else
          {
            logs[i] += std::log1p(-v);
          }
        }
      }
    };
    accumulate(selected, c.sel_log, c.sel_ones);
    c.sel_miss.resize(n);
    for (Index i = 0; i < n; ++i)
    {
      c.sel_miss[i] = miss(c.sel_log[i], c.sel_ones[i]);
    }
    if (complement)
    {
      accumulate(remaining, c.rem_log, c.rem_ones);
      c.rem_free.resize(n);
      for (Index i = 0; i < n; ++i)
      {
        c.rem_free[i] = std::exp(c.rem_log[i]);
      }
    }
    return c;
  }

  double forward_gain(Objective const &, Index e) const
  {
    auto const row  = transposed->row(e);
    double     gain = 0.0;
    for (Index i = 0; i < row.size(); ++i)
    {
      gain += sel_miss[i] * row[i];
    }
    return gain;
  }

  // f(W) - f(W \ e) = sum_i p_ie * prod_{j in W \ e} (1 - p_ij)
  double removal_gain(Objective const &, Index e) const
  {
    auto const row  = transposed->row(e);
    double     gain = 0.0;
    for (Index i = 0; i < row.size(); ++i)
    {
      double const v = row[i];
      if (v <= 0.0)
      {
        continue;
      }
      double rest = 0.0;
      if (v >= 1.0)
      {
        rest = rem_ones[i] > 1 ? 0.0 : rem_free[i];
      }
      else if (rem_ones[i] == 0)
      {
        rest = rem_free[i] > 1e-280 ? rem_free[i] / (1.0 - v) : std::exp(rem_log[i] - std::log1p(-v));
      }
      gain += v * rest;
    }
    return gain;
  }

  void commit(Objective const &, Index e, std::span<Index const>, bool complement)
  {
    auto const row = transposed->row(e);
    for (Index i = 0; i < row.size(); ++i)
    {
      double const v = row[i];
      if (v >= 1.0)
      {
        ++sel_ones[i];
      }
      else
      {
        sel_log[i] += std::log1p(-v);
      }
      sel_miss[i] = miss(sel_log[i], sel_ones[i]);
      if (complement)
      {
        if (v >= 1.0)
        {
          --rem_ones[i];
        }
        else
        {
          rem_log[i] -= std::log1p(-v);
          rem_free[i] = std::exp(rem_log[i]);
        }
      }
    }
  }

  double forward_value(Objective const &) const
  {
    double v = 0.0;
    for (double q : sel_miss)
    {
      v += 1.0 - q;
    }
    return v;
  }

  double complement_value(Objective const &) const
  {
    double v = 0.0;
    for (Index i = 0; i < rem_log.size(); ++i)
    {
      v += 1.0 - miss(rem_log[i], rem_ones[i]);
    }
    return v;
  }
};

struct SaturatedCache
{
  std::vector<double> selected_sum;   // a_i
  std::vector<double> remaining_sum;  // b_i

  static SaturatedCache build(Objective const &obj, std::span<Index const> selected,
                              std::span<Index const> remaining, bool complement)
  {
    auto const    &s = obj.similarity();
    Index const    n = obj.ground_size();
    SaturatedCache c;
    c.selected_sum.assign(n, 0.0);
    for (Index i = 0; i < n; ++i)
    {
      auto const row = s.row(i);
      for (Index j : selected)
      {
        c.selected_sum[i] += row[j];
      }
    }
    if (complement)
    {
      c.remaining_sum.assign(n, 0.0);
      for (Index i = 0; i < n; ++i)
      {
        auto const row = s.row(i);
        for (Index j : remaining)
        {
          c.remaining_sum[i] += row[j];
        }
      }
    }
    return c;
  }

  double forward_gain(Objective const &obj, Index e) const
  {
    double const alpha = obj.alpha();
    auto const   row   = obj.similarity().row(e);
    double       gain  = 0.0;
    for (Index i = 0; i < row.size(); ++i)
    {
      double const a = selected_sum[i];
      if (a < alpha)
      {
        gain += std::min(alpha, a + row[i]) - a;
      }
    }
    return gain;
  }

  double removal_gain(Objective const &obj, Index e) const
  {
    double const alpha = obj.alpha();
    auto const   row   = obj.similarity().row(e);
    double       gain  = 0.0;
    for (Index i = 0; i < row.size(); ++i)
    {
      double const b = remaining_sum[i];
      gain += std::min(alpha, b) - std::min(alpha, b - row[i]);
    }
    return gain;
  }

  void commit(Objective const &obj, Index e, std::span<Index const>, bool complement)
  {
    auto const row = obj.similarity().row(e);
    for (Index i = 0; i < row.size(); ++i)
    {
      selected_sum[i] += row[i];
      if (complement)
      {
        remaining_sum[i] -= row[i];
      }
    }
  }

  double forward_value(Objective const &obj) const
  {
    double v = 0.0;
    for (double a : selected_sum)
    {
      v += std::min(obj.alpha(), a);
    }
    return v;
  }

  double complement_value(Objective const &obj) const
  {
    double v = 0.0;
    for (double b : remaining_sum)
    {
      v += std::min(obj.alpha(), b);
    }
    return v;
  }
};

struct FeatureCache
{
  std::vector<double> selected_sum;   // per feature, over A
  std::vector<double> remaining_sum;  // per feature, over W

  static FeatureCache build(Objective const &obj, std::span<Index const> selected,
                            std::span<Index const> remaining, bool complement)
  {
    auto const  &x = obj.features();
    FeatureCache c;
    c.selected_sum.assign(x.cols(), 0.0);
    for (Index j : selected)
    {
      auto const row = x.row(j);
      for (Index l = 0; l < row.size(); ++l)
      {
        c.selected_sum[l] += row[l];
      }
    }
    if (complement)
    {
      c.remaining_sum.assign(x.cols(), 0.0);
      for (Index j : remaining)
      {
        auto const row = x.row(j);
        for (Index l = 0; l < row.size(); ++l)
        {
          c.remaining_sum[l] += row[l];
        }
      }
    }
    return c;
  }

  double forward_gain(Objective const &obj, Index e) const
  {
    auto const row  = obj.features().row(e);
    double     gain = 0.0;
    for (Index l = 0; l < row.size(); ++l)
    {
      if (row[l] != 0.0)
      {
        gain += apply_concave(obj.psi(), selected_sum[l] + row[l]) - apply_concave(obj.psi(), selected_sum[l]);
      }
    }
    return gain;
  }

  double removal_gain(Objective const &obj, Index e) const
  {
    auto const row  = obj.features().row(e);
    double     gain = 0.0;
    for (Index l = 0; l < row.size(); ++l)
    {
      if (row[l] != 0.0)
      {
        gain += apply_concave(obj.psi(), remaining_sum[l]) -
                apply_concave(obj.psi(), remaining_sum[l] - row[l]);
      }
    }
    return gain;
  }

  void commit(Objective const &obj, Index e, std::span<Index const>, bool complement)
  {
    auto const row = obj.features().row(e);
    for (Index l = 0; l < row.size(); ++l)
    {
      selected_sum[l] += row[l];
      if (complement)
      {
        remaining_sum[l] -= row[l];
      }
    }
  }

  double forward_value(Objective const &obj) const
  {
    double v = 0.0;
    for (double c : selected_sum)
    {
      v += apply_concave(obj.psi(), c);
    }
    return v;
  }

  double complement_value(Objective const &obj) const
  {
    double v = 0.0;
    for (double c : remaining_sum)
    {
      v += apply_concave(obj.psi(), c);
    }
    return v;
  }
};

using CacheVariant =
    std::variant<FacilityCache, GraphCutCache, LogDetCache, PscCache, SaturatedCache, FeatureCache>;

inline CacheVariant build_cache(Objective const &obj, std::span<Index const> selected,
                                std::span<Index const> remaining, bool complement)
{
  switch (obj.kind())
  {
  case Kind::FacilityLocation:
    return FacilityCache::build(obj, selected, remaining, complement);
  case Kind::GraphCut:
    return GraphCutCache::build(obj, selected, remaining, complement);
  case Kind::LogDet:
    return LogDetCache::build(obj, selected, remaining, complement);
  case Kind::ProbabilisticSetCover:
    return PscCache::build(obj, selected, remaining, complement);
  case Kind::SaturatedCoverage:
    return SaturatedCache::build(obj, selected, remaining, complement);
  case Kind::FeatureBased:
    return FeatureCache::build(obj, selected, remaining, complement);
  }
  throw config_error("UnknownObjective", "unhandled kind");
}

}  // namespace detail

/**
 * Current selection A together with memoized state for A and for its
 * complement W = V \ A.
 *
 * Gain queries are const and may run concurrently between commits; commit()
 * needs exclusive access. Built with `track_complement = false` the state only
 * supports forward (base objective) queries.
 */
class DualSelectionState
{
public:
  explicit DualSelectionState(Objective objective, bool track_complement = true)
    : DualSelectionState(std::move(objective), std::span<Index const>{}, track_complement)
  {}

  /// Builds the caches from scratch for an arbitrary starting set.
  DualSelectionState(Objective objective, std::span<Index const> initial, bool track_complement = true)
    : objective_(std::move(objective))
    , track_complement_(track_complement)
    , member_(objective_.ground_size(), 0)
  {
    Index const n = objective_.ground_size();
    for (Index e : initial)
    {
      if (e >= n)
      {
        throw config_error("IndexOutOfRange", "index " + std::to_string(e) + " outside ground set");
      }
      if (member_[e])
      {
        throw config_error("AlreadySelected", "duplicate index " + std::to_string(e));
      }
      member_[e] = 1;
      selected_.push_back(e);
    }
    remaining_ = complement_of(selected_, n);
    cache_ = detail::build_cache(objective_, selected_, remaining_, track_complement_);
    if (track_complement_)
    {
      // f(V) is the complement-side value at A = empty.
      full_value_ = selected_.empty() ? complement_value_of(cache_)
                                      : DualSelectionState(objective_, true).complement_value();
    }
  }

  Objective const &objective() const noexcept
  {
    return objective_;
  }
  Index ground_size() const noexcept
  {
    return objective_.ground_size();
  }
  std::vector<Index> const &selected() const noexcept
  {
    return selected_;
  }
  std::vector<Index> const &remaining() const noexcept
  {
    return remaining_;
  }
  bool contains(Index e) const
  {
    return member_.at(e) != 0;
  }
  bool tracks_complement() const noexcept
  {
    return track_complement_;
  }

  /// f(e | A)
  double forward_gain(Index e) const
  {
    check_candidate(e);
    return std::visit([&](auto const &c) { return c.forward_gain(objective_, e); }, cache_);
  }

  /// f(e | V \ (A + e)) = f(V \ A) - f((V \ A) - e)
  double complement_removal_gain(Index e) const
  {
    check_candidate(e);
    require_complement();
    return std::visit([&](auto const &c) { return c.removal_gain(objective_, e); }, cache_);
  }

  /// Marginal gain of the complement-information objective.
  double csi_gain(Index e) const
  {
    return forward_gain(e) - complement_removal_gain(e);
  }

  void commit(Index e)
  {
    check_candidate(e);
    member_[e] = 1;
    selected_.push_back(e);
    remaining_.erase(std::lower_bound(remaining_.begin(), remaining_.end(), e));
    std::visit([&](auto &c) { c.commit(objective_, e, remaining_, track_complement_); }, cache_);
  }

  /// f(A) from the forward cache.
  double forward_value() const
  {
    return std::visit(
        [&](auto const &c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, detail::GraphCutCache>)
          {
            return c.value_over(objective_, c.selected_sum, true, member_);
          }
          else if constexpr (std::is_same_v<T, detail::LogDetCache>)
          {
            return c.selected_logdet;
          }
          else
          {
            return c.forward_value(objective_);
          }
        },
        cache_);
  }

  /// f(V \ A) from the complement cache.
  double complement_value() const
  {
    require_complement();
    return complement_value_of(cache_);
  }

  double full_value() const
  {
    require_complement();
    return full_value_;
  }

  /// f(A) + f(V \ A) - f(V)
  double csi_value() const
  {
    return forward_value() + complement_value() - full_value();
  }

  /// Number of from-scratch LogDet complement factorizations since construction.
  int refactorizations() const
  {
    if (auto const *ld = std::get_if<detail::LogDetCache>(&cache_))
    {
      return ld->refactorizations;
    }
    return 0;
  }

  /**
   * Largest relative discrepancy between this (incrementally maintained) state
   * and a fresh build on the same A: compares both side values and every
   * forward and removal gain. Discrepancies are scaled by max(1, |fresh|).
   */
  double cache_drift() const
  {
    DualSelectionState fresh(objective_, selected_, track_complement_);
    double             worst = 0.0;
    auto               rel   = [&](double a, double b) {
      if (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0))
      {
        return;
      }
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
    };
    rel(forward_value(), fresh.forward_value());
    if (track_complement_)
    {
      rel(complement_value(), fresh.complement_value());
    }
    for (Index e : remaining_)
    {
      rel(forward_gain(e), fresh.forward_gain(e));
      if (track_complement_)
      {
        rel(complement_removal_gain(e), fresh.complement_removal_gain(e));
      }
    }
    return worst;
  }

private:
  double complement_value_of(detail::CacheVariant const &cache) const
  {
    return std::visit(
        [&](auto const &c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, detail::GraphCutCache>)
          {
            return c.value_over(objective_, c.remaining_sum, false, member_);
          }
          else if constexpr (std::is_same_v<T, detail::LogDetCache>)
          {
            return c.remaining_logdet;
          }
          else
          {
            return c.complement_value(objective_);
          }
        },
        cache);
  }

  void check_candidate(Index e) const
  {
    if (e >= member_.size())
    {
      throw config_error("IndexOutOfRange", "index " + std::to_string(e) + " outside ground set");
    }
    if (member_[e])
    {
      throw config_error("AlreadySelected", "element " + std::to_string(e) + " is already selected");
    }
  }

  void require_complement() const
  {
    if (!track_complement_)
    {
      throw config_error("ComplementNotTracked", "state was built without complement caches");
    }
  }

  Objective            objective_;
  bool                 track_complement_;
  std::vector<char>    member_;
  std::vector<Index>   selected_;
  std::vector<Index>   remaining_;
  double               full_value_{0.0};
  detail::CacheVariant cache_;
};

inline DualSelectionState build_dual_state(Objective const &objective, bool track_complement = true)
{
  return DualSelectionState(objective, track_complement);
}

}  // namespace csi
