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
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace csi {

using Index = std::size_t;

/// Error categories. The CLI maps each category onto a process exit code.
enum class ErrorKind
{
  Config,     // bad parameters or inconsistent inputs
  Numerical,  // singular factorization, degenerate geometry
  Io
};

/**
 * Base exception for the library. `what()` carries a short machine-friendly
 * tag (e.g. "SingularSubmatrix") followed by a human message.
 */
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, std::string tag, std::string const &message)
    : std::runtime_error(tag + ": " + message)
    , kind_(kind)
    , tag_(std::move(tag))
  {}

  ErrorKind kind() const noexcept
  {
    return kind_;
  }

  std::string const &tag() const noexcept
  {
    return tag_;
  }

private:
  ErrorKind   kind_;
  std::string tag_;
};

inline Error config_error(std::string tag, std::string const &message)
{
  return Error(ErrorKind::Config, std::move(tag), message);
}

inline Error numerical_error(std::string tag, std::string const &message)
{
  return Error(ErrorKind::Numerical, std::move(tag), message);
}

inline Error io_error(std::string const &message)
{
  return Error(ErrorKind::Io, "Io", message);
}

/// Dense row-major matrix of doubles.
class Matrix
{
public:
  Matrix() = default;

  Matrix(Index rows, Index cols, double fill = 0.0)
    : rows_(rows)
    , cols_(cols)
    , data_(rows * cols, fill)
  {}

  static Matrix from_rows(std::vector<std::vector<double>> const &rows)
  {
    if (rows.empty())
    {
      return {};
    }
    Matrix m(rows.size(), rows.front().size());
    for (Index i = 0; i < rows.size(); ++i)
    {
      if (rows[i].size() != m.cols_)
      {
        throw config_error("RaggedRows", "row " + std::to_string(i) + " has a different length");
      }
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  static Matrix identity(Index n)
  {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
    {
      m(i, i) = 1.0;
    }
    return m;
  }

  Index rows() const noexcept
  {
    return rows_;
  }
  Index cols() const noexcept
  {
    return cols_;
  }
  bool empty() const noexcept
  {
    return data_.empty();
  }

  double &operator()(Index i, Index j) noexcept
  {
    return data_[i * cols_ + j];
  }
  double operator()(Index i, Index j) const noexcept
  {
    return data_[i * cols_ + j];
  }

  std::span<double> row(Index i) noexcept
  {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double const> row(Index i) const noexcept
  {
    return {data_.data() + i * cols_, cols_};
  }

  std::vector<double> const &data() const noexcept
  {
    return data_;
  }
  std::vector<double> &data() noexcept
  {
    return data_;
  }

  bool operator==(Matrix const &) const = default;

private:
  Index               rows_{0};
  Index               cols_{0};
  std::vector<double> data_;
};

inline double squared_distance(std::span<double const> a, std::span<double const> b)
{
  double acc = 0.0;
  for (Index k = 0; k < a.size(); ++k)
  {
    double const d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

inline double distance(std::span<double const> a, std::span<double const> b)
{
  return std::sqrt(squared_distance(a, b));
}

/// Indices in [0, n) that are not in `subset`. Output is sorted.
inline std::vector<Index> complement_of(std::span<Index const> subset, Index n)
{
  std::vector<char> in(n, 0);
  for (Index i : subset)
  {
    in[i] = 1;
  }
  std::vector<Index> out;
  out.reserve(n - std::min(n, subset.size()));
  for (Index i = 0; i < n; ++i)
  {
    if (!in[i])
    {
      out.push_back(i);
    }
  }
  return out;
}

inline std::vector<Index> iota_indices(Index n)
{
  std::vector<Index> v(n);
  for (Index i = 0; i < n; ++i)
  {
    v[i] = i;
  }
  return v;
}

/// Ground-truth role of a point; used only for evaluation, never for selection.
enum class Role
{
  Head,
  Medium,
  Tail,
  Outlier
};

inline std::string role_name(Role r)
{
  switch (r)
  {
  case Role::Head:
    return "head";
  case Role::Medium:
    return "medium";
  case Role::Tail:
    return "tail";
  case Role::Outlier:
    return "outlier";
  }
  return "?";
}

inline Role parse_role(std::string const &name)
{
  for (Role r : {Role::Head, Role::Medium, Role::Tail, Role::Outlier})
  {
    if (role_name(r) == name)
    {
      return r;
    }
  }
  throw config_error("UnknownRole", "unknown role '" + name + "'");
}

/// Label given to injected or synthetic outliers in cluster/class/slice columns.
inline constexpr int kOutlierLabel = -1;

}  // namespace csi
