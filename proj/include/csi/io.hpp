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

#include <bit>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "csi/common.hpp"
#include "csi/similarity.hpp"
#include "csi/slices.hpp"
#include "csi/synthgen.hpp"

namespace csi {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// Shortest round-trip decimal form.
inline std::string format_double(double x)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
  {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
  {
    s.remove_suffix(1);
  }
  if (!s.empty() && s.front() == '+')
  {
    s.remove_prefix(1);
  }
  double value = 0.0;
  auto   res   = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
  {
    return std::nullopt;
  }
  return value;
}

struct CsvTable
{
  std::vector<std::string>              header;  // empty when the file has none
  std::vector<std::vector<std::string>> rows;

  std::optional<Index> column(std::string_view name) const
  {
    for (Index c = 0; c < header.size(); ++c)
    {
      if (header[c] == name)
      {
        return c;
      }
    }
    return std::nullopt;
  }
};

inline std::vector<std::string> split_csv_line(std::string const &line)
{
  std::vector<std::string> out;
  std::string              cell;
  std::istringstream       in(line);
  while (std::getline(in, cell, ','))
  {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
    {
      cell.pop_back();
    }
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',')
  {
    out.emplace_back();
  }
  return out;
}

/// A first line with any non-numeric cell is taken as a header.
inline CsvTable read_csv(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw io_error("cannot open " + path.string());
  }
  CsvTable    t;
  std::string line;
  bool        first = true;
  while (std::getline(in, line))
  {
    if (line.empty() || line == "\r")
    {
      continue;
    }
    auto cells = split_csv_line(line);
    if (first)
    {
      first = false;
      for (auto const &c : cells)
      {
        if (!parse_double(c))
        {
          t.header = cells;
          break;
        }
      }
      if (!t.header.empty())
      {
        continue;
      }
    }
    if (!t.rows.empty() && cells.size() != t.rows.front().size())
    {
      throw io_error(path.string() + ": ragged CSV row");
    }
    t.rows.push_back(std::move(cells));
  }
  if (!t.header.empty() && !t.rows.empty() && t.rows.front().size() != t.header.size())
  {
    throw io_error(path.string() + ": header and rows disagree on column count");
  }
  return t;
}

namespace detail {

inline double cell_double(CsvTable const &t, Index r, Index c)
{
  auto v = parse_double(t.rows[r][c]);
  if (!v)
  {
    throw io_error("non-numeric cell '" + t.rows[r][c] + "' at row " + std::to_string(r));
  }
  return *v;
}

inline int cell_int(CsvTable const &t, Index r, Index c)
{
  double const v = cell_double(t, r, c);
  if (v != std::floor(v))
  {
    throw io_error("non-integer label at row " + std::to_string(r));
  }
  return static_cast<int>(v);
}

inline std::ofstream open_out(std::filesystem::path const &path, bool binary = false)
{
  if (path.has_parent_path())
  {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out)
  {
    throw io_error("cannot write " + path.string());
  }
  return out;
}

/// Embedding columns: those named x<digits>, or every column when there is no header.
inline std::vector<Index> embedding_columns(CsvTable const &t)
{
  std::vector<Index> cols;
  if (t.header.empty())
  {
    for (Index c = 0; !t.rows.empty() && c < t.rows.front().size(); ++c)
    {
      cols.push_back(c);
    }
    return cols;
  }
  for (Index c = 0; c < t.header.size(); ++c)
  {
    auto const &h = t.header[c];
    if (h.size() > 1 && h[0] == 'x' && h.find_first_not_of("0123456789", 1) == std::string::npos)
    {
      cols.push_back(c);
    }
  }
  return cols;
}

inline Matrix embeddings_from(CsvTable const &t, std::vector<Index> const &cols)
{
  if (t.rows.empty() || cols.empty())
  {
    throw io_error("no embedding data found");
  }
  Matrix e(t.rows.size(), cols.size());
  for (Index r = 0; r < t.rows.size(); ++r)
  {
    for (Index c = 0; c < cols.size(); ++c)
    {
      e(r, c) = cell_double(t, r, cols[c]);
    }
  }
  return e;
}

inline void write_row_prefix(std::ostream &out, Matrix const &e, Index i)
{
  for (Index j = 0; j < e.cols(); ++j)
  {
    out << (j ? "," : "") << format_double(e(i, j));
  }
}

inline void write_embedding_header(std::ostream &out, Index d)
{
  for (Index j = 0; j < d; ++j)
  {
    out << (j ? "," : "") << 'x' << j;
  }
}

}  // namespace detail

inline Matrix read_embeddings_csv(std::filesystem::path const &path)
{
  auto const t = read_csv(path);
  return detail::embeddings_from(t, detail::embedding_columns(t));
}

inline void write_embeddings_csv(std::filesystem::path const &path, Matrix const &e)
{
  auto out = detail::open_out(path);
  detail::write_embedding_header(out, e.cols());
  out << '\n';
  for (Index i = 0; i < e.rows(); ++i)
  {
    detail::write_row_prefix(out, e, i);
    out << '\n';
  }
}

/// Embeddings plus an integer label column named `label` or `class`, if present.
struct LabeledEmbeddings
{
  Matrix                          embeddings;
  std::optional<std::vector<int>> labels;
};

inline LabeledEmbeddings read_labeled_embeddings_csv(std::filesystem::path const &path)
{
  auto const        t = read_csv(path);
  LabeledEmbeddings out;
  out.embeddings = detail::embeddings_from(t, detail::embedding_columns(t));
  auto col       = t.column("label");
  if (!col)
  {
    col = t.column("class");
  }
  if (col)
  {
    std::vector<int> labels;
    for (Index r = 0; r < t.rows.size(); ++r)
    {
      labels.push_back(detail::cell_int(t, r, *col));
    }
    out.labels = std::move(labels);
  }
  return out;
}

inline void write_synthetic_csv(std::filesystem::path const &path, SyntheticDataset const &d)
{
  auto out = detail::open_out(path);
  detail::write_embedding_header(out, d.embeddings.cols());
  out << ",cluster_label,role\n";
  for (Index i = 0; i < d.size(); ++i)
  {
    detail::write_row_prefix(out, d.embeddings, i);
    out << ',' << d.cluster_label[i] << ',' << role_name(d.role[i]) << '\n';
  }
}

inline bool is_synthetic_table(CsvTable const &t)
{
  return t.column("cluster_label") && t.column("role");
}

inline SyntheticDataset synthetic_from_table(CsvTable const &t, std::string const &path = "input")
{
  auto const label = t.column("cluster_label");
  auto const role  = t.column("role");
  if (!label || !role)
  {
    throw io_error(path + ": expected cluster_label and role columns");
  }
  SyntheticDataset d;
  d.embeddings = detail::embeddings_from(t, detail::embedding_columns(t));
  for (Index r = 0; r < t.rows.size(); ++r)
  {
    d.cluster_label.push_back(detail::cell_int(t, r, *label));
    d.role.push_back(parse_role(t.rows[r][*role]));
  }
  return d;
}

inline SyntheticDataset read_synthetic_csv(std::filesystem::path const &path)
{
  return synthetic_from_table(read_csv(path), path.string());
}

inline void write_sliced_csv(std::filesystem::path const &path, SlicedDataset const &d)
{
  auto out = detail::open_out(path);
  detail::write_embedding_header(out, d.embeddings.cols());
  out << ",class,slice,role,outlier_flag,noise_flag\n";
  for (Index i = 0; i < d.size(); ++i)
  {
    detail::write_row_prefix(out, d.embeddings, i);
    out << ',' << d.class_label[i] << ',' << d.slice_label[i] << ',' << role_name(d.point_role(i)) << ','
        << int{d.outlier_flag[i]} << ',' << int{d.noise_flag[i]} << '\n';
  }
}

inline bool is_sliced_table(CsvTable const &t)
{
  return t.column("class") && t.column("slice") && t.column("role") && t.column("outlier_flag") &&
         t.column("noise_flag");
}

inline SlicedDataset sliced_from_table(CsvTable const &t, std::string const &path = "input")
{
  auto const cls = t.column("class");
  auto const slice = t.column("slice");
  auto const role = t.column("role");
  auto const outlier = t.column("outlier_flag");
  auto const noise = t.column("noise_flag");
  if (!cls || !slice || !role || !outlier || !noise)
  {
    throw io_error(path + ": expected class, slice, role, outlier_flag and noise_flag columns");
  }
  SlicedDataset d;
  d.embeddings = detail::embeddings_from(t, detail::embedding_columns(t));
  for (Index r = 0; r < t.rows.size(); ++r)
  {
    d.class_label.push_back(detail::cell_int(t, r, *cls));
    int const s = detail::cell_int(t, r, *slice);
    d.slice_label.push_back(s);
    d.outlier_flag.push_back(detail::cell_int(t, r, *outlier) != 0);
    d.noise_flag.push_back(detail::cell_int(t, r, *noise) != 0);
    d.origin.push_back(r);
    Role const point_role = parse_role(t.rows[r][*role]);
    if (s >= 0)
    {
      if (static_cast<Index>(s) >= d.slice_role.size())
      {
        d.slice_role.resize(static_cast<Index>(s) + 1, Role::Medium);
      }
      d.slice_role[static_cast<Index>(s)] = point_role;
    }
  }
  return d;
}

inline SlicedDataset read_sliced_csv(std::filesystem::path const &path)
{
  return sliced_from_table(read_csv(path), path.string());
}

inline void write_indices(std::filesystem::path const &path, std::span<Index const> indices)
{
  auto out = detail::open_out(path);
  for (Index i : indices)
  {
    out << i << '\n';
  }
}

inline std::vector<Index> read_indices(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw io_error("cannot open " + path.string());
  }
  std::vector<Index> out;
  std::string        line;
  while (std::getline(in, line))
  {
    if (line.empty() || line == "\r")
    {
      continue;
    }
    auto v = parse_double(line);
    if (!v || *v < 0 || *v != std::floor(*v))
    {
      throw io_error(path.string() + ": bad index line '" + line + "'");
    }
    out.push_back(static_cast<Index>(*v));
  }
  return out;
}

inline void write_text(std::filesystem::path const &path, std::string const &text)
{
  auto out = detail::open_out(path);
  out << text;
}

inline std::string read_text(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw io_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Binary matrix file: 4-byte magic "CSIM", uint64 rows, uint64 cols, then
// rows*cols float64 in row-major order, all little-endian.
inline constexpr char kMatrixMagic[4] = {'C', 'S', 'I', 'M'};

inline void write_matrix_binary(std::filesystem::path const &path, Matrix const &m)
{
  auto          out  = detail::open_out(path, true);
  std::uint64_t dims[2] = {m.rows(), m.cols()};
  out.write(kMatrixMagic, 4);
  out.write(reinterpret_cast<char const *>(dims), sizeof(dims));
  out.write(reinterpret_cast<char const *>(m.data().data()),
            static_cast<std::streamsize>(m.data().size() * sizeof(double)));
  if (!out)
  {
    throw io_error("failed writing " + path.string());
  }
}

inline Matrix read_matrix_binary(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw io_error("cannot open " + path.string());
  }
  char          magic[4];
  std::uint64_t dims[2];
  in.read(magic, 4);
  in.read(reinterpret_cast<char *>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, kMatrixMagic, 4) != 0)
  {
    throw io_error(path.string() + ": not a matrix file");
  }
  if (dims[0] > (1ULL << 20) || dims[1] > (1ULL << 20))
  {
    throw io_error(path.string() + ": implausible dimensions");
  }
  Matrix m(dims[0], dims[1]);
  in.read(reinterpret_cast<char *>(m.data().data()), static_cast<std::streamsize>(m.data().size() * sizeof(double)));
  if (!in)
  {
    throw io_error(path.string() + ": truncated matrix file");
  }
  return m;
}

/// Matrix from a binary file (".bin") or a CSV of numbers (a header row is skipped).
inline Matrix read_matrix_file(std::filesystem::path const &path)
{
  if (path.extension() == ".bin")
  {
    return read_matrix_binary(path);
  }
  auto const         t = read_csv(path);
  std::vector<Index> cols;
  for (Index c = 0; !t.rows.empty() && c < t.rows.front().size(); ++c)
  {
    cols.push_back(c);
  }
  return detail::embeddings_from(t, cols);
}

/// FNV-1a over the raw bytes of the embeddings, their shape and sigma.
inline std::uint64_t similarity_cache_key(Matrix const &e, double sigma)
{
  std::uint64_t h    = 0xcbf29ce484222325ULL;
  auto          feed = [&h](void const *p, std::size_t len) {
    auto const *b = static_cast<unsigned char const *>(p);
    for (std::size_t i = 0; i < len; ++i)
    {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  std::uint64_t dims[2] = {e.rows(), e.cols()};
  feed(dims, sizeof(dims));
  feed(e.data().data(), e.data().size() * sizeof(double));
  feed(&sigma, sizeof(sigma));
  return h;
}

/// RBF similarity, loaded from or stored to `cache_dir` when one is given.
inline SimilarityMatrix cached_rbf_kernel(Matrix const &e, double sigma, std::optional<std::filesystem::path> const &cache_dir)
{
  if (!cache_dir)
  {
    return rbf_kernel(e, sigma);
  }
  char name[40];
  std::snprintf(name, sizeof(name), "sim-%016llx.bin", static_cast<unsigned long long>(similarity_cache_key(e, sigma)));
  auto const path = *cache_dir / name;
  if (std::filesystem::exists(path))
  {
    auto m = read_matrix_binary(path);
    if (m.rows() == e.rows() && m.cols() == e.rows())
    {
      return SimilarityMatrix(std::move(m));
    }
  }
  auto s = rbf_kernel(e, sigma);
  write_matrix_binary(path, s.matrix());
  return s;
}

}  // namespace csi
