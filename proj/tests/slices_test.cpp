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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "csi/slices.hpp"
#include "csi/synthgen.hpp"

using namespace csi;

namespace {

/// Two classes, each a mixture of blobs with sizes 60/30/10 in 2-D.
struct Labeled
{
  Matrix           e;
  std::vector<int> y;
};

Labeled labeled_blobs(std::uint64_t seed)
{
  SyntheticSpec spec;
  spec.clusters       = {{60, Role::Head}, {30, Role::Medium}, {10, Role::Tail},
                         {60, Role::Head}, {30, Role::Medium}, {10, Role::Tail}};
  spec.cluster_std    = 0.3;
  spec.center_spread  = 10.0;
  spec.min_center_gap = 4.0;
  spec.seed           = seed;
  auto const d        = generate(spec);
  Labeled    out{d.embeddings, {}};
  for (int l : d.cluster_label)
  {
    out.y.push_back(l / 3);
  }
  return out;
}

std::vector<double> nearest_neighbor_distances(Matrix const &from, Matrix const &to, bool same)
{
  std::vector<double> out;
  for (Index i = 0; i < from.rows(); ++i)
  {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < to.rows(); ++j)
    {
      if (same && i == j)
      {
        continue;
      }
      best = std::min(best, distance(from.row(i), to.row(j)));
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

TEST(KMeans, SeparatedPairs)
{
  auto const e = Matrix::from_rows({{0.0, 0.0}, {10.0, 10.0}, {0.1, 0.0}, {10.0, 10.1}});
  for (std::uint64_t seed = 0; seed < 10; ++seed)
  {
    auto const r = kmeans(e, 2, seed);
    EXPECT_EQ(r.labels[0], r.labels[2]);
    EXPECT_EQ(r.labels[1], r.labels[3]);
    EXPECT_NE(r.labels[0], r.labels[1]);
    EXPECT_NEAR(r.inertia, 2 * 0.05 * 0.05 * 2, 1e-12);
  }
}

TEST(KMeans, DegenerateK)
{
  auto const data = labeled_blobs(1);
  auto const one  = kmeans(data.e, 1, 3);
  EXPECT_TRUE(std::all_of(one.labels.begin(), one.labels.end(), [](int l) { return l == 0; }));

  auto const small = Matrix::from_rows({{0.0}, {1.0}, {3.0}, {7.0}, {15.0}});
  auto const each  = kmeans(small, 5, 3);
  EXPECT_EQ(std::set<int>(each.labels.begin(), each.labels.end()).size(), 5u);
  EXPECT_EQ(each.inertia, 0.0);

  try
  {
    kmeans(small, 6, 0);
    ADD_FAILURE();
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.tag(), "KTooLarge");
  }
}

TEST(KMeans, DeterministicPerSeed)
{
  auto const data = labeled_blobs(2);
  auto const a    = kmeans(data.e, 4, 17);
  auto const b    = kmeans(data.e, 4, 17);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.centers, b.centers);
  EXPECT_LE(a.iterations, kKMeansMaxIterations);
}

TEST(KMeans, DuplicatePointsStillFillEveryCluster)
{
  auto const e = Matrix::from_rows({{1.0}, {1.0}, {1.0}, {1.0}, {2.0}});
  auto const r = kmeans(e, 3, 0);
  EXPECT_EQ(r.labels.size(), 5u);
  EXPECT_NEAR(r.inertia, 0.0, 1e-12);
}

TEST(BuildSlices, LabelsAndPurity)
{
  auto const data = labeled_blobs(3);
  auto const s    = build_slices(data.e, data.y, 3, 9);
  std::set<int> ids(s.slice_label.begin(), s.slice_label.end());
  EXPECT_EQ(ids.size(), 6u);
  std::map<int, std::set<int>> classes_in_slice;
  for (Index i = 0; i < s.size(); ++i)
  {
    classes_in_slice[s.slice_label[i]].insert(s.class_label[i]);
    EXPECT_EQ(s.class_label[i], data.y[i]);
  }
  for (auto const &[slice, classes] : classes_in_slice)
  {
    EXPECT_EQ(classes.size(), 1u) << "slice " << slice;
  }
  auto const again = build_slices(data.e, data.y, 3, 9);
  EXPECT_EQ(again.slice_label, s.slice_label);
}

TEST(BuildSlices, RecoversBlobRoles)
{
  auto const data = labeled_blobs(4);
  auto const s    = build_slices(data.e, data.y, 3, 1);
  // each class has exactly one slice per role, and the blob structure is recovered
  std::map<int, std::map<Role, Index>> per_class;
  for (Index id = 0; id < s.slice_role.size(); ++id)
  {
    ++per_class[static_cast<int>(id / 3)][s.slice_role[id]];
  }
  for (auto const &[cls, counts] : per_class)
  {
    EXPECT_EQ(counts.at(Role::Head), 1u);
    EXPECT_EQ(counts.at(Role::Medium), 1u);
    EXPECT_EQ(counts.at(Role::Tail), 1u);
  }
  Index tail_points = 0;
  for (Index i = 0; i < s.size(); ++i)
  {
    tail_points += s.point_role(i) == Role::Tail ? 1 : 0;
  }
  EXPECT_EQ(tail_points, 20u);
}

TEST(BuildSlices, ClassTooSmall)
{
  auto const       e = Matrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}});
  std::vector<int> y{0, 0, 0, 1};
  try
  {
    build_slices(e, y, 2, 0);
    ADD_FAILURE();
  }
  catch (Error const &err)
  {
    EXPECT_EQ(err.tag(), "ClassTooSmall");
  }
}

TEST(SliceRoles, SortedThirds)
{
  // one class, sizes 100 / 50 / 10 on slice ids 2 / 0 / 1
  std::vector<int> cls(160, 0);
  std::vector<int> slice;
  slice.insert(slice.end(), 50, 0);
  slice.insert(slice.end(), 10, 1);
  slice.insert(slice.end(), 100, 2);
  auto const roles = assign_slice_roles(cls, slice);
  EXPECT_EQ(roles, (std::vector<Role>{Role::Medium, Role::Tail, Role::Head}));
}

TEST(SliceRoles, TiesBrokenBySliceId)
{
  std::vector<int> cls(30, 0);
  std::vector<int> slice;
  for (int id = 0; id < 3; ++id)
  {
    slice.insert(slice.end(), 10, id);
  }
  auto const roles = assign_slice_roles(cls, slice);
  EXPECT_EQ(roles, (std::vector<Role>{Role::Head, Role::Medium, Role::Tail}));
}

TEST(SliceRoles, TooFewSlices)
{
  std::vector<int> cls(4, 0);
  std::vector<int> slice{0, 0, 1, 1};
  try
  {
    assign_slice_roles(cls, slice);
    ADD_FAILURE();
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.tag(), "TooFewSlices");
  }
}

TEST(Subsample, Extremes)
{
  auto const data = labeled_blobs(5);
  auto const s    = build_slices(data.e, data.y, 3, 2);
  auto const all  = subsample_slices(s, {1.0, 1.0, 1.0}, 4);
  EXPECT_EQ(all.embeddings, s.embeddings);
  EXPECT_EQ(all.slice_label, s.slice_label);
  auto const no_tail = subsample_slices(s, {1.0, 1.0, 0.0}, 4);
  for (Index i = 0; i < no_tail.size(); ++i)
  {
    EXPECT_NE(no_tail.point_role(i), Role::Tail);
    EXPECT_EQ(no_tail.class_label[i], data.y[no_tail.origin[i]]);
  }
  EXPECT_THROW(subsample_slices(s, {1.2, 1.0, 1.0}, 0), Error);
}

TEST(Subsample, TailRetentionWithinBinomialBand)
{
  double kept = 0.0, total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
  {
    auto const data = labeled_blobs(100 + seed);
    auto const s    = build_slices(data.e, data.y, 3, seed);
    auto const sub  = subsample_slices(s, {}, derive_seed(seed, 2));
    for (Index i = 0; i < s.size(); ++i)
    {
      total += s.point_role(i) == Role::Tail ? 1.0 : 0.0;
    }
    for (Index i = 0; i < sub.size(); ++i)
    {
      kept += sub.point_role(i) == Role::Tail ? 1.0 : 0.0;
    }
  }
  double const sd = std::sqrt(0.15 * 0.85 / total);
  EXPECT_NEAR(kept / total, 0.15, 3.0 * sd);
}

TEST(Inject, ZeroFractionsLeaveDataUnchanged)
{
  auto const data = labeled_blobs(6);
  auto const s    = build_slices(data.e, data.y, 3, 2);
  auto const same = inject_outliers(s, 0.0, 0.0, 1);
  EXPECT_EQ(same.embeddings, s.embeddings);
  EXPECT_EQ(std::count(same.outlier_flag.begin(), same.outlier_flag.end(), true), 0);
  EXPECT_EQ(std::count(same.noise_flag.begin(), same.noise_flag.end(), true), 0);
}

TEST(Inject, CountsAndLabels)
{
  SlicedDataset d;
  d.embeddings = Matrix(1000, 2);
  Rng rng(3);
  for (double &v : d.embeddings.data())
  {
    v = rng.normal();
  }
  d.class_label.assign(1000, 0);
  d.slice_label.assign(1000, 0);
  d.slice_role   = {Role::Head};
  d.outlier_flag.assign(1000, false);
  d.noise_flag.assign(1000, false);
  d.origin = iota_indices(1000);

  auto const out = inject_outliers(d, 0.05, 0.03, 11);
  EXPECT_EQ(out.size(), 1050u);
  EXPECT_EQ(std::count(out.outlier_flag.begin(), out.outlier_flag.end(), true), 50);
  EXPECT_EQ(std::count(out.noise_flag.begin(), out.noise_flag.end(), true), 30);
  for (Index i = 0; i < out.size(); ++i)
  {
    if (out.outlier_flag[i])
    {
      EXPECT_EQ(out.class_label[i], kOutlierLabel);
      EXPECT_EQ(out.slice_label[i], kOutlierLabel);
      EXPECT_EQ(out.point_role(i), Role::Outlier);
      EXPECT_EQ(out.origin[i], kNoOrigin);
    }
    else
    {
      EXPECT_EQ(out.class_label[i], 0);
    }
  }
  EXPECT_THROW(inject_outliers(d, 1.0, 0.0, 0), Error);
  EXPECT_EQ(count_for_fraction(0.07, 100, true), 7u);
  EXPECT_EQ(count_for_fraction(0.07, 100, false), 7u);
}

TEST(Inject, ShellOutliersAreIsolated)
{
  for (std::uint64_t seed = 0; seed < 10; ++seed)
  {
    auto const data  = labeled_blobs(200 + seed);
    auto const s     = build_slices(data.e, data.y, 3, seed);
    auto const out   = inject_outliers(s, 0.05, 0.0, seed);
    auto       clean = nearest_neighbor_distances(s.embeddings, s.embeddings, true);
    std::sort(clean.begin(), clean.end());
    double const p95 = clean[static_cast<Index>(std::ceil(0.95 * static_cast<double>(clean.size()))) - 1];
    Matrix       shell(out.size() - s.size(), 2);
    for (Index i = s.size(); i < out.size(); ++i)
    {
      std::copy(out.embeddings.row(i).begin(), out.embeddings.row(i).end(), shell.row(i - s.size()).begin());
    }
    for (double d : nearest_neighbor_distances(shell, s.embeddings, false))
    {
      EXPECT_GT(d, p95) << "seed " << seed;
    }
  }
}

TEST(Pipeline, DeterministicAndEvaluable)
{
  auto const           data = labeled_blobs(7);
  SlicePipelineOptions opt;
  opt.k_per_class = 3;
  opt.seed        = 5;
  auto const a    = run_slice_pipeline(data.e, data.y, opt);
  auto const b    = run_slice_pipeline(data.e, data.y, opt);
  EXPECT_EQ(a.embeddings, b.embeddings);
  EXPECT_EQ(a.slice_label, b.slice_label);
  EXPECT_EQ(a.noise_flag, b.noise_flag);
  auto const view = evaluation_view(a);
  EXPECT_EQ(view.role.size(), a.size());
  std::vector<Index> first{0, 1, 2};
  EXPECT_NO_THROW(evaluate_run(view, first));
}
