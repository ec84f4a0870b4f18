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

#include <cmath>
#include <numbers>

#include "csi/optimize.hpp"
#include "test_support.hpp"

using namespace csi;

namespace {

Objective small(Kind kind)
{
  ObjectiveSpec spec;
  spec.kind = kind;
  return make_objective(spec, csi::testing::share(csi::testing::small_similarity()));
}

Objective modular(Index n)
{
  ObjectiveSpec spec;
  return make_objective(spec, csi::testing::share(Matrix::identity(n)));
}

}  // namespace

TEST(Greedy, ModularCsiSelectsLowestIndices)
{
  for (bool lazy : {false, true})
  {
    auto const r = greedy(modular(8), Mode::Complement, 3, {.lazy = lazy});
    EXPECT_EQ(r.selected, (std::vector<Index>{0, 1, 2}));
    for (auto const &s : r.trace.steps)
    {
      EXPECT_EQ(s.gain, 0.0);
    }
  }
}

TEST(Greedy, SingletonMatchesExhaustiveScan)
{
  auto const obj = small(Kind::FacilityLocation);
  // {0}: 1.2, {1}: 0.5 + 0.5 + 0.4, {2}: 0.2 + 0.4 + 0.4
  std::vector<double> values;
  for (Index e = 0; e < 3; ++e)
  {
    std::vector<Index> a{e};
    values.push_back(csi_eval(obj, a));
  }
  EXPECT_NEAR(values[1], 1.4, 1e-14);
  auto const r = greedy(obj, Mode::Complement, 1);
  EXPECT_EQ(r.selected, std::vector<Index>{1});
  auto const bf = brute_force_max(obj, Mode::Complement, 1);
  EXPECT_EQ(bf.subset, std::vector<Index>{1});
  EXPECT_NEAR(bf.value, 1.4, 1e-14);
}

TEST(Greedy, BudgetErrors)
{
  try
  {
    greedy(small(Kind::FacilityLocation), Mode::Complement, 4);
    FAIL();
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.tag(), "BudgetExceedsGroundSet");
  }
  EXPECT_THROW(greedy(small(Kind::FacilityLocation), Mode::Complement, 0), Error);
}

TEST(Greedy, TraceTelescopesAndFillsBudget)
{
  csi::Rng rng(41);
  for (Kind k : kAllKinds)
  {
    auto const obj = csi::testing::random_objective(rng, k, 40);
    for (Mode mode : {Mode::Base, Mode::Complement})
    {
      auto const r = greedy(obj, mode, 40);
      EXPECT_EQ(r.selected.size(), 40u);
      EXPECT_LE(trace_telescoping_error(r.trace), 1e-6) << kind_name(k);
      if (mode == Mode::Complement)
      {
        EXPECT_NEAR(r.trace.final_value(), 0.0, 1e-6) << kind_name(k);
      }
    }
  }
}

TEST(Greedy, StopOnNegative)
{
  csi::Rng   rng(42);
  auto const obj  = csi::testing::random_objective(rng, Kind::FacilityLocation, 30);
  auto const full = greedy(obj, Mode::Complement, 30);
  auto const stop = greedy(obj, Mode::Complement, 30, {.lazy = true, .stop_on_negative = true});
  EXPECT_LT(stop.selected.size(), 30u);
  EXPECT_GE(min_observed_gain(stop.trace), 0.0);
  for (Index t = 0; t < stop.selected.size(); ++t)
  {
    EXPECT_EQ(stop.selected[t], full.selected[t]);
  }
  EXPECT_LT(full.trace.steps[stop.selected.size()].gain, 0.0);
}

TEST(LazyGreedy, MatchesNaiveSequence)
{
  csi::Rng rng(43);
  for (Kind k : kAllKinds)
  {
    for (int trial = 0; trial < 20; ++trial)
    {
      Index const n   = 5 + rng.below(56);
      Index const k_  = 1 + rng.below(std::min<Index>(20, n));
      auto const  obj = csi::testing::random_objective(rng, k, n);
      for (Mode mode : {Mode::Base, Mode::Complement})
      {
        auto const naive = greedy(obj, mode, k_, {.lazy = false});
        auto const lazy  = greedy(obj, mode, k_, {.lazy = true});
        ASSERT_EQ(naive.selected, lazy.selected) << kind_name(k);
        EXPECT_LE(lazy.trace.evaluations, naive.trace.evaluations);
        EXPECT_LE(lazy.trace.evaluations, n * k_);
      }
    }
  }
}

TEST(LazyGreedy, FirstRoundScansEverything)
{
  auto const r = lazy_greedy(modular(10), Mode::Complement, 1);
  EXPECT_EQ(r.trace.evaluations, 10u);
}

TEST(LazyGreedy, Deterministic)
{
  csi::Rng   rng(44);
  auto const obj = csi::testing::random_objective(rng, Kind::SaturatedCoverage, 50);
  auto const a   = lazy_greedy(obj, Mode::Complement, 15);
  auto const b   = lazy_greedy(obj, Mode::Complement, 15);
  EXPECT_EQ(a.trace.steps, b.trace.steps);
}

TEST(BruteForce, FullBudgetIncludesSmallerSets)
{
  csi::Rng   rng(45);
  auto const obj = csi::testing::random_objective(rng, Kind::FacilityLocation, 8);
  auto const bf  = brute_force_max(obj, Mode::Complement, 8);
  EXPECT_GT(bf.value, 0.0);
  EXPECT_LT(bf.subset.size(), 8u);
  // symmetric: the complement of the optimum is also optimal
  EXPECT_NEAR(csi_eval(obj, complement_of(bf.subset, 8)), bf.value, 1e-10);
}

TEST(BruteForce, Guard)
{
  csi::Rng   rng(46);
  auto const obj = csi::testing::random_objective(rng, Kind::GraphCut, 60);
  EXPECT_THROW(brute_force_max(obj, Mode::Complement, 10), Error);
}

TEST(Curvature, ModularIsZero)
{
  EXPECT_EQ(estimate_curvature_global(modular(6)).kappa, 0.0);
  EXPECT_EQ(curvature_exact_restricted(modular(6), 3), 0.0);
}

TEST(Curvature, SmallFacilityLocationByHand)
{
  // f({e}) = 1.7, 1.9, 1.6; f(e | V\e) = 0.5, 0.5, 0.6
  auto const g = estimate_curvature_global(small(Kind::FacilityLocation));
  EXPECT_NEAR(g.kappa, 1.0 - 0.5 / 1.9, 1e-14);
  EXPECT_NEAR(g.max_singleton, 1.9, 1e-14);
  EXPECT_TRUE(g.skipped.empty());
}

TEST(Curvature, SkipsZeroSingletons)
{
  ObjectiveSpec spec;
  spec.kind = Kind::FeatureBased;
  auto x    = std::make_shared<Matrix>(Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}}));
  auto obj  = make_objective(spec, csi::testing::share(csi::testing::small_similarity()), nullptr, x);
  auto const g = estimate_curvature_global(obj);
  EXPECT_EQ(g.skipped, std::vector<Index>{1});

  auto zero = std::make_shared<Matrix>(3, 2, 0.0);
  obj       = make_objective(spec, csi::testing::share(csi::testing::small_similarity()), nullptr, zero);
  try
  {
    estimate_curvature_global(obj);
    FAIL();
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.tag(), "AllSingletonsZero");
  }
}

TEST(Curvature, RestrictedProperties)
{
  csi::Rng rng(47);
  for (Kind k : kAllKinds)
  {
    for (int trial = 0; trial < 3; ++trial)
    {
      auto const obj    = csi::testing::random_objective(rng, k, 10);
      double const glob = estimate_curvature_global(obj).kappa;
      EXPECT_EQ(curvature_exact_restricted(obj, 1), 0.0);
      double previous = 0.0;
      for (Index kk = 1; kk <= 5; ++kk)
      {
        double const kappa = curvature_exact_restricted(obj, kk);
        EXPECT_GE(kappa, previous - 1e-15) << kind_name(k);
        EXPECT_LE(kappa, glob + 1e-12) << kind_name(k);
        previous = kappa;
      }
    }
  }
  EXPECT_THROW(curvature_exact_restricted(csi::testing::random_objective(rng, Kind::FacilityLocation, 17), 2),
               Error);
}

TEST(Bounds, ModularInstance)
{
  auto const obj   = modular(6);
  auto const r     = greedy(obj, Mode::Complement, 3);
  auto const curv  = curvature_report(obj, 3);
  auto const bf    = brute_force_max(obj, Mode::Complement, 3);
  auto const bound = greedy_bounds(r.trace, curv, bf.value);
  EXPECT_EQ(bound.epsilon, 0.0);
  EXPECT_EQ(bound.slack, 0.0);
  EXPECT_EQ(*bound.optimum, 0.0);
  EXPECT_TRUE(*bound.holds);
  EXPECT_EQ(min_observed_gain(r.trace), 0.0);
}

TEST(Bounds, EpsilonFormula)
{
  csi::Rng   rng(48);
  auto const obj = csi::testing::random_objective(rng, Kind::SaturatedCoverage, 12);
  auto const c   = curvature_report(obj, 3);
  ASSERT_TRUE(c.kappa_k.has_value());
  EXPECT_EQ(c.source, CurvatureSource::RestrictedExact);
  EXPECT_DOUBLE_EQ(c.epsilon, *c.kappa_k * c.max_singleton);
  EXPECT_DOUBLE_EQ(c.greedy_bound_slack, 3.0 * c.epsilon / std::numbers::e);
  EXPECT_LE(*c.kappa_k, c.kappa_global);

  auto const large = curvature_report(csi::testing::random_objective(rng, Kind::SaturatedCoverage, 30), 3);
  EXPECT_FALSE(large.kappa_k.has_value());
  EXPECT_EQ(large.source, CurvatureSource::GlobalBound);
}

TEST(Bounds, FlciRandomInstanceHolds)
{
  csi::Rng   rng(49);
  auto const obj   = csi::testing::random_objective(rng, Kind::FacilityLocation, 12);
  auto const r     = greedy(obj, Mode::Complement, 3);
  auto const bf    = brute_force_max(obj, Mode::Complement, 3);
  auto const bound = greedy_bounds(r.trace, curvature_report(obj, 3), bf.value);
  EXPECT_TRUE(*bound.holds);
  EXPECT_GE(min_observed_gain(r.trace), -bound.epsilon - 1e-8);
}

TEST(Bounds, BaseObjectiveClassicalGuarantee)
{
  csi::Rng rng(50);
  for (Kind k : kAllKinds)
  {
    auto const obj = csi::testing::random_objective(rng, k, 12);
    auto const r   = greedy(obj, Mode::Base, 4);
    auto const bf  = brute_force_max(obj, Mode::Base, 4);
    EXPECT_GE(r.trace.final_value(), (1.0 - 1.0 / std::numbers::e) * bf.value - 1e-9) << kind_name(k);
  }
}
