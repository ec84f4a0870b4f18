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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csi_cli.hpp"

using namespace csi;
namespace fs = std::filesystem;

namespace {

struct CliResult
{
  int         code{0};
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "csi-select");
  std::vector<char const *> argv;
  for (auto const &a : args)
  {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  int const code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           (std::string("csi_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  void TearDown() override
  {
    fs::remove_all(dir_);
  }

  std::string path(std::string const &name) const
  {
    return (dir_ / name).string();
  }

  /// 500 points in two labelled Gaussian classes, written as x0,x1,x2,label.
  std::string labeled_file() const
  {
    Rng           rng(21);
    std::ofstream out(dir_ / "labeled.csv");
    out << "x0,x1,x2,label\n";
    for (int i = 0; i < 500; ++i)
    {
      int const c = i % 2;
      out << format_double(rng.normal() + 6.0 * c) << ',' << format_double(rng.normal()) << ','
          << format_double(rng.normal()) << ',' << c << '\n';
    }
    return path("labeled.csv");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenSyntheticDefault)
{
  auto const r = run_cli({"gen-synthetic", "--default", "--seed", "7", "--out", path("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto const d = read_synthetic_csv(dir_ / "a" / "dataset.csv");
  EXPECT_EQ(d.size(), 675u);
  ASSERT_EQ(run_cli({"gen-synthetic", "--default", "--seed", "7", "--out", path("b")}).code, 0);
  EXPECT_EQ(read_text(dir_ / "a" / "dataset.csv"), read_text(dir_ / "b" / "dataset.csv"));
  EXPECT_EQ(read_text(dir_ / "a" / "dataset.json"), read_text(dir_ / "b" / "dataset.json"));
}

TEST_F(Cli, GenSyntheticInvalidSpec)
{
  write_text(dir_ / "bad.json", R"({"clusters": [{"size": 10, "role": "head"}], "cluster_std": 0})");
  auto const r = run_cli({"gen-synthetic", "--spec", path("bad.json"), "--out", path("x")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("InvalidSpec"), std::string::npos);
  write_text(dir_ / "broken.json", "{not json");
  EXPECT_EQ(run_cli({"gen-synthetic", "--spec", path("broken.json"), "--out", path("x")}).code, 2);
}

TEST_F(Cli, SelectOnCachedSimilarity)
{
  ASSERT_EQ(run_cli({"gen-synthetic", "--default", "--out", path("g")}).code, 0);
  auto const first = run_cli({"select", "--embeddings", path("g/dataset.csv"), "--objective", "flci", "--k", "50",
                              "--cache-dir", path("cache"), "--out", path("s1")});
  ASSERT_EQ(first.code, 0) << first.err;
  std::vector<fs::path> cached;
  for (auto const &entry : fs::directory_iterator(dir_ / "cache"))
  {
    cached.push_back(entry.path());
  }
  ASSERT_EQ(cached.size(), 1u);

  auto const second =
      run_cli({"select", "--similarity", cached[0].string(), "--objective", "flci", "--k", "50", "--out", path("s2")});
  ASSERT_EQ(second.code, 0) << second.err;
  auto const idx = read_indices(dir_ / "s2" / "flci.selected.txt");
  EXPECT_EQ(idx.size(), 50u);
  EXPECT_EQ(read_text(dir_ / "s1" / "flci.selected.txt"), read_text(dir_ / "s2" / "flci.selected.txt"));
  auto const verify = run_cli({"verify-trace", "--trace", path("s2/flci.trace.json"), "--selected",
                               path("s2/flci.selected.txt")});
  EXPECT_EQ(verify.code, 0) << verify.err;
  EXPECT_TRUE(fs::exists(dir_ / "s2" / "flci.curvature.json"));
  EXPECT_TRUE(fs::exists(dir_ / "s2" / "provenance.json"));
}

TEST_F(Cli, NaiveAndLazyWriteIdenticalIndexFiles)
{
  ASSERT_EQ(run_cli({"gen-synthetic", "--default", "--out", path("g")}).code, 0);
  std::string const objectives = "fl,flci,gc,gcci,logdet,logdetci,psc,pscci,sc,scci,fb,fbci";
  ASSERT_EQ(run_cli({"select", "--dataset", path("g/dataset.csv"), "--objective", objectives, "--k", "30", "--out",
                     path("lazy")})
                .code,
            0);
  ASSERT_EQ(run_cli({"select", "--dataset", path("g/dataset.csv"), "--objective", objectives, "--k", "30", "--naive",
                     "--out", path("naive")})
                .code,
            0);
  std::stringstream ss(objectives);
  std::string       name;
  while (std::getline(ss, name, ','))
  {
    EXPECT_EQ(read_text(dir_ / "lazy" / (name + ".selected.txt")), read_text(dir_ / "naive" / (name + ".selected.txt")))
        << name;
  }
}

TEST_F(Cli, MetadataDoesNotChangeSelections)
{
  ASSERT_EQ(run_cli({"gen-synthetic", "--default", "--out", path("g")}).code, 0);
  auto const data = read_synthetic_csv(dir_ / "g" / "dataset.csv");
  write_embeddings_csv(dir_ / "bare.csv", data.embeddings);
  ASSERT_EQ(run_cli({"select", "--dataset", path("g/dataset.csv"), "--objective", "logdetci,scci", "--out",
                     path("with")})
                .code,
            0);
  ASSERT_EQ(run_cli({"select", "--dataset", path("bare.csv"), "--objective", "logdetci,scci", "--out", path("without")})
                .code,
            0);
  for (std::string name : {"logdetci", "scci"})
  {
    EXPECT_EQ(read_text(dir_ / "with" / (name + ".selected.txt")), read_text(dir_ / "without" / (name + ".selected.txt")));
    EXPECT_EQ(read_text(dir_ / "with" / (name + ".trace.json")), read_text(dir_ / "without" / (name + ".trace.json")));
    EXPECT_TRUE(fs::exists(dir_ / "with" / (name + ".metrics.json")));
    EXPECT_FALSE(fs::exists(dir_ / "without" / (name + ".metrics.json")));
  }
}

TEST_F(Cli, SingularLogDetIsNumericalError)
{
  write_text(dir_ / "dup.csv", "0,0\n0,0\n1,1\n2,2\n");
  auto const r = run_cli({"select", "--embeddings", path("dup.csv"), "--objective", "logdetci", "--jitter", "0", "--k",
                          "2", "--out", path("o")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("SingularSubmatrix"), std::string::npos);
}

TEST_F(Cli, ExitCodes)
{
  write_text(dir_ / "e.csv", "0,0\n1,1\n2,3\n");
  EXPECT_EQ(run_cli({"select", "--embeddings", path("e.csv"), "--objective", "nope", "--k", "1", "--out", path("o")}).code,
            2);
  EXPECT_EQ(run_cli({"select", "--embeddings", path("e.csv"), "--k", "9", "--out", path("o")}).code, 2);
  EXPECT_EQ(run_cli({"select", "--embeddings", path("missing.csv"), "--k", "1", "--out", path("o")}).code, 4);
  EXPECT_EQ(run_cli({"select", "--no-such-flag"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
}

TEST_F(Cli, VerifyTraceRejectsTampering)
{
  write_text(dir_ / "e.csv", "0,0\n1,1\n2,3\n5,5\n");
  ASSERT_EQ(run_cli({"select", "--embeddings", path("e.csv"), "--k", "3", "--out", path("o")}).code, 0);
  auto j = Json::parse(read_text(dir_ / "o" / "flci.trace.json"));
  j["steps"][1]["gain"] = j["steps"][1]["gain"].get<double>() + 0.5;
  write_text(dir_ / "bad.json", j.dump());
  EXPECT_EQ(run_cli({"verify-trace", "--trace", path("bad.json")}).code, 3);
  auto reversed = read_indices(dir_ / "o" / "flci.selected.txt");
  std::reverse(reversed.begin(), reversed.end());
  write_indices(dir_ / "other.txt", reversed);
  EXPECT_EQ(run_cli({"verify-trace", "--trace", path("o/flci.trace.json"), "--selected", path("other.txt")}).code, 3);
}

TEST_F(Cli, BenchmarkShapeAndDeterminism)
{
  auto const a = run_cli({"benchmark", "--runs", "2", "--out", path("b1")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(run_cli({"benchmark", "--runs", "2", "--out", path("b2")}).code, 0);
  auto const table = read_text(dir_ / "b1" / "table.csv");
  EXPECT_EQ(table, read_text(dir_ / "b2" / "table.csv"));
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 13);
  EXPECT_EQ(table.substr(0, table.find('\n')),
            "method,minority_coverage,outlier_rate,kl_selected_vs_full,kl_selected_vs_complement,coverage_distance");
  EXPECT_TRUE(fs::exists(dir_ / "b1" / "runs" / "logdetci_run1.json"));
  EXPECT_EQ(read_text(dir_ / "b1" / "runs" / "pscci_run0.json"), read_text(dir_ / "b2" / "runs" / "pscci_run0.json"));
}

TEST_F(Cli, SplitPartitionsWithoutMetadata)
{
  auto const file = labeled_file();
  auto const r    = run_cli({"split", "--embeddings", file, "--fraction", "0.2", "--out", path("sp")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto const a    = read_indices(dir_ / "sp" / "split.txt");
  auto const rest = read_indices(dir_ / "sp" / "complement.txt");
  EXPECT_EQ(a.size(), 100u);
  EXPECT_EQ(rest.size(), 400u);
  std::vector<Index> all = a;
  all.insert(all.end(), rest.begin(), rest.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, iota_indices(500));
  EXPECT_FALSE(fs::exists(dir_ / "sp" / "metrics.json"));
}

TEST_F(Cli, SplitWithSlicesAttachesMetrics)
{
  auto const file = labeled_file();
  auto const r    = run_cli({"split", "--embeddings", file, "--slice", "--k-per-class", "3", "--fraction", "0.2",
                             "--out", path("sp")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "sp" / "metrics.json"));
  auto const sliced = read_sliced_csv(dir_ / "sp" / "sliced.csv");
  auto const a      = read_indices(dir_ / "sp" / "split.txt");
  auto const rest   = read_indices(dir_ / "sp" / "complement.txt");
  EXPECT_EQ(a.size() + rest.size(), sliced.size());
  auto const prov = Json::parse(read_text(dir_ / "sp" / "provenance.json"));
  EXPECT_EQ(prov["pipeline"]["k_per_class"], 3);
  EXPECT_TRUE(prov["metrics_attached"].get<bool>());

  // labels required for slicing
  write_embeddings_csv(dir_ / "bare.csv", sliced.embeddings);
  EXPECT_EQ(run_cli({"split", "--embeddings", path("bare.csv"), "--slice", "--out", path("x")}).code, 2);
}

TEST_F(Cli, HelpDocumentsDefaults)
{
  for (std::string cmd : {"select", "benchmark", "split", "gen-synthetic"})
  {
    auto const r = run_cli({cmd, "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("default"), std::string::npos) << cmd;
  }
  auto const top = run_cli({"--help"});
  EXPECT_EQ(top.code, 0);
  EXPECT_NE(top.out.find("verify-trace"), std::string::npos);
}
