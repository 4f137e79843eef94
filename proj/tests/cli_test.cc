// Copyright 2026 The partgraph Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "partgraph/adjacency.h"
#include "partgraph/io.h"
#include "partgraph/morphology.h"
#include "test_util.h"

namespace partgraph {
namespace {

using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage = {"partgraph"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

class CliTest : public ::testing::Test {
 protected:
  CliTest()
      : dir_(std::string("cli_") +
             ::testing::UnitTest::GetInstance()->current_test_info()->name()) {}
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  TempDir dir_;
};

TEST_F(CliTest, NoArgumentsPrintsUsage) {
  const Result r = run({});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST_F(CliTest, VersionListsFormats) {
  const Result r = run({"--version"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("partgraph 1.0.0"), std::string::npos);
  EXPECT_NE(r.out.find("segmap format 1"), std::string::npos);
  EXPECT_NE(r.out.find("probmap format 1"), std::string::npos);
}

TEST_F(CliTest, UnknownCommandAndBadFlagsAreUsageErrors) {
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"graph"}).code, cli::kExitUsage);  // --in required
  save_map(LabelMap(4, 4, 3), path("m.segmap"));
  EXPECT_EQ(run({"graph", "--in", path("m.segmap"), "--shape", "hexagon"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"--threads", "0", "graph", "--in", path("m.segmap")}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"graph", "--in", path("m.segmap"), "--T", "-2"}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, GraphCsvMatchesAdjacencyOracle) {
  Xorshift64Star rng(5);
  const LabelMap map = testing::random_blob_map(rng, 12, 10, 4);
  save_map(map, path("m.segmap"));
  const Result raw = run({"graph", "--in", path("m.segmap"), "--parts", "4", "--raw"});
  ASSERT_EQ(raw.code, cli::kExitOk) << raw.err;
  const auto counts = testing::brute_dilate_intersect(map, 4, ElementShape::kSquare, 2);
  std::istringstream lines(raw.out);
  std::string line;
  for (int i = 0; i < 4; ++i) {
    ASSERT_TRUE(std::getline(lines, line));
    std::istringstream cells(line);
    std::string cell;
    for (int j = 0; j < 4; ++j) {
      ASSERT_TRUE(std::getline(cells, cell, ','));
      EXPECT_EQ(std::stod(cell), static_cast<double>(counts[i * 4 + j]));
    }
  }

  const Result norm = run({"graph", "--in", path("m.segmap"), "--format", "json"});
  ASSERT_EQ(norm.code, cli::kExitOk) << norm.err;
  const auto doc = nlohmann::json::parse(norm.out);
  EXPECT_EQ(doc.at("kind"), "normalized");
  for (int i = 0; i < 4; ++i) {
    double sq = 0.0, row = 0.0;
    for (int j = 0; j < 4; ++j) sq += double(counts[i * 4 + j]) * counts[i * 4 + j];
    for (int j = 0; j < 4; ++j) {
      const double expected = sq > 0 ? counts[i * 4 + j] / std::sqrt(sq) : 0.0;
      const double got = doc.at("matrix").at(i).at(j).get<double>();
      EXPECT_NEAR(got, expected, 5e-9 * std::max(1.0, expected));
      row += got * got;
    }
    if (sq > 0) EXPECT_NEAR(row, 1.0, 1e-8);
  }
}

TEST_F(CliTest, GraphWritesToOutFile) {
  save_map(LabelMap(4, 2, 3, {1, 1, 2, 2, 1, 1, 2, 2}), path("m.segmap"));
  const Result r = run({"graph", "--in", path("m.segmap"), "--raw", "--out",
                        path("g.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out, "");
  EXPECT_EQ(slurp(path("g.csv")), "0,0,0\n0,0,8\n0,8,0\n");
}

TEST_F(CliTest, ConfigSuppliesDefaultsAndFlagsWin) {
  save_map(LabelMap(4, 2, 3, {1, 1, 2, 2, 1, 1, 2, 2}), path("m.segmap"));
  write_text(path("cfg.json"), R"({"T": 0, "shape": "diamond"})");
  // T=0 means radius 0: the blocks do not overlap.
  const Result from_config =
      run({"--config", path("cfg.json"), "graph", "--in", path("m.segmap"), "--raw"});
  ASSERT_EQ(from_config.code, cli::kExitOk) << from_config.err;
  EXPECT_EQ(from_config.out, "0,0,0\n0,0,0\n0,0,0\n");
  const Result flag_wins = run({"--config", path("cfg.json"), "graph", "--in",
                                path("m.segmap"), "--raw", "--T", "4",
                                "--shape", "square"});
  EXPECT_EQ(flag_wins.out, "0,0,0\n0,0,8\n0,8,0\n");
}

TEST_F(CliTest, ConfigErrors) {
  save_map(LabelMap(4, 4, 3), path("m.segmap"));
  write_text(path("unknown.json"), R"({"temperature": 3})");
  EXPECT_EQ(run({"--config", path("unknown.json"), "graph", "--in", path("m.segmap")}).code,
            cli::kExitUsage);
  write_text(path("typed.json"), R"({"T": "four"})");
  EXPECT_EQ(run({"--config", path("typed.json"), "graph", "--in", path("m.segmap")}).code,
            cli::kExitUsage);
  write_text(path("broken.json"), R"({"T": )");
  EXPECT_EQ(run({"--config", path("broken.json"), "graph", "--in", path("m.segmap")}).code,
            cli::kExitData);
}

TEST_F(CliTest, MissingOrCorruptInputIsDataError) {
  EXPECT_EQ(run({"graph", "--in", path("absent.segmap")}).code, cli::kExitData);
  write_text(path("junk.segmap"), "SEGM\x01garbage");
  EXPECT_EQ(run({"graph", "--in", path("junk.segmap")}).code, cli::kExitData);
}

TEST_F(CliTest, DilateMatchesLibrary) {
  Xorshift64Star rng(6);
  const LabelMap map = testing::random_label_map(rng, 9, 7, 6);
  BinaryMask mask(9, 7);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) mask.set(x, y, map.at(x, y) != 0 && map.at(x, y) % 5 == 0);
  }
  std::vector<std::uint16_t> bits(63);
  for (std::size_t p = 0; p < 63; ++p) bits[p] = mask[p] ? 3 : 0;
  save_map(LabelMap(9, 7, 4, bits), path("in.pgm"));
  const Result r = run({"dilate", "--in", path("in.pgm"), "--radius", "1",
                        "--shape", "diamond", "--out", path("out.segmap")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const LabelMap got = load_map(path("out.segmap"));
  const BinaryMask expected = dilate(mask, {ElementShape::kDiamond, 1});
  ASSERT_EQ(got.num_classes(), 2);
  for (std::size_t p = 0; p < 63; ++p) EXPECT_EQ(got[p], expected[p] ? 1 : 0);
}

TEST_F(CliTest, LossOnPerfectPredictionIsZero) {
  const PartsToObjectsMapping m({0, 1, 3});
  const LabelMap parts(4, 2, 3, {0, 1, 2, 2, 0, 1, 1, 2});
  save_map(parts, path("gt.segmap"));
  save_prob_map(one_hot(parts, 3), path("pred.probmap"));
  save_label_set(LabelSet(m), path("ls.json"));
  const Result r = run({"loss", "--pred", path("pred.probmap"), "--gt",
                        path("gt.segmap"), "--mapping", path("ls.json"), "--json"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc.at("ce").get<double>(), 0.0);
  EXPECT_EQ(doc.at("rec").get<double>(), 0.0);
  EXPECT_EQ(doc.at("gm").get<double>(), 0.0);
  EXPECT_EQ(doc.at("total").get<double>(), 0.0);
}

TEST_F(CliTest, LossShapeMismatchNamesBothSizes) {
  save_map(LabelMap(4, 4, 3), path("gt.segmap"));
  save_prob_map(one_hot(LabelMap(5, 5, 3), 3), path("pred.probmap"));
  save_label_set(LabelSet(PartsToObjectsMapping({0, 1, 3})), path("ls.json"));
  const Result r = run({"loss", "--pred", path("pred.probmap"), "--gt",
                        path("gt.segmap"), "--mapping", path("ls.json")});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("5x5"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("4x4"), std::string::npos) << r.err;
}

TEST_F(CliTest, MetricsHandExample) {
  save_map(LabelMap(4, 1, 2, {0, 0, 1, 1}), path("gt.segmap"));
  save_map(LabelMap(4, 1, 2, {0, 1, 1, 1}), path("pred.segmap"));
  save_label_set(LabelSet(PartsToObjectsMapping({0, 1, 2})), path("ls.json"));
  const Result r = run({"metrics", "--pred", path("pred.segmap"), "--gt",
                        path("gt.segmap"), "--labelset", path("ls.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("miou").get<double>(), 7.0 / 12.0);
  const Result csv = run({"metrics", "--pred", path("pred.segmap"), "--gt",
                          path("gt.segmap"), "--labelset", path("ls.json"), "--csv"});
  EXPECT_NE(csv.out.find("0.583333333"), std::string::npos) << csv.out;
  EXPECT_EQ(run({"metrics", "--pred", path("pred.segmap"), "--labelset",
                 path("ls.json")}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, MetricsOverDirectoriesAccumulates) {
  std::filesystem::create_directories(dir_ / "gt");
  std::filesystem::create_directories(dir_ / "pred");
  save_map(LabelMap(2, 1, 2, {0, 0}), dir_ / "gt" / "a.segmap");
  save_map(LabelMap(2, 1, 2, {0, 1}), dir_ / "pred" / "a.segmap");
  save_map(LabelMap(2, 1, 2, {1, 1}), dir_ / "gt" / "b.segmap");
  save_prob_map(ProbMap(2, 1, 2, {0.4, 0.6, 0.1, 0.9}), dir_ / "pred" / "b.segmap");
  save_label_set(LabelSet(PartsToObjectsMapping({0, 1, 2})), path("ls.json"));
  const Result r = run({"metrics", "--pred-dir", path("pred"), "--gt-dir",
                        path("gt"), "--labelset", path("ls.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("miou").get<double>(), 7.0 / 12.0);
  std::filesystem::remove(dir_ / "pred" / "b.segmap");
  EXPECT_EQ(run({"metrics", "--pred-dir", path("pred"), "--gt-dir", path("gt"),
                 "--labelset", path("ls.json")}).code,
            cli::kExitData);
}

TEST_F(CliTest, SynthWritesScenesAndMapping) {
  const Result r = run({"synth", "--out-dir", path("scenes"), "--count", "2",
                        "--seed", "9"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const LabelMap parts = load_map(dir_ / "scenes" / "scene_0001.parts.segmap");
  const LabelMap objects = load_map(dir_ / "scenes" / "scene_0001.objects.segmap");
  const LabelSet ls = load_label_set(dir_ / "scenes" / "labelset.json");
  EXPECT_EQ(project_labels(parts, ls.mapping), objects);
  EXPECT_EQ(argmax_map(load_prob_map(dir_ / "scenes" / "scene_0001.objects.probmap")),
            objects);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "scenes" / "scene_0000.ppm"));
}

TEST_F(CliTest, TrainToyWritesTraceAndParams) {
  const Result r = run({"train-toy", "--steps", "3", "--scenes", "2",
                        "--heldout", "1", "--lr", "0.01", "--trace",
                        path("trace.csv"), "--params-out", path("p.tprm")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const std::string trace = slurp(path("trace.csv"));
  EXPECT_EQ(trace.rfind("step,ce,rec,gm,total\n0,", 0), 0u) << trace;
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 4);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc.contains("heldout"));
  EXPECT_TRUE(std::filesystem::exists(path("p.tprm")));
}

TEST_F(CliTest, TrainToyDivergenceIsNumericError) {
  const Result r = run({"train-toy", "--steps", "5", "--scenes", "1",
                        "--heldout", "0", "--lr", "1e300"});
  EXPECT_EQ(r.code, cli::kExitNumeric) << r.err;
  EXPECT_NE(r.err.find("step"), std::string::npos);
}

TEST_F(CliTest, TrainToyReadsNetAndSceneFromConfig) {
  write_text(path("cfg.json"), R"({
    "steps": 2, "scenes": 1, "heldout": 0,
    "scene": {"width": 16, "height": 16, "parts_per_object": [2],
              "min_instance": 8, "min_band_height": 3},
    "net": {"stages": 2, "encoder_channels": [4, 4],
            "decoder_channels": [4, 4], "conditioning": "single",
            "embedding": {"kernel_sizes": [5, 3], "strides": [2, 2],
                          "channel_sizes": [3, 3]}}})");
  const Result r = run({"--config", path("cfg.json"), "train-toy"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc.at("steps"), 2);
  EXPECT_EQ(doc.at("conditioning"), "single");
  const Result flag = run({"--config", path("cfg.json"), "train-toy",
                           "--conditioning", "off"});
  ASSERT_EQ(flag.code, cli::kExitOk) << flag.err;
  EXPECT_EQ(nlohmann::json::parse(flag.out).at("conditioning"), "off");
}

}  // namespace
}  // namespace partgraph
