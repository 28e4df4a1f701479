// Copyright 2026 The robustood Authors
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


#include "cli.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

namespace robustood::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  write_text_file(path, text);
  return path;
}

TEST(Cli, DistanceTwoPoints) {
  const auto a = temp_file("cli_a.json", R"({"atoms": [[0, 0]], "weights": [1]})");
  const auto b = temp_file("cli_b.json", R"({"atoms": [[1, 0]], "weights": [1]})");
  Result r = run({"distance", "--p", "2", "--a", a, "--b", b});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "1.0\n");
  r = run({"distance", "--p", "inf", "--a", a, "--b", b});
  EXPECT_EQ(r.out, "1.0\n");
  r = run({"distance", "--p", "tv", "--a", a, "--b", b});
  EXPECT_EQ(r.out, "1.0\n");
  r = run({"distance", "--p", "7", "--a", a, "--b", b});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, BoundsWinfExample) {
  const Result r = run({"bounds", "winf", "--eps", "0.1", "--m", "1", "--d0", "2",
                        "--diam", "2", "--r", "2", "--n", "100", "--theta", "0.5"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.4532\n");
}

TEST(Cli, BoundsJsonAndPretrain) {
  Result r = run({"bounds", "winf", "--eps", "0.1", "--m", "1", "--d0", "3000",
                  "--diam", "3000", "--r", "0.1", "--n", "100", "--theta", "0.5",
                  "--json"});
  EXPECT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["bound"], "inf");
  EXPECT_TRUE(j["log_bound"].is_number());
  r = run({"bounds", "pretrain", "--m", "1", "--eps-pre", "0.2", "--tv", "0.125",
           "--diam", "2", "--r", "1", "--p", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.4500\nr0 1.4142\n");
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const Result r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, 1);
}

TEST(Cli, InvalidConfigExitsOne) {
  const auto cfg = temp_file("cli_cfg.json", R"({"experiment": "train", "bogus": 1})");
  const Result r = run({"--config", cfg, "train"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
  const auto mism = temp_file("cli_mism.json", R"({"experiment": "train"})");
  EXPECT_EQ(run({"--config", mism, "converge"}).code, 1);
}

TEST(Cli, TrainIsDeterministic) {
  const auto cfg =
      temp_file("cli_train.json", R"({"experiment": "train", "train": {"T": 20}})");
  const Result a = run({"--config", cfg, "--seed", "4", "train"});
  const Result b = run({"--config", cfg, "--seed", "4", "train"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("t,i_t,objective_stoch,objective_full,grad_norm\n", 0), 0u);
  std::size_t lines = 0;
  for (char ch : a.out) lines += ch == '\n';
  EXPECT_EQ(lines, 21u);
  EXPECT_NE(run({"--config", cfg, "--seed", "5", "train"}).out, a.out);
}

TEST(Cli, WorstCaseAndCertify) {
  const auto d = temp_file("cli_d.json",
                           R"({"atoms": [[0.2, 0.4], [0.6, 0.8]], "weights": [0.5, 0.5]})");
  Result r = run({"worst-case", "--dist", d, "--w", "0.1,0.2", "--p", "inf",
                  "--r", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["metric"], "W_inf");
  r = run({"worst-case", "--dist", d, "--w", "0.1,0.2", "--p", "2", "--r", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["status"], "certified");
  r = run({"certify", "--dist", d, "--w", "0.1,0.2", "--r", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_GE(j["epsilon_hat"].get<double>(), 0.0);
  EXPECT_EQ(j["per_sample_gaps"].size(), 2u);
  r = run({"certify", "--dist", d, "--w", "0.1", "--r", "0.1"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ExperimentWritesCsvAndSidecar) {
  ExperimentConfig c = reference_config("converge");
  c.seeds = 2;
  c.grid.values = {4, 8};
  const auto cfg = temp_file("cli_conv.json", config_to_json(c).dump());
  const std::string out = ::testing::TempDir() + "cli_conv.csv";
  const Result r = run({"--config", cfg, "--out", out, "converge"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_text_file(out);
  EXPECT_EQ(csv.rfind("experiment,seed,grid_key,grid_value", 0), 0u);
  const Json meta = read_json_file(out + ".meta.json");
  EXPECT_EQ(meta["summary"]["rows"], 4);
  const Result again = run({"--config", cfg, "--out", out, "converge"});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(read_text_file(out), csv);
}

}  // namespace
}  // namespace robustood::cli
