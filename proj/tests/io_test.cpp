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


#include "robustood/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "robustood/certify.hpp"
#include "robustood/numkit.hpp"

namespace robustood {
namespace {

TEST(FormatDouble, RoundTripsRandomValues) {
  Rng rng(RngState{77});
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.index(80)) - 40);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(FormatDouble, Infinities) {
  EXPECT_EQ(format_double(kInfinity), "inf");
  EXPECT_EQ(format_double(-kInfinity), "-inf");
  EXPECT_EQ(format_metric(kInfinity), "vacuous");
  EXPECT_EQ(format_metric(1.25), "1.25");
  EXPECT_TRUE(std::isinf(parse_double("inf")));
  EXPECT_TRUE(std::isinf(parse_double("vacuous")));
  EXPECT_LT(parse_double("-inf"), 0);
}

TEST(FormatDouble, RejectsGarbage) {
  EXPECT_THROW(parse_double("abc"), InvalidInputError);
  EXPECT_THROW(parse_double("1.5x"), InvalidInputError);
  EXPECT_THROW(parse_double(""), InvalidInputError);
}

Dataset small_dataset() {
  Dataset d;
  d.d0 = 2;
  d.support_box = {{0, 1}, {-1, 1}};
  d.D = l1_diameter(d.support_box);
  d.samples = {{{0.1, 0.2}, 1.0}, {{0.3, -0.7}, -1.0}, {{1.0 / 3.0, 0.0}, 0.0}};
  return d;
}

TEST(DatasetJson, RoundTrip) {
  const Dataset d = small_dataset();
  const Dataset back = dataset_from_json(Json::parse(dataset_to_json(d).dump()));
  ASSERT_EQ(back.size(), d.size());
  EXPECT_EQ(back.d0, 2u);
  EXPECT_DOUBLE_EQ(back.D, 3.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.samples[i].x, d.samples[i].x);
    EXPECT_EQ(back.samples[i].y, d.samples[i].y);
  }
}

TEST(DatasetJson, StrictKeys) {
  Json j = dataset_to_json(small_dataset());
  j["extra"] = 1;
  EXPECT_THROW(dataset_from_json(j), InvalidInputError);
  Json k = dataset_to_json(small_dataset());
  k.erase("d0");
  EXPECT_THROW(dataset_from_json(k), InvalidInputError);
  Json s = dataset_to_json(small_dataset());
  s["samples"][0]["x"] = Json::array({0.1});
  EXPECT_THROW(dataset_from_json(s), InvalidInputError);
}

TEST(DistributionJson, RoundTrip) {
  DiscreteDistribution P;
  P.atoms = {{0.0, 1.0}, {2.5, -0.125}};
  P.weights = {0.25, 0.75};
  P.labels = {1.0, -1.0};
  const auto back = distribution_from_json(Json::parse(distribution_to_json(P).dump()));
  EXPECT_EQ(back.atoms, P.atoms);
  EXPECT_EQ(back.weights, P.weights);
  EXPECT_EQ(back.labels, P.labels);

  P.labels.clear();
  const Json j = distribution_to_json(P);
  EXPECT_FALSE(j.contains("labels"));
  EXPECT_TRUE(distribution_from_json(j).labels.empty());
}

TEST(DistributionJson, Rejects) {
  EXPECT_THROW(distribution_from_json(Json::parse(R"({"atoms":[[0]],"weights":[1],"x":1})")),
               InvalidInputError);
  EXPECT_THROW(distribution_from_json(Json::parse(R"({"atoms":[[0],[1]],"weights":[1]})")),
               InvalidInputError);
  EXPECT_THROW(distribution_from_json(Json::parse(R"({"atoms":[[0]],"weights":[0.5]})")),
               InvalidInputError);
  EXPECT_THROW(distribution_from_json(Json::parse("[1,2]")), InvalidInputError);
}

TEST(BoundReportJson, VacuousIsString) {
  BoundInputs in;
  in.epsilon = 0.1;
  in.M = 1;
  in.d0 = 3000;
  in.D = 3000;
  in.r = 0.1;
  in.n = 100;
  in.theta = 0.5;
  const BoundReport rep = ood_bound_winf(in);
  ASSERT_TRUE(rep.vacuous());
  const Json j = bound_report_to_json(rep);
  EXPECT_EQ(j["bound"], "inf");
  EXPECT_TRUE(j["log_bound"].is_number());
  EXPECT_DOUBLE_EQ(j["log_bound"].get<double>(), rep.log_bound);
  EXPECT_TRUE(j.contains("formula"));
  EXPECT_EQ(j["components"].size(), rep.components.size());
}

TEST(BoundReportJson, FiniteValues) {
  BoundInputs in;
  in.epsilon = 0.1;
  in.M = 1;
  in.d0 = 2;
  in.D = 2;
  in.r = 2;
  in.n = 100;
  in.theta = 0.5;
  const BoundReport rep = ood_bound_winf(in);
  const Json j = bound_report_to_json(rep);
  EXPECT_DOUBLE_EQ(j["bound"].get<double>(), rep.bound);
  for (const auto& c : rep.components) {
    EXPECT_DOUBLE_EQ(j["components"][c.name].get<double>(), c.value);
  }
}

TEST(TraceCsv, HeaderAndBlankObjective) {
  TrainTrace tr;
  TraceStep a;
  a.t = 1;
  a.i_t = 3;
  a.objective_stoch = 0.5;
  a.grad_norm = 2.0;
  TraceStep b = a;
  b.t = 2;
  b.objective_full = 0.25;
  tr.steps = {a, b};
  EXPECT_EQ(trace_csv(tr),
            "t,i_t,objective_stoch,objective_full,grad_norm\n"
            "1,3,0.5,,2\n"
            "2,3,0.5,0.25,2\n");
}

TEST(Files, ReadWriteAndMissing) {
  const std::string path = ::testing::TempDir() + "robustood_io_test.txt";
  write_text_file(path, "hello\n");
  EXPECT_EQ(read_text_file(path), "hello\n");
  EXPECT_THROW(read_text_file(path + ".missing"), InvalidInputError);
  EXPECT_THROW(parse_json("{", "inline"), InvalidInputError);
}

}  // namespace
}  // namespace robustood
