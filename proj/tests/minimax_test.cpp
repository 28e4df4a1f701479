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

#include "robustood/minimax.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "robustood/losses.hpp"

namespace robustood {
namespace {

Dataset single_atom(const Vector& x) {
  Dataset d;
  d.d0 = x.size();
  d.support_box = Box(x.size(), Interval{-1, 1});
  d.D = l1_diameter(d.support_box);
  d.samples.push_back({x, 0});
  return d;
}

Dataset random_dataset(std::size_t n, std::size_t d0, std::uint64_t seed) {
  Dataset d;
  d.d0 = d0;
  d.support_box = Box(d0, Interval{0, 1});
  d.D = l1_diameter(d.support_box);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    d.samples.push_back({rng.uniform_in_box(d.support_box), 0});
  }
  return d;
}

TEST(InnerMax, OneStepLandsOnClosedForm) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  const auto b = make_budget(NormOrder::kTwo, 0.5);
  const auto res = inner_max(*q, Vector{1, 0}, Vector{0, 0}, 0, b, 1, 1.0);
  EXPECT_EQ(res.delta, (Vector{0.5, 0}));
  EXPECT_EQ(res.delta, closed_form_inner_argmax(*q, Vector{1, 0}, Vector{0, 0}, b));
}

TEST(InnerMax, ZeroRadius) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0.25);
  const Vector w{0.3, -0.7}, x{0.1, 0.2};
  const auto res = inner_max(*q, w, x, 0, make_budget(NormOrder::kTwo, 0), 5, 1.0);
  EXPECT_EQ(res.delta, (Vector{0, 0}));
  EXPECT_EQ(res.value, q->value(w, x, 0));
}

TEST(InnerMax, FiftyStepsReachOptimum) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  Rng rng(81);
  for (int k = 0; k < 20; ++k) {
    const Vector w = rng.uniform_in_box(q->w_box());
    const Vector x = rng.uniform_in_box(q->x_box());
    const auto b = make_budget(k % 2 ? NormOrder::kTwo : NormOrder::kInf, 0.3);
    const auto res = inner_max(*q, w, x, 0, b, 50, 1.0);
    const Vector star = closed_form_inner_argmax(*q, w, x, b);
    EXPECT_LE(norm(sub(res.delta, star), NormOrder::kTwo), 1e-8);
  }
}

TEST(InnerMax, InfeasibleInitRejected) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  EXPECT_THROW(inner_max(*q, Vector{0, 0}, Vector{0, 0}, 0,
                         make_budget(NormOrder::kTwo, 0.1), 1, 1.0, Vector{0.2, 0}),
               InvalidInputError);
  EXPECT_THROW(inner_max(*q, Vector{0, 0}, Vector{0, 0}, 0,
                         make_budget(NormOrder::kTwo, 0.1), 0, 1.0),
               InvalidInputError);
}

TEST(InnerMaxSign, Examples) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  const auto b = make_budget(NormOrder::kInf, 0.25);
  const auto res = inner_max_sign(*q, Vector{1, 0}, Vector{0, 0}, 0, b, 1, 0.25);
  EXPECT_EQ(res.delta, (Vector{0.25, 0}));
  double g0 = 0, g1 = 0;
  oracle::grid_max_2d([](double a, double c) { return a - 0.5 * (a * a + c * c); },
                      0.25, 1e-3, true, &g0, &g1);
  EXPECT_NEAR(g0, 0.25, 1e-12);
  EXPECT_NEAR(g1, 0.0, 1e-12);
}

TEST(InnerMaxSign, ZeroGradientKeepsDelta) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  // grad_x = w - (x + delta) = 0 at the start.
  const Vector init{0.1, -0.05};
  const auto res = inner_max_sign(*q, Vector{0.1, -0.05}, Vector{0, 0}, 0,
                                  make_budget(NormOrder::kInf, 0.2), 3, 0.1, init);
  EXPECT_EQ(res.delta, init);
}

TEST(InnerMaxSign, OneDimensionalAgreesWithGradient) {
  auto q = quadratic_saddle(1, 1, {0}, 0);
  Rng rng(82);
  for (int k = 0; k < 50; ++k) {
    const Vector w{rng.uniform(-1, 1)};
    const Vector x{rng.uniform(-1, 1)};
    const double r = rng.uniform(0.01, 0.1);
    // Keep the free maximizer outside the ball so both loops end on the
    // same boundary point.
    if (std::abs(w[0] - x[0]) <= 2 * r) continue;
    const auto b = make_budget(NormOrder::kInf, r);
    const auto g = inner_max(*q, w, x, 0, b, 5, 1.0);
    const auto s = inner_max_sign(*q, w, x, 0, b, 5, r);
    EXPECT_EQ(g.delta, s.delta);
  }
}

ConstantsProfile example_profile() {
  ConstantsProfile p;
  p.L11 = 1;
  p.L12 = 1;
  p.L21 = 1;
  p.L22 = 1;
  p.mu_x = 1;
  p.mu_w = 1;
  p.G = 10;
  return p;
}

TEST(RequiredInnerSteps, Examples) {
  const ConstantsProfile p = example_profile();
  EXPECT_DOUBLE_EQ(p.robust_smoothness(), 2.0);
  EXPECT_EQ(required_inner_steps(p, 100, 2, make_budget(NormOrder::kTwo, 0.5)), 3u);
  EXPECT_EQ(required_inner_steps(p, 1, 2, make_budget(NormOrder::kTwo, 0.5)), 1u);
  EXPECT_EQ(required_inner_steps(p, 100, 2, make_budget(NormOrder::kTwo, 0)), 1u);
}

TEST(RequiredInnerSteps, DoublingRadiusSquared) {
  Rng rng(83);
  for (int k = 0; k < 200; ++k) {
    ConstantsProfile p = example_profile();
    p.L22 = rng.uniform(1, 5);
    p.mu_x = rng.uniform(0.1, 1);
    p.G = rng.uniform(0.1, 10);
    const std::size_t T = 1 + rng.index(5000);
    const double r = rng.uniform(0.01, 1);
    const std::size_t k1 =
        required_inner_steps(p, T, 3, make_budget(NormOrder::kTwo, r));
    const std::size_t k2 = required_inner_steps(
        p, T, 3, make_budget(NormOrder::kTwo, r * std::sqrt(2.0)));
    EXPECT_GE(k2, k1);
    EXPECT_LE(k2 - k1, static_cast<std::size_t>(
                           std::ceil(p.L22 / p.mu_x * std::log(2.0))));
  }
}

TEST(RequiredInnerSteps, ZeroConstantsRejected) {
  ConstantsProfile p = example_profile();
  p.G = 0;
  EXPECT_THROW(required_inner_steps(p, 10, 2, make_budget(NormOrder::kTwo, 1)),
               InvalidInputError);
}

TEST(InnerMax, ContractionProperty) {
  Rng rng(84);
  for (int trial = 0; trial < 100; ++trial) {
    const double ratio = std::vector<double>{0.1, 0.5, 1.0}[trial % 3];
    const double L22 = rng.uniform(0.5, 3);
    const Vector h{L22, ratio * L22, rng.uniform(ratio * L22, L22)};
    const QuadraticDomain dom{Box(3, Interval{-3, 3}), Box(3, Interval{-3, 3})};
    auto q = quadratic_saddle_diag(1, h, {0, 0, 0}, 0, dom);
    const Vector w = rng.uniform_in_box(q->w_box());
    const Vector x = rng.uniform_in_box(Box(3, Interval{-1, 1}));
    const auto b = make_budget(trial % 2 ? NormOrder::kTwo : NormOrder::kInf,
                               rng.uniform(0.05, 1));
    const Vector start = rng.uniform_in_ball(3, b);
    const auto res = inner_max(*q, w, x, 0, b, 50, 1.0 / L22, start, true);
    const Vector star = closed_form_inner_argmax(*q, w, x, b);
    const double d1 = oracle::sq_dist(res.path[0], star);
    const double factor = 1.0 - q->profile().mu_x / q->profile().L22;
    for (std::size_t k = 1; k < res.path.size(); ++k) {
      EXPECT_LE(oracle::sq_dist(res.path[k], star),
                std::pow(factor, static_cast<double>(k)) * d1 + 1e-12)
          << "trial " << trial << " k " << k;
      EXPECT_LE(norm(res.path[k], b.p), b.radius + 1e-12);
    }
  }
}

TEST(RobustObjective, ZeroRadiusIsEmpiricalRisk) {
  auto q = quadratic_saddle(1, 1, {0.1, 0.2}, 0.3);
  const Dataset data = random_dataset(10, 2, 85);
  const Vector w{0.4, -0.2};
  EXPECT_EQ(robust_objective(*q, data, w, make_budget(NormOrder::kTwo, 0),
                             InnerQuality::analytic()),
            empirical_risk(*q, data, w));
}

TEST(RobustObjective, AnalyticMatchesPgd) {
  auto q = quadratic_saddle(1, 1, {0.1, 0.2}, 0.3);
  const Dataset data = random_dataset(10, 2, 86);
  Rng rng(87);
  for (int k = 0; k < 20; ++k) {
    const Vector w = rng.uniform_in_box(q->w_box());
    for (auto p : {NormOrder::kTwo, NormOrder::kInf}) {
      const auto b = make_budget(p, 0.2);
      EXPECT_NEAR(robust_objective(*q, data, w, b, InnerQuality::analytic()),
                  robust_objective(*q, data, w, b, InnerQuality::pgd(60, 1.0)),
                  1e-8);
    }
  }
}

TEST(RobustObjective, MonotoneInRadius) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  const Dataset data = random_dataset(10, 2, 88);
  Rng rng(89);
  for (int k = 0; k < 50; ++k) {
    const Vector w = rng.uniform_in_box(q->w_box());
    for (auto p : {NormOrder::kTwo, NormOrder::kInf}) {
      EXPECT_GE(robust_objective(*q, data, w, make_budget(p, 0.2), InnerQuality::analytic()),
                robust_objective(*q, data, w, make_budget(p, 0.1), InnerQuality::analytic()));
    }
  }
}

TEST(RobustObjective, GradientMatchesFiniteDifference) {
  auto q = quadratic_saddle(1.3, 0.9, {0.1, 0.2}, 0);
  const Dataset data = random_dataset(7, 2, 90);
  const auto b = make_budget(NormOrder::kTwo, 0.15);
  const Vector w{0.3, -0.4};
  const Vector fd = oracle::central_difference(
      [&](const Vector& v) {
        return robust_objective(*q, data, v, b, InnerQuality::analytic());
      },
      w);
  const Vector g = robust_objective_gradient(*q, data, w, b);
  EXPECT_LE(norm(sub(g, fd), NormOrder::kTwo), 1e-6);
}

TEST(Train, SingleAtomConverges) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  const Dataset data = single_atom({0, 0});
  TrainConfig cfg;
  cfg.T = 500;
  cfg.budget = make_budget(NormOrder::kTwo, 0.1);
  cfg.schedule = OuterSchedule::kPlDecay;
  cfg.w_init = {0.9, -0.8};
  const TrainTrace tr = train(*q, data, cfg);
  const double final_obj = robust_objective(*q, data, tr.w_final, cfg.budget,
                                            InnerQuality::analytic());
  EXPECT_LE(final_obj, 0.0 + 1e-3);
  EXPECT_EQ(tr.steps.size(), 500u);
}

TEST(Train, SingleStepUnrolling) {
  auto q = quadratic_saddle(1, 1, {0.2, -0.1}, 0);
  const Dataset data = random_dataset(5, 2, 91);
  TrainConfig cfg;
  cfg.T = 1;
  cfg.K = 1;
  cfg.eta_x = 0.5;
  cfg.budget = make_budget(NormOrder::kTwo, 0.3);
  cfg.schedule = OuterSchedule::kConstant;
  cfg.eta = 0.1;
  cfg.seed = 17;
  cfg.w_init = {0.5, 0.5};
  const TrainTrace tr = train(*q, data, cfg);

  const auto [i1, unused] = next_uniform_index({17, 0}, 5);
  EXPECT_EQ(tr.steps[0].i_t, i1);
  const Vector& x = data.samples[i1].x;
  const Vector w1 = cfg.w_init;
  // delta_2 = Proj(0 + eta_x grad_x f(w_1, x)).
  Vector delta2 = scaled(q->grad_x(w1, x, 0), 0.5);
  delta2 = project_ball(delta2, cfg.budget);
  Vector w2 = w1;
  axpy(-0.1, q->grad_w(w1, add(x, delta2), 0), w2);
  EXPECT_EQ(tr.w_final, w2);
}

TEST(Train, Determinism) {
  auto q = quadratic_saddle(1, 1, {0.2, -0.1}, 0);
  const Dataset data = random_dataset(20, 2, 92);
  TrainConfig cfg;
  cfg.T = 300;
  cfg.budget = make_budget(NormOrder::kInf, 0.1);
  cfg.seed = 5;
  cfg.delta_init = DeltaInit::kUniformInBall;
  const TrainTrace a = train(*q, data, cfg);
  const TrainTrace b = train(*q, data, cfg);
  EXPECT_EQ(a.w_final, b.w_final);
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    EXPECT_EQ(a.steps[t].i_t, b.steps[t].i_t);
    EXPECT_EQ(a.steps[t].objective_stoch, b.steps[t].objective_stoch);
  }
  cfg.seed = 6;
  EXPECT_NE(train(*q, data, cfg).w_final, a.w_final);
}

TEST(Train, ZeroRadiusIsPlainSgd) {
  auto q = quadratic_saddle(1, 1, {0.2, -0.1}, 0.5);
  const Dataset data = random_dataset(8, 2, 93);
  TrainConfig cfg;
  cfg.T = 50;
  cfg.K = 3;
  cfg.budget = make_budget(NormOrder::kTwo, 0);
  cfg.record_w = true;
  cfg.seed = 3;
  const TrainTrace tr = train(*q, data, cfg);
  Vector w = tr.steps[0].w;
  for (const auto& s : tr.steps) {
    EXPECT_EQ(s.w, w);
    const Vector& x = data.samples[s.i_t].x;
    EXPECT_EQ(s.objective_stoch, q->value(w, x, 0));
    axpy(-1.0 / static_cast<double>(s.t), q->grad_w(w, x, 0), w);
    w = clamp_to_box(w, q->w_box());
  }
  EXPECT_EQ(w, tr.w_final);
}

TEST(Train, FullObjectiveCadence) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  const Dataset data = random_dataset(4, 2, 94);
  TrainConfig cfg;
  cfg.T = 30;
  cfg.budget = make_budget(NormOrder::kTwo, 0.1);
  const TrainTrace tr = train(*q, data, cfg);
  for (const auto& s : tr.steps) {
    EXPECT_EQ(s.objective_full.has_value(), s.t % 10 == 0);
  }
}

TEST(Train, DivergenceCarriesPartialTrace) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  const Dataset data = single_atom({0.5, 0.5});
  TrainConfig cfg;
  cfg.T = 1000;
  cfg.budget = make_budget(NormOrder::kTwo, 0.1);
  cfg.schedule = OuterSchedule::kConstant;
  cfg.eta = 10;
  cfg.project_w = false;
  cfg.w_init = {1, 1};
  try {
    train(*q, data, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_FALSE(e.trace().steps.empty());
    EXPECT_LT(e.trace().steps.size(), 1000u);
  }
}

TEST(Train, ProjectionActivationCounted) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  const Dataset data = single_atom({0.5, 0.5});
  TrainConfig cfg;
  cfg.T = 20;
  cfg.budget = make_budget(NormOrder::kTwo, 0.1);
  cfg.schedule = OuterSchedule::kConstant;
  cfg.eta = 5;
  const TrainTrace tr = train(*q, data, cfg);
  std::size_t flagged = 0;
  for (const auto& s : tr.steps) flagged += s.projected ? 1 : 0;
  EXPECT_GT(tr.projections, 0u);
  EXPECT_EQ(flagged, tr.projections);
  EXPECT_TRUE(inside_box(tr.w_final, q->w_box()));
}

TEST(Train, InvalidConfigRejected) {
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  TrainConfig cfg;
  cfg.budget = make_budget(NormOrder::kTwo, 0.1);
  EXPECT_THROW(train(*q, single_atom({0, 0, 0}), cfg), InvalidInputError);
  cfg.T = 0;
  EXPECT_THROW(train(*q, single_atom({0, 0}), cfg), InvalidInputError);
}

TEST(MinimizeRobustObjective, ReachesStationaryPoint) {
  auto q = quadratic_saddle(1, 1, {0.3, -0.2}, 0);
  const Dataset data = random_dataset(10, 2, 95);
  const auto b = make_budget(NormOrder::kTwo, 0.1);
  const auto m = minimize_robust_objective(*q, data, b);
  Rng rng(96);
  for (int k = 0; k < 200; ++k) {
    const Vector w = rng.uniform_in_box(q->w_box());
    EXPECT_GE(robust_objective(*q, data, w, b, InnerQuality::analytic()),
              m.value - 1e-12);
  }
}

}  // namespace
}  // namespace robustood
