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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances and runtime limits are pinned
// below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "robustood/certify.hpp"
#include "robustood/harness.hpp"
#include "robustood/io.hpp"
#include "robustood/losses.hpp"
#include "robustood/minimax.hpp"
#include "robustood/transport.hpp"

namespace robustood {
namespace {

constexpr double kTransportTol = 1e-9;
constexpr double kGridTol = 5e-3;
constexpr double kContractionSlack = 1e-12;
constexpr double kSlopeLo = -1.25;
constexpr double kSlopeHi = -0.85;
constexpr double kRobustnessSlack = 1e-8;
constexpr double kTransferSlack = 1e-9;
constexpr double kSpearmanMax = -0.5;
constexpr double kFourDecimals = 5e-5;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::size_t worker_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// Distribution with weights count / N plus its equal-mass expansion.
DiscreteDistribution random_counts(Rng& rng, std::size_t N, std::size_t d,
                                   bool lattice, std::vector<Vector>& expanded) {
  const std::size_t m = 1 + rng.index(std::min<std::size_t>(N, 4));
  std::vector<std::size_t> counts(m, 1);
  for (std::size_t k = m; k < N; ++k) ++counts[rng.index(m)];
  DiscreteDistribution P;
  double acc = 0;
  for (std::size_t i = 0; i < m; ++i) {
    Vector a(d);
    for (double& x : a) {
      x = lattice ? 0.5 * static_cast<double>(rng.index(4)) : rng.uniform(-1, 1);
    }
    P.atoms.push_back(a);
    const double w = i + 1 < m ? static_cast<double>(counts[i]) / static_cast<double>(N)
                               : 1.0 - acc;
    acc += w;
    P.weights.push_back(w);
    for (std::size_t c = 0; c < counts[i]; ++c) expanded.push_back(a);
  }
  return P;
}

Outcome transport_oracle() {
  Rng rng(RngState{1001});
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t N = 1 + rng.index(6), d = 1 + rng.index(3);
    const bool lattice = rng.uniform01() < 0.5;
    std::vector<Vector> pe, qe;
    const auto P = random_counts(rng, N, d, lattice, pe);
    const auto Q = random_counts(rng, N, d, lattice, qe);
    const auto ref = oracle::brute_assignment(pe, qe);
    const double w2 = wasserstein2(P, Q), wi = wasserstein_inf(P, Q);
    worst = std::max({worst, std::abs(w2 - brute_force_wp(P, Q, NormOrder::kTwo)),
                      std::abs(wi - brute_force_wp(P, Q, NormOrder::kInf)),
                      std::abs(w2 - ref.w2), std::abs(wi - ref.winf)});
  }
  return {worst <= kTransportTol, fmt("max deviation %.3g over 200 pairs", worst)};
}

// Maximizers sit a third of a grid step off the coarse grid, so the grid
// error shrinks by 4x when the step halves.
Outcome grid_identity() {
  const double r = 0.25, s = 1e-3;
  auto q = quadratic_saddle(1, 1, {0, 0}, 0);
  const Vector w{0.3, 0.3};
  const std::vector<Vector> offsets{{0.1 + s / 3, -0.05 + s / 3},
                                    {-0.2 + s / 3, 0.12 + s / 3},
                                    {0.03 + s / 3, 0.2 + s / 3}};
  std::vector<Vector> atoms;
  for (const auto& o : offsets) atoms.push_back({w[0] - o[0], w[1] - o[1]});
  // One atom whose maximizer is clipped by the box.
  atoms.back() = {0.9, -0.6};
  const auto P = uniform_distribution(atoms);
  const double exact = worst_case_risk_winf(*q, w, P, r, InnerQuality::analytic());
  auto grid = [&](double step) {
    double v = 0;
    for (std::size_t i = 0; i < P.size(); ++i) {
      const Vector& a = P.atoms[i];
      v += P.weights[i] * oracle::grid_max_2d(
                              [&](double u, double t) {
                                return q->value(w, Vector{a[0] + u, a[1] + t}, 0);
                              },
                              r, step, true);
    }
    return v;
  };
  const double e1 = std::abs(exact - grid(s)), e2 = std::abs(exact - grid(s / 2));
  const bool ok = e1 <= kGridTol && e1 > 0 && e2 <= 0.5 * e1;
  return {ok, fmt("error %.3g at step 1e-3", e1) + fmt(", %.3g at step 5e-4", e2)};
}

Outcome contraction() {
  Rng rng(RngState{1003});
  double worst = -kInfinity;
  for (int trial = 0; trial < 100; ++trial) {
    const double ratio = std::vector<double>{0.1, 0.5, 1.0}[trial % 3];
    const double L22 = rng.uniform(0.5, 3);
    const Vector h{L22, ratio * L22, rng.uniform(ratio * L22, L22)};
    const QuadraticDomain dom{Box(3, Interval{-3, 3}), Box(3, Interval{-3, 3})};
    auto q = quadratic_saddle_diag(1, h, {0, 0, 0}, 0, dom);
    const Vector wv = rng.uniform_in_box(q->w_box());
    const Vector x = rng.uniform_in_box(Box(3, Interval{-1, 1}));
    const auto b = make_budget(trial % 2 ? NormOrder::kTwo : NormOrder::kInf,
                               rng.uniform(0.05, 1));
    const Vector start = rng.uniform_in_ball(3, b);
    const auto res = inner_max(*q, wv, x, 0, b, 50, 1.0 / L22, start, true);
    const Vector star = closed_form_inner_argmax(*q, wv, x, b);
    const double d1 = oracle::sq_dist(res.path[0], star);
    const double factor = 1.0 - q->profile().mu_x / q->profile().L22;
    for (std::size_t k = 1; k < res.path.size(); ++k) {
      worst = std::max(worst, oracle::sq_dist(res.path[k], star) -
                                  std::pow(factor, static_cast<double>(k)) * d1);
    }
  }
  return {worst <= kContractionSlack,
          fmt("max excess over the geometric envelope %.3g", worst)};
}

Outcome convergence_rate() {
  ExperimentConfig c = reference_config("converge");
  c.threads = worker_threads();
  const ExperimentReport rep = run_experiment(c);
  const double slope = rep.get("slope");
  const bool env = rep.get("envelope_holds") == 1.0;
  const bool ok = env && slope >= kSlopeLo && slope <= kSlopeHi;
  return {ok, std::string("envelope ") + (env ? "holds" : "violated") +
                  fmt(", slope %.4f", slope)};
}

Outcome robustness_from_training() {
  Rng rng(RngState{1005});
  double worst = -kInfinity;
  for (int m = 0; m < 50; ++m) {
    const std::size_t d = 1 + rng.index(3);
    const Box support = detail::cube(d, 0.0, 1.0);
    LossSpec spec;
    spec.mu_w = rng.uniform(0.5, 2);
    spec.mu_x = rng.uniform(0.5, 2);
    const auto p = m % 2 ? NormOrder::kTwo : NormOrder::kInf;
    const double r = rng.uniform(0.02, 0.3);
    const LossPtr loss = build_loss(spec, d, support, r);
    const Dataset data = make_dataset(10 + rng.index(20), d, support, {}, 500 + m);
    TrainConfig tc;
    tc.T = 200;
    tc.budget = make_budget(p, r);
    tc.seed = 900 + m;
    const Vector w = train(*loss, data, tc).w_final;
    const double obj = robust_objective(*loss, data, w, tc.budget, InnerQuality::analytic());
    const auto [rp, eps] = robustness_from_objective(obj, tc.budget);
    const double measured =
        measure_robustness(*loss, w, empirical_distribution(data),
                           make_budget(p, rp), InnerQuality::analytic())
            .epsilon_hat;
    worst = std::max(worst, measured - 2.0 * obj);
    (void)eps;
  }
  return {worst <= kRobustnessSlack,
          fmt("max(measured - 2 objective) = %.3g over 50 models", worst)};
}

Outcome bound_validity() {
  ExperimentConfig c = reference_config("validity");
  c.threads = worker_threads();
  const ExperimentReport rep = run_experiment(c);
  const double th = 0.1;
  const double limit = th + 3.0 * std::sqrt(th * (1 - th) / 200.0);
  const double rate = rep.get("violation_rate_theta0.1");
  return {rate <= limit && rep.rows.size() == 200,
          fmt("violation rate %.4f", rate) + fmt(" (limit %.4f)", limit)};
}

Outcome transfer() {
  ExperimentConfig c = reference_config("transfer");
  c.threads = worker_threads();
  const ExperimentReport rep = run_experiment(c);
  const double M =
      build_loss(c.loss, c.data.d0, c.support(), c.train.r)->profile().M;
  double worst = -kInfinity;
  for (const auto& row : rep.rows) {
    worst = std::max(worst, row.ood_risk -
                                (row.robust_objective + 2.0 * M * row.grid_value));
  }
  return {worst <= kTransferSlack && rep.rows.size() == 60,
          fmt("max(measured - eps_pre - 2 M tv) = %.3g", worst)};
}

Outcome ablation_trends() {
  ExperimentConfig cr = reference_config("ablate_r");
  cr.threads = worker_threads();
  const ExperimentReport rr = run_experiment(cr);
  ExperimentConfig cn = reference_config("ablate_n");
  cn.threads = worker_threads();
  const ExperimentReport rn = run_experiment(cn);
  const double rho = rn.get("spearman");
  const bool ok = rr.passed && rho <= kSpearmanMax;
  return {ok, fmt("best r %.4g", rr.get("best_r")) +
                  fmt(", margins %.2f", rr.get("margin_low_se")) +
                  fmt(" / %.2f SE", rr.get("margin_high_se")) +
                  ", valley " + (rr.get("valley_shaped") == 1.0 ? "yes" : "no") +
                  fmt(", spearman %.3f", rho)};
}

Outcome calculators() {
  BoundInputs in;
  in.epsilon = 0.1;
  in.M = 1;
  in.d0 = 2;
  in.D = 2;
  in.r = 2;
  in.n = 100;
  in.theta = 0.5;
  const double winf = ood_bound_winf(in).bound;
  const double cover = covering_bound(2, 2, 2).value;
  ConstantsProfile prof;
  prof.L11 = prof.L12 = prof.L21 = prof.L22 = 1;
  prof.mu_x = prof.mu_w = 1;
  prof.G = 10;
  const std::size_t K = required_inner_steps(prof, 100, 2, make_budget(NormOrder::kTwo, 0.5));
  BoundInputs pre = in;
  pre.epsilon_pre = 0.2;
  pre.tv = 0.1;
  const double transfer = pretrain_transfer_bound(pre, NormOrder::kInf).population.bound;
  pre.tv = 0.125;
  pre.r = 1;
  const double r0 = *pretrain_transfer_bound(pre, NormOrder::kTwo).r0;
  BoundInputs big = in;
  big.d0 = 3000;
  big.D = 3000;
  big.r = 0.1;
  const BoundReport vac = ood_bound_winf(big);
  const bool ok = std::abs(winf - 0.4532) < kFourDecimals &&
                  std::abs(cover - 16.0) < kFourDecimals && K == 3 &&
                  std::abs(transfer - 0.4) < kFourDecimals &&
                  std::abs(r0 - 1.4142) < kFourDecimals && vac.vacuous() &&
                  std::isfinite(vac.log_bound) && std::isfinite(vac.log_covering);
  return {ok, fmt("winf %.4f", winf) + fmt(", N %.4f", cover) +
                  fmt(", K %.0f", static_cast<double>(K)) +
                  fmt(", transfer %.4f", transfer) + fmt(", r0 %.4f", r0) +
                  fmt(", log bound at d0=3000 %.6g", vac.log_bound)};
}

Outcome determinism() {
  ExperimentConfig t;
  t.train.T = 300;
  t.train.full_objective_every = 10;
  t.data.label.kind = LabelKind::kNone;
  const bool train_ok = trace_csv(run_train(t)) == trace_csv(run_train(t));
  ExperimentConfig e = reference_config("transfer");
  e.threads = 1;
  const std::string a = results_csv(run_experiment(e).rows);
  const std::string b = results_csv(run_experiment(e).rows);
  e.threads = worker_threads();
  const std::string c = results_csv(run_experiment(e).rows);
  ExperimentConfig v = reference_config("ablate_n");
  v.seeds = 3;
  v.threads = worker_threads();
  const std::string d1 = results_csv(run_experiment(v).rows);
  const std::string d2 = results_csv(run_experiment(v).rows);
  const bool ok = train_ok && a == b && a == c && d1 == d2;
  return {ok, std::string("train ") + (train_ok ? "identical" : "differs") +
                  ", experiments " + (a == b && a == c && d1 == d2 ? "identical" : "differ")};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace robustood

int main() {
  using namespace robustood;
  const std::vector<Criterion> criteria{
      {1, "transport oracle equivalence", 10, transport_oracle},
      {2, "worst-case risk vs per-atom grid", 30, grid_identity},
      {3, "inner-loop contraction", 5, contraction},
      {4, "convergence rate", 120, convergence_rate},
      {5, "robustness from the robust objective", 60, robustness_from_training},
      {6, "W_inf bound validity", 180, bound_validity},
      {7, "pretraining transfer", 60, transfer},
      {8, "ablation trends", 300, ablation_trends},
      {9, "bound calculators", 5, calculators},
      {10, "determinism", 120, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.ok && secs <= c.limit_s;
    if (!ok) ++failed;
    std::printf("%s [%d] %s: %s (%.1fs, limit %.0fs)\n", ok ? "PASS" : "FAIL",
                c.id, c.name, o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
