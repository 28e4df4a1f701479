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

// Adversarial training by multi-step SGD: an inner projected ascent loop
// approximates the worst-case input perturbation of the sampled example, then
// the model takes one SGD step at the perturbed input.

#ifndef ROBUSTOOD_MINIMAX_HPP_
#define ROBUSTOOD_MINIMAX_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustood/error.hpp"
#include "robustood/losses.hpp"
#include "robustood/numkit.hpp"

namespace robustood {

enum class OuterSchedule {
  kPlDecay,   // eta_t = 1 / (mu_w t)
  kConstant,  // eta_t = eta
};

enum class DeltaInit { kZero, kUniformInBall };

struct TrainConfig {
  std::size_t T = 100;
  std::size_t K = 0;  // 0 selects required_inner_steps()
  PerturbationBudget budget;
  std::optional<double> eta_x;  // default 1 / L22
  OuterSchedule schedule = OuterSchedule::kPlDecay;
  double eta = 0.1;  // step for kConstant
  bool sign_variant = false;
  std::uint64_t seed = 0;
  DeltaInit delta_init = DeltaInit::kZero;
  Vector w_init;  // empty: zero vector clamped into the iterate box
  std::size_t full_objective_every = 10;  // 0 disables full-batch telemetry
  bool record_w = false;
  bool project_w = true;
};

struct TraceStep {
  std::size_t t = 0;
  std::size_t i_t = 0;
  double objective_stoch = 0.0;  // f(w_t, x_{i_t} + delta_{K+1})
  std::optional<double> objective_full;  // full-batch robust objective at w_t
  double grad_norm = 0.0;  // |grad_w f(w_t, x_{i_t} + delta_{K+1})|
  bool projected = false;  // the iterate-box projection changed w_{t+1}
  Vector w;  // w_t when record_w is set
};

struct TrainTrace {
  std::vector<TraceStep> steps;
  Vector w_final;  // w_{T+1}
  std::size_t K = 0;
  double eta_x = 0.0;
  std::size_t projections = 0;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, TrainTrace partial)
      : NumericalError(what), trace_(std::move(partial)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

// Objective above this multiple of M aborts training.
inline constexpr double kDivergenceFactor = 1e6;

// How the per-example supremum over the ball is evaluated.
struct InnerQuality {
  enum class Kind { kAnalytic, kPgd };
  Kind kind = Kind::kAnalytic;
  std::size_t K = 0;
  double eta_x = 0.0;

  static InnerQuality analytic() { return {}; }
  static InnerQuality pgd(std::size_t K, double eta_x) {
    return {Kind::kPgd, K, eta_x};
  }
};

struct InnerResult {
  Vector delta;
  double value = 0.0;
  std::vector<Vector> path;  // delta_1 .. delta_{K+1} when requested
};

namespace detail {

inline double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

template <bool kSign>
InnerResult inner_loop(const SmoothLoss& loss, std::span<const double> w,
                       std::span<const double> x, double y,
                       const PerturbationBudget& budget, std::size_t K,
                       double eta_x, std::span<const double> delta_init,
                       bool record_path) {
  const PerturbationBudget b = make_budget(budget.p, budget.radius);
  if (K < 1) throw InvalidInputError("inner_max: K must be >= 1");
  if (!(eta_x > 0) || !std::isfinite(eta_x)) {
    throw InvalidInputError("inner_max: eta_x must be positive");
  }
  if (x.size() != loss.dim_x() || w.size() != loss.dim_w()) {
    throw InvalidInputError("inner_max: dimension mismatch");
  }
  Vector delta(delta_init.begin(), delta_init.end());
  if (delta.empty()) delta.assign(x.size(), 0.0);
  if (delta.size() != x.size()) {
    throw InvalidInputError("inner_max: delta_init has the wrong dimension");
  }
  if (!in_ball(delta, b)) {
    throw InvalidInputError("inner_max: delta_init lies outside the ball");
  }
  InnerResult out;
  if (record_path) out.path.push_back(delta);
  Vector point(x.size());
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < x.size(); ++j) point[j] = x[j] + delta[j];
    Vector g = loss.grad_x(w, point, y);
    for (std::size_t j = 0; j < g.size(); ++j) {
      delta[j] += eta_x * (kSign ? sign(g[j]) : g[j]);
    }
    delta = project_ball(delta, b);
    if (record_path) out.path.push_back(delta);
  }
  for (std::size_t j = 0; j < x.size(); ++j) point[j] = x[j] + delta[j];
  out.value = loss.value(w, point, y);
  out.delta = std::move(delta);
  return out;
}

}  // namespace detail

// K steps of projected gradient ascent on delta -> f(w, x + delta).
inline InnerResult inner_max(const SmoothLoss& loss, std::span<const double> w,
                             std::span<const double> x, double y,
                             const PerturbationBudget& budget, std::size_t K,
                             double eta_x,
                             std::span<const double> delta_init = {},
                             bool record_path = false) {
  return detail::inner_loop<false>(loss, w, x, y, budget, K, eta_x, delta_init,
                                   record_path);
}

// Same loop with the gradient replaced by its sign (sign(0) = 0).
inline InnerResult inner_max_sign(const SmoothLoss& loss,
                                  std::span<const double> w,
                                  std::span<const double> x, double y,
                                  const PerturbationBudget& budget,
                                  std::size_t K, double eta_x,
                                  std::span<const double> delta_init = {},
                                  bool record_path = false) {
  return detail::inner_loop<true>(loss, w, x, y, budget, K, eta_x, delta_init,
                                  record_path);
}

// Inner steps needed for the 1/T rate:
//   K = ceil((L22 / mu_x) log(8 T mu_w d0 r^2 / (G L))), at least 1,
// with L = L11 + L12 L21 / mu_x.
inline std::size_t required_inner_steps(const ConstantsProfile& profile,
                                        std::size_t T, std::size_t d0,
                                        const PerturbationBudget& budget) {
  const double L = profile.robust_smoothness();
  if (!(profile.G > 0) || !(L > 0)) {
    throw InvalidInputError("required_inner_steps: G and L must be positive");
  }
  if (!(profile.L22 > 0) || !(profile.mu_x > 0) || !(profile.mu_w > 0)) {
    throw InvalidInputError(
        "required_inner_steps: L22, mu_x and mu_w must be positive");
  }
  const double r = budget.radius;
  const double arg = 8.0 * static_cast<double>(T) * profile.mu_w *
                     static_cast<double>(d0) * r * r / (profile.G * L);
  if (!(arg > 1.0)) return 1;
  const double k = std::ceil(profile.L22 / profile.mu_x * std::log(arg));
  return k < 1.0 ? 1 : static_cast<std::size_t>(k);
}

inline double per_example_sup(const SmoothLoss& loss, std::span<const double> w,
                              const LabeledSample& s,
                              const PerturbationBudget& budget,
                              const InnerQuality& q) {
  if (budget.radius == 0.0) return loss.value(w, s.x, s.y);
  if (q.kind == InnerQuality::Kind::kAnalytic) {
    auto e = loss.ball_extremes(w, s.x, s.y, budget);
    if (!e) {
      throw UnsupportedError("analytic inner maximization is not available "
                             "for the '" + loss.family() + "' family");
    }
    return e->max_value;
  }
  return inner_max(loss, w, s.x, s.y, budget, q.K, q.eta_x).value;
}

inline double empirical_risk(const SmoothLoss& loss, const Dataset& data,
                             std::span<const double> w) {
  if (data.samples.empty()) throw InvalidInputError("empty dataset");
  double s = 0.0;
  for (const auto& smp : data.samples) s += loss.value(w, smp.x, smp.y);
  return s / static_cast<double>(data.samples.size());
}

// (1/n) sum_i sup_{|delta|_p <= r} f(w, x_i + delta).
inline double robust_objective(const SmoothLoss& loss, const Dataset& data,
                               std::span<const double> w,
                               const PerturbationBudget& budget,
                               const InnerQuality& quality) {
  if (data.samples.empty()) throw InvalidInputError("empty dataset");
  const PerturbationBudget b = make_budget(budget.p, budget.radius);
  double s = 0.0;
  for (const auto& smp : data.samples) {
    s += per_example_sup(loss, w, smp, b, quality);
  }
  return s / static_cast<double>(data.samples.size());
}

// Gradient of the robust objective by Danskin's rule, using the analytic
// maximizers (unique for strongly concave families).
inline Vector robust_objective_gradient(const SmoothLoss& loss,
                                        const Dataset& data,
                                        std::span<const double> w,
                                        const PerturbationBudget& budget) {
  Vector g(loss.dim_w(), 0.0);
  for (const auto& smp : data.samples) {
    auto e = loss.ball_extremes(w, smp.x, smp.y, budget);
    if (!e) throw UnsupportedError("robust_objective_gradient needs extremes");
    const Vector gi = loss.grad_w(w, add(smp.x, e->argmax), smp.y);
    axpy(1.0, gi, g);
  }
  for (double& v : g) v /= static_cast<double>(data.samples.size());
  return g;
}

struct RobustMinimum {
  Vector w;
  double value = 0.0;
  std::size_t iterations = 0;
};

// Minimizer of the robust objective over the iterate box by projected
// gradient descent with step 1/L (families with analytic extremes).
inline RobustMinimum minimize_robust_objective(const SmoothLoss& loss,
                                               const Dataset& data,
                                               const PerturbationBudget& budget,
                                               std::size_t max_iter = 200000,
                                               double tol = 1e-14) {
  const ConstantsProfile& p = loss.profile();
  const double L = p.robust_smoothness();
  if (!(L > 0)) throw InvalidInputError("minimize_robust_objective: L <= 0");
  Vector w = clamp_to_box(Vector(loss.dim_w(), 0.0), loss.w_box());
  RobustMinimum out;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector g = robust_objective_gradient(loss, data, w, budget);
    Vector next = w;
    axpy(-1.0 / L, g, next);
    next = clamp_to_box(next, loss.w_box());
    const double step = norm(sub(next, w), NormOrder::kTwo);
    w = std::move(next);
    out.iterations = it + 1;
    if (step <= tol) break;
  }
  out.value = robust_objective(loss, data, w, budget, InnerQuality::analytic());
  out.w = std::move(w);
  return out;
}

// Multi-step SGD. Each outer step samples one index uniformly, restarts the
// inner loop from delta_init, runs K ascent steps and takes one SGD step in
// w; the iterate is then clamped into the declared w box.
inline TrainTrace train(const SmoothLoss& loss, const Dataset& data,
                        const TrainConfig& config) {
  if (config.T < 1) throw InvalidInputError("train: T must be >= 1");
  if (data.samples.empty()) throw InvalidInputError("train: empty dataset");
  if (data.d0 != loss.dim_x()) {
    throw InvalidInputError("train: dataset and loss dimensions disagree");
  }
  for (const auto& s : data.samples) {
    if (s.x.size() != loss.dim_x()) {
      throw InvalidInputError("train: sample dimension mismatch");
    }
  }
  const PerturbationBudget budget =
      make_budget(config.budget.p, config.budget.radius);
  const ConstantsProfile& prof = loss.profile();

  TrainTrace trace;
  trace.K = config.K != 0 ? config.K
                          : required_inner_steps(prof, config.T, data.d0, budget);
  if (config.eta_x) {
    trace.eta_x = *config.eta_x;
  } else {
    if (!(prof.L22 > 0)) {
      throw InvalidInputError("train: eta_x default needs L22 > 0");
    }
    trace.eta_x = 1.0 / prof.L22;
  }
  if (!(trace.eta_x > 0) || !std::isfinite(trace.eta_x)) {
    throw InvalidInputError("train: eta_x must be positive");
  }
  if (config.schedule == OuterSchedule::kConstant && !(config.eta > 0)) {
    throw InvalidInputError("train: constant step must be positive");
  }
  if (config.schedule == OuterSchedule::kPlDecay && !(prof.mu_w > 0)) {
    throw InvalidInputError("train: PL schedule needs mu_w > 0");
  }

  Vector w = config.w_init.empty() ? Vector(loss.dim_w(), 0.0) : config.w_init;
  if (w.size() != loss.dim_w()) {
    throw InvalidInputError("train: w_init has the wrong dimension");
  }
  require_finite(w, "w_init");
  if (config.project_w) w = clamp_to_box(w, loss.w_box());

  const InnerQuality full_quality =
      loss.ball_extremes(w, data.samples[0].x, data.samples[0].y, budget)
          ? InnerQuality::analytic()
          : InnerQuality::pgd(trace.K, trace.eta_x);
  const double divergence_cap = kDivergenceFactor * std::max(prof.M, 1.0);

  Rng rng(RngState{config.seed, 0});
  const std::size_t n = data.samples.size();
  const std::size_t d = loss.dim_x();
  trace.steps.reserve(config.T);
  for (std::size_t t = 1; t <= config.T; ++t) {
    TraceStep step;
    step.t = t;
    step.i_t = rng.index(n);
    const LabeledSample& s = data.samples[step.i_t];
    Vector delta0 = config.delta_init == DeltaInit::kZero
                        ? Vector(d, 0.0)
                        : rng.uniform_in_ball(d, budget);
    const InnerResult inner =
        config.sign_variant
            ? inner_max_sign(loss, w, s.x, s.y, budget, trace.K, trace.eta_x,
                             delta0)
            : inner_max(loss, w, s.x, s.y, budget, trace.K, trace.eta_x,
                        delta0);
    step.objective_stoch = inner.value;
    if (config.full_objective_every != 0 &&
        t % config.full_objective_every == 0) {
      step.objective_full =
          robust_objective(loss, data, w, budget, full_quality);
    }
    if (config.record_w) step.w = w;
    if (!std::isfinite(step.objective_stoch) ||
        step.objective_stoch > divergence_cap) {
      trace.w_final = w;
      trace.steps.push_back(std::move(step));
      throw DivergenceError("train: objective diverged at step " +
                                std::to_string(t),
                            std::move(trace));
    }
    const Vector g = loss.grad_w(w, add(s.x, inner.delta), s.y);
    step.grad_norm = norm(g, NormOrder::kTwo);
    const double eta = config.schedule == OuterSchedule::kPlDecay
                           ? 1.0 / (prof.mu_w * static_cast<double>(t))
                           : config.eta;
    axpy(-eta, g, w);
    if (config.project_w) {
      Vector clamped = clamp_to_box(w, loss.w_box());
      if (clamped != w) {
        step.projected = true;
        ++trace.projections;
        w = std::move(clamped);
      }
    }
    if (!all_finite(w)) {
      trace.w_final = w;
      trace.steps.push_back(std::move(step));
      throw DivergenceError("train: iterate became non-finite at step " +
                                std::to_string(t),
                            std::move(trace));
    }
    trace.steps.push_back(std::move(step));
  }
  trace.w_final = std::move(w);
  return trace;
}

}  // namespace robustood

#endif  // ROBUSTOOD_MINIMAX_HPP_
