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

// Input-robustness measurement and evaluators for the out-of-distribution
// generalization, excess-risk and pretraining-transfer bounds.
//
// Covering numbers grow like (2 d0)^(2D/r^2 + 1) and overflow quickly, so
// every bound is assembled in log space. An overflowing bound is returned as
// +inf with a finite log_bound rather than raised as an error.

#ifndef ROBUSTOOD_CERTIFY_HPP_
#define ROBUSTOOD_CERTIFY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustood/error.hpp"
#include "robustood/losses.hpp"
#include "robustood/minimax.hpp"
#include "robustood/numkit.hpp"
#include "robustood/transport.hpp"

namespace robustood {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct RobustnessReport {
  double r = 0.0;
  NormOrder p = NormOrder::kTwo;
  double epsilon_hat = 0.0;
  Vector per_sample_gaps;
  InnerQuality::Kind method = InnerQuality::Kind::kAnalytic;
};

namespace detail {

// -f, so that an ascent loop on it finds the infimum of f.
class NegatedLoss final : public SmoothLoss {
 public:
  explicit NegatedLoss(const SmoothLoss& base) : base_(base) {}
  std::string family() const override { return "negated " + base_.family(); }
  std::size_t dim_w() const override { return base_.dim_w(); }
  std::size_t dim_x() const override { return base_.dim_x(); }
  double value(std::span<const double> w, std::span<const double> x,
               double y) const override {
    return -base_.value(w, x, y);
  }
  Vector grad_w(std::span<const double> w, std::span<const double> x,
                double y) const override {
    return scaled(base_.grad_w(w, x, y), -1.0);
  }
  Vector grad_x(std::span<const double> w, std::span<const double> x,
                double y) const override {
    return scaled(base_.grad_x(w, x, y), -1.0);
  }
  const ConstantsProfile& profile() const override { return base_.profile(); }
  const Box& w_box() const override { return base_.w_box(); }
  const Box& x_box() const override { return base_.x_box(); }

 private:
  const SmoothLoss& base_;
};

// log(exp(a) + exp(b)) for a, b in [-inf, inf].
inline double log_add(double a, double b) {
  if (a == -kInfinity) return b;
  if (b == -kInfinity) return a;
  const double m = std::max(a, b);
  if (m == kInfinity) return kInfinity;
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline double safe_log(double x) { return x > 0 ? std::log(x) : -kInfinity; }

// exp(v) when representable, +inf otherwise.
inline double exp_or_inf(double v) {
  if (v > std::log(std::numeric_limits<double>::max())) return kInfinity;
  return std::exp(v);
}

}  // namespace detail

// Per atom max(sup f - f, f - inf f) over the ball, i.e.
// sup_delta |f(w, x + delta) - f(w, x)|, averaged with the atom weights.
inline RobustnessReport measure_robustness(const SmoothLoss& loss,
                                           std::span<const double> w,
                                           const DiscreteDistribution& P,
                                           const PerturbationBudget& budget,
                                           const InnerQuality& quality) {
  validate(P);
  const PerturbationBudget b = make_budget(budget.p, budget.radius);
  RobustnessReport rep;
  rep.r = b.radius;
  rep.p = b.p;
  rep.method = quality.kind;
  rep.per_sample_gaps.resize(P.size(), 0.0);
  const detail::NegatedLoss neg(loss);
  double total = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Vector& x = P.atoms[i];
    const double y = P.label(i);
    const double f0 = loss.value(w, x, y);
    double sup = f0, inf = f0;
    if (b.radius > 0) {
      if (quality.kind == InnerQuality::Kind::kAnalytic) {
        auto e = loss.ball_extremes(w, x, y, b);
        if (!e) {
          throw UnsupportedError("analytic robustness measurement is not "
                                 "available for the '" + loss.family() +
                                 "' family");
        }
        sup = e->max_value;
        inf = e->min_value;
      } else {
        sup = inner_max(loss, w, x, y, b, quality.K, quality.eta_x).value;
        inf = -inner_max(neg, w, x, y, b, quality.K, quality.eta_x).value;
      }
    }
    const double gap = std::max({sup - f0, f0 - inf, 0.0});
    rep.per_sample_gaps[i] = gap;
    total += P.weights[i] * gap;
  }
  rep.epsilon_hat = total;
  return rep;
}

// A model whose robust objective is at most `objective_value` is
// (r, 2 objective_value)-input-robust on the training sample.
inline std::pair<double, double> robustness_from_objective(
    double objective_value, const PerturbationBudget& budget) {
  if (!(objective_value >= 0) || !std::isfinite(objective_value)) {
    throw InvalidInputError(
        "robustness_from_objective: objective must be finite and >= 0");
  }
  return {budget.radius, 2.0 * objective_value};
}

// ---------------------------------------------------------------------------

struct CoveringBound {
  double log_value = 0.0;
  double value = 0.0;  // +inf when not representable
  bool finite() const { return std::isfinite(value); }
};

inline CoveringBound covering_bound_with_exponent(std::size_t d0,
                                                  double exponent) {
  CoveringBound c;
  c.log_value = exponent * std::log(2.0 * static_cast<double>(d0));
  c.value = detail::exp_or_inf(c.log_value);
  return c;
}

// (2 d0)^(2D/r^2 + 1), the l2 covering number of the support.
inline CoveringBound covering_bound(std::size_t d0, double D, double r) {
  if (d0 < 1) throw InvalidInputError("covering_bound: d0 must be >= 1");
  if (!(D > 0) || !std::isfinite(D)) {
    throw InvalidInputError("covering_bound: D must be > 0");
  }
  if (!(r >= 0) || !std::isfinite(r)) {
    throw InvalidInputError("covering_bound: r must be >= 0");
  }
  if (r == 0.0) return {kInfinity, kInfinity};
  return covering_bound_with_exponent(d0, 2.0 * D / (r * r) + 1.0);
}

struct BoundInputs {
  std::size_t d0 = 1;
  double D = 1.0;
  double M = 1.0;
  std::size_t n = 1;
  double r = 1.0;
  double epsilon = 0.0;
  double theta = 0.1;
  std::optional<double> epsilon_pre;
  std::optional<double> tv;
};

inline void validate(const BoundInputs& in) {
  if (!(in.theta > 0 && in.theta < 1)) {
    throw InvalidInputError("bound inputs: theta must lie in (0, 1)");
  }
  if (in.n < 1) throw InvalidInputError("bound inputs: n must be >= 1");
  if (in.d0 < 1) throw InvalidInputError("bound inputs: d0 must be >= 1");
  for (double v : {in.D, in.M, in.r, in.epsilon}) {
    if (!(v >= 0) || !std::isfinite(v)) {
      throw InvalidInputError("bound inputs: magnitudes must be finite, >= 0");
    }
  }
  if (in.epsilon_pre &&
      (!(*in.epsilon_pre >= 0) || !std::isfinite(*in.epsilon_pre))) {
    throw InvalidInputError("bound inputs: epsilon_pre must be >= 0");
  }
  if (in.tv && !(*in.tv >= 0 && *in.tv <= 1)) {
    throw InvalidInputError("bound inputs: tv must lie in [0, 1]");
  }
}

struct BoundComponent {
  std::string name;
  double value = 0.0;
  double log_value = 0.0;
};

// bound = sum of components (each possibly +inf).
struct BoundReport {
  std::string formula;
  double bound = 0.0;
  double log_bound = 0.0;
  std::vector<BoundComponent> components;
  double log_covering = 0.0;  // log of the covering number, when one is used

  bool vacuous() const { return !std::isfinite(bound); }
  double component(const std::string& name) const {
    for (const auto& c : components) {
      if (c.name == name) return c.value;
    }
    throw InvalidInputError("bound report has no component '" + name + "'");
  }
};

namespace detail {

inline BoundComponent linear_component(std::string name, double v) {
  return {std::move(name), v, safe_log(v)};
}

inline BoundComponent log_component(std::string name, double log_v) {
  return {std::move(name), exp_or_inf(log_v), log_v};
}

// M sqrt((N ln 2 + 2 ln(c / theta)) / n) with N = exp(log_n_cover).
inline BoundComponent concentration(double M, double log_n_cover,
                                    double log_c_over_theta, std::size_t n) {
  const double log_inner =
      log_add(log_n_cover + std::log(std::numbers::ln2),
              safe_log(2.0 * log_c_over_theta));
  const double log_v =
      safe_log(M) + 0.5 * (log_inner - std::log(static_cast<double>(n)));
  if (log_v == -kInfinity) return {"concentration", 0.0, -kInfinity};
  return log_component("concentration", log_v);
}

inline BoundReport assemble(std::string formula,
                            std::vector<BoundComponent> parts,
                            double log_covering) {
  BoundReport rep;
  rep.formula = std::move(formula);
  rep.log_bound = -kInfinity;
  rep.bound = 0.0;
  for (const auto& c : parts) {
    rep.log_bound = log_add(rep.log_bound, c.log_value);
    rep.bound += c.value;
  }
  rep.components = std::move(parts);
  rep.log_covering = log_covering;
  return rep;
}

}  // namespace detail

// |sup_{W_inf(P0, r)} R - R_{P_n}| <= eps + M sqrt((N ln2 + 2 ln(1/theta))/n)
// for a model that is (2r, eps)-robust in l_inf on the sample, with N the
// covering number at radius r.
inline BoundReport ood_bound_winf(const BoundInputs& in) {
  validate(in);
  const CoveringBound cov = covering_bound(in.d0, in.D, in.r);
  std::vector<BoundComponent> parts{
      detail::linear_component("robustness", in.epsilon),
      detail::concentration(in.M, cov.log_value, std::log(1.0 / in.theta),
                            in.n)};
  return detail::assemble("ood_winf", std::move(parts), cov.log_value);
}

// W2 version for a model (2r/eps, eps)-robust in l2:
// (M + 1) eps + M sqrt(((2 d0)^(2 eps^2 D / r^2 + 1) ln2 + 2 ln(1/theta))/n).
inline BoundReport ood_bound_w2(const BoundInputs& in) {
  validate(in);
  if (!(in.epsilon > 0)) {
    throw InvalidInputError("ood_bound_w2: epsilon must be > 0");
  }
  if (!(in.D > 0)) throw InvalidInputError("ood_bound_w2: D must be > 0");
  if (!(in.r > 0)) throw InvalidInputError("ood_bound_w2: r must be > 0");
  const double exponent =
      2.0 * in.epsilon * in.epsilon * in.D / (in.r * in.r) + 1.0;
  const CoveringBound cov = covering_bound_with_exponent(in.d0, exponent);
  std::vector<BoundComponent> parts{
      detail::linear_component("robustness", (in.M + 1.0) * in.epsilon),
      detail::concentration(in.M, cov.log_value, std::log(1.0 / in.theta),
                            in.n)};
  return detail::assemble("ood_w2", std::move(parts), cov.log_value);
}

// High-probability optimization error after T steps:
// (G^2 ln ln(2T/theta) (64 L + 16 mu_w) + G^2 L) / (T mu_w^2).
inline double optimization_term(const ConstantsProfile& prof, std::size_t T,
                                double theta) {
  const double L = prof.robust_smoothness();
  const double G2 = prof.G * prof.G;
  const double ll = std::log(std::log(2.0 * static_cast<double>(T) / theta));
  return (G2 * ll * (64.0 * L + 16.0 * prof.mu_w) + G2 * L) /
         (static_cast<double>(T) * prof.mu_w * prof.mu_w);
}

// Excess OOD risk of the T-th SGD iterate when the robust objective at the
// optimum is at most eps0 = in.epsilon.
inline BoundReport excess_risk_bound(const BoundInputs& in,
                                     const ConstantsProfile& prof,
                                     std::size_t T, NormOrder p) {
  validate(in);
  validate(prof);
  if (T < 4) throw PreconditionError("excess_risk_bound: T must be >= 4");
  if (in.theta > std::exp(-1.0)) {
    throw PreconditionError("excess_risk_bound: theta must be <= 1/e");
  }
  if (!(in.D > 0) || !(in.r > 0)) {
    throw InvalidInputError("excess_risk_bound: D and r must be > 0");
  }
  const double opt = optimization_term(prof, T, in.theta);
  const double eps0 = in.epsilon;
  double mult = 0.0, exponent = 0.0;
  std::string formula;
  if (p == NormOrder::kTwo) {
    mult = 2.0 * in.M + 3.0;
    exponent = 2.0 * eps0 * eps0 * in.D / (in.r * in.r) + 1.0;
    formula = "excess_w2";
  } else if (p == NormOrder::kInf) {
    mult = 3.0;
    exponent = 2.0 * in.D / (in.r * in.r) + 1.0;
    formula = "excess_winf";
  } else {
    throw InvalidInputError("excess_risk_bound: p must be 2 or inf");
  }
  const CoveringBound cov = covering_bound_with_exponent(in.d0, exponent);
  std::vector<BoundComponent> parts{
      detail::linear_component("robustness", mult * eps0),
      detail::linear_component("optimization", mult * opt),
      detail::concentration(in.M, cov.log_value, std::log(2.0 / in.theta),
                            in.n)};
  return detail::assemble(formula, std::move(parts), cov.log_value);
}

struct TransferBounds {
  BoundReport population;                  // eps_pre + 2 M tv
  std::optional<BoundReport> finite_sample;  // p = inf, adds M sqrt(ln(1/theta)/(2n))
  std::optional<double> r0;                // p = 2: sqrt(2 D^2 tv + r^2)
};

// Downstream worst-case risk of a pretrained model from its pretraining
// worst-case risk and the total variation between the two distributions.
inline TransferBounds pretrain_transfer_bound(const BoundInputs& in,
                                              NormOrder p) {
  if (!in.epsilon_pre) {
    throw InvalidInputError("pretrain_transfer_bound: epsilon_pre missing");
  }
  if (!in.tv) throw InvalidInputError("pretrain_transfer_bound: tv missing");
  validate(in);
  const double eps = *in.epsilon_pre;
  const double tv = *in.tv;
  TransferBounds out;
  out.population = detail::assemble(
      "transfer",
      {detail::linear_component("pretrain", eps),
       detail::linear_component("tv", 2.0 * in.M * tv)},
      0.0);
  if (p == NormOrder::kInf) {
    out.finite_sample = detail::assemble(
        "transfer_finite_sample",
        {detail::linear_component("pretrain", eps),
         detail::linear_component("tv", 2.0 * in.M * tv),
         detail::linear_component(
             "concentration",
             in.M * std::sqrt(std::log(1.0 / in.theta) /
                              (2.0 * static_cast<double>(in.n))))},
        0.0);
  } else if (p == NormOrder::kTwo) {
    out.r0 = std::sqrt(2.0 * in.D * in.D * tv + in.r * in.r);
  } else {
    throw InvalidInputError("pretrain_transfer_bound: p must be 2 or inf");
  }
  return out;
}

}  // namespace robustood

#endif  // ROBUSTOOD_CERTIFY_HPP_
