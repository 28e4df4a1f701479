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

// Smooth losses f(w, x) with analytic gradient oracles and a profile of the
// smoothness / curvature constants used by the convergence and
// generalization bounds.
//
// Three families ship:
//   * QuadraticSaddle: f = w.x - 1/2 sum_j h_j x_j^2 + mu_w/2 |w - a|^2 + c.
//     Strongly convex in w, strongly concave in x, with analytic constants
//     and closed-form extremes over l2 / linf balls.
//   * LogisticLoss: linear logistic regression with optional ridge term.
//   * TinyNetLoss: one tanh hidden layer followed by a logistic output.
// The last two carry empirically estimated (uncertified) profiles.

#ifndef ROBUSTOOD_LOSSES_HPP_
#define ROBUSTOOD_LOSSES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustood/error.hpp"
#include "robustood/numkit.hpp"

namespace robustood {

// Lipschitz / curvature constants. L11..L22 bound the gradient Lipschitz
// constants (w-w, w-x, x-w, x-x), G bounds |grad_w f|, M bounds f, mu_w is
// the PL constant of the robust objective and mu_x the strong concavity
// constant in the input (minimum over samples).
struct ConstantsProfile {
  double L11 = 0.0;
  double L12 = 0.0;
  double L21 = 0.0;
  double L22 = 0.0;
  double G = 0.0;
  double M = 0.0;
  double mu_w = 1.0;
  double mu_x = 1.0;
  bool certified = false;

  // Smoothness of the robust objective in w.
  double robust_smoothness() const { return L11 + L12 * L21 / mu_x; }
};

// Floor applied to empirically estimated curvature constants so that the
// profile invariant mu > 0 holds even for losses that are not curved.
inline constexpr double kCurvatureFloor = 1e-12;

inline void validate(const ConstantsProfile& p) {
  const double vals[] = {p.L11, p.L12, p.L21, p.L22, p.G, p.M, p.mu_w, p.mu_x};
  for (double v : vals) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("constants profile has a non-finite entry");
    }
  }
  if (p.L11 < 0 || p.L12 < 0 || p.L21 < 0 || p.L22 < 0 || p.G < 0 ||
      p.M < 0) {
    throw InvalidInputError("constants profile has a negative entry");
  }
  if (!(p.mu_w > 0) || !(p.mu_x > 0)) {
    throw InvalidInputError("constants profile needs mu_w > 0 and mu_x > 0");
  }
}

struct LabeledSample {
  Vector x;
  double y = 0.0;
};

// l1 diameter of a box: the distance between opposite corners.
inline double l1_diameter(const Box& box) {
  double d = 0.0;
  for (const auto& iv : box) d += iv.width();
  return d;
}

struct Dataset {
  std::vector<LabeledSample> samples;
  Box support_box;
  std::size_t d0 = 0;
  double D = 0.0;  // l1 diameter of the support

  std::size_t size() const { return samples.size(); }
};

inline void validate(const Dataset& data) {
  if (data.support_box.size() != data.d0) {
    throw InvalidInputError("dataset support box does not match d0");
  }
  for (const auto& iv : data.support_box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo <= iv.hi)) {
      throw InvalidInputError("dataset support box has an invalid interval");
    }
  }
  for (const auto& s : data.samples) {
    if (s.x.size() != data.d0) {
      throw InvalidInputError("dataset sample has the wrong dimension");
    }
    require_finite(s.x, "dataset sample");
    if (!inside_box(s.x, data.support_box)) {
      throw InvalidInputError("dataset sample lies outside the support box");
    }
  }
  if (data.D + 1e-12 < l1_diameter(data.support_box) &&
      !data.samples.empty()) {
    // D may be any upper bound on pairwise distances; check against samples.
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      for (std::size_t j = i + 1; j < data.samples.size(); ++j) {
        if (distance(data.samples[i].x, data.samples[j].x, NormOrder::kOne) >
            data.D + 1e-12) {
          throw InvalidInputError("dataset D is below a pairwise l1 distance");
        }
      }
    }
  }
}

// Maximizer and minimizer of delta -> f(w, x + delta) over a norm ball.
struct BallExtremes {
  Vector argmax;
  Vector argmin;
  double max_value = 0.0;
  double min_value = 0.0;
};

class SmoothLoss {
 public:
  virtual ~SmoothLoss() = default;

  virtual std::string family() const = 0;
  virtual std::size_t dim_w() const = 0;
  virtual std::size_t dim_x() const = 0;

  virtual double value(std::span<const double> w, std::span<const double> x,
                       double y) const = 0;
  virtual Vector grad_w(std::span<const double> w, std::span<const double> x,
                        double y) const = 0;
  virtual Vector grad_x(std::span<const double> w, std::span<const double> x,
                        double y) const = 0;

  virtual const ConstantsProfile& profile() const = 0;
  // Declared compact domains: the iterate box for w and the input box for x
  // (which must contain every perturbed input the caller evaluates).
  virtual const Box& w_box() const = 0;
  virtual const Box& x_box() const = 0;

  // Closed-form extremes over the ball when the family admits them.
  virtual std::optional<BallExtremes> ball_extremes(
      std::span<const double> /*w*/, std::span<const double> /*x*/,
      double /*y*/, const PerturbationBudget& /*budget*/) const {
    return std::nullopt;
  }
  // True when strong concavity in x is certified analytically.
  virtual bool certified_concave_in_x() const { return false; }
  // A valid analytic upper bound on f over the declared domains, if known.
  virtual std::optional<double> value_upper_bound() const {
    return std::nullopt;
  }

  double value(std::span<const double> w, const LabeledSample& s) const {
    return value(w, s.x, s.y);
  }
};

using LossPtr = std::shared_ptr<const SmoothLoss>;

namespace detail {

inline void check_box(const Box& box, std::size_t d, const char* what) {
  if (box.size() != d) {
    throw InvalidInputError(std::string(what) + " has the wrong dimension");
  }
  for (const auto& iv : box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo <= iv.hi)) {
      throw InvalidInputError(std::string(what) + " has an invalid interval");
    }
  }
}

inline Box cube(std::size_t d, double lo, double hi) {
  return Box(d, Interval{lo, hi});
}

inline double softplus(double z) {
  // log(1 + e^z) without overflow.
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Largest root-finding loop we run for secular equations; bisection stops
// earlier once the bracket no longer shrinks in floating point.
inline constexpr int kSecularIterations = 400;

// Smallest lambda >= lo with phi(lambda) <= target, for a decreasing phi.
template <typename Phi>
double bisect_decreasing(Phi phi, double lo, double hi, double target) {
  for (int it = 0; it < kSecularIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct QuadraticDomain {
  Box w_box;  // empty: [-1, 1]^d
  Box x_box;  // empty: [-1, 1]^d
};

class QuadraticSaddle final : public SmoothLoss {
 public:
  QuadraticSaddle(double mu_w, Vector curvature, Vector anchor, double offset,
                  QuadraticDomain domain)
      : mu_w_(mu_w),
        h_(std::move(curvature)),
        anchor_(std::move(anchor)),
        offset_(offset) {
    const std::size_t d = anchor_.size();
    if (!(mu_w_ > 0) || !std::isfinite(mu_w_)) {
      throw InvalidInputError("quadratic_saddle: mu_w must be positive");
    }
    if (d == 0 || h_.size() != d) {
      throw InvalidInputError("quadratic_saddle: curvature/anchor mismatch");
    }
    for (double h : h_) {
      if (!(h > 0) || !std::isfinite(h)) {
        throw InvalidInputError("quadratic_saddle: mu_x must be positive");
      }
    }
    require_finite(anchor_, "quadratic_saddle anchor");
    if (!std::isfinite(offset_)) {
      throw InvalidInputError("quadratic_saddle: offset must be finite");
    }
    w_box_ = domain.w_box.empty() ? detail::cube(d, -1, 1) : domain.w_box;
    x_box_ = domain.x_box.empty() ? detail::cube(d, -1, 1) : domain.x_box;
    detail::check_box(w_box_, d, "quadratic_saddle w box");
    detail::check_box(x_box_, d, "quadratic_saddle x box");
    isotropic_ = std::all_of(h_.begin(), h_.end(),
                             [&](double h) { return h == h_.front(); });
    profile_ = compute_profile();
  }

  std::string family() const override { return "quadratic"; }
  std::size_t dim_w() const override { return anchor_.size(); }
  std::size_t dim_x() const override { return anchor_.size(); }

  double value(std::span<const double> w, std::span<const double> x,
               double /*y*/) const override {
    double s = offset_;
    for (std::size_t j = 0; j < h_.size(); ++j) {
      const double dw = w[j] - anchor_[j];
      s += w[j] * x[j] - 0.5 * h_[j] * x[j] * x[j] + 0.5 * mu_w_ * dw * dw;
    }
    return s;
  }
  Vector grad_w(std::span<const double> w, std::span<const double> x,
                double /*y*/) const override {
    Vector g(h_.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      g[j] = x[j] + mu_w_ * (w[j] - anchor_[j]);
    }
    return g;
  }
  Vector grad_x(std::span<const double> w, std::span<const double> x,
                double /*y*/) const override {
    Vector g(h_.size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = w[j] - h_[j] * x[j];
    return g;
  }

  const ConstantsProfile& profile() const override { return profile_; }
  const Box& w_box() const override { return w_box_; }
  const Box& x_box() const override { return x_box_; }
  bool certified_concave_in_x() const override { return true; }
  std::optional<double> value_upper_bound() const override {
    return profile_.M;
  }

  std::optional<BallExtremes> ball_extremes(
      std::span<const double> w, std::span<const double> x, double y,
      const PerturbationBudget& budget) const override {
    BallExtremes e;
    e.argmax = argmax_in_ball(w, x, budget);
    e.argmin = argmin_in_ball(w, x, budget);
    e.max_value = value(w, add(x, e.argmax), y);
    e.min_value = value(w, add(x, e.argmin), y);
    return e;
  }

  // Unconstrained maximizer of delta -> f(w, x + delta): w / h - x.
  Vector free_maximizer(std::span<const double> w,
                        std::span<const double> x) const {
    Vector c(h_.size());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = w[j] / h_[j] - x[j];
    return c;
  }

  // argmax over the ball of the concave quadratic -1/2 sum h_j (d_j - c_j)^2.
  Vector argmax_in_ball(std::span<const double> w, std::span<const double> x,
                        const PerturbationBudget& budget) const {
    const Vector c = free_maximizer(w, x);
    const double r = budget.radius;
    if (budget.p == NormOrder::kInf || isotropic_) {
      return project_ball(c, budget);
    }
    // l2 with anisotropic curvature: delta_j = h_j c_j / (h_j + lambda) with
    // the multiplier chosen so the constraint is active.
    if (norm(c, NormOrder::kTwo) <= r) return c;
    auto delta_at = [&](double lambda) {
      Vector d(c.size());
      for (std::size_t j = 0; j < c.size(); ++j) {
        d[j] = h_[j] * c[j] / (h_[j] + lambda);
      }
      return d;
    };
    const double hmax = *std::max_element(h_.begin(), h_.end());
    const double hi = hmax * norm(c, NormOrder::kTwo) / r;
    const double lambda = detail::bisect_decreasing(
        [&](double l) { return norm(delta_at(l), NormOrder::kTwo); }, 0.0, hi,
        r);
    return project_ball(delta_at(lambda), budget);
  }

  // argmin over the ball, i.e. the point of the ball farthest from c in the
  // h-weighted norm.
  Vector argmin_in_ball(std::span<const double> w, std::span<const double> x,
                        const PerturbationBudget& budget) const {
    const Vector c = free_maximizer(w, x);
    const double r = budget.radius;
    const std::size_t d = c.size();
    Vector out(d, 0.0);
    if (r == 0.0) return out;
    if (budget.p == NormOrder::kInf) {
      for (std::size_t j = 0; j < d; ++j) out[j] = c[j] >= 0 ? -r : r;
      return out;
    }
    const double nc = norm(c, NormOrder::kTwo);
    if (isotropic_) {
      if (nc == 0.0) {
        out[0] = r;
        return out;
      }
      for (std::size_t j = 0; j < d; ++j) out[j] = -r * c[j] / nc;
      return out;
    }
    // Maximize sum h_j (d_j - c_j)^2 on the sphere |d| = r. Stationary points
    // satisfy d_j = -h_j c_j / (lambda - h_j); the global maximizer has
    // lambda >= h_max.
    const double hmax = *std::max_element(h_.begin(), h_.end());
    auto delta_at = [&](double lambda) {
      Vector dd(d, 0.0);
      for (std::size_t j = 0; j < d; ++j) {
        if (h_[j] < hmax) dd[j] = -h_[j] * c[j] / (lambda - h_[j]);
        else if (c[j] != 0.0) dd[j] = -h_[j] * c[j] / (lambda - h_[j]);
      }
      return dd;
    };
    bool top_active = false;
    for (std::size_t j = 0; j < d; ++j) {
      if (h_[j] == hmax && c[j] != 0.0) top_active = true;
    }
    if (!top_active) {
      // Possible hard case: the multiplier may sit exactly at h_max.
      Vector base(d, 0.0);
      double nb2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        if (h_[j] < hmax) {
          base[j] = -h_[j] * c[j] / (hmax - h_[j]);
          nb2 += base[j] * base[j];
        }
      }
      if (nb2 <= r * r) {
        std::size_t k = 0;
        while (h_[k] != hmax) ++k;
        base[k] = std::sqrt(r * r - nb2);
        return base;
      }
    }
    double lo = hmax;
    double hi = hmax + hmax * nc / r + hmax;
    while (norm(delta_at(hi), NormOrder::kTwo) > r) hi *= 2.0;
    const double lambda = detail::bisect_decreasing(
        [&](double l) { return norm(delta_at(l), NormOrder::kTwo); }, lo, hi,
        r);
    Vector dd = delta_at(lambda);
    // Rescale the residual bisection error onto the sphere.
    const double nd = norm(dd, NormOrder::kTwo);
    if (nd > 0) {
      for (double& v : dd) v *= r / nd;
    }
    return dd;
  }

  double mu_w() const { return mu_w_; }
  const Vector& curvature() const { return h_; }
  const Vector& anchor() const { return anchor_; }
  double offset() const { return offset_; }
  bool isotropic() const { return isotropic_; }

  // Exact minimum of f - offset over the declared boxes.
  static double min_without_offset(double mu_w, const Vector& h,
                                   const Vector& a, const Box& wb,
                                   const Box& xb) {
    double total = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (double xj : {xb[j].lo, xb[j].hi}) {
        // Concave in x (min at an endpoint), convex in w (stationary point
        // a - x / mu_w clamped to the box).
        const double wj = wb[j].clamp(a[j] - xj / mu_w);
        const double dw = wj - a[j];
        best = std::min(best,
                        wj * xj - 0.5 * h[j] * xj * xj + 0.5 * mu_w * dw * dw);
      }
      total += best;
    }
    return total;
  }

 private:
  ConstantsProfile compute_profile() const {
    ConstantsProfile p;
    p.L11 = mu_w_;
    p.L12 = 1.0;
    p.L21 = 1.0;
    p.L22 = *std::max_element(h_.begin(), h_.end());
    p.mu_x = *std::min_element(h_.begin(), h_.end());
    p.mu_w = mu_w_;
    p.certified = true;
    // G: |x + mu_w (w - a)| is maximized coordinatewise at box corners.
    double g2 = 0.0;
    double m = offset_;
    for (std::size_t j = 0; j < h_.size(); ++j) {
      double gj = 0.0;
      double mj = -std::numeric_limits<double>::infinity();
      for (double wj : {w_box_[j].lo, w_box_[j].hi}) {
        for (double xj : {x_box_[j].lo, x_box_[j].hi}) {
          gj = std::max(gj, std::abs(xj + mu_w_ * (wj - anchor_[j])));
        }
        // Convex in w: max at an endpoint; concave in x: clamp w / h.
        const double xj = x_box_[j].clamp(wj / h_[j]);
        const double dw = wj - anchor_[j];
        mj = std::max(mj, wj * xj - 0.5 * h_[j] * xj * xj +
                              0.5 * mu_w_ * dw * dw);
      }
      g2 += gj * gj;
      m += mj;
    }
    p.G = std::sqrt(g2);
    p.M = std::max(0.0, m);
    return p;
  }

  double mu_w_;
  Vector h_;
  Vector anchor_;
  double offset_;
  Box w_box_;
  Box x_box_;
  bool isotropic_ = true;
  ConstantsProfile profile_;
};

// Quadratic saddle with isotropic input curvature mu_x.
inline std::shared_ptr<const QuadraticSaddle> quadratic_saddle(
    double mu_w, double mu_x, Vector w_anchor, double offset,
    QuadraticDomain domain = {}) {
  if (!(mu_x > 0)) {
    throw InvalidInputError("quadratic_saddle: mu_x must be positive");
  }
  Vector h(w_anchor.size(), mu_x);
  return std::make_shared<const QuadraticSaddle>(
      mu_w, std::move(h), std::move(w_anchor), offset, std::move(domain));
}

// Quadratic saddle with diagonal input curvature h (mu_x = min h,
// L22 = max h).
inline std::shared_ptr<const QuadraticSaddle> quadratic_saddle_diag(
    double mu_w, Vector curvature, Vector w_anchor, double offset,
    QuadraticDomain domain = {}) {
  return std::make_shared<const QuadraticSaddle>(
      mu_w, std::move(curvature), std::move(w_anchor), offset,
      std::move(domain));
}

// Smallest offset c >= 0 for which f >= 0 on the declared boxes.
inline double nonnegative_offset(double mu_w, const Vector& curvature,
                                 const Vector& anchor,
                                 const QuadraticDomain& domain) {
  const std::size_t d = anchor.size();
  const Box wb = domain.w_box.empty() ? detail::cube(d, -1, 1) : domain.w_box;
  const Box xb = domain.x_box.empty() ? detail::cube(d, -1, 1) : domain.x_box;
  const double m =
      QuadraticSaddle::min_without_offset(mu_w, curvature, anchor, wb, xb);
  return m < 0 ? -m : 0.0;
}

// Closed-form maximizer of f(w, x + delta) over the ball (quadratic family).
inline Vector closed_form_inner_argmax(const SmoothLoss& loss,
                                       std::span<const double> w,
                                       std::span<const double> x,
                                       const PerturbationBudget& budget) {
  const auto* q = dynamic_cast<const QuadraticSaddle*>(&loss);
  if (q == nullptr) {
    throw UnsupportedError("closed_form_inner_argmax needs the quadratic "
                           "saddle family, got '" + loss.family() + "'");
  }
  if (w.size() != q->dim_w() || x.size() != q->dim_x()) {
    throw InvalidInputError("closed_form_inner_argmax: dimension mismatch");
  }
  return q->argmax_in_ball(w, x, make_budget(budget.p, budget.radius));
}

// ---------------------------------------------------------------------------

// Draws probe pairs uniformly from the declared boxes (labels +-1) and
// records the largest observed difference quotients. Lipschitz and gradient
// estimates are lower bounds on the true constants; curvature estimates are
// the smallest observed moduli, floored at kCurvatureFloor.
inline ConstantsProfile estimate_profile(const SmoothLoss& loss,
                                         std::size_t probes, RngState rng) {
  if (probes < 2) throw InvalidInputError("estimate_profile: probes must be >= 2");
  Rng gen(rng);
  ConstantsProfile p;
  double mu_w = std::numeric_limits<double>::infinity();
  double mu_x = std::numeric_limits<double>::infinity();
  double M = 0.0;
  auto ratio = [](const Vector& a, const Vector& b, double den) {
    return den > 0 ? norm(sub(a, b), NormOrder::kTwo) / den : 0.0;
  };
  for (std::size_t k = 0; k < probes; ++k) {
    const Vector w1 = gen.uniform_in_box(loss.w_box());
    const Vector w2 = gen.uniform_in_box(loss.w_box());
    const Vector x1 = gen.uniform_in_box(loss.x_box());
    const Vector x2 = gen.uniform_in_box(loss.x_box());
    const double y = gen.uniform01() < 0.5 ? -1.0 : 1.0;

    const Vector gw11 = loss.grad_w(w1, x1, y);
    const Vector gw21 = loss.grad_w(w2, x1, y);
    const Vector gw12 = loss.grad_w(w1, x2, y);
    const Vector gx11 = loss.grad_x(w1, x1, y);
    const Vector gx21 = loss.grad_x(w2, x1, y);
    const Vector gx12 = loss.grad_x(w1, x2, y);
    const Vector dw = sub(w1, w2);
    const Vector dx = sub(x1, x2);
    const double ndw = norm(dw, NormOrder::kTwo);
    const double ndx = norm(dx, NormOrder::kTwo);

    p.L11 = std::max(p.L11, ratio(gw11, gw21, ndw));
    p.L12 = std::max(p.L12, ratio(gw11, gw12, ndx));
    p.L21 = std::max(p.L21, ratio(gx11, gx21, ndw));
    p.L22 = std::max(p.L22, ratio(gx11, gx12, ndx));
    p.G = std::max({p.G, norm(gw11, NormOrder::kTwo),
                    norm(gw21, NormOrder::kTwo), norm(gw12, NormOrder::kTwo)});
    M = std::max({M, loss.value(w1, x1, y), loss.value(w2, x1, y),
                  loss.value(w1, x2, y)});
    if (ndw > 0) mu_w = std::min(mu_w, dot(sub(gw11, gw21), dw) / (ndw * ndw));
    if (ndx > 0) mu_x = std::min(mu_x, -dot(sub(gx11, gx12), dx) / (ndx * ndx));
  }
  if (auto bound = loss.value_upper_bound()) M = std::max(M, *bound);
  p.M = M;
  p.mu_w = std::isfinite(mu_w) ? std::max(mu_w, kCurvatureFloor) : kCurvatureFloor;
  p.mu_x = std::isfinite(mu_x) ? std::max(mu_x, kCurvatureFloor) : kCurvatureFloor;
  p.certified = false;
  return p;
}

// ---------------------------------------------------------------------------

// Linear logistic regression. w = (theta_1..theta_d, bias), labels in {-1, 1}:
// f = softplus(-y (theta.x + b)) + ridge / 2 |theta|^2.
class LogisticLoss final : public SmoothLoss {
 public:
  LogisticLoss(std::size_t d, double ridge, Box w_box, Box x_box)
      : d_(d), ridge_(ridge), w_box_(std::move(w_box)), x_box_(std::move(x_box)) {
    if (d_ == 0) throw InvalidInputError("logistic: dimension must be >= 1");
    if (!(ridge_ >= 0) || !std::isfinite(ridge_)) {
      throw InvalidInputError("logistic: ridge must be >= 0");
    }
    detail::check_box(w_box_, d_ + 1, "logistic w box");
    detail::check_box(x_box_, d_, "logistic x box");
  }

  std::string family() const override { return "logistic"; }
  std::size_t dim_w() const override { return d_ + 1; }
  std::size_t dim_x() const override { return d_; }

  double value(std::span<const double> w, std::span<const double> x,
               double y) const override {
    return detail::softplus(-y * score(w, x)) + 0.5 * ridge_ * theta_sq(w);
  }
  Vector grad_w(std::span<const double> w, std::span<const double> x,
                double y) const override {
    const double s = slope(w, x, y);
    Vector g(d_ + 1);
    for (std::size_t j = 0; j < d_; ++j) g[j] = s * x[j] + ridge_ * w[j];
    g[d_] = s;
    return g;
  }
  Vector grad_x(std::span<const double> w, std::span<const double> x,
                double y) const override {
    const double s = slope(w, x, y);
    Vector g(d_);
    for (std::size_t j = 0; j < d_; ++j) g[j] = s * w[j];
    return g;
  }

  const ConstantsProfile& profile() const override { return profile_; }
  const Box& w_box() const override { return w_box_; }
  const Box& x_box() const override { return x_box_; }

  std::optional<double> value_upper_bound() const override {
    double z = std::max(std::abs(w_box_[d_].lo), std::abs(w_box_[d_].hi));
    double t2 = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      const double wm = std::max(std::abs(w_box_[j].lo), std::abs(w_box_[j].hi));
      const double xm = std::max(std::abs(x_box_[j].lo), std::abs(x_box_[j].hi));
      z += wm * xm;
      t2 += wm * wm;
    }
    return detail::softplus(z) + 0.5 * ridge_ * t2;
  }

  // Closed-form bound on |grad_w f| over the boxes: |s| <= 1.
  double gradient_bound() const {
    double g2 = 1.0;
    for (std::size_t j = 0; j < d_; ++j) {
      const double wm = std::max(std::abs(w_box_[j].lo), std::abs(w_box_[j].hi));
      const double xm = std::max(std::abs(x_box_[j].lo), std::abs(x_box_[j].hi));
      const double gj = xm + ridge_ * wm;
      g2 += gj * gj;
    }
    return std::sqrt(g2);
  }

  // The loss depends on delta only through -y theta.delta, so the extremes
  // sit on the ball boundary along the dual-norm direction of theta.
  std::optional<BallExtremes> ball_extremes(
      std::span<const double> w, std::span<const double> x, double y,
      const PerturbationBudget& budget) const override {
    Vector dir(d_);
    for (std::size_t j = 0; j < d_; ++j) dir[j] = -y * w[j];
    BallExtremes e;
    e.argmax.assign(d_, 0.0);
    if (budget.p == NormOrder::kInf) {
      for (std::size_t j = 0; j < d_; ++j) {
        e.argmax[j] = dir[j] > 0 ? budget.radius
                                 : (dir[j] < 0 ? -budget.radius : 0.0);
      }
    } else {
      const double n = norm(dir, NormOrder::kTwo);
      if (n > 0) {
        for (std::size_t j = 0; j < d_; ++j) {
          e.argmax[j] = budget.radius * dir[j] / n;
        }
      }
    }
    e.argmin = scaled(e.argmax, -1.0);
    e.max_value = value(w, add(x, e.argmax), y);
    e.min_value = value(w, add(x, e.argmin), y);
    return e;
  }

  void set_profile(const ConstantsProfile& p) { profile_ = p; }
  double ridge() const { return ridge_; }

 private:
  double score(std::span<const double> w, std::span<const double> x) const {
    double z = w[d_];
    for (std::size_t j = 0; j < d_; ++j) z += w[j] * x[j];
    return z;
  }
  double theta_sq(std::span<const double> w) const {
    double s = 0.0;
    for (std::size_t j = 0; j < d_; ++j) s += w[j] * w[j];
    return s;
  }
  // d f / d score.
  double slope(std::span<const double> w, std::span<const double> x,
               double y) const {
    return -y * detail::sigmoid(-y * score(w, x));
  }

  std::size_t d_;
  double ridge_;
  Box w_box_;
  Box x_box_;
  ConstantsProfile profile_;
};

inline std::shared_ptr<const LogisticLoss> logistic_loss(
    std::size_t d, double ridge, Box w_box, Box x_box,
    std::size_t probes = 2000, std::uint64_t seed = 0x10915) {
  auto loss = std::make_shared<LogisticLoss>(d, ridge, std::move(w_box),
                                             std::move(x_box));
  loss->set_profile(estimate_profile(*loss, probes, {seed, 0}));
  return loss;
}

// ---------------------------------------------------------------------------

// One hidden tanh layer with `hidden` units and a logistic output.
// Parameter layout: W1 (hidden x d, row-major), b1 (hidden), v (hidden), c.
class TinyNetLoss final : public SmoothLoss {
 public:
  TinyNetLoss(std::size_t d, std::size_t hidden, double ridge, Box w_box,
              Box x_box)
      : d_(d), h_(hidden), ridge_(ridge), w_box_(std::move(w_box)),
        x_box_(std::move(x_box)) {
    if (d_ == 0 || h_ == 0) {
      throw InvalidInputError("tiny_net: dimensions must be >= 1");
    }
    if (!(ridge_ >= 0)) throw InvalidInputError("tiny_net: ridge must be >= 0");
    detail::check_box(w_box_, dim_w(), "tiny_net w box");
    detail::check_box(x_box_, d_, "tiny_net x box");
  }

  std::string family() const override { return "tiny_net"; }
  std::size_t dim_w() const override { return h_ * d_ + 2 * h_ + 1; }
  std::size_t dim_x() const override { return d_; }

  double value(std::span<const double> w, std::span<const double> x,
               double y) const override {
    const Forward f = forward(w, x);
    return detail::softplus(-y * f.z) + 0.5 * ridge_ * dot(w, w);
  }

  Vector grad_w(std::span<const double> w, std::span<const double> x,
                double y) const override {
    const Forward f = forward(w, x);
    const double s = -y * detail::sigmoid(-y * f.z);
    Vector g(dim_w(), 0.0);
    const std::size_t ob1 = h_ * d_, ov = ob1 + h_, oc = ov + h_;
    for (std::size_t k = 0; k < h_; ++k) {
      const double back = s * w[ov + k] * (1.0 - f.a[k] * f.a[k]);
      for (std::size_t j = 0; j < d_; ++j) g[k * d_ + j] = back * x[j];
      g[ob1 + k] = back;
      g[ov + k] = s * f.a[k];
    }
    g[oc] = s;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += ridge_ * w[i];
    return g;
  }

  Vector grad_x(std::span<const double> w, std::span<const double> x,
                double y) const override {
    const Forward f = forward(w, x);
    const double s = -y * detail::sigmoid(-y * f.z);
    const std::size_t ov = h_ * d_ + h_;
    Vector g(d_, 0.0);
    for (std::size_t k = 0; k < h_; ++k) {
      const double back = s * w[ov + k] * (1.0 - f.a[k] * f.a[k]);
      for (std::size_t j = 0; j < d_; ++j) g[j] += back * w[k * d_ + j];
    }
    return g;
  }

  const ConstantsProfile& profile() const override { return profile_; }
  const Box& w_box() const override { return w_box_; }
  const Box& x_box() const override { return x_box_; }

  std::optional<double> value_upper_bound() const override {
    // |z| <= sum_k |v_k| + |c| since |tanh| <= 1.
    const std::size_t ov = h_ * d_ + h_;
    double z = 0.0;
    double w2 = 0.0;
    for (std::size_t i = 0; i < dim_w(); ++i) {
      const double m = std::max(std::abs(w_box_[i].lo), std::abs(w_box_[i].hi));
      if (i >= ov) z += m;
      w2 += m * m;
    }
    return detail::softplus(z) + 0.5 * ridge_ * w2;
  }

  void set_profile(const ConstantsProfile& p) { profile_ = p; }

 private:
  struct Forward {
    Vector a;  // hidden activations
    double z = 0.0;
  };
  Forward forward(std::span<const double> w, std::span<const double> x) const {
    Forward f;
    f.a.resize(h_);
    const std::size_t ob1 = h_ * d_, ov = ob1 + h_, oc = ov + h_;
    f.z = w[oc];
    for (std::size_t k = 0; k < h_; ++k) {
      double pre = w[ob1 + k];
      for (std::size_t j = 0; j < d_; ++j) pre += w[k * d_ + j] * x[j];
      f.a[k] = std::tanh(pre);
      f.z += w[ov + k] * f.a[k];
    }
    return f;
  }

  std::size_t d_;
  std::size_t h_;
  double ridge_;
  Box w_box_;
  Box x_box_;
  ConstantsProfile profile_;
};

inline std::shared_ptr<const TinyNetLoss> tiny_net_loss(
    std::size_t d, std::size_t hidden, double ridge, Box w_box, Box x_box,
    std::size_t probes = 2000, std::uint64_t seed = 0x7e7) {
  auto loss = std::make_shared<TinyNetLoss>(d, hidden, ridge, std::move(w_box),
                                            std::move(x_box));
  loss->set_profile(estimate_profile(*loss, probes, {seed, 0}));
  return loss;
}

}  // namespace robustood

#endif  // ROBUSTOOD_LOSSES_HPP_
