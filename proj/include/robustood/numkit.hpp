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

// Small dense vector arithmetic, lp norms, projections onto norm balls and a
// counter-based random number generator whose state is passed by value.

#ifndef ROBUSTOOD_NUMKIT_HPP_
#define ROBUSTOOD_NUMKIT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustood/error.hpp"

namespace robustood {

using Vector = std::vector<double>;

enum class NormOrder { kOne, kTwo, kInf };

inline std::string to_string(NormOrder p) {
  switch (p) {
    case NormOrder::kOne: return "1";
    case NormOrder::kTwo: return "2";
    case NormOrder::kInf: return "inf";
  }
  return "?";
}

inline NormOrder parse_norm_order(const std::string& s) {
  if (s == "1") return NormOrder::kOne;
  if (s == "2") return NormOrder::kTwo;
  if (s == "inf" || s == "Inf" || s == "INF" || s == "linf") {
    return NormOrder::kInf;
  }
  throw InvalidInputError("unknown norm order '" + s + "'");
}

// The ball B_p(0, radius) with p in {2, inf}.
struct PerturbationBudget {
  NormOrder p = NormOrder::kTwo;
  double radius = 0.0;
};

inline PerturbationBudget make_budget(NormOrder p, double radius) {
  if (p == NormOrder::kOne) {
    throw InvalidInputError("perturbation budgets support p = 2 or p = inf");
  }
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw InvalidInputError("perturbation radius must be finite and >= 0");
  }
  return {p, radius};
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

inline void require_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) {
    throw InvalidInputError(std::string(what) + " has a non-finite entry");
  }
}

inline void require_same_size(std::span<const double> a,
                              std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidInputError(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vector add(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vector sub(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector scaled(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return out;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double norm(std::span<const double> v, NormOrder p) {
  require_finite(v, "norm argument");
  switch (p) {
    case NormOrder::kOne: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    case NormOrder::kTwo: {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s);
    }
    case NormOrder::kInf: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
  }
  return 0.0;
}

inline double distance(std::span<const double> a, std::span<const double> b,
                       NormOrder p) {
  require_same_size(a, b, "distance");
  return norm(sub(a, b), p);
}

// Euclidean projection onto B_p(0, r). For p = inf this is the coordinatewise
// clamp, which is the l2-nearest point of the cube.
inline Vector project_ball(std::span<const double> v,
                           const PerturbationBudget& budget) {
  if (!(budget.radius >= 0.0)) {
    throw InvalidInputError("projection radius must be >= 0");
  }
  const double r = budget.radius;
  Vector out(v.begin(), v.end());
  if (budget.p == NormOrder::kInf) {
    for (double& x : out) x = std::clamp(x, -r, r);
    return out;
  }
  if (budget.p != NormOrder::kTwo) {
    throw InvalidInputError("projection supports p = 2 or p = inf");
  }
  const double n2 = norm(v, NormOrder::kTwo);
  if (n2 <= r) return out;
  // Step the scale down until rounding leaves the result inside the ball, so
  // projecting again is the identity.
  for (double s = r / n2;; s = std::nextafter(s, 0.0)) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] * s;
    if (norm(out, NormOrder::kTwo) <= r) return out;
  }
}

inline bool in_ball(std::span<const double> v, const PerturbationBudget& b,
                    double slack = 1e-12) {
  return norm(v, b.p) <= b.radius + slack;
}

// Per-coordinate closed interval.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double clamp(double x) const { return std::clamp(x, lo, hi); }
};

using Box = std::vector<Interval>;

inline Vector clamp_to_box(std::span<const double> v, const Box& box) {
  Vector out(v.begin(), v.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = box[i].clamp(out[i]);
  return out;
}

inline bool inside_box(std::span<const double> v, const Box& box,
                       double slack = 0.0) {
  if (v.size() != box.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < box[i].lo - slack || v[i] > box[i].hi + slack) return false;
  }
  return true;
}

// Box enlarged by `margin` on every side.
inline Box inflate(const Box& box, double margin) {
  Box out = box;
  for (auto& iv : out) {
    iv.lo -= margin;
    iv.hi += margin;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random numbers.
//
// The generator is SplitMix64 used in counter mode: the draw at stream
// position k is mix64(seed + (k + 1) * 0x9E3779B97F4A7C15). It has no hidden
// state, so (seed, position) fully determines every future draw on every
// platform.

struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t position = 0;

  friend bool operator==(const RngState&, const RngState&) = default;
};

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::pair<std::uint64_t, RngState> next_u64(RngState s) {
  const std::uint64_t out = mix64(s.seed + (s.position + 1) * kGoldenGamma);
  ++s.position;
  return {out, s};
}

// Uniform index in [0, n) by rejection, so every index has probability
// exactly 1/n under the generator contract.
inline std::pair<std::size_t, RngState> next_uniform_index(RngState s,
                                                           std::uint64_t n) {
  if (n == 0) throw InvalidInputError("next_uniform_index: n must be >= 1");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    auto [u, next] = next_u64(s);
    s = next;
    if (u >= threshold) return {static_cast<std::size_t>(u % n), s};
  }
}

// Uniform double in [0, 1) with 53 random bits.
inline std::pair<double, RngState> next_uniform01(RngState s) {
  auto [u, next] = next_u64(s);
  return {static_cast<double>(u >> 11) * 0x1.0p-53, next};
}

// Independent stream for a (seed, tag) pair; used to give every experiment
// cell its own generator.
inline RngState derive_stream(std::uint64_t seed, std::uint64_t tag) {
  return {mix64(seed ^ mix64(tag + kGoldenGamma)), 0};
}

// Mutable convenience wrapper over RngState for code that draws many
// numbers in sequence.
class Rng {
 public:
  explicit Rng(RngState s) : state_(s) {}
  explicit Rng(std::uint64_t seed) : state_{seed, 0} {}

  std::uint64_t u64() {
    auto [u, s] = next_u64(state_);
    state_ = s;
    return u;
  }
  std::size_t index(std::uint64_t n) {
    auto [i, s] = next_uniform_index(state_, n);
    state_ = s;
    return i;
  }
  double uniform01() {
    auto [u, s] = next_uniform01(state_);
    state_ = s;
    return u;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Box-Muller; consumes two draws per call.
  double normal() {
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  Vector uniform_in_box(const Box& box) {
    Vector v(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
      v[i] = uniform(box[i].lo, box[i].hi);
    }
    return v;
  }
  // Uniform point of B_p(0, r) in dimension d.
  Vector uniform_in_ball(std::size_t d, const PerturbationBudget& b) {
    Vector v(d);
    if (b.p == NormOrder::kInf) {
      for (double& x : v) x = uniform(-b.radius, b.radius);
      return v;
    }
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (double& x : v) {
        x = normal();
        n2 += x * x;
      }
    } while (n2 == 0.0);
    const double scale = b.radius *
                         std::pow(uniform01(), 1.0 / static_cast<double>(d)) /
                         std::sqrt(n2);
    for (double& x : v) x *= scale;
    return v;
  }

  const RngState& state() const { return state_; }

 private:
  RngState state_;
};

}  // namespace robustood

#endif  // ROBUSTOOD_NUMKIT_HPP_
