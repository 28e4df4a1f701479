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

// Synthetic datasets, distribution shifts with construction certificates,
// experiment configuration and the experiment suites.
//
// Every grid cell (grid value x seed) draws from its own counter-based
// stream and results are sorted before output, so a run is a pure function
// of its configuration regardless of the thread count.

#ifndef ROBUSTOOD_HARNESS_HPP_
#define ROBUSTOOD_HARNESS_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "robustood/certify.hpp"
#include "robustood/error.hpp"
#include "robustood/io.hpp"
#include "robustood/losses.hpp"
#include "robustood/minimax.hpp"
#include "robustood/numkit.hpp"
#include "robustood/stats.hpp"
#include "robustood/transport.hpp"

namespace robustood {

// Stream tags for derive_stream.
inline constexpr std::uint64_t kTagTrainData = 1;
inline constexpr std::uint64_t kTagTestData = 2;
inline constexpr std::uint64_t kTagTraining = 3;
inline constexpr std::uint64_t kTagShift = 4;
inline constexpr std::uint64_t kTagPool = 5;

// ---------------------------------------------------------------------------
// Datasets.

enum class LabelKind {
  kNone,      // y = 0
  kSign,      // y = sign(theta.x + bias), ties to +1
  kLogistic,  // P(y = 1) = sigmoid((theta.x + bias) / temperature)
};

struct LabelRule {
  LabelKind kind = LabelKind::kNone;
  Vector theta;
  double bias = 0.0;
  double temperature = 1.0;
};

inline void validate(const LabelRule& rule, std::size_t d0) {
  if (rule.kind == LabelKind::kNone) return;
  if (rule.theta.size() != d0) {
    throw InvalidInputError("label rule: theta must have d0 entries");
  }
  require_finite(rule.theta, "label rule theta");
  if (!(rule.temperature > 0) || !std::isfinite(rule.temperature)) {
    throw InvalidInputError("label rule: temperature must be > 0");
  }
}

inline double draw_label(const LabelRule& rule, std::span<const double> x,
                         Rng& rng) {
  if (rule.kind == LabelKind::kNone) return 0.0;
  const double score = dot(rule.theta, x) + rule.bias;
  if (rule.kind == LabelKind::kSign) return score >= 0 ? 1.0 : -1.0;
  return rng.uniform01() < detail::sigmoid(score / rule.temperature) ? 1.0
                                                                     : -1.0;
}

// n i.i.d. uniform points of the box with labels from `rule`. The first m
// samples of a dataset of size n >= m equal the dataset of size m.
inline Dataset make_dataset(std::size_t n, std::size_t d0,
                            const Box& support_box, const LabelRule& rule,
                            std::uint64_t seed,
                            std::uint64_t stream = kTagTrainData) {
  if (n < 1) throw InvalidInputError("make_dataset: n must be >= 1");
  if (d0 < 1) throw InvalidInputError("make_dataset: d0 must be >= 1");
  detail::check_box(support_box, d0, "make_dataset support box");
  for (const auto& iv : support_box) {
    if (!(iv.lo < iv.hi)) {
      throw InvalidInputError("make_dataset: degenerate support box");
    }
  }
  validate(rule, d0);
  Rng rng(derive_stream(seed, stream));
  Dataset data;
  data.d0 = d0;
  data.support_box = support_box;
  data.D = l1_diameter(support_box);
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSample s;
    s.x = rng.uniform_in_box(support_box);
    s.y = draw_label(rule, s.x, rng);
    data.samples.push_back(std::move(s));
  }
  return data;
}

inline Dataset prefix(const Dataset& data, std::size_t n) {
  if (n < 1 || n > data.size()) {
    throw InvalidInputError("prefix: n out of range");
  }
  Dataset out = data;
  out.samples.resize(n);
  return out;
}

// n i.i.d. draws from a discrete distribution.
inline Dataset sample_dataset(const DiscreteDistribution& P, std::size_t n,
                              const Box& support_box, std::uint64_t seed) {
  validate(P);
  if (n < 1) throw InvalidInputError("sample_dataset: n must be >= 1");
  Vector cdf(P.size());
  std::partial_sum(P.weights.begin(), P.weights.end(), cdf.begin());
  Rng rng(derive_stream(seed, kTagTrainData));
  Dataset data;
  data.d0 = P.dim();
  data.support_box = support_box;
  data.D = l1_diameter(support_box);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01() * cdf.back();
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    k = std::min(k, P.size() - 1);
    data.samples.push_back({P.atoms[k], P.label(k)});
  }
  return data;
}

// ---------------------------------------------------------------------------
// Shifts.

enum class ShiftKind {
  kAdditiveLinf,      // every atom moved by a uniform delta, |delta|_inf <= r
  kAdditiveL2Budget,  // atoms moved with sum_i p_i |delta_i|_2^2 = r^2
  kWeightReshuffle,   // same atoms, mass tv moved between them
};

struct ShiftSpec {
  ShiftKind kind = ShiftKind::kAdditiveLinf;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

// Upper bound on the distance between P0 and the shifted distribution that
// holds by construction ("W_inf", "W_2" or "TV").
struct ShiftCertificate {
  std::string metric;
  double value = 0.0;
};

struct ShiftResult {
  DiscreteDistribution Q;
  ShiftCertificate certificate;
};

inline ShiftResult apply_shift(const DiscreteDistribution& P0,
                               const ShiftSpec& spec) {
  validate(P0);
  const double m = spec.magnitude;
  if (!(m >= 0) || !std::isfinite(m)) {
    throw InvalidInputError("apply_shift: magnitude must be finite and >= 0");
  }
  Rng rng(derive_stream(spec.seed, kTagShift));
  ShiftResult out{P0, {}};
  switch (spec.kind) {
    case ShiftKind::kAdditiveLinf: {
      out.certificate = {"W_inf", m};
      if (m == 0.0) return out;
      const PerturbationBudget b{NormOrder::kInf, m};
      for (auto& a : out.Q.atoms) {
        const Vector d = rng.uniform_in_ball(a.size(), b);
        axpy(1.0, d, a);
      }
      return out;
    }
    case ShiftKind::kAdditiveL2Budget: {
      out.certificate = {"W_2", m};
      if (m == 0.0) return out;
      std::vector<Vector> dirs;
      Vector mags;
      double budget = 0.0;
      for (std::size_t i = 0; i < P0.size(); ++i) {
        Vector u = rng.uniform_in_ball(P0.dim(), {NormOrder::kTwo, 1.0});
        const double nu = norm(u, NormOrder::kTwo);
        for (double& v : u) v /= nu;
        const double a = 0.5 + rng.uniform01();
        budget += P0.weights[i] * a * a;
        dirs.push_back(std::move(u));
        mags.push_back(a);
      }
      const double c = m / std::sqrt(budget);
      for (std::size_t i = 0; i < P0.size(); ++i) {
        axpy(c * mags[i], dirs[i], out.Q.atoms[i]);
      }
      return out;
    }
    case ShiftKind::kWeightReshuffle: {
      if (m > 1.0) throw InvalidInputError("apply_shift: tv must be <= 1");
      out.certificate = {"TV", m};
      if (m == 0.0) return out;
      std::vector<std::size_t> order(P0.size());
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.index(i)]);
      }
      // Donors in permutation order give up mass until tv is collected; the
      // atoms after the last donor share it equally.
      double remaining = m;
      std::size_t k = 0;
      for (; k < order.size() && remaining > 0; ++k) {
        const double take = std::min(out.Q.weights[order[k]], remaining);
        out.Q.weights[order[k]] -= take;
        remaining -= take;
      }
      if (remaining > 1e-15 || k >= order.size()) {
        throw InvalidInputError(
            "apply_shift: requested tv is not achievable by reshuffling");
      }
      const double share = m / static_cast<double>(order.size() - k);
      for (std::size_t j = k; j < order.size(); ++j) {
        out.Q.weights[order[j]] += share;
      }
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration.

struct LossSpec {
  std::string family = "quadratic";  // quadratic | logistic | tiny_net
  double mu_w = 1.0;
  double mu_x = 1.0;
  Vector curvature;              // quadratic; overrides mu_x when non-empty
  Vector anchor;                 // quadratic; default 0
  std::optional<double> offset;  // quadratic; default: smallest offset >= 0
                                 // making f >= 0 on the boxes
  double ridge = 0.0;
  std::size_t hidden = 4;
  double w_bound = 3.0;  // half-width of the default w box
  Box w_box;             // default [-w_bound, w_bound]^dim_w
  Box x_box;             // default: support inflated by the largest radius
  std::size_t probes = 2000;
};

struct DataSpec {
  std::size_t n = 100;
  std::size_t d0 = 2;
  Box support_box;  // default [0, 1]^d0
  LabelRule label;
  std::size_t pool = 0;  // population atoms (validity experiment)
};

struct TrainSpec {
  std::size_t T = 100;
  std::size_t K = 0;  // 0: required_inner_steps
  NormOrder p = NormOrder::kTwo;
  double r = 0.1;
  std::optional<double> eta_x;        // absolute inner step
  std::optional<double> eta_x_per_r;  // inner step as a multiple of r
  OuterSchedule schedule = OuterSchedule::kPlDecay;
  double eta = 0.1;
  bool sign_variant = false;
  DeltaInit delta_init = DeltaInit::kZero;
  std::size_t full_objective_every = 0;
};

struct GridSpec {
  std::string key;
  Vector values;
};

struct TestSpec {
  std::size_t n = 2000;
  double shift = 0.1;  // l_inf radius of the OOD worst-case ball
};

struct ExperimentConfig {
  std::string experiment = "train";
  std::uint64_t seed = 0;
  std::size_t seeds = 10;
  std::size_t threads = 1;
  double theta = 0.1;
  LossSpec loss;
  DataSpec data;
  TrainSpec train;
  GridSpec grid;
  TestSpec test;

  std::vector<std::uint64_t> seed_values() const {
    std::vector<std::uint64_t> out(seeds);
    for (std::size_t i = 0; i < seeds; ++i) out[i] = seed + i;
    return out;
  }
  Box support() const {
    return data.support_box.empty() ? detail::cube(data.d0, 0.0, 1.0)
                                    : data.support_box;
  }
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "train", "converge", "ablate_r", "ablate_n", "transfer", "validity"};
  return names;
}

inline void validate(const ExperimentConfig& c) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
    throw InvalidInputError("config: unknown experiment '" + c.experiment +
                            "'");
  }
  if (c.seeds < 1) throw InvalidInputError("config: seeds must be >= 1");
  if (c.threads < 1) throw InvalidInputError("config: threads must be >= 1");
  if (c.data.d0 < 1) throw InvalidInputError("config: d0 must be >= 1");
  if (c.data.n < 1) throw InvalidInputError("config: n must be >= 1");
  if (c.train.T < 1) throw InvalidInputError("config: T must be >= 1");
  if (!(c.train.r >= 0)) throw InvalidInputError("config: r must be >= 0");
  if (c.experiment != "train" && c.grid.values.empty()) {
    throw InvalidInputError("config: grid must be non-empty");
  }
  for (double v : c.grid.values) {
    if (!std::isfinite(v) || v < 0) {
      throw InvalidInputError("config: grid values must be finite and >= 0");
    }
  }
  validate(c.data.label, c.data.d0);
}

namespace config_detail {

using json_detail::check_keys;
using json_detail::number;

inline std::size_t count(const Json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw InvalidInputError(std::string(what) + ": expected an integer >= 0");
  }
  return j.get<std::size_t>();
}

inline std::string text(const Json& j, const char* what) {
  if (!j.is_string()) {
    throw InvalidInputError(std::string(what) + ": expected a string");
  }
  return j.get<std::string>();
}

inline bool flag(const Json& j, const char* what) {
  if (!j.is_boolean()) {
    throw InvalidInputError(std::string(what) + ": expected true/false");
  }
  return j.get<bool>();
}

inline NormOrder norm_order(const Json& j) {
  if (j.is_number_integer()) return parse_norm_order(std::to_string(j.get<long long>()));
  return parse_norm_order(text(j, "p"));
}

inline LabelRule label_rule(const Json& j) {
  check_keys(j, {"kind", "theta", "bias", "temperature"}, "label");
  LabelRule r;
  const std::string kind = text(json_detail::field(j, "kind", "label"), "kind");
  if (kind == "none") {
    r.kind = LabelKind::kNone;
  } else if (kind == "sign") {
    r.kind = LabelKind::kSign;
  } else if (kind == "logistic") {
    r.kind = LabelKind::kLogistic;
  } else {
    throw InvalidInputError("label: unknown kind '" + kind + "'");
  }
  if (j.contains("theta")) r.theta = json_detail::vector(j["theta"], "theta");
  if (j.contains("bias")) r.bias = number(j["bias"], "bias");
  if (j.contains("temperature")) {
    r.temperature = number(j["temperature"], "temperature");
  }
  return r;
}

inline Json label_rule_json(const LabelRule& r) {
  const char* kind = r.kind == LabelKind::kNone
                         ? "none"
                         : (r.kind == LabelKind::kSign ? "sign" : "logistic");
  Json j = {{"kind", kind}};
  if (r.kind != LabelKind::kNone) {
    j["theta"] = json_detail::vector_json(r.theta);
    j["bias"] = r.bias;
    j["temperature"] = r.temperature;
  }
  return j;
}

}  // namespace config_detail

// Strict parser: unknown keys anywhere are an error.
inline ExperimentConfig config_from_json(const Json& j) {
  using namespace config_detail;
  check_keys(j, {"experiment", "seed", "seeds", "threads", "theta", "loss",
                 "data", "train", "grid", "test"},
             "config");
  ExperimentConfig c;
  if (j.contains("experiment")) c.experiment = text(j["experiment"], "experiment");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      throw InvalidInputError("config: seed must be an unsigned integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("seeds")) c.seeds = count(j["seeds"], "seeds");
  if (j.contains("threads")) c.threads = count(j["threads"], "threads");
  if (j.contains("theta")) c.theta = number(j["theta"], "theta");
  if (j.contains("loss")) {
    const Json& l = j["loss"];
    check_keys(l, {"family", "mu_w", "mu_x", "curvature", "anchor", "offset",
                   "ridge", "hidden", "w_bound", "w_box", "x_box", "probes"},
               "loss");
    LossSpec& s = c.loss;
    if (l.contains("family")) s.family = text(l["family"], "family");
    if (l.contains("mu_w")) s.mu_w = number(l["mu_w"], "mu_w");
    if (l.contains("mu_x")) s.mu_x = number(l["mu_x"], "mu_x");
    if (l.contains("curvature")) {
      s.curvature = json_detail::vector(l["curvature"], "curvature");
    }
    if (l.contains("anchor")) s.anchor = json_detail::vector(l["anchor"], "anchor");
    if (l.contains("offset")) {
      if (l["offset"].is_string() && l["offset"].get<std::string>() == "auto") {
        s.offset.reset();
      } else {
        s.offset = number(l["offset"], "offset");
      }
    }
    if (l.contains("ridge")) s.ridge = number(l["ridge"], "ridge");
    if (l.contains("hidden")) s.hidden = count(l["hidden"], "hidden");
    if (l.contains("w_bound")) s.w_bound = number(l["w_bound"], "w_bound");
    if (l.contains("w_box")) s.w_box = json_detail::box(l["w_box"], "w_box");
    if (l.contains("x_box")) s.x_box = json_detail::box(l["x_box"], "x_box");
    if (l.contains("probes")) s.probes = count(l["probes"], "probes");
  }
  if (j.contains("data")) {
    const Json& d = j["data"];
    check_keys(d, {"n", "d0", "support_box", "label", "pool"}, "data");
    if (d.contains("n")) c.data.n = count(d["n"], "n");
    if (d.contains("d0")) c.data.d0 = count(d["d0"], "d0");
    if (d.contains("support_box")) {
      c.data.support_box = json_detail::box(d["support_box"], "support_box");
    }
    if (d.contains("label")) c.data.label = label_rule(d["label"]);
    if (d.contains("pool")) c.data.pool = count(d["pool"], "pool");
  }
  if (j.contains("train")) {
    const Json& t = j["train"];
    check_keys(t, {"T", "K", "p", "r", "eta_x", "eta_x_per_r", "schedule",
                   "eta", "sign_variant", "delta_init", "full_objective_every"},
               "train");
    TrainSpec& s = c.train;
    if (t.contains("T")) s.T = count(t["T"], "T");
    if (t.contains("K")) {
      if (t["K"].is_string() && t["K"].get<std::string>() == "auto") {
        s.K = 0;
      } else {
        s.K = count(t["K"], "K");
      }
    }
    if (t.contains("p")) s.p = norm_order(t["p"]);
    if (t.contains("r")) s.r = number(t["r"], "r");
    if (t.contains("eta_x")) s.eta_x = number(t["eta_x"], "eta_x");
    if (t.contains("eta_x_per_r")) {
      s.eta_x_per_r = number(t["eta_x_per_r"], "eta_x_per_r");
    }
    if (t.contains("schedule")) {
      const std::string v = text(t["schedule"], "schedule");
      if (v == "pl_decay") {
        s.schedule = OuterSchedule::kPlDecay;
      } else if (v == "constant") {
        s.schedule = OuterSchedule::kConstant;
      } else {
        throw InvalidInputError("train: unknown schedule '" + v + "'");
      }
    }
    if (t.contains("eta")) s.eta = number(t["eta"], "eta");
    if (t.contains("sign_variant")) {
      s.sign_variant = flag(t["sign_variant"], "sign_variant");
    }
    if (t.contains("delta_init")) {
      const std::string v = text(t["delta_init"], "delta_init");
      if (v == "zero") {
        s.delta_init = DeltaInit::kZero;
      } else if (v == "uniform_in_ball") {
        s.delta_init = DeltaInit::kUniformInBall;
      } else {
        throw InvalidInputError("train: unknown delta_init '" + v + "'");
      }
    }
    if (t.contains("full_objective_every")) {
      s.full_objective_every =
          count(t["full_objective_every"], "full_objective_every");
    }
  }
  if (j.contains("grid")) {
    const Json& g = j["grid"];
    check_keys(g, {"key", "values"}, "grid");
    if (g.contains("key")) c.grid.key = text(g["key"], "grid key");
    if (g.contains("values")) {
      c.grid.values = json_detail::vector(g["values"], "grid values");
    }
  }
  if (j.contains("test")) {
    const Json& t = j["test"];
    check_keys(t, {"n", "shift"}, "test");
    if (t.contains("n")) c.test.n = count(t["n"], "test n");
    if (t.contains("shift")) c.test.shift = number(t["shift"], "shift");
  }
  validate(c);
  return c;
}

inline Json config_to_json(const ExperimentConfig& c) {
  using json_detail::box_json;
  using json_detail::vector_json;
  Json loss = {{"family", c.loss.family},   {"mu_w", c.loss.mu_w},
               {"mu_x", c.loss.mu_x},       {"ridge", c.loss.ridge},
               {"hidden", c.loss.hidden},   {"w_bound", c.loss.w_bound},
               {"probes", c.loss.probes}};
  if (!c.loss.curvature.empty()) loss["curvature"] = vector_json(c.loss.curvature);
  if (!c.loss.anchor.empty()) loss["anchor"] = vector_json(c.loss.anchor);
  loss["offset"] = c.loss.offset ? Json(*c.loss.offset) : Json("auto");
  if (!c.loss.w_box.empty()) loss["w_box"] = box_json(c.loss.w_box);
  if (!c.loss.x_box.empty()) loss["x_box"] = box_json(c.loss.x_box);
  Json data = {{"n", c.data.n},
               {"d0", c.data.d0},
               {"support_box", box_json(c.support())},
               {"label", config_detail::label_rule_json(c.data.label)},
               {"pool", c.data.pool}};
  Json train = {
      {"T", c.train.T},
      {"K", c.train.K == 0 ? Json("auto") : Json(c.train.K)},
      {"p", to_string(c.train.p)},
      {"r", c.train.r},
      {"schedule",
       c.train.schedule == OuterSchedule::kPlDecay ? "pl_decay" : "constant"},
      {"eta", c.train.eta},
      {"sign_variant", c.train.sign_variant},
      {"delta_init", c.train.delta_init == DeltaInit::kZero ? "zero"
                                                            : "uniform_in_ball"},
      {"full_objective_every", c.train.full_objective_every}};
  if (c.train.eta_x) train["eta_x"] = *c.train.eta_x;
  if (c.train.eta_x_per_r) train["eta_x_per_r"] = *c.train.eta_x_per_r;
  return {{"experiment", c.experiment},
          {"seed", c.seed},
          {"seeds", c.seeds},
          {"threads", c.threads},
          {"theta", c.theta},
          {"loss", loss},
          {"data", data},
          {"train", train},
          {"grid", {{"key", c.grid.key}, {"values", vector_json(c.grid.values)}}},
          {"test", {{"n", c.test.n}, {"shift", c.test.shift}}}};
}

// Builds the loss of `spec` on inputs of dimension d0. Perturbed inputs
// stay inside the support inflated by `input_margin`.
inline LossPtr build_loss(const LossSpec& spec, std::size_t d0,
                          const Box& support, double input_margin) {
  const Box x_box =
      spec.x_box.empty() ? inflate(support, input_margin) : spec.x_box;
  if (spec.family == "quadratic") {
    const Vector h =
        spec.curvature.empty() ? Vector(d0, spec.mu_x) : spec.curvature;
    const Vector a = spec.anchor.empty() ? Vector(d0, 0.0) : spec.anchor;
    QuadraticDomain dom{
        spec.w_box.empty() ? detail::cube(d0, -spec.w_bound, spec.w_bound)
                           : spec.w_box,
        x_box};
    const double offset =
        spec.offset ? *spec.offset : nonnegative_offset(spec.mu_w, h, a, dom);
    return quadratic_saddle_diag(spec.mu_w, h, a, offset, std::move(dom));
  }
  if (spec.family == "logistic") {
    Box wb = spec.w_box.empty() ? detail::cube(d0 + 1, -spec.w_bound, spec.w_bound)
                                : spec.w_box;
    return logistic_loss(d0, spec.ridge, std::move(wb), x_box, spec.probes);
  }
  if (spec.family == "tiny_net") {
    const std::size_t dim = spec.hidden * d0 + 2 * spec.hidden + 1;
    Box wb = spec.w_box.empty() ? detail::cube(dim, -spec.w_bound, spec.w_bound)
                                : spec.w_box;
    return tiny_net_loss(d0, spec.hidden, spec.ridge, std::move(wb), x_box,
                         spec.probes);
  }
  throw InvalidInputError("unknown loss family '" + spec.family + "'");
}

inline TrainConfig make_train_config(const TrainSpec& spec, double r,
                                     std::uint64_t seed) {
  TrainConfig tc;
  tc.T = spec.T;
  tc.K = spec.K;
  tc.budget = make_budget(spec.p, r);
  if (spec.eta_x_per_r) {
    tc.eta_x = r > 0 ? *spec.eta_x_per_r * r : 1.0;
  } else if (spec.eta_x) {
    tc.eta_x = *spec.eta_x;
  }
  tc.schedule = spec.schedule;
  tc.eta = spec.eta;
  tc.sign_variant = spec.sign_variant;
  tc.seed = seed;
  tc.delta_init = spec.delta_init;
  tc.full_objective_every = spec.full_objective_every;
  return tc;
}

// ---------------------------------------------------------------------------
// Results.

struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string grid_key;
  double grid_value = 0.0;
  double clean_risk = 0.0;
  double ood_risk = 0.0;
  double robust_objective = 0.0;
  double bound = 0.0;  // +inf is written as "vacuous"
  double runtime_s = 0.0;
};

inline void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.experiment != b.experiment) {
                       return a.experiment < b.experiment;
                     }
                     if (a.grid_key != b.grid_key) return a.grid_key < b.grid_key;
                     if (a.grid_value != b.grid_value) {
                       return a.grid_value < b.grid_value;
                     }
                     return a.seed < b.seed;
                   });
}

inline constexpr const char* kResultsHeader =
    "experiment,seed,grid_key,grid_value,clean_risk,ood_risk,"
    "robust_objective,bound,runtime_s";

// runtime_s is left empty unless `timings` is set, so that the default
// output is a pure function of the configuration.
inline std::string results_csv(const std::vector<ResultRow>& rows,
                               bool timings = false) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.experiment + ',' + std::to_string(r.seed) + ',' + r.grid_key +
           ',' + format_double(r.grid_value) + ',' +
           format_metric(r.clean_risk) + ',' + format_metric(r.ood_risk) +
           ',' + format_metric(r.robust_objective) + ',' +
           format_metric(r.bound) + ',';
    if (timings) out += format_double(r.runtime_s);
    out += '\n';
  }
  return out;
}

struct ExperimentReport {
  std::string experiment;
  std::vector<ResultRow> rows;
  std::vector<std::pair<std::string, double>> summary;
  bool passed = true;  // the experiment's own acceptance check

  double get(const std::string& key) const {
    for (const auto& [k, v] : summary) {
      if (k == key) return v;
    }
    throw InvalidInputError("report has no summary entry '" + key + "'");
  }
};

inline Json report_summary_json(const ExperimentReport& rep) {
  Json s = Json::object();
  for (const auto& [k, v] : rep.summary) s[k] = json_detail::number_json(v);
  return {{"experiment", rep.experiment}, {"passed", rep.passed},
          {"rows", rep.rows.size()}, {"summary", s}};
}

// Runs fn(0..count-1) on up to `threads` workers; results are stored by
// index so the output order never depends on scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t count, std::size_t threads,
                            const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t i = worker; i < count; i += stride) {
      try {
        slots[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t nt = std::max<std::size_t>(1, std::min(threads, count));
  if (nt == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(work, t, nt);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace harness_detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

inline double max_value(const Vector& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

inline std::size_t grid_count(double v, const char* what) {
  if (v < 1 || v != std::floor(v)) {
    throw InvalidInputError(std::string(what) +
                            " grid values must be positive integers");
  }
  return static_cast<std::size_t>(v);
}

// Per-grid-value means of `metric` over seeds (rows sorted by grid value).
inline std::vector<Vector> column_by_grid(
    const std::vector<ResultRow>& rows, const Vector& grid,
    const std::function<double(const ResultRow&)>& metric) {
  std::vector<Vector> out(grid.size());
  for (const auto& r : rows) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (r.grid_value == grid[g]) out[g].push_back(metric(r));
    }
  }
  return out;
}

inline Vector sorted_unique(Vector v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace harness_detail

// ---------------------------------------------------------------------------
// Experiments.

// One training run on a generated dataset (seed = config.seed).
inline TrainTrace run_train(const ExperimentConfig& cfg,
                            const Dataset* data_override = nullptr) {
  validate(cfg);
  const Dataset data =
      data_override ? *data_override
                    : make_dataset(cfg.data.n, cfg.data.d0, cfg.support(),
                                   cfg.data.label, cfg.seed);
  validate(data);
  const LossPtr loss =
      build_loss(cfg.loss, data.d0, data.support_box, cfg.train.r);
  return train(*loss, data,
               make_train_config(cfg.train, cfg.train.r, cfg.seed));
}

// Excess robust risk of the T-th iterate against the exact minimizer, for
// every T in the grid. Columns: clean_risk = R_Pn(w), robust_objective =
// robust objective at w, ood_risk = excess robust objective, bound =
// G^2 L / (T mu_w^2).
inline ExperimentReport run_convergence_experiment(const ExperimentConfig& cfg) {
  using namespace harness_detail;
  validate(cfg);
  if (cfg.loss.family != "quadratic") {
    throw InvalidInputError("converge: needs the quadratic saddle family");
  }
  const Dataset data = make_dataset(cfg.data.n, cfg.data.d0, cfg.support(),
                                    cfg.data.label, cfg.seed);
  const LossPtr loss = build_loss(cfg.loss, data.d0, data.support_box,
                                  cfg.train.r);
  const ConstantsProfile& prof = loss->profile();
  const PerturbationBudget budget = make_budget(cfg.train.p, cfg.train.r);
  const RobustMinimum best = minimize_robust_objective(*loss, data, budget);
  const Vector grid = sorted_unique(cfg.grid.values);
  const auto seeds = cfg.seed_values();
  const std::size_t cells = grid.size() * seeds.size();

  auto rows = parallel_map<ResultRow>(cells, cfg.threads, [&](std::size_t c) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t T = grid_count(grid[c / seeds.size()], "T");
    const std::uint64_t seed = seeds[c % seeds.size()];
    TrainSpec spec = cfg.train;
    spec.T = T;
    const TrainTrace tr = train(
        *loss, data,
        make_train_config(spec, cfg.train.r, derive_stream(seed, T).seed));
    ResultRow row;
    row.experiment = "converge";
    row.seed = seed;
    row.grid_key = "T";
    row.grid_value = static_cast<double>(T);
    row.clean_risk = empirical_risk(*loss, data, tr.w_final);
    row.robust_objective = robust_objective(*loss, data, tr.w_final, budget,
                                            InnerQuality::analytic());
    row.ood_risk = row.robust_objective - best.value;
    row.bound = prof.G * prof.G * prof.robust_smoothness() /
                (static_cast<double>(T) * prof.mu_w * prof.mu_w);
    row.runtime_s = seconds_since(t0);
    return row;
  });
  sort_rows(rows);

  ExperimentReport rep;
  rep.experiment = "converge";
  const auto excess =
      column_by_grid(rows, grid, [](const ResultRow& r) { return r.ood_risk; });
  Vector means;
  bool envelope = true;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double m = stats::mean(excess[g]);
    means.push_back(m);
    const double env = prof.G * prof.G * prof.robust_smoothness() /
                       (grid[g] * prof.mu_w * prof.mu_w);
    envelope = envelope && m <= env;
    rep.summary.emplace_back("mean_excess_T" + format_double(grid[g]), m);
  }
  rep.summary.emplace_back("robust_minimum", best.value);
  rep.summary.emplace_back("envelope_holds", envelope ? 1.0 : 0.0);
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (grid.size() >= 2 &&
      std::all_of(means.begin(), means.end(), [](double m) { return m > 0; })) {
    slope = stats::log_log_slope(grid, means);
  }
  rep.summary.emplace_back("slope", slope);
  rep.passed = envelope && slope >= -1.25 && slope <= -0.85;
  rep.rows = std::move(rows);
  return rep;
}

namespace harness_detail {

// Shared by the two ablations: trains on `train_data` at radius r and
// evaluates the clean training risk, robust objective, OOD worst-case risk
// on the test set at the configured shift and the l_inf bound at that shift.
inline ResultRow ablation_cell(const ExperimentConfig& cfg,
                               const SmoothLoss& loss, const Dataset& train_data,
                               const DiscreteDistribution& test, double r,
                               std::uint64_t seed, std::uint64_t train_seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainTrace tr =
      train(loss, train_data, make_train_config(cfg.train, r, train_seed));
  const Vector& w = tr.w_final;
  const PerturbationBudget budget = make_budget(cfg.train.p, r);
  ResultRow row;
  row.seed = seed;
  row.clean_risk = empirical_risk(loss, train_data, w);
  row.robust_objective =
      robust_objective(loss, train_data, w, budget, InnerQuality::analytic());
  const double s = cfg.test.shift;
  row.ood_risk = worst_case_risk_winf(loss, w, test, s, InnerQuality::analytic());
  const RobustnessReport rob = measure_robustness(
      loss, w, empirical_distribution(train_data),
      make_budget(NormOrder::kInf, 2.0 * s), InnerQuality::analytic());
  BoundInputs in;
  in.d0 = train_data.d0;
  in.D = train_data.D;
  in.M = loss.profile().M;
  in.n = train_data.size();
  in.r = s;
  in.epsilon = rob.epsilon_hat;
  in.theta = cfg.theta;
  row.bound = ood_bound_winf(in).bound;
  row.runtime_s = seconds_since(t0);
  return row;
}

}  // namespace harness_detail

// OOD worst-case risk as a function of the training radius r (grid), with
// r = 0 meaning standard training. Passes when the smoothed risk curve is a
// valley and the best interior radius beats both endpoints by two pooled
// standard errors.
inline ExperimentReport run_perturbation_ablation(const ExperimentConfig& cfg) {
  using namespace harness_detail;
  validate(cfg);
  const Vector grid = sorted_unique(cfg.grid.values);
  const Box support = cfg.support();
  const LossPtr loss =
      build_loss(cfg.loss, cfg.data.d0, support,
                 std::max(max_value(grid), cfg.test.shift));
  const auto seeds = cfg.seed_values();
  struct SeedData {
    Dataset train;
    DiscreteDistribution test;
  };
  const auto per_seed = parallel_map<SeedData>(
      seeds.size(), cfg.threads, [&](std::size_t i) {
        Dataset tr = make_dataset(cfg.data.n, cfg.data.d0, support,
                                  cfg.data.label, seeds[i]);
        Dataset te = make_dataset(cfg.test.n, cfg.data.d0, support,
                                  cfg.data.label, seeds[i], kTagTestData);
        return SeedData{std::move(tr), empirical_distribution(te)};
      });
  const std::size_t cells = grid.size() * seeds.size();
  auto rows = parallel_map<ResultRow>(cells, cfg.threads, [&](std::size_t c) {
    const std::size_t g = c / seeds.size(), i = c % seeds.size();
    ResultRow row = ablation_cell(cfg, *loss, per_seed[i].train,
                                  per_seed[i].test, grid[g], seeds[i],
                                  derive_stream(seeds[i], kTagTraining).seed);
    row.experiment = "ablate_r";
    row.grid_key = "r";
    row.grid_value = grid[g];
    return row;
  });
  sort_rows(rows);

  ExperimentReport rep;
  rep.experiment = "ablate_r";
  const auto ood =
      column_by_grid(rows, grid, [](const ResultRow& r) { return r.ood_risk; });
  Vector means, ses;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    means.push_back(stats::mean(ood[g]));
    ses.push_back(stats::standard_error(ood[g]));
    rep.summary.emplace_back("mean_ood_r" + format_double(grid[g]), means[g]);
    rep.summary.emplace_back("se_ood_r" + format_double(grid[g]), ses[g]);
  }
  const bool valley = stats::is_valley_shaped(means);
  rep.summary.emplace_back("valley_shaped", valley ? 1.0 : 0.0);
  bool interior_ok = false;
  if (grid.size() >= 3) {
    std::size_t best = 1;
    for (std::size_t g = 1; g + 1 < grid.size(); ++g) {
      if (means[g] < means[best]) best = g;
    }
    const std::size_t last = grid.size() - 1;
    const double se_lo = std::hypot(ses[best], ses[0]);
    const double se_hi = std::hypot(ses[best], ses[last]);
    const double margin_lo = (means[0] - means[best]) / se_lo;
    const double margin_hi = (means[last] - means[best]) / se_hi;
    rep.summary.emplace_back("best_r", grid[best]);
    rep.summary.emplace_back("margin_low_se", margin_lo);
    rep.summary.emplace_back("margin_high_se", margin_hi);
    interior_ok = margin_lo >= 2.0 && margin_hi >= 2.0;
  }
  rep.passed = valley && interior_ok;
  rep.rows = std::move(rows);
  return rep;
}

// OOD generalization gap (OOD worst-case risk minus empirical risk) as a
// function of the training sample size (grid). Datasets are nested per
// seed. Passes when the Spearman correlation of the per-n mean gap with n
// is at most -0.5.
inline ExperimentReport run_sample_ablation(const ExperimentConfig& cfg) {
  using namespace harness_detail;
  validate(cfg);
  const Vector grid = sorted_unique(cfg.grid.values);
  const std::size_t n_max = grid_count(max_value(grid), "n");
  const Box support = cfg.support();
  const LossPtr loss = build_loss(cfg.loss, cfg.data.d0, support,
                                  std::max(cfg.train.r, cfg.test.shift));
  const auto seeds = cfg.seed_values();
  struct SeedData {
    Dataset train;
    DiscreteDistribution test;
  };
  const auto per_seed = parallel_map<SeedData>(
      seeds.size(), cfg.threads, [&](std::size_t i) {
        Dataset tr = make_dataset(n_max, cfg.data.d0, support, cfg.data.label,
                                  seeds[i]);
        Dataset te = make_dataset(cfg.test.n, cfg.data.d0, support,
                                  cfg.data.label, seeds[i], kTagTestData);
        return SeedData{std::move(tr), empirical_distribution(te)};
      });
  const std::size_t cells = grid.size() * seeds.size();
  auto rows = parallel_map<ResultRow>(cells, cfg.threads, [&](std::size_t c) {
    const std::size_t g = c / seeds.size(), i = c % seeds.size();
    const std::size_t n = grid_count(grid[g], "n");
    ResultRow row = ablation_cell(cfg, *loss, prefix(per_seed[i].train, n),
                                  per_seed[i].test, cfg.train.r, seeds[i],
                                  derive_stream(seeds[i], kTagTraining).seed);
    row.experiment = "ablate_n";
    row.grid_key = "n";
    row.grid_value = grid[g];
    return row;
  });
  sort_rows(rows);

  ExperimentReport rep;
  rep.experiment = "ablate_n";
  const auto gaps = column_by_grid(
      rows, grid, [](const ResultRow& r) { return r.ood_risk - r.clean_risk; });
  Vector means, all_n, all_gap;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    means.push_back(stats::mean(gaps[g]));
    rep.summary.emplace_back("mean_gap_n" + format_double(grid[g]), means[g]);
    for (double v : gaps[g]) {
      all_n.push_back(grid[g]);
      all_gap.push_back(v);
    }
  }
  const double rho = grid.size() >= 2 ? stats::spearman(means, grid) : 0.0;
  const double rho_pooled =
      all_n.size() >= 2 ? stats::spearman(all_gap, all_n) : 0.0;
  rep.summary.emplace_back("spearman", rho);
  rep.summary.emplace_back("spearman_pooled", rho_pooled);
  rep.passed = rho <= -0.5;
  rep.rows = std::move(rows);
  return rep;
}

// Pretrains on Q0 (uniform over data.n random atoms per seed), then measures
// the worst-case risk over the W_inf ball around P0 = reshuffle(Q0, tv) for
// every tv in the grid. Columns: clean_risk = R_P0(w), ood_risk = measured
// downstream worst-case risk, robust_objective = eps_pre (exact worst-case
// risk on Q0), bound = eps_pre + 2 M tv.
inline ExperimentReport run_pretrain_transfer(const ExperimentConfig& cfg) {
  using namespace harness_detail;
  validate(cfg);
  if (cfg.train.p != NormOrder::kInf) {
    throw InvalidInputError("transfer: the W_inf transfer bound needs p = inf");
  }
  const Vector grid = sorted_unique(cfg.grid.values);
  const Box support = cfg.support();
  const LossPtr loss =
      build_loss(cfg.loss, cfg.data.d0, support, cfg.train.r);
  const double M = loss->profile().M;
  const auto seeds = cfg.seed_values();
  struct Pretrained {
    DiscreteDistribution Q0;
    Vector w;
    double eps_pre = 0.0;
  };
  const auto pre = parallel_map<Pretrained>(
      seeds.size(), cfg.threads, [&](std::size_t i) {
        const Dataset atoms = make_dataset(cfg.data.n, cfg.data.d0, support,
                                           cfg.data.label, seeds[i]);
        const DiscreteDistribution Q0 = empirical_distribution(atoms);
        const TrainTrace tr = train(
            *loss, atoms,
            make_train_config(cfg.train, cfg.train.r,
                              derive_stream(seeds[i], kTagTraining).seed));
        const double eps = worst_case_risk_winf(*loss, tr.w_final, Q0,
                                                cfg.train.r,
                                                InnerQuality::analytic());
        return Pretrained{Q0, tr.w_final, eps};
      });
  const std::size_t cells = grid.size() * seeds.size();
  auto rows = parallel_map<ResultRow>(cells, cfg.threads, [&](std::size_t c) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t g = c / seeds.size(), i = c % seeds.size();
    const ShiftResult sh =
        apply_shift(pre[i].Q0, {ShiftKind::kWeightReshuffle, grid[g], seeds[i]});
    BoundInputs in;
    in.M = M;
    in.n = cfg.data.n;
    in.theta = cfg.theta;
    in.epsilon_pre = pre[i].eps_pre;
    in.tv = sh.certificate.value;
    ResultRow row;
    row.experiment = "transfer";
    row.seed = seeds[i];
    row.grid_key = "tv";
    row.grid_value = grid[g];
    row.clean_risk = risk(*loss, pre[i].w, sh.Q);
    row.ood_risk = worst_case_risk_winf(*loss, pre[i].w, sh.Q, cfg.train.r,
                                        InnerQuality::analytic());
    row.robust_objective = pre[i].eps_pre;
    row.bound = pretrain_transfer_bound(in, NormOrder::kInf).population.bound;
    row.runtime_s = seconds_since(t0);
    return row;
  });
  sort_rows(rows);

  ExperimentReport rep;
  rep.experiment = "transfer";
  std::size_t violations = 0;
  double worst_slack = kInfinity;
  for (const auto& r : rows) {
    if (r.ood_risk > r.bound + 1e-9) ++violations;
    worst_slack = std::min(worst_slack, r.bound - r.ood_risk);
  }
  rep.summary.emplace_back("violations", static_cast<double>(violations));
  rep.summary.emplace_back("min_slack", worst_slack);
  rep.passed = violations == 0;
  rep.rows = std::move(rows);
  return rep;
}

// Validity of the W_inf generalization bound. The population P0 is uniform
// over data.pool atoms drawn once from the support; every seed draws
// n = data.n training samples from it, trains at l_inf radius 2r, measures
// the robustness eps at 2r and compares the exact worst-case risk over
// B_Winf(P0, r) (and the risk under a certified additive shift of size r)
// with the empirical risk. Grid: theta values. Passes when the violation
// rate is within theta + 3 sqrt(theta (1 - theta) / seeds) for every theta.
inline ExperimentReport run_bound_validity(const ExperimentConfig& cfg) {
  using namespace harness_detail;
  validate(cfg);
  if (cfg.data.pool < 1) {
    throw InvalidInputError("validity: data.pool must be >= 1");
  }
  const Vector grid = sorted_unique(cfg.grid.values);
  for (double th : grid) {
    if (!(th > 0 && th < 1)) {
      throw InvalidInputError("validity: theta grid values must lie in (0, 1)");
    }
  }
  const double r = cfg.train.r;
  if (!(r > 0)) throw InvalidInputError("validity: r must be > 0");
  const Box support = cfg.support();
  const LossPtr loss = build_loss(cfg.loss, cfg.data.d0, support, 2.0 * r);
  const Dataset pool_data = make_dataset(cfg.data.pool, cfg.data.d0, support,
                                         cfg.data.label, cfg.seed, kTagPool);
  const DiscreteDistribution P0 = empirical_distribution(pool_data);
  const auto seeds = cfg.seed_values();
  const PerturbationBudget b2 = make_budget(NormOrder::kInf, 2.0 * r);

  struct Measured {
    double emp, sup, shifted, eps, robust, runtime;
  };
  const auto meas = parallel_map<Measured>(
      seeds.size(), cfg.threads, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Dataset data = sample_dataset(P0, cfg.data.n, support, seeds[i]);
        TrainSpec spec = cfg.train;
        spec.p = NormOrder::kInf;
        const TrainTrace tr = train(
            *loss, data,
            make_train_config(spec, 2.0 * r,
                              derive_stream(seeds[i], kTagTraining).seed));
        const Vector& w = tr.w_final;
        const ShiftResult sh =
            apply_shift(P0, {ShiftKind::kAdditiveLinf, r, seeds[i]});
        Measured m;
        m.emp = empirical_risk(*loss, data, w);
        m.sup = worst_case_risk_winf(*loss, w, P0, r, InnerQuality::analytic());
        m.shifted = risk(*loss, w, sh.Q);
        m.eps = measure_robustness(*loss, w, empirical_distribution(data), b2,
                                   InnerQuality::analytic())
                    .epsilon_hat;
        m.robust = robust_objective(*loss, data, w, b2, InnerQuality::analytic());
        m.runtime = seconds_since(t0);
        return m;
      });

  std::vector<ResultRow> rows;
  ExperimentReport rep;
  rep.experiment = "validity";
  rep.passed = true;
  for (double th : grid) {
    std::size_t violations = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const Measured& m = meas[i];
      BoundInputs in;
      in.d0 = cfg.data.d0;
      in.D = l1_diameter(support);
      in.M = loss->profile().M;
      in.n = cfg.data.n;
      in.r = r;
      in.epsilon = m.eps;
      in.theta = th;
      ResultRow row;
      row.experiment = "validity";
      row.seed = seeds[i];
      row.grid_key = "theta";
      row.grid_value = th;
      row.clean_risk = m.emp;
      row.ood_risk = m.sup;
      row.robust_objective = m.robust;
      row.bound = ood_bound_winf(in).bound;
      row.runtime_s = m.runtime;
      const double dev =
          std::max(std::abs(m.sup - m.emp), std::abs(m.shifted - m.emp));
      if (dev > row.bound) ++violations;
      rows.push_back(row);
    }
    const double rate =
        static_cast<double>(violations) / static_cast<double>(seeds.size());
    const double limit =
        th + 3.0 * std::sqrt(th * (1.0 - th) / static_cast<double>(seeds.size()));
    rep.summary.emplace_back("violation_rate_theta" + format_double(th), rate);
    rep.summary.emplace_back("limit_theta" + format_double(th), limit);
    rep.passed = rep.passed && rate <= limit;
  }
  sort_rows(rows);
  rep.rows = std::move(rows);
  return rep;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "converge") return run_convergence_experiment(cfg);
  if (cfg.experiment == "ablate_r") return run_perturbation_ablation(cfg);
  if (cfg.experiment == "ablate_n") return run_sample_ablation(cfg);
  if (cfg.experiment == "transfer") return run_pretrain_transfer(cfg);
  if (cfg.experiment == "validity") return run_bound_validity(cfg);
  throw InvalidInputError("'" + cfg.experiment +
                          "' is not a grid experiment");
}

// ---------------------------------------------------------------------------
// Reference configurations.

inline ExperimentConfig reference_convergence_config() {
  ExperimentConfig c;
  c.experiment = "converge";
  c.seed = 20260101;
  c.seeds = 200;
  c.loss.family = "quadratic";
  c.loss.mu_w = 1.0;
  c.loss.mu_x = 1.0;
  c.loss.w_bound = 3.0;
  c.data.n = 20;
  c.data.d0 = 2;
  c.data.support_box = detail::cube(2, 0.0, 1.0);
  c.train.p = NormOrder::kTwo;
  c.train.r = 0.1;
  c.train.schedule = OuterSchedule::kPlDecay;
  c.grid.key = "T";
  for (double T = 4; T <= 2048; T *= 2) c.grid.values.push_back(T);
  return c;
}

inline ExperimentConfig reference_transfer_config() {
  ExperimentConfig c;
  c.experiment = "transfer";
  c.seed = 20260202;
  c.seeds = 20;
  c.loss.family = "quadratic";
  c.loss.mu_w = 1.0;
  c.loss.mu_x = 1.0;
  c.loss.w_bound = 2.0;
  c.data.n = 16;
  c.data.d0 = 2;
  c.data.support_box = detail::cube(2, 0.0, 1.0);
  c.train.p = NormOrder::kInf;
  c.train.r = 0.1;
  c.train.T = 400;
  c.grid = {"tv", {0.0, 0.1, 0.3}};
  return c;
}

inline ExperimentConfig reference_validity_config() {
  ExperimentConfig c;
  c.experiment = "validity";
  c.seed = 20260303;
  c.seeds = 200;
  c.loss.family = "quadratic";
  c.loss.mu_w = 1.0;
  c.loss.mu_x = 1.0;
  c.loss.anchor = {0.5};
  c.loss.w_bound = 1.0;
  c.data.n = 2000;
  c.data.d0 = 1;
  c.data.pool = 512;
  c.data.support_box = detail::cube(1, 0.0, 1.0);
  c.train.p = NormOrder::kInf;
  c.train.r = 0.5;
  c.train.T = 200;
  c.grid = {"theta", {0.1}};
  return c;
}

inline ExperimentConfig reference_ablation_base() {
  ExperimentConfig c;
  c.seeds = 50;
  c.loss.family = "logistic";
  c.loss.ridge = 0.0;
  c.loss.w_bound = 5.0;
  c.loss.probes = 500;
  c.data.d0 = 10;
  c.data.n = 200;
  c.data.support_box = detail::cube(10, -1.0, 1.0);
  c.data.label.kind = LabelKind::kLogistic;
  c.data.label.theta = Vector(10, 1.0);
  c.data.label.temperature = 0.25;
  c.train.p = NormOrder::kInf;
  c.train.K = 3;
  c.train.eta_x_per_r = 0.5;
  c.train.sign_variant = true;
  c.train.schedule = OuterSchedule::kConstant;
  c.train.eta = 0.05;
  c.train.T = 2000;
  c.test.n = 2000;
  c.test.shift = 0.1;
  return c;
}

inline ExperimentConfig reference_perturbation_ablation_config() {
  ExperimentConfig c = reference_ablation_base();
  c.experiment = "ablate_r";
  c.seed = 20260404;
  c.grid.key = "r";
  c.grid.values = {0.0, 0.0125, 0.025, 0.05, 0.1, 0.2, 0.4, 0.8};
  return c;
}

inline ExperimentConfig reference_sample_ablation_config() {
  ExperimentConfig c = reference_ablation_base();
  c.experiment = "ablate_n";
  c.seed = 20260505;
  c.seeds = 30;
  c.train.r = 0.1;
  c.grid.key = "n";
  c.grid.values = {50, 100, 200, 400, 800};
  return c;
}

inline ExperimentConfig reference_config(const std::string& experiment) {
  if (experiment == "converge") return reference_convergence_config();
  if (experiment == "ablate_r") return reference_perturbation_ablation_config();
  if (experiment == "ablate_n") return reference_sample_ablation_config();
  if (experiment == "transfer") return reference_transfer_config();
  if (experiment == "validity") return reference_validity_config();
  throw InvalidInputError("no reference configuration for '" + experiment +
                          "'");
}

}  // namespace robustood

#endif  // ROBUSTOOD_HARNESS_HPP_
