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

// JSON and CSV serialization for datasets, distributions, bound reports and
// training traces. Doubles are written in shortest round-trip form.

#ifndef ROBUSTOOD_IO_HPP_
#define ROBUSTOOD_IO_HPP_

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "json.hpp"
#include "robustood/certify.hpp"
#include "robustood/error.hpp"
#include "robustood/losses.hpp"
#include "robustood/minimax.hpp"
#include "robustood/numkit.hpp"
#include "robustood/transport.hpp"

namespace robustood {

using Json = nlohmann::json;

// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// As format_double, with +inf spelled "vacuous" for result tables.
inline std::string format_metric(double v) {
  if (std::isinf(v) && v > 0) return "vacuous";
  return format_double(v);
}

inline double parse_double(std::string_view s) {
  if (s == "inf" || s == "vacuous") return kInfinity;
  if (s == "-inf") return -kInfinity;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidInputError("cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidInputError("write to '" + path + "' failed");
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw InvalidInputError(what + ": malformed JSON (" + e.what() + ")");
  }
}

inline Json read_json_file(const std::string& path) {
  return parse_json(read_text_file(path), path);
}

namespace json_detail {

inline void require_object(const Json& j, const char* what) {
  if (!j.is_object()) {
    throw InvalidInputError(std::string(what) + ": expected a JSON object");
  }
}

// Strict mode: every key of `j` must be in `allowed`.
inline void check_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                       const char* what) {
  require_object(j, what);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || (it.key() == a);
    if (!ok) {
      throw InvalidInputError(std::string(what) + ": unknown key '" +
                              it.key() + "'");
    }
  }
}

inline const Json& field(const Json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw InvalidInputError(std::string(what) + ": missing key '" + key + "'");
  }
  return *it;
}

inline double number(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  throw InvalidInputError(std::string(what) + ": expected a number");
}

inline Vector vector(const Json& j, const char* what) {
  if (!j.is_array()) {
    throw InvalidInputError(std::string(what) + ": expected an array");
  }
  Vector v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(number(e, what));
  return v;
}

inline Box box(const Json& j, const char* what) {
  if (!j.is_array()) {
    throw InvalidInputError(std::string(what) + ": expected [[lo, hi], ...]");
  }
  Box b;
  for (const auto& iv : j) {
    const Vector v = vector(iv, what);
    if (v.size() != 2) {
      throw InvalidInputError(std::string(what) + ": interval needs 2 values");
    }
    b.push_back({v[0], v[1]});
  }
  return b;
}

inline Json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline Json vector_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

inline Json box_json(const Box& b) {
  Json a = Json::array();
  for (const auto& iv : b) a.push_back(Json::array({iv.lo, iv.hi}));
  return a;
}

}  // namespace json_detail

// {"d0": int, "support_box": [[lo, hi], ...], "samples": [{"x": [...], "y": v}]}
inline Json dataset_to_json(const Dataset& data) {
  Json samples = Json::array();
  for (const auto& s : data.samples) {
    samples.push_back({{"x", json_detail::vector_json(s.x)}, {"y", s.y}});
  }
  return {{"d0", data.d0},
          {"support_box", json_detail::box_json(data.support_box)},
          {"samples", samples}};
}

inline Dataset dataset_from_json(const Json& j) {
  using namespace json_detail;
  check_keys(j, {"d0", "support_box", "samples"}, "dataset");
  Dataset data;
  const Json& d0 = field(j, "d0", "dataset");
  if (!d0.is_number_integer() || d0.get<long long>() < 1) {
    throw InvalidInputError("dataset: d0 must be a positive integer");
  }
  data.d0 = d0.get<std::size_t>();
  data.support_box = box(field(j, "support_box", "dataset"), "support_box");
  data.D = l1_diameter(data.support_box);
  const Json& samples = field(j, "samples", "dataset");
  if (!samples.is_array()) {
    throw InvalidInputError("dataset: samples must be an array");
  }
  for (const auto& s : samples) {
    check_keys(s, {"x", "y"}, "dataset sample");
    LabeledSample smp;
    smp.x = vector(field(s, "x", "dataset sample"), "sample x");
    if (s.contains("y")) smp.y = number(s["y"], "sample y");
    data.samples.push_back(std::move(smp));
  }
  validate(data);
  return data;
}

// {"atoms": [[...], ...], "weights": [...], "labels": [...] (optional)}
inline Json distribution_to_json(const DiscreteDistribution& P) {
  Json atoms = Json::array();
  for (const auto& a : P.atoms) atoms.push_back(json_detail::vector_json(a));
  Json j = {{"atoms", atoms}, {"weights", json_detail::vector_json(P.weights)}};
  if (!P.labels.empty()) j["labels"] = json_detail::vector_json(P.labels);
  return j;
}

inline DiscreteDistribution distribution_from_json(const Json& j) {
  using namespace json_detail;
  check_keys(j, {"atoms", "weights", "labels"}, "distribution");
  const Json& atoms = field(j, "atoms", "distribution");
  if (!atoms.is_array()) {
    throw InvalidInputError("distribution: atoms must be an array");
  }
  DiscreteDistribution P;
  for (const auto& a : atoms) P.atoms.push_back(vector(a, "atom"));
  P.weights = vector(field(j, "weights", "distribution"), "weights");
  if (j.contains("labels")) P.labels = vector(j["labels"], "labels");
  validate(P);
  return P;
}

// {"formula": str, "bound": float | "inf", "log_bound": float,
//  "components": {name: float | "inf"}}
inline Json bound_report_to_json(const BoundReport& rep) {
  Json comps = Json::object();
  for (const auto& c : rep.components) {
    comps[c.name] = json_detail::number_json(c.value);
  }
  return {{"formula", rep.formula},
          {"bound", json_detail::number_json(rep.bound)},
          {"log_bound", json_detail::number_json(rep.log_bound)},
          {"components", comps}};
}

inline std::string trace_csv(const TrainTrace& trace) {
  std::string out = "t,i_t,objective_stoch,objective_full,grad_norm\n";
  for (const auto& s : trace.steps) {
    out += std::to_string(s.t);
    out += ',';
    out += std::to_string(s.i_t);
    out += ',';
    out += format_double(s.objective_stoch);
    out += ',';
    if (s.objective_full) out += format_double(*s.objective_full);
    out += ',';
    out += format_double(s.grad_norm);
    out += '\n';
  }
  return out;
}

}  // namespace robustood

#endif  // ROBUSTOOD_IO_HPP_
