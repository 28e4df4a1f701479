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

// Summary statistics used by the experiment suites.

#ifndef ROBUSTOOD_STATS_HPP_
#define ROBUSTOOD_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "robustood/error.hpp"
#include "robustood/numkit.hpp"

namespace robustood::stats {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidInputError("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double standard_error(std::span<const double> v) {
  if (v.empty()) throw InvalidInputError("standard error of an empty sample");
  return stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

// Least-squares slope of y against x.
inline double slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidInputError("slope needs two equally long samples (n >= 2)");
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InvalidInputError("slope: x has zero variance");
  return sxy / sxx;
}

inline double log_log_slope(std::span<const double> x,
                            std::span<const double> y) {
  Vector lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) {
      throw InvalidInputError("log_log_slope needs positive values");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return slope(lx, ly);
}

// 1-based ranks, ties receive the average rank.
inline Vector ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  Vector r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidInputError("correlation needs two equally long samples");
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  const Vector rx = ranks(x), ry = ranks(y);
  return pearson(rx, ry);
}

// Trailing window-3 moving average (length n - 2).
inline Vector moving_average3(std::span<const double> v) {
  Vector out;
  for (std::size_t i = 0; i + 2 < v.size(); ++i) {
    out.push_back((v[i] + v[i + 1] + v[i + 2]) / 3.0);
  }
  return out;
}

// Number of sign changes in the successive differences of v (zero
// differences are skipped).
inline std::size_t difference_sign_changes(std::span<const double> v) {
  std::size_t changes = 0;
  int last = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double d = v[i + 1] - v[i];
    const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

// A valley: the smoothed sequence first decreases, then increases, with at
// most one sign change of its differences.
inline bool is_valley_shaped(std::span<const double> v) {
  const Vector s = moving_average3(v);
  if (s.size() < 2) return true;
  if (difference_sign_changes(s) > 1) return false;
  // A single change must go from decreasing to increasing.
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double d = s[i + 1] - s[i];
    if (d > 0) {
      for (std::size_t j = i + 1; j + 1 < s.size(); ++j) {
        if (s[j + 1] - s[j] < 0) return false;
      }
      break;
    }
  }
  return true;
}

}  // namespace robustood::stats

#endif  // ROBUSTOOD_STATS_HPP_
