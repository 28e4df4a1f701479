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

// Exact transport distances between finitely supported distributions and
// worst-case risk over Wasserstein balls.
//
//   wasserstein2      transportation simplex on the squared-l2 cost
//   wasserstein_inf   bottleneck assignment: binary search over edge costs
//                     with Hopcroft-Karp matching on the equal-mass expansion
//                     (ground norm l_inf)
//   brute_force_wp    enumeration of permutation couplings, used as oracle

#ifndef ROBUSTOOD_TRANSPORT_HPP_
#define ROBUSTOOD_TRANSPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustood/error.hpp"
#include "robustood/losses.hpp"
#include "robustood/minimax.hpp"
#include "robustood/numkit.hpp"

namespace robustood {

inline constexpr std::size_t kMaxSupport = 64;
inline constexpr std::size_t kMaxExpansion = 256;
inline constexpr std::size_t kMaxBruteForce = 8;

// Atoms with probabilities. `labels` is optional (empty = unlabeled); when
// present it carries the class/target of each atom for supervised losses.
struct DiscreteDistribution {
  std::vector<Vector> atoms;
  Vector weights;
  Vector labels;

  std::size_t size() const { return atoms.size(); }
  std::size_t dim() const { return atoms.empty() ? 0 : atoms.front().size(); }
  double label(std::size_t i) const { return labels.empty() ? 0.0 : labels[i]; }
};

inline void validate(const DiscreteDistribution& P) {
  if (P.atoms.empty()) throw InvalidInputError("distribution has no atoms");
  if (P.atoms.size() != P.weights.size()) {
    throw InvalidInputError("distribution atoms/weights length mismatch");
  }
  if (!P.labels.empty() && P.labels.size() != P.atoms.size()) {
    throw InvalidInputError("distribution labels length mismatch");
  }
  const std::size_t d = P.atoms.front().size();
  double total = 0.0;
  for (std::size_t i = 0; i < P.atoms.size(); ++i) {
    if (P.atoms[i].size() != d) {
      throw InvalidInputError("distribution atoms have mixed dimensions");
    }
    require_finite(P.atoms[i], "distribution atom");
    if (!(P.weights[i] >= 0) || !std::isfinite(P.weights[i])) {
      throw InvalidInputError("distribution weights must be finite and >= 0");
    }
    total += P.weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidInputError("distribution weights must sum to 1");
  }
}

inline DiscreteDistribution make_distribution(std::vector<Vector> atoms,
                                              Vector weights,
                                              Vector labels = {}) {
  DiscreteDistribution P{std::move(atoms), std::move(weights),
                         std::move(labels)};
  validate(P);
  return P;
}

inline DiscreteDistribution uniform_distribution(std::vector<Vector> atoms,
                                                 Vector labels = {}) {
  const double w = 1.0 / static_cast<double>(atoms.size());
  Vector weights(atoms.size(), w);
  return make_distribution(std::move(atoms), std::move(weights),
                           std::move(labels));
}

// The empirical distribution P_n of a dataset (labels carried along).
inline DiscreteDistribution empirical_distribution(const Dataset& data) {
  std::vector<Vector> atoms;
  Vector labels;
  atoms.reserve(data.size());
  for (const auto& s : data.samples) {
    atoms.push_back(s.x);
    labels.push_back(s.y);
  }
  return uniform_distribution(std::move(atoms), std::move(labels));
}

// Row-major coupling matrix.
struct Coupling {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;

  double operator()(std::size_t i, std::size_t j) const {
    return mass[i * cols + j];
  }
};

inline bool is_coupling(const Coupling& c, const DiscreteDistribution& P,
                        const DiscreteDistribution& Q, double tol = 1e-10) {
  if (c.rows != P.size() || c.cols != Q.size()) return false;
  for (double m : c.mass) {
    if (m < 0) return false;
  }
  for (std::size_t i = 0; i < c.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.cols; ++j) s += c(i, j);
    if (std::abs(s - P.weights[i]) > tol) return false;
  }
  for (std::size_t j = 0; j < c.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.rows; ++i) s += c(i, j);
    if (std::abs(s - Q.weights[j]) > tol) return false;
  }
  return true;
}

namespace detail {

inline void check_pair(const DiscreteDistribution& P,
                       const DiscreteDistribution& Q) {
  validate(P);
  validate(Q);
  if (P.dim() != Q.dim()) {
    throw InvalidInputError("distributions have different dimensions");
  }
}

inline double squared_l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Spanning-tree transportation simplex. The basis always holds m + n - 1
// cells; masses are perturbed (supplies + eps, last demand + m eps) so that
// pivots are nondegenerate, and the final tree is re-solved with the exact
// masses.
class TransportationSimplex {
 public:
  static constexpr double kPerturbation = 1e-13;
  static constexpr std::size_t kMaxPivots = 100000;

  TransportationSimplex(const Vector& supply, const Vector& demand,
                        std::vector<double> cost)
      : m_(supply.size()), n_(demand.size()), a_(supply), b_(demand),
        cost_(std::move(cost)) {}

  Coupling solve() {
    initial_basis();
    Vector u(m_), v(n_);
    double cmax = 0.0;
    for (double c : cost_) cmax = std::max(cmax, std::abs(c));
    const double tol = 1e-12 * (1.0 + cmax);
    for (std::size_t pivot = 0;; ++pivot) {
      if (pivot > kMaxPivots) {
        throw NumericalError("transportation simplex exceeded pivot limit");
      }
      build_adjacency();
      potentials(u, v);
      std::size_t ei = 0, ej = 0;
      double best = -tol;
      for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
          const double rc = cost_[i * n_ + j] - u[i] - v[j];
          if (rc < best) {
            best = rc;
            ei = i;
            ej = j;
          }
        }
      }
      if (best == -tol) break;
      pivot_on(ei, ej);
    }
    build_adjacency();
    return exact_flows();
  }

 private:
  struct Cell {
    std::size_t i, j;
    double flow;
  };

  void initial_basis() {
    Vector s(a_), d(b_);
    for (double& x : s) x += kPerturbation;
    d.back() += static_cast<double>(m_) * kPerturbation;
    std::size_t i = 0, j = 0;
    basis_.clear();
    for (;;) {
      const double x = std::min(s[i], d[j]);
      basis_.push_back({i, j, x});
      s[i] -= x;
      d[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (j == n_ - 1 || (i < m_ - 1 && s[i] <= d[j])) {
        d[j] += s[i];
        s[i] = 0.0;
        ++i;
      } else {
        s[i] += d[j];
        d[j] = 0.0;
        ++j;
      }
    }
  }

  void build_adjacency() {
    adj_.assign(m_ + n_, {});
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      adj_[basis_[k].i].push_back(k);
      adj_[m_ + basis_[k].j].push_back(k);
    }
  }

  void potentials(Vector& u, Vector& v) const {
    std::vector<char> seen(m_ + n_, 0);
    std::deque<std::size_t> queue{0};
    u[0] = 0.0;
    seen[0] = 1;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      for (std::size_t k : adj_[node]) {
        const Cell& c = basis_[k];
        const std::size_t other = node < m_ ? m_ + c.j : c.i;
        if (seen[other]) continue;
        seen[other] = 1;
        const double cc = cost_[c.i * n_ + c.j];
        if (node < m_) {
          v[c.j] = cc - u[c.i];
        } else {
          u[c.i] = cc - v[c.j];
        }
        queue.push_back(other);
      }
    }
  }

  // Tree path (as basis cell indices) from column node j to row node i.
  std::vector<std::size_t> tree_path(std::size_t i, std::size_t j) const {
    const std::size_t start = m_ + j, goal = i;
    std::vector<std::size_t> parent_cell(m_ + n_, SIZE_MAX);
    std::vector<char> seen(m_ + n_, 0);
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      if (node == goal) break;
      for (std::size_t k : adj_[node]) {
        const Cell& c = basis_[k];
        const std::size_t other = node < m_ ? m_ + c.j : c.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_cell[other] = k;
        queue.push_back(other);
      }
    }
    std::vector<std::size_t> path;
    std::size_t node = goal;
    while (node != start) {
      const std::size_t k = parent_cell[node];
      path.push_back(k);
      const Cell& c = basis_[k];
      node = node < m_ ? m_ + c.j : c.i;
    }
    std::reverse(path.begin(), path.end());  // starts next to column j
    return path;
  }

  void pivot_on(std::size_t ei, std::size_t ej) {
    const std::vector<std::size_t> path = tree_path(ei, ej);
    // Signs along the path starting at column ej alternate -, +, -, ...
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = SIZE_MAX;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Cell& c = basis_[path[k]];
      if (c.flow < theta || (c.flow == theta && path[k] < leave)) {
        theta = c.flow;
        leave = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      basis_[path[k]].flow += (k % 2 == 0) ? -theta : theta;
    }
    basis_[leave] = {ei, ej, theta};
  }

  // Leaf elimination on the final tree with the unperturbed masses.
  Coupling exact_flows() const {
    Vector rem(m_ + n_);
    for (std::size_t i = 0; i < m_; ++i) rem[i] = a_[i];
    for (std::size_t j = 0; j < n_; ++j) rem[m_ + j] = b_[j];
    std::vector<std::size_t> degree(m_ + n_);
    for (std::size_t node = 0; node < m_ + n_; ++node) {
      degree[node] = adj_[node].size();
    }
    std::vector<char> used(basis_.size(), 0);
    std::vector<double> flow(basis_.size(), 0.0);
    std::deque<std::size_t> leaves;
    for (std::size_t node = 0; node < m_ + n_; ++node) {
      if (degree[node] == 1) leaves.push_back(node);
    }
    while (!leaves.empty()) {
      const std::size_t node = leaves.front();
      leaves.pop_front();
      if (degree[node] != 1) continue;
      std::size_t k = SIZE_MAX;
      for (std::size_t kk : adj_[node]) {
        if (!used[kk]) {
          k = kk;
          break;
        }
      }
      if (k == SIZE_MAX) continue;
      used[k] = 1;
      const Cell& c = basis_[k];
      const std::size_t other = node < m_ ? m_ + c.j : c.i;
      flow[k] = rem[node];
      rem[other] -= rem[node];
      rem[node] = 0.0;
      --degree[node];
      if (--degree[other] == 1) leaves.push_back(other);
    }
    Coupling out{m_, n_, std::vector<double>(m_ * n_, 0.0)};
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      out.mass[basis_[k].i * n_ + basis_[k].j] += std::max(0.0, flow[k]);
    }
    return out;
  }

  std::size_t m_, n_;
  Vector a_, b_;
  std::vector<double> cost_;
  std::vector<Cell> basis_;
  std::vector<std::vector<std::size_t>> adj_;
};

// Integer multiplicities c_i with c_i / N == weight_i for the smallest
// N <= kMaxExpansion shared by both distributions.
struct Expansion {
  std::size_t N = 0;
  std::vector<std::size_t> p_counts;
  std::vector<std::size_t> q_counts;
};

inline Expansion equal_mass_expansion(const DiscreteDistribution& P,
                                      const DiscreteDistribution& Q,
                                      std::size_t limit = kMaxExpansion) {
  constexpr double kTol = 1e-9;
  auto counts_for = [&](const Vector& w, std::size_t N,
                        std::vector<std::size_t>& out) {
    out.assign(w.size(), 0);
    std::size_t total = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double x = w[i] * static_cast<double>(N);
      const double r = std::round(x);
      if (std::abs(x - r) > kTol * static_cast<double>(N)) return false;
      out[i] = static_cast<std::size_t>(r);
      total += out[i];
    }
    return total == N;
  };
  Expansion e;
  for (std::size_t N = 1; N <= limit; ++N) {
    if (counts_for(P.weights, N, e.p_counts) &&
        counts_for(Q.weights, N, e.q_counts)) {
      e.N = N;
      return e;
    }
  }
  throw UnsupportedError("weights are not rational with a common denominator "
                         "<= " + std::to_string(limit));
}

inline std::vector<std::size_t> expand_indices(
    const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.insert(out.end(), counts[i], i);
  }
  return out;
}

// Hopcroft-Karp maximum matching on a bipartite graph given as adjacency
// lists of the left side.
class HopcroftKarp {
 public:
  HopcroftKarp(std::size_t left, std::size_t right,
               const std::vector<std::vector<std::size_t>>& adj)
      : nl_(left), nr_(right), adj_(adj), match_l_(left, kFree),
        match_r_(right, kFree), dist_(left) {}

  std::size_t max_matching() {
    std::size_t size = 0;
    while (bfs()) {
      for (std::size_t u = 0; u < nl_; ++u) {
        if (match_l_[u] == kFree && dfs(u)) ++size;
      }
    }
    return size;
  }

 private:
  static constexpr std::size_t kFree = SIZE_MAX;
  static constexpr std::size_t kInf = SIZE_MAX;

  bool bfs() {
    std::deque<std::size_t> queue;
    bool found = false;
    for (std::size_t u = 0; u < nl_; ++u) {
      if (match_l_[u] == kFree) {
        dist_[u] = 0;
        queue.push_back(u);
      } else {
        dist_[u] = kInf;
      }
    }
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : adj_[u]) {
        const std::size_t w = match_r_[v];
        if (w == kFree) {
          found = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          queue.push_back(w);
        }
      }
    }
    return found;
  }

  bool dfs(std::size_t u) {
    for (std::size_t v : adj_[u]) {
      const std::size_t w = match_r_[v];
      if (w == kFree || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_l_[u] = v;
        match_r_[v] = u;
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  std::size_t nl_, nr_;
  const std::vector<std::vector<std::size_t>>& adj_;
  std::vector<std::size_t> match_l_, match_r_, dist_;
};

}  // namespace detail

struct TransportPlan {
  Coupling coupling;
  double cost = 0.0;  // sum_ij pi_ij |u_i - v_j|_2^2
};

inline TransportPlan optimal_plan_w2(const DiscreteDistribution& P,
                                     const DiscreteDistribution& Q) {
  detail::check_pair(P, Q);
  if (P.size() > kMaxSupport || Q.size() > kMaxSupport) {
    throw TooLargeError("wasserstein2 supports at most " +
                        std::to_string(kMaxSupport) + " atoms per side");
  }
  std::vector<double> cost(P.size() * Q.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    for (std::size_t j = 0; j < Q.size(); ++j) {
      cost[i * Q.size() + j] = detail::squared_l2(P.atoms[i], Q.atoms[j]);
    }
  }
  detail::TransportationSimplex lp(P.weights, Q.weights, cost);
  TransportPlan plan;
  plan.coupling = lp.solve();
  for (std::size_t k = 0; k < cost.size(); ++k) {
    plan.cost += plan.coupling.mass[k] * cost[k];
  }
  return plan;
}

// W_2 with squared-l2 ground cost.
inline double wasserstein2(const DiscreteDistribution& P,
                           const DiscreteDistribution& Q) {
  return std::sqrt(std::max(0.0, optimal_plan_w2(P, Q).cost));
}

// W_inf with l_inf ground norm: the smallest t such that a coupling exists
// moving every unit of mass by at most t.
inline double wasserstein_inf(const DiscreteDistribution& P,
                              const DiscreteDistribution& Q) {
  detail::check_pair(P, Q);
  if (P.size() > kMaxSupport || Q.size() > kMaxSupport) {
    throw TooLargeError("wasserstein_inf supports at most " +
                        std::to_string(kMaxSupport) + " atoms per side");
  }
  const detail::Expansion e = detail::equal_mass_expansion(P, Q);
  const auto left = detail::expand_indices(e.p_counts);
  const auto right = detail::expand_indices(e.q_counts);
  std::vector<double> cost(P.size() * Q.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    for (std::size_t j = 0; j < Q.size(); ++j) {
      cost[i * Q.size() + j] = detail::linf(P.atoms[i], Q.atoms[j]);
    }
  }
  std::vector<double> candidates;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (e.p_counts[i] == 0) continue;
    for (std::size_t j = 0; j < Q.size(); ++j) {
      if (e.q_counts[j] != 0) candidates.push_back(cost[i * Q.size() + j]);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  auto feasible = [&](double t) {
    std::vector<std::vector<std::size_t>> adj(e.N);
    for (std::size_t a = 0; a < e.N; ++a) {
      for (std::size_t b = 0; b < e.N; ++b) {
        if (cost[left[a] * Q.size() + right[b]] <= t) adj[a].push_back(b);
      }
    }
    detail::HopcroftKarp hk(e.N, e.N, adj);
    return hk.max_matching() == e.N;
  };
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

inline double tv_distance(const DiscreteDistribution& P,
                          const DiscreteDistribution& Q) {
  validate(P);
  validate(Q);
  // Atoms are matched by exact coordinate (and label) equality.
  std::map<std::pair<Vector, double>, double> diff;
  for (std::size_t i = 0; i < P.size(); ++i) {
    diff[{P.atoms[i], P.label(i)}] += P.weights[i];
  }
  for (std::size_t j = 0; j < Q.size(); ++j) {
    diff[{Q.atoms[j], Q.label(j)}] -= Q.weights[j];
  }
  double s = 0.0;
  for (const auto& [key, d] : diff) s += std::abs(d);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

// Exact W_2 (p = 2) or W_inf (p = inf) by enumerating every permutation
// coupling of the equal-mass expansions (size <= 8).
inline double brute_force_wp(const DiscreteDistribution& P,
                             const DiscreteDistribution& Q, NormOrder p) {
  detail::check_pair(P, Q);
  if (p == NormOrder::kOne) {
    throw InvalidInputError("brute_force_wp supports p = 2 or p = inf");
  }
  const detail::Expansion e = detail::equal_mass_expansion(P, Q);
  if (e.N > kMaxBruteForce) {
    throw TooLargeError("brute_force_wp: equal-mass expansion has " +
                        std::to_string(e.N) + " points (limit 8)");
  }
  const auto left = detail::expand_indices(e.p_counts);
  const auto right = detail::expand_indices(e.q_counts);
  std::vector<std::size_t> perm(e.N);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0.0;
    for (std::size_t a = 0; a < e.N; ++a) {
      const Vector& u = P.atoms[left[a]];
      const Vector& v = Q.atoms[right[perm[a]]];
      if (p == NormOrder::kTwo) {
        acc += detail::squared_l2(u, v);
      } else {
        acc = std::max(acc, detail::linf(u, v));
      }
    }
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (p == NormOrder::kTwo) {
    return std::sqrt(best / static_cast<double>(e.N));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Worst-case risk.

// sum_i p_i sup_{|delta|_inf <= r} f(w, a_i + delta), which equals the
// supremum of the risk over the W_inf ball of radius r around P0.
inline double worst_case_risk_winf(const SmoothLoss& loss,
                                   std::span<const double> w,
                                   const DiscreteDistribution& P0, double r,
                                   const InnerQuality& quality) {
  validate(P0);
  const PerturbationBudget b = make_budget(NormOrder::kInf, r);
  double s = 0.0;
  for (std::size_t i = 0; i < P0.size(); ++i) {
    const LabeledSample smp{P0.atoms[i], P0.label(i)};
    s += P0.weights[i] * per_example_sup(loss, w, smp, b, quality);
  }
  return s;
}

// Risk of w under P (no perturbation).
inline double risk(const SmoothLoss& loss, std::span<const double> w,
                   const DiscreteDistribution& P) {
  double s = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    s += P.weights[i] * loss.value(w, P.atoms[i], P.label(i));
  }
  return s;
}

enum class SolveStatus {
  kCertified,  // loss certified concave in x: the dual value is the supremum
  kHeuristic,  // stationary value only
};

struct W2WorstCase {
  double value = 0.0;
  double lambda = 0.0;
  double budget_used = 0.0;  // sum_i p_i |delta_i|^2
  std::vector<Vector> deltas;
  SolveStatus status = SolveStatus::kCertified;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kLambdaBisections = 60;

// sup over per-atom displacements with sum_i p_i |delta_i|_2^2 <= r^2 of
// sum_i p_i f(w, a_i + delta_i), via bisection on the multiplier of the
// penalized problem max f(w, a + delta) - lambda |delta|^2.
inline W2WorstCase worst_case_risk_w2(const SmoothLoss& loss,
                                      std::span<const double> w,
                                      const DiscreteDistribution& P0, double r,
                                      double tolerance = 1e-10) {
  validate(P0);
  if (!(r > 0) || !std::isfinite(r)) {
    throw InvalidInputError("worst_case_risk_w2: r must be > 0");
  }
  const auto* quad = dynamic_cast<const QuadraticSaddle*>(&loss);
  const double L22 = loss.profile().L22;
  const std::size_t n = P0.size();

  auto penalized_argmax = [&](std::size_t i, double lambda) {
    const Vector& a = P0.atoms[i];
    if (quad != nullptr) {
      const Vector& h = quad->curvature();
      Vector d(a.size());
      for (std::size_t j = 0; j < a.size(); ++j) {
        d[j] = (w[j] - h[j] * a[j]) / (h[j] + 2.0 * lambda);
      }
      return d;
    }
    // Generic smooth case: gradient ascent on the (2 lambda)-penalized
    // objective from delta = 0.
    Vector d(a.size(), 0.0);
    const double step = 1.0 / (L22 + 2.0 * lambda);
    for (int it = 0; it < 20000; ++it) {
      Vector g = loss.grad_x(w, add(a, d), P0.label(i));
      axpy(-2.0 * lambda, d, g);
      if (norm(g, NormOrder::kTwo) < 1e-12) break;
      axpy(step, g, d);
      if (!all_finite(d)) break;
    }
    return d;
  };
  auto budget_at = [&](double lambda, std::vector<Vector>* out) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Vector d = penalized_argmax(i, lambda);
      g += P0.weights[i] * dot(d, d);
      if (out) (*out)[i] = std::move(d);
    }
    return g;
  };
  auto value_of = [&](const std::vector<Vector>& deltas) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += P0.weights[i] * loss.value(w, add(P0.atoms[i], deltas[i]),
                                      P0.label(i));
    }
    return s;
  };

  W2WorstCase out;
  out.status = loss.certified_concave_in_x() ? SolveStatus::kCertified
                                             : SolveStatus::kHeuristic;
  out.deltas.assign(n, {});
  const double r2 = r * r;
  if (quad != nullptr) {
    const double g0 = budget_at(0.0, &out.deltas);
    if (g0 <= r2) {
      out.lambda = 0.0;
      out.budget_used = g0;
      out.value = value_of(out.deltas);
      return out;
    }
  }
  double gx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gx = std::max(gx, norm(loss.grad_x(w, P0.atoms[i], P0.label(i)),
                           NormOrder::kTwo));
  }
  double lo = 0.0;
  double hi = L22 + 2.0 * gx / r;
  std::vector<Vector> deltas(n);
  double g_hi = budget_at(hi, &deltas);
  if (!(g_hi <= r2)) {
    throw NumericalError(
        "worst_case_risk_w2: multiplier bracket [0, " + std::to_string(hi) +
        "] does not contain a feasible point (budget " +
        std::to_string(g_hi) + " > r^2 = " + std::to_string(r2) + ")");
  }
  for (std::size_t it = 0; it < kLambdaBisections; ++it) {
    out.iterations = it + 1;
    if (std::abs(g_hi - r2) <= tolerance * r2) break;
    const double mid = 0.5 * (lo + hi);
    std::vector<Vector> dm(n);
    const double gm = budget_at(mid, &dm);
    if (gm > r2) {
      lo = mid;
    } else {
      hi = mid;
      g_hi = gm;
      deltas = std::move(dm);
    }
  }
  out.lambda = hi;
  out.budget_used = g_hi;
  out.value = value_of(deltas);
  out.deltas = std::move(deltas);
  return out;
}

}  // namespace robustood

#endif  // ROBUSTOOD_TRANSPORT_HPP_
