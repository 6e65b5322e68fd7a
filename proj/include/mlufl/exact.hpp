#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mlufl/instance.hpp"
#include "mlufl/metric.hpp"

namespace mlufl {

// Enumeration caps for the ground-truth solvers below.
struct ExactLimits {
  int max_facilities = 8;    // ordered-subset enumeration
  int max_ml_nodes = 14;     // bitmask DP
  int max_mssc_sets = 8;
  int max_ufl_facilities = 16;
};

struct ExactMluflResult {
  double value = kInf;
  Solution solution;
};

// Optimal facility set, activation order and assignment by enumerating every
// ordered subset of facilities; each client takes its cheapest open facility.
inline ExactMluflResult exact_mlufl(const Instance& inst, ExactLimits limits = {}) {
  if (inst.n > limits.max_facilities)
    throw std::invalid_argument("exact_mlufl: facility count over enumeration limit");
  ExactMluflResult best;

  std::vector<int> order;
  std::vector<char> used(inst.n, 0);
  // best (connection + weighted latency) per client for the current prefix
  std::vector<std::vector<double>> bestc(1, std::vector<double>(inst.m, kInf));
  std::vector<std::vector<int>> bestof(1, std::vector<int>(inst.m, -1));
  double fac_sum = 0;

  auto consider = [&] {
    const auto& bc = bestc.back();
    double total = fac_sum;
    for (int j = 0; j < inst.m; ++j) {
      if (bc[j] == kInf) return;  // some client unservable by this prefix
      total += bc[j];
    }
    if (total < best.value - 1e-12) {
      best.value = total;
      best.solution.open_set = order;
      best.solution.routes = {order};
      best.solution.assignment = bestof.back();
    }
  };

  double prefix_time = 0;
  std::vector<double> times;
  auto dfs = [&](auto&& self, int last) -> void {
    consider();
    if (static_cast<int>(order.size()) == inst.n) return;
    for (int i = 0; i < inst.n; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      double leg = inst.d(last, i);
      prefix_time += leg;
      times.push_back(leg);
      fac_sum += inst.f(i);
      order.push_back(i);
      bestc.push_back(bestc.back());
      bestof.push_back(bestof.back());
      for (int j = 0; j < inst.m; ++j) {
        if (!std::isfinite(inst.c(i, j))) continue;
        double v = inst.c(i, j) + inst.lambda(j) * inst.latency(prefix_time);
        if (v < bestc.back()[j]) {
          bestc.back()[j] = v;
          bestof.back()[j] = i;
        }
      }
      self(self, i);
      bestc.pop_back();
      bestof.pop_back();
      order.pop_back();
      fac_sum -= inst.f(i);
      prefix_time -= leg;
      times.pop_back();
      used[i] = 0;
    }
  };
  dfs(dfs, inst.root());
  if (best.value == kInf) throw std::runtime_error("exact_mlufl: no feasible solution");
  return best;
}

struct ExactMlResult {
  double value = kInf;
  std::vector<int> order;
};

// Minimum-latency tour value by bitmask DP over visited nodes (the root is
// excluded from the mask). With `groups` nonempty this is the group-latency
// variant: the accrual per leg counts uncovered groups, and the walk may stop
// once every group is covered.
inline ExactMlResult exact_ml(const Metric& metric, const std::vector<std::vector<int>>& groups = {},
                              ExactLimits limits = {}) {
  std::vector<int> nodes;
  for (int u = 0; u < metric.size; ++u)
    if (u != metric.root) nodes.push_back(u);
  const int N = static_cast<int>(nodes.size());
  if (N > limits.max_ml_nodes) throw std::invalid_argument("exact_ml: node count over DP limit");
  if (N == 0) return {0, {}};

  const int G = static_cast<int>(groups.size());
  std::vector<std::uint32_t> group_mask_of_node(N, 0);
  for (int g = 0; g < G; ++g)
    for (int u : groups[g]) {
      for (int a = 0; a < N; ++a)
        if (nodes[a] == u) group_mask_of_node[a] |= (1u << g);
    }
  const bool grouped = G > 0;
  const std::uint32_t all_groups = grouped ? ((G == 32 ? ~0u : (1u << G) - 1)) : 0;

  auto uncovered_after = [&](std::uint32_t visited) -> int {
    if (!grouped) return N - __builtin_popcount(visited);
    std::uint32_t cov = 0;
    for (int a = 0; a < N; ++a)
      if (visited & (1u << a)) cov |= group_mask_of_node[a];
    return G - __builtin_popcount(cov & all_groups);
  };

  const std::uint32_t full = (N == 32 ? ~0u : (1u << N) - 1);
  std::vector<std::vector<double>> dp(full + 1, std::vector<double>(N, kInf));
  std::vector<std::vector<int>> par(full + 1, std::vector<int>(N, -1));
  for (int a = 0; a < N; ++a) {
    int pending = uncovered_after(0);
    dp[1u << a][a] = metric(metric.root, nodes[a]) * pending;
  }
  double best = kInf;
  std::uint32_t best_mask = 0;
  int best_last = -1;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    int pending = uncovered_after(mask);
    for (int a = 0; a < N; ++a) {
      if (!(mask & (1u << a)) || dp[mask][a] == kInf) continue;
      bool done = grouped ? (pending == 0) : (mask == full);
      if (done && dp[mask][a] < best) {
        best = dp[mask][a];
        best_mask = mask;
        best_last = a;
      }
      if (done) continue;
      for (int b = 0; b < N; ++b) {
        if (mask & (1u << b)) continue;
        double v = dp[mask][a] + metric(nodes[a], nodes[b]) * pending;
        std::uint32_t nm = mask | (1u << b);
        if (v < dp[nm][b]) {
          dp[nm][b] = v;
          par[nm][b] = a;
        }
      }
    }
  }

  ExactMlResult out;
  out.value = best;
  std::uint32_t mask = best_mask;
  int a = best_last;
  while (a >= 0) {
    out.order.push_back(nodes[a]);
    int p = par[mask][a];
    mask &= ~(1u << a);
    a = p;
  }
  std::reverse(out.order.begin(), out.order.end());
  return out;
}

// Permutation cross-check for exact_ml (node sets only, <= 9 nodes).
inline double exact_ml_permutation(const Metric& metric, int limit = 9) {
  std::vector<int> nodes;
  for (int u = 0; u < metric.size; ++u)
    if (u != metric.root) nodes.push_back(u);
  if (static_cast<int>(nodes.size()) > limit)
    throw std::invalid_argument("exact_ml_permutation: too many nodes");
  std::sort(nodes.begin(), nodes.end());
  double best = kInf;
  do {
    double t = 0, total = 0;
    int prev = metric.root;
    for (int u : nodes) {
      t += metric(prev, u);
      total += t;
      prev = u;
    }
    best = std::min(best, total);
  } while (std::next_permutation(nodes.begin(), nodes.end()));
  return nodes.empty() ? 0 : best;
}

struct ExactMsscResult {
  double value = kInf;
  std::vector<int> order;
};

// Min-sum set cover by DP over covered-element masks. Histogram accounting:
// each chosen set pays the number of elements still uncovered before it, so
// the transition cost depends on the mask alone. Sets that cover nothing new
// never help and are skipped (they can always go last).
inline ExactMsscResult exact_mssc(const std::vector<std::vector<int>>& sets, int element_count,
                                  ExactLimits limits = {}) {
  const int S = static_cast<int>(sets.size());
  if (S > limits.max_mssc_sets) throw std::invalid_argument("exact_mssc: too many sets");
  std::vector<std::uint32_t> mask_of(S, 0);
  std::uint32_t full = element_count == 32 ? ~0u : ((1u << element_count) - 1);
  std::uint32_t reachable = 0;
  for (int s = 0; s < S; ++s) {
    for (int e : sets[s]) mask_of[s] |= (1u << e);
    reachable |= mask_of[s];
  }
  if ((reachable & full) != full) throw std::invalid_argument("exact_mssc: sets do not cover");

  struct State {
    double value = kInf;
    int from_set = -1;
    std::uint32_t prev = 0;
  };
  std::vector<State> dp(full + 1);
  dp[0].value = 0;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    if (dp[mask].value == kInf || mask == full) continue;
    double pending = element_count - __builtin_popcount(mask);
    for (int s = 0; s < S; ++s) {
      std::uint32_t nm = mask | mask_of[s];
      if (nm == mask) continue;
      double v = dp[mask].value + pending;
      if (v < dp[nm].value - 1e-12) dp[nm] = {v, s, mask};
    }
  }
  ExactMsscResult out;
  out.value = dp[full].value;
  std::uint32_t mask = full;
  while (mask != 0) {
    out.order.push_back(dp[mask].from_set);
    mask = dp[mask].prev;
  }
  std::reverse(out.order.begin(), out.order.end());
  return out;
}

struct ExactUflResult {
  double value = kInf;
  std::vector<int> open;
  std::vector<int> assignment;
};

// Uncapacitated facility location (latency ignored) by subset enumeration.
// With cardinality >= 0, at most that many facilities may open.
inline ExactUflResult exact_ufl(const Instance& inst, int cardinality = -1,
                                ExactLimits limits = {}) {
  if (inst.n > limits.max_ufl_facilities)
    throw std::invalid_argument("exact_ufl: facility count over enumeration limit");
  ExactUflResult best;
  for (std::uint32_t mask = 1; mask < (1u << inst.n); ++mask) {
    if (cardinality >= 0 && __builtin_popcount(mask) > cardinality) continue;
    double total = 0;
    std::vector<int> assign(inst.m, -1);
    for (int i = 0; i < inst.n; ++i)
      if (mask & (1u << i)) total += inst.f(i);
    bool ok = true;
    for (int j = 0; j < inst.m && ok; ++j) {
      double bc = kInf;
      for (int i = 0; i < inst.n; ++i)
        if ((mask & (1u << i)) && inst.c(i, j) < bc) {
          bc = inst.c(i, j);
          assign[j] = i;
        }
      if (bc == kInf)
        ok = false;
      else
        total += bc;
    }
    if (ok && total < best.value - 1e-12) {
      best.value = total;
      best.open.clear();
      for (int i = 0; i < inst.n; ++i)
        if (mask & (1u << i)) best.open.push_back(i);
      best.assignment = assign;
    }
  }
  if (best.value == kInf) throw std::runtime_error("exact_ufl: no feasible solution");
  return best;
}

}  // namespace mlufl
