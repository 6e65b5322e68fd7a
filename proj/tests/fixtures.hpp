#pragma once

// Shared small fixtures and independent brute-force oracles used only by the
// test suites. Everything here re-derives expected values by enumeration,
// independently of the library's own solution paths.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlufl/instance.hpp"
#include "mlufl/metric.hpp"

namespace fixtures {

// Two facilities a, b and two clients; opening a is expensive but both
// clients have a zero-cost close facility. Optimum: open both, activate a
// then b, total 8.
inline mlufl::Instance desk1() {
  mlufl::Instance inst;
  inst.n = 2;
  inst.m = 2;
  inst.opening_cost = {5, 0};
  inst.connection_cost = {{0, 10}, {10, 0}};
  inst.time_metric = {{0, 1, 1},   // a
                      {1, 0, 2},   // b
                      {1, 2, 0}};  // r
  return inst;
}

// Three-point latency metric: d(r,u)=1, d(r,v)=2, d(u,v)=1. Optimal visit
// order (u, v) with total latency 3.
inline mlufl::Metric desk2() {
  return mlufl::make_metric({{0, 1, 1}, {1, 0, 2}, {1, 2, 0}}, 2);
}

// Brute force over every ordered facility subset and every assignment.
inline double brute_force_mlufl(const mlufl::Instance& inst) {
  double best = mlufl::kInf;
  std::vector<int> order;
  std::vector<char> used(inst.n, 0);
  auto dfs = [&](auto&& self) -> void {
    if (!order.empty()) {
      double total = 0;
      std::vector<double> tvis(order.size(), 0);
      double t = 0;
      int prev = inst.root();
      for (std::size_t a = 0; a < order.size(); ++a) {
        t += inst.d(prev, order[a]);
        tvis[a] = t;
        prev = order[a];
        total += inst.f(order[a]);
      }
      bool ok = true;
      for (int j = 0; j < inst.m && ok; ++j) {
        double bestc = mlufl::kInf;
        for (std::size_t a = 0; a < order.size(); ++a)
          if (std::isfinite(inst.c(order[a], j)))
            bestc = std::min(bestc,
                             inst.c(order[a], j) + inst.lambda(j) * inst.latency(tvis[a]));
        if (bestc == mlufl::kInf)
          ok = false;
        else
          total += bestc;
      }
      if (ok) best = std::min(best, total);
    }
    for (int i = 0; i < inst.n; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      order.push_back(i);
      self(self);
      order.pop_back();
      used[i] = 0;
    }
  };
  dfs(dfs);
  return best;
}

// Exhaustive min-sum set cover over all set orders.
inline double brute_force_mssc(const std::vector<std::vector<int>>& sets, int elements) {
  std::vector<int> perm(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) perm[s] = static_cast<int>(s);
  double best = mlufl::kInf;
  do {
    std::vector<int> cover(elements, 0);
    int covered = 0;
    double cost = 0;
    for (std::size_t pos = 0; pos < perm.size() && covered < elements; ++pos)
      for (int e : sets[perm[pos]])
        if (!cover[e]) {
          cover[e] = 1;
          cost += static_cast<double>(pos + 1);
          ++covered;
        }
    if (covered == elements) best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace fixtures
