#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlufl/lp.hpp"
#include "mlufl/metric.hpp"
#include "mlufl/timescale.hpp"
#include "mlufl/treekit.hpp"

namespace mlufl {

// ---------------------------------------------------------------------------
// Exact rooted orienteering by exhaustive search. Path mode: DFS over simple
// paths with budget and optimistic-reward pruning. Tree mode: enumerate node
// subsets, cost = MST weight (no doubling).

struct OrienteeringProblem {
  const Metric* metric = nullptr;
  std::vector<double> reward;  // per node, or per group when groups nonempty
  std::vector<std::vector<int>> groups;
  double budget = 0;
  bool tree_mode = false;
  int exhaustive_limit = 10;
};

struct OrienteeringColumn {
  std::vector<int> nodes;  // visit order from the root (root included)
  double length = 0;
  double reward = 0;
  std::vector<int> covered;  // node ids, or group ids in group mode
};

inline OrienteeringColumn orienteering_exact(const OrienteeringProblem& prob) {
  const Metric& met = *prob.metric;
  if (met.size - 1 > prob.exhaustive_limit)
    throw std::invalid_argument("orienteering_exact: node count over exhaustive limit");
  const bool grouped = !prob.groups.empty();
  const int G = grouped ? static_cast<int>(prob.groups.size()) : 0;
  std::vector<std::uint32_t> gmask(met.size, 0);
  if (grouped)
    for (int g = 0; g < G; ++g)
      for (int u : prob.groups[g]) gmask[u] |= (1u << g);

  double total_reward = 0;
  for (double w : prob.reward) total_reward += std::max(0.0, w);

  OrienteeringColumn best;
  best.nodes = {met.root};
  best.reward = grouped ? 0.0 : (met.root < static_cast<int>(prob.reward.size())
                                     ? prob.reward[met.root]
                                     : 0.0);
  if (grouped && gmask[met.root]) {
    for (int g = 0; g < G; ++g)
      if (gmask[met.root] >> g & 1) best.reward += prob.reward[g];
  }
  double root_reward = best.reward;

  if (!prob.tree_mode) {
    std::vector<int> path{met.root};
    std::vector<char> used(met.size, 0);
    used[met.root] = 1;
    std::uint32_t covered_groups = grouped ? gmask[met.root] : 0;

    auto record = [&](double len, double reward, std::uint32_t cov) {
      if (reward > best.reward + 1e-12) {
        best.nodes = path;
        best.length = len;
        best.reward = reward;
        best.covered.clear();
        if (grouped) {
          for (int g = 0; g < G; ++g)
            if (cov >> g & 1) best.covered.push_back(g);
        } else {
          for (std::size_t a = 1; a < path.size(); ++a) best.covered.push_back(path[a]);
        }
      }
    };
    record(0, best.reward, covered_groups);

    // `avail` = optimistic uncollected reward; prunes hopeless branches
    auto dfs = [&](auto&& self, int cur, double len, double reward, double avail) -> void {
      if (reward + avail <= best.reward + 1e-12) return;
      for (int nxt = 0; nxt < met.size; ++nxt) {
        if (used[nxt]) continue;
        double nl = len + met(cur, nxt);
        if (nl > prob.budget + 1e-9) continue;
        double gain = 0;
        std::uint32_t added = 0;
        if (grouped) {
          added = gmask[nxt] & ~covered_groups;
          for (int g = 0; g < G; ++g)
            if (added >> g & 1) gain += prob.reward[g];
          covered_groups |= added;
        } else {
          gain = prob.reward[nxt];
        }
        used[nxt] = 1;
        path.push_back(nxt);
        record(nl, reward + gain, covered_groups);
        self(self, nxt, nl, reward + gain, avail - std::max(0.0, gain));
        path.pop_back();
        used[nxt] = 0;
        covered_groups &= ~added;
      }
    };
    dfs(dfs, met.root, 0, best.reward, total_reward - std::max(0.0, best.reward));
    if (!grouped) {
      best.covered.clear();
      for (std::size_t a = 1; a < best.nodes.size(); ++a) best.covered.push_back(best.nodes[a]);
    }
    return best;
  }

  // tree mode: subsets of non-root nodes, MST cost
  std::vector<int> others;
  for (int u = 0; u < met.size; ++u)
    if (u != met.root) others.push_back(u);
  const int Q = static_cast<int>(others.size());
  for (std::uint32_t S = 0; S < (1u << Q); ++S) {
    std::vector<int> nodes{met.root};
    for (int a = 0; a < Q; ++a)
      if (S >> a & 1) nodes.push_back(others[a]);
    WeightedTree tree = mst(met, nodes);
    double len = tree.weight();
    if (len > prob.budget + 1e-9) continue;
    double reward = 0;
    std::vector<int> covered;
    if (grouped) {
      std::uint32_t cov = 0;
      for (int u : nodes) cov |= gmask[u];
      for (int g = 0; g < G; ++g)
        if (cov >> g & 1) {
          reward += prob.reward[g];
          covered.push_back(g);
        }
    } else {
      for (int u : nodes) reward += prob.reward[u];
      for (int u : nodes)
        if (u != met.root) covered.push_back(u);
    }
    if (reward > best.reward + 1e-12) {
      best.length = len;
      best.reward = reward;
      best.covered = covered;
      best.nodes = euler_tour(tree, met).nodes;
    }
  }
  (void)root_reward;
  return best;
}

// ---------------------------------------------------------------------------
// Column generation for the path/tree-variable relaxation of minimum latency
// (and its group variant). The restricted master is re-solved after each
// pricing sweep; pricing is the exact orienteering search above, so on
// convergence the LP optimum is exact.

struct ColgenOptions {
  double a = 1;  // simultaneous-route capacity per time
  double b = 1;  // length slack factor for columns
  bool tree_mode = false;
  std::vector<std::vector<int>> groups;  // group-coverage mode when nonempty
  int max_columns = 4000;
  int max_rounds = 200;
  int exhaustive_limit = 10;
};

struct Lp2Column {
  std::vector<int> nodes;    // from root
  double length = 0;
  int time_index = 0;        // grid slot the column serves
  std::vector<int> covered;  // client offsets (or group ids)
};

struct ColgenResult {
  enum class Status { Exact, Partial };
  Status status = Status::Partial;
  double value = 0;
  double lower_bound = 0;
  std::vector<Lp2Column> columns;
  std::vector<double> column_value;  // z per column
  std::vector<double> x;             // [j*T + ti]
  std::vector<int> clients;          // metric ids, parallel to j
  TimeScale ts;
  double max_price_violation = 0;  // re-pricing residual after convergence
  int rounds = 0;

  int T() const { return ts.size(); }
  double xv(int j, int ti) const { return x[static_cast<std::size_t>(j) * T() + ti]; }
  double cum_x(int j, int ti) const {
    double s = 0;
    for (int a = 0; a <= ti; ++a) s += xv(j, a);
    return s;
  }
};

inline ColgenResult solve_ml_lp2_colgen(const Metric& metric, const TimeScale& ts,
                                        ColgenOptions opt = {}) {
  ColgenResult res;
  res.ts = ts;
  const int T = ts.size();
  const bool grouped = !opt.groups.empty();
  for (int u = 0; u < metric.size; ++u)
    if (u != metric.root) res.clients.push_back(u);
  const int J = grouped ? static_cast<int>(opt.groups.size())
                        : static_cast<int>(res.clients.size());

  // earliest reach per demand (group: closest member)
  std::vector<double> reach(J, 0);
  for (int j = 0; j < J; ++j) {
    if (grouped) {
      double d = kInf;
      for (int u : opt.groups[j]) d = std::min(d, metric(metric.root, u));
      reach[j] = d;
    } else {
      reach[j] = metric(metric.root, res.clients[j]);
    }
  }

  LpModel master;
  for (int j = 0; j < J; ++j)
    for (int ti = 0; ti < T; ++ti)
      if (reach[j] <= opt.b * ts.times[ti] + 1e-12)
        master.add_var("x", {j, ti, 0}, ts.times[ti]);
  std::vector<int> cover_row(J), count_row(T);
  std::vector<std::vector<int>> link_row(J, std::vector<int>(T, -1));
  for (int j = 0; j < J; ++j) {
    std::vector<std::pair<int, double>> row;
    for (int ti = 0; ti < T; ++ti)
      if (int c = master.var("x", {j, ti, 0}); c >= 0) row.emplace_back(c, 1.0);
    if (row.empty()) throw std::invalid_argument("colgen: demand unreachable at any time");
    cover_row[j] = master.add_row(std::move(row), LpModel::Sense::GE, 1.0);
  }
  for (int ti = 0; ti < T; ++ti)
    count_row[ti] = master.add_row({}, LpModel::Sense::LE, opt.a);
  for (int j = 0; j < J; ++j)
    for (int ti = 0; ti < T; ++ti) {
      std::vector<std::pair<int, double>> row;
      for (int ti2 = 0; ti2 <= ti; ++ti2)
        if (int c = master.var("x", {j, ti2, 0}); c >= 0) row.emplace_back(c, -1.0);
      link_row[j][ti] = master.add_row(std::move(row), LpModel::Sense::GE, 0.0);
    }

  auto covered_of = [&](const std::vector<int>& nodes) {
    std::vector<int> cov;
    if (grouped) {
      for (int g = 0; g < J; ++g) {
        bool hit = false;
        for (int u : opt.groups[g])
          if (std::find(nodes.begin(), nodes.end(), u) != nodes.end()) {
            hit = true;
            break;
          }
        if (hit) cov.push_back(g);
      }
    } else {
      for (int a = 0; a < J; ++a)
        if (std::find(nodes.begin(), nodes.end(), res.clients[a]) != nodes.end())
          cov.push_back(a);
    }
    return cov;
  };

  auto add_column = [&](Lp2Column col) {
    int var = master.add_var("col", {static_cast<int>(res.columns.size()), 0, 0}, 0.0);
    master.rows[count_row[col.time_index]].coef.emplace_back(var, 1.0);
    for (int j : col.covered)
      master.rows[link_row[j][col.time_index]].coef.emplace_back(var, 1.0);
    res.columns.push_back(std::move(col));
  };

  // Seed: nearest-neighbour walk through every node at the top time keeps the
  // master feasible (its length is at most (size-1) * d_max <= horizon).
  {
    Lp2Column seed;
    seed.time_index = T - 1;
    std::vector<char> used(metric.size, 0);
    int cur = metric.root;
    used[cur] = 1;
    seed.nodes.push_back(cur);
    for (int step = 1; step < metric.size; ++step) {
      int pick = -1;
      for (int u = 0; u < metric.size; ++u)
        if (!used[u] && (pick < 0 || metric(cur, u) < metric(cur, pick))) pick = u;
      seed.length += metric(cur, pick);
      used[pick] = 1;
      seed.nodes.push_back(pick);
      cur = pick;
    }
    if (seed.length > opt.b * ts.horizon() + 1e-9)
      throw std::invalid_argument("colgen: horizon below spanning-walk length");
    seed.covered = covered_of(seed.nodes);
    add_column(std::move(seed));
  }

  LpSolution sol;
  auto price_all = [&](const LpSolution& s, bool add, double* worst) {
    int added = 0;
    if (worst) *worst = 0;
    for (int ti = 0; ti < T; ++ti) {
      double beta = std::max(0.0, -s.dual[count_row[ti]]);
      OrienteeringProblem op;
      op.metric = &metric;
      op.budget = opt.b * ts.times[ti];
      op.tree_mode = opt.tree_mode;
      op.exhaustive_limit = opt.exhaustive_limit;
      if (grouped) {
        op.groups = opt.groups;
        op.reward.assign(J, 0.0);
        for (int j = 0; j < J; ++j)
          op.reward[j] = std::max(0.0, s.dual[link_row[j][ti]]);
      } else {
        op.reward.assign(metric.size, 0.0);
        for (int j = 0; j < J; ++j)
          op.reward[res.clients[j]] = std::max(0.0, s.dual[link_row[j][ti]]);
      }
      auto col = orienteering_exact(op);
      double viol = col.reward - beta;
      if (worst) *worst = std::max(*worst, viol);
      if (add && viol > 1e-6) {
        Lp2Column c;
        c.nodes = col.nodes;
        c.length = col.length;
        c.time_index = ti;
        c.covered = grouped ? col.covered : covered_of(col.nodes);
        add_column(std::move(c));
        ++added;
      }
    }
    return added;
  };

  for (int round = 1; round <= opt.max_rounds; ++round) {
    res.rounds = round;
    sol = solve_lp(master);
    if (sol.status != LpSolution::Status::Optimal)
      throw std::runtime_error("colgen: master solve failed");
    if (static_cast<int>(res.columns.size()) > opt.max_columns) {
      res.status = ColgenResult::Status::Partial;
      break;
    }
    int added = price_all(sol, true, nullptr);
    if (added == 0) {
      res.status = ColgenResult::Status::Exact;
      break;
    }
    if (round == opt.max_rounds) res.status = ColgenResult::Status::Partial;
  }

  res.value = sol.objective;
  res.x.assign(static_cast<std::size_t>(J) * T, 0);
  for (int j = 0; j < J; ++j)
    for (int ti = 0; ti < T; ++ti) res.x[static_cast<std::size_t>(j) * T + ti] =
        sol.value(master, "x", {j, ti, 0});
  res.column_value.assign(res.columns.size(), 0.0);
  for (std::size_t c = 0; c < res.columns.size(); ++c)
    res.column_value[c] = sol.value(master, "col", {static_cast<int>(c), 0, 0});

  // Lagrangian bracket: lifting each beta to the best pricing reward restores
  // dual feasibility, giving a valid lower bound even on a partial run.
  double worst = 0;
  price_all(sol, false, &worst);
  res.max_price_violation = worst;
  double lb = 0;
  for (int j = 0; j < J; ++j) lb += std::max(0.0, sol.dual[cover_row[j]]);
  for (int ti = 0; ti < T; ++ti) {
    double beta = std::max(0.0, -sol.dual[count_row[ti]]);
    OrienteeringProblem op;
    op.metric = &metric;
    op.budget = opt.b * ts.times[ti];
    op.tree_mode = opt.tree_mode;
    op.exhaustive_limit = opt.exhaustive_limit;
    if (grouped) {
      op.groups = opt.groups;
      op.reward.assign(J, 0.0);
      for (int j = 0; j < J; ++j) op.reward[j] = std::max(0.0, sol.dual[link_row[j][ti]]);
    } else {
      op.reward.assign(metric.size, 0.0);
      for (int j = 0; j < J; ++j)
        op.reward[res.clients[j]] = std::max(0.0, sol.dual[link_row[j][ti]]);
    }
    lb -= opt.a * std::max(beta, orienteering_exact(op).reward);
  }
  res.lower_bound = res.status == ColgenResult::Status::Exact ? res.value : lb;
  return res;
}

}  // namespace mlufl
