#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mlufl {

// ---------------------------------------------------------------------------
// Sparse LP model with named variable blocks (minimization).

struct LpModel {
  enum class Sense { LE, GE, EQ };

  struct Var {
    std::string block;
    std::array<int, 3> sub;
    double obj;
  };
  struct Row {
    std::vector<std::pair<int, double>> coef;
    Sense sense = Sense::LE;
    double rhs = 0;
    std::string tag;
  };

  std::vector<Var> vars;
  std::vector<Row> rows;

  static std::string key(const std::string& block, std::array<int, 3> sub) {
    std::string k = block;
    for (int s : sub) {
      k.push_back('/');
      k += std::to_string(s);
    }
    return k;
  }

  int add_var(const std::string& block, std::array<int, 3> sub, double obj) {
    std::string k = key(block, sub);
    if (index_.count(k)) throw std::invalid_argument("duplicate variable " + k);
    int col = static_cast<int>(vars.size());
    vars.push_back({block, sub, obj});
    index_.emplace(std::move(k), col);
    return col;
  }

  // Column index, or -1 when the variable was never created.
  int var(const std::string& block, std::array<int, 3> sub) const {
    auto it = index_.find(key(block, sub));
    return it == index_.end() ? -1 : it->second;
  }

  int add_row(std::vector<std::pair<int, double>> coef, Sense sense, double rhs,
              std::string tag = {}) {
    for (auto& [c, v] : coef)
      if (c < 0 || c >= static_cast<int>(vars.size()))
        throw std::invalid_argument("row references unknown column");
    rows.push_back({std::move(coef), sense, rhs, std::move(tag)});
    return static_cast<int>(rows.size()) - 1;
  }

  std::size_t nonzeros() const {
    std::size_t nz = 0;
    for (const auto& r : rows) nz += r.coef.size();
    return nz;
  }

  // Readable LP text dump for debugging.
  std::string dump_lp() const {
    std::ostringstream os;
    os << "min:";
    for (std::size_t c = 0; c < vars.size(); ++c)
      if (vars[c].obj != 0) os << ' ' << (vars[c].obj >= 0 ? "+" : "") << vars[c].obj << ' '
                               << key(vars[c].block, vars[c].sub);
    os << ";\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      os << (rows[r].tag.empty() ? "row" + std::to_string(r) : rows[r].tag) << ":";
      for (auto [c, v] : rows[r].coef)
        os << ' ' << (v >= 0 ? "+" : "") << v << ' ' << key(vars[c].block, vars[c].sub);
      os << (rows[r].sense == Sense::LE ? " <= " : rows[r].sense == Sense::GE ? " >= " : " = ")
         << rows[r].rhs << ";\n";
    }
    return os.str();
  }

 private:
  std::unordered_map<std::string, int> index_;
};

struct LpSolution {
  enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
  Status status = Status::IterationLimit;
  std::vector<double> x;
  double objective = 0;
  std::vector<double> dual;  // one per row, signs match the original senses
  double max_violation = 0;  // primal feasibility residual
  double duality_gap = 0;
  double cs_residual = 0;  // complementary slackness residual
  int iterations = 0;

  double value(const LpModel& model, const std::string& block, std::array<int, 3> sub) const {
    int c = model.var(block, sub);
    return c < 0 ? 0.0 : x[c];
  }
};

// ---------------------------------------------------------------------------
// Dense-tableau two-phase primal simplex. Deterministic: Dantzig pricing with
// lowest-index tie-breaks, falling back to Bland's rule after a stall so
// cycling cannot occur.

inline LpSolution solve_lp(const LpModel& model, int max_iters = 200000) {
  const int R = static_cast<int>(model.rows.size());
  const int NS = static_cast<int>(model.vars.size());
  const double eps = 1e-8;  // entering / pivot threshold

  // Normalized rows: rhs >= 0.
  std::vector<double> rhs(R);
  std::vector<int> flip(R, 1);
  std::vector<LpModel::Sense> sense(R);
  for (int r = 0; r < R; ++r) {
    rhs[r] = model.rows[r].rhs;
    sense[r] = model.rows[r].sense;
    if (rhs[r] < 0) {
      flip[r] = -1;
      rhs[r] = -rhs[r];
      if (sense[r] == LpModel::Sense::LE)
        sense[r] = LpModel::Sense::GE;
      else if (sense[r] == LpModel::Sense::GE)
        sense[r] = LpModel::Sense::LE;
    }
  }

  // Column layout: structural | logical (slack/surplus) | artificial.
  std::vector<int> slack_col(R, -1), art_col(R, -1);
  int ncols = NS;
  for (int r = 0; r < R; ++r)
    if (sense[r] != LpModel::Sense::EQ) slack_col[r] = ncols++;
  for (int r = 0; r < R; ++r)
    if (sense[r] != LpModel::Sense::LE) art_col[r] = ncols++;

  const int W = ncols + 1;  // + rhs
  // rows 0..R-1: constraints; row R: phase-2 objective; row R+1: phase-1.
  std::vector<double> T(static_cast<std::size_t>(R + 2) * W, 0.0);
  auto at = [&](int r, int c) -> double& { return T[static_cast<std::size_t>(r) * W + c]; };

  for (int r = 0; r < R; ++r) {
    for (auto [c, v] : model.rows[r].coef) at(r, c) += flip[r] * v;
    if (slack_col[r] >= 0) at(r, slack_col[r]) = (sense[r] == LpModel::Sense::LE) ? 1.0 : -1.0;
    if (art_col[r] >= 0) at(r, art_col[r]) = 1.0;
    at(r, ncols) = rhs[r];
  }
  for (int c = 0; c < NS; ++c) at(R, c) = model.vars[c].obj;

  std::vector<int> basis(R);
  for (int r = 0; r < R; ++r) {
    basis[r] = (sense[r] == LpModel::Sense::LE) ? slack_col[r] : art_col[r];
  }
  // Phase-1 costs: one per artificial; price out the initial (artificial) basis.
  bool any_art = false;
  for (int r = 0; r < R; ++r)
    if (art_col[r] >= 0) {
      any_art = true;
      at(R + 1, art_col[r]) = 1.0;
    }
  for (int r = 0; r < R; ++r)
    if (art_col[r] >= 0)
      for (int c = 0; c < W; ++c) at(R + 1, c) -= at(r, c);

  LpSolution out;
  auto pivot = [&](int pr, int pc) {
    double piv = at(pr, pc);
    double inv = 1.0 / piv;
    double* prow = &at(pr, 0);
    for (int c = 0; c < W; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r < R + 2; ++r) {
      if (r == pr) continue;
      double factor = at(r, pc);
      if (factor == 0.0) continue;
      double* row = &at(r, 0);
      for (int c = 0; c < W; ++c) row[c] -= factor * prow[c];
      row[pc] = 0.0;
    }
    basis[pr] = pc;
  };

  std::vector<char> locked(ncols, 0);  // artificials barred from entering in phase 2
  int iters = 0;
  bool bland = false;

  auto run_phase = [&](int obj_row, int col_limit) -> int {
    // returns 0 = optimal, 1 = unbounded, 2 = iteration limit
    double last_obj = at(obj_row, ncols);
    int stall = 0;
    while (true) {
      if (++iters > max_iters) return 2;
      int enter = -1;
      if (!bland) {
        double best = -eps;
        for (int c = 0; c < col_limit; ++c)
          if (!locked[c] && at(obj_row, c) < best) {
            best = at(obj_row, c);
            enter = c;
          }
      } else {
        for (int c = 0; c < col_limit; ++c)
          if (!locked[c] && at(obj_row, c) < -eps) {
            enter = c;
            break;
          }
      }
      if (enter < 0) return 0;
      int leave = -1;
      double best_ratio = 0;
      for (int r = 0; r < R; ++r) {
        double a = at(r, enter);
        if (a > eps) {
          double ratio = at(r, ncols) / a;
          if (leave < 0 || ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && basis[r] < basis[leave]))
            leave = r, best_ratio = ratio;
        }
      }
      if (leave < 0) return 1;
      pivot(leave, enter);
      double cur = at(obj_row, ncols);
      if (cur < last_obj - 1e-12) {
        last_obj = cur;
        stall = 0;
      } else if (++stall > 64) {
        bland = true;  // degeneracy guard
      }
    }
  };

  if (any_art) {
    int rc = run_phase(R + 1, ncols);
    if (rc == 2) {
      out.status = LpSolution::Status::IterationLimit;
      out.iterations = iters;
      return out;
    }
    double p1 = -at(R + 1, ncols);  // objective rows carry -value in rhs
    if (p1 > 1e-7) {
      out.status = LpSolution::Status::Infeasible;
      out.iterations = iters;
      return out;
    }
    // Drive remaining artificials out of the basis where possible.
    std::vector<char> is_art(ncols, 0);
    for (int r = 0; r < R; ++r)
      if (art_col[r] >= 0) is_art[art_col[r]] = 1;
    for (int r = 0; r < R; ++r) {
      if (art_col[r] < 0 || basis[r] != art_col[r]) continue;
      int target = -1;
      for (int c = 0; c < ncols; ++c)
        if (!is_art[c] && std::abs(at(r, c)) > 1e-7) {
          target = c;
          break;
        }
      if (target >= 0) pivot(r, target);
      // else: redundant row; artificial stays basic at zero
    }
    for (int c = 0; c < ncols; ++c)
      if (is_art[c]) locked[c] = 1;
  }

  bland = false;
  int rc = run_phase(R, ncols);
  out.iterations = iters;
  if (rc == 1) {
    out.status = LpSolution::Status::Unbounded;
    return out;
  }
  if (rc == 2) {
    out.status = LpSolution::Status::IterationLimit;
    return out;
  }

  out.status = LpSolution::Status::Optimal;
  out.x.assign(NS, 0.0);
  for (int r = 0; r < R; ++r)
    if (basis[r] < NS) out.x[basis[r]] = at(r, ncols);
  out.objective = -at(R, ncols);

  // Duals from the reduced costs of logical/artificial columns.
  out.dual.assign(R, 0.0);
  for (int r = 0; r < R; ++r) {
    double pi;
    if (slack_col[r] >= 0) {
      double red = at(R, slack_col[r]);
      pi = (sense[r] == LpModel::Sense::LE) ? -red : red;
    } else {
      pi = -at(R, art_col[r]);
    }
    out.dual[r] = flip[r] * pi;
  }

  // Residuals against the original model.
  double viol = 0, cs = 0, dual_obj = 0;
  for (int r = 0; r < R; ++r) {
    double lhs = 0;
    for (auto [c, v] : model.rows[r].coef) lhs += v * out.x[c];
    double slack = 0;
    switch (model.rows[r].sense) {
      case LpModel::Sense::LE:
        viol = std::max(viol, lhs - model.rows[r].rhs);
        slack = model.rows[r].rhs - lhs;
        break;
      case LpModel::Sense::GE:
        viol = std::max(viol, model.rows[r].rhs - lhs);
        slack = lhs - model.rows[r].rhs;
        break;
      case LpModel::Sense::EQ:
        viol = std::max(viol, std::abs(lhs - model.rows[r].rhs));
        break;
    }
    cs = std::max(cs, std::abs(slack * out.dual[r]));
    dual_obj += out.dual[r] * model.rows[r].rhs;
  }
  for (int c = 0; c < NS; ++c) viol = std::max(viol, -out.x[c]);
  out.max_violation = viol;
  out.cs_residual = cs;
  out.duality_gap = std::abs(out.objective - dual_obj);
  return out;
}

// ---------------------------------------------------------------------------
// Max flow (Edmonds-Karp) with a source-side min cut. The returned value is
// the recomputed capacity of that cut, so value and cut always agree exactly.

struct FlowNetwork {
  struct Arc {
    int from, to;
    double cap;
  };
  int node_count = 0;
  std::vector<Arc> arcs;
  int source = 0, sink = 0;

  void add_arc(int u, int v, double cap) { arcs.push_back({u, v, cap}); }
  void add_undirected(int u, int v, double cap) {
    arcs.push_back({u, v, cap});
    arcs.push_back({v, u, cap});
  }
};

struct MaxFlowResult {
  double value = 0;
  std::vector<char> source_side;
};

inline MaxFlowResult max_flow(const FlowNetwork& net) {
  const int N = net.node_count;
  struct Edge {
    int to;
    double cap;
    int rev;
  };
  std::vector<std::vector<Edge>> g(N);
  for (const auto& a : net.arcs) {
    if (a.cap < 0) throw std::invalid_argument("max_flow: negative capacity");
    g[a.from].push_back({a.to, a.cap, static_cast<int>(g[a.to].size())});
    g[a.to].push_back({a.from, 0.0, static_cast<int>(g[a.from].size()) - 1});
  }
  const double eps = 1e-12;
  std::vector<int> prev_node(N), prev_edge(N);
  while (true) {
    std::fill(prev_node.begin(), prev_node.end(), -1);
    std::queue<int> q;
    q.push(net.source);
    prev_node[net.source] = net.source;
    while (!q.empty() && prev_node[net.sink] < 0) {
      int u = q.front();
      q.pop();
      for (std::size_t e = 0; e < g[u].size(); ++e) {
        const auto& ed = g[u][e];
        if (ed.cap > eps && prev_node[ed.to] < 0) {
          prev_node[ed.to] = u;
          prev_edge[ed.to] = static_cast<int>(e);
          q.push(ed.to);
        }
      }
    }
    if (prev_node[net.sink] < 0) break;
    double aug = std::numeric_limits<double>::infinity();
    for (int v = net.sink; v != net.source; v = prev_node[v])
      aug = std::min(aug, g[prev_node[v]][prev_edge[v]].cap);
    for (int v = net.sink; v != net.source; v = prev_node[v]) {
      auto& ed = g[prev_node[v]][prev_edge[v]];
      ed.cap -= aug;
      g[v][ed.rev].cap += aug;
    }
  }
  MaxFlowResult out;
  out.source_side.assign(N, 0);
  std::queue<int> q;
  q.push(net.source);
  out.source_side[net.source] = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (const auto& ed : g[u])
      if (ed.cap > eps && !out.source_side[ed.to]) {
        out.source_side[ed.to] = 1;
        q.push(ed.to);
      }
  }
  for (const auto& a : net.arcs)
    if (out.source_side[a.from] && !out.source_side[a.to]) out.value += a.cap;
  return out;
}

// ---------------------------------------------------------------------------
// Cutting-plane driver. The oracle inspects the current optimum and returns
// violated rows (possibly from several constraint families); rows are
// deduplicated by tag. Terminates when the oracle is satisfied.

using SeparationOracle =
    std::function<std::vector<LpModel::Row>(const LpModel&, const LpSolution&)>;

struct CutLog {
  int rounds = 0;
  int cuts_added = 0;
  std::vector<std::string> tags;
};

inline LpSolution cutting_plane_solve(LpModel& model, const SeparationOracle& oracle,
                                      int max_rounds = 200, CutLog* log = nullptr) {
  std::unordered_set<std::string> seen;
  for (const auto& r : model.rows)
    if (!r.tag.empty()) seen.insert(r.tag);
  LpSolution sol;
  for (int round = 1; round <= max_rounds; ++round) {
    sol = solve_lp(model);
    if (log) log->rounds = round;
    if (sol.status != LpSolution::Status::Optimal) return sol;
    auto cuts = oracle(model, sol);
    int added = 0;
    for (auto& row : cuts) {
      if (!row.tag.empty()) {
        if (seen.count(row.tag)) continue;
        seen.insert(row.tag);
      }
      if (log) {
        ++log->cuts_added;
        log->tags.push_back(row.tag);
      }
      model.rows.push_back(std::move(row));
      ++added;
    }
    if (added == 0) return sol;
  }
  sol.status = LpSolution::Status::IterationLimit;
  return sol;
}

}  // namespace mlufl
