#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlufl/instance.hpp"
#include "mlufl/lp.hpp"
#include "mlufl/metric.hpp"
#include "mlufl/timescale.hpp"

namespace mlufl {

// Edge list over node ids 0..N-1 (all unordered pairs, u < v).
inline std::vector<std::pair<int, int>> all_pairs(int N) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < N; ++u)
    for (int v = u + 1; v < N; ++v) e.emplace_back(u, v);
  return e;
}

// ---------------------------------------------------------------------------
// Fractional solution of the time-indexed relaxation over a grid.

struct FractionalMlufl {
  TimeScale ts;
  int n = 0, m = 0, k = 1;
  std::vector<std::pair<int, int>> edges;  // over F u {r}, root = n
  std::vector<double> x;                   // [(i*m + j)*T + ti]
  std::vector<double> y;                   // [i*T + ti]
  std::vector<double> z;                   // [e*T + ti]

  int T() const { return ts.size(); }
  double& xv(int i, int j, int ti) { return x[(static_cast<std::size_t>(i) * m + j) * T() + ti]; }
  double xv(int i, int j, int ti) const {
    return x[(static_cast<std::size_t>(i) * m + j) * T() + ti];
  }
  double& yv(int i, int ti) { return y[static_cast<std::size_t>(i) * T() + ti]; }
  double yv(int i, int ti) const { return y[static_cast<std::size_t>(i) * T() + ti]; }
  double& zv(int e, int ti) { return z[static_cast<std::size_t>(e) * T() + ti]; }
  double zv(int e, int ti) const { return z[static_cast<std::size_t>(e) * T() + ti]; }

  // Cumulative assignment mass of (i, j) up to grid index ti.
  double cum_x(int i, int j, int ti) const {
    double s = 0;
    for (int a = 0; a <= ti; ++a) s += xv(i, j, a);
    return s;
  }
  double cum_y(int i, int ti) const {
    double s = 0;
    for (int a = 0; a <= ti; ++a) s += yv(i, a);
    return s;
  }

  double Cstar(const Instance& inst, int j) const {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(inst.c(i, j))) continue;
      for (int ti = 0; ti < T(); ++ti) s += inst.c(i, j) * xv(i, j, ti);
    }
    return s;
  }
  double Lstar(int j) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int ti = 0; ti < T(); ++ti) s += ts.times[ti] * xv(i, j, ti);
    return s;
  }
  double Lcost(const Instance& inst, int j) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int ti = 0; ti < T(); ++ti) s += inst.latency(ts.times[ti]) * xv(i, j, ti);
    return s;
  }
  // Weighted mean fractional latency (weights default to 1).
  double Lbar(const Instance& inst) const {
    double num = 0, den = 0;
    for (int j = 0; j < m; ++j) {
      num += inst.lambda(j) * Lstar(j);
      den += inst.lambda(j);
    }
    return den > 0 ? num / den : 1.0;
  }
  double facility_mass_cost(const Instance& inst) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int ti = 0; ti < T(); ++ti) s += inst.f(i) * yv(i, ti);
    return s;
  }

  struct FeasReport {
    double coverage_deficit = 0;
    double link_violation = 0;
    double length_violation = 0;
    double radius_violation = 0;
    bool ok(double tol) const {
      return coverage_deficit <= tol && link_violation <= tol && length_violation <= tol &&
             radius_violation <= tol;
    }
  };

  FeasReport check(const Instance& inst) const {
    FeasReport rep;
    for (int j = 0; j < m; ++j) {
      double cov = 0;
      for (int i = 0; i < n; ++i)
        for (int ti = 0; ti < T(); ++ti) cov += xv(i, j, ti);
      rep.coverage_deficit = std::max(rep.coverage_deficit, 1.0 - cov);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        for (int ti = 0; ti < T(); ++ti)
          rep.link_violation = std::max(rep.link_violation, xv(i, j, ti) - yv(i, ti));
    for (int ti = 0; ti < T(); ++ti) {
      double len = 0;
      for (std::size_t e = 0; e < edges.size(); ++e)
        len += inst.d(edges[e].first, edges[e].second) * zv(static_cast<int>(e), ti);
      rep.length_violation = std::max(rep.length_violation, len - k * ts.times[ti]);
    }
    for (int i = 0; i < n; ++i)
      for (int ti = 0; ti < T(); ++ti)
        if (inst.d(inst.root(), i) > ts.times[ti] + 1e-9)
          rep.radius_violation = std::max(rep.radius_violation, yv(i, ti));
    return rep;
  }

  // Worst shortfall of the connectivity requirement, enumerated over every
  // facility subset; usable up to n ~ 12. Independent of the separation path.
  double worst_cut_violation(const Instance& inst) const {
    if (n > 20) throw std::invalid_argument("worst_cut_violation: n too large");
    double worst = 0;
    std::vector<double> zcut(T());
    for (std::uint32_t S = 1; S < (1u << n); ++S) {
      for (int ti = 0; ti < T(); ++ti) zcut[ti] = 0;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        auto [u, v] = edges[e];
        bool iu = u < n && (S >> u & 1), iv = v < n && (S >> v & 1);
        if (iu != iv)
          for (int ti = 0; ti < T(); ++ti) zcut[ti] += zv(static_cast<int>(e), ti);
      }
      for (int j = 0; j < m; ++j) {
        double dem = 0;  // running cumulative demand inside S
        for (int ti = 0; ti < T(); ++ti) {
          for (int i = 0; i < n; ++i)
            if (S >> i & 1) dem += xv(i, j, ti);
          worst = std::max(worst, dem - zcut[ti]);
        }
      }
    }
    return worst;
  }

  // Embed an integer solution on the grid (exact when activation times lie
  // within the horizon).
  static FractionalMlufl from_solution(const Instance& inst, const TimeScale& ts,
                                       const Solution& sol) {
    FractionalMlufl f;
    f.ts = ts;
    f.n = inst.n;
    f.m = inst.m;
    f.k = std::max<int>(1, static_cast<int>(sol.routes.size()));
    f.edges = all_pairs(inst.n + 1);
    f.x.assign(static_cast<std::size_t>(f.n) * f.m * f.T(), 0);
    f.y.assign(static_cast<std::size_t>(f.n) * f.T(), 0);
    f.z.assign(f.edges.size() * f.T(), 0);
    std::vector<std::vector<int>> eid(inst.n + 1, std::vector<int>(inst.n + 1, -1));
    for (std::size_t e = 0; e < f.edges.size(); ++e)
      eid[f.edges[e].first][f.edges[e].second] = eid[f.edges[e].second][f.edges[e].first] =
          static_cast<int>(e);

    std::vector<double> activation(inst.n, kInf);
    for (const auto& route : sol.routes) {
      int prev = inst.root();
      double t = 0;
      for (int i : route) {
        t += inst.d(prev, i);
        activation[i] = std::min(activation[i], t);
        // edge traversed once the leg completes
        int e = eid[prev][i];
        if (e >= 0)
          for (int ti = 0; ti < f.T(); ++ti)
            if (ts.times[ti] >= t - 1e-9) f.zv(e, ti) = 1.0;
        prev = i;
      }
    }
    for (int i : sol.open_set) f.yv(i, ts.snap_index(activation[i])) = 1.0;
    for (int j = 0; j < inst.m; ++j) {
      int i = sol.assignment[j];
      f.xv(i, j, ts.snap_index(activation[i])) = 1.0;
    }
    return f;
  }
};

// ---------------------------------------------------------------------------
// Builder for the time-indexed relaxation. Linking rows (x <= y) and the
// exponential connectivity family are both generated lazily by the returned
// oracle; max-flow separation handles connectivity.

struct MluflLpOptions {
  bool latency_objective = true;   // include latency term in the objective
  double norm_cap = kInf;          // when finite: cap sum lambda_j t^p x <= cap^p
  double norm_p = 2.0;
  bool static_links = false;       // emit all x <= y rows up front
};

struct BuiltLp {
  LpModel model;
  SeparationOracle oracle;
  TimeScale ts;
};

inline BuiltLp build_mlufl_lp(const Instance& inst, const TimeScale& ts,
                              MluflLpOptions opt = {}) {
  BuiltLp built;
  built.ts = ts;
  LpModel& lp = built.model;
  const int T = ts.size();
  const int r = inst.root();
  const int k = inst.route_count;
  auto edges = all_pairs(inst.n + 1);

  for (int i = 0; i < inst.n; ++i)
    for (int ti = 0; ti < T; ++ti)
      if (inst.d(r, i) <= ts.times[ti] + 1e-12)  // unreachable by t stays closed
        lp.add_var("y", {i, ti, 0}, inst.f(i));
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j) {
      if (!std::isfinite(inst.c(i, j))) continue;  // forbidden pair
      for (int ti = 0; ti < T; ++ti) {
        if (lp.var("y", {i, ti, 0}) < 0) continue;
        double coef = inst.c(i, j);
        if (opt.latency_objective) coef += inst.lambda(j) * inst.latency(ts.times[ti]);
        lp.add_var("x", {i, j, ti}, coef);
      }
    }
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int ti = 0; ti < T; ++ti) lp.add_var("z", {static_cast<int>(e), ti, 0}, 0.0);

  for (int j = 0; j < inst.m; ++j) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < inst.n; ++i)
      for (int ti = 0; ti < T; ++ti)
        if (int c = lp.var("x", {i, j, ti}); c >= 0) row.emplace_back(c, 1.0);
    if (row.empty()) throw std::invalid_argument("client has no usable facility");
    lp.add_row(std::move(row), LpModel::Sense::GE, 1.0, "cover/" + std::to_string(j));
  }
  for (int ti = 0; ti < T; ++ti) {
    std::vector<std::pair<int, double>> row;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      double w = inst.d(edges[e].first, edges[e].second);
      if (w > 0) row.emplace_back(lp.var("z", {static_cast<int>(e), ti, 0}), w);
    }
    lp.add_row(std::move(row), LpModel::Sense::LE, k * ts.times[ti],
               "len/" + std::to_string(ti));
  }
  if (std::isfinite(opt.norm_cap)) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.m; ++j)
        for (int ti = 0; ti < T; ++ti)
          if (int c = lp.var("x", {i, j, ti}); c >= 0)
            row.emplace_back(c, inst.lambda(j) * std::pow(ts.times[ti], opt.norm_p));
    lp.add_row(std::move(row), LpModel::Sense::LE, std::pow(opt.norm_cap, opt.norm_p),
               "normcap");
  }
  if (opt.static_links) {
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.m; ++j)
        for (int ti = 0; ti < T; ++ti)
          if (int cx = lp.var("x", {i, j, ti}); cx >= 0)
            lp.add_row({{cx, 1.0}, {lp.var("y", {i, ti, 0}), -1.0}}, LpModel::Sense::LE, 0.0,
                       "link/" + std::to_string(i) + "/" + std::to_string(j) + "/" +
                           std::to_string(ti));
  }

  const Instance* pinst = &inst;
  TimeScale tsc = ts;
  bool static_links = opt.static_links;
  built.oracle = [pinst, tsc, edges, static_links](const LpModel& lp,
                                                   const LpSolution& sol) {
    std::vector<LpModel::Row> cuts;
    const Instance& inst = *pinst;
    const int T = tsc.size();
    const double viol_tol = 1e-6;

    if (!static_links) {
      for (int i = 0; i < inst.n; ++i)
        for (int j = 0; j < inst.m; ++j)
          for (int ti = 0; ti < T; ++ti) {
            int cx = lp.var("x", {i, j, ti});
            if (cx < 0) continue;
            int cy = lp.var("y", {i, ti, 0});
            if (sol.x[cx] > sol.x[cy] + viol_tol)
              cuts.push_back({{{cx, 1.0}, {cy, -1.0}},
                              LpModel::Sense::LE,
                              0.0,
                              "link/" + std::to_string(i) + "/" + std::to_string(j) + "/" +
                                  std::to_string(ti)});
          }
    }

    // connectivity separation by min cut, one network per (client, time);
    // per client only the few most violated cuts enter, keeping the master lean
    for (int j = 0; j < inst.m; ++j) {
      std::vector<double> cum(inst.n, 0);
      std::vector<std::pair<double, LpModel::Row>> found;
      for (int ti = 0; ti < T; ++ti) {
        double total = 0;
        for (int i = 0; i < inst.n; ++i) {
          int cx = lp.var("x", {i, j, ti});
          if (cx >= 0) cum[i] += sol.x[cx];
          total += cum[i];
        }
        if (total < viol_tol) continue;
        FlowNetwork net;
        net.node_count = inst.n + 2;  // facilities, root, auxiliary sink
        net.source = inst.root();
        net.sink = inst.n + 1;
        for (std::size_t e = 0; e < edges.size(); ++e) {
          double zval = sol.x[lp.var("z", {static_cast<int>(e), ti, 0})];
          if (zval > 1e-12) net.add_undirected(edges[e].first, edges[e].second, zval);
        }
        for (int i = 0; i < inst.n; ++i)
          if (cum[i] > 1e-12) net.add_arc(i, net.sink, cum[i]);
        auto mf = max_flow(net);
        if (mf.value < total - viol_tol) {
          std::uint64_t mask = 0;
          std::vector<std::pair<int, double>> row;
          for (int i = 0; i < inst.n; ++i)
            if (!mf.source_side[i]) {
              mask |= (1ull << i);
              for (int ti2 = 0; ti2 <= ti; ++ti2)
                if (int cx = lp.var("x", {i, j, ti2}); cx >= 0) row.emplace_back(cx, -1.0);
            }
          if (mask == 0) continue;
          for (std::size_t e = 0; e < edges.size(); ++e) {
            auto [u, v] = edges[e];
            bool iu = u < inst.n && (mask >> u & 1), iv = v < inst.n && (mask >> v & 1);
            if (iu != iv)
              row.emplace_back(lp.var("z", {static_cast<int>(e), ti, 0}), 1.0);
          }
          std::ostringstream tag;
          tag << "cut4/" << j << '/' << ti << '/' << std::hex << mask;
          found.emplace_back(total - mf.value,
                             LpModel::Row{std::move(row), LpModel::Sense::GE, 0.0, tag.str()});
        }
      }
      std::stable_sort(found.begin(), found.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t a = 0; a < found.size() && a < 3; ++a)
        cuts.push_back(std::move(found[a].second));
    }
    return cuts;
  };
  return built;
}

// Full pipeline for the general relaxation: time grid, lazy rows, cutting
// planes, extraction.

struct RelaxationResult {
  TimeScale ts;
  FractionalMlufl frac;
  double value = 0;
  LpSolution::Status status = LpSolution::Status::IterationLimit;
  CutLog log;
};

inline RelaxationResult solve_mlufl_relaxation(const Instance& inst, double eps,
                                               MluflLpOptions opt = {},
                                               const TimeScale* grid = nullptr) {
  RelaxationResult out;
  out.ts = grid ? *grid : build_timescale(inst, eps);
  auto built = build_mlufl_lp(inst, out.ts, opt);
  LpSolution sol = cutting_plane_solve(built.model, built.oracle, 400, &out.log);
  out.status = sol.status;
  out.value = sol.objective;
  if (sol.status != LpSolution::Status::Optimal) return out;

  auto& f = out.frac;
  f.ts = out.ts;
  f.n = inst.n;
  f.m = inst.m;
  f.k = inst.route_count;
  f.edges = all_pairs(inst.n + 1);
  const int T = out.ts.size();
  f.x.assign(static_cast<std::size_t>(f.n) * f.m * T, 0);
  f.y.assign(static_cast<std::size_t>(f.n) * T, 0);
  f.z.assign(f.edges.size() * T, 0);
  for (int i = 0; i < inst.n; ++i)
    for (int ti = 0; ti < T; ++ti) f.yv(i, ti) = sol.value(built.model, "y", {i, ti, 0});
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j)
      for (int ti = 0; ti < T; ++ti) f.xv(i, j, ti) = sol.value(built.model, "x", {i, j, ti});
  for (std::size_t e = 0; e < f.edges.size(); ++e)
    for (int ti = 0; ti < T; ++ti)
      f.zv(static_cast<int>(e), ti) = sol.value(built.model, "z", {static_cast<int>(e), ti, 0});
  return out;
}

// ---------------------------------------------------------------------------
// Compact relaxation for uniform time metrics: slots 1..T, no connectivity
// rows, at most k facilities per slot.

struct UniformFrac {
  int n = 0, m = 0, T = 0, k = 1;
  std::vector<double> x;  // [(i*m + j)*T + (t-1)]
  std::vector<double> y;  // [i*T + (t-1)]

  double& xv(int i, int j, int t) { return x[(static_cast<std::size_t>(i) * m + j) * T + t - 1]; }
  double xv(int i, int j, int t) const {
    return x[(static_cast<std::size_t>(i) * m + j) * T + t - 1];
  }
  double& yv(int i, int t) { return y[static_cast<std::size_t>(i) * T + t - 1]; }
  double yv(int i, int t) const { return y[static_cast<std::size_t>(i) * T + t - 1]; }

  double Cstar(const Instance& inst, int j) const {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(inst.c(i, j))) continue;
      for (int t = 1; t <= T; ++t) s += inst.c(i, j) * xv(i, j, t);
    }
    return s;
  }
  double Lstar(int j) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int t = 1; t <= T; ++t) s += t * xv(i, j, t);
    return s;
  }
  double facility_mass_cost(const Instance& inst) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int t = 1; t <= T; ++t) s += inst.f(i) * yv(i, t);
    return s;
  }
};

inline LpModel build_uniform_lp(const Instance& inst, int slots = 0) {
  if (!inst.uniform()) throw std::invalid_argument("build_uniform_lp: instance not uniform");
  LpModel lp;
  const int k = inst.route_count;
  int T = slots > 0 ? slots : inst.n;
  if (std::isfinite(inst.route_budget))
    T = std::min<int>(T, std::max(1, static_cast<int>(inst.route_budget)));
  for (int i = 0; i < inst.n; ++i)
    for (int t = 1; t <= T; ++t) lp.add_var("y", {i, t, 0}, inst.f(i));
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j) {
      if (!std::isfinite(inst.c(i, j))) continue;
      for (int t = 1; t <= T; ++t)
        lp.add_var("x", {i, j, t}, inst.c(i, j) + inst.lambda(j) * inst.latency(t));
    }
  for (int j = 0; j < inst.m; ++j) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < inst.n; ++i)
      for (int t = 1; t <= T; ++t)
        if (int c = lp.var("x", {i, j, t}); c >= 0) row.emplace_back(c, 1.0);
    if (row.empty()) throw std::invalid_argument("client has no usable facility");
    lp.add_row(std::move(row), LpModel::Sense::GE, 1.0, "cover/" + std::to_string(j));
  }
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j)
      for (int t = 1; t <= T; ++t)
        if (int cx = lp.var("x", {i, j, t}); cx >= 0)
          lp.add_row({{cx, 1.0}, {lp.var("y", {i, t, 0}), -1.0}}, LpModel::Sense::LE, 0.0);
  for (int t = 1; t <= T; ++t) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < inst.n; ++i) row.emplace_back(lp.var("y", {i, t, 0}), 1.0);
    lp.add_row(std::move(row), LpModel::Sense::LE, k, "slot/" + std::to_string(t));
  }
  return lp;
}

struct UniformRelaxationResult {
  UniformFrac frac;
  double value = 0;
  LpSolution::Status status;
};

inline UniformRelaxationResult solve_uniform_relaxation(const Instance& inst, int slots = 0) {
  LpModel lp = build_uniform_lp(inst, slots);
  LpSolution sol = solve_lp(lp);
  UniformRelaxationResult out;
  out.status = sol.status;
  out.value = sol.objective;
  if (sol.status != LpSolution::Status::Optimal) return out;
  int T = 0;
  for (const auto& v : lp.vars)
    if (v.block == "y") T = std::max(T, v.sub[1]);
  auto& f = out.frac;
  f.n = inst.n;
  f.m = inst.m;
  f.T = T;
  f.k = inst.route_count;
  f.x.assign(static_cast<std::size_t>(f.n) * f.m * T, 0);
  f.y.assign(static_cast<std::size_t>(f.n) * T, 0);
  for (int i = 0; i < inst.n; ++i)
    for (int t = 1; t <= T; ++t) f.yv(i, t) = sol.value(lp, "y", {i, t, 0});
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.m; ++j)
      for (int t = 1; t <= T; ++t) f.xv(i, j, t) = sol.value(lp, "x", {i, j, t});
  return out;
}

// ---------------------------------------------------------------------------
// Minimum-latency relaxation over a client metric (compact form with cut
// rows separated lazily per client).

struct MlFrac {
  Metric metric;
  TimeScale ts;
  std::vector<int> clients;                // metric node ids, excludes root
  std::vector<std::pair<int, int>> edges;  // over metric nodes
  std::vector<double> x;                   // [j*T + ti], j indexes `clients`
  std::vector<double> z;                   // [e*T + ti]

  int T() const { return ts.size(); }
  double& xv(int j, int ti) { return x[static_cast<std::size_t>(j) * T() + ti]; }
  double xv(int j, int ti) const { return x[static_cast<std::size_t>(j) * T() + ti]; }
  double& zv(int e, int ti) { return z[static_cast<std::size_t>(e) * T() + ti]; }
  double zv(int e, int ti) const { return z[static_cast<std::size_t>(e) * T() + ti]; }

  double cum_x(int j, int ti) const {
    double s = 0;
    for (int a = 0; a <= ti; ++a) s += xv(j, a);
    return s;
  }
  double Lstar(int j) const {
    double s = 0;
    for (int ti = 0; ti < T(); ++ti) s += ts.times[ti] * xv(j, ti);
    return s;
  }
  // alpha-point: earliest grid time with cumulative mass >= alpha
  double tau(int j, double alpha) const {
    double s = 0;
    for (int ti = 0; ti < T(); ++ti) {
      s += xv(j, ti);
      if (s >= alpha - 1e-9) return ts.times[ti];
    }
    return ts.horizon();
  }
  double z_mass_at(int ti) const {
    double s = 0;
    for (std::size_t e = 0; e < edges.size(); ++e)
      s += metric(edges[e].first, edges[e].second) * zv(static_cast<int>(e), ti);
    return s;
  }
};

inline BuiltLp build_ml_lp1(const Metric& metric, const TimeScale& ts, int k = 1) {
  BuiltLp built;
  built.ts = ts;
  LpModel& lp = built.model;
  const int T = ts.size();
  std::vector<int> clients;
  for (int u = 0; u < metric.size; ++u)
    if (u != metric.root) clients.push_back(u);
  auto edges = all_pairs(metric.size);  // metric node ids; root participates

  for (std::size_t j = 0; j < clients.size(); ++j)
    for (int ti = 0; ti < T; ++ti)
      if (metric(metric.root, clients[j]) <= ts.times[ti] + 1e-12)
        lp.add_var("x", {static_cast<int>(j), ti, 0}, ts.times[ti]);
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int ti = 0; ti < T; ++ti) lp.add_var("z", {static_cast<int>(e), ti, 0}, 0.0);

  for (std::size_t j = 0; j < clients.size(); ++j) {
    std::vector<std::pair<int, double>> row;
    for (int ti = 0; ti < T; ++ti)
      if (int c = lp.var("x", {static_cast<int>(j), ti, 0}); c >= 0) row.emplace_back(c, 1.0);
    lp.add_row(std::move(row), LpModel::Sense::GE, 1.0, "cover/" + std::to_string(j));
  }
  for (int ti = 0; ti < T; ++ti) {
    std::vector<std::pair<int, double>> row;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      double w = metric(edges[e].first, edges[e].second);
      if (w > 0) row.emplace_back(lp.var("z", {static_cast<int>(e), ti, 0}), w);
    }
    lp.add_row(std::move(row), LpModel::Sense::LE, k * ts.times[ti],
               "len/" + std::to_string(ti));
  }

  Metric met = metric;
  TimeScale tsc = ts;
  built.oracle = [met, tsc, clients, edges](const LpModel& lp, const LpSolution& sol) {
    std::vector<LpModel::Row> cuts;
    const int T = tsc.size();
    const double viol_tol = 1e-6;
    for (std::size_t j = 0; j < clients.size(); ++j) {
      double cum = 0;
      LpModel::Row best_row;
      double best_viol = viol_tol;
      for (int ti = 0; ti < T; ++ti) {
        if (int c = lp.var("x", {static_cast<int>(j), ti, 0}); c >= 0) cum += sol.x[c];
        if (cum < viol_tol) continue;
        FlowNetwork net;
        net.node_count = met.size;
        net.source = met.root;
        net.sink = clients[j];
        for (std::size_t e = 0; e < edges.size(); ++e) {
          double zval = sol.x[lp.var("z", {static_cast<int>(e), ti, 0})];
          if (zval > 1e-12) net.add_undirected(edges[e].first, edges[e].second, zval);
        }
        auto mf = max_flow(net);
        if (mf.value < cum - best_viol) {
          std::uint64_t mask = 0;  // sink-side node set
          std::vector<std::pair<int, double>> row;
          for (int u = 0; u < met.size; ++u)
            if (!mf.source_side[u]) mask |= (1ull << u);
          for (std::size_t e = 0; e < edges.size(); ++e) {
            auto [u, v] = edges[e];
            if (((mask >> u) & 1) != ((mask >> v) & 1))
              row.emplace_back(lp.var("z", {static_cast<int>(e), ti, 0}), 1.0);
          }
          for (int ti2 = 0; ti2 <= ti; ++ti2)
            if (int c = lp.var("x", {static_cast<int>(j), ti2, 0}); c >= 0)
              row.emplace_back(c, -1.0);
          std::ostringstream tag;
          tag << "cut/" << j << '/' << ti << '/' << std::hex << mask;
          best_viol = cum - mf.value;
          best_row = {std::move(row), LpModel::Sense::GE, 0.0, tag.str()};
        }
      }
      if (!best_row.coef.empty()) cuts.push_back(std::move(best_row));
    }
    return cuts;
  };
  return built;
}

struct MlRelaxationResult {
  MlFrac frac;
  double value = 0;
  LpSolution::Status status;
  CutLog log;
};

inline MlRelaxationResult solve_ml_lp1(const Metric& metric, const TimeScale& ts, int k = 1) {
  auto built = build_ml_lp1(metric, ts, k);
  MlRelaxationResult out;
  LpSolution sol = cutting_plane_solve(built.model, built.oracle, 400, &out.log);
  out.status = sol.status;
  out.value = sol.objective;
  if (sol.status != LpSolution::Status::Optimal) return out;
  auto& f = out.frac;
  f.metric = metric;
  f.ts = ts;
  for (int u = 0; u < metric.size; ++u)
    if (u != metric.root) f.clients.push_back(u);
  f.edges = all_pairs(metric.size);
  f.x.assign(f.clients.size() * ts.size(), 0);
  f.z.assign(f.edges.size() * ts.size(), 0);
  for (std::size_t j = 0; j < f.clients.size(); ++j)
    for (int ti = 0; ti < ts.size(); ++ti)
      f.xv(static_cast<int>(j), ti) = sol.value(built.model, "x", {static_cast<int>(j), ti, 0});
  for (std::size_t e = 0; e < f.edges.size(); ++e)
    for (int ti = 0; ti < ts.size(); ++ti)
      f.zv(static_cast<int>(e), ti) =
          sol.value(built.model, "z", {static_cast<int>(e), ti, 0});
  return out;
}

}  // namespace mlufl
