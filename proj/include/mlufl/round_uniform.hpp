#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mlufl/instance.hpp"
#include "mlufl/relaxations.hpp"
#include "mlufl/rng.hpp"

namespace mlufl {

// ---------------------------------------------------------------------------
// Spread lemma: turn a capacity-k fractional schedule into a capacity-1 one.
// Pairs (i,t) are listed by time and grouped into unit bundles of y-weight,
// splitting a pair across two bundles when necessary; bundle l becomes slot l.
// Facility and connection mass are preserved exactly, latency grows by at
// most the factor k.

struct SpreadResult {
  UniformFrac out;
  double facility_in = 0, facility_out = 0;
  double connection_in = 0, connection_out = 0;
  double latency_in = 0, latency_out = 0;
  int k = 1;
};

inline SpreadResult spread_schedule(const Instance& inst, const UniformFrac& in, int k) {
  if (k < 1) throw std::invalid_argument("spread_schedule: k must be >= 1");
  const int n = in.n, m = in.m;
  for (int t = 1; t <= in.T; ++t) {
    double cap = 0;
    for (int i = 0; i < n; ++i) cap += in.yv(i, t);
    if (cap > k + 1e-7) throw std::invalid_argument("spread_schedule: slot capacity above k");
  }
  for (int j = 0; j < m; ++j) {
    double cov = 0;
    for (int i = 0; i < n; ++i)
      for (int t = 1; t <= in.T; ++t) cov += in.xv(i, j, t);
    if (cov < 1 - 1e-7) throw std::invalid_argument("spread_schedule: client not covered");
  }

  double total_y = 0;
  for (double v : in.y) total_y += v;
  const int T0 = std::max(1, static_cast<int>(std::ceil(total_y - 1e-9)));

  SpreadResult res;
  res.k = k;
  res.out.n = n;
  res.out.m = m;
  res.out.T = T0;
  res.out.k = 1;
  res.out.x.assign(static_cast<std::size_t>(n) * m * T0, 0.0);
  res.out.y.assign(static_cast<std::size_t>(n) * T0, 0.0);

  int slot = 1;
  double room = 1.0;  // y-weight still fitting in the current slot
  for (int t = 1; t <= in.T; ++t) {
    for (int i = 0; i < n; ++i) {
      double yw = in.yv(i, t);
      if (yw <= 0) continue;
      std::vector<double> xw(m);
      for (int j = 0; j < m; ++j) xw[j] = in.xv(i, j, t);
      while (yw > 1e-15) {
        double take = std::min(yw, room);
        res.out.yv(i, slot) += take;
        for (int j = 0; j < m; ++j) {
          // keep each copy's x-weight within its y-weight
          double xt = std::min(xw[j], take);
          if (yw - take <= 1e-15) xt = xw[j];  // last copy takes the remainder
          xt = std::min(xt, take);
          res.out.xv(i, j, slot) += xt;
          xw[j] -= xt;
        }
        yw -= take;
        room -= take;
        if (room <= 1e-12 && slot < T0) {
          slot += 1;
          room = 1.0;
        }
      }
    }
  }

  for (int i = 0; i < n; ++i)
    for (int t = 1; t <= in.T; ++t) res.facility_in += inst.f(i) * in.yv(i, t);
  for (int i = 0; i < n; ++i)
    for (int t = 1; t <= T0; ++t) res.facility_out += inst.f(i) * res.out.yv(i, t);
  for (int j = 0; j < m; ++j) {
    res.connection_in += in.Cstar(inst, j);
    res.connection_out += res.out.Cstar(inst, j);
    res.latency_in += in.Lstar(j);
    res.latency_out += res.out.Lstar(j);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Facility schedule: positions 1..T with at most one facility each (k in the
// multi-route variant), plus per-client (facility, slot) picks.

struct Schedule {
  std::vector<std::vector<int>> slots;            // slot -> facilities (1-based outside)
  std::vector<std::pair<int, int>> client_pick;   // (facility, slot)

  Solution to_solution(const Instance& inst) const {
    Solution sol;
    std::vector<char> open(inst.n, 0);
    int k = std::max(1, inst.route_count);
    sol.routes.assign(k, {});
    for (std::size_t s = 0; s < slots.size(); ++s)
      for (std::size_t a = 0; a < slots[s].size(); ++a) {
        int i = slots[s][a];
        if (open[i]) continue;
        open[i] = 1;
        sol.open_set.push_back(i);
        sol.routes[a % k].push_back(i);
      }
    sol.assignment.resize(client_pick.size());
    for (std::size_t j = 0; j < client_pick.size(); ++j)
      sol.assignment[j] = client_pick[j].first;
    return sol;
  }
};

// ---------------------------------------------------------------------------
// Randomized rounding for uniform instances with arbitrary costs: open (i,t)
// pairs independently, fall back to the cheapest close pair, then spread the
// overfull slots. Never fails; the pre-spread per-client guarantee and the
// spread factor K are both reported.

struct UniformGeneralResult {
  Solution sol;
  Schedule schedule;
  int K = 1;
  std::vector<double> pre_cost;    // per client: C_j + L_j before spreading
  std::vector<double> pre_bound;   // 2 (C*_j + L*_j)
  std::vector<int> final_slot;     // after spreading
  bool cert_ok = true;
  double chain_slack = 0;          // max(pre_cost - pre_bound)
};

inline UniformGeneralResult round_uniform_general(const Instance& inst,
                                                  const UniformFrac& frac_in,
                                                  std::uint64_t seed) {
  const int n = frac_in.n, m = frac_in.m, T = frac_in.T;
  UniformFrac frac = frac_in;
  // normalize: unit assignment mass per client, y as the x-envelope
  for (int j = 0; j < m; ++j) {
    double cov = 0;
    for (int i = 0; i < n; ++i)
      for (int t = 1; t <= T; ++t) cov += frac.xv(i, j, t);
    if (cov < 1e-9) throw std::invalid_argument("round_uniform_general: client uncovered");
    for (int i = 0; i < n; ++i)
      for (int t = 1; t <= T; ++t) frac.xv(i, j, t) /= cov;
  }
  for (int i = 0; i < n; ++i)
    for (int t = 1; t <= T; ++t) {
      double mx = 0;
      for (int j = 0; j < m; ++j) mx = std::max(mx, frac.xv(i, j, t));
      frac.yv(i, t) = mx;
    }

  UniformGeneralResult res;
  std::vector<double> Cs(m), Ls(m);
  for (int j = 0; j < m; ++j) {
    Cs[j] = frac.Cstar(inst, j);
    Ls[j] = frac.Lstar(j);
  }

  Rng rng(Rng::derive(seed, 0x0411f));
  std::vector<char> Y(static_cast<std::size_t>(n) * (T + 1), 0);
  auto yset = [&](int i, int t) -> char& { return Y[static_cast<std::size_t>(i) * (T + 1) + t]; };
  const double boost = 4 * std::log(std::max(m, 2));
  for (int i = 0; i < n; ++i)
    for (int t = 1; t <= T; ++t)
      if (frac.yv(i, t) > 0 && rng.uniform() < std::min(boost * frac.yv(i, t), 1.0))
        yset(i, t) = 1;

  res.pre_cost.resize(m);
  res.pre_bound.resize(m);
  std::vector<std::pair<int, int>> pick(m, {-1, -1});
  for (int j = 0; j < m; ++j) {
    const double radius = 2 * (Cs[j] + Ls[j]);
    res.pre_bound[j] = radius;
    int fallback = -1;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(inst.c(i, j)) || inst.c(i, j) + 1 > radius + 1e-9) continue;
      if (fallback < 0 || inst.f(i) < inst.f(fallback) - 1e-12 ||
          (inst.f(i) < inst.f(fallback) + 1e-12 && i < fallback))
        fallback = i;
    }
    if (fallback < 0) throw std::runtime_error("round_uniform_general: empty close set");
    // open the cheap close facility at slot 1 if nothing close was opened
    bool any = false;
    for (int i = 0; i < n && !any; ++i)
      for (int t = 1; t <= T && !any; ++t)
        if (yset(i, t) && std::isfinite(inst.c(i, j)) && inst.c(i, j) + t <= radius + 1e-9)
          any = true;
    if (!any) yset(fallback, 1) = 1;
    double bestv = kInf;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(inst.c(i, j))) continue;
      for (int t = 1; t <= T; ++t)
        if (yset(i, t) && inst.c(i, j) + t <= radius + 1e-9 && inst.c(i, j) + t < bestv - 1e-12) {
          bestv = inst.c(i, j) + t;
          pick[j] = {i, t};
        }
    }
    res.pre_cost[j] = bestv;
    if (bestv > radius + 1e-6) res.cert_ok = false;
    res.chain_slack = std::max(res.chain_slack, bestv - radius);
  }

  int K = 1;
  for (int t = 1; t <= T; ++t) {
    int cnt = 0;
    for (int i = 0; i < n; ++i) cnt += yset(i, t);
    K = std::max(K, cnt);
  }
  res.K = K;

  // integer spread: pairs in (t, i) order, one slot each; slot <= K * t
  std::vector<std::vector<int>> slot_of(n, std::vector<int>(T + 1, 0));
  int slot = 0;
  for (int t = 1; t <= T; ++t)
    for (int i = 0; i < n; ++i)
      if (yset(i, t)) {
        slot += 1;
        slot_of[i][t] = slot;
        if (slot > K * t + 1e-9) res.cert_ok = false;
      }
  res.schedule.slots.assign(slot, {});
  for (int t = 1; t <= T; ++t)
    for (int i = 0; i < n; ++i)
      if (yset(i, t)) res.schedule.slots[slot_of[i][t] - 1].push_back(i);
  res.final_slot.resize(m);
  res.schedule.client_pick.resize(m);
  for (int j = 0; j < m; ++j) {
    auto [i, t] = pick[j];
    res.final_slot[j] = slot_of[i][t];
    res.schedule.client_pick[j] = {i, slot_of[i][t]};
  }
  res.sol = res.schedule.to_solution(inst);
  return res;
}

// ---------------------------------------------------------------------------
// Greedy min-sum set cover: repeatedly pick the set covering the most
// uncovered elements (ties by index); sets that never contribute go last.

inline std::vector<int> greedy_mssc(const std::vector<std::vector<int>>& sets,
                                    int element_count) {
  const int S = static_cast<int>(sets.size());
  std::vector<char> covered(element_count, 0);
  std::vector<char> placed(S, 0);
  std::vector<int> order;
  int covered_count = 0;
  while (covered_count < element_count) {
    int best = -1, best_gain = 0;
    for (int s = 0; s < S; ++s) {
      if (placed[s]) continue;
      int gain = 0;
      for (int e : sets[s])
        if (!covered[e]) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = s;
      }
    }
    if (best < 0) break;  // remaining elements not coverable
    placed[best] = 1;
    order.push_back(best);
    for (int e : sets[best])
      if (!covered[e]) {
        covered[e] = 1;
        ++covered_count;
      }
  }
  for (int s = 0; s < S; ++s)
    if (!placed[s]) order.push_back(s);
  return order;
}

// ---------------------------------------------------------------------------
// Zero-facility-cost rounding: filter to close facilities, rescale, spread,
// and order facilities as a min-sum set cover instance (set of facility i =
// clients whose close set contains i). The connection certificate is hard;
// the latency ratio against the filtering chain is recorded, not asserted.

struct ZfcResult {
  Solution sol;
  Schedule schedule;
  std::vector<int> order;          // facility ordering
  std::vector<int> position;       // per facility, 1-based slot
  double latency = 0;              // sum of client slots
  double chain_bound = 0;          // (4/alpha) ceil(1/alpha) sum L*_j
  bool chain_exceeded = false;
  double conn_slack = 0;           // max over clients of c - C*/(1-alpha)
  bool conn_ok = true;
  double spread_latency = 0;       // fractional latency after filtering + spreading
};

inline ZfcResult round_zfc(const Instance& inst, const UniformFrac& frac, double alpha) {
  if (!(alpha > 0) || !(alpha < 1)) throw std::invalid_argument("round_zfc: alpha in (0,1)");
  for (int i = 0; i < inst.n; ++i)
    if (inst.f(i) != 0) throw std::invalid_argument("round_zfc: facility costs must be zero");
  const int n = frac.n, m = frac.m, T = frac.T;

  std::vector<double> Cs(m), Ls(m);
  std::vector<std::vector<int>> near(m);
  std::vector<std::vector<int>> set_of(n);
  for (int j = 0; j < m; ++j) {
    Cs[j] = frac.Cstar(inst, j);
    Ls[j] = frac.Lstar(j);
    for (int i = 0; i < n; ++i)
      if (std::isfinite(inst.c(i, j)) && inst.c(i, j) <= Cs[j] / (1 - alpha) + 1e-9) {
        near[j].push_back(i);
        set_of[i].push_back(j);
      }
    if (near[j].empty()) throw std::runtime_error("round_zfc: empty close set");
  }

  // filtering + rescaling, then capacity-ceil(1/alpha) spread; the spread
  // image is the set-cover relaxation the ordering is measured against
  UniformFrac hat;
  hat.n = n;
  hat.m = m;
  hat.T = T;
  hat.x.assign(static_cast<std::size_t>(n) * m * T, 0.0);
  hat.y.assign(static_cast<std::size_t>(n) * T, 0.0);
  for (int i = 0; i < n; ++i)
    for (int t = 1; t <= T; ++t) hat.yv(i, t) = frac.yv(i, t) / alpha;
  for (int j = 0; j < m; ++j)
    for (int i : near[j]) {
      double cum = 0;
      for (int t = 1; t <= T; ++t) {
        double v = frac.xv(i, j, t) / alpha;
        cum += v;
        hat.xv(i, j, t) = v;
      }
      (void)cum;
    }
  // clip per-client mass at one, dropping the latest fractions first
  for (int j = 0; j < m; ++j) {
    double cum = 0;
    for (int t = 1; t <= T; ++t)
      for (int i = 0; i < n; ++i) {
        double v = hat.xv(i, j, t);
        if (v <= 0) continue;
        if (cum + v > 1.0) v = std::max(0.0, 1.0 - cum);
        hat.xv(i, j, t) = v;
        cum += v;
      }
  }
  const int cap = static_cast<int>(std::ceil(1.0 / alpha - 1e-12));
  auto spread = spread_schedule(inst, hat, cap);
  ZfcResult res;
  res.spread_latency = spread.latency_out;

  res.order = greedy_mssc(set_of, m);
  res.position.assign(n, 0);
  for (std::size_t a = 0; a < res.order.size(); ++a)
    res.position[res.order[a]] = static_cast<int>(a) + 1;

  res.schedule.slots.assign(res.order.size(), {});
  for (std::size_t a = 0; a < res.order.size(); ++a) res.schedule.slots[a] = {res.order[a]};
  res.schedule.client_pick.resize(m);
  res.chain_bound = 0;
  for (int j = 0; j < m; ++j) {
    int best = -1;
    for (int i : near[j])
      if (best < 0 || res.position[i] < res.position[best]) best = i;
    res.schedule.client_pick[j] = {best, res.position[best]};
    res.latency += res.position[best];
    res.chain_bound += Ls[j];
    double slack = inst.c(best, j) - Cs[j] / (1 - alpha);
    res.conn_slack = std::max(res.conn_slack, slack);
    if (slack > 1e-6) res.conn_ok = false;
  }
  res.chain_bound *= (4.0 / alpha) * cap;
  res.chain_exceeded = res.latency > res.chain_bound + 1e-9;
  res.sol = res.schedule.to_solution(inst);
  return res;
}

// ---------------------------------------------------------------------------
// Deterministic filter-and-cluster rounding for plain facility location with
// metric connection costs. Certifies opening cost <= (1/beta) * LP opening
// mass and per-client connection <= 3/(1-beta) * C*_j.

struct UflResult {
  std::vector<int> open;
  std::vector<int> assignment;
  double facility_cost = 0;
  double facility_bound = 0;
  std::vector<double> connection, connection_bound;
  bool ok(double tol = 1e-6) const {
    if (facility_cost > facility_bound + tol) return false;
    for (std::size_t j = 0; j < connection.size(); ++j)
      if (connection[j] > connection_bound[j] + tol) return false;
    return true;
  }
};

inline UflResult round_ufl(const Instance& inst, const std::vector<std::vector<double>>& x,
                           const std::vector<double>& y, double beta) {
  if (!(beta > 0) || !(beta < 1)) throw std::invalid_argument("round_ufl: beta in (0,1)");
  const int n = inst.n, m = inst.m;
  std::vector<double> Cs(m);
  std::vector<std::vector<int>> near(m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i)
      if (std::isfinite(inst.c(i, j))) Cs[j] += inst.c(i, j) * x[i][j];
    for (int i = 0; i < n; ++i)
      if (std::isfinite(inst.c(i, j)) && inst.c(i, j) <= Cs[j] / (1 - beta) + 1e-9)
        near[j].push_back(i);
    if (near[j].empty()) throw std::runtime_error("round_ufl: empty filtered set");
  }

  UflResult res;
  res.assignment.assign(m, -1);
  std::vector<int> by_key(m);
  for (int j = 0; j < m; ++j) by_key[j] = j;
  std::sort(by_key.begin(), by_key.end(), [&](int a, int b) {
    if (Cs[a] != Cs[b]) return Cs[a] < Cs[b];
    return a < b;
  });
  std::vector<char> clustered(m, 0), in_near(n, 0);
  double fac_mass = 0;
  for (int i = 0; i < n; ++i) fac_mass += inst.f(i) * y[i];
  res.facility_bound = fac_mass / beta;

  for (int jj : by_key) {
    if (clustered[jj]) continue;
    int pick = -1;
    for (int i : near[jj])
      if (pick < 0 || inst.f(i) < inst.f(pick) - 1e-12 ||
          (inst.f(i) < inst.f(pick) + 1e-12 && i < pick))
        pick = i;
    res.open.push_back(pick);
    res.facility_cost += inst.f(pick);
    std::fill(in_near.begin(), in_near.end(), 0);
    for (int i : near[jj]) in_near[i] = 1;
    for (int kcl = 0; kcl < m; ++kcl) {
      if (clustered[kcl]) continue;
      bool inter = false;
      for (int i : near[kcl])
        if (in_near[i]) {
          inter = true;
          break;
        }
      if (inter) {
        clustered[kcl] = 1;
        res.assignment[kcl] = pick;
      }
    }
  }
  res.connection.resize(m);
  res.connection_bound.resize(m);
  for (int j = 0; j < m; ++j) {
    res.connection[j] = inst.c(res.assignment[j], j);
    res.connection_bound[j] = 3.0 / (1 - beta) * Cs[j];
  }
  return res;
}

// ---------------------------------------------------------------------------
// Combiner for metric uniform instances: carry the zero-cost schedule over to
// the plain facility-location solution by mapping every scheduled facility to
// its nearest opened one, compacting positions.

struct CombineResult {
  Solution sol;
  std::vector<int> kappa;               // per opened facility (instance ids), 1-based
  std::vector<double> conn, conn_bound;  // c_{s1 j} + 2 c_{s2 j}
  std::vector<int> pos, pos_bound;       // kappa(phi(j)) vs pi(sigma2(j))
  bool ok() const {
    for (std::size_t j = 0; j < conn.size(); ++j)
      if (conn[j] > conn_bound[j] + 1e-6 || pos[j] > pos_bound[j]) return false;
    return true;
  }
};

inline CombineResult combine_metric_uniform(const Instance& inst, const UflResult& ufl,
                                            const ZfcResult& zfc) {
  if (!inst.has_cext())
    throw std::invalid_argument("combine_metric_uniform: needs the connection metric");
  const int m = inst.m;
  auto fac_dist = [&](int a, int b) { return inst.cdist(a, b); };

  std::vector<int> mu(inst.n, -1);
  for (int i = 0; i < inst.n; ++i) {
    for (int i1 : ufl.open)
      if (mu[i] < 0 || fac_dist(i, i1) < fac_dist(i, mu[i]) - 1e-12 ||
          (fac_dist(i, i1) < fac_dist(i, mu[i]) + 1e-12 && i1 < mu[i]))
        mu[i] = i1;
  }

  // earliest carried-over position per opened facility; only facilities the
  // schedule actually serves clients from are carried over
  std::vector<char> used(inst.n, 0);
  for (int j = 0; j < m; ++j) used[zfc.schedule.client_pick[j].first] = 1;
  std::vector<int> minpos(inst.n, 0);
  for (int i2 = 0; i2 < inst.n; ++i2) {
    if (!used[i2] || zfc.position[i2] == 0) continue;
    int tgt = mu[i2];
    if (minpos[tgt] == 0 || zfc.position[i2] < minpos[tgt]) minpos[tgt] = zfc.position[i2];
  }
  std::vector<int> opened;
  for (int i = 0; i < inst.n; ++i)
    if (minpos[i] > 0) opened.push_back(i);
  std::sort(opened.begin(), opened.end(), [&](int a, int b) {
    if (minpos[a] != minpos[b]) return minpos[a] < minpos[b];
    return a < b;
  });

  CombineResult res;
  res.kappa.assign(inst.n, 0);
  for (std::size_t a = 0; a < opened.size(); ++a)
    res.kappa[opened[a]] = static_cast<int>(a) + 1;

  res.sol.open_set = opened;
  res.sol.routes = {opened};
  res.sol.assignment.resize(m);
  res.conn.resize(m);
  res.conn_bound.resize(m);
  res.pos.resize(m);
  res.pos_bound.resize(m);
  for (int j = 0; j < m; ++j) {
    int s2 = zfc.schedule.client_pick[j].first;
    int phi = mu[s2];
    res.sol.assignment[j] = phi;
    res.conn[j] = inst.c(phi, j);
    res.conn_bound[j] = inst.c(ufl.assignment[j], j) + 2 * inst.c(s2, j);
    res.pos[j] = res.kappa[phi];
    res.pos_bound[j] = zfc.position[s2];
  }
  return res;
}

}  // namespace mlufl
