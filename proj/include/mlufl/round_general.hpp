#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlufl/instance.hpp"
#include "mlufl/relaxations.hpp"
#include "mlufl/treekit.hpp"

namespace mlufl {

// Phased rounding of the time-indexed relaxation for general instances.
// Each phase embeds the time metric into a fresh random tree, lifts the
// fractional edge mass (plus opening-cost dummy leaves), draws batches of
// randomized subtrees until one passes the facility- and tree-mass budget
// tests, opens what the accepted subtree touches and tours it.

struct RoundGeneralParams {
  enum class Mode { Plain, Scaled, Growth };
  Mode mode = Mode::Scaled;
  double growth_p = 1.0;
  std::uint64_t seed = 1;
  int retries = 5;
};

struct PhaseDiagnostics {
  double t_phase = 0;
  int eligible = 0;        // |D_l|
  int batch_accepted = -1;
  double tree_mass = 0;    // kept non-dummy tree weight
  double tour_length = 0;
  int opened = 0;
};

struct RoundGeneralResult {
  Solution sol;
  bool success = false;
  int attempts = 0;
  std::string failure;
  std::vector<PhaseDiagnostics> phases;
  std::vector<double> Cstar, Lstar, tau;  // per client, from the input fraction
  double connection_slack = 0;            // max over clients of c - 4 C*

  std::string phases_csv() const {
    std::ostringstream os;
    os << "phase,t,eligible,batch,tree_mass,tour_length,opened\n";
    for (std::size_t l = 0; l < phases.size(); ++l)
      os << l << ',' << phases[l].t_phase << ',' << phases[l].eligible << ','
         << phases[l].batch_accepted << ',' << phases[l].tree_mass << ','
         << phases[l].tour_length << ',' << phases[l].opened << '\n';
    return os.str();
  }
};

namespace detail {

// Cap at one and push the subtree maximum upward so values never increase
// from root to leaf; dominates the input, so cut coverage is preserved.
inline void monotone_lift(const WeightedTree& tree, std::vector<double>& z) {
  std::vector<int> order{tree.root};
  for (std::size_t h = 0; h < order.size(); ++h)
    for (int c : tree.nodes[order[h]].children) order.push_back(c);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    for (int c : tree.nodes[v].children) z[v] = std::max(z[v], z[c]);
    z[v] = std::min(z[v], 1.0);
  }
  z[tree.root] = 1.0;
}

}  // namespace detail

inline RoundGeneralResult round_general(const Instance& inst, const FractionalMlufl& frac,
                                        const RoundGeneralParams& params) {
  RoundGeneralResult res;
  const int n = inst.n, m = inst.m;
  const TimeScale& ts = frac.ts;
  const int T = ts.size();
  auto feas = frac.check(inst);
  if (!feas.ok(1e-6)) throw std::invalid_argument("round_general: infeasible fraction");

  // closeness sets and 2/3-mass times
  res.Cstar.resize(m);
  res.Lstar.resize(m);
  res.tau.resize(m);
  std::vector<std::vector<int>> near(m);
  for (int j = 0; j < m; ++j) {
    res.Cstar[j] = frac.Cstar(inst, j);
    res.Lstar[j] = frac.Lstar(j);
    for (int i = 0; i < n; ++i)
      if (std::isfinite(inst.c(i, j)) && inst.c(i, j) <= 4 * res.Cstar[j] + 1e-9)
        near[j].push_back(i);
    double cum = 0;
    res.tau[j] = ts.horizon();
    for (int ti = 0; ti < T && cum < 2.0 / 3 - 1e-9; ++ti) {
      for (int i : near[j]) cum += frac.xv(i, j, ti);
      if (cum >= 2.0 / 3 - 1e-9) res.tau[j] = ts.times[ti];
    }
  }
  double tau_max = 1;
  for (int j = 0; j < m; ++j) tau_max = std::max(tau_max, res.tau[j]);
  const double log2m = std::log2(std::max(m, 2));
  const double log2n = std::max(std::log2(std::max(n, 2)), 1.0);
  const double lbar = params.mode == RoundGeneralParams::Mode::Plain ? 1.0 : frac.Lbar(inst);
  const double p = params.mode == RoundGeneralParams::Mode::Growth
                       ? std::max(params.growth_p, 1.0)
                       : 1.0;

  int phase_count;
  if (params.mode == RoundGeneralParams::Mode::Growth)
    phase_count = static_cast<int>(
        std::ceil(p * std::log2(std::exp2(1.0 / p) * tau_max / lbar) + 4 * log2m));
  else
    phase_count =
        static_cast<int>(std::ceil(std::log2(2 * tau_max / lbar) + 4 * log2m));
  phase_count = std::max(phase_count, 1);

  auto phase_time = [&](int l) {
    if (params.mode == RoundGeneralParams::Mode::Plain)
      return std::min(std::exp2(l), ts.horizon());
    return ts.snap(lbar * std::exp2(l / p));
  };

  const int batches = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(m, 2)))));
  const int runs_per_batch = std::max(1, static_cast<int>(std::ceil(192 * log2n)));
  const Metric fmetric = inst.facility_metric();
  const int k = std::max(1, inst.route_count);

  for (int attempt = 1; attempt <= std::max(1, params.retries); ++attempt) {
    res.attempts = attempt;
    res.phases.clear();
    std::uint64_t aseed = Rng::derive(params.seed, 0xa77e, attempt);

    std::vector<int> assign(m, -1);
    std::vector<char> open(n, 0);
    std::vector<int> open_order;                       // single-route order
    std::vector<std::vector<std::vector<int>>> segs;   // per phase, per chunk (k-route)
    bool failed = false;

    for (int l = 0; l <= phase_count && !failed; ++l) {
      PhaseDiagnostics diag;
      double tl = phase_time(l);
      diag.t_phase = tl;
      int gi = ts.snap_index(tl);

      WeightedTree tree = frt_embed(fmetric, Rng::derive(aseed, 0xf2ee, l));
      std::vector<int> dummy(n, -1);
      for (int i = 0; i < n; ++i)
        dummy[i] = tree.add_node(tree.leaf_node[i], inst.f(i), -1);

      // lift edge mass onto the tree
      std::vector<double> zmass(tree.nodes.size(), 0.0);
      for (std::size_t e = 0; e < frac.edges.size(); ++e) {
        double zval = frac.zv(static_cast<int>(e), gi);
        if (zval <= 1e-12) continue;
        auto [u, v] = frac.edges[e];
        for (int node : tree.path_edges(tree.leaf_node[u], tree.leaf_node[v]))
          zmass[node] += zval;
      }
      std::vector<char> is_dummy(tree.nodes.size(), 0);
      for (int i = 0; i < n; ++i) is_dummy[dummy[i]] = 1;
      double tree_mass_frac = 0;
      for (int v = 0; v < static_cast<int>(tree.nodes.size()); ++v)
        if (!is_dummy[v] && tree.nodes[v].parent >= 0)
          tree_mass_frac += tree.nodes[v].parent_weight * zmass[v];
      double fac_mass = 0;
      for (int i = 0; i < n; ++i) {
        zmass[dummy[i]] = frac.cum_y(i, gi);
        fac_mass += inst.f(i) * zmass[dummy[i]];
      }
      detail::monotone_lift(tree, zmass);

      // eligible clients this phase
      std::vector<int> eligible;
      for (int j = 0; j < m; ++j)
        if (res.tau[j] <= tl + 1e-9) eligible.push_back(j);
      diag.eligible = static_cast<int>(eligible.size());

      const double fac_budget = 40.0 * runs_per_batch * fac_mass + 1e-9;
      const double mass_budget = 40.0 * runs_per_batch * tree_mass_frac + 1e-9;
      std::vector<char> kept;
      for (int b = 0; b < batches; ++b) {
        std::vector<char> uni(tree.nodes.size(), 0);
        for (int rrun = 0; rrun < runs_per_batch; ++rrun) {
          auto one = gkr_round(tree, zmass,
                               Rng::derive(aseed, 0x6b2 + l, b * runs_per_batch + rrun));
          for (std::size_t v = 0; v < uni.size(); ++v) uni[v] |= one[v];
        }
        double fcost = 0, dcost = 0;
        for (int i = 0; i < n; ++i)
          if (uni[dummy[i]]) fcost += inst.f(i);
        for (int v = 0; v < static_cast<int>(tree.nodes.size()); ++v)
          if (uni[v] && !is_dummy[v] && tree.nodes[v].parent >= 0)
            dcost += tree.nodes[v].parent_weight;
        if (fcost <= fac_budget && dcost <= mass_budget) {
          kept = std::move(uni);
          diag.batch_accepted = b;
          diag.tree_mass = dcost;
          break;
        }
      }
      if (kept.empty()) {
        failed = true;
        res.failure = "no batch passed the budget tests in phase " + std::to_string(l);
        break;
      }

      // open facilities whose dummy edge was kept; tour them in tree order
      std::vector<char> visit(n, 0);
      int newly = 0;
      for (int i = 0; i < n; ++i)
        if (kept[dummy[i]]) {
          visit[i] = 1;
          if (!open[i]) {
            open[i] = 1;
            ++newly;
          }
        }
      diag.opened = newly;
      Tour tour = euler_tour(tree, fmetric, TourDirection::Forward, &visit);
      diag.tour_length = tour.closed_length;

      std::vector<int> phase_new;  // facilities first visited in this phase
      for (std::size_t a = 1; a < tour.nodes.size(); ++a) {
        int i = tour.nodes[a];
        if (std::find(open_order.begin(), open_order.end(), i) == open_order.end()) {
          open_order.push_back(i);
          phase_new.push_back(i);
        }
      }
      if (k > 1) {
        // split the phase walk into <= k chunks of balanced length
        std::vector<std::vector<int>> chunks(1);
        double limit = tour.closed_length / k, acc = 0;
        int prev = inst.root();
        for (int i : phase_new) {
          acc += inst.d(prev, i);
          chunks.back().push_back(i);
          if (acc >= limit - 1e-12 && static_cast<int>(chunks.size()) < k) {
            chunks.push_back({});
            acc = 0;
            prev = inst.root();
          } else {
            prev = i;
          }
        }
        if (chunks.back().empty()) chunks.pop_back();
        segs.push_back(std::move(chunks));
      }

      // connect eligible clients to an open close facility
      for (int j : eligible) {
        if (assign[j] >= 0) continue;
        int pick = -1;
        for (int i : near[j])
          if (open[i] && (pick < 0 || inst.c(i, j) < inst.c(pick, j))) pick = i;
        if (pick >= 0) assign[j] = pick;
      }
      res.phases.push_back(diag);
    }

    if (failed) continue;
    bool all_connected = true;
    for (int j = 0; j < m; ++j)
      if (assign[j] < 0) all_connected = false;
    if (!all_connected) {
      res.failure = "client left unconnected after all phases";
      continue;
    }

    res.sol.assignment = assign;
    res.sol.open_set.clear();
    for (int i : open_order) res.sol.open_set.push_back(i);
    if (k == 1) {
      res.sol.routes = {open_order};
    } else {
      res.sol.routes.assign(k, {});
      for (const auto& phase_chunks : segs)
        for (std::size_t s = 0; s < phase_chunks.size(); ++s)
          for (int i : phase_chunks[s])
            res.sol.routes[s % k].push_back(i);
    }
    res.connection_slack = 0;
    for (int j = 0; j < m; ++j)
      res.connection_slack =
          std::max(res.connection_slack, inst.c(assign[j], j) - 4 * res.Cstar[j]);
    res.success = true;
    return res;
  }
  return res;
}

// End-to-end driver: grid, relaxation, rounding, evaluation.
struct GeneralDriverResult {
  RoundGeneralResult round;
  double v_lp = 0;
  CostBreakdown cost;
  double ratio = 0;
};

inline GeneralDriverResult round_general_lp_driver(const Instance& inst, double eps,
                                                   RoundGeneralParams params = {}) {
  GeneralDriverResult out;
  auto relax = solve_mlufl_relaxation(inst, eps);
  if (relax.status != LpSolution::Status::Optimal)
    throw std::runtime_error("round_general_lp_driver: relaxation not solved");
  out.v_lp = relax.value;
  out.round = round_general(inst, relax.frac, params);
  if (out.round.success) {
    out.cost = evaluate(inst, out.round.sol);
    out.ratio = out.v_lp > 0 ? out.cost.total / out.v_lp : 1.0;
  }
  return out;
}

}  // namespace mlufl
