#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mlufl/instance.hpp"
#include "mlufl/relaxations.hpp"
#include "mlufl/treekit.hpp"

namespace mlufl {

// Greedy clustering: repeatedly take the unpicked item with the smallest key
// as a center and absorb every item within its removal radius. Deterministic,
// ties by index. Returns (centers, sigma) with sigma[item] = its center.
struct ClusterResult {
  std::vector<int> centers;
  std::vector<int> sigma;  // indexed like `items`, values are item ids
};

inline ClusterResult greedy_cluster(const std::vector<int>& items,
                                    const std::function<double(int)>& key,
                                    const std::function<double(int, int)>& dist,
                                    const std::function<double(int)>& radius) {
  ClusterResult out;
  int max_id = 0;
  for (int it : items) max_id = std::max(max_id, it);
  out.sigma.assign(max_id + 1, -1);
  std::vector<int> pending = items;
  while (!pending.empty()) {
    int center = pending[0];
    for (int it : pending)
      if (key(it) < key(center) - 1e-12 || (key(it) < key(center) + 1e-12 && it < center))
        center = it;
    out.centers.push_back(center);
    std::vector<int> rest;
    for (int it : pending) {
      if (dist(center, it) <= radius(it) + 1e-9)
        out.sigma[it] = center;
      else
        rest.push_back(it);
    }
    pending = std::move(rest);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constant-factor deterministic rounding for instances whose time metric is
// the connection metric divided by M. Works in the extended metric over
// facilities, clients and the root. Every bound the construction promises is
// recomputed and reported as a certificate.

struct RelatedPhaseCert {
  double t = 0;
  double mst_weight = 0;       // contracted spanning tree
  double tree_weight = 0;      // + intracluster edges
  double augmented_weight = 0; // + facility edges
};

struct RelatedCertificates {
  double facility_cost = 0;
  double facility_bound = 0;  // 1.5 * fractional opening mass
  std::vector<double> connection, connection_bound;  // 39 C*_j
  std::vector<double> latency, latency_bound;        // 384 L*_j
  std::vector<RelatedPhaseCert> phases;

  bool ok(double tol = 1e-6) const {
    if (facility_cost > facility_bound + tol) return false;
    for (std::size_t j = 0; j < connection.size(); ++j)
      if (connection[j] > connection_bound[j] + tol || latency[j] > latency_bound[j] + tol)
        return false;
    for (const auto& ph : phases)
      if (ph.mst_weight > 4 * ph.t + tol || ph.tree_weight > 5 * ph.t + tol ||
          ph.augmented_weight > 8 * ph.t + tol)
        return false;
    return true;
  }

  std::string csv() const {
    std::ostringstream os;
    os << "client,connection,conn_bound,latency,lat_bound\n";
    for (std::size_t j = 0; j < connection.size(); ++j)
      os << j << ',' << connection[j] << ',' << connection_bound[j] << ',' << latency[j]
         << ',' << latency_bound[j] << '\n';
    return os.str();
  }
};

struct RoundRelatedResult {
  Solution sol;
  RelatedCertificates certs;
  CostBreakdown cost;
};

inline RoundRelatedResult round_related(const Instance& inst, const FractionalMlufl& frac) {
  const double M = inst.related_factor();
  if (M <= 0 || !inst.has_cext())
    throw std::invalid_argument("round_related: instance not tagged related");
  if (!frac.check(inst).ok(1e-6))
    throw std::invalid_argument("round_related: infeasible fraction");
  const int n = inst.n, m = inst.m;
  const int R = inst.cext_root();

  // extended time metric over facilities + clients + root
  Metric dm;
  dm.size = n + m + 1;
  dm.root = R;
  dm.d.assign(dm.size, std::vector<double>(dm.size, 0));
  for (int u = 0; u < dm.size; ++u)
    for (int v = 0; v < dm.size; ++v) dm.d[u][v] = inst.cdist(u, v) / M;
  auto cx = [&](int u, int v) { return inst.cdist(u, v); };
  auto cnode = [&](int j) { return n + j; };

  std::vector<double> Cs(m), Ls(m), tau(m);
  std::vector<std::vector<int>> near(m);
  for (int j = 0; j < m; ++j) {
    Cs[j] = frac.Cstar(inst, j);
    Ls[j] = frac.Lstar(j);
    tau[j] = 6 * Ls[j];
    double mass = 0;
    for (int i = 0; i < n; ++i) {
      double xm = 0;
      for (int ti = 0; ti < frac.T(); ++ti) xm += frac.xv(i, j, ti);
      if (xm > 1e-12 && inst.c(i, j) <= 3 * Cs[j] + 1e-9) {
        near[j].push_back(i);
        mass += xm;
      }
    }
    if (near[j].empty() || mass < 0.5)
      throw std::runtime_error("round_related: close-facility mass below expectation");
  }

  double tau_max = 1;
  for (int j = 0; j < m; ++j) tau_max = std::max(tau_max, tau[j]);
  const int phases = static_cast<int>(std::ceil(std::log2(std::max(tau_max, 1.0)))) + 1;

  // R1: per-phase clustering and trees over contracted close-sets
  struct Phase {
    double t = 0;
    std::vector<int> centers;                            // client ids
    std::vector<std::tuple<int, int, double>> edges;     // metric-node edges
    double mst_weight = 0, tree_weight = 0;
  };
  std::vector<Phase> plan(phases + 1);
  std::vector<int> phase_of_center(m, -1), sigma(m, -1);
  std::vector<char> clustered(m, 0);

  for (int l = 0; l <= phases; ++l) {
    Phase& ph = plan[l];
    ph.t = std::exp2(l);
    std::vector<int> dl;
    for (int j = 0; j < m; ++j)
      if (!clustered[j] && tau[j] <= ph.t + 1e-9) dl.push_back(j);
    if (dl.empty()) continue;
    auto clus = greedy_cluster(
        dl, [&](int j) { return Cs[j]; },
        [&](int a, int b) { return cx(cnode(a), cnode(b)); },
        [&](int j) { return 30 * Cs[j]; });
    for (int j : dl) {
      sigma[j] = clus.sigma[j];
      clustered[j] = 1;
    }
    ph.centers = clus.centers;
    for (int j : ph.centers) phase_of_center[j] = l;

    // contracted MST over {root} + clusters, keeping the achieving node pairs
    const int Q = static_cast<int>(ph.centers.size());
    std::vector<char> in(Q + 1, 0);
    std::vector<double> best(Q + 1, kInf);
    std::vector<std::pair<int, int>> link(Q + 1, {-1, -1});  // (from node, to node)
    in[0] = 1;  // root supernode
    auto super_nodes = [&](int q) -> std::vector<int> {
      if (q == 0) return {R};
      std::vector<int> v = {};
      for (int i : near[ph.centers[q - 1]]) v.push_back(i);
      return v;
    };
    auto update_from = [&](int q_new) {
      auto src = super_nodes(q_new);
      for (int q = 1; q <= Q; ++q) {
        if (in[q]) continue;
        for (int u : src)
          for (int v : super_nodes(q))
            if (dm(u, v) < best[q] - 1e-12) {
              best[q] = dm(u, v);
              link[q] = {u, v};
            }
      }
    };
    update_from(0);
    for (int steps = 0; steps < Q; ++steps) {
      int pick = -1;
      for (int q = 1; q <= Q; ++q)
        if (!in[q] && (pick < 0 || best[q] < best[pick] - 1e-12 ||
                       (best[q] < best[pick] + 1e-12 && q < pick)))
          pick = q;
      in[pick] = 1;
      ph.edges.emplace_back(link[pick].first, link[pick].second, best[pick]);
      ph.mst_weight += best[pick];
      update_from(pick);
    }
    // uncontract: attach each cluster's touched facilities to its center
    ph.tree_weight = ph.mst_weight;
    std::vector<char> touched(n + m + 1, 0);
    for (auto& [u, v, w] : ph.edges) touched[u] = touched[v] = 1;
    for (int q = 0; q < Q; ++q) {
      int j = ph.centers[q];
      for (int i : near[j])
        if (touched[i]) {
          ph.edges.emplace_back(cnode(j), i, dm(cnode(j), i));
          ph.tree_weight += dm(cnode(j), i);
        }
    }
  }

  // R2: disjoint subset of centers, one opened facility per member
  std::vector<int> all_centers;
  for (const auto& ph : plan)
    for (int j : ph.centers) all_centers.push_back(j);
  std::sort(all_centers.begin(), all_centers.end());
  auto disjoint = greedy_cluster(
      all_centers, [&](int j) { return Cs[j]; },
      [&](int a, int b) {
        // zero when the close-sets intersect, else large
        for (int i : near[a])
          for (int i2 : near[b])
            if (i == i2) return 0.0;
        return kInf;
      },
      [&](int) { return 0.5; });
  const std::vector<int>& nbr = disjoint.sigma;  // center -> chosen representative

  std::vector<int> opened_of(m, -1);  // per representative center
  std::vector<char> open(n, 0);
  double facility_cost = 0;
  std::vector<std::vector<std::pair<int, int>>> fac_edges(plan.size());
  for (int j : disjoint.centers) {
    int pick = -1;
    for (int i : near[j])
      if (pick < 0 || inst.f(i) < inst.f(pick) - 1e-12 ||
          (inst.f(i) < inst.f(pick) + 1e-12 && i < pick))
        pick = i;
    opened_of[j] = pick;
    if (!open[pick]) {
      open[pick] = 1;
      facility_cost += inst.f(pick);
    }
    int attach_phase = -1, attach_k = -1;
    for (int k : all_centers)
      if (nbr[k] == j) {
        int l = phase_of_center[k];
        if (attach_phase < 0 || l < attach_phase ||
            (l == attach_phase && k < attach_k)) {
          attach_phase = l;
          attach_k = k;
        }
      }
    fac_edges[attach_phase].emplace_back(pick, cnode(attach_k));
  }

  // R3: tours per phase in order; R4: assignments
  RoundRelatedResult out;
  out.certs.facility_cost = facility_cost;
  out.certs.facility_bound = 1.5 * frac.facility_mass_cost(inst);

  std::vector<int> route;
  for (std::size_t l = 0; l < plan.size(); ++l) {
    if (plan[l].centers.empty()) continue;
    auto edges = plan[l].edges;
    double aug = plan[l].tree_weight;
    for (auto [i, knode] : fac_edges[l]) {
      edges.emplace_back(i, knode, dm(i, knode));
      aug += dm(i, knode);
    }
    RelatedPhaseCert cert;
    cert.t = plan[l].t;
    cert.mst_weight = plan[l].mst_weight;
    cert.tree_weight = plan[l].tree_weight;
    cert.augmented_weight = aug;
    out.certs.phases.push_back(cert);

    // build the rooted tree over the touched nodes and tour the open leaves
    std::vector<int> nodes{R};
    std::vector<std::vector<std::pair<int, double>>> adj(n + m + 1);
    for (auto& [u, v, w] : edges) {
      adj[u].emplace_back(v, w);
      adj[v].emplace_back(u, w);
      nodes.push_back(u);
      nodes.push_back(v);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    WeightedTree tree;
    std::vector<int> tnode(n + m + 1, -1);
    tree.root = tree.add_node(-1, 0, R);
    tnode[R] = tree.root;
    std::vector<int> stack{R};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      auto kids = adj[u];
      std::sort(kids.begin(), kids.end());
      for (auto [v, w] : kids)
        if (tnode[v] < 0) {
          tnode[v] = tree.add_node(tnode[u], w, v);
          stack.push_back(v);
        }
    }
    std::vector<char> visit(n + m + 1, 0);
    for (int u : nodes)
      if (u < n && open[u]) visit[u] = 1;
    Tour tour = euler_tour(tree, dm, TourDirection::Forward, &visit);
    for (std::size_t a = 1; a < tour.nodes.size(); ++a)
      if (std::find(route.begin(), route.end(), tour.nodes[a]) == route.end())
        route.push_back(tour.nodes[a]);
  }

  out.sol.assignment.assign(m, -1);
  for (int j = 0; j < m; ++j) {
    int center = sigma[j];
    int rep = nbr[center];
    out.sol.assignment[j] = opened_of[rep];
  }
  for (int i = 0; i < n; ++i)
    if (open[i] && std::find(route.begin(), route.end(), i) == route.end())
      throw std::runtime_error("round_related: open facility missing from tour");
  out.sol.open_set.clear();
  for (int i : route) out.sol.open_set.push_back(i);
  out.sol.routes = {route};

  out.cost = evaluate(inst, out.sol);
  out.certs.connection.resize(m);
  out.certs.connection_bound.resize(m);
  out.certs.latency.resize(m);
  out.certs.latency_bound.resize(m);
  for (int j = 0; j < m; ++j) {
    out.certs.connection[j] = out.cost.per_client[j].connection;
    out.certs.connection_bound[j] = 39 * Cs[j];
    out.certs.latency[j] = out.cost.per_client[j].activation_time;
    out.certs.latency_bound[j] = 384 * Ls[j];
  }
  return out;
}

}  // namespace mlufl
