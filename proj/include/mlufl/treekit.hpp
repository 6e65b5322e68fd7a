#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mlufl/metric.hpp"
#include "mlufl/rng.hpp"

namespace mlufl {

// Rooted tree with edge weights on parent links. Leaves carry the id of the
// metric point they represent (leaf_id = -1 for internal nodes).
struct WeightedTree {
  struct Node {
    int parent = -1;
    double parent_weight = 0;
    int leaf_id = -1;
    std::vector<int> children;
  };
  std::vector<Node> nodes;
  int root = 0;
  std::vector<int> leaf_node;  // metric id -> tree node (-1 when absent)

  int add_node(int parent, double w, int leaf_id = -1) {
    int id = static_cast<int>(nodes.size());
    nodes.push_back({parent, w, leaf_id, {}});
    if (parent >= 0) nodes[parent].children.push_back(id);
    if (leaf_id >= 0) {
      if (leaf_id >= static_cast<int>(leaf_node.size())) leaf_node.resize(leaf_id + 1, -1);
      leaf_node[leaf_id] = id;
    }
    return id;
  }

  double weight() const {
    double s = 0;
    for (const auto& nd : nodes) s += nd.parent_weight;
    return s;
  }

  int depth(int v) const {
    int d = 0;
    while (nodes[v].parent >= 0) {
      v = nodes[v].parent;
      ++d;
    }
    return d;
  }

  // Tree-metric distance between two nodes.
  double dist(int a, int b) const {
    double da = 0, db = 0;
    int u = a, v = b;
    int du = depth(u), dv = depth(v);
    while (du > dv) {
      da += nodes[u].parent_weight;
      u = nodes[u].parent;
      --du;
    }
    while (dv > du) {
      db += nodes[v].parent_weight;
      v = nodes[v].parent;
      --dv;
    }
    while (u != v) {
      da += nodes[u].parent_weight;
      db += nodes[v].parent_weight;
      u = nodes[u].parent;
      v = nodes[v].parent;
    }
    return da + db;
  }

  double leaf_dist(int la, int lb) const { return dist(leaf_node.at(la), leaf_node.at(lb)); }

  // Edges (as child nodes) on the path between two nodes.
  std::vector<int> path_edges(int a, int b) const {
    std::vector<int> ea, eb;
    int u = a, v = b;
    int du = depth(u), dv = depth(v);
    while (du > dv) {
      ea.push_back(u);
      u = nodes[u].parent;
      --du;
    }
    while (dv > du) {
      eb.push_back(v);
      v = nodes[v].parent;
      --dv;
    }
    while (u != v) {
      ea.push_back(u);
      eb.push_back(v);
      u = nodes[u].parent;
      v = nodes[v].parent;
    }
    ea.insert(ea.end(), eb.rbegin(), eb.rend());
    return ea;
  }
};

// ---------------------------------------------------------------------------
// Randomized hierarchically-well-separated tree embedding (random permutation
// and radius scale). The produced tree metric always dominates the input
// metric; the distortion is random with logarithmic expectation.

inline WeightedTree frt_embed(const Metric& metric, std::uint64_t seed) {
  const int N = metric.size;
  WeightedTree tree;
  if (N == 1) {
    tree.root = tree.add_node(-1, 0, 0);
    return tree;
  }

  // collapse zero-distance duplicates onto representatives
  std::vector<int> rep(N);
  std::iota(rep.begin(), rep.end(), 0);
  for (int u = 0; u < N; ++u)
    for (int v = 0; v < u; ++v)
      if (metric(u, v) <= 0 && rep[v] == v) {
        rep[u] = v;
        break;
      }
  std::vector<int> reps;
  for (int u = 0; u < N; ++u)
    if (rep[u] == u) reps.push_back(u);

  double dmin = kInf, dmax = 0;
  for (int a = 0; a < static_cast<int>(reps.size()); ++a)
    for (int b = 0; b < a; ++b) {
      double d = metric(reps[a], reps[b]);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  if (reps.size() == 1) {
    tree.root = tree.add_node(-1, 0, reps[0]);
    for (int u = 0; u < N; ++u)
      if (rep[u] != u) tree.add_node(tree.root, 0, u);
    return tree;
  }

  Rng rng(Rng::derive(seed, 0xf27));
  std::vector<int> perm = reps;
  for (int a = static_cast<int>(perm.size()) - 1; a > 0; --a)
    std::swap(perm[a], perm[rng.uniform_int(0, a)]);
  // radius scale from density 1/(x ln 2) on [1,2)
  double beta = std::exp2(rng.uniform());

  // levels: clusters of radius beta * 2^level / 2 (in units of dmin)
  int top = 1;
  while (std::ldexp(dmin, top - 1) < dmax * 2) ++top;  // 2^(top-1)*dmin covers everything

  struct Cluster {
    std::vector<int> pts;
    int tree_node;
  };
  // start with one cluster at `top`, refine downwards until singletons
  tree.root = tree.add_node(-1, 0);
  std::vector<Cluster> cur{{reps, tree.root}};
  for (int level = top - 1; !cur.empty(); --level) {
    double radius = beta * std::ldexp(dmin, level) / 2.0;
    std::vector<Cluster> next;
    for (auto& cl : cur) {
      // partition by first permutation point within the radius
      std::vector<char> taken(cl.pts.size(), 0);
      for (int center : perm) {
        std::vector<int> part;
        for (std::size_t a = 0; a < cl.pts.size(); ++a)
          if (!taken[a] && metric(center, cl.pts[a]) <= radius) {
            taken[a] = 1;
            part.push_back(cl.pts[a]);
          }
        if (part.empty()) continue;
        double w = std::ldexp(dmin, level + 1);  // edge to parent: cluster diameter bound
        if (part.size() == 1) {
          tree.add_node(cl.tree_node, w, part[0]);
        } else {
          int nd = tree.add_node(cl.tree_node, w);
          next.push_back({std::move(part), nd});
        }
      }
    }
    cur = std::move(next);
  }
  // re-attach duplicates at distance zero
  for (int u = 0; u < N; ++u)
    if (rep[u] != u) tree.add_node(tree.leaf_node[rep[u]], 0, u);
  return tree;
}

// ---------------------------------------------------------------------------
// Randomized subtree rounding: keep an edge with probability z_e / z_parent
// conditioned on its parent edge being kept (edges at the root use z_e). The
// input values must be monotone nonincreasing from the root; tiny violations
// are rounded down.

inline std::vector<char> gkr_round(const WeightedTree& tree, std::vector<double> z,
                                   std::uint64_t seed) {
  const int V = static_cast<int>(tree.nodes.size());
  if (static_cast<int>(z.size()) != V)
    throw std::invalid_argument("gkr_round: z must hold one value per node (edge to parent)");
  Rng rng(Rng::derive(seed, 0x93c));
  std::vector<char> kept(V, 0);
  kept[tree.root] = 1;

  // breadth-first from the root; children inspected in index order
  std::vector<int> order{tree.root};
  for (std::size_t h = 0; h < order.size(); ++h)
    for (int c : tree.nodes[order[h]].children) order.push_back(c);

  for (std::size_t h = 1; h < order.size(); ++h) {
    int v = order[h];
    int p = tree.nodes[v].parent;
    double zp = (p == tree.root) ? 1.0 : z[p];
    double ze = std::min(std::max(z[v], 0.0), 1.0);
    if (ze > zp + 1e-9 && p != tree.root)
      throw std::invalid_argument("gkr_round: z not monotone along root paths");
    ze = std::min(ze, zp);
    z[v] = ze;
    if (!kept[p]) continue;
    double prob = zp <= 0 ? 0.0 : ze / zp;
    if (rng.uniform() < prob) kept[v] = 1;
  }
  return kept;
}

// Largest violation of z-monotonicity along root paths (diagnostic).
inline double gkr_monotone_slack(const WeightedTree& tree, const std::vector<double>& z) {
  double worst = 0;
  for (int v = 0; v < static_cast<int>(tree.nodes.size()); ++v) {
    int p = tree.nodes[v].parent;
    if (p >= 0 && p != tree.root) worst = std::max(worst, z[v] - z[p]);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Exact MST over a node subset (Prim, lowest-index tie-breaks), rooted at the
// subset's first occurrence of the metric root (or its first node).

inline WeightedTree mst(const Metric& metric, const std::vector<int>& subset) {
  if (subset.empty()) throw std::invalid_argument("mst: empty node set");
  WeightedTree tree;
  int start = 0;
  for (std::size_t a = 0; a < subset.size(); ++a)
    if (subset[a] == metric.root) start = static_cast<int>(a);
  const int Q = static_cast<int>(subset.size());
  std::vector<char> in(Q, 0);
  std::vector<double> best(Q, kInf);
  std::vector<int> from(Q, -1), tree_node(Q, -1);
  in[start] = 1;
  tree.root = tree.add_node(-1, 0, subset[start]);
  tree_node[start] = tree.root;
  for (int a = 0; a < Q; ++a)
    if (!in[a]) {
      best[a] = metric(subset[start], subset[a]);
      from[a] = start;
    }
  for (int it = 1; it < Q; ++it) {
    int pick = -1;
    for (int a = 0; a < Q; ++a) {
      if (in[a]) continue;
      if (pick < 0 || best[a] < best[pick] - 1e-12 ||
          (best[a] < best[pick] + 1e-12 && subset[a] < subset[pick]))
        pick = a;
    }
    in[pick] = 1;
    tree_node[pick] = tree.add_node(tree_node[from[pick]], best[pick], subset[pick]);
    for (int a = 0; a < Q; ++a)
      if (!in[a] && metric(subset[pick], subset[a]) < best[a] - 1e-12) {
        best[a] = metric(subset[pick], subset[a]);
        from[a] = pick;
      }
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Tours: first-visit orders starting at the root, with lengths measured in
// the supplied metric (shortcutting skips repeated and internal nodes).

struct Tour {
  std::vector<int> nodes;  // metric ids, nodes.front() == root
  double length = 0;       // open walk length along `nodes`
  double closed_length = 0;  // + return to root
  std::vector<double> prefix;  // arrival time per position

  double first_visit(int id) const {
    for (std::size_t a = 0; a < nodes.size(); ++a)
      if (nodes[a] == id) return prefix[a];
    return kInf;
  }
};

enum class TourDirection { Forward, Reverse, Best };

namespace detail {
inline Tour tour_from_order(const std::vector<int>& order, const Metric& metric) {
  Tour t;
  t.nodes = order;
  t.prefix.assign(order.size(), 0);
  for (std::size_t a = 1; a < order.size(); ++a) {
    t.length += metric(order[a - 1], order[a]);
    t.prefix[a] = t.length;
  }
  t.closed_length = t.length + (order.size() > 1 ? metric(order.back(), order.front()) : 0);
  return t;
}
}  // namespace detail

// Depth-first (Euler) traversal converted to a first-visit tour over the
// tree's leaf ids. `visit` restricts the reported nodes when given; the root
// is always first. Direction Best minimizes the sum of first-visit times.
inline Tour euler_tour(const WeightedTree& tree, const Metric& metric,
                       TourDirection dir = TourDirection::Forward,
                       const std::vector<char>* visit = nullptr) {
  auto build = [&](bool rev) {
    std::vector<int> raw;
    auto dfs = [&](auto&& self, int v) -> void {
      if (int id = tree.nodes[v].leaf_id; id >= 0) raw.push_back(id);
      auto kids = tree.nodes[v].children;
      std::sort(kids.begin(), kids.end());
      if (rev) std::reverse(kids.begin(), kids.end());
      for (int c : kids) self(self, c);
    };
    dfs(dfs, tree.root);
    std::vector<int> order{metric.root};
    for (int id : raw) {
      if (id == metric.root) continue;
      if (visit && (id >= static_cast<int>(visit->size()) || !(*visit)[id])) continue;
      order.push_back(id);
    }
    return detail::tour_from_order(order, metric);
  };

  if (dir == TourDirection::Forward) return build(false);
  if (dir == TourDirection::Reverse) return build(true);
  Tour fwd = build(false);
  Tour rev = build(true);
  double sf = 0, sr = 0;
  for (double p : fwd.prefix) sf += p;
  for (double p : rev.prefix) sr += p;
  return sf <= sr ? fwd : rev;
}

// ---------------------------------------------------------------------------
// Tour concatenation. Input tours have nested coverage (sorted ascending, the
// last covers the universe). Chooses the subsequence minimizing the
// deterministic latency bound
//   sum_a C_{i_a} * (universe - covered_{i_{a-1}})
// which upper-bounds the latency of the concatenated first-visit order.

struct ConcatResult {
  std::vector<int> chosen;  // indices into the input list (always ends at last)
  std::vector<int> order;   // combined visit order, duplicates skipped
  double bound = 0;
};

inline ConcatResult gk_concatenate(const std::vector<Tour>& tours,
                                   const std::vector<std::vector<int>>& coverage,
                                   int universe_size) {
  const int K = static_cast<int>(tours.size());
  if (K == 0) throw std::invalid_argument("gk_concatenate: no tours");
  for (int a = 1; a < K; ++a)
    if (coverage[a].size() < coverage[a - 1].size())
      throw std::invalid_argument("gk_concatenate: tours not sorted by coverage");
  if (static_cast<int>(coverage.back().size()) < universe_size)
    throw std::invalid_argument("gk_concatenate: last tour does not cover the universe");

  std::vector<double> dp(K, kInf);
  std::vector<int> prev(K, -1);
  for (int a = 0; a < K; ++a) {
    double base = tours[a].closed_length * universe_size;  // first chosen tour
    dp[a] = base;
    for (int b = 0; b < a; ++b) {
      double v = dp[b] + tours[a].closed_length *
                             (universe_size - static_cast<double>(coverage[b].size()));
      if (v < dp[a] - 1e-12) {
        dp[a] = v;
        prev[a] = b;
      }
    }
  }
  ConcatResult res;
  res.bound = dp[K - 1];
  for (int a = K - 1; a >= 0; a = prev[a]) {
    res.chosen.push_back(a);
    if (prev[a] < 0) break;
  }
  std::reverse(res.chosen.begin(), res.chosen.end());
  std::vector<char> seen;
  for (int a : res.chosen)
    for (int u : tours[a].nodes) {
      if (u >= static_cast<int>(seen.size())) seen.resize(u + 1, 0);
      if (!seen[u]) {
        seen[u] = 1;
        res.order.push_back(u);
      }
    }
  return res;
}

}  // namespace mlufl
