#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mlufl/colgen.hpp"
#include "mlufl/relaxations.hpp"
#include "mlufl/rng.hpp"
#include "mlufl/treekit.hpp"

namespace mlufl {

// ---------------------------------------------------------------------------
// Alpha-point rounding of the compact minimum-latency relaxation. Per time,
// the clients whose cumulative mass reached alpha are toured via a doubled
// MST; the tour cost is certified against (4/alpha) times the fractional
// edge mass. Deterministic mode uses alpha = 1/2, tours only at powers of
// two, picks each tour's direction, and certifies t_j <= 32 tau_j(1/2).

struct MlTourCert {
  double t = 0;
  double tour_cost = 0;
  double bound = 0;  // (4/alpha) * z-mass at the time used
};

struct RoundMlResult {
  std::vector<int> order;  // metric ids visited, root first
  double total_latency = 0;
  double alpha = 0.5;
  std::vector<MlTourCert> tours;
  std::vector<double> latency, latency_bound;  // det mode: per client vs 32 tau
  double concat_bound = 0;                     // random mode: DP bound
  bool certs_ok(double tol = 1e-6) const {
    for (const auto& c : tours)
      if (c.tour_cost > c.bound + tol) return false;
    for (std::size_t j = 0; j < latency.size(); ++j)
      if (latency[j] > latency_bound[j] + tol) return false;
    return true;
  }
};

namespace detail {

inline std::vector<double> walk_latencies(const Metric& metric, const std::vector<int>& order) {
  // arrival time of each metric node along the first-visit walk
  std::vector<double> at(metric.size, kInf);
  double t = 0;
  for (std::size_t a = 0; a < order.size(); ++a) {
    if (a > 0) t += metric(order[a - 1], order[a]);
    at[order[a]] = std::min(at[order[a]], t);
  }
  return at;
}

}  // namespace detail

inline RoundMlResult round_ml_lp1_det(const MlFrac& frac) {
  const Metric& met = frac.metric;
  const double alpha = 0.5;
  RoundMlResult res;
  res.alpha = alpha;
  const int J = static_cast<int>(frac.clients.size());

  std::vector<double> tau(J);
  double tau_max = 1;
  for (int j = 0; j < J; ++j) {
    tau[j] = frac.tau(j, alpha);
    tau_max = std::max(tau_max, tau[j]);
  }
  const int L = std::max(0, static_cast<int>(std::ceil(std::log2(tau_max))));

  std::vector<int> order{met.root};
  std::vector<char> seen(met.size, 0);
  seen[met.root] = 1;
  for (int l = 0; l <= L; ++l) {
    double tl = std::exp2(l);
    int gi = 0;  // latest grid time not beyond tl
    while (gi + 1 < frac.T() && frac.ts.times[gi + 1] <= tl + 1e-9) ++gi;
    std::vector<int> terminals{met.root};
    for (int j = 0; j < J; ++j)
      if (tau[j] <= tl + 1e-9) terminals.push_back(frac.clients[j]);
    if (terminals.size() == 1) continue;
    WeightedTree tree = mst(met, terminals);
    Tour tour = euler_tour(tree, met, TourDirection::Best);
    MlTourCert cert;
    cert.t = tl;
    cert.tour_cost = tour.closed_length;
    cert.bound = (4.0 / alpha) * frac.z_mass_at(gi);
    res.tours.push_back(cert);
    for (std::size_t a = 1; a < tour.nodes.size(); ++a)
      if (!seen[tour.nodes[a]]) {
        seen[tour.nodes[a]] = 1;
        order.push_back(tour.nodes[a]);
      }
  }
  res.order = order;
  auto arrivals = detail::walk_latencies(met, order);
  res.latency.resize(J);
  res.latency_bound.resize(J);
  for (int j = 0; j < J; ++j) {
    res.latency[j] = arrivals[frac.clients[j]];
    res.latency_bound[j] = 32 * tau[j];
    res.total_latency += res.latency[j];
  }
  return res;
}

inline RoundMlResult round_ml_lp1_random(const MlFrac& frac, std::uint64_t seed) {
  const Metric& met = frac.metric;
  Rng rng(Rng::derive(seed, 0xa1fa));
  const double alpha = std::sqrt(1.0 - rng.uniform());  // density 2x on (0,1]
  RoundMlResult res;
  res.alpha = alpha;
  const int J = static_cast<int>(frac.clients.size());

  std::vector<Tour> tours;
  std::vector<std::vector<int>> coverage;
  for (int ti = 0; ti < frac.T(); ++ti) {
    std::vector<int> terminals{met.root}, cov;
    for (int j = 0; j < J; ++j)
      if (frac.cum_x(j, ti) >= alpha - 1e-9) {
        terminals.push_back(frac.clients[j]);
        cov.push_back(j);
      }
    if (cov.empty()) continue;
    if (!coverage.empty() && coverage.back().size() == cov.size()) continue;  // unchanged
    WeightedTree tree = mst(met, terminals);
    Tour tour = euler_tour(tree, met, TourDirection::Forward);
    MlTourCert cert;
    cert.t = frac.ts.times[ti];
    cert.tour_cost = tour.closed_length;
    cert.bound = (4.0 / alpha) * frac.z_mass_at(ti);
    res.tours.push_back(cert);
    tours.push_back(std::move(tour));
    coverage.push_back(std::move(cov));
  }
  if (tours.empty() || static_cast<int>(coverage.back().size()) != J)
    throw std::runtime_error("round_ml_lp1_random: coverage never complete");
  auto concat = gk_concatenate(tours, coverage, J);
  res.concat_bound = concat.bound;
  res.order = concat.order;
  auto arrivals = detail::walk_latencies(met, res.order);
  res.latency.resize(J);
  for (int j = 0; j < J; ++j) {
    res.latency[j] = arrivals[frac.clients[j]];
    res.total_latency += res.latency[j];
  }
  res.latency_bound.clear();  // no per-client guarantee in random mode
  return res;
}

// ---------------------------------------------------------------------------
// Rounding of path/tree columns: at each doubling time, systematic sampling
// picks at most ceil(sum z) columns with the exact per-column marginals; the
// selected walks are concatenated and shortcut.

struct Lp2RoundResult {
  std::vector<int> order;
  bool covered_all = false;
  double total_latency = 0;
  std::vector<int> picks;  // selected column indices over all phases
};

// Systematic sampling over [0, sum w): one uniform offset, unit strides.
inline std::vector<int> systematic_sample(const std::vector<double>& w, double offset) {
  std::vector<int> picked;
  double cum = 0;
  double total = 0;
  for (double v : w) total += v;
  double point = offset;
  for (std::size_t a = 0; a < w.size(); ++a) {
    double lo = cum, hi = cum + w[a];
    while (point < hi - 1e-15) {
      if (point >= lo - 1e-15) {
        picked.push_back(static_cast<int>(a));
        point += 1.0;
      } else {
        break;
      }
    }
    cum = hi;
  }
  (void)total;
  return picked;
}

inline Lp2RoundResult round_ml_lp2(const Metric& metric, const ColgenResult& lp2,
                                   std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0x19b2));
  Lp2RoundResult res;
  std::vector<int> order{metric.root};
  std::vector<char> seen(metric.size, 0);
  seen[metric.root] = 1;

  const double horizon = lp2.ts.horizon();
  const int clients = metric.size - 1;
  const int last_phase = static_cast<int>(
      std::ceil(std::log2(std::max(horizon, 1.0)) + 4 * std::log2(std::max(clients, 2))));
  for (int l = 0; l <= last_phase; ++l) {
    double tl = std::exp2(l);
    int gi = 0;
    while (gi + 1 < lp2.T() && lp2.ts.times[gi + 1] <= tl + 1e-9) ++gi;
    std::vector<int> cols;
    std::vector<double> w;
    for (std::size_t c = 0; c < lp2.columns.size(); ++c)
      if (lp2.columns[c].time_index == gi && lp2.column_value[c] > 1e-12) {
        cols.push_back(static_cast<int>(c));
        w.push_back(std::min(lp2.column_value[c], 1.0));
      }
    if (cols.empty()) continue;
    for (int pick : systematic_sample(w, rng.uniform())) {
      res.picks.push_back(cols[pick]);
      for (int u : lp2.columns[cols[pick]].nodes)
        if (!seen[u]) {
          seen[u] = 1;
          order.push_back(u);
        }
    }
  }
  res.order = order;
  res.covered_all = true;
  for (int u = 0; u < metric.size; ++u)
    if (!seen[u]) res.covered_all = false;
  auto arrivals = detail::walk_latencies(metric, order);
  for (int u = 0; u < metric.size; ++u)
    if (u != metric.root && seen[u]) res.total_latency += arrivals[u];
  return res;
}

}  // namespace mlufl
