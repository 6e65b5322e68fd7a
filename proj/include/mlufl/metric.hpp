#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mlufl/rng.hpp"

namespace mlufl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Finite metric space with a distinguished root node. Used for time metrics
// (facilities plus root) and for minimum-latency inputs (clients plus root).
struct Metric {
  int size = 0;
  int root = 0;
  std::vector<std::vector<double>> d;

  double operator()(int u, int v) const { return d[u][v]; }

  double max_distance() const {
    double dm = 0;
    for (int u = 0; u < size; ++u)
      for (int v = u + 1; v < size; ++v) dm = std::max(dm, d[u][v]);
    return dm;
  }

  // Largest triangle-inequality violation; 0 for a true metric.
  double triangle_slack() const {
    double worst = 0;
    for (int u = 0; u < size; ++u)
      for (int v = 0; v < size; ++v)
        for (int w = 0; w < size; ++w)
          worst = std::max(worst, d[u][v] - (d[u][w] + d[w][v]));
    return worst;
  }
};

inline Metric make_metric(std::vector<std::vector<double>> d, int root) {
  Metric mm;
  mm.size = static_cast<int>(d.size());
  mm.root = root;
  mm.d = std::move(d);
  if (root < 0 || root >= mm.size) throw std::invalid_argument("metric root out of range");
  return mm;
}

// Random integral metric: complete-graph weights in {1, .., wmax} closed under
// shortest paths. Always a metric, and integer-valued.
inline Metric random_integer_metric(int size, int wmax, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> d(size, std::vector<double>(size, 0));
  for (int u = 0; u < size; ++u)
    for (int v = u + 1; v < size; ++v) d[u][v] = d[v][u] = rng.uniform_int(1, wmax);
  for (int w = 0; w < size; ++w)
    for (int u = 0; u < size; ++u)
      for (int v = 0; v < size; ++v)
        d[u][v] = std::min(d[u][v], d[u][w] + d[w][v]);
  return make_metric(std::move(d), size - 1);
}

// Random planar Euclidean metric on `size` points in a box of the given side.
inline Metric random_euclidean_metric(int size, double side, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> px(size), py(size);
  for (int u = 0; u < size; ++u) {
    px[u] = rng.uniform(0, side);
    py[u] = rng.uniform(0, side);
  }
  std::vector<std::vector<double>> d(size, std::vector<double>(size, 0));
  for (int u = 0; u < size; ++u)
    for (int v = 0; v < size; ++v) d[u][v] = std::hypot(px[u] - px[v], py[u] - py[v]);
  return make_metric(std::move(d), size - 1);
}

}  // namespace mlufl
