#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mlufl/instance.hpp"

namespace mlufl {

// Discrete time grid. The geometric grid holds the distinct values
// ceil((1+eps)^r) up to the horizon, so snap(x) <= (1+eps) x for x >= 1;
// the integer grid is 1..ceil(horizon) for cases where it stays small.
struct TimeScale {
  double eps = 0;
  std::vector<double> times;  // strictly increasing, times.front() == 1

  static TimeScale geometric(double horizon, double eps) {
    if (!(eps > 0) || eps > 1) throw std::invalid_argument("timescale: eps must be in (0,1]");
    TimeScale ts;
    ts.eps = eps;
    horizon = std::max(horizon, 1.0);
    double power = 1.0;
    double last = 0;
    while (true) {
      double t = std::ceil(power);
      if (t > last) {
        ts.times.push_back(t);
        last = t;
      }
      if (t >= horizon) break;
      power *= 1.0 + eps;
    }
    return ts;
  }

  static TimeScale integers(double horizon) {
    TimeScale ts;
    ts.eps = 0;
    int top = std::max(1, static_cast<int>(std::ceil(horizon)));
    ts.times.resize(top);
    for (int t = 1; t <= top; ++t) ts.times[t - 1] = t;
    return ts;
  }

  int size() const { return static_cast<int>(times.size()); }
  double horizon() const { return times.back(); }

  // Earliest grid time >= x, clamped to the horizon.
  double snap(double x) const { return times[snap_index(x)]; }

  int snap_index(double x) const {
    auto it = std::lower_bound(times.begin(), times.end(), x - 1e-12);
    if (it == times.end()) return size() - 1;
    return static_cast<int>(it - times.begin());
  }
};

// Horizon min{n,m} * d_max, capped by the route budget when one is set.
inline double time_horizon(const Instance& inst) {
  double h = std::min(inst.n, std::max(inst.m, 1)) * inst.d_max();
  if (std::isfinite(inst.route_budget)) h = std::min(h, inst.route_budget);
  return std::max(h, 1.0);
}

inline TimeScale build_timescale(const Instance& inst, double eps) {
  return TimeScale::geometric(time_horizon(inst), eps);
}

}  // namespace mlufl
