#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlufl/metric.hpp"
#include "mlufl/rng.hpp"

namespace mlufl {

// Latency cost as a function of activation time: identity, t^p, or a
// piecewise-linear user table (clamped at the last breakpoint).
struct LatencyFn {
  enum class Kind { Identity, Power, Table };
  Kind kind = Kind::Identity;
  double p = 1.0;
  std::vector<std::pair<double, double>> table;  // sorted (t, value) breakpoints

  double operator()(double t) const {
    switch (kind) {
      case Kind::Identity:
        return t;
      case Kind::Power:
        return std::pow(t, p);
      case Kind::Table: {
        if (table.empty()) return t;
        if (t <= table.front().first) return table.front().second;
        for (std::size_t a = 1; a < table.size(); ++a) {
          if (t <= table[a].first) {
            auto [t0, v0] = table[a - 1];
            auto [t1, v1] = table[a];
            return t1 == t0 ? v1 : v0 + (v1 - v0) * (t - t0) / (t1 - t0);
          }
        }
        return table.back().second;
      }
    }
    return t;
  }

  bool identity() const { return kind == Kind::Identity; }
};

// Problem data. Facilities are 0..n-1, clients 0..m-1; the root has index n in
// the time metric (row/column n of `time_metric`). Instances are immutable
// after construction and safe to share across threads.
struct Instance {
  int n = 0;  // facilities
  int m = 0;  // clients
  std::vector<double> opening_cost;                  // f_i, size n
  std::vector<std::vector<double>> connection_cost;  // c[i][j]; kInf = forbidden
  std::vector<std::vector<double>> time_metric;      // d over F u {r}, (n+1)^2
  std::vector<double> client_weight;                 // lambda_j, default 1
  int route_count = 1;                               // k
  double route_budget = kInf;                        // B
  LatencyFn latency;
  std::vector<std::string> tags;  // e.g. "uniform", "related(2)", "metric", "zfc", "mgl"

  // Optional connection metric over F u D u {r}: facilities 0..n-1, clients
  // n..n+m-1, root n+m. Present for related/metric-tagged instances; its
  // facility x client block always agrees with `connection_cost`.
  std::vector<std::vector<double>> cext;

  int root() const { return n; }
  double d(int u, int v) const { return time_metric[u][v]; }
  double c(int i, int j) const { return connection_cost[i][j]; }
  double f(int i) const { return opening_cost[i]; }
  double lambda(int j) const { return client_weight.empty() ? 1.0 : client_weight[j]; }

  bool has_tag(const std::string& t) const {
    return std::find(tags.begin(), tags.end(), t) != tags.end();
  }
  bool uniform() const { return has_tag("uniform"); }

  // M for related(M) instances, 0 otherwise.
  double related_factor() const {
    for (const auto& t : tags)
      if (t.rfind("related(", 0) == 0 && t.back() == ')')
        return std::stod(t.substr(8, t.size() - 9));
    return 0;
  }

  bool has_cext() const { return !cext.empty(); }
  int cext_node_of_facility(int i) const { return i; }
  int cext_node_of_client(int j) const { return n + j; }
  int cext_root() const { return n + m; }
  double cdist(int u, int v) const { return cext[u][v]; }

  double d_max() const {
    double dm = 0;
    for (int u = 0; u <= n; ++u)
      for (int v = u + 1; v <= n; ++v) dm = std::max(dm, time_metric[u][v]);
    return dm;
  }

  Metric facility_metric() const { return make_metric(time_metric, root()); }
};

// One activation plan: open facilities, k routes from the root covering them,
// and a client assignment.
struct Solution {
  std::vector<int> open_set;
  std::vector<std::vector<int>> routes;  // facility indices; each route starts at r implicitly
  std::vector<int> assignment;           // client -> facility
};

struct PerClientCost {
  double connection = 0;
  double activation_time = 0;
  double latency_cost = 0;  // lambda_j * latfn(t_j)
};

struct CostBreakdown {
  double facility_cost = 0;
  double connection_cost = 0;
  double latency_cost = 0;
  double total = 0;
  std::vector<PerClientCost> per_client;
  double lp_norm = 0;            // set in p-norm mode
  double budget_factor = 0;      // max route length / B (0 if B infinite)
};

struct EvalMode {
  bool p_norm = false;  // replace latency sum with the L_p norm of latencies
  double p = 2.0;
};

inline CostBreakdown evaluate(const Instance& inst, const Solution& sol, EvalMode mode = {}) {
  CostBreakdown out;
  std::vector<char> open(inst.n, 0);
  for (int i : sol.open_set) {
    if (i < 0 || i >= inst.n) throw std::invalid_argument("open_set index out of range");
    open[i] = 1;
    out.facility_cost += inst.f(i);
  }
  std::vector<double> activation(inst.n, kInf);
  std::vector<int> route_of(inst.n, -1);
  for (std::size_t rix = 0; rix < sol.routes.size(); ++rix) {
    int prev = inst.root();
    double len = 0;
    for (int i : sol.routes[rix]) {
      if (!open[i]) throw std::invalid_argument("route visits unopened facility");
      if (route_of[i] != -1) throw std::invalid_argument("facility on two routes");
      route_of[i] = static_cast<int>(rix);
      len += inst.d(prev, i);
      activation[i] = std::min(activation[i], len);
      prev = i;
    }
    if (std::isfinite(inst.route_budget) && inst.route_budget > 0)
      out.budget_factor = std::max(out.budget_factor, len / inst.route_budget);
  }
  for (int i : sol.open_set)
    if (route_of[i] == -1) throw std::invalid_argument("open facility missing from routes");

  out.per_client.resize(inst.m);
  double norm_acc = 0;
  for (int j = 0; j < inst.m; ++j) {
    int i = sol.assignment.at(j);
    if (i < 0 || i >= inst.n || !open[i])
      throw std::invalid_argument("client assigned to unopened facility");
    auto& pc = out.per_client[j];
    pc.connection = inst.c(i, j);
    pc.activation_time = activation[i];
    pc.latency_cost = inst.lambda(j) * inst.latency(pc.activation_time);
    out.connection_cost += pc.connection;
    out.latency_cost += pc.latency_cost;
    norm_acc += inst.lambda(j) * std::pow(pc.activation_time, mode.p);
  }
  if (mode.p_norm) {
    out.lp_norm = std::pow(norm_acc, 1.0 / mode.p);
    out.total = out.facility_cost + out.connection_cost + out.lp_norm;
  } else {
    out.total = out.facility_cost + out.connection_cost + out.latency_cost;
  }
  return out;
}

inline std::string cost_csv(const CostBreakdown& b) {
  std::ostringstream os;
  os << "client,connection,activation_time,latency_cost\n";
  for (std::size_t j = 0; j < b.per_client.size(); ++j)
    os << j << ',' << b.per_client[j].connection << ',' << b.per_client[j].activation_time
       << ',' << b.per_client[j].latency_cost << '\n';
  os << "total," << b.facility_cost << ',' << b.connection_cost << ',' << b.latency_cost
     << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  std::vector<std::string> issues;
  bool valid() const { return issues.empty(); }
};

inline ValidationReport validate(const Instance& inst) {
  ValidationReport rep;
  auto issue = [&](const std::string& s) { rep.issues.push_back(s); };
  const double tol = 1e-9;

  if (inst.n <= 0) issue("empty facility set");
  if (inst.m < 0) issue("negative client count");
  if (static_cast<int>(inst.opening_cost.size()) != inst.n) issue("opening_cost size mismatch");
  if (static_cast<int>(inst.connection_cost.size()) != inst.n)
    issue("connection_cost row count mismatch");
  if (static_cast<int>(inst.time_metric.size()) != inst.n + 1)
    issue("time_metric size mismatch");
  if (!rep.valid()) return rep;

  for (int i = 0; i < inst.n; ++i) {
    if (!(inst.f(i) >= 0) || !std::isfinite(inst.f(i)))
      issue("opening cost negative or non-finite at facility " + std::to_string(i));
    for (int j = 0; j < inst.m; ++j) {
      double c = inst.c(i, j);
      if (!(c >= 0)) issue("negative connection cost at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
    }
  }
  const int N = inst.n + 1;
  for (int u = 0; u < N; ++u) {
    if (std::abs(inst.d(u, u)) > tol) issue("nonzero d(u,u) at " + std::to_string(u));
    for (int v = 0; v < N; ++v) {
      if (!(inst.d(u, v) >= -tol) || !std::isfinite(inst.d(u, v)))
        issue("bad time metric entry at (" + std::to_string(u) + "," + std::to_string(v) + ")");
      if (std::abs(inst.d(u, v) - inst.d(v, u)) > tol)
        issue("asymmetric time metric at (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
  }
  for (int u = 0; u < N; ++u)
    for (int v = 0; v < N; ++v)
      for (int w = 0; w < N; ++w)
        if (inst.d(u, v) > inst.d(u, w) + inst.d(w, v) + tol) {
          std::ostringstream os;
          os << "triangle violation: d(" << u << "," << v << ")=" << inst.d(u, v) << " > d("
             << u << "," << w << ")+d(" << w << "," << v << ")="
             << inst.d(u, w) + inst.d(w, v);
          issue(os.str());
          goto triangle_done;
        }
triangle_done:

  if (inst.uniform()) {
    for (int u = 0; u < N; ++u)
      for (int v = 0; v < N; ++v)
        if (u != v && std::abs(inst.d(u, v) - 1.0) > tol) {
          issue("uniform tag but d != 1 somewhere");
          goto uniform_done;
        }
  }
uniform_done:

  if (double M = inst.related_factor(); M > 0) {
    if (M < 1) issue("related factor M < 1");
    if (!inst.has_cext()) {
      issue("related tag without connection metric extension");
    } else {
      for (int u = 0; u < N; ++u)
        for (int v = 0; v < N; ++v) {
          int cu = (u == inst.n) ? inst.cext_root() : u;
          int cv = (v == inst.n) ? inst.cext_root() : v;
          if (std::abs(inst.d(u, v) - inst.cdist(cu, cv) / M) > 1e-7) {
            issue("related tag but d != c/M somewhere");
            goto related_done;
          }
        }
    }
  }
related_done:

  if (inst.has_cext()) {
    int S = inst.n + inst.m + 1;
    if (static_cast<int>(inst.cext.size()) != S) {
      issue("cext size mismatch");
    } else {
      for (int i = 0; i < inst.n; ++i)
        for (int j = 0; j < inst.m; ++j)
          if (std::isfinite(inst.c(i, j)) &&
              std::abs(inst.c(i, j) - inst.cdist(i, inst.n + j)) > 1e-7) {
            issue("cext disagrees with connection costs");
            goto cext_done;
          }
    }
  }
cext_done:

  if (inst.route_count < 1) issue("route count k < 1");
  if (!(inst.route_budget > 0)) issue("route budget B <= 0");
  for (int j = 0; j < inst.m && j < static_cast<int>(inst.client_weight.size()); ++j)
    if (!(inst.client_weight[j] >= 0)) issue("negative client weight");
  return rep;
}

// ---------------------------------------------------------------------------
// Generators

struct GenSpec {
  enum class Family { Euclidean, Related, Uniform, UniformMetric, Mgl, Zfc };
  Family family = Family::Euclidean;
  int n = 4;
  int m = 4;
  double related_m = 2.0;      // M for Related
  double cost_scale = 10.0;    // box side / cost range
  double opening_max = 10.0;   // opening costs drawn from [0, opening_max]
  bool integer_costs = false;  // round generated costs/metrics to integers >= 1
  int d_max = 8;               // for integer time metrics
  int groups = 0;              // Mgl: number of groups (defaults to m)
};

inline Instance generate(const GenSpec& spec, std::uint64_t seed);

namespace detail {

inline double snap_cost(double v, bool integer) { return integer ? std::max(1.0, std::round(v)) : v; }

inline std::vector<std::vector<double>> euclid_matrix(int size, double side, Rng& rng,
                                                      bool integer) {
  std::vector<double> px(size), py(size);
  for (int u = 0; u < size; ++u) {
    px[u] = rng.uniform(0, side);
    py[u] = rng.uniform(0, side);
  }
  std::vector<std::vector<double>> d(size, std::vector<double>(size, 0));
  for (int u = 0; u < size; ++u)
    for (int v = u + 1; v < size; ++v) {
      double w = std::hypot(px[u] - px[v], py[u] - py[v]);
      if (integer) {
        // shortest-path closure keeps rounded weights metric
        w = std::max(1.0, std::round(w));
      }
      d[u][v] = d[v][u] = w;
    }
  if (integer)
    for (int w = 0; w < size; ++w)
      for (int u = 0; u < size; ++u)
        for (int v = 0; v < size; ++v) d[u][v] = std::min(d[u][v], d[u][w] + d[w][v]);
  return d;
}

}  // namespace detail

inline Instance generate(const GenSpec& spec, std::uint64_t seed) {
  if (spec.n <= 0 || spec.m <= 0) throw std::invalid_argument("generate: need n, m >= 1");
  Rng rng(Rng::derive(seed, 0xa11ce));
  Instance inst;
  inst.n = spec.n;
  inst.m = spec.m;
  inst.opening_cost.assign(spec.n, 0.0);
  inst.connection_cost.assign(spec.n, std::vector<double>(spec.m, 0.0));
  const int S = spec.n + spec.m + 1;  // cext node count

  auto random_opening = [&] {
    for (int i = 0; i < spec.n; ++i)
      inst.opening_cost[i] = detail::snap_cost(rng.uniform(0, spec.opening_max),
                                               spec.integer_costs) *
                             (spec.opening_max > 0 ? 1.0 : 0.0);
    if (spec.opening_max <= 0) inst.opening_cost.assign(spec.n, 0.0);
  };

  switch (spec.family) {
    case GenSpec::Family::Euclidean: {
      // independent geometry for time metric and connection costs
      auto dm = detail::euclid_matrix(spec.n + 1, spec.cost_scale, rng, spec.integer_costs);
      inst.time_metric = std::move(dm);
      random_opening();
      for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.m; ++j)
          inst.connection_cost[i][j] =
              detail::snap_cost(rng.uniform(0, spec.cost_scale), spec.integer_costs);
      break;
    }
    case GenSpec::Family::Related: {
      double M = spec.related_m;
      if (M < 1) throw std::invalid_argument("generate: related factor M must be >= 1");
      // base geometry at time-metric scale, connection metric = M * base
      auto base = detail::euclid_matrix(S, spec.cost_scale, rng, spec.integer_costs);
      inst.cext.assign(S, std::vector<double>(S, 0));
      for (int u = 0; u < S; ++u)
        for (int v = 0; v < S; ++v) inst.cext[u][v] = M * base[u][v];
      inst.time_metric.assign(spec.n + 1, std::vector<double>(spec.n + 1, 0));
      for (int u = 0; u <= spec.n; ++u)
        for (int v = 0; v <= spec.n; ++v) {
          int cu = (u == spec.n) ? S - 1 : u;
          int cv = (v == spec.n) ? S - 1 : v;
          inst.time_metric[u][v] = base[cu][cv];
        }
      for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.m; ++j) inst.connection_cost[i][j] = inst.cext[i][spec.n + j];
      random_opening();
      {
        std::ostringstream os;
        os << "related(" << M << ")";
        inst.tags = {os.str(), "metric"};
      }
      break;
    }
    case GenSpec::Family::Uniform:
    case GenSpec::Family::Zfc: {
      inst.time_metric.assign(spec.n + 1, std::vector<double>(spec.n + 1, 1.0));
      for (int u = 0; u <= spec.n; ++u) inst.time_metric[u][u] = 0;
      for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.m; ++j)
          inst.connection_cost[i][j] =
              detail::snap_cost(rng.uniform(0, spec.cost_scale), spec.integer_costs);
      if (spec.family == GenSpec::Family::Uniform) {
        random_opening();
        inst.tags = {"uniform"};
      } else {
        inst.tags = {"uniform", "zfc"};
      }
      break;
    }
    case GenSpec::Family::UniformMetric: {
      inst.time_metric.assign(spec.n + 1, std::vector<double>(spec.n + 1, 1.0));
      for (int u = 0; u <= spec.n; ++u) inst.time_metric[u][u] = 0;
      auto cm = detail::euclid_matrix(S, spec.cost_scale, rng, spec.integer_costs);
      inst.cext = cm;
      for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.m; ++j) inst.connection_cost[i][j] = cm[i][spec.n + j];
      random_opening();
      inst.tags = {"uniform", "metric"};
      break;
    }
    case GenSpec::Family::Mgl: {
      Metric tm = random_integer_metric(spec.n + 1, spec.d_max, rng.next());
      inst.time_metric = tm.d;
      int G = spec.groups > 0 ? spec.groups : spec.m;
      if (G != spec.m) throw std::invalid_argument("generate: mgl needs one client per group");
      for (int j = 0; j < spec.m; ++j) {
        // nonempty random group of facilities
        std::vector<int> members;
        for (int i = 0; i < spec.n; ++i)
          if (rng.bernoulli(0.4)) members.push_back(i);
        if (members.empty()) members.push_back(rng.uniform_int(0, spec.n - 1));
        for (int i = 0; i < spec.n; ++i) inst.connection_cost[i][j] = kInf;
        for (int i : members) inst.connection_cost[i][j] = 0;
      }
      inst.tags = {"mgl", "zfc"};
      break;
    }
  }
  return inst;
}

// ---------------------------------------------------------------------------
// File I/O. One JSON document per instance; null encodes an infinite
// connection cost. See README for the schema.

inline void write_instance(const Instance& inst, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["n"] = inst.n;
  doc["m"] = inst.m;
  doc["f"] = inst.opening_cost;
  {
    nlohmann::ordered_json c = nlohmann::ordered_json::array();
    for (int i = 0; i < inst.n; ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (int j = 0; j < inst.m; ++j) {
        if (std::isfinite(inst.c(i, j)))
          row.push_back(inst.c(i, j));
        else
          row.push_back(nullptr);
      }
      c.push_back(std::move(row));
    }
    doc["c"] = std::move(c);
  }
  doc["d"] = inst.time_metric;
  doc["tags"] = inst.tags;
  if (!inst.client_weight.empty()) doc["lambda"] = inst.client_weight;
  if (inst.route_count != 1) doc["k"] = inst.route_count;
  if (std::isfinite(inst.route_budget)) doc["B"] = inst.route_budget;
  if (inst.latency.kind != LatencyFn::Kind::Identity) {
    nlohmann::ordered_json lat;
    if (inst.latency.kind == LatencyFn::Kind::Power) {
      lat["kind"] = "power";
      lat["p"] = inst.latency.p;
    } else {
      lat["kind"] = "table";
      lat["table"] = inst.latency.table;
    }
    doc["latency"] = std::move(lat);
  }
  if (inst.has_cext()) doc["cext"] = inst.cext;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump(1) << '\n';
}

inline Instance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  auto need = [&](const char* key) {
    if (!doc.contains(key))
      throw std::runtime_error("parse error in " + path + ": missing field '" + key + "'");
    return doc.at(key);
  };
  Instance inst;
  try {
    inst.n = need("n").get<int>();
    inst.m = need("m").get<int>();
    if (inst.n <= 0) throw std::runtime_error("empty facility set");
    inst.opening_cost = need("f").get<std::vector<double>>();
    const auto& c = need("c");
    inst.connection_cost.assign(inst.n, std::vector<double>(inst.m, kInf));
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.m; ++j) {
        const auto& cell = c.at(i).at(j);
        inst.connection_cost[i][j] = cell.is_null() ? kInf : cell.get<double>();
      }
    inst.time_metric = need("d").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(inst.time_metric.size()) != inst.n + 1)
      throw std::runtime_error("d matrix must be (n+1) x (n+1)");
    if (doc.contains("tags")) inst.tags = doc["tags"].get<std::vector<std::string>>();
    if (doc.contains("lambda")) inst.client_weight = doc["lambda"].get<std::vector<double>>();
    if (doc.contains("k")) inst.route_count = doc["k"].get<int>();
    if (doc.contains("B")) inst.route_budget = doc["B"].get<double>();
    if (doc.contains("latency")) {
      const auto& lat = doc["latency"];
      std::string kind = lat.at("kind").get<std::string>();
      if (kind == "power") {
        inst.latency.kind = LatencyFn::Kind::Power;
        inst.latency.p = lat.at("p").get<double>();
      } else if (kind == "table") {
        inst.latency.kind = LatencyFn::Kind::Table;
        inst.latency.table = lat.at("table").get<std::vector<std::pair<double, double>>>();
      } else if (kind != "identity") {
        throw std::runtime_error("unknown latency kind '" + kind + "'");
      }
    }
    if (doc.contains("cext")) inst.cext = doc["cext"].get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  return inst;
}

inline bool operator==(const Instance& a, const Instance& b) {
  auto inf_eq = [](const std::vector<std::vector<double>>& x,
                   const std::vector<std::vector<double>>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != y[i].size()) return false;
      for (std::size_t j = 0; j < x[i].size(); ++j) {
        bool fi = std::isfinite(x[i][j]), fj = std::isfinite(y[i][j]);
        if (fi != fj || (fi && x[i][j] != y[i][j])) return false;
      }
    }
    return true;
  };
  return a.n == b.n && a.m == b.m && a.opening_cost == b.opening_cost &&
         inf_eq(a.connection_cost, b.connection_cost) && a.time_metric == b.time_metric &&
         a.client_weight == b.client_weight && a.route_count == b.route_count &&
         ((std::isfinite(a.route_budget) == std::isfinite(b.route_budget)) &&
          (!std::isfinite(a.route_budget) || a.route_budget == b.route_budget)) &&
         a.tags == b.tags && a.cext == b.cext;
}

}  // namespace mlufl
