#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mlufl/colgen.hpp"
#include "mlufl/exact.hpp"
#include "mlufl/instance.hpp"
#include "mlufl/round_general.hpp"
#include "mlufl/round_ml.hpp"
#include "mlufl/round_related.hpp"
#include "mlufl/round_uniform.hpp"

namespace mlufl {

// Run a function over [0, count) on a small thread pool; results land in
// order, so the output is independent of scheduling.
template <typename F>
void parallel_for(int count, F&& fn, int threads = 0) {
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int a = 0; a < count; ++a) fn(a);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int a = next.fetch_add(1); a < count; a = next.fetch_add(1)) fn(a);
    });
  for (auto& th : pool) th.join();
}

struct ExperimentConfig {
  std::string algo = "general";  // general | related | uniform-general | zfc |
                                 // metric-uniform | ml-lp1 | ml-lp2
  std::string family = "euclidean";
  std::string instance_path;  // overrides the generator when set
  int n = 5, m = 5;
  double eps = 0.5;
  double alpha = 8.0 / 9;
  double beta = 0.5;
  double p = 1.0;
  int k = 1;
  double budget = kInf;
  double related_m = 2.0;
  int trials = 1;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string format = "csv";
  bool corrupt = false;  // test hook: sabotage one assignment and expect a violation

  static ExperimentConfig from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json doc;
    in >> doc;
    ExperimentConfig c;
    auto get = [&](const char* key, auto& slot) {
      if (doc.contains(key)) slot = doc[key].get<std::decay_t<decltype(slot)>>();
    };
    get("algo", c.algo);
    get("family", c.family);
    get("instance", c.instance_path);
    get("n", c.n);
    get("m", c.m);
    get("eps", c.eps);
    get("alpha", c.alpha);
    get("beta", c.beta);
    get("p", c.p);
    get("k", c.k);
    get("budget", c.budget);
    get("related_m", c.related_m);
    get("trials", c.trials);
    get("seed", c.seed);
    get("out", c.out_dir);
    get("format", c.format);
    get("corrupt", c.corrupt);
    return c;
  }
};

struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  double cost = 0;
  double v_lp = 0;
  double exact_value = 0;  // 0 when instance above exact limits
  double ratio_lp = 0;
  double ratio_exact = 0;
  double cert_slack = 0;  // worst certificate slack (positive = violation)
  double runtime_ms = 0;
};

struct ReportBundle {
  ExperimentConfig config;
  std::vector<TrialRow> rows;
  int violations = 0;
  int failures = 0;

  // trial CSV is a pure function of the config (timings live in the table)
  std::string csv() const {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "trial,seed,success,cost,v_lp,exact,ratio_lp,ratio_exact,cert_slack\n";
    for (const auto& r : rows)
      os << r.trial << ',' << r.seed << ',' << (r.success ? 1 : 0) << ',' << r.cost << ','
         << r.v_lp << ',' << r.exact_value << ',' << r.ratio_lp << ',' << r.ratio_exact
         << ',' << r.cert_slack << '\n';
    return os.str();
  }
};

namespace detail {

inline GenSpec spec_for(const ExperimentConfig& c) {
  GenSpec gs;
  gs.n = c.n;
  gs.m = c.m;
  gs.related_m = c.related_m;
  if (c.family == "euclidean")
    gs.family = GenSpec::Family::Euclidean;
  else if (c.family == "related")
    gs.family = GenSpec::Family::Related;
  else if (c.family == "uniform")
    gs.family = GenSpec::Family::Uniform;
  else if (c.family == "uniform-metric")
    gs.family = GenSpec::Family::UniformMetric;
  else if (c.family == "mgl")
    gs.family = GenSpec::Family::Mgl;
  else if (c.family == "zfc")
    gs.family = GenSpec::Family::Zfc;
  else
    throw std::invalid_argument("unknown family: " + c.family);
  return gs;
}

inline Instance trial_instance(const ExperimentConfig& c, int trial) {
  Instance inst;
  if (!c.instance_path.empty())
    inst = read_instance(c.instance_path);
  else
    inst = generate(spec_for(c), Rng::derive(c.seed, 0x1457, trial));
  inst.route_count = c.k;
  inst.route_budget = c.budget;
  if (c.p > 1 && (c.algo == "general")) {
    inst.latency.kind = LatencyFn::Kind::Power;
    inst.latency.p = c.p;
  }
  return inst;
}

}  // namespace detail

inline TrialRow run_trial(const ExperimentConfig& cfg, int trial) {
  TrialRow row;
  row.trial = trial;
  row.seed = Rng::derive(cfg.seed, 0x7121a1, trial);
  auto clock0 = std::chrono::steady_clock::now();
  Instance inst = detail::trial_instance(cfg, trial);
  auto rep = validate(inst);
  if (!rep.valid()) throw std::invalid_argument("invalid instance: " + rep.issues.front());

  Solution sol;
  double cert_slack = 0;
  bool success = false;
  double v_lp = 0;

  if (cfg.algo == "general") {
    RoundGeneralParams params;
    params.seed = row.seed;
    if (cfg.p > 1) {
      params.mode = RoundGeneralParams::Mode::Growth;
      params.growth_p = cfg.p;
    }
    auto out = round_general_lp_driver(inst, cfg.eps, params);
    v_lp = out.v_lp;
    success = out.round.success;
    if (success) {
      sol = out.round.sol;
      cert_slack = out.round.connection_slack;
    }
  } else if (cfg.algo == "related") {
    auto relax = solve_mlufl_relaxation(inst, cfg.eps);
    v_lp = relax.value;
    auto out = round_related(inst, relax.frac);
    sol = out.sol;
    success = true;
    cert_slack = out.certs.ok() ? 0.0 : 1.0;
  } else if (cfg.algo == "uniform-general") {
    auto relax = solve_uniform_relaxation(inst);
    v_lp = relax.value;
    auto out = round_uniform_general(inst, relax.frac, row.seed);
    sol = out.sol;
    success = true;
    cert_slack = out.chain_slack;
  } else if (cfg.algo == "zfc") {
    auto relax = solve_uniform_relaxation(inst);
    v_lp = relax.value;
    auto out = round_zfc(inst, relax.frac, cfg.alpha);
    sol = out.sol;
    success = true;
    cert_slack = out.conn_slack;
  } else if (cfg.algo == "metric-uniform") {
    auto relax = solve_uniform_relaxation(inst);
    v_lp = relax.value;
    std::vector<std::vector<double>> xa(inst.n, std::vector<double>(inst.m, 0));
    std::vector<double> ya(inst.n, 0);
    for (int i = 0; i < inst.n; ++i) {
      for (int t = 1; t <= relax.frac.T; ++t) ya[i] += relax.frac.yv(i, t);
      for (int j = 0; j < inst.m; ++j)
        for (int t = 1; t <= relax.frac.T; ++t) xa[i][j] += relax.frac.xv(i, j, t);
    }
    auto ufl = round_ufl(inst, xa, ya, cfg.beta);
    Instance zfc_inst = inst;
    zfc_inst.opening_cost.assign(inst.n, 0.0);
    auto relax0 = solve_uniform_relaxation(zfc_inst);
    auto zfc = round_zfc(zfc_inst, relax0.frac, cfg.alpha);
    auto comb = combine_metric_uniform(inst, ufl, zfc);
    sol = comb.sol;
    success = true;
    cert_slack = comb.ok() && ufl.ok() ? 0.0 : 1.0;
  } else if (cfg.algo == "ml-lp1" || cfg.algo == "ml-lp2") {
    Metric met = inst.facility_metric();
    TimeScale ts = TimeScale::geometric(std::max((met.size - 1) * met.max_distance(), 1.0),
                                        std::min(std::max(cfg.eps, 1e-3), 1.0));
    if (cfg.algo == "ml-lp1") {
      auto relax = solve_ml_lp1(met, ts, cfg.k);
      v_lp = relax.value;
      auto out = round_ml_lp1_det(relax.frac);
      success = out.certs_ok();
      row.cost = out.total_latency;
    } else {
      ColgenOptions opt;
      opt.a = cfg.k;
      auto lp2 = solve_ml_lp2_colgen(met, ts, opt);
      v_lp = lp2.value;
      auto out = round_ml_lp2(met, lp2, row.seed);
      success = out.covered_all;
      row.cost = out.total_latency;
    }
    row.v_lp = v_lp;
    row.success = success;
    row.ratio_lp = v_lp > 0 ? row.cost / v_lp : 1;
    auto clock1 = std::chrono::steady_clock::now();
    row.runtime_ms = std::chrono::duration<double, std::milli>(clock1 - clock0).count();
    return row;
  } else {
    throw std::invalid_argument("unknown algorithm: " + cfg.algo);
  }

  if (success) {
    if (cfg.corrupt && inst.m > 0 && inst.n > 1) {
      // sabotage hook: reroute client 0 to the farthest open facility
      int worst = sol.assignment[0];
      for (int i : sol.open_set)
        if (std::isfinite(inst.c(i, 0)) && inst.c(i, 0) > inst.c(worst, 0)) worst = i;
      sol.assignment[0] = worst;
      cert_slack = std::max(cert_slack, 1.0);
    }
    auto cost = evaluate(inst, sol);
    row.cost = cost.total;
  }
  row.success = success;
  row.v_lp = v_lp;
  row.cert_slack = cert_slack;
  row.ratio_lp = (success && v_lp > 0) ? row.cost / v_lp : (success ? 1 : 0);
  if (inst.n <= 8 && cfg.algo != "ml-lp1" && cfg.algo != "ml-lp2" && inst.route_count == 1 &&
      inst.latency.identity()) {
    row.exact_value = exact_mlufl(inst).value;
    if (success && row.exact_value > 0) row.ratio_exact = row.cost / row.exact_value;
  }
  auto clock1 = std::chrono::steady_clock::now();
  row.runtime_ms = std::chrono::duration<double, std::milli>(clock1 - clock0).count();
  return row;
}

inline ReportBundle run(const ExperimentConfig& cfg) {
  ReportBundle rep;
  rep.config = cfg;
  rep.rows.resize(cfg.trials);
  parallel_for(cfg.trials, [&](int t) { rep.rows[t] = run_trial(cfg, t); });
  for (const auto& r : rep.rows) {
    if (!r.success) ++rep.failures;
    if (r.cert_slack > 1e-6) ++rep.violations;
  }
  return rep;
}

// One aggregated line per report: mean and p95 of cost / bound ratios plus
// success rate and runtime.
inline std::string table(const std::vector<ReportBundle>& reports, const std::string& format) {
  auto pct = [](std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    int ix = std::min<int>(static_cast<int>(v.size()) - 1,
                           static_cast<int>(std::ceil(q * v.size())) - 1);
    return v[std::max(ix, 0)];
  };
  std::ostringstream os;
  os << std::setprecision(6);
  const bool md = format == "md";
  if (md) {
    os << "| algo | trials | success | mean c/LP | p95 c/LP | mean c/OPT | mean ms |\n";
    os << "|------|--------|---------|-----------|----------|------------|---------|\n";
  } else {
    os << "algo,trials,success_rate,mean_ratio_lp,p95_ratio_lp,mean_ratio_exact,mean_ms\n";
  }
  for (const auto& rep : reports) {
    std::vector<double> rlp, rex;
    double ok = 0, ms = 0;
    for (const auto& r : rep.rows) {
      if (r.success) {
        if (r.ratio_lp > 0) rlp.push_back(r.ratio_lp);
        if (r.ratio_exact > 0) rex.push_back(r.ratio_exact);
        ++ok;
      }
      ms += r.runtime_ms;
    }
    double mean_lp = 0, mean_ex = 0;
    for (double v : rlp) mean_lp += v;
    for (double v : rex) mean_ex += v;
    mean_lp = rlp.empty() ? 0 : mean_lp / rlp.size();
    mean_ex = rex.empty() ? 0 : mean_ex / rex.size();
    double rate = rep.rows.empty() ? 1.0 : ok / rep.rows.size();
    double mean_ms = rep.rows.empty() ? 0.0 : ms / rep.rows.size();
    if (md)
      os << "| " << rep.config.algo << " | " << rep.rows.size() << " | " << rate << " | "
         << mean_lp << " | " << pct(rlp, 0.95) << " | " << mean_ex << " | " << mean_ms
         << " |\n";
    else
      os << rep.config.algo << ',' << rep.rows.size() << ',' << rate << ',' << mean_lp << ','
         << pct(rlp, 0.95) << ',' << mean_ex << ',' << mean_ms << '\n';
  }
  return os.str();
}

}  // namespace mlufl
