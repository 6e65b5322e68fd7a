// Command-line driver: solve relaxations, round them, run exact baselines,
// validate instance files, and batch experiments into CSV/Markdown reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mlufl/bench.hpp"

namespace {

int exit_usage(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 2;
}

mlufl::Instance load(const std::string& path) { return mlufl::read_instance(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimum-latency facility location toolkit"};
  app.require_subcommand(1);

  std::string instance_path, config_path, out_dir, format = "csv", algo = "general";
  double eps = 0.5, alpha = 8.0 / 9, beta = 0.5, p = 1.0, budget = 0;
  int k = 1, trials = 1;
  std::uint64_t seed = 1;
  bool dump = false;

  auto add_common = [&](CLI::App* cmd, bool needs_instance) {
    auto* opt = cmd->add_option("--instance", instance_path, "instance file (JSON)");
    if (needs_instance) opt->required();
    cmd->add_option("--eps", eps, "time-grid accuracy");
    cmd->add_option("--alpha", alpha, "zero-cost filtering parameter");
    cmd->add_option("--beta", beta, "facility-location filtering parameter");
    cmd->add_option("--p", p, "latency growth exponent");
    cmd->add_option("--k", k, "route count");
    cmd->add_option("--budget", budget, "route length budget (0 = unbounded)");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--trials", trials, "number of trials");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--format", format, "csv or md");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check an instance file");
  add_common(validate_cmd, true);

  auto* solve_cmd = app.add_subcommand("solve", "solve the LP relaxation");
  add_common(solve_cmd, true);
  solve_cmd->add_flag("--dump-lp", dump, "print the model in LP text form");

  auto* round_cmd = app.add_subcommand("round", "solve and round one instance");
  add_common(round_cmd, true);
  round_cmd->add_option("--algo", algo,
                        "general|related|uniform-general|zfc|metric-uniform|ml-lp1|ml-lp2");

  auto* exact_cmd = app.add_subcommand("exact", "exact baseline (enumeration)");
  add_common(exact_cmd, true);

  auto* bench_cmd = app.add_subcommand("bench", "batch experiments");
  add_common(bench_cmd, false);
  bench_cmd->add_option("--algo", algo, "algorithm id");
  bench_cmd->add_option("--config", config_path, "JSON config file (mirrors the flags)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (validate_cmd->parsed()) {
      auto inst = load(instance_path);
      auto rep = mlufl::validate(inst);
      for (const auto& issue : rep.issues) std::cout << "issue: " << issue << "\n";
      std::cout << (rep.valid() ? "valid" : "invalid") << "\n";
      return rep.valid() ? 0 : 1;
    }

    if (solve_cmd->parsed()) {
      auto inst = load(instance_path);
      inst.route_count = k;
      if (budget > 0) inst.route_budget = budget;
      if (inst.uniform()) {
        auto res = mlufl::solve_uniform_relaxation(inst);
        std::cout << "value " << res.value << "\n";
        return res.status == mlufl::LpSolution::Status::Optimal ? 0 : 3;
      }
      auto ts = mlufl::build_timescale(inst, eps);
      auto built = mlufl::build_mlufl_lp(inst, ts);
      if (dump) std::cout << built.model.dump_lp();
      mlufl::CutLog log;
      auto sol = mlufl::cutting_plane_solve(built.model, built.oracle, 400, &log);
      std::cout << "value " << sol.objective << " cuts " << log.cuts_added << " rounds "
                << log.rounds << "\n";
      return sol.status == mlufl::LpSolution::Status::Optimal ? 0 : 3;
    }

    if (exact_cmd->parsed()) {
      auto inst = load(instance_path);
      auto res = mlufl::exact_mlufl(inst);
      std::cout << "optimum " << res.value << "\norder";
      for (int i : res.solution.routes[0]) std::cout << ' ' << i;
      std::cout << "\n";
      return 0;
    }

    mlufl::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = mlufl::ExperimentConfig::from_json_file(config_path);
    if (round_cmd->parsed()) cfg.trials = trials;
    if (bench_cmd->parsed() && config_path.empty()) cfg.trials = trials;
    if (!instance_path.empty()) cfg.instance_path = instance_path;
    if (round_cmd->parsed() || (bench_cmd->parsed() && config_path.empty())) {
      cfg.algo = algo;
      cfg.eps = eps;
      cfg.alpha = alpha;
      cfg.beta = beta;
      cfg.p = p;
      cfg.k = k;
      cfg.budget = budget > 0 ? budget : mlufl::kInf;
      cfg.seed = seed;
      cfg.format = format;
      cfg.out_dir = out_dir;
    }

    auto rep = mlufl::run(cfg);
    std::string csv = rep.csv();
    std::string tbl = mlufl::table({rep}, cfg.format);
    if (!cfg.out_dir.empty()) {
      std::filesystem::create_directories(cfg.out_dir);
      std::ofstream(cfg.out_dir + "/trials.csv") << csv;
      std::ofstream(cfg.out_dir + "/summary." + (cfg.format == "md" ? "md" : "csv")) << tbl;
    } else {
      std::cout << csv << tbl;
    }
    if (rep.violations > 0) return 1;
    if (rep.failures > 0) return 3;
    return 0;
  } catch (const std::invalid_argument& e) {
    return exit_usage(e.what());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
