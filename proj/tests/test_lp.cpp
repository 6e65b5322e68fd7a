#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "mlufl/lp.hpp"
#include "mlufl/rng.hpp"

using namespace mlufl;

TEST_CASE("single lower bound", "[lp]") {
  LpModel lp;
  int x = lp.add_var("x", {0, 0, 0}, 1.0);
  lp.add_row({{x, 1.0}}, LpModel::Sense::GE, 3.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(3.0));
  CHECK(sol.x[x] == Catch::Approx(3.0));
  CHECK(sol.duality_gap <= 1e-6 * (1 + std::abs(sol.objective)));
}

TEST_CASE("two-variable covering", "[lp]") {
  LpModel lp;
  int x = lp.add_var("x", {0, 0, 0}, 1.0);
  int y = lp.add_var("y", {0, 0, 0}, 1.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, LpModel::Sense::GE, 1.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(1.0));
}

TEST_CASE("infeasible and unbounded are flagged", "[lp]") {
  LpModel bad;
  int x = bad.add_var("x", {0, 0, 0}, 1.0);
  bad.add_row({{x, 1.0}}, LpModel::Sense::GE, 2.0);
  bad.add_row({{x, 1.0}}, LpModel::Sense::LE, 1.0);
  CHECK(solve_lp(bad).status == LpSolution::Status::Infeasible);

  LpModel open;
  int u = open.add_var("u", {0, 0, 0}, -1.0);
  open.add_row({{u, 1.0}}, LpModel::Sense::GE, 0.0);
  CHECK(solve_lp(open).status == LpSolution::Status::Unbounded);
}

TEST_CASE("random LPs satisfy duality and feasibility residuals", "[lp]") {
  for (int trial = 0; trial < 60; ++trial) {
    Rng rng(777 + trial);
    int nv = rng.uniform_int(2, 8);
    int nr = rng.uniform_int(1, 8);
    LpModel lp;
    for (int v = 0; v < nv; ++v) lp.add_var("v", {v, 0, 0}, rng.uniform(0.1, 3.0));
    for (int r = 0; r < nr; ++r) {
      std::vector<std::pair<int, double>> coef;
      for (int v = 0; v < nv; ++v)
        if (rng.bernoulli(0.6)) coef.emplace_back(v, rng.uniform(0.2, 2.0));
      if (coef.empty()) coef.emplace_back(rng.uniform_int(0, nv - 1), 1.0);
      lp.add_row(std::move(coef), LpModel::Sense::GE, rng.uniform(0.5, 4.0));
    }
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpSolution::Status::Optimal);
    CHECK(sol.max_violation <= 1e-7);
    CHECK(sol.duality_gap <= 1e-6 * (1 + std::abs(sol.objective)));
  }
}

TEST_CASE("equality rows and duals", "[lp]") {
  LpModel lp;
  int x = lp.add_var("x", {0, 0, 0}, 2.0);
  int y = lp.add_var("y", {1, 0, 0}, 1.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, LpModel::Sense::EQ, 4.0);
  lp.add_row({{x, 1.0}}, LpModel::Sense::LE, 3.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(4.0));  // all mass on y
  CHECK(sol.x[y] == Catch::Approx(4.0));
  CHECK(sol.duality_gap <= 1e-6 * (1 + sol.objective));
}

TEST_CASE("single arc flow", "[lp]") {
  FlowNetwork net;
  net.node_count = 2;
  net.source = 0;
  net.sink = 1;
  net.add_arc(0, 1, 5.0);
  auto res = max_flow(net);
  CHECK(res.value == Catch::Approx(5.0));
  CHECK(res.source_side[0] == 1);
  CHECK(res.source_side[1] == 0);
}

TEST_CASE("parallel paths add up", "[lp]") {
  FlowNetwork net;
  net.node_count = 4;
  net.source = 0;
  net.sink = 3;
  net.add_arc(0, 1, 2.0);
  net.add_arc(1, 3, 2.0);
  net.add_arc(0, 2, 3.0);
  net.add_arc(2, 3, 3.0);
  CHECK(max_flow(net).value == Catch::Approx(5.0));
}

// exhaustive cut enumeration on tiny networks
static double min_cut_enumerated(const FlowNetwork& net) {
  double best = kInf;
  for (std::uint32_t mask = 0; mask < (1u << net.node_count); ++mask) {
    if (!(mask >> net.source & 1) || (mask >> net.sink & 1)) continue;
    double cap = 0;
    for (const auto& a : net.arcs)
      if ((mask >> a.from & 1) && !(mask >> a.to & 1)) cap += a.cap;
    best = std::min(best, cap);
  }
  return best;
}

TEST_CASE("max flow equals the enumerated min cut", "[lp]") {
  FlowNetwork diamond;
  diamond.node_count = 4;
  diamond.source = 0;
  diamond.sink = 3;
  diamond.add_arc(0, 1, 4.0);
  diamond.add_arc(0, 2, 4.0);
  diamond.add_arc(1, 2, 1.0);
  diamond.add_arc(1, 3, 1.0);
  diamond.add_arc(2, 3, 2.0);
  auto res = max_flow(diamond);
  CHECK(res.value == Catch::Approx(min_cut_enumerated(diamond)));

  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(31337 + trial);
    FlowNetwork net;
    net.node_count = 6;
    net.source = 0;
    net.sink = 5;
    for (int u = 0; u < 6; ++u)
      for (int v = 0; v < 6; ++v)
        if (u != v && rng.bernoulli(0.5)) net.add_arc(u, v, rng.uniform(0.0, 3.0));
    auto mf = max_flow(net);
    CHECK(mf.value == Catch::Approx(min_cut_enumerated(net)).margin(1e-9));
    // returned value is exactly the capacity of the returned cut
    double cap = 0;
    for (const auto& a : net.arcs)
      if (mf.source_side[a.from] && !mf.source_side[a.to]) cap += a.cap;
    CHECK(mf.value == cap);
  }
}

TEST_CASE("cutting planes stop immediately when satisfied", "[lp]") {
  LpModel lp;
  int x = lp.add_var("x", {0, 0, 0}, 1.0);
  lp.add_row({{x, 1.0}}, LpModel::Sense::GE, 1.0);
  CutLog log;
  auto sol = cutting_plane_solve(
      lp, [](const LpModel&, const LpSolution&) { return std::vector<LpModel::Row>{}; }, 50,
      &log);
  CHECK(sol.status == LpSolution::Status::Optimal);
  CHECK(log.rounds == 1);
}

TEST_CASE("an oracle that always cuts hits the round limit", "[lp]") {
  LpModel lp;
  int x = lp.add_var("x", {0, 0, 0}, 1.0);
  lp.add_row({{x, 1.0}}, LpModel::Sense::GE, 1.0);
  int counter = 0;
  auto sol = cutting_plane_solve(
      lp,
      [&counter, x](const LpModel&, const LpSolution&) {
        // fresh tag each round so deduplication never stops it
        return std::vector<LpModel::Row>{
            {{{x, 1.0}}, LpModel::Sense::GE, 0.0, "stub/" + std::to_string(counter++)}};
      },
      10);
  CHECK(sol.status == LpSolution::Status::IterationLimit);
}

TEST_CASE("cutting planes converge on a separable polytope", "[lp]") {
  // minimize x subject to x >= 1 - epsilon-cuts discovered lazily
  LpModel lp;
  int x = lp.add_var("x", {0, 0, 0}, 1.0);
  lp.add_row({{x, 1.0}}, LpModel::Sense::GE, 0.0);
  auto oracle = [x](const LpModel&, const LpSolution& sol) {
    std::vector<LpModel::Row> cuts;
    for (int step = 1; step <= 4; ++step)
      if (sol.x[x] < step - 1e-6)
        cuts.push_back({{{x, 1.0}}, LpModel::Sense::GE, double(step),
                        "step/" + std::to_string(step)});
    return cuts;
  };
  CutLog log;
  auto sol = cutting_plane_solve(lp, oracle, 50, &log);
  REQUIRE(sol.status == LpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(4.0));
  CHECK(log.cuts_added >= 4);
}

TEST_CASE("model dump mentions variables and senses", "[lp]") {
  LpModel lp;
  int x = lp.add_var("x", {1, 2, 3}, 1.5);
  lp.add_row({{x, 1.0}}, LpModel::Sense::GE, 2.0, "demo");
  auto text = lp.dump_lp();
  CHECK(text.find("x/1/2/3") != std::string::npos);
  CHECK(text.find(">=") != std::string::npos);
  CHECK(text.find("demo") != std::string::npos);
}
