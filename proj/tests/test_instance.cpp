#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "fixtures.hpp"
#include "mlufl/instance.hpp"

using namespace mlufl;

TEST_CASE("uniform instance validates", "[instance]") {
  GenSpec gs;
  gs.family = GenSpec::Family::Uniform;
  gs.n = 3;
  gs.m = 2;
  auto inst = generate(gs, 11);
  CHECK(validate(inst).valid());
}

TEST_CASE("triangle violation is reported", "[instance]") {
  auto inst = fixtures::desk1();
  inst.time_metric[2][1] = inst.time_metric[1][2] = 5;  // d(r,b) breaks the triangle
  auto rep = validate(inst);
  REQUIRE_FALSE(rep.valid());
  bool found = false;
  for (const auto& issue : rep.issues)
    if (issue.find("triangle") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("related instances are tag-consistent by construction", "[instance]") {
  GenSpec gs;
  gs.family = GenSpec::Family::Related;
  gs.related_m = 2;
  gs.n = 4;
  gs.m = 3;
  auto inst = generate(gs, 5);
  CHECK(inst.related_factor() == 2.0);
  CHECK(validate(inst).valid());
}

TEST_CASE("evaluate matches brute force on the two-facility fixture", "[instance]") {
  auto inst = fixtures::desk1();
  Solution sol;
  sol.open_set = {0, 1};
  sol.routes = {{0, 1}};
  sol.assignment = {0, 1};
  auto cost = evaluate(inst, sol);
  CHECK(cost.total == Catch::Approx(8.0));
  CHECK(cost.facility_cost == Catch::Approx(5.0));
  CHECK(cost.latency_cost == Catch::Approx(3.0));
  CHECK(cost.total ==
        Catch::Approx(cost.facility_cost + cost.connection_cost + cost.latency_cost));
  CHECK(fixtures::brute_force_mlufl(inst) == Catch::Approx(8.0));

  Solution rev = sol;
  rev.routes = {{1, 0}};
  CHECK(evaluate(inst, rev).total == Catch::Approx(10.0));
}

TEST_CASE("evaluate on an all-zero instance", "[instance]") {
  Instance inst;
  inst.n = 1;
  inst.m = 1;
  inst.opening_cost = {0};
  inst.connection_cost = {{0}};
  inst.time_metric = {{0, 0}, {0, 0}};
  Solution sol;
  sol.open_set = {0};
  sol.routes = {{0}};
  sol.assignment = {0};
  CHECK(evaluate(inst, sol).total == Catch::Approx(0.0));
}

TEST_CASE("evaluate rejects assignment to an unopened facility", "[instance]") {
  auto inst = fixtures::desk1();
  Solution sol;
  sol.open_set = {1};
  sol.routes = {{1}};
  sol.assignment = {0, 1};
  CHECK_THROWS_AS(evaluate(inst, sol), std::invalid_argument);
}

TEST_CASE("latency recomputation agrees with stored prefixes", "[instance]") {
  GenSpec gs;
  gs.family = GenSpec::Family::Euclidean;
  gs.n = 5;
  gs.m = 4;
  auto inst = generate(gs, 3);
  Solution sol;
  sol.open_set = {0, 2, 4};
  sol.routes = {{2, 0, 4}};
  sol.assignment = {2, 0, 4, 2};
  auto cost = evaluate(inst, sol);
  double t = inst.d(inst.root(), 2);
  CHECK(cost.per_client[0].activation_time == Catch::Approx(t));
  t += inst.d(2, 0);
  CHECK(cost.per_client[1].activation_time == Catch::Approx(t));
  t += inst.d(0, 4);
  CHECK(cost.per_client[2].activation_time == Catch::Approx(t));
}

TEST_CASE("generator is deterministic", "[instance]") {
  GenSpec gs;
  gs.family = GenSpec::Family::Related;
  gs.n = 5;
  gs.m = 4;
  auto a = generate(gs, 99);
  auto b = generate(gs, 99);
  CHECK(a == b);
  auto c = generate(gs, 100);
  CHECK_FALSE(a == c);
}

TEST_CASE("uniform generator produces the uniform metric", "[instance]") {
  GenSpec gs;
  gs.family = GenSpec::Family::Uniform;
  gs.n = 4;
  gs.m = 3;
  auto inst = generate(gs, 7);
  for (int u = 0; u <= inst.n; ++u)
    for (int v = 0; v <= inst.n; ++v)
      CHECK(inst.d(u, v) == (u == v ? 0.0 : 1.0));
}

TEST_CASE("group instances use zero opening costs and 0/inf connections", "[instance]") {
  GenSpec gs;
  gs.family = GenSpec::Family::Mgl;
  gs.n = 5;
  gs.m = 4;
  auto inst = generate(gs, 13);
  for (int i = 0; i < inst.n; ++i) {
    CHECK(inst.f(i) == 0.0);
    for (int j = 0; j < inst.m; ++j)
      CHECK((inst.c(i, j) == 0.0 || !std::isfinite(inst.c(i, j))));
  }
  for (int j = 0; j < inst.m; ++j) {
    bool member = false;
    for (int i = 0; i < inst.n; ++i)
      if (inst.c(i, j) == 0.0) member = true;
    CHECK(member);
  }
}

TEST_CASE("instance files round-trip", "[instance]") {
  auto inst = fixtures::desk1();
  inst.tags = {"demo"};
  const std::string path = "test_roundtrip_instance.json";
  write_instance(inst, path);
  auto back = read_instance(path);
  CHECK(inst == back);
  std::remove(path.c_str());

  GenSpec gs;
  gs.family = GenSpec::Family::Mgl;
  gs.n = 4;
  gs.m = 3;
  auto mgl = generate(gs, 21);  // exercises the null encoding for +inf
  write_instance(mgl, path);
  CHECK(mgl == read_instance(path));
  std::remove(path.c_str());
}

TEST_CASE("parse errors carry diagnostics", "[instance]") {
  const std::string path = "test_bad_instance.json";
  {
    std::ofstream out(path);
    out << "{\"n\": 2, \"m\": 1, \"f\": [0, 0], \"c\": [[1],[2]]}";
  }
  CHECK_THROWS_WITH(read_instance(path), Catch::Matchers::ContainsSubstring("missing field 'd'"));
  {
    std::ofstream out(path);
    out << "{\"n\": 0, \"m\": 1, \"f\": [], \"c\": [], \"d\": [[0]]}";
  }
  CHECK_THROWS_WITH(read_instance(path), Catch::Matchers::ContainsSubstring("empty facility set"));
  std::remove(path.c_str());
}
