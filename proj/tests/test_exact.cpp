#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "mlufl/exact.hpp"

using namespace mlufl;

TEST_CASE("two-facility fixture optimum", "[exact]") {
  auto inst = fixtures::desk1();
  auto res = exact_mlufl(inst);
  CHECK(res.value == Catch::Approx(8.0));
  CHECK(res.solution.open_set == std::vector<int>{0, 1});
  CHECK(res.solution.routes[0] == std::vector<int>{0, 1});
  CHECK(res.value == Catch::Approx(fixtures::brute_force_mlufl(inst)));
}

TEST_CASE("zero-cost single facility serves everyone at its distance", "[exact]") {
  Instance inst;
  inst.n = 1;
  inst.m = 3;
  inst.opening_cost = {0};
  inst.connection_cost = {{0, 0, 0}};
  inst.time_metric = {{0, 1}, {1, 0}};
  CHECK(exact_mlufl(inst).value == Catch::Approx(3.0));
}

TEST_CASE("huge opening costs force a single facility", "[exact]") {
  GenSpec gs;
  gs.family = GenSpec::Family::Euclidean;
  gs.n = 4;
  gs.m = 3;
  auto inst = generate(gs, 17);
  for (int i = 1; i < inst.n; ++i) inst.opening_cost[i] = 1e7;
  inst.opening_cost[0] = 0;
  auto res = exact_mlufl(inst);
  CHECK(res.solution.open_set == std::vector<int>{0});
}

TEST_CASE("latency DP matches the permutation oracle", "[exact]") {
  auto met = fixtures::desk2();
  auto res = exact_ml(met);
  CHECK(res.value == Catch::Approx(3.0));
  CHECK(res.order == std::vector<int>{0, 1});

  for (int trial = 0; trial < 40; ++trial) {
    Metric random = random_integer_metric(8, 9, 1000 + trial);
    CHECK(exact_ml(random).value == Catch::Approx(exact_ml_permutation(random)));
  }
}

TEST_CASE("single node latency is its root distance", "[exact]") {
  Metric met = make_metric({{0, 4}, {4, 0}}, 1);
  CHECK(exact_ml(met).value == Catch::Approx(4.0));
}

TEST_CASE("group mode stops once groups are covered", "[exact]") {
  Metric met = random_integer_metric(6, 5, 42);
  std::vector<std::vector<int>> groups = {{0, 1}, {2}, {3, 4}};
  auto res = exact_ml(met, groups);
  // covering order must reach every group
  std::vector<char> hit(groups.size(), 0);
  for (int u : res.order)
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (int v : groups[g])
        if (u == v) hit[g] = 1;
  for (char h : hit) CHECK(h == 1);
  // singleton groups over all nodes reduce to plain latency
  std::vector<std::vector<int>> singletons;
  for (int u = 0; u < met.size; ++u)
    if (u != met.root) singletons.push_back({u});
  CHECK(exact_ml(met, singletons).value == Catch::Approx(exact_ml(met).value));
}

TEST_CASE("set-cover ordering oracle", "[exact]") {
  std::vector<std::vector<int>> sets = {{0, 1}, {2}};
  auto res = exact_mssc(sets, 3);
  CHECK(res.value == Catch::Approx(4.0));
  CHECK(res.order.front() == 0);
  CHECK(res.value == Catch::Approx(fixtures::brute_force_mssc(sets, 3)));

  CHECK(exact_mssc({{0, 1, 2, 3}}, 4).value == Catch::Approx(4.0));  // single set: m

  // identical duplicate sets: only the first matters
  std::vector<std::vector<int>> dup = {{0, 1}, {0, 1}, {2}};
  CHECK(exact_mssc(dup, 3).value == Catch::Approx(4.0));

  for (int trial = 0; trial < 30; ++trial) {
    Rng rng(500 + trial);
    int elements = rng.uniform_int(2, 6);
    int count = rng.uniform_int(2, 5);
    std::vector<std::vector<int>> rs(count);
    for (int e = 0; e < elements; ++e) rs[rng.uniform_int(0, count - 1)].push_back(e);
    for (int s = 0; s < count; ++s)
      for (int e = 0; e < elements; ++e)
        if (rng.bernoulli(0.3)) rs[s].push_back(e);
    CHECK(exact_mssc(rs, elements).value ==
          Catch::Approx(fixtures::brute_force_mssc(rs, elements)));
  }
}

TEST_CASE("plain facility location enumeration", "[exact]") {
  Instance one;
  one.n = 1;
  one.m = 2;
  one.opening_cost = {3};
  one.connection_cost = {{1, 2}};
  one.time_metric = {{0, 1}, {1, 0}};
  auto res = exact_ufl(one);
  CHECK(res.open == std::vector<int>{0});
  CHECK(res.value == Catch::Approx(6.0));

  GenSpec gs;
  gs.family = GenSpec::Family::Euclidean;
  gs.n = 5;
  gs.m = 4;
  auto inst = generate(gs, 23);
  for (double& f : inst.opening_cost) f = 0;
  auto all_open = exact_ufl(inst);
  double expect = 0;
  for (int j = 0; j < inst.m; ++j) {
    double best = kInf;
    for (int i = 0; i < inst.n; ++i) best = std::min(best, inst.c(i, j));
    expect += best;
  }
  CHECK(all_open.value == Catch::Approx(expect));

  auto d1 = fixtures::desk1();
  auto res1 = exact_ufl(d1);
  CHECK(res1.value == Catch::Approx(5.0));
  CHECK(res1.open == std::vector<int>{0, 1});

  // cardinality cap
  auto capped = exact_ufl(d1, 1);
  CHECK(capped.open.size() == 1);
  CHECK(capped.value == Catch::Approx(10.0));
}
