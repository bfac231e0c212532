#include <random>
#include <set>

#include "doctest.h"
#include "ternperm/solver.hpp"

using namespace ternperm;

namespace {

Instance make_instance(int m, int pi, int k, const std::vector<Constraint>& cons) {
  Instance inst;
  for (int v = 0; v < m; ++v) inst.vars.intern(std::to_string(v));
  inst.pi = pi_family(pi);
  inst.k = k;
  inst.constraints = cons;
  inst.normalize();
  return inst;
}

Instance generated(const std::vector<std::vector<VarId>>& gens, int pi) {
  std::vector<Constraint> cons;
  for (const auto& g : gens) {
    auto c = implied_constraints(LinearOrdering(g), pi_family(pi));
    cons.insert(cons.end(), c.begin(), c.end());
  }
  return make_instance(static_cast<int>(gens.front().size()), pi, static_cast<int>(gens.size()), cons);
}

// Independent oracle: every multiset of k orderings, scanned naively.
std::set<Solution> brute_solutions(const Instance& inst) {
  std::vector<VarId> s(inst.num_vars());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<VarId>(i);
  std::vector<LinearOrdering> all;
  do all.emplace_back(s);
  while (std::next_permutation(s.begin(), s.end()));
  std::set<Solution> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(inst.k), 0);
  for (;;) {
    Solution sol;
    for (auto i : idx) sol.orderings.push_back(all[i]);
    if (check_solution(inst, sol)) {
      sol.canonicalize();
      out.insert(sol);
    }
    std::size_t p = 0;
    while (p < idx.size() && ++idx[p] == all.size()) idx[p++] = 0;
    if (p == idx.size()) break;
  }
  return out;
}

Instance random_instance(std::mt19937& rng, int m, int pi, int k, int nc) {
  std::vector<Constraint> cons;
  std::uniform_int_distribution<VarId> pick(0, m - 1);
  while (static_cast<int>(cons.size()) < nc) {
    Constraint c{{pick(rng), pick(rng), pick(rng)}};
    if (c.v[0] != c.v[1] && c.v[0] != c.v[2] && c.v[1] != c.v[2]) cons.push_back(c);
  }
  return make_instance(m, pi, k, cons);
}

}  // namespace

TEST_CASE("check_solution") {
  auto two = make_instance(3, 0, 1, {{{0, 1, 2}}, {{1, 2, 0}}});
  CHECK_FALSE(check_solution(two, Solution{{identity_ordering(3)}}));

  std::mt19937 rng(3);
  auto inst = random_instance(rng, 6, 2, 2, 15);
  auto alpha = LinearOrdering({3, 1, 4, 0, 5, 2});
  CHECK(check_solution(inst, Solution{{alpha, reversal(alpha)}}));

  auto gadget = generated({{0, 1, 2, 3, 4}, {4, 1, 2, 3, 0}}, 5);
  CHECK(check_solution(gadget, Solution{{LinearOrdering({0, 1, 2, 3, 4}), LinearOrdering({4, 1, 2, 3, 0})}}));
  CHECK_THROWS_AS(check_solution(gadget, Solution{{identity_ordering(4)}}), std::invalid_argument);
  CHECK_FALSE(check_solution(two, Solution{{identity_ordering(3), identity_ordering(3)}}));
}

TEST_CASE("solve small cases") {
  auto one = make_instance(3, 0, 1, {{{0, 1, 2}}});
  auto r = solve(one);
  REQUIRE(r.answer == Answer::yes);
  CHECK(check_solution(one, *r.solution));

  auto contra = make_instance(3, 0, 1, {{{0, 1, 2}}, {{2, 1, 0}}});
  CHECK(solve(contra).answer == Answer::no);
  CHECK(solve(contra, {.mode = SearchMode::exhaustive}).answer == Answer::no);

  auto empty = make_instance(4, 0, 1, {});
  CHECK(enumerate_solutions(empty).solutions.size() == 24);
  CHECK(enumerate_solutions(empty, {.mode = SearchMode::exhaustive}).solutions.size() == 24);
}

TEST_CASE("node limit reports unknown or throws") {
  auto gadget = generated({{0, 1, 2, 3, 4, 5, 6}, {1, 4, 6, 2, 0, 5, 3}}, 9);
  SolverConfig cfg;
  cfg.node_limit = 5;
  CHECK(solve(gadget, cfg).answer == Answer::unknown);
  CHECK_THROWS_AS(enumerate_solutions(gadget, cfg), BudgetExceeded);
}

TEST_CASE("gadget enumeration") {
  auto pi6 = generated({{0, 1, 2, 3}, {1, 3, 0, 2}}, 6);
  auto sols = enumerate_solutions(pi6).solutions;
  REQUIRE(sols.size() == 1);
  CHECK(sols[0].orderings == std::vector<LinearOrdering>{LinearOrdering({0, 1, 2, 3}), LinearOrdering({1, 3, 0, 2})});

  auto pi5 = generated({{0, 1, 2, 3, 4}, {4, 1, 2, 3, 0}}, 5);
  auto five = enumerate_solutions(pi5).solutions;
  CHECK(five.size() == 4);
  std::set<Solution> expected;
  for (auto x : {LinearOrdering({0, 1, 2, 3, 4}), LinearOrdering({4, 3, 2, 1, 0})})
    for (auto y : {LinearOrdering({4, 1, 2, 3, 0}), LinearOrdering({0, 3, 2, 1, 4})}) {
      Solution s{{x, y}};
      s.canonicalize();
      expected.insert(s);
    }
  CHECK(std::set<Solution>(five.begin(), five.end()) == expected);
  CHECK(enumerate_solutions(pi5, {.mode = SearchMode::exhaustive}).solutions == five);
}

TEST_CASE("branch and bound agrees with exhaustive and brute force") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 3 + trial % 3;
    const int pi = trial % 11;
    const int k = 1 + (trial / 3) % 2;
    const int nc = 1 + static_cast<int>(rng() % 8);
    auto inst = random_instance(rng, m, pi, k, nc);
    auto oracle = brute_solutions(inst);
    auto bb = enumerate_solutions(inst).solutions;
    auto ex = enumerate_solutions(inst, {.mode = SearchMode::exhaustive}).solutions;
    REQUIRE(std::set<Solution>(bb.begin(), bb.end()) == oracle);
    REQUIRE(bb.size() == oracle.size());
    REQUIRE(ex == bb);
    for (bool sym : {false, true}) {
      SolverConfig cfg;
      cfg.symmetry_breaking = sym;
      auto r = solve(inst, cfg);
      REQUIRE(r.answer == (oracle.empty() ? Answer::no : Answer::yes));
      if (r.solution) REQUIRE(check_solution(inst, *r.solution));
      cfg.mode = SearchMode::exhaustive;
      REQUIRE(solve(inst, cfg).answer == r.answer);
    }
  }
}

TEST_CASE("monotone in k and relabeling invariant") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    auto inst = random_instance(rng, 5, static_cast<int>(rng() % 11), 1, 6);
    const auto a1 = solve(inst).answer;
    inst.k = 2;
    const auto a2 = solve(inst).answer;
    if (a1 == Answer::yes) CHECK(a2 == Answer::yes);

    std::vector<VarId> f{3, 0, 4, 1, 2};
    Instance relabeled = inst;
    for (auto& c : relabeled.constraints)
      for (auto& v : c.v) v = f[static_cast<std::size_t>(v)];
    relabeled.normalize();
    CHECK(solve(relabeled).answer == a2);
  }
}
