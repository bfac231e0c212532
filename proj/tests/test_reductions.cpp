#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "ternperm/gadgets.hpp"
#include "ternperm/reductions.hpp"

using namespace ternperm;

namespace {

Instance csp(int m, int pi, int k, const std::vector<Constraint>& cons) {
  Instance inst;
  for (int v = 0; v < m; ++v) inst.vars.intern(std::string(1, static_cast<char>('a' + v)));
  inst.pi = pi_family(pi);
  inst.k = k;
  inst.constraints = cons;
  return inst;
}

std::vector<VarId> shuffled(std::mt19937& rng, int m) {
  std::vector<VarId> s(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) s[static_cast<std::size_t>(i)] = i;
  std::shuffle(s.begin(), s.end(), rng);
  return s;
}

// Random source with a planted solution: each constraint is oriented so that
// one of the planted orderings satisfies it.
std::pair<Instance, Solution> planted(std::mt19937& rng, int m, int pi, int k, int nc) {
  Solution sol;
  for (int t = 0; t < k; ++t) sol.orderings.emplace_back(shuffled(rng, m));
  const auto fam = pi_family(pi);
  std::vector<Constraint> cons;
  std::uniform_int_distribution<int> pick_t(0, k - 1);
  std::uniform_int_distribution<std::size_t> pick_w(0, fam.perms().size() - 1);
  while (static_cast<int>(cons.size()) < nc) {
    auto trio = shuffled(rng, m);
    const auto& alpha = sol.orderings[static_cast<std::size_t>(pick_t(rng))];
    std::sort(trio.begin(), trio.begin() + 3, [&](VarId x, VarId y) { return alpha.position(x) < alpha.position(y); });
    // word w lists which constraint slot sits at each position
    const auto w = fam.perms()[pick_w(rng)];
    Constraint c{};
    for (int i = 0; i < 3; ++i) c.v[static_cast<std::size_t>(w[static_cast<std::size_t>(i)] - 1)] = trio[static_cast<std::size_t>(i)];
    cons.push_back(c);
  }
  auto inst = csp(m, pi, k, cons);
  REQUIRE(check_solution(inst, sol));
  return {inst, sol};
}

std::vector<Constraint> all_triples(int m) {
  std::vector<Constraint> out;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        if (a != b && b != c && a != c) out.push_back({{a, b, c}});
  return out;
}

SolveResult exact(const Instance& inst) {
  SolverConfig cfg;
  cfg.symmetry_breaking = true;
  if (inst.num_vars() <= 7) cfg.mode = SearchMode::exhaustive;
  return solve(inst, cfg);
}

void check_equisatisfiable(const CspReduction& red) {
  const auto a = exact(red.source);
  const auto b = exact(red.target);
  REQUIRE(a.answer != Answer::unknown);
  CHECK(a.answer == b.answer);
  if (a.answer == Answer::yes) CHECK(check_solution(red.target, red.lift_forward(*a.solution)));
  if (b.answer == Answer::yes) CHECK(check_solution(red.source, red.lift_backward(*b.solution)));
}

bool covers(const Trees& trees, const TripletSet& r) {
  return std::all_of(r.triplets.begin(), r.triplets.end(), [&](const Triplet& x) {
    return std::any_of(trees.begin(), trees.end(), [&](const RootedTree& t) { return displays(t, x); });
  });
}

RootedTree random_tree(std::mt19937& rng, std::vector<Taxon> taxa) {
  std::vector<RootedTree> parts;
  for (auto x : taxa) parts.push_back(RootedTree::single(x));
  while (parts.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
    const auto i = pick(rng);
    auto a = parts[i];
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(i));
    std::uniform_int_distribution<std::size_t> pick2(0, parts.size() - 1);
    const auto j = pick2(rng);
    parts[j] = RootedTree::join(a, parts[j]);
  }
  return parts.front();
}

Digraph random_digraph(std::mt19937& rng, int n, double p, std::size_t max_out = 99) {
  Digraph d(static_cast<std::size_t>(n));
  std::bernoulli_distribution arc(p);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && d.out_degree(u) < max_out && arc(rng)) d.add_arc(u, v);
  return d;
}

Digraph digraph_from_mask(int n, std::uint32_t mask) {
  Digraph d(static_cast<std::size_t>(n));
  int bitpos = 0;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && ((mask >> bitpos++) & 1U)) d.add_arc(u, v);
  return d;
}

}  // namespace

TEST_CASE("fresh names and registry") {
  CHECK(fresh_name("2pi0-to-2pi1", "3", "d") == "g:2pi0-to-2pi1:3:d");
  CHECK(reduction_names().size() == 10);
  for (const auto& n : reduction_names()) {
    CHECK_FALSE(reduction_input_kind(n).empty());
    CHECK_FALSE(reduction_output_kind(n).empty());
  }
  CHECK(reduction_input_kind("2cat-to-3tree") == "triplets");
  CHECK(reduction_output_kind("outdeg3-to-2cat") == "triplets");
  CHECK(reduction_input_kind("dichromatic-to-outdeg3") == "digraph");
  CHECK_THROWS_AS(reduction_input_kind("nope"), std::invalid_argument);
}

TEST_CASE("mirror reductions") {
  auto r = reduce_1pi5_to_2pi0(csp(3, 5, 1, {{{0, 1, 2}}}));
  std::vector<Constraint> expect{{{0, 1, 2}}, {{2, 1, 0}}};
  CHECK(r.target.constraints == expect);
  CHECK(r.target.k == 2);
  CHECK(r.target.pi == pi_family(0));
  CHECK(reduce_1pi5_to_2pi0(csp(3, 5, 1, {})).target.constraints.empty());

  auto q = reduce_1pi9_to_2pi4(csp(3, 9, 1, {{{0, 1, 2}}}));
  std::vector<Constraint> expect4{{{1, 0, 2}}, {{1, 2, 0}}};
  std::sort(expect4.begin(), expect4.end());
  CHECK(q.target.constraints == expect4);
  CHECK(q.target.pi == pi_family(4));

  CHECK_THROWS_AS(reduce_1pi5_to_2pi0(csp(3, 9, 1, {})), std::invalid_argument);

  std::mt19937 rng(7);
  for (int it = 0; it < 20; ++it) {
    auto [src, sol] = planted(rng, 6, 5, 1, 6);
    src.normalize();
    // a constraint and its reversal are the same betweenness constraint
    std::set<Constraint> seen;
    std::vector<Constraint> distinct;
    for (const auto& c : src.constraints)
      if (seen.insert(c).second && seen.insert(Constraint{{c.v[2], c.v[1], c.v[0]}}).second) distinct.push_back(c);
    src.constraints = distinct;
    CHECK(reduce_1pi5_to_2pi0(src).target.constraints.size() == 2 * src.constraints.size());
  }
}

TEST_CASE("size counts of the ordering reductions") {
  std::mt19937 rng(11);
  for (int it = 0; it < 10; ++it) {
    auto [s1, x1] = planted(rng, 6, 0, 2, 5);
    s1.normalize();
    auto r1 = reduce_2pi0_to_2pi1(s1);
    const auto n = s1.constraints.size();
    CHECK(r1.target.num_vars() == s1.num_vars() + 2 * n);
    CHECK(r1.target.constraints.size() == 5 * n);

    auto [s5, x5] = planted(rng, 6, 5, 1, 4);
    s5.normalize();
    auto r5 = reduce_1pi5_to_2pi5(s5);
    CHECK(r5.manifest.size("C2") == 3 * s5.constraints.size());
    CHECK(r5.manifest.size("C3") == 4 * s5.num_vars());
    CHECK(r5.manifest.size("C4") == 8 * s5.constraints.size());
    CHECK(r5.target.num_vars() == s5.num_vars() + 5 + 2 * s5.constraints.size());

    auto [s6, x6] = planted(rng, 5, 1, 2, 4);
    s6.normalize();
    auto r6 = reduce_2pi1_to_2pi6(s6);
    CHECK(r6.manifest.size("C2") == 3 * s6.constraints.size());
    CHECK(r6.target.num_vars() == s6.num_vars() + 3);
  }
  CHECK(reduce_2pi0_to_2pi1(csp(3, 0, 2, {{{0, 1, 2}}})).target.num_vars() == 5);

  auto r9 = reduce_1pi5_to_2pi9(csp(4, 5, 1, {{{3, 1, 0}}}));
  CHECK(r9.target.num_vars() == 7);
  CHECK(r9.manifest.size("generated_constraints") == 280);
  CHECK_THROWS_AS(r9.manifest.size("missing"), std::invalid_argument);
}

TEST_CASE("fresh variables never reuse source names") {
  auto src = csp(4, 5, 1, {{{0, 1, 2}}, {{1, 2, 3}}});
  for (auto* f : {reduce_1pi5_to_2pi5, reduce_1pi5_to_2pi9}) {
    auto r = f(src);
    std::set<std::string> names(r.target.vars.names().begin(), r.target.vars.names().end());
    CHECK(names.size() == r.target.num_vars());
    for (const auto& n : r.target.vars.names())
      if (!src.vars.contains(n)) CHECK(n.rfind("g:", 0) == 0);
  }
}

TEST_CASE("forward lifts of planted sources") {
  std::mt19937 rng(3);
  struct Case {
    CspReduction (*f)(const Instance&);
    int pi;
    int k;
  };
  for (auto c : {Case{reduce_1pi5_to_2pi0, 5, 1}, Case{reduce_2pi0_to_2pi1, 0, 2}, Case{reduce_1pi9_to_2pi4, 9, 1},
                 Case{reduce_1pi5_to_2pi5, 5, 1}, Case{reduce_2pi1_to_2pi6, 1, 2}, Case{reduce_1pi5_to_2pi9, 5, 1}}) {
    for (int it = 0; it < 15; ++it) {
      auto [src, sol] = planted(rng, 7, c.pi, c.k, 6);
      auto r = c.f(src);
      const auto lifted = r.lift_forward(sol);
      CHECK(check_solution(r.target, lifted));
      CHECK(check_solution(r.source, r.lift_backward(lifted)));
    }
  }
}

TEST_CASE("lifts reject invalid solutions") {
  auto r = reduce_1pi5_to_2pi5(csp(4, 5, 1, {{{0, 1, 2}}, {{1, 0, 2}}}));
  Solution bad;
  bad.orderings.emplace_back(std::vector<VarId>{0, 1, 2, 3});
  CHECK_THROWS_AS(r.lift_forward(bad), std::invalid_argument);
}

TEST_CASE("equisatisfiability of the ordering reductions") {
  const auto triples = all_triples(4);
  SUBCASE("2-Pi0 and 2-Pi4 on two constraints") {
    for (std::size_t i = 0; i < triples.size(); ++i)
      for (std::size_t j = i + 1; j < triples.size(); ++j) {
        check_equisatisfiable(reduce_1pi5_to_2pi0(csp(4, 5, 1, {triples[i], triples[j]})));
        check_equisatisfiable(reduce_1pi9_to_2pi4(csp(4, 9, 1, {triples[i], triples[j]})));
      }
  }
  SUBCASE("2-Pi5 on contradictory and consistent pairs") {
    check_equisatisfiable(reduce_1pi5_to_2pi5(csp(4, 5, 1, {{{0, 1, 2}}})));
    check_equisatisfiable(reduce_1pi5_to_2pi5(csp(4, 5, 1, {{{0, 1, 2}}, {{1, 0, 2}}})));
    check_equisatisfiable(reduce_1pi5_to_2pi5(csp(4, 5, 1, {{{0, 1, 2}}, {{1, 2, 3}}})));
  }
  SUBCASE("2-Pi9 on one constraint") {
    for (const auto& c : triples) check_equisatisfiable(reduce_1pi5_to_2pi9(csp(4, 5, 1, {c})));
  }
  SUBCASE("2-Pi6 and 2-Pi1 on one constraint") {
    for (const auto& c : triples) {
      check_equisatisfiable(reduce_2pi1_to_2pi6(csp(4, 1, 2, {c})));
      check_equisatisfiable(reduce_2pi0_to_2pi1(csp(4, 0, 2, {c})));
    }
  }
}

TEST_CASE("caterpillar reductions: sizes and labels") {
  // triplets displayed by at least one gadget tree
  const auto gadget = derive_caterpillar_triple();
  std::uint64_t gadget_size = 0;
  for (Taxon x = 0; x < 6; ++x)
    for (Taxon y = x + 1; y < 6; ++y)
      for (Taxon z = 0; z < 6; ++z) {
        if (z == x || z == y) continue;
        const auto t = make_triplet(x, y, z);
        gadget_size += std::any_of(gadget.trees.begin(), gadget.trees.end(),
                                   [&](const RootedTree& g) { return displays(g, t); });
      }
  TripletSet one;
  one.add("a", "b", "c");
  auto r = reduce_2cat_to_3cat(one);
  CHECK(r.manifest.size("C") == gadget_size);
  CHECK(r.manifest.size("R1") == 12);
  CHECK(r.manifest.size("R2") == 1);
  CHECK(r.manifest.size("R3") == 1);
  CHECK(r.manifest.size("R4") == 6);
  CHECK(r.manifest.size("R5") == 4);
  CHECK(r.target.labels.size() == 6 + 3 + 1);

  auto q = reduce_2cat_to_3tree(one);
  CHECK(q.manifest.size("R1") == 36);
  CHECK(q.manifest.size("R2") == 8);
  CHECK(q.manifest.size("R3") == 3);
  CHECK(q.manifest.size("R4") == 1);
  CHECK(q.manifest.size("R5") == 6);
  CHECK(q.manifest.size("R6") == 4);
  // only R1..R3 differ between the two reductions
  CHECK(q.manifest.size("R4") == r.manifest.size("R3"));
  CHECK(q.manifest.size("R5") == r.manifest.size("R4"));
  CHECK(q.manifest.size("R6") == r.manifest.size("R5"));

  auto empty = reduce_2cat_to_3cat(TripletSet{});
  CHECK(empty.target.size() == gadget_size);
  CHECK(empty.manifest.size("target_labels") == 6);

  TripletSet clash;
  clash.add("a", "3", "c");
  CHECK_THROWS_AS(reduce_2cat_to_3cat(clash), std::invalid_argument);
  CHECK_THROWS_AS(reduce_2cat_to_3tree(clash), std::invalid_argument);
}

TEST_CASE("caterpillar reductions: lifts") {
  std::mt19937 rng(5);
  for (int it = 0; it < 30; ++it) {
    // two random caterpillars on six labels; source = sample of their triplets
    std::vector<Taxon> taxa{0, 1, 2, 3, 4, 5};
    Trees cats{caterpillar_of(LinearOrdering(shuffled(rng, 6))), caterpillar_of(LinearOrdering(shuffled(rng, 6)))};
    TripletSet src;
    for (int i = 0; i < 6; ++i) src.labels.intern("x" + std::to_string(i));
    for (const auto& c : cats) {
      auto d = displayed_triplets(c);
      std::shuffle(d.begin(), d.end(), rng);
      src.triplets.insert(src.triplets.end(), d.begin(), d.begin() + 3);
    }
    src.normalize();
    for (bool trees : {false, true}) {
      auto r = trees ? reduce_2cat_to_3tree(src) : reduce_2cat_to_3cat(src);
      const auto lifted = r.lift_forward(cats);
      REQUIRE(lifted.size() == 3);
      CHECK(covers(lifted, r.target));
      for (const auto& t : lifted) CHECK(is_caterpillar(t));
      const auto back = r.lift_backward(lifted);
      CHECK(back.size() <= 2);
      CHECK(covers(back, r.source));
      for (const auto& t : back) CHECK(is_caterpillar(t));
    }
  }
}

TEST_CASE("caterpillar reductions: one-triplet equisatisfiability") {
  TripletSet one;
  one.add("a", "b", "c");
  auto r = reduce_2cat_to_3cat(one);
  auto src = k_tree_compatible(r.source, 2, true);
  auto tgt = k_tree_compatible(r.target, 3, true);
  CHECK(src.answer == Answer::yes);
  REQUIRE(tgt.answer == Answer::yes);
  CHECK(covers(r.lift_backward(tgt.trees), r.source));
  CHECK(covers(r.lift_forward(src.trees), r.target));
}

TEST_CASE("flatten_to_caterpillar") {
  std::mt19937 rng(9);
  std::vector<Taxon> frame{0, 1, 2, 3, 4, 5};
  for (int it = 0; it < 10; ++it) {
    auto cat = caterpillar_of(LinearOrdering(shuffled(rng, 10)));
    // frame cherry must be the tree's cherry and span the root
    const auto order = ordering_of(cat).seq();
    std::vector<Taxon> fr{order[0], order[8], order[9]};
    CHECK(flatten_to_caterpillar(cat, fr) == cat);
  }

  // randomized valid inputs: caterpillar frame on 0..5 with pendant subtrees
  int checked = 0;
  for (int attempt = 0; checked < 200 && attempt < 200000; ++attempt) {
    std::vector<Taxon> taxa(10);
    for (int i = 0; i < 10; ++i) taxa[static_cast<std::size_t>(i)] = i;
    auto t = random_tree(rng, taxa);
    auto framed = restrict_tree(t, frame);
    if (!is_caterpillar(framed)) continue;
    const auto ch = cherries(framed).front();
    const auto tc = cherries(t);
    if (!std::count(tc.begin(), tc.end(), ch)) continue;
    const auto& root = t.node(t.root());
    auto has_frame = [&](int n) {
      auto cl = t.cluster(n);
      return std::any_of(cl.begin(), cl.end(), [](Taxon x) { return x < 6; });
    };
    if (!has_frame(root.left) || !has_frame(root.right)) continue;
    ++checked;
    auto s = flatten_to_caterpillar(t);
    REQUIRE(is_caterpillar(s));
    CHECK(s.leaves() == t.leaves());
    const Taxon c = ch.first;
    for (Taxon x = 0; x < 10; ++x)
      for (Taxon y = 0; y < 10; ++y) {
        if (x == c || y == c || x == y) continue;
        const int lx = t.lca_taxa(c, x), ly = t.lca_taxa(c, y);
        if (ly != lx && t.is_ancestor(ly, lx)) {
          const int sx = s.lca_taxa(c, x), sy = s.lca_taxa(c, y);
          CHECK((sy != sx && s.is_ancestor(sy, sx)));
        }
      }
  }
  CHECK(checked == 200);

  auto bad = RootedTree::join(RootedTree::join(RootedTree::single(0), RootedTree::single(1)),
                              RootedTree::join(RootedTree::single(2), RootedTree::single(3)));
  std::vector<Taxon> fr{0, 1, 2, 3};
  CHECK_THROWS_AS(flatten_to_caterpillar(bad, fr), std::invalid_argument);
}

TEST_CASE("dichromatic to out-degree three") {
  Digraph star(6);
  for (int v = 1; v <= 5; ++v) star.add_arc(0, v);
  auto r = reduce_dichromatic_to_outdeg3(star);
  CHECK(r.target.max_out_degree() <= 3);
  CHECK(r.manifest.size("expanded_vertices") == 1);
  std::size_t tree_vertices = 0;
  for (const auto& n : r.target.names().names())
    if (n.find(":t") != std::string::npos) ++tree_vertices;
  CHECK(tree_vertices == 3);

  std::mt19937 rng(21);
  for (int it = 0; it < 60; ++it) {
    const int n = 4 + it % 3;
    auto d = random_digraph(rng, n, 0.55);
    auto red = reduce_dichromatic_to_outdeg3(d);
    CHECK(red.target.max_out_degree() <= 3);
    const auto a = two_dicolorable(d);
    const auto b = two_dicolorable(red.target);
    CHECK(a.answer == b.answer);
    if (a.answer == Answer::yes) CHECK(is_dicoloring(red.target, red.lift_forward(a.colors)));
    if (b.answer == Answer::yes) CHECK(is_dicoloring(d, red.lift_backward(b.colors)));
  }
}

TEST_CASE("out-degree three to 2-caterpillar") {
  Digraph d(4);
  d.add_arc(0, 1);
  auto r1 = reduce_outdeg3_to_2cat(d);
  CHECK(r1.target.size() == 1);
  CHECK(r1.manifest.size("dummy_taxa") == 1);
  CHECK(r1.target.labels.name(r1.target.triplets[0].b).rfind("g:", 0) == 0);
  d.add_arc(0, 2);
  CHECK(reduce_outdeg3_to_2cat(d).target.size() == 1);
  d.add_arc(0, 3);
  CHECK(reduce_outdeg3_to_2cat(d).target.size() == 3);
  d.add_arc(1, 0);
  d.add_arc(1, 2);
  d.add_arc(1, 3);
  d.add_arc(2, 0);
  d.add_arc(2, 1);
  d.add_arc(2, 3);
  d.add_arc(3, 0);
  d.add_arc(3, 1);
  CHECK(reduce_outdeg3_to_2cat(d).manifest.size("dummy_taxa") == 0);
  Digraph wide(5);
  for (int v = 1; v < 5; ++v) wide.add_arc(0, v);
  CHECK_THROWS_AS(reduce_outdeg3_to_2cat(wide), std::invalid_argument);

  auto check = [](const Digraph& g) {
    auto r = reduce_outdeg3_to_2cat(g);
    const auto a = two_dicolorable(g);
    const auto b = k_tree_compatible(r.target, 2, true);
    CHECK(a.answer == b.answer);
    if (a.answer == Answer::yes) CHECK(covers(r.lift_forward(a.colors), r.target));
    if (b.answer == Answer::yes) CHECK(is_dicoloring(g, r.lift_backward(b.trees)));
  };
  for (std::uint32_t mask = 0; mask < (1U << 12); mask += 7) check(digraph_from_mask(4, mask));
  std::mt19937 rng(33);
  for (int it = 0; it < 20; ++it) check(random_digraph(rng, 5 + it % 2, 0.6, 3));
}

TEST_CASE("caterpillar reductions reject a source needing three caterpillars") {
  TripletSet all;
  all.add("a", "b", "c");
  all.add("a", "c", "b");
  all.add("b", "c", "a");
  all.normalize();
  const auto r = reduce_2cat_to_3cat(all);
  CHECK(k_tree_compatible(r.target, 3, true).answer == Answer::no);

  all.add("c", "d", "a");
  all.normalize();
  CHECK(k_tree_compatible(reduce_2cat_to_3cat(all).target, 3, true).answer == Answer::no);
}
