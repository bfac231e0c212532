#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "ternperm/extremal.hpp"
#include "ternperm/zeroone.hpp"

using namespace ternperm;

namespace {

std::vector<Taxon> iota_taxa(int n) {
  std::vector<Taxon> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

// Independent oracle: do k trees (caterpillars) from the full enumeration
// display every triplet? Never touches the 0/1 model.
bool direct_cover(int n, int k, bool cat) {
  const auto full = full_triplet_set(n).triplets;
  std::vector<std::uint64_t> masks;
  for (const auto& t : enumerate_trees(iota_taxa(n))) {
    if (cat && !is_caterpillar(t)) continue;
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < full.size(); ++i)
      if (displays(t, full[i])) m |= std::uint64_t{1} << i;
    masks.push_back(m);
  }
  const std::uint64_t all = (full.size() == 64) ? ~0ULL : (std::uint64_t{1} << full.size()) - 1;
  std::function<bool(std::size_t, int, std::uint64_t)> rec = [&](std::size_t from, int left, std::uint64_t acc) {
    if (acc == all) return true;
    if (left == 0) return false;
    for (std::size_t i = from; i < masks.size(); ++i)
      if (rec(i, left - 1, acc | masks[i])) return true;
    return false;
  };
  return rec(0, k, 0);
}

bool row_holds(const ModelRow& row, const std::vector<char>& x) {
  int lhs = 0;
  for (auto [v, c] : row.terms) lhs += c * x[static_cast<std::size_t>(v)];
  return row.sense == '<' ? lhs <= row.rhs : row.sense == '>' ? lhs >= row.rhs : lhs == row.rhs;
}

bool brute_sat(int nv, const std::vector<std::vector<int>>& cls) {
  for (std::uint32_t a = 0; a < (1U << nv); ++a) {
    bool ok = true;
    for (const auto& c : cls) {
      bool any = false;
      for (int l : c) any = any || (((a >> (l >> 1)) & 1U) != static_cast<unsigned>(l & 1));
      ok = ok && any;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("zero-one solver") {
  SUBCASE("pigeonhole 4 into 3 is refuted") {
    ZeroOneSolver s(12);
    auto var = [](int p, int h) { return p * 3 + h; };
    for (int p = 0; p < 4; ++p) s.add_clause({pos_lit(var(p, 0)), pos_lit(var(p, 1)), pos_lit(var(p, 2))});
    for (int h = 0; h < 3; ++h) s.add_at_most_one({pos_lit(var(0, h)), pos_lit(var(1, h)), pos_lit(var(2, h)), pos_lit(var(3, h))});
    CHECK(s.solve().answer == Answer::no);
  }
  SUBCASE("random 3-CNF agrees with brute force") {
    std::mt19937 rng(17);
    for (int it = 0; it < 300; ++it) {
      const int nv = 4 + it % 9;
      const int nc = static_cast<int>(nv * (3.0 + (it % 5) * 0.5));
      std::vector<std::vector<int>> cls;
      std::uniform_int_distribution<int> lit(0, 2 * nv - 1);
      for (int c = 0; c < nc; ++c) cls.push_back({lit(rng), lit(rng), lit(rng)});
      ZeroOneSolver s(nv);
      for (const auto& c : cls) s.add_clause(c);
      const auto r = s.solve();
      REQUIRE(r.answer != Answer::unknown);
      CHECK((r.answer == Answer::yes) == brute_sat(nv, cls));
      if (r.answer == Answer::yes)
        for (const auto& c : cls)
          CHECK(std::any_of(c.begin(), c.end(), [&](int l) { return r.values[static_cast<std::size_t>(l >> 1)] != (l & 1); }));
    }
  }
  SUBCASE("conflict budget") {
    ZeroOneSolver s(30);
    auto var = [](int p, int h) { return p * 5 + h; };
    for (int p = 0; p < 6; ++p) {
      std::vector<int> c;
      for (int h = 0; h < 5; ++h) c.push_back(pos_lit(var(p, h)));
      s.add_clause(c);
    }
    for (int h = 0; h < 5; ++h) {
      std::vector<int> c;
      for (int p = 0; p < 6; ++p) c.push_back(pos_lit(var(p, h)));
      s.add_at_most_one(c);
    }
    CHECK(s.solve(3).answer == Answer::unknown);
    CHECK(s.solve().answer == Answer::no);
  }
  CHECK_THROWS_AS(ZeroOneSolver(2).add_clause({pos_lit(5)}), std::invalid_argument);
}

TEST_CASE("full triplet set") {
  auto t3 = full_triplet_set(3);
  CHECK(t3.size() == 3);
  CHECK(format_triplets(t3) == "1 2 | 3\n1 3 | 2\n2 3 | 1\n");
  for (int n = 3; n <= 9; ++n) CHECK(full_triplet_set(n).size() == static_cast<std::size_t>(n * (n - 1) * (n - 2) / 2));
  CHECK(full_triplet_set(5).size() == 30);
  CHECK_THROWS_AS(full_triplet_set(2), std::invalid_argument);
}

TEST_CASE("cover model rows describe trees exactly") {
  for (int n : {4, 5})
    for (bool cat : {false, true}) {
      const auto m = build_cover_model(n, 1, cat);
      std::set<std::vector<Triplet>> expected;
      for (const auto& t : enumerate_trees(iota_taxa(n)))
        if (!cat || is_caterpillar(t)) expected.insert(displayed_triplets(t));
      // choose one orientation per leaf triple, keep those passing groups 2-5
      const int triples = n * (n - 1) * (n - 2) / 6;
      std::set<std::vector<Triplet>> got;
      std::vector<int> choice(static_cast<std::size_t>(triples), 0);
      for (;;) {
        std::vector<char> x(m.triplets.size(), 0);
        int idx = 0;
        for (Taxon a = 0; a < n; ++a)
          for (Taxon b = a + 1; b < n; ++b)
            for (Taxon c = b + 1; c < n; ++c) {
              const Triplet opts[3] = {make_triplet(a, b, c), make_triplet(a, c, b), make_triplet(b, c, a)};
              const auto t = opts[choice[static_cast<std::size_t>(idx++)]];
              x[static_cast<std::size_t>(std::lower_bound(m.triplets.begin(), m.triplets.end(), t) - m.triplets.begin())] = 1;
            }
        if (std::all_of(m.rows.begin(), m.rows.end(), [&](const ModelRow& r) { return r.group == 1 || row_holds(r, x); })) {
          std::vector<Triplet> set;
          for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i]) set.push_back(m.triplets[i]);
          got.insert(set);
        }
        std::size_t p = 0;
        while (p < choice.size() && ++choice[p] == 3) choice[p++] = 0;
        if (p == choice.size()) break;
      }
      CHECK(got == expected);
      CHECK(expected.size() == (cat ? (n == 4 ? 12u : 60u) : (n == 4 ? 15u : 105u)));
    }
}

TEST_CASE("tau decisions agree with a direct tree search") {
  for (int n = 3; n <= 5; ++n)
    for (int k = 1; k <= 4; ++k)
      for (bool cat : {false, true}) {
        const auto d = tau_decision(n, k, cat);
        REQUIRE(d.answer != Answer::unknown);
        CHECK((d.answer == Answer::yes) == direct_cover(n, k, cat));
      }
}

TEST_CASE("tau table") {
  const std::map<int, int> expect{{3, 3}, {4, 3}, {5, 4}, {6, 4}, {7, 4}};
  for (auto [n, v] : expect)
    for (bool cat : {false, true}) {
      const auto r = tau(n, cat);
      CHECK(r.exact);
      CHECK(r.value == v);
      REQUIRE(r.trees.size() == static_cast<std::size_t>(v));
      const auto full = full_triplet_set(n);
      for (const auto& t : full.triplets)
        CHECK(std::any_of(r.trees.begin(), r.trees.end(), [&](const RootedTree& x) { return displays(x, t); }));
      if (cat)
        for (const auto& x : r.trees) CHECK(is_caterpillar(x));
      CHECK(r.value <= log_upper_bound(n));
    }
  CHECK(tau_decision(3, 3, false).answer == Answer::yes);
  CHECK(tau_decision(3, 2, true).answer == Answer::no);
  CHECK(tau_decision(5, 3, false).answer == Answer::no);
  CHECK(tau_decision(4, 3, true).answer == Answer::yes);
}

TEST_CASE("LP export") {
  const auto m = build_cover_model(4, 2, true);
  const auto lp = export_lp(m);
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Subject To") != std::string::npos);
  CHECK(lp.find(" g1_1: x_1_2_3_1 + x_1_2_3_2 >= 1\n") != std::string::npos);
  CHECK(lp.find(" g2_1: x_1_2_3_1 + x_1_3_2_1 + x_2_3_1_1 = 1\n") != std::string::npos);
  CHECK(lp.find(" - x_") != std::string::npos);
  CHECK(lp.find("g5_") != std::string::npos);
  CHECK(lp.find("Binary\n x_1_2_3_1\n") != std::string::npos);
  CHECK(lp.substr(lp.size() - 4) == "End\n");
  CHECK(export_lp(build_cover_model(4, 2, false)).find("g5_") == std::string::npos);
  CHECK(std::count_if(m.rows.begin(), m.rows.end(), [](const ModelRow& r) { return r.group == 1; }) == 12);
}

TEST_CASE("log bound and greedy caterpillar cover") {
  const int row[] = {3, 7, 9, 11, 12, 13, 14, 15, 16, 17};
  for (int n = 3; n <= 12; ++n) CHECK(log_upper_bound(n) == row[n - 3]);
  for (int n = 3; n <= 8; ++n) {
    const auto g = greedy_caterpillar_cover(full_triplet_set(n));
    CHECK(static_cast<int>(g.caterpillars.size()) <= log_upper_bound(n));
    for (std::size_t i = 0; i < g.covered.size(); ++i) CHECK(3 * g.covered[i] >= g.remaining[i]);
  }
  TripletSet one;
  one.add("a", "b", "c");
  CHECK(greedy_caterpillar_cover(one).caterpillars.size() == 1);

  std::mt19937 rng(4);
  for (int it = 0; it < 50; ++it) {
    TripletSet r;
    const int n = 4 + it % 6;
    for (int i = 0; i < n; ++i) r.labels.intern(std::to_string(i));
    std::uniform_int_distribution<Taxon> pick(0, n - 1);
    for (int j = 0; j < 3 * n; ++j) {
      const Taxon a = pick(rng), b = pick(rng), c = pick(rng);
      if (a != b && b != c && a != c) r.triplets.push_back(make_triplet(a, b, c));
    }
    r.normalize();
    const auto g = greedy_caterpillar_cover(r);
    for (std::size_t i = 0; i < g.covered.size(); ++i) CHECK(3 * g.covered[i] >= g.remaining[i]);
    for (const auto& t : r.triplets)
      CHECK(std::any_of(g.caterpillars.begin(), g.caterpillars.end(), [&](const RootedTree& x) { return displays(x, t); }));
  }
}

TEST_CASE("unrooted trees and rootings") {
  auto star = UnrootedTree::caterpillar(3);
  auto r3 = rootings_of(star);
  CHECK(r3.size() == 3);
  std::set<std::vector<Triplet>> shown;
  for (const auto& t : r3) {
    CHECK(displayed_triplets(t).size() == 1);
    shown.insert(displayed_triplets(t));
  }
  CHECK(shown.size() == 3);
  CHECK(rootings_of(UnrootedTree::caterpillar(4)).size() == 5);

  std::mt19937 rng(8);
  for (int n = 4; n <= 9; ++n) {
    auto t = UnrootedTree::grow(n, [&](std::size_t m) { return std::uniform_int_distribution<std::size_t>(0, m - 1)(rng); });
    const auto rs = rootings_of(t);
    CHECK(rs.size() == static_cast<std::size_t>(2 * n - 3));
    for (const auto& r : rs) {
      CHECK(r.num_leaves() == static_cast<std::size_t>(n));
      CHECK(displayed_triplets(r).size() == static_cast<std::size_t>(n * (n - 1) * (n - 2) / 6));
    }
    // distinct root locations give distinct rooted trees
    CHECK(std::set<RootedTree>(rs.begin(), rs.end()).size() == rs.size());
  }
  CHECK_THROWS_AS(UnrootedTree({{0, 1}}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(rooted_at(star, 7), std::invalid_argument);
}

TEST_CASE("missing triplet") {
  auto brute_missing = [](const UnrootedTree& t, const std::vector<int>& locs, const Triplet& x) {
    return std::none_of(locs.begin(), locs.end(), [&](int e) { return displays(rooted_at(t, e), x); });
  };
  auto four = UnrootedTree::caterpillar(4);
  for (std::size_t e = 0; e < four.edges().size(); ++e) {
    const std::vector<int> locs{static_cast<int>(e)};
    const auto m = find_missing_triplet(four, locs);
    REQUIRE(m.has_value());
    CHECK(brute_missing(four, locs, m->triplet));
  }

  std::mt19937 rng(12);
  int constructive = 0;
  for (int it = 0; it < 200; ++it) {
    const int k = 1 + it % 4;
    const int n = std::max(4, std::min(12, k * k - 5 + static_cast<int>(rng() % 3)));
    auto t = (it % 3 == 0) ? UnrootedTree::caterpillar(n)
                           : UnrootedTree::grow(n, [&](std::size_t m) { return std::uniform_int_distribution<std::size_t>(0, m - 1)(rng); });
    std::vector<int> locs;
    std::uniform_int_distribution<int> edge(0, static_cast<int>(t.edges().size()) - 1);
    for (int j = 0; j < k; ++j) locs.push_back(edge(rng));
    const auto m = find_missing_triplet(t, locs);
    REQUIRE(m.has_value());
    CHECK(brute_missing(t, locs, m->triplet));
    if (n > k * k - 6) {
      CHECK(m->method != "scan");
      ++constructive;
    }
  }
  CHECK(constructive > 100);

  auto cat11 = UnrootedTree::caterpillar(11);
  for (int it = 0; it < 20; ++it) {
    std::vector<int> locs;
    for (int j = 0; j < 4; ++j) locs.push_back(static_cast<int>(rng() % cat11.edges().size()));
    const auto m = find_missing_triplet(cat11, locs);
    REQUIRE(m.has_value());
    CHECK(brute_missing(cat11, locs, m->triplet));
  }

  // every rooting of a 4-leaf tree together displays all 12 triplets
  std::vector<int> all_edges;
  for (std::size_t e = 0; e < four.edges().size(); ++e) all_edges.push_back(static_cast<int>(e));
  CHECK_FALSE(find_missing_triplet(four, all_edges).has_value());
}
