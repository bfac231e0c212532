#include "ternperm/gadgets.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace ternperm {

const char* to_string(SymmetryKind k) {
  switch (k) {
    case SymmetryKind::none: return "none";
    case SymmetryKind::per_order_reversal: return "per_order_reversal";
    case SymmetryKind::swap_last_two: return "swap_last_two";
  }
  return "none";
}

Solution quotient(const Solution& s, SymmetryKind kind) {
  Solution q = s;
  for (auto& alpha : q.orderings) {
    if (kind == SymmetryKind::per_order_reversal) {
      auto rev = reversal(alpha);
      if (rev < alpha) alpha = rev;
    } else if (kind == SymmetryKind::swap_last_two && alpha.size() >= 2) {
      auto seq = alpha.seq();
      auto n = seq.size();
      if (seq[n - 2] > seq[n - 1]) std::swap(seq[n - 2], seq[n - 1]);
      alpha = LinearOrdering(std::move(seq));
    }
  }
  q.canonicalize();
  return q;
}

Instance gadget_instance(const std::vector<LinearOrdering>& generators, const PiFamily& pi) {
  if (generators.empty()) throw std::invalid_argument("gadget needs at least one generator");
  const auto dom = generators.front().domain();
  for (const auto& g : generators)
    if (g.domain() != dom) throw std::invalid_argument("gadget generators must share one domain");
  for (std::size_t i = 0; i < dom.size(); ++i)
    if (dom[i] != static_cast<VarId>(i)) throw std::invalid_argument("gadget generators must use ids 0..m-1");
  Instance inst;
  for (std::size_t i = 0; i < dom.size(); ++i) inst.vars.intern(std::to_string(i + 1));
  inst.pi = pi;
  inst.k = static_cast<int>(generators.size());
  for (const auto& g : generators) {
    auto c = implied_constraints(g, pi);
    inst.constraints.insert(inst.constraints.end(), c.begin(), c.end());
  }
  inst.normalize();
  return inst;
}

namespace {

std::uint64_t arrangements(const Solution& s) {
  std::uint64_t r = 1;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= s.orderings.size(); ++i) {
    r *= i;
    if (i < s.orderings.size() && s.orderings[i] == s.orderings[i - 1]) {
      ++run;
    } else {
      for (std::size_t j = 2; j <= run; ++j) r /= j;
      run = 1;
    }
  }
  return r;
}

}  // namespace

GadgetReport verify_uniqueness(const std::vector<LinearOrdering>& generators, const PiFamily& pi, int k,
                               const SymmetrySpec& sym, SolverConfig cfg) {
  GadgetReport rep;
  rep.instance = gadget_instance(generators, pi);
  rep.instance.k = k;
  rep.symmetry = sym;
  Solution expected{generators};
  expected.canonicalize();
  rep.expected = {expected};
  auto res = enumerate_solutions(rep.instance, cfg);
  rep.found = std::move(res.solutions);
  rep.nodes = res.nodes;
  for (const auto& s : rep.found) {
    rep.ordered_count += arrangements(s);
    rep.classes.push_back(quotient(s, sym.kind));
  }
  std::sort(rep.classes.begin(), rep.classes.end());
  rep.classes.erase(std::unique(rep.classes.begin(), rep.classes.end()), rep.classes.end());
  rep.unique = rep.classes == std::vector<Solution>{quotient(expected, sym.kind)};
  return rep;
}

std::vector<LinearOrdering> builtin_generators(const std::string& name) {
  auto from_one = [](std::vector<VarId> s) {
    for (auto& v : s) --v;
    return LinearOrdering(std::move(s));
  };
  if (name == "pi5") return {from_one({1, 2, 3, 4, 5}), from_one({5, 2, 3, 4, 1})};
  if (name == "pi6") return {from_one({1, 2, 3, 4}), from_one({2, 4, 1, 3})};
  if (name == "pi9") return {from_one({1, 2, 3, 4, 5, 6, 7}), from_one({2, 5, 7, 3, 1, 6, 4})};
  throw std::invalid_argument("unknown gadget '" + name + "'");
}

PiFamily builtin_family(const std::string& name) {
  if (name == "pi5") return pi_family(5);
  if (name == "pi6") return pi_family(6);
  if (name == "pi9") return pi_family(9);
  throw std::invalid_argument("unknown gadget '" + name + "'");
}

SymmetrySpec builtin_symmetry(const std::string& name) {
  if (name == "pi6") return SymmetrySpec::none();
  builtin_family(name);
  return SymmetrySpec::reversal();
}

namespace {

constexpr int kLeaves = 6;
constexpr std::size_t kMaxWitnesses = 256;

int triplet_bit(const Triplet& t) {
  // Position of t among the 60 sorted triplets on 0..5.
  static const auto table = [] {
    std::array<int, 216> idx{};
    idx.fill(-1);
    int n = 0;
    for (int a = 0; a < kLeaves; ++a)
      for (int b = a + 1; b < kLeaves; ++b)
        for (int c = 0; c < kLeaves; ++c)
          if (c != a && c != b) idx[static_cast<std::size_t>((a * kLeaves + b) * kLeaves + c)] = n++;
    return idx;
  }();
  return table[static_cast<std::size_t>((t.a * kLeaves + t.b) * kLeaves + t.c)];
}

std::uint64_t triplet_mask(const RootedTree& t) {
  std::uint64_t m = 0;
  for (const auto& x : displayed_triplets(t)) m |= 1ULL << triplet_bit(x);
  return m;
}

struct TreeSpace {
  std::vector<RootedTree> trees;
  std::vector<std::uint64_t> masks;
  std::vector<char> caterpillar;

  static const TreeSpace& get() {
    static const TreeSpace space = [] {
      TreeSpace s;
      std::vector<Taxon> taxa(kLeaves);
      std::iota(taxa.begin(), taxa.end(), 0);
      s.trees = enumerate_trees(taxa);
      for (const auto& t : s.trees) {
        s.masks.push_back(triplet_mask(t));
        s.caterpillar.push_back(is_caterpillar(t));
      }
      return s;
    }();
    return space;
  }

  std::size_t index_of(const RootedTree& t) const {
    auto it = std::lower_bound(trees.begin(), trees.end(), t);
    if (it == trees.end() || !(*it == t)) throw std::invalid_argument("tree is not on taxa 0..5");
    return static_cast<std::size_t>(it - trees.begin());
  }
};

}  // namespace

TreeGadgetReport verify_tree_uniqueness(const TreeTriple& triple, unsigned threads, bool stop_early) {
  const auto& space = TreeSpace::get();
  TreeGadgetReport rep;
  rep.triple = triple;
  rep.trees_per_slot = space.trees.size();
  std::array<std::size_t, 3> input{};
  std::uint64_t cover = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    input[s] = space.index_of(triple[s]);
    cover |= space.masks[input[s]];
  }
  std::sort(input.begin(), input.end());
  for (int a = 0; a < kLeaves; ++a)
    for (int b = a + 1; b < kLeaves; ++b)
      for (int c = 0; c < kLeaves; ++c)
        if (c != a && c != b && ((cover >> triplet_bit({a, b, c})) & 1)) rep.cover.push_back({a, b, c});

  const std::size_t n = space.trees.size();
  std::vector<std::uint64_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = space.masks[i] & cover;
  std::vector<std::vector<std::array<std::size_t, 3>>> per_first(n);
  std::vector<std::uint64_t> counts(n, 0);
  std::atomic<bool> other_found{false};
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      if (stop_early && other_found.load(std::memory_order_relaxed)) return;
      const std::uint64_t need = cover & ~(m[i] | m[j]);
      for (std::size_t l = j; l < n; ++l) {
        if ((m[l] & need) != need) continue;
        std::array<std::size_t, 3> hit{i, j, l};
        ++counts[i];
        if (per_first[i].size() < kMaxWitnesses) per_first[i].push_back(hit);
        if (hit != input) {
          other_found = true;
          if (stop_early) return;
        }
      }
    }
  });
  for (auto c : counts) rep.found_count += c;
  for (const auto& bucket : per_first)
    for (const auto& hit : bucket) {
      if (stop_early && hit == input) continue;
      if (rep.found.size() >= kMaxWitnesses || (stop_early && !rep.found.empty())) break;
      rep.found.push_back({space.trees[hit[0]], space.trees[hit[1]], space.trees[hit[2]]});
    }
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& hit : per_first[i])
      if (hit != input)
        for (auto h : hit)
          if (!space.caterpillar[h]) rep.non_caterpillar_cover = true;
  if (stop_early && !other_found) rep.found = {{space.trees[input[0]], space.trees[input[1]], space.trees[input[2]]}};
  rep.unique = !other_found && counts[input[0]] > 0;
  return rep;
}

CaterpillarTriple derive_caterpillar_triple(unsigned threads) {
  auto perms = [](std::vector<VarId> items) {
    std::vector<std::vector<VarId>> out;
    std::sort(items.begin(), items.end());
    do out.push_back(items);
    while (std::next_permutation(items.begin(), items.end()));
    return out;
  };
  std::vector<LinearOrdering> first, second, third;
  for (const auto& p : perms({2, 3, 4})) {
    // 2 sits below 4 in the first two
    if (std::find(p.begin(), p.end(), 4) > std::find(p.begin(), p.end(), 2)) continue;
    std::vector<VarId> s{5};
    s.insert(s.end(), p.begin(), p.end());
    s.insert(s.end(), {0, 1});
    first.emplace_back(s);
    if (p.back() != 2) continue;  // and below 3 in the second
    s = {1};
    s.insert(s.end(), p.begin(), p.end());
    s.insert(s.end(), {0, 5});
    second.emplace_back(s);
  }
  for (const auto& p : perms({1, 2, 3, 4, 5})) {
    if (p[3] > p[4]) continue;  // cherry written smaller first
    std::vector<VarId> s{0};
    s.insert(s.end(), p.begin(), p.end());
    LinearOrdering o(s);
    if (o.position(2) > o.position(3) || o.position(2) > o.position(4) || o.position(2) > o.position(5)) continue;
    if (o.position(3) > o.position(5) || o.position(3) > o.position(1)) continue;
    third.push_back(o);
  }
  CaterpillarTriple out;
  for (const auto& a : first)
    for (const auto& b : second)
      for (const auto& c : third) {
        ++out.candidates_checked;
        TreeTriple t{caterpillar_of(a), caterpillar_of(b), caterpillar_of(c)};
        if (verify_tree_uniqueness(t, threads, true).unique) {
          out.trees = t;
          out.orderings = {a, b, c};
          return out;
        }
      }
  throw std::runtime_error("no caterpillar triple on six leaves is determined by its triplets");
}

}  // namespace ternperm
