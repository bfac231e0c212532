#include "ternperm/reductions.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <stdexcept>

#include "ternperm/gadgets.hpp"

namespace ternperm {

std::uint64_t Manifest::size(std::string_view key) const {
  for (const auto& [k, v] : sizes)
    if (k == key) return v;
  throw std::invalid_argument("manifest has no size '" + std::string(key) + "'");
}

std::string fresh_name(std::string_view reduction, std::string_view index, std::string_view role) {
  std::string s = "g:";
  s += reduction;
  s += ':';
  s += index;
  s += ':';
  s += role;
  return s;
}

namespace {

Instance prepare(const Instance& src, int pi, int k, const char* name) {
  if (src.pi.index() != pi || src.k != k)
    throw std::invalid_argument(std::string(name) + " expects a " + std::to_string(k) + "-pi" + std::to_string(pi) +
                                " instance");
  src.validate();
  Instance s = src;
  s.normalize();
  return s;
}

std::string problem_name(int k, int pi) { return std::to_string(k) + "-pi" + std::to_string(pi); }

Manifest csp_manifest(const char* name, const Instance& src, const Instance& tgt) {
  Manifest m;
  m.reduction = name;
  m.source_problem = problem_name(src.k, src.pi.index());
  m.target_problem = problem_name(tgt.k, tgt.pi.index());
  m.sizes = {{"source_vars", src.num_vars()},
             {"source_constraints", src.constraints.size()},
             {"target_vars", tgt.num_vars()},
             {"target_constraints", tgt.constraints.size()}};
  return m;
}

// The source solution padded to exactly k members; throws unless valid.
std::vector<LinearOrdering> members(const Instance& inst, const Solution& s, const char* what) {
  if (s.orderings.empty() || !check_solution(inst, s))
    throw std::invalid_argument(std::string("not a solution of the ") + what + " instance");
  auto out = s.orderings;
  while (out.size() < static_cast<std::size_t>(inst.k)) out.push_back(out.front());
  return out;
}

Solution make_solution(std::vector<LinearOrdering> orderings) {
  Solution s{std::move(orderings)};
  s.canonicalize();
  return s;
}

// First member that alone satisfies the source instance.
Solution first_satisfying(const Instance& src, const std::vector<LinearOrdering>& candidates) {
  for (const auto& c : candidates)
    if (check_solution(src, Solution{{c}})) return Solution{{c}};
  throw std::logic_error("backward lift found no satisfying ordering");
}

std::vector<VarId> id_range(VarId from, VarId to) {
  std::vector<VarId> v(static_cast<std::size_t>(to - from));
  std::iota(v.begin(), v.end(), from);
  return v;
}

// Emits alpha with before[x] and after[x] placed around each x.
std::vector<VarId> with_insertions(const std::vector<VarId>& base, const std::map<VarId, std::vector<VarId>>& before,
                                   const std::map<VarId, std::vector<VarId>>& after) {
  std::vector<VarId> out;
  for (VarId x : base) {
    if (auto it = before.find(x); it != before.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    out.push_back(x);
    if (auto it = after.find(x); it != after.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

void append(std::vector<VarId>& s, std::initializer_list<VarId> xs) { s.insert(s.end(), xs.begin(), xs.end()); }
void append(std::vector<VarId>& s, const std::vector<VarId>& xs) { s.insert(s.end(), xs.begin(), xs.end()); }

// Union of the two generators' implied constraints.
void add_gadget(std::vector<Constraint>& out, const std::vector<VarId>& g1, const std::vector<VarId>& g2,
                const PiFamily& pi) {
  for (const auto& g : {g1, g2}) {
    auto c = implied_constraints(LinearOrdering(g), pi);
    out.insert(out.end(), c.begin(), c.end());
  }
}

std::size_t dedup_size(std::vector<Constraint> c) {
  std::sort(c.begin(), c.end());
  return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
}

// Reductions that pair each constraint with mirrored copies and lift a
// single ordering to {alpha, reversal(alpha)}.
CspReduction mirror_reduction(const Instance& src, const char* name, int from_pi, int to_pi,
                              std::array<int, 3> first, std::array<int, 3> second) {
  Instance s = prepare(src, from_pi, 1, name);
  CspReduction r;
  r.source = s;
  Instance& t = r.target;
  t.vars = s.vars;
  t.pi = pi_family(to_pi);
  t.k = 2;
  for (const auto& c : s.constraints) {
    t.constraints.push_back({{c.v[first[0]], c.v[first[1]], c.v[first[2]]}});
    t.constraints.push_back({{c.v[second[0]], c.v[second[1]], c.v[second[2]]}});
  }
  t.normalize();
  r.manifest = csp_manifest(name, s, t);
  r.lift_forward = [s](const Solution& sol) {
    auto a = members(s, sol, "source").front();
    return make_solution({a, reversal(a)});
  };
  r.lift_backward = [s, t](const Solution& sol) { return first_satisfying(s, members(t, sol, "target")); };
  return r;
}

}  // namespace

CspReduction reduce_1pi5_to_2pi0(const Instance& src) {
  return mirror_reduction(src, "1pi5-to-2pi0", 5, 0, {0, 1, 2}, {2, 1, 0});
}

CspReduction reduce_1pi9_to_2pi4(const Instance& src) {
  return mirror_reduction(src, "1pi9-to-2pi4", 9, 4, {1, 0, 2}, {1, 2, 0});
}

CspReduction reduce_2pi0_to_2pi1(const Instance& src) {
  static constexpr const char* kName = "2pi0-to-2pi1";
  Instance s = prepare(src, 0, 2, kName);
  CspReduction r;
  r.source = s;
  Instance& t = r.target;
  t.vars = s.vars;
  t.pi = pi_family(1);
  t.k = 2;
  const auto n = static_cast<VarId>(s.num_vars());
  std::vector<std::array<VarId, 2>> de;
  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    const auto idx = std::to_string(i);
    const VarId d = t.vars.add_fresh(fresh_name(kName, idx, "d"));
    const VarId e = t.vars.add_fresh(fresh_name(kName, idx, "e"));
    de.push_back({d, e});
    const auto [v1, v2, v3] = s.constraints[i].v;
    t.constraints.push_back({{v1, v2, d}});
    t.constraints.push_back({{v2, v3, e}});
    t.constraints.push_back({{e, v1, v2}});
    t.constraints.push_back({{d, v1, v2}});
    t.constraints.push_back({{v1, e, d}});
  }
  t.normalize();
  r.manifest = csp_manifest(kName, s, t);
  r.manifest.sizes.push_back({"fresh_vars", 2 * s.constraints.size()});
  r.lift_forward = [s, de](const Solution& sol) {
    auto m = members(s, sol, "source");
    const auto& alpha = m[0];
    std::vector<VarId> w, w_not;  // ascending by construction
    for (std::size_t i = 0; i < s.constraints.size(); ++i) {
      auto& dst = satisfies(s.pi, alpha, s.constraints[i]) ? w : w_not;
      dst.push_back(de[i][0]);
      dst.push_back(de[i][1]);
    }
    std::vector<VarId> a, b;
    append(a, w_not);
    append(a, alpha.seq());
    append(a, w);
    append(b, w);
    append(b, m[1].seq());
    append(b, w_not);
    return make_solution({LinearOrdering(a), LinearOrdering(b)});
  };
  r.lift_backward = [s, t, n](const Solution& sol) {
    auto m = members(t, sol, "target");
    const auto keep = id_range(0, n);
    return make_solution({restrict(m[0], keep), restrict(m[1], keep)});
  };
  return r;
}

CspReduction reduce_1pi5_to_2pi5(const Instance& src) {
  static constexpr const char* kName = "1pi5-to-2pi5";
  Instance s = prepare(src, 5, 1, kName);
  CspReduction r;
  r.source = s;
  Instance& t = r.target;
  t.vars = s.vars;
  t.pi = pi_family(5);
  t.k = 2;
  const auto n = static_cast<VarId>(s.num_vars());
  std::array<VarId, 6> g{};  // g[1..5]
  for (int i = 1; i <= 5; ++i) g[static_cast<std::size_t>(i)] = t.vars.add_fresh(fresh_name(kName, "g", std::to_string(i)));
  std::vector<std::array<VarId, 2>> de;
  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    const auto idx = std::to_string(i);
    const VarId d = t.vars.add_fresh(fresh_name(kName, idx, "d"));
    const VarId e = t.vars.add_fresh(fresh_name(kName, idx, "e"));
    de.push_back({d, e});
  }
  std::vector<Constraint> c1, c2, c3, c4;
  add_gadget(c1, {g[1], g[2], g[3], g[4], g[5]}, {g[5], g[2], g[3], g[4], g[1]}, t.pi);
  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    const auto [v1, v2, v3] = s.constraints[i].v;
    const auto [d, e] = de[i];
    c2.push_back({{v1, d, v3}});
    c2.push_back({{v1, e, v3}});
    c2.push_back({{d, v2, e}});
    for (VarId x : {d, e}) {
      c4.push_back({{g[2], x, g[3]}});
      c4.push_back({{g[1], x, g[2]}});
      c4.push_back({{g[4], x, g[5]}});
      c4.push_back({{g[3], x, g[5]}});
    }
  }
  for (VarId v = 0; v < n; ++v) {
    c3.push_back({{g[3], v, g[4]}});
    c3.push_back({{g[4], v, g[5]}});
    c3.push_back({{g[1], v, g[2]}});
    c3.push_back({{g[1], v, g[3]}});
  }
  for (const auto* part : {&c1, &c2, &c3, &c4}) t.constraints.insert(t.constraints.end(), part->begin(), part->end());
  t.normalize();
  r.manifest = csp_manifest(kName, s, t);
  r.manifest.sizes.push_back({"C1", dedup_size(c1)});
  r.manifest.sizes.push_back({"C2", c2.size()});
  r.manifest.sizes.push_back({"C3", c3.size()});
  r.manifest.sizes.push_back({"C4", c4.size()});

  r.lift_forward = [s, g, de](const Solution& sol) {
    const auto alpha = members(s, sol, "source").front();
    // delta orders V and D with v1 < d < v2 < e < v3 or its mirror image.
    std::map<VarId, std::vector<VarId>> before, after;
    for (std::size_t i = 0; i < s.constraints.size(); ++i) {
      const auto [v1, v2, v3] = s.constraints[i].v;
      const bool up = alpha.position(v1) < alpha.position(v2);
      before[v2].push_back(up ? de[i][0] : de[i][1]);
      after[v2].push_back(up ? de[i][1] : de[i][0]);
    }
    const auto delta = with_insertions(alpha.seq(), before, after);
    std::vector<VarId> a{g[1], g[2], g[3], g[4], g[5]};
    append(a, delta);
    std::vector<VarId> b{g[5], g[2]};
    for (VarId x : delta)
      if (x >= static_cast<VarId>(s.num_vars())) b.push_back(x);
    b.push_back(g[3]);
    append(b, alpha.seq());
    append(b, {g[4], g[1]});
    return make_solution({LinearOrdering(a), LinearOrdering(b)});
  };
  r.lift_backward = [s, t, g, n](const Solution& sol) {
    const std::vector<VarId> frame{g[1], g[2], g[3], g[4], g[5]};
    for (const auto& o : members(t, sol, "target")) {
      auto f = restrict(o, frame);
      if (f.seq() == frame || reversal(f).seq() == frame) return Solution{{restrict(o, id_range(0, n))}};
    }
    throw std::logic_error("no target ordering preserves the gadget ordering (1,2,3,4,5)");
  };
  return r;
}

CspReduction reduce_2pi1_to_2pi6(const Instance& src) {
  static constexpr const char* kName = "2pi1-to-2pi6";
  Instance s = prepare(src, 1, 2, kName);
  CspReduction r;
  r.source = s;
  Instance& t = r.target;
  t.pi = pi_family(6);
  t.k = 2;
  const auto m = static_cast<VarId>(s.num_vars());
  // 1_v takes the id of v.
  for (VarId v = 0; v < m; ++v) {
    auto name = fresh_name(kName, std::to_string(v), "1");
    t.vars.add_fresh(name);
    r.manifest.renamed.push_back({s.vars.name(v), name});
  }
  const VarId two = t.vars.add_fresh(fresh_name(kName, "g", "2"));
  const VarId three = t.vars.add_fresh(fresh_name(kName, "g", "3"));
  const VarId four = t.vars.add_fresh(fresh_name(kName, "g", "4"));
  std::vector<Constraint> c1, c2;
  for (VarId v = 0; v < m; ++v) add_gadget(c1, {v, two, three, four}, {two, four, v, three}, t.pi);
  for (const auto& c : s.constraints) {
    const auto [a, b, cc] = c.v;
    c2.push_back({{a, b, cc}});
    c2.push_back({{a, cc, b}});
    c2.push_back({{a, b, three}});
  }
  t.constraints = c1;
  t.constraints.insert(t.constraints.end(), c2.begin(), c2.end());
  t.normalize();
  auto renamed = std::move(r.manifest.renamed);
  r.manifest = csp_manifest(kName, s, t);
  r.manifest.renamed = std::move(renamed);
  r.manifest.sizes.push_back({"C1", dedup_size(c1)});
  r.manifest.sizes.push_back({"C2", c2.size()});
  r.lift_forward = [s, two, three, four](const Solution& sol) {
    auto mem = members(s, sol, "source");
    std::vector<VarId> a = mem[0].seq();
    append(a, {two, three, four});
    std::vector<VarId> b{two, four};
    append(b, mem[1].seq());
    b.push_back(three);
    return make_solution({LinearOrdering(a), LinearOrdering(b)});
  };
  r.lift_backward = [t, m](const Solution& sol) {
    auto mem = members(t, sol, "target");
    const auto keep = id_range(0, m);
    return make_solution({restrict(mem[0], keep), restrict(mem[1], keep)});
  };
  return r;
}

CspReduction reduce_1pi5_to_2pi9(const Instance& src) {
  static constexpr const char* kName = "1pi5-to-2pi9";
  Instance s = prepare(src, 5, 1, kName);
  CspReduction r;
  r.source = s;
  Instance& t = r.target;
  t.pi = pi_family(9);
  t.k = 2;
  std::vector<char> used(s.num_vars(), 0);
  for (const auto& c : s.constraints)
    for (VarId v : c.v) used[static_cast<std::size_t>(v)] = 1;
  std::vector<VarId> to_target(s.num_vars(), -1), to_source;
  for (VarId v = 0; v < static_cast<VarId>(s.num_vars()); ++v)
    if (used[static_cast<std::size_t>(v)]) {
      to_target[static_cast<std::size_t>(v)] = t.vars.add_fresh(s.vars.name(v));
      to_source.push_back(v);
    }
  // fresh[i] = {1^i, 2^i, 3^i, 5^i}
  std::vector<std::array<VarId, 4>> fresh;
  std::vector<Constraint> generated;
  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    const auto idx = std::to_string(i);
    std::array<VarId, 4> f{};
    const char* roles[] = {"1", "2", "3", "5"};
    for (std::size_t j = 0; j < 4; ++j) f[j] = t.vars.add_fresh(fresh_name(kName, idx, roles[j]));
    fresh.push_back(f);
    const VarId v1 = to_target[static_cast<std::size_t>(s.constraints[i].v[0])];
    const VarId v2 = to_target[static_cast<std::size_t>(s.constraints[i].v[1])];
    const VarId v3 = to_target[static_cast<std::size_t>(s.constraints[i].v[2])];
    add_gadget(generated, {f[0], f[1], f[2], v1, f[3], v2, v3}, {f[1], f[3], v3, f[2], f[0], v2, v1}, t.pi);
  }
  t.constraints = generated;
  t.normalize();
  r.manifest = csp_manifest(kName, s, t);
  r.manifest.sizes.push_back({"generated_constraints", generated.size()});

  r.lift_forward = [s, to_target, fresh](const Solution& sol) {
    const auto alpha = members(s, sol, "source").front();
    std::vector<VarId> base;
    for (VarId v : alpha.seq())
      if (to_target[static_cast<std::size_t>(v)] >= 0) base.push_back(to_target[static_cast<std::size_t>(v)]);
    std::map<VarId, std::vector<VarId>> ab, aa, bb, ba;  // alpha'/beta' before and after lists
    for (std::size_t i = 0; i < s.constraints.size(); ++i) {
      const auto [u1, u2, u3] = s.constraints[i].v;
      const VarId v1 = to_target[static_cast<std::size_t>(u1)];
      const VarId v3 = to_target[static_cast<std::size_t>(u3)];
      const auto [f1, f2, f3, f5] = fresh[i];
      if (alpha.position(u1) < alpha.position(u2)) {
        // 1 2 3 v1 5 v2 v3  and  v1 v2 1 3 v3 5 2
        append(ab[v1], {f1, f2, f3});
        aa[v1].push_back(f5);
        append(bb[v3], {f1, f3});
        append(ba[v3], {f5, f2});
      } else {
        // v3 v2 5 v1 3 2 1  and  2 5 v3 3 1 v2 v1
        ab[v1].push_back(f5);
        append(aa[v1], {f3, f2, f1});
        append(bb[v3], {f2, f5});
        append(ba[v3], {f3, f1});
      }
    }
    return make_solution({LinearOrdering(with_insertions(base, ab, aa)), LinearOrdering(with_insertions(base, bb, ba))});
  };
  r.lift_backward = [s, t, to_source](const Solution& sol) {
    std::vector<LinearOrdering> candidates;
    const auto keep = id_range(0, static_cast<VarId>(to_source.size()));
    for (const auto& o : members(t, sol, "target")) {
      std::vector<VarId> seq;
      std::vector<char> placed(s.num_vars(), 0);
      const auto kept = restrict(o, keep);
      for (VarId v : kept.seq()) {
        seq.push_back(to_source[static_cast<std::size_t>(v)]);
        placed[static_cast<std::size_t>(seq.back())] = 1;
      }
      for (VarId v = 0; v < static_cast<VarId>(s.num_vars()); ++v)
        if (!placed[static_cast<std::size_t>(v)]) seq.push_back(v);
      candidates.emplace_back(std::move(seq));
    }
    return first_satisfying(s, candidates);
  };
  return r;
}

namespace {

struct CatGadget {
  std::array<LinearOrdering, 3> orderings;
  TreeTriple trees;
  std::vector<Triplet> cover;
};

const CatGadget& cat_gadget() {
  static const CatGadget g = [] {
    auto d = derive_caterpillar_triple();
    CatGadget out{d.orderings, d.trees, {}};
    for (const auto& t : d.trees) {
      auto x = displayed_triplets(t);
      out.cover.insert(out.cover.end(), x.begin(), x.end());
    }
    std::sort(out.cover.begin(), out.cover.end());
    out.cover.erase(std::unique(out.cover.begin(), out.cover.end()), out.cover.end());
    return out;
  }();
  return g;
}

constexpr Taxon kFrame = 6;  // gadget leaves are taxa 0..5

RootedTree map_taxa(const RootedTree& t, const std::vector<Taxon>& f) {
  std::vector<RootedTree::Node> nodes;
  for (std::size_t i = 0; i < t.num_nodes(); ++i) {
    auto nd = t.node(static_cast<int>(i));
    if (nd.taxon >= 0) nd.taxon = f[static_cast<std::size_t>(nd.taxon)];
    nodes.push_back(nd);
  }
  return RootedTree(std::move(nodes), t.root());
}

std::vector<VarId> leaf_sequence(const RootedTree& t) {
  if (t.num_leaves() <= 1) return {t.leaves().begin(), t.leaves().end()};
  return ordering_of(t).seq();
}

bool covers(const Trees& trees, const std::vector<Triplet>& r) {
  return std::all_of(r.begin(), r.end(), [&](const Triplet& x) {
    return std::any_of(trees.begin(), trees.end(), [&](const RootedTree& t) { return displays(t, x); });
  });
}

void check_leaf_set(const RootedTree& t, std::size_t n, const char* what) {
  std::vector<Taxon> want(n);
  std::iota(want.begin(), want.end(), 0);
  if (t.leaves() != want) throw std::invalid_argument(std::string(what) + " must have exactly the instance's labels");
}

TripletReduction reduce_2cat_to_3(const TripletSet& src_in, bool trees) {
  const char* name = trees ? "2cat-to-3tree" : "2cat-to-3cat";
  TripletSet src = src_in;
  src.normalize();
  const auto& gadget = cat_gadget();
  TripletReduction r;
  r.source = src;
  TripletSet& t = r.target;
  for (Taxon i = 0; i < kFrame; ++i) t.labels.intern(std::to_string(i));
  for (const auto& label : src.labels.names()) {
    if (t.labels.contains(label)) throw std::invalid_argument("label '" + label + "' is reserved for the gadget leaves");
    t.labels.intern(label);
  }
  const auto n = static_cast<Taxon>(src.labels.size());
  auto lift = [](Taxon x) { return x + kFrame; };
  std::vector<Taxon> ab;
  for (std::size_t i = 0; i < src.triplets.size(); ++i) ab.push_back(t.labels.add_fresh(fresh_name(name, std::to_string(i), "ab")));

  std::vector<std::vector<Triplet>> groups(trees ? 7 : 6);
  groups[0] = gadget.cover;
  auto add = [&](std::size_t g, Taxon x, Taxon y, Taxon w) { groups[g].push_back(make_triplet(x, y, w)); };
  for (std::size_t i = 0; i < src.triplets.size(); ++i) {
    const Taxon a = lift(src.triplets[i].a), b = lift(src.triplets[i].b), c = lift(src.triplets[i].c), u = ab[i];
    if (trees) {
      for (Taxon x : {a, b, c, u})
        for (Taxon w : {5, 1, 0})
          for (Taxon y : {2, 3, 4}) add(1, y, x, w);
      for (Taxon x : {a, b, c, u}) {
        add(2, 0, 1, x);
        add(2, 0, 5, x);
      }
      for (Taxon y : {3, 4, 5}) add(3, y, u, 2);
    } else {
      for (Taxon x : {a, b, c, u}) {
        add(1, 3, x, 5);
        add(1, 3, x, 1);
        add(1, 4, x, 0);
      }
      add(2, 4, u, 2);
    }
    const std::size_t base = trees ? 4 : 3;
    add(base, 0, u, c);
    for (Taxon x : {a, b}) {
      add(base + 1, 2, 5, x);
      add(base + 1, 1, 2, x);
      add(base + 1, 0, x, 2);
    }
    for (Taxon y : {5, 1})
      for (Taxon x : {a, b}) add(base + 2, y, x, u);
  }
  r.manifest.reduction = name;
  r.manifest.source_problem = "2-caterpillar-compatibility";
  r.manifest.target_problem = trees ? "3-tree-compatibility" : "3-caterpillar-compatibility";
  r.manifest.sizes = {{"source_labels", src.labels.size()}, {"source_triplets", src.triplets.size()}};
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& part = groups[g];
    std::sort(part.begin(), part.end());
    part.erase(std::unique(part.begin(), part.end()), part.end());
    r.manifest.sizes.push_back({g == 0 ? "C" : "R" + std::to_string(g), part.size()});
    t.triplets.insert(t.triplets.end(), part.begin(), part.end());
  }
  t.normalize();
  r.manifest.sizes.push_back({"target_labels", t.labels.size()});
  r.manifest.sizes.push_back({"target_triplets", t.triplets.size()});

  r.lift_forward = [src, ab, n, lift, &gadget](const Trees& sol) {
    if (sol.empty() || sol.size() > 2) throw std::invalid_argument("expected one or two caterpillars");
    const RootedTree& s1 = sol[0];
    const RootedTree& s2 = sol.size() > 1 ? sol[1] : sol[0];
    std::vector<VarId> seq1, seq2;
    if (n > 0) {
      for (const auto* s : {&s1, &s2}) {
        check_leaf_set(*s, static_cast<std::size_t>(n), "source caterpillar");
        if (n >= 2 && !is_caterpillar(*s)) throw std::invalid_argument("source solution contains a non-caterpillar");
      }
      seq1 = leaf_sequence(s1);
      seq2 = leaf_sequence(s2);
    }
    // ab taxa of triplets shown by S1 go into S1's block in T1 and right
    // below 2 in T2; the others the other way round.
    std::map<VarId, std::vector<VarId>> in1, in2;
    std::vector<VarId> below2_t1, below2_t2;
    for (std::size_t i = 0; i < src.triplets.size(); ++i) {
      const auto& x = src.triplets[i];
      const bool by1 = displays(s1, x);
      if (!by1 && !displays(s2, x)) throw std::invalid_argument("source caterpillars miss a triplet");
      const auto& seq = by1 ? seq1 : seq2;
      const auto first = std::find_if(seq.begin(), seq.end(), [&](VarId v) { return v == x.a || v == x.b; });
      (by1 ? in1 : in2)[*first].push_back(ab[i]);
      (by1 ? below2_t2 : below2_t1).push_back(ab[i]);
    }
    auto block = [&](const std::vector<VarId>& seq, const std::map<VarId, std::vector<VarId>>& ins) {
      std::vector<VarId> out;
      for (VarId v : with_insertions(seq, ins, {})) out.push_back(v < n ? lift(v) : v);
      return out;
    };
    // ab ids are >= n + 6 > n, so only source taxa get shifted above.
    auto build = [](const LinearOrdering& c, const std::vector<VarId>& after0, const std::vector<VarId>& after2,
                    const std::vector<VarId>& before_cherry) {
      std::vector<VarId> out;
      const auto& g = c.seq();
      for (std::size_t p = 0; p < g.size(); ++p) {
        if (p == g.size() - 2) append(out, before_cherry);
        out.push_back(g[p]);
        if (g[p] == 0 && p == 0) append(out, after0);
        if (g[p] == 2) append(out, after2);
      }
      return caterpillar_of(LinearOrdering(out));
    };
    std::vector<VarId> all_labels, all_ab(ab.begin(), ab.end());
    for (Taxon x = 0; x < n; ++x) all_labels.push_back(lift(x));
    return Trees{build(gadget.orderings[0], {}, below2_t1, block(seq1, in1)),
                 build(gadget.orderings[1], {}, below2_t2, block(seq2, in2)),
                 build(gadget.orderings[2], all_labels, all_ab, {})};
  };

  r.lift_backward = [t, n, trees, &gadget](const Trees& sol) {
    if (sol.size() != 3) throw std::invalid_argument("expected three target trees");
    if (!covers(sol, t.triplets)) throw std::invalid_argument("target trees miss a triplet");
    const std::vector<Taxon> frame{0, 1, 2, 3, 4, 5};
    std::array<int, 3> slot{-1, -1, -1};
    for (int i = 0; i < 3; ++i) {
      if (!trees && !is_caterpillar(sol[static_cast<std::size_t>(i)]))
        throw std::invalid_argument("target solution contains a non-caterpillar");
      const auto f = restrict_tree(sol[static_cast<std::size_t>(i)], frame);
      for (int s = 0; s < 3; ++s)
        if (f == gadget.trees[static_cast<std::size_t>(s)]) slot[static_cast<std::size_t>(s)] = i;
    }
    if (std::count(slot.begin(), slot.end(), -1) > 0) throw std::logic_error("target trees do not restrict to the gadget");
    Trees out;
    std::vector<Taxon> keep, back(t.labels.size(), -1);
    for (Taxon x = 0; x < n; ++x) {
      keep.push_back(x + kFrame);
      back[static_cast<std::size_t>(x + kFrame)] = x;
    }
    for (int s = 0; s < 2; ++s) {
      RootedTree ti = sol[static_cast<std::size_t>(slot[static_cast<std::size_t>(s)])];
      if (trees) ti = flatten_to_caterpillar(ti, frame);
      if (n == 0) continue;
      out.push_back(n == 1 ? RootedTree::single(0) : map_taxa(restrict_tree(ti, keep), back));
    }
    return out;
  };
  return r;
}

}  // namespace

TripletReduction reduce_2cat_to_3cat(const TripletSet& src) { return reduce_2cat_to_3(src, false); }
TripletReduction reduce_2cat_to_3tree(const TripletSet& src) { return reduce_2cat_to_3(src, true); }

RootedTree flatten_to_caterpillar(const RootedTree& t, std::span<const Taxon> frame) {
  if (frame.size() < 2) throw std::invalid_argument("frame needs at least two leaves");
  const auto r = restrict_tree(t, frame);
  if (!is_caterpillar(r)) throw std::invalid_argument("tree restricted to the frame is not a caterpillar");
  const auto [c, c2] = cherries(r).front();
  const int pc = t.node(t.leaf_node(c)).parent;
  if (pc != t.node(t.leaf_node(c2)).parent) throw std::invalid_argument("frame cherry is not a cherry of the tree");
  const auto nn = t.num_nodes();
  std::vector<int> frame_below(nn, 0);
  for (Taxon x : frame)
    for (int v = t.leaf_node(x); v >= 0; v = t.node(v).parent) ++frame_below[static_cast<std::size_t>(v)];
  if (frame_below[static_cast<std::size_t>(t.root())] != static_cast<int>(frame.size()) ||
      frame_below[static_cast<std::size_t>(t.node(t.root()).left)] == 0 ||
      frame_below[static_cast<std::size_t>(t.node(t.root()).right)] == 0)
    throw std::invalid_argument("frame does not span the root");

  auto pendant = [&](int v) {
    auto leaves = t.cluster(v);
    std::stable_sort(leaves.begin(), leaves.end(), [&](Taxon x, Taxon y) {
      return t.depth(t.leaf_node(x)) < t.depth(t.leaf_node(y));
    });
    return leaves;
  };
  std::vector<VarId> seq;
  std::vector<int> spine;
  for (int v = pc; v >= 0; v = t.node(v).parent) spine.push_back(v);
  std::reverse(spine.begin(), spine.end());
  for (std::size_t i = 0; i + 1 < spine.size(); ++i) {
    const auto& nd = t.node(spine[i]);
    const int other = nd.left == spine[i + 1] ? nd.right : nd.left;
    if (frame_below[static_cast<std::size_t>(other)] == 0) {
      append(seq, pendant(other));
      continue;
    }
    if (frame_below[static_cast<std::size_t>(other)] != 1) throw std::invalid_argument("frame is not a relaxed caterpillar");
    int v = other;
    while (!t.is_leaf(v)) {
      const auto& x = t.node(v);
      const bool left_on = frame_below[static_cast<std::size_t>(x.left)] > 0;
      append(seq, pendant(left_on ? x.right : x.left));
      v = left_on ? x.left : x.right;
    }
    seq.push_back(t.node(v).taxon);
  }
  append(seq, {c, c2});
  return caterpillar_of(LinearOrdering(seq));
}

RootedTree flatten_to_caterpillar(const RootedTree& t) {
  static const std::vector<Taxon> frame{0, 1, 2, 3, 4, 5};
  return flatten_to_caterpillar(t, frame);
}

DigraphReduction reduce_dichromatic_to_outdeg3(const Digraph& src) {
  static constexpr const char* kName = "dichromatic-to-outdeg3";
  DigraphReduction r;
  r.source = src;
  Digraph& t = r.target;
  const auto n = src.size();
  for (const auto& name : src.names().names()) t.add_vertex(name);
  auto fresh = [&](std::size_t v, const std::string& role) {
    auto name = fresh_name(kName, std::to_string(v), role);
    if (t.names().contains(name)) throw std::invalid_argument("name collision: " + name);
    return t.add_vertex(name);
  };
  // (target vertex, source vertex, 1 if its color is flipped)
  std::vector<std::array<int, 3>> derived;
  std::size_t expanded = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto kids = src.out(static_cast<int>(v));
    const auto d = kids.size();
    if (d < 3) {
      for (int x : kids) t.add_arc(static_cast<int>(v), x);
      continue;
    }
    ++expanded;
    // Balanced binary tree T_v: root v, internal t1..t_{d-2}, leaves = children.
    std::vector<int> internal{static_cast<int>(v)};
    std::function<int(std::size_t, std::size_t, bool)> build = [&](std::size_t lo, std::size_t hi, bool root) -> int {
      if (hi - lo == 1) return kids[lo];
      const int u = root ? static_cast<int>(v) : fresh(v, "t" + std::to_string(internal.size()));
      if (!root) {
        internal.push_back(u);
        derived.push_back({u, static_cast<int>(v), 0});
      }
      const std::size_t mid = lo + (hi - lo + 1) / 2;
      const int left = build(lo, mid, false);
      const int right = build(mid, hi, false);
      t.add_arc(u, left);
      t.add_arc(u, right);
      return u;
    };
    build(0, d, true);
    // D_v: complete binary tree with doubled arcs, depth ceil(log2(d-1)).
    int h = 0;
    while ((std::size_t{1} << h) < d - 1) ++h;
    const std::size_t total = (std::size_t{1} << (h + 1)) - 1;
    std::vector<int> node(total + 1);
    for (std::size_t j = 1; j <= total; ++j) {
      node[j] = fresh(v, "d" + std::to_string(j));
      int depth = 0;
      while ((std::size_t{1} << (depth + 1)) <= j) ++depth;
      derived.push_back({node[j], static_cast<int>(v), (h - depth) % 2 == 0 ? 1 : 0});
      if (j > 1) {
        t.add_arc(node[j / 2], node[j]);
        t.add_arc(node[j], node[j / 2]);
      }
    }
    const std::size_t first_leaf = std::size_t{1} << h;
    for (std::size_t i = 0; i < internal.size(); ++i) {
      t.add_arc(node[first_leaf + i], internal[i]);
      t.add_arc(internal[i], node[first_leaf + i]);
    }
  }
  r.manifest.reduction = kName;
  r.manifest.source_problem = "2-dichromatic-number";
  r.manifest.target_problem = "2-dichromatic-number-outdegree-3";
  r.manifest.sizes = {{"source_vertices", n},          {"source_arcs", src.num_arcs()},
                      {"target_vertices", t.size()},   {"target_arcs", t.num_arcs()},
                      {"expanded_vertices", expanded}, {"max_out_degree", t.max_out_degree()}};
  r.lift_forward = [src, t, derived](const Coloring& col) {
    if (!is_dicoloring(src, col)) throw std::invalid_argument("not a 2-dicoloring of the source digraph");
    Coloring out(t.size(), 0);
    std::copy(col.begin(), col.end(), out.begin());
    for (const auto& [u, v, flip] : derived) out[static_cast<std::size_t>(u)] = col[static_cast<std::size_t>(v)] ^ flip;
    return out;
  };
  r.lift_backward = [t, n](const Coloring& col) {
    if (!is_dicoloring(t, col)) throw std::invalid_argument("not a 2-dicoloring of the target digraph");
    return Coloring(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(n));
  };
  return r;
}

DicolorReduction reduce_outdeg3_to_2cat(const Digraph& src) {
  static constexpr const char* kName = "outdeg3-to-2cat";
  if (src.max_out_degree() > 3) throw std::invalid_argument("out-degree above 3");
  DicolorReduction r;
  r.source = src;
  TripletSet& t = r.target;
  const auto n = src.size();
  for (const auto& name : src.names().names()) t.labels.intern(name);
  // Triplets grouped by witness vertex.
  std::vector<std::vector<Triplet>> per(n);
  std::size_t dummies = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto kids = src.out(static_cast<int>(v));
    const auto w = static_cast<Taxon>(v);
    if (kids.size() == 1) {
      const Taxon dv = t.labels.add_fresh(fresh_name(kName, std::to_string(v), "d"));
      ++dummies;
      per[v].push_back(make_triplet(kids[0], dv, w));
    } else if (kids.size() >= 2) {
      for (std::size_t i = 0; i < kids.size(); ++i)
        for (std::size_t j = i + 1; j < kids.size(); ++j) per[v].push_back(make_triplet(kids[i], kids[j], w));
    }
    t.triplets.insert(t.triplets.end(), per[v].begin(), per[v].end());
  }
  t.normalize();
  r.manifest.reduction = kName;
  r.manifest.source_problem = "2-dichromatic-number-outdegree-3";
  r.manifest.target_problem = "2-caterpillar-compatibility";
  r.manifest.sizes = {{"source_vertices", n},
                      {"source_arcs", src.num_arcs()},
                      {"dummy_taxa", dummies},
                      {"target_labels", t.labels.size()},
                      {"target_triplets", t.triplets.size()}};
  r.lift_forward = [src, t, per](const Coloring& col) {
    if (!is_dicoloring(src, col)) throw std::invalid_argument("not a 2-dicoloring of the source digraph");
    Trees out;
    for (int color : {0, 1}) {
      TripletSet part;
      part.labels = t.labels;
      for (std::size_t v = 0; v < per.size(); ++v)
        if (col[v] == color) part.triplets.insert(part.triplets.end(), per[v].begin(), per[v].end());
      part.normalize();
      auto cat = caterpillar_compatible(part);
      if (!cat) throw std::logic_error("color class yields incompatible triplets");
      out.push_back(*cat);
    }
    return out;
  };
  r.lift_backward = [t, per](const Trees& sol) {
    if (sol.empty() || sol.size() > 2) throw std::invalid_argument("expected one or two caterpillars");
    for (const auto& c : sol)
      if (c.num_leaves() >= 2 && !is_caterpillar(c)) throw std::invalid_argument("target solution contains a non-caterpillar");
    if (!covers(sol, t.triplets)) throw std::invalid_argument("target caterpillars miss a triplet");
    Coloring col(per.size(), 0);
    for (std::size_t v = 0; v < per.size(); ++v) {
      const auto shown = std::count_if(per[v].begin(), per[v].end(), [&](const Triplet& x) { return displays(sol[0], x); });
      if (!per[v].empty() && 2 * static_cast<std::size_t>(shown) < per[v].size()) col[v] = 1;
    }
    return col;
  };
  return r;
}

const std::vector<std::string>& reduction_names() {
  static const std::vector<std::string> names{"1pi5-to-2pi0",  "2pi0-to-2pi1",  "1pi9-to-2pi4",
                                              "1pi5-to-2pi5",  "2pi1-to-2pi6",  "1pi5-to-2pi9",
                                              "2cat-to-3cat",  "2cat-to-3tree", "dichromatic-to-outdeg3",
                                              "outdeg3-to-2cat"};
  return names;
}

std::string reduction_input_kind(std::string_view name) {
  const auto& names = reduction_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::invalid_argument("unknown reduction '" + std::string(name) + "'");
  const auto i = it - names.begin();
  return i < 6 ? "csp" : i < 8 ? "triplets" : "digraph";
}

std::string reduction_output_kind(std::string_view name) {
  const auto in = reduction_input_kind(name);
  if (name == "dichromatic-to-outdeg3") return "digraph";
  if (name == "outdeg3-to-2cat") return "triplets";
  return in;
}

}  // namespace ternperm
