#include "ternperm/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "ternperm/zeroone.hpp"

namespace ternperm {

TripletSet full_triplet_set(int n) {
  if (n < 3) throw std::invalid_argument("the full triplet set needs n >= 3");
  TripletSet r;
  for (int i = 1; i <= n; ++i) r.labels.intern(std::to_string(i));
  for (Taxon a = 0; a < n; ++a)
    for (Taxon b = a + 1; b < n; ++b)
      for (Taxon c = b + 1; c < n; ++c) {
        r.triplets.push_back(make_triplet(a, b, c));
        r.triplets.push_back(make_triplet(a, c, b));
        r.triplets.push_back(make_triplet(b, c, a));
      }
  r.normalize();
  return r;
}

std::string CoverModel::var_name(int v) const {
  const auto nt = static_cast<int>(triplets.size());
  const auto& t = triplets[static_cast<std::size_t>(v % nt)];
  return "x_" + std::to_string(t.a + 1) + "_" + std::to_string(t.b + 1) + "_" + std::to_string(t.c + 1) + "_" +
         std::to_string(v / nt + 1);
}

CoverModel build_cover_model(int n, int k, bool caterpillar_mode) {
  if (k < 1) throw std::invalid_argument("the cover model needs k >= 1");
  CoverModel m;
  m.n = n;
  m.k = k;
  m.caterpillar_mode = caterpillar_mode;
  m.triplets = full_triplet_set(n).triplets;
  auto index = [&](Taxon a, Taxon b, Taxon c) {
    const auto t = make_triplet(a, b, c);
    return static_cast<std::size_t>(std::lower_bound(m.triplets.begin(), m.triplets.end(), t) - m.triplets.begin());
  };
  for (std::size_t i = 0; i < m.triplets.size(); ++i) {
    ModelRow row{1, {}, '>', 1};
    for (int t = 0; t < k; ++t) row.terms.push_back({m.var(i, t), 1});
    m.rows.push_back(std::move(row));
  }
  for (int t = 0; t < k; ++t)
    for (Taxon a = 0; a < n; ++a)
      for (Taxon b = a + 1; b < n; ++b)
        for (Taxon c = b + 1; c < n; ++c)
          m.rows.push_back(
              {2, {{m.var(index(a, b, c), t), 1}, {m.var(index(a, c, b), t), 1}, {m.var(index(b, c, a), t), 1}}, '=', 1});
  std::set<std::vector<std::pair<int, int>>> seen;
  auto add = [&](int group, std::vector<std::pair<int, int>> terms) {
    std::sort(terms.begin(), terms.end());
    if (seen.insert(terms).second) m.rows.push_back({group, std::move(terms), '<', 1});
  };
  for (int t = 0; t < k; ++t)
    for (Taxon a = 0; a < n; ++a)
      for (Taxon b = 0; b < n; ++b)
        for (Taxon c = 0; c < n; ++c)
          for (Taxon d = 0; d < n; ++d) {
            if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
            const int abc = m.var(index(a, b, c), t), bcd = m.var(index(b, c, d), t);
            add(3, {{abc, 1}, {bcd, 1}, {m.var(index(a, b, d), t), -1}});
            add(4, {{abc, 1}, {bcd, 1}, {m.var(index(a, c, d), t), -1}});
            if (caterpillar_mode) add(5, {{abc, 1}, {m.var(index(c, d, a), t), 1}});
          }
  return m;
}

std::string export_lp(const CoverModel& m) {
  std::ostringstream out;
  out << "\\ cover of all triplets on " << m.n << " leaves by " << m.k << (m.caterpillar_mode ? " caterpillars" : " trees")
      << "\nMinimize\n obj: 0 " << m.var_name(0) << "\nSubject To\n";
  std::vector<int> count(6, 0);
  for (const auto& row : m.rows) {
    out << " g" << row.group << "_" << ++count[static_cast<std::size_t>(row.group)] << ":";
    for (std::size_t i = 0; i < row.terms.size(); ++i) {
      const auto [v, coef] = row.terms[i];
      out << (coef < 0 ? " - " : (i ? " + " : " "));
      if (std::abs(coef) != 1) out << std::abs(coef) << " ";
      out << m.var_name(v);
    }
    out << (row.sense == '<' ? " <= " : row.sense == '>' ? " >= " : " = ") << row.rhs << "\n";
  }
  out << "Binary\n";
  for (int v = 0; v < m.num_vars(); ++v) out << " " << m.var_name(v) << "\n";
  out << "End\n";
  return out.str();
}

namespace {

void add_row(ZeroOneSolver& s, const ModelRow& row) {
  std::vector<int> pos, neg;
  for (auto [v, coef] : row.terms) {
    if (coef == 1) pos.push_back(v);
    else if (coef == -1) neg.push_back(v);
    else throw std::logic_error("cover model row with a coefficient other than +-1");
  }
  std::vector<int> clause;
  if (row.sense != '<') {
    if (!neg.empty() || row.rhs != 1) throw std::logic_error("unsupported cover model row");
    for (int v : pos) clause.push_back(pos_lit(v));
    s.add_clause(clause);
    if (row.sense == '=') s.add_at_most_one(clause);
    return;
  }
  if (row.rhs == static_cast<int>(pos.size()) - 1) {
    for (int v : pos) clause.push_back(neg_lit(v));
    for (int v : neg) clause.push_back(pos_lit(v));
    s.add_clause(clause);
  } else if (row.rhs == 1 && neg.empty()) {
    for (int v : pos) clause.push_back(pos_lit(v));
    s.add_at_most_one(clause);
  } else {
    throw std::logic_error("unsupported cover model row");
  }
}

// Slot t+1 <=lex slot t over the triplet order, so the first slot is the
// largest; with triplet 12|3 first that slot may be assumed to display it.
void add_slot_order(ZeroOneSolver& s, const CoverModel& m) {
  const auto len = m.triplets.size();
  if (len == 0) return;
  s.add_clause({pos_lit(m.var(0, 0))});
  for (int t = 0; t + 1 < m.k; ++t) {
    int eq = -1;  // prefix equal so far; -1 stands for true
    for (std::size_t i = 0; i < len; ++i) {
      const int x = m.var(i, t), y = m.var(i, t + 1);
      std::vector<int> guard;
      if (eq >= 0) guard.push_back(neg_lit(eq));
      auto with = [&](std::initializer_list<int> lits) {
        std::vector<int> c = guard;
        c.insert(c.end(), lits);
        return c;
      };
      s.add_clause(with({neg_lit(y), pos_lit(x)}));
      if (i + 1 == len) break;
      const int next = s.new_var();
      s.add_clause(with({pos_lit(x), pos_lit(y), pos_lit(next)}));
      s.add_clause(with({neg_lit(x), neg_lit(y), pos_lit(next)}));
      eq = next;
    }
  }
}

}  // namespace

TauDecision tau_decision(int n, int k, bool caterpillar_mode, std::optional<std::uint64_t> conflict_limit) {
  const auto model = build_cover_model(n, k, caterpillar_mode);
  ZeroOneSolver s(model.num_vars());
  for (const auto& row : model.rows) add_row(s, row);
  add_slot_order(s, model);
  const auto res = s.solve(conflict_limit);
  TauDecision out;
  out.answer = res.answer;
  out.conflicts = res.conflicts;
  out.decisions = res.decisions;
  if (res.answer != Answer::yes) return out;

  const auto full = full_triplet_set(n);
  std::vector<Taxon> taxa(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) taxa[static_cast<std::size_t>(i)] = i;
  std::vector<char> shown(model.triplets.size(), 0);
  for (int t = 0; t < k; ++t) {
    TripletSet slot;
    slot.labels = full.labels;
    for (std::size_t i = 0; i < model.triplets.size(); ++i)
      if (res.values[static_cast<std::size_t>(model.var(i, t))]) slot.triplets.push_back(model.triplets[i]);
    slot.normalize();
    auto tree = aho_build(slot, taxa);
    if (!tree || displayed_triplets(*tree) != slot.triplets)
      throw std::logic_error("cover model slot is not the triplet set of a tree");
    if (caterpillar_mode && !is_caterpillar(*tree)) throw std::logic_error("cover model slot is not a caterpillar");
    for (std::size_t i = 0; i < model.triplets.size(); ++i)
      if (res.values[static_cast<std::size_t>(model.var(i, t))]) shown[i] = 1;
    out.trees.push_back(std::move(*tree));
  }
  if (std::count(shown.begin(), shown.end(), 0) != 0) throw std::logic_error("cover model witness misses a triplet");
  return out;
}

TauResult tau(int n, bool caterpillar_mode, std::optional<std::uint64_t> conflict_limit) {
  TauResult out;
  for (int k = 1;; ++k) {
    auto d = tau_decision(n, k, caterpillar_mode, conflict_limit);
    out.conflicts += d.conflicts;
    out.value = k;
    if (d.answer == Answer::no) continue;
    out.exact = d.answer == Answer::yes;
    out.trees = std::move(d.trees);
    return out;
  }
}

int log_upper_bound(int n) {
  if (n < 3) throw std::invalid_argument("the log bound needs n >= 3");
  const long double num = std::log(static_cast<long double>(n) * (n - 1) * (n - 2)) - std::log(2.0L);
  return static_cast<int>(std::ceil(num / std::log(1.5L) - 1e-12L));
}

GreedyCover greedy_caterpillar_cover(const TripletSet& r_in) {
  TripletSet r = r_in;
  r.normalize();
  const auto n = static_cast<int>(r.labels.size());
  GreedyCover out;
  std::vector<Triplet> rest = r.triplets;
  while (!rest.empty()) {
    // status per triplet: 0 open, 1 sure (witness placed first), 2 dead
    std::vector<char> status(rest.size(), 0);
    std::vector<char> placed(static_cast<std::size_t>(n), 0);
    std::vector<VarId> order;
    for (int step = 0; step < n; ++step) {
      // 3 * expected number displayed if x goes next, up to a shared offset
      std::vector<long long> score(static_cast<std::size_t>(n), 0);
      for (std::size_t i = 0; i < rest.size(); ++i) {
        if (status[i] != 0) continue;
        const auto& t = rest[i];
        score[static_cast<std::size_t>(t.c)] += 3;
        for (Taxon x : {t.a, t.b, t.c}) score[static_cast<std::size_t>(x)] -= 1;
      }
      int best = -1;
      for (int x = 0; x < n; ++x)
        if (!placed[static_cast<std::size_t>(x)] && (best < 0 || score[static_cast<std::size_t>(x)] > score[static_cast<std::size_t>(best)]))
          best = x;
      placed[static_cast<std::size_t>(best)] = 1;
      order.push_back(best);
      for (std::size_t i = 0; i < rest.size(); ++i) {
        if (status[i] != 0) continue;
        const auto& t = rest[i];
        if (t.c == best) status[i] = 1;
        else if (t.a == best || t.b == best) status[i] = 2;
      }
    }
    auto cat = caterpillar_of(LinearOrdering(order));
    std::vector<Triplet> left;
    for (const auto& t : rest)
      if (!displays(cat, t)) left.push_back(t);
    const std::size_t covered = rest.size() - left.size();
    if (3 * covered < rest.size()) throw std::logic_error("greedy caterpillar covers less than a third");
    out.remaining.push_back(rest.size());
    out.covered.push_back(covered);
    out.caterpillars.push_back(std::move(cat));
    rest = std::move(left);
  }
  return out;
}

UnrootedTree::UnrootedTree(std::vector<std::pair<int, int>> edges, std::vector<Taxon> taxa)
    : edges_(std::move(edges)), adj_(taxa.size()), taxa_(std::move(taxa)) {
  const auto nv = adj_.size();
  if (nv == 0 || edges_.size() + 1 != nv) throw std::invalid_argument("unrooted tree needs |E| = |V| - 1");
  for (auto [u, v] : edges_) {
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= nv || static_cast<std::size_t>(v) >= nv || u == v)
      throw std::invalid_argument("unrooted tree edge out of range");
    adj_[static_cast<std::size_t>(u)].push_back(v);
    adj_[static_cast<std::size_t>(v)].push_back(u);
  }
  std::vector<char> seen(nv, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    ++reached;
    for (int w : adj_[static_cast<std::size_t>(v)])
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        stack.push_back(w);
      }
  }
  if (reached != nv) throw std::invalid_argument("unrooted tree is disconnected");
  std::vector<char> label_seen(nv, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto deg = adj_[v].size();
    if (taxa_[v] >= 0) {
      if (deg != 1) throw std::invalid_argument("leaf of degree other than 1");
      if (static_cast<std::size_t>(taxa_[v]) >= nv || label_seen[static_cast<std::size_t>(taxa_[v])])
        throw std::invalid_argument("leaf labels must be distinct taxa 0..n-1");
      label_seen[static_cast<std::size_t>(taxa_[v])] = 1;
      ++leaves_;
    } else if (deg != 3) {
      throw std::invalid_argument("internal vertex of degree other than 3");
    }
  }
  for (std::size_t i = 0; i < leaves_; ++i)
    if (!label_seen[i]) throw std::invalid_argument("leaf labels must be distinct taxa 0..n-1");
  if (leaves_ < 3) throw std::invalid_argument("unrooted trees need at least 3 leaves");
}

UnrootedTree UnrootedTree::caterpillar(int n) {
  if (n < 3) throw std::invalid_argument("unrooted trees need at least 3 leaves");
  // leaves 0..n-1, spine p_0..p_{n-3} at ids n..2n-3
  std::vector<std::pair<int, int>> edges;
  const int spine = n - 2;
  auto p = [n](int j) { return n + j; };
  for (int j = 0; j + 1 < spine; ++j) edges.push_back({p(j), p(j + 1)});
  edges.push_back({0, p(0)});
  edges.push_back({1, p(0)});
  for (int leaf = 2; leaf < n - 2; ++leaf) edges.push_back({leaf, p(leaf - 1)});
  edges.push_back({n - 2, p(spine - 1)});
  edges.push_back({n - 1, p(spine - 1)});
  if (n == 3) edges = {{0, 3}, {1, 3}, {2, 3}};
  std::vector<Taxon> taxa(static_cast<std::size_t>(n + spine), -1);
  for (int i = 0; i < n; ++i) taxa[static_cast<std::size_t>(i)] = i;
  return UnrootedTree(std::move(edges), std::move(taxa));
}

int UnrootedTree::leaf_vertex(Taxon t) const {
  for (std::size_t v = 0; v < taxa_.size(); ++v)
    if (taxa_[v] == t) return static_cast<int>(v);
  throw std::invalid_argument("unknown taxon");
}

int UnrootedTree::edge_index(int u, int v) const {
  for (std::size_t i = 0; i < edges_.size(); ++i)
    if ((edges_[i].first == u && edges_[i].second == v) || (edges_[i].first == v && edges_[i].second == u))
      return static_cast<int>(i);
  throw std::invalid_argument("no such edge");
}

int UnrootedTree::leaf_edge(Taxon t) const {
  const int v = leaf_vertex(t);
  return edge_index(v, adj_[static_cast<std::size_t>(v)].front());
}

RootedTree rooted_at(const UnrootedTree& base, int root_location) {
  if (root_location < 0 || static_cast<std::size_t>(root_location) >= base.edges().size())
    throw std::invalid_argument("root location is not an edge of the tree");
  std::vector<RootedTree::Node> nodes(1);
  std::function<int(int, int, int)> build = [&](int v, int from, int parent) -> int {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(id)].parent = parent;
    if (base.taxon(v) >= 0) {
      nodes[static_cast<std::size_t>(id)].taxon = base.taxon(v);
      return id;
    }
    std::vector<int> kids;
    for (int w : base.adjacent(v))
      if (w != from) kids.push_back(build(w, v, id));
    nodes[static_cast<std::size_t>(id)].left = kids.at(0);
    nodes[static_cast<std::size_t>(id)].right = kids.at(1);
    return id;
  };
  const auto [u, v] = base.edges()[static_cast<std::size_t>(root_location)];
  const int l = build(u, v, 0);
  const int r = build(v, u, 0);
  nodes[0].left = l;
  nodes[0].right = r;
  return RootedTree(std::move(nodes), 0);
}

std::vector<RootedTree> rootings_of(const UnrootedTree& t) {
  std::vector<RootedTree> out;
  for (std::size_t e = 0; e < t.edges().size(); ++e) out.push_back(rooted_at(t, static_cast<int>(e)));
  return out;
}

std::optional<MissingTriplet> find_missing_triplet(const UnrootedTree& t, const std::vector<int>& root_locations) {
  const auto n = static_cast<Taxon>(t.num_leaves());
  std::set<int> used(root_locations.begin(), root_locations.end());
  for (int e : used)
    if (e < 0 || static_cast<std::size_t>(e) >= t.edges().size())
      throw std::invalid_argument("root location is not an edge of the tree");
  auto unused_leg = [&](Taxon x) { return !used.count(t.leaf_edge(x)); };
  // leaf neighbours of each internal vertex, smallest first
  std::vector<std::vector<Taxon>> legs(t.num_vertices());
  for (std::size_t v = 0; v < t.num_vertices(); ++v)
    if (t.taxon(static_cast<int>(v)) < 0)
      for (int w : t.adjacent(static_cast<int>(v)))
        if (t.taxon(w) >= 0) legs[v].push_back(t.taxon(w));
  for (auto& l : legs) std::sort(l.begin(), l.end());

  std::vector<std::pair<Taxon, Taxon>> cherry_pairs;
  for (const auto& l : legs)
    if (l.size() == 2) cherry_pairs.push_back({l[0], l[1]});
  std::sort(cherry_pairs.begin(), cherry_pairs.end());

  auto by_cherry = [&]() -> std::optional<MissingTriplet> {
    for (auto [a, b] : cherry_pairs) {
      Taxon c = 0;
      while (c == a || c == b) ++c;
      if (c >= n) return std::nullopt;
      // with no root on a's leg, a stays next to b unless b is the outgroup;
      // bc|a fails either way
      if (unused_leg(a)) return MissingTriplet{make_triplet(b, c, a), "cherry"};
      if (unused_leg(b)) return MissingTriplet{make_triplet(a, c, b), "cherry"};
    }
    return std::nullopt;
  };
  auto by_chain = [&]() -> std::optional<MissingTriplet> {
    std::optional<MissingTriplet> best;
    for (std::size_t v = 0; v < t.num_vertices(); ++v) {
      if (legs[v].size() != 1) continue;
      std::vector<int> inner;
      for (int w : t.adjacent(static_cast<int>(v)))
        if (t.taxon(w) < 0 && legs[static_cast<std::size_t>(w)].size() == 1) inner.push_back(w);
      if (inner.size() != 2) continue;
      const Taxon b = legs[v][0];
      if (!unused_leg(b)) continue;
      const Taxon a = legs[static_cast<std::size_t>(inner[0])][0];
      const Taxon c = legs[static_cast<std::size_t>(inner[1])][0];
      if (!best || b < best->triplet.c) best = MissingTriplet{make_triplet(a, c, b), "chain"};
    }
    return best;
  };

  const bool few = root_locations.size() < 2 * cherry_pairs.size();
  auto found = few ? by_cherry() : by_chain();
  if (!found) found = few ? by_chain() : by_cherry();
  if (found) return found;

  std::vector<RootedTree> trees;
  for (int e : used) trees.push_back(rooted_at(t, e));
  for (Taxon a = 0; a < n; ++a)
    for (Taxon b = a + 1; b < n; ++b)
      for (Taxon c = 0; c < n; ++c) {
        if (c == a || c == b) continue;
        const auto x = make_triplet(a, b, c);
        if (std::none_of(trees.begin(), trees.end(), [&](const RootedTree& r) { return displays(r, x); }))
          return MissingTriplet{x, "scan"};
      }
  return std::nullopt;
}

}  // namespace ternperm
