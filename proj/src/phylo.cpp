#include "ternperm/phylo.hpp"

#include "ternperm/zeroone.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

namespace ternperm {

Triplet make_triplet(Taxon a, Taxon b, Taxon c) {
  if (a == b || a == c || b == c) throw std::invalid_argument("triplet taxa must be distinct");
  if (a > b) std::swap(a, b);
  return {a, b, c};
}

void TripletSet::add(std::string_view a, std::string_view b, std::string_view c) {
  const Taxon x = labels.intern(a);
  const Taxon y = labels.intern(b);
  const Taxon z = labels.intern(c);
  triplets.push_back(make_triplet(x, y, z));
}

void TripletSet::normalize() {
  std::sort(triplets.begin(), triplets.end());
  triplets.erase(std::unique(triplets.begin(), triplets.end()), triplets.end());
}

bool TripletSet::contains(const Triplet& t) const {
  return std::find(triplets.begin(), triplets.end(), t) != triplets.end();
}

TripletSet parse_triplets(std::string_view text) {
  TripletSet r;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto bar = raw.find('|');
    std::istringstream left(raw.substr(0, bar == std::string::npos ? raw.size() : bar));
    std::vector<std::string> tok;
    std::string w;
    while (left >> w) tok.push_back(w);
    if (bar == std::string::npos) {
      if (!tok.empty()) throw ParseError(line, "expected 'a b | c'");
      continue;
    }
    std::istringstream right(raw.substr(bar + 1));
    std::vector<std::string> wit;
    while (right >> w) wit.push_back(w);
    if (tok.size() != 2 || wit.size() != 1) throw ParseError(line, "expected 'a b | c'");
    if (tok[0] == tok[1] || tok[0] == wit[0] || tok[1] == wit[0])
      throw ParseError(line, "triplet labels must be distinct");
    r.add(tok[0], tok[1], wit[0]);
  }
  r.normalize();
  return r;
}

std::string format_triplet(const Triplet& t, const Interner& names) {
  return names.name(t.a) + " " + names.name(t.b) + " | " + names.name(t.c);
}

std::string format_triplets(const TripletSet& r) {
  std::string out;
  for (const auto& t : r.triplets) out += format_triplet(t, r.labels) + "\n";
  return out;
}

RootedTree::RootedTree(std::vector<Node> nodes, int root) : nodes_(std::move(nodes)), root_(root) {
  const int n = static_cast<int>(nodes_.size());
  if (root < 0 || root >= n) throw std::invalid_argument("tree root out of range");
  if (nodes_[static_cast<std::size_t>(root)].parent != -1) throw std::invalid_argument("tree root has a parent");
  depth_.assign(nodes_.size(), -1);
  std::vector<int> stack{root};
  depth_[static_cast<std::size_t>(root)] = 0;
  std::size_t seen = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++seen;
    const Node& nd = nodes_[static_cast<std::size_t>(v)];
    if ((nd.left < 0) != (nd.right < 0)) throw std::invalid_argument("tree node with exactly one child");
    if (nd.left < 0) {
      if (nd.taxon < 0) throw std::invalid_argument("unlabeled leaf");
      if (static_cast<std::size_t>(nd.taxon) >= leaf_of_.size()) leaf_of_.resize(static_cast<std::size_t>(nd.taxon) + 1, -1);
      if (leaf_of_[static_cast<std::size_t>(nd.taxon)] >= 0) throw std::invalid_argument("repeated leaf label");
      leaf_of_[static_cast<std::size_t>(nd.taxon)] = v;
      leaves_.push_back(nd.taxon);
      continue;
    }
    if (nd.taxon >= 0) throw std::invalid_argument("internal node carries a label");
    for (int c : {nd.left, nd.right}) {
      if (c < 0 || c >= n || nodes_[static_cast<std::size_t>(c)].parent != v || depth_[static_cast<std::size_t>(c)] >= 0)
        throw std::invalid_argument("inconsistent tree arena");
      depth_[static_cast<std::size_t>(c)] = depth_[static_cast<std::size_t>(v)] + 1;
      stack.push_back(c);
    }
  }
  if (seen != nodes_.size()) throw std::invalid_argument("tree arena has unreachable nodes");
  std::sort(leaves_.begin(), leaves_.end());
}

RootedTree RootedTree::single(Taxon t) {
  Node leaf;
  leaf.taxon = t;
  return RootedTree({leaf}, 0);
}

RootedTree RootedTree::join(const RootedTree& left, const RootedTree& right) {
  std::vector<Node> nodes;
  nodes.reserve(left.nodes_.size() + right.nodes_.size() + 1);
  const int off = static_cast<int>(left.nodes_.size());
  for (auto nd : left.nodes_) nodes.push_back(nd);
  for (auto nd : right.nodes_) {
    if (nd.parent >= 0) nd.parent += off;
    if (nd.left >= 0) nd.left += off;
    if (nd.right >= 0) nd.right += off;
    nodes.push_back(nd);
  }
  const int r = static_cast<int>(nodes.size());
  nodes[static_cast<std::size_t>(left.root_)].parent = r;
  nodes[static_cast<std::size_t>(right.root_ + off)].parent = r;
  Node top;
  top.left = left.root_;
  top.right = right.root_ + off;
  nodes.push_back(top);
  return RootedTree(std::move(nodes), r);
}

int RootedTree::leaf_node(Taxon t) const {
  if (!has(t)) throw std::invalid_argument("taxon " + std::to_string(t) + " not in tree");
  return leaf_of_[static_cast<std::size_t>(t)];
}

int RootedTree::lca(int u, int v) const {
  while (depth(u) > depth(v)) u = node(u).parent;
  while (depth(v) > depth(u)) v = node(v).parent;
  while (u != v) {
    u = node(u).parent;
    v = node(v).parent;
  }
  return u;
}

bool RootedTree::is_ancestor(int anc, int v) const {
  while (v >= 0 && depth(v) > depth(anc)) v = node(v).parent;
  return v == anc;
}

std::vector<Taxon> RootedTree::cluster(int i) const {
  std::vector<Taxon> out;
  std::vector<int> stack{i};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (is_leaf(v)) {
      out.push_back(node(v).taxon);
    } else {
      stack.push_back(node(v).left);
      stack.push_back(node(v).right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<Taxon>> RootedTree::clusters() const {
  std::vector<std::vector<Taxon>> out;
  for (int v = 0; v < static_cast<int>(nodes_.size()); ++v)
    if (!is_leaf(v)) out.push_back(cluster(v));
  std::sort(out.begin(), out.end());
  return out;
}

bool displays(const RootedTree& t, const Triplet& r) {
  const int ab = t.lca_taxa(r.a, r.b);
  const int ac = t.lca_taxa(r.a, r.c);
  const int bc = t.lca_taxa(r.b, r.c);
  return ac == bc && t.depth(ab) > t.depth(ac);
}

std::vector<Triplet> displayed_triplets(const RootedTree& t) {
  const auto& L = t.leaves();
  std::vector<Triplet> out;
  for (std::size_t i = 0; i < L.size(); ++i)
    for (std::size_t j = i + 1; j < L.size(); ++j)
      for (std::size_t l = j + 1; l < L.size(); ++l) {
        const Taxon x = L[i], y = L[j], z = L[l];
        const int dxy = t.depth(t.lca_taxa(x, y));
        const int dxz = t.depth(t.lca_taxa(x, z));
        if (dxy > dxz) out.push_back(make_triplet(x, y, z));
        else if (dxz > dxy) out.push_back(make_triplet(x, z, y));
        else out.push_back(make_triplet(y, z, x));
      }
  std::sort(out.begin(), out.end());
  return out;
}

RootedTree restrict_tree(const RootedTree& t, std::span<const Taxon> keep) {
  if (keep.size() < 2) throw std::invalid_argument("restriction needs at least two taxa");
  std::vector<char> wanted;
  for (Taxon x : keep) {
    t.leaf_node(x);
    if (static_cast<std::size_t>(x) >= wanted.size()) wanted.resize(static_cast<std::size_t>(x) + 1, 0);
    wanted[static_cast<std::size_t>(x)] = 1;
  }
  std::function<std::optional<RootedTree>(int)> build = [&](int v) -> std::optional<RootedTree> {
    if (t.is_leaf(v)) {
      const Taxon x = t.node(v).taxon;
      if (static_cast<std::size_t>(x) < wanted.size() && wanted[static_cast<std::size_t>(x)]) return RootedTree::single(x);
      return std::nullopt;
    }
    auto l = build(t.node(v).left);
    auto r = build(t.node(v).right);
    if (l && r) return RootedTree::join(*l, *r);
    return l ? l : r;
  };
  return *build(t.root());
}

std::vector<std::pair<Taxon, Taxon>> cherries(const RootedTree& t) {
  std::vector<std::pair<Taxon, Taxon>> out;
  for (int v = 0; v < static_cast<int>(t.num_nodes()); ++v) {
    if (t.is_leaf(v)) continue;
    const auto& nd = t.node(v);
    if (t.is_leaf(nd.left) && t.is_leaf(nd.right)) {
      auto a = t.node(nd.left).taxon, b = t.node(nd.right).taxon;
      out.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_caterpillar(const RootedTree& t) { return t.num_leaves() >= 2 && cherries(t).size() == 1; }

LinearOrdering ordering_of(const RootedTree& cat) {
  if (!is_caterpillar(cat)) throw std::invalid_argument("tree is not a caterpillar");
  std::vector<VarId> seq;
  int v = cat.root();
  for (;;) {
    const auto& nd = cat.node(v);
    const bool ll = cat.is_leaf(nd.left), rl = cat.is_leaf(nd.right);
    if (ll && rl) {
      auto a = cat.node(nd.left).taxon, b = cat.node(nd.right).taxon;
      seq.push_back(std::min(a, b));
      seq.push_back(std::max(a, b));
      break;
    }
    seq.push_back(cat.node(ll ? nd.left : nd.right).taxon);
    v = ll ? nd.right : nd.left;
  }
  return LinearOrdering(std::move(seq));
}

RootedTree caterpillar_of(const LinearOrdering& order) {
  const auto& s = order.seq();
  if (s.empty()) throw std::invalid_argument("empty ordering");
  if (s.size() == 1) return RootedTree::single(s[0]);
  RootedTree t = RootedTree::join(RootedTree::single(s[s.size() - 2]), RootedTree::single(s.back()));
  for (std::size_t i = s.size() - 2; i-- > 0;) t = RootedTree::join(RootedTree::single(s[i]), t);
  return t;
}

namespace {

// Subdivides the edge above `below` and hangs a new leaf there.
RootedTree insert_leaf(const RootedTree& t, int below, Taxon x) {
  std::vector<RootedTree::Node> nodes;
  for (std::size_t i = 0; i < t.num_nodes(); ++i) nodes.push_back(t.node(static_cast<int>(i)));
  const int leaf = static_cast<int>(nodes.size());
  const int mid = leaf + 1;
  RootedTree::Node nl;
  nl.taxon = x;
  nl.parent = mid;
  RootedTree::Node nm;
  nm.left = below;
  nm.right = leaf;
  nm.parent = nodes[static_cast<std::size_t>(below)].parent;
  if (nm.parent >= 0) {
    auto& p = nodes[static_cast<std::size_t>(nm.parent)];
    (p.left == below ? p.left : p.right) = mid;
  }
  nodes[static_cast<std::size_t>(below)].parent = mid;
  nodes.push_back(nl);
  nodes.push_back(nm);
  const int root = t.root() == below ? mid : t.root();
  return RootedTree(std::move(nodes), root);
}

}  // namespace

std::vector<RootedTree> enumerate_trees(std::span<const Taxon> taxa) {
  if (taxa.empty()) throw std::invalid_argument("no taxa");
  if (taxa.size() > 8) throw std::invalid_argument("tree enumeration is capped at 8 taxa");
  std::vector<RootedTree> cur{RootedTree::single(taxa[0])};
  for (std::size_t i = 1; i < taxa.size(); ++i) {
    std::vector<RootedTree> next;
    for (const auto& t : cur)
      for (int v = 0; v < static_cast<int>(t.num_nodes()); ++v) next.push_back(insert_leaf(t, v, taxa[i]));
    cur = std::move(next);
  }
  std::sort(cur.begin(), cur.end());
  return cur;
}

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[static_cast<std::size_t>(x)] != x) x = p[static_cast<std::size_t>(x)] = p[static_cast<std::size_t>(p[static_cast<std::size_t>(x)])];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) p[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

// Splits `taxa` (sorted) into the components of the Aho graph induced by the
// triplets; components come out ordered by smallest taxon. Triplet lists are
// partitioned alongside, dropping triplets that span components.
std::vector<std::pair<std::vector<Taxon>, std::vector<Triplet>>> aho_split(const std::vector<Taxon>& taxa,
                                                                          const std::vector<Triplet>& trips,
                                                                          std::vector<int>& local) {
  for (std::size_t i = 0; i < taxa.size(); ++i) local[static_cast<std::size_t>(taxa[i])] = static_cast<int>(i);
  UnionFind uf(taxa.size());
  for (const auto& t : trips) uf.unite(local[static_cast<std::size_t>(t.a)], local[static_cast<std::size_t>(t.b)]);
  std::vector<int> comp_of(taxa.size(), -1);
  std::vector<std::pair<std::vector<Taxon>, std::vector<Triplet>>> parts;
  for (std::size_t i = 0; i < taxa.size(); ++i) {
    int r = uf.find(static_cast<int>(i));
    if (comp_of[static_cast<std::size_t>(r)] < 0) {
      comp_of[static_cast<std::size_t>(r)] = static_cast<int>(parts.size());
      parts.emplace_back();
    }
    parts[static_cast<std::size_t>(comp_of[static_cast<std::size_t>(r)])].first.push_back(taxa[i]);
  }
  if (parts.size() > 1)
    for (const auto& t : trips) {
      const int ca = comp_of[static_cast<std::size_t>(uf.find(local[static_cast<std::size_t>(t.a)]))];
      const int cc = comp_of[static_cast<std::size_t>(uf.find(local[static_cast<std::size_t>(t.c)]))];
      if (ca == cc) parts[static_cast<std::size_t>(ca)].second.push_back(t);
    }
  return parts;
}

std::optional<RootedTree> build_rec(const std::vector<Taxon>& taxa, const std::vector<Triplet>& trips,
                                    std::vector<int>& local) {
  if (taxa.size() == 1) return RootedTree::single(taxa[0]);
  auto parts = aho_split(taxa, trips, local);
  if (parts.size() == 1) return std::nullopt;
  std::vector<RootedTree> subs;
  for (const auto& [tx, tr] : parts) {
    auto s = build_rec(tx, tr, local);
    if (!s) return std::nullopt;
    subs.push_back(std::move(*s));
  }
  RootedTree t = RootedTree::join(subs[subs.size() - 2], subs.back());
  for (std::size_t i = subs.size() - 2; i-- > 0;) t = RootedTree::join(subs[i], t);
  return t;
}

}  // namespace

std::optional<RootedTree> aho_build(const TripletSet& r, std::span<const Taxon> taxa) {
  std::vector<Taxon> tx(taxa.begin(), taxa.end());
  std::sort(tx.begin(), tx.end());
  if (tx.empty()) throw std::invalid_argument("no taxa");
  if (std::adjacent_find(tx.begin(), tx.end()) != tx.end()) throw std::invalid_argument("repeated taxon");
  std::vector<int> local(static_cast<std::size_t>(std::max<Taxon>(tx.back(), static_cast<Taxon>(r.labels.size()) - 1) + 1), -1);
  for (const auto& t : r.triplets)
    for (Taxon x : {t.a, t.b, t.c})
      if (!std::binary_search(tx.begin(), tx.end(), x)) throw std::invalid_argument("triplet label outside the taxon set");
  return build_rec(tx, r.triplets, local);
}

std::optional<RootedTree> aho_build(const TripletSet& r) {
  std::vector<Taxon> tx(r.labels.size());
  std::iota(tx.begin(), tx.end(), 0);
  return aho_build(r, tx);
}

std::string to_newick(const RootedTree& t, const Interner& names) {
  std::function<std::pair<std::string, Taxon>(int)> rec = [&](int v) -> std::pair<std::string, Taxon> {
    if (t.is_leaf(v)) return {names.name(t.node(v).taxon), t.node(v).taxon};
    auto l = rec(t.node(v).left);
    auto r = rec(t.node(v).right);
    if (r.second < l.second) std::swap(l, r);
    return {"(" + l.first + "," + r.first + ")", l.second};
  };
  return rec(t.root()).first + ";";
}

namespace {

class NewickParser {
 public:
  NewickParser(std::string_view s, Interner& names) : s_(s), names_(names) {}

  RootedTree parse() {
    auto t = subtree();
    skip_ws();
    if (peek() != ';') fail("expected ';'");
    ++i_;
    skip_ws();
    if (i_ != s_.size()) fail("trailing characters after ';'");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    const int line = 1 + static_cast<int>(std::count(s_.begin(), s_.begin() + static_cast<std::ptrdiff_t>(std::min(i_, s_.size())), '\n'));
    throw ParseError(line, "newick: " + msg);
  }
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  std::string label() {
    skip_ws();
    std::string out;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) &&
           std::string_view("(),;:").find(s_[i_]) == std::string_view::npos)
      out += s_[i_++];
    skip_ws();
    if (peek() == ':') fail("branch lengths are not supported");
    return out;
  }

  RootedTree subtree() {
    skip_ws();
    if (peek() == '(') {
      ++i_;
      auto l = subtree();
      skip_ws();
      if (peek() != ',') fail("expected ',' (trees must be binary)");
      ++i_;
      auto r = subtree();
      skip_ws();
      if (peek() != ')') fail("expected ')' (trees must be binary)");
      ++i_;
      label();
      return RootedTree::join(l, r);
    }
    auto name = label();
    if (name.empty()) fail("expected a leaf label");
    const Taxon x = names_.intern(name);
    if (seen_.size() < names_.size()) seen_.resize(names_.size(), 0);
    if (seen_[static_cast<std::size_t>(x)]) fail("repeated leaf label '" + name + "'");
    seen_[static_cast<std::size_t>(x)] = 1;
    return RootedTree::single(x);
  }

  std::string_view s_;
  std::size_t i_ = 0;
  Interner& names_;
  std::vector<char> seen_;
};

}  // namespace

RootedTree parse_newick(std::string_view text, Interner& names) { return NewickParser(text, names).parse(); }

Digraph::Digraph(std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) add_vertex(std::to_string(i));
}

int Digraph::add_vertex(std::string_view name) {
  const int id = names_.intern(name);
  if (out_.size() < names_.size()) out_.resize(names_.size());
  return id;
}

void Digraph::add_arc(int u, int v) {
  const int n = static_cast<int>(size());
  if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("arc endpoint out of range");
  if (u == v) throw std::invalid_argument("self-loops are not allowed");
  auto& o = out_[static_cast<std::size_t>(u)];
  auto it = std::lower_bound(o.begin(), o.end(), v);
  if (it == o.end() || *it != v) o.insert(it, v);
}

std::vector<int> Digraph::out(int v) const { return out_.at(static_cast<std::size_t>(v)); }

bool Digraph::has_arc(int u, int v) const {
  const auto& o = out_.at(static_cast<std::size_t>(u));
  return std::binary_search(o.begin(), o.end(), v);
}

std::size_t Digraph::out_degree(int v) const { return out_.at(static_cast<std::size_t>(v)).size(); }

std::size_t Digraph::max_out_degree() const {
  std::size_t m = 0;
  for (const auto& o : out_) m = std::max(m, o.size());
  return m;
}

std::vector<std::pair<int, int>> Digraph::arcs() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t u = 0; u < out_.size(); ++u)
    for (int v : out_[u]) out.push_back({static_cast<int>(u), v});
  return out;
}

std::size_t Digraph::num_arcs() const {
  std::size_t n = 0;
  for (const auto& o : out_) n += o.size();
  return n;
}

std::optional<std::vector<int>> Digraph::topological_order() const {
  const auto n = size();
  std::vector<int> indeg(n, 0);
  for (const auto& o : out_)
    for (int v : o) ++indeg[static_cast<std::size_t>(v)];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(static_cast<int>(v));
  std::vector<int> order;
  while (!ready.empty()) {
    int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v : out_[static_cast<std::size_t>(u)])
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

bool Digraph::acyclic_on(const std::vector<char>& members) const {
  const auto n = size();
  std::vector<int> indeg(n, 0);
  std::size_t total = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (!members[u]) continue;
    ++total;
    for (int v : out_[u])
      if (members[static_cast<std::size_t>(v)]) ++indeg[static_cast<std::size_t>(v)];
  }
  std::vector<int> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (members[v] && indeg[v] == 0) ready.push_back(static_cast<int>(v));
  std::size_t done = 0;
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    ++done;
    for (int v : out_[static_cast<std::size_t>(u)])
      if (members[static_cast<std::size_t>(v)] && --indeg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
  }
  return done == total;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string trim_id(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

Digraph parse_dot(std::string_view text) {
  std::string body;
  {
    // Strip comments line by line so line numbers in errors stay meaningful.
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      if (auto p = raw.find("//"); p != std::string::npos) raw.erase(p);
      auto first = raw.find_first_not_of(" \t");
      if (first != std::string::npos && raw[first] == '#') raw.clear();
      body += raw + "\n";
    }
  }
  auto open = body.find('{');
  auto close = body.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ParseError(1, "dot: expected 'digraph { ... }'");
  const std::string header = trim(body.substr(0, open));
  if (header.rfind("digraph", 0) != 0) throw ParseError(1, "dot: only digraphs are supported");
  int line = 1 + static_cast<int>(std::count(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(open), '\n'));
  Digraph d;
  std::string stmt;
  auto flush = [&]() {
    std::string s = stmt;
    stmt.clear();
    if (auto lb = s.find('['); lb != std::string::npos) s.erase(lb);
    s = trim(s);
    if (s.empty()) return;
    if (s.find("--") != std::string::npos) throw ParseError(line, "dot: undirected edge in a digraph");
    std::vector<std::string> parts;
    std::size_t pos = 0;
    for (;;) {
      auto arrow = s.find("->", pos);
      parts.push_back(trim_id(s.substr(pos, arrow == std::string::npos ? std::string::npos : arrow - pos)));
      if (arrow == std::string::npos) break;
      pos = arrow + 2;
    }
    if (parts.size() == 1) {
      if (s.find('=') != std::string::npos || s == "graph" || s == "node" || s == "edge") return;
      if (parts[0].empty()) throw ParseError(line, "dot: empty vertex name");
      d.add_vertex(parts[0]);
      return;
    }
    for (const auto& p : parts)
      if (p.empty()) throw ParseError(line, "dot: empty vertex name");
    try {
      for (std::size_t i = 0; i + 1 < parts.size(); ++i) d.add_arc(parts[i], parts[i + 1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line, std::string("dot: ") + e.what());
    }
  };
  bool in_brackets = false;
  for (std::size_t i = open + 1; i < close; ++i) {
    const char ch = body[i];
    if (ch == '[') in_brackets = true;
    if (ch == ']') in_brackets = false;
    if (!in_brackets && (ch == ';' || ch == '\n')) {
      flush();
      if (ch == '\n') ++line;
      continue;
    }
    if (ch == '\n') ++line;
    stmt += ch;
  }
  flush();
  return d;
}

std::string to_dot(const Digraph& d) {
  std::string out = "digraph D {\n";
  for (const auto& n : d.names().names()) out += "  \"" + n + "\";\n";
  for (auto [u, v] : d.arcs()) out += "  \"" + d.names().name(u) + "\" -> \"" + d.names().name(v) + "\";\n";
  return out + "}\n";
}

Digraph triplet_digraph(const TripletSet& r) {
  Digraph d;
  for (const auto& n : r.labels.names()) d.add_vertex(n);
  for (const auto& t : r.triplets) {
    d.add_arc(t.c, t.a);
    d.add_arc(t.c, t.b);
  }
  return d;
}

std::optional<RootedTree> caterpillar_compatible(const TripletSet& r) {
  if (r.labels.size() == 0) throw std::invalid_argument("triplet set has no labels");
  auto order = triplet_digraph(r).topological_order();
  if (!order) return std::nullopt;
  return caterpillar_of(LinearOrdering(*order));
}

namespace {

bool triplets_compatible(const std::vector<Triplet>& trips, std::vector<int>& local, std::vector<Taxon>& scratch) {
  if (trips.size() <= 1) return true;
  scratch.clear();
  for (const auto& t : trips) {
    scratch.push_back(t.a);
    scratch.push_back(t.b);
    scratch.push_back(t.c);
  }
  std::sort(scratch.begin(), scratch.end());
  scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
  std::function<bool(const std::vector<Taxon>&, const std::vector<Triplet>&)> rec =
      [&](const std::vector<Taxon>& taxa, const std::vector<Triplet>& tr) {
        if (tr.empty()) return true;
        auto parts = aho_split(taxa, tr, local);
        if (parts.size() == 1) return false;
        for (const auto& [tx, t2] : parts)
          if (!rec(tx, t2)) return false;
        return true;
      };
  return rec(std::vector<Taxon>(scratch), trips);
}

class CompatSearch {
 public:
  CompatSearch(const TripletSet& r, int k, bool cats, std::optional<std::uint64_t> limit)
      : r_(r), k_(k), cats_(cats), limit_(limit), nl_(r.labels.size()) {
    const auto nt = r.triplets.size();
    assign_.assign(nt, -1);
    feas_.assign(nt * static_cast<std::size_t>(k), 1);
    blocks_.assign(static_cast<std::size_t>(k), {});
    local_.assign(nl_, -1);
    if (cats_) arc_count_.assign(static_cast<std::size_t>(k), std::vector<int>(nl_ * nl_, 0));
    std::vector<int> freq(nl_, 0);
    for (const auto& t : r.triplets) ++freq[t.a], ++freq[t.b], ++freq[t.c];
    fails_.assign(nt, 0);
    weight_.reserve(nt);
    for (const auto& t : r.triplets) weight_.push_back(freq[t.a] + freq[t.b] + freq[t.c]);
  }

  Answer run() {
    if (search(r_.triplets.size())) return Answer::yes;
    return exceeded_ ? Answer::unknown : Answer::no;
  }

  std::uint64_t nodes() const { return nodes_; }

  std::vector<RootedTree> trees() const {
    std::vector<RootedTree> out;
    std::vector<Taxon> all(nl_);
    std::iota(all.begin(), all.end(), 0);
    for (const auto& b : blocks_) {
      if (b.empty() && !out.empty()) continue;
      TripletSet sub;
      sub.labels = r_.labels;
      for (int t : b) sub.triplets.push_back(r_.triplets[static_cast<std::size_t>(t)]);
      sub.normalize();
      out.push_back(cats_ ? *caterpillar_compatible(sub) : *aho_build(sub, all));
    }
    return out;
  }

 private:
  char& feas(std::size_t t, int b) { return feas_[t * static_cast<std::size_t>(k_) + static_cast<std::size_t>(b)]; }

  bool reaches(int b, int from, int to) const {
    const auto& cnt = arc_count_[static_cast<std::size_t>(b)];
    std::vector<char> seen(nl_, 0);
    std::vector<int> stack{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (u == to) return true;
      for (std::size_t v = 0; v < nl_; ++v)
        if (cnt[static_cast<std::size_t>(u) * nl_ + v] && !seen[v]) {
          seen[v] = 1;
          stack.push_back(static_cast<int>(v));
        }
    }
    return false;
  }

  bool fits(std::size_t t, int b) { return fits(r_.triplets[t], b); }

  bool fits(const Triplet& tr, int b) {
    if (cats_) return !reaches(b, tr.a, tr.c) && !reaches(b, tr.b, tr.c);
    trial_.clear();
    for (int u : blocks_[static_cast<std::size_t>(b)]) trial_.push_back(r_.triplets[static_cast<std::size_t>(u)]);
    trial_.push_back(tr);
    return triplets_compatible(trial_, local_, scratch_);
  }

  void add(std::size_t t, int b) {
    blocks_[static_cast<std::size_t>(b)].push_back(static_cast<int>(t));
    assign_[t] = b;
    if (cats_) {
      const auto& tr = r_.triplets[t];
      auto& cnt = arc_count_[static_cast<std::size_t>(b)];
      ++cnt[static_cast<std::size_t>(tr.c) * nl_ + static_cast<std::size_t>(tr.a)];
      ++cnt[static_cast<std::size_t>(tr.c) * nl_ + static_cast<std::size_t>(tr.b)];
    }
  }

  void remove(std::size_t t, int b) {
    blocks_[static_cast<std::size_t>(b)].pop_back();
    assign_[t] = -1;
    if (cats_) {
      const auto& tr = r_.triplets[t];
      auto& cnt = arc_count_[static_cast<std::size_t>(b)];
      --cnt[static_cast<std::size_t>(tr.c) * nl_ + static_cast<std::size_t>(tr.a)];
      --cnt[static_cast<std::size_t>(tr.c) * nl_ + static_cast<std::size_t>(tr.b)];
    }
  }

  int used() const {
    int u = 0;
    while (u < k_ && !blocks_[static_cast<std::size_t>(u)].empty()) ++u;
    return u;
  }

  bool search(std::size_t remaining) {
    if (remaining == 0) return true;
    ++nodes_;
    if (limit_ && nodes_ > *limit_) {
      exceeded_ = true;
      return false;
    }
    const int u = used();
    // Fail-first, weighted by how often a triplet ran out of blocks; ties go
    // to the triplet on the most used taxa.
    std::size_t best = SIZE_MAX;
    int best_count = INT32_MAX;
    for (std::size_t t = 0; t < assign_.size(); ++t) {
      if (assign_[t] >= 0) continue;
      int c = u < k_ ? 1 : 0;
      for (int b = 0; b < u; ++b) c += feas(t, b);
      if (c == 0) {
        ++fails_[t];
        return false;
      }
      // singletons first, then fewest blocks per recorded wipeout
      bool better = best == SIZE_MAX;
      if (!better && (c == 1) != (best_count == 1)) {
        better = c == 1;
      } else if (!better) {
        const double sa = static_cast<double>(c) / (1 + fails_[t]);
        const double sb = static_cast<double>(best_count) / (1 + fails_[best]);
        better = sa < sb || (sa == sb && weight_[t] > weight_[best]);
      }
      if (better) {
        best_count = c;
        best = t;
      }
    }
    std::vector<int> options;
    for (int b = 0; b < u; ++b)
      if (feas(best, b)) options.push_back(b);
    if (u < k_) options.push_back(u);
    for (int b : options) {
      add(best, b);
      const std::size_t mark = trail_.size();
      for (std::size_t t = 0; t < assign_.size(); ++t)
        if (assign_[t] < 0 && feas(t, b) && !fits(t, b)) {
          feas(t, b) = 0;
          trail_.push_back({t, b});
        }
      // Triplets forced by block b are displayed by every completion of it.
      const std::size_t forced_mark = forced_.size();
      for (std::size_t t = 0; t < assign_.size(); ++t) {
        if (assign_[t] >= 0 || !feas(t, b)) continue;
        const auto& tr = r_.triplets[t];
        if (!fits(make_triplet(tr.a, tr.c, tr.b), b) && !fits(make_triplet(tr.b, tr.c, tr.a), b)) {
          assign_[t] = b;
          forced_.push_back(t);
        }
      }
      if (search(remaining - 1 - (forced_.size() - forced_mark))) return true;
      while (forced_.size() > forced_mark) {
        assign_[forced_.back()] = -1;
        forced_.pop_back();
      }
      while (trail_.size() > mark) {
        auto [t, bb] = trail_.back();
        trail_.pop_back();
        feas(t, bb) = 1;
      }
      remove(best, b);
      if (exceeded_) return false;
    }
    return false;
  }

  const TripletSet& r_;
  int k_;
  bool cats_;
  std::optional<std::uint64_t> limit_;
  std::size_t nl_;
  std::vector<int> assign_;
  std::vector<char> feas_;
  std::vector<std::vector<int>> blocks_;
  std::vector<std::vector<int>> arc_count_;
  std::vector<std::pair<std::size_t, int>> trail_;
  std::vector<std::size_t> forced_;
  std::vector<int> weight_;
  std::vector<int> fails_;
  std::vector<int> local_;
  std::vector<Triplet> trial_;
  std::vector<Taxon> scratch_;
  std::uint64_t nodes_ = 0;
  bool exceeded_ = false;
};

}  // namespace

namespace {

constexpr long kTreeSatMaxTaxa = 20;

// The four triples of a 4-set {0,1,2,3} in lexicographic order. Topology 0 of
// triple (x,y,z) is xy|z, 1 is xz|y, 2 is yz|x.
constexpr int kQuadTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};

Triplet topology(int x, int y, int z, int t) {
  if (t == 0) return make_triplet(x, y, z);
  if (t == 1) return make_triplet(x, z, y);
  return make_triplet(y, z, x);
}

// Minimal partial topology choices on a 4-set that no tree displays, as
// (triple, topology) lists.
const std::vector<std::vector<std::pair<int, int>>>& quad_rules() {
  static const auto rules = [] {
    std::vector<char> ok(81);
    std::vector<int> local(4, -1);
    std::vector<Taxon> scratch;
    for (int m = 0; m < 81; ++m) {
      std::vector<Triplet> trips;
      for (int q = 0, v = m; q < 4; ++q, v /= 3)
        trips.push_back(topology(kQuadTriples[q][0], kQuadTriples[q][1], kQuadTriples[q][2], v % 3));
      ok[static_cast<std::size_t>(m)] = triplets_compatible(trips, local, scratch);
    }
    auto forbidden = [&](const std::array<int, 4>& p) {
      for (int m = 0; m < 81; ++m) {
        bool match = true;
        for (int q = 0, v = m; q < 4; ++q, v /= 3) match = match && (p[q] < 0 || p[q] == v % 3);
        if (match && ok[static_cast<std::size_t>(m)]) return false;
      }
      return true;
    };
    std::vector<std::vector<std::pair<int, int>>> out;
    for (int m = 0; m < 256; ++m) {
      std::array<int, 4> p{};
      for (int q = 0, v = m; q < 4; ++q, v /= 4) p[q] = v % 4 - 1;
      if (!forbidden(p)) continue;
      bool minimal = true;
      for (int q = 0; q < 4 && minimal; ++q) {
        if (p[q] < 0) continue;
        const int keep = p[q];
        p[q] = -1;
        minimal = !forbidden(p);
        p[q] = keep;
      }
      if (!minimal) continue;
      std::vector<std::pair<int, int>> rule;
      for (int q = 0; q < 4; ++q)
        if (p[q] >= 0) rule.push_back({q, p[q]});
      out.push_back(rule);
    }
    return out;
  }();
  return rules;
}

// Tree mode as 0/1 feasibility: every tree picks one topology per triple of
// used taxa, every 4-set is consistent (which makes the choice displayable by
// a tree), and every input triplet is picked by some tree.
CompatResult tree_compat_sat(const TripletSet& r, int k, std::optional<std::uint64_t> conflict_limit) {
  std::vector<int> id(r.labels.size(), -1);
  std::vector<Taxon> used;
  for (const auto& t : r.triplets)
    for (Taxon x : {t.a, t.b, t.c})
      if (id[static_cast<std::size_t>(x)] < 0) {
        id[static_cast<std::size_t>(x)] = static_cast<int>(used.size());
        used.push_back(x);
      }
  const int n = static_cast<int>(used.size());
  const auto nn = static_cast<std::size_t>(n);
  std::vector<int> index(nn * nn * nn, -1);
  int triples = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) index[(static_cast<std::size_t>(a) * nn + static_cast<std::size_t>(b)) * nn + static_cast<std::size_t>(c)] = triples++;
  auto var = [&](int tree, int a, int b, int c, int t) {
    const auto at = (static_cast<std::size_t>(a) * nn + static_cast<std::size_t>(b)) * nn + static_cast<std::size_t>(c);
    return (tree * triples + index[at]) * 3 + t;
  };
  auto lit_of = [&](int tree, const Triplet& t) {
    const int c = id[static_cast<std::size_t>(t.c)];
    std::array<int, 3> xs{id[static_cast<std::size_t>(t.a)], id[static_cast<std::size_t>(t.b)], c};
    std::sort(xs.begin(), xs.end());
    return pos_lit(var(tree, xs[0], xs[1], xs[2], c == xs[2] ? 0 : c == xs[1] ? 1 : 2));
  };

  ZeroOneSolver s(k * triples * 3);
  for (int tree = 0; tree < k; ++tree) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = b + 1; c < n; ++c) {
          std::vector<int> one{pos_lit(var(tree, a, b, c, 0)), pos_lit(var(tree, a, b, c, 1)), pos_lit(var(tree, a, b, c, 2))};
          s.add_clause(one);
          s.add_at_most_one(one);
        }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = b + 1; c < n; ++c)
          for (int d = c + 1; d < n; ++d) {
            const int quad[4] = {a, b, c, d};
            for (const auto& rule : quad_rules()) {
              std::vector<int> clause;
              for (auto [q, t] : rule)
                clause.push_back(neg_lit(var(tree, quad[kQuadTriples[q][0]], quad[kQuadTriples[q][1]], quad[kQuadTriples[q][2]], t)));
              s.add_clause(clause);
            }
          }
  }
  for (const auto& t : r.triplets) {
    std::vector<int> clause;
    for (int tree = 0; tree < k; ++tree) clause.push_back(lit_of(tree, t));
    s.add_clause(clause);
  }

  // Pairwise incompatible triplets need distinct trees; pin them in order.
  CompatResult res;
  std::vector<int> local(r.labels.size(), -1);
  std::vector<Taxon> scratch;
  std::vector<std::size_t> clique;
  for (std::size_t t = 0; t < r.triplets.size() && static_cast<int>(clique.size()) <= k; ++t) {
    const bool apart = std::all_of(clique.begin(), clique.end(), [&](std::size_t u) {
      return !triplets_compatible({r.triplets[t], r.triplets[u]}, local, scratch);
    });
    if (apart) clique.push_back(t);
  }
  if (static_cast<int>(clique.size()) > k) {
    res.answer = Answer::no;
    return res;
  }
  for (std::size_t j = 0; j < clique.size(); ++j) s.add_clause({lit_of(static_cast<int>(j), r.triplets[clique[j]])});

  const auto z = s.solve(conflict_limit);
  res.answer = z.answer;
  res.nodes = z.conflicts;
  if (res.answer != Answer::yes) return res;
  std::vector<Taxon> all(r.labels.size());
  std::iota(all.begin(), all.end(), 0);
  for (int tree = 0; tree < k; ++tree) {
    TripletSet sub;
    sub.labels = r.labels;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = b + 1; c < n; ++c)
          for (int t = 0; t < 3; ++t)
            if (z.values[static_cast<std::size_t>(var(tree, a, b, c, t))])
              sub.triplets.push_back(topology(used[static_cast<std::size_t>(a)], used[static_cast<std::size_t>(b)],
                                              used[static_cast<std::size_t>(c)], t));
    sub.normalize();
    auto built = aho_build(sub, all);
    if (!built) throw std::logic_error("locally consistent triplet choice is not displayable");
    res.trees.push_back(std::move(*built));
  }
  return res;
}

}  // namespace

CompatResult k_tree_compatible(const TripletSet& r, int k, bool caterpillars_only,
                               std::optional<std::uint64_t> node_limit) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (r.labels.size() == 0) throw std::invalid_argument("triplet set has no labels");
  // Exact 0/1 model for trees on few taxa; the block search otherwise.
  if (!caterpillars_only && k >= 2) {
    std::vector<char> in_use(r.labels.size(), 0);
    for (const auto& t : r.triplets) in_use[t.a] = in_use[t.b] = in_use[t.c] = 1;
    if (std::count(in_use.begin(), in_use.end(), 1) <= kTreeSatMaxTaxa) return tree_compat_sat(r, k, node_limit);
  }
  CompatSearch s(r, k, caterpillars_only, node_limit);
  CompatResult res;
  res.answer = s.run();
  res.nodes = s.nodes();
  if (res.answer == Answer::yes) res.trees = s.trees();
  return res;
}

DicolorResult two_dicolorable(const Digraph& d, std::optional<std::uint64_t> node_limit) {
  const auto n = d.size();
  DicolorResult res;
  // Breadth-first order over the underlying undirected graph.
  std::vector<std::vector<int>> und(n), in(n);
  for (auto [u, v] : d.arcs()) {
    und[static_cast<std::size_t>(u)].push_back(v);
    und[static_cast<std::size_t>(v)].push_back(u);
    in[static_cast<std::size_t>(v)].push_back(u);
  }
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::size_t head = order.size();
    order.push_back(static_cast<int>(s));
    while (head < order.size()) {
      int u = order[head++];
      for (int v : und[static_cast<std::size_t>(u)])
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          order.push_back(v);
        }
    }
  }
  std::vector<int> color(n, -1);
  // v closes a cycle in its class iff some out-neighbour of that class reaches v.
  auto closes_cycle = [&](int v, int c) {
    std::vector<char> vis(n, 0);
    std::vector<int> stack;
    for (int w : d.out(v))
      if (color[static_cast<std::size_t>(w)] == c) {
        vis[static_cast<std::size_t>(w)] = 1;
        stack.push_back(w);
      }
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : d.out(u)) {
        if (w == v) return true;
        if (color[static_cast<std::size_t>(w)] == c && !vis[static_cast<std::size_t>(w)]) {
          vis[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    return false;
  };
  bool exceeded = false;
  std::function<bool(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) return true;
    ++res.nodes;
    if (node_limit && res.nodes > *node_limit) {
      exceeded = true;
      return false;
    }
    const int v = order[i];
    for (int c : {0, 1}) {
      if (i == 0 && c == 1) break;
      if (closes_cycle(v, c)) continue;
      color[static_cast<std::size_t>(v)] = c;
      if (rec(i + 1)) return true;
      color[static_cast<std::size_t>(v)] = -1;
      if (exceeded) return false;
    }
    return false;
  };
  if (rec(0)) {
    res.answer = Answer::yes;
    res.colors = color;
  } else {
    res.answer = exceeded ? Answer::unknown : Answer::no;
  }
  return res;
}

bool is_dicoloring(const Digraph& d, const std::vector<int>& colors) {
  if (colors.size() != d.size()) return false;
  for (int color : {0, 1}) {
    std::vector<char> members(d.size(), 0);
    for (std::size_t v = 0; v < d.size(); ++v) {
      if (colors[v] != 0 && colors[v] != 1) return false;
      members[v] = colors[v] == color;
    }
    if (!d.acyclic_on(members)) return false;
  }
  return true;
}

}  // namespace ternperm
