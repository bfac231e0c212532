#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ternperm/common.hpp"
#include "ternperm/orderings.hpp"
#include "ternperm/solver.hpp"

namespace ternperm {

/// Rooted triplet ab|c, stored with a < b; c is the witness.
struct Triplet {
  Taxon a;
  Taxon b;
  Taxon c;

  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

/// Canonical ab|c; throws unless the three taxa are distinct.
Triplet make_triplet(Taxon a, Taxon b, Taxon c);

struct TripletSet {
  Interner labels;
  std::vector<Triplet> triplets;  // sorted, unique after normalize()

  /// Interns the three names and appends the triplet.
  void add(std::string_view a, std::string_view b, std::string_view c);
  void normalize();
  bool contains(const Triplet& t) const;
  std::size_t size() const { return triplets.size(); }
};

/// `a b | c` per line, `#` comments. Labels interned in first-occurrence order.
TripletSet parse_triplets(std::string_view text);
std::string format_triplets(const TripletSet& r);
std::string format_triplet(const Triplet& t, const Interner& names);

/// Binary rooted tree with taxa on the leaves. Nodes live in an arena; node
/// ids are only meaningful for one tree object.
class RootedTree {
 public:
  struct Node {
    int parent = -1;
    int left = -1;
    int right = -1;
    Taxon taxon = -1;
  };

  RootedTree() = default;
  /// Validates that the arena is a binary tree rooted at `root` with unique
  /// taxa on exactly the leaves.
  RootedTree(std::vector<Node> nodes, int root);

  static RootedTree single(Taxon t);
  static RootedTree join(const RootedTree& left, const RootedTree& right);

  int root() const { return root_; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t num_nodes() const { return nodes_.size(); }
  bool is_leaf(int i) const { return node(i).left < 0; }
  int depth(int i) const { return depth_[static_cast<std::size_t>(i)]; }

  bool has(Taxon t) const {
    return t >= 0 && static_cast<std::size_t>(t) < leaf_of_.size() && leaf_of_[static_cast<std::size_t>(t)] >= 0;
  }
  /// Leaf node of a taxon; throws for unknown taxa.
  int leaf_node(Taxon t) const;
  /// Sorted taxa.
  const std::vector<Taxon>& leaves() const { return leaves_; }
  std::size_t num_leaves() const { return leaves_.size(); }

  int lca(int u, int v) const;
  int lca_taxa(Taxon a, Taxon b) const { return lca(leaf_node(a), leaf_node(b)); }
  bool is_ancestor(int anc, int v) const;
  /// Sorted taxa below node i.
  std::vector<Taxon> cluster(int i) const;
  /// Clusters of all internal nodes, sorted. Together with the leaf set this
  /// determines the tree.
  std::vector<std::vector<Taxon>> clusters() const;

  friend bool operator==(const RootedTree& a, const RootedTree& b) {
    return a.leaves_ == b.leaves_ && a.clusters() == b.clusters();
  }
  friend auto operator<=>(const RootedTree& a, const RootedTree& b) {
    if (auto c = a.leaves_ <=> b.leaves_; c != 0) return c;
    return a.clusters() <=> b.clusters();
  }

 private:
  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<int> depth_;
  std::vector<int> leaf_of_;
  std::vector<Taxon> leaves_;
};

bool displays(const RootedTree& t, const Triplet& r);
/// Every triplet displayed by t, sorted; C(n,3) of them.
std::vector<Triplet> displayed_triplets(const RootedTree& t);
/// Minimal subtree spanning `keep`, degree-two vertices suppressed.
RootedTree restrict_tree(const RootedTree& t, std::span<const Taxon> keep);

std::vector<std::pair<Taxon, Taxon>> cherries(const RootedTree& t);
bool is_caterpillar(const RootedTree& t);

/// Leaves listed root-first; the final two form the cherry, smaller id first.
LinearOrdering ordering_of(const RootedTree& caterpillar);
/// Inverse of ordering_of: seq[0] hangs off the root, the last two form the
/// cherry.
RootedTree caterpillar_of(const LinearOrdering& order);

/// All rooted binary trees on the taxa, sorted canonically. At most 8 taxa.
std::vector<RootedTree> enumerate_trees(std::span<const Taxon> taxa);

/// Aho et al.'s BUILD, binarized deterministically. The tree has exactly the
/// given taxa as leaves.
std::optional<RootedTree> aho_build(const TripletSet& r, std::span<const Taxon> taxa);
std::optional<RootedTree> aho_build(const TripletSet& r);

std::string to_newick(const RootedTree& t, const Interner& names);
/// Strictly binary Newick without branch lengths; new names are interned.
RootedTree parse_newick(std::string_view text, Interner& names);

class Digraph {
 public:
  Digraph() = default;
  /// Vertices named "0".."n-1".
  explicit Digraph(std::size_t n);

  int add_vertex(std::string_view name);
  /// Parallel arcs collapse; self-loops are rejected.
  void add_arc(int u, int v);
  void add_arc(std::string_view u, std::string_view v) {
    const int a = add_vertex(u);
    add_arc(a, add_vertex(v));
  }

  std::size_t size() const { return names_.size(); }
  const Interner& names() const { return names_; }
  Interner& names() { return names_; }
  std::vector<int> out(int v) const;
  bool has_arc(int u, int v) const;
  std::size_t out_degree(int v) const;
  std::size_t max_out_degree() const;
  /// Sorted arc list.
  std::vector<std::pair<int, int>> arcs() const;
  std::size_t num_arcs() const;

  /// Smallest-id-first topological order, or nullopt on a directed cycle.
  std::optional<std::vector<int>> topological_order() const;
  bool acyclic() const { return topological_order().has_value(); }
  /// True when the subgraph induced by `members` has no directed cycle.
  bool acyclic_on(const std::vector<char>& members) const;

 private:
  Interner names_;
  std::vector<std::vector<int>> out_;
};

/// Minimal DOT reader: `a -> b;` arcs and bare `a;` vertices inside
/// `digraph { ... }`. Attribute lists are ignored.
Digraph parse_dot(std::string_view text);
std::string to_dot(const Digraph& d);

/// Arcs c->a and c->b for every ab|c, over the full label set of r.
Digraph triplet_digraph(const TripletSet& r);

/// Caterpillar on all labels of r displaying r, read off a topological order
/// of its triplet digraph; nullopt iff that digraph has a cycle.
std::optional<RootedTree> caterpillar_compatible(const TripletSet& r);

struct CompatResult {
  Answer answer = Answer::unknown;
  std::vector<RootedTree> trees;  // on yes: at most k trees over all labels of r
  std::uint64_t nodes = 0;
};

/// Exact search for at most k trees (caterpillars when flagged) jointly
/// displaying r.
CompatResult k_tree_compatible(const TripletSet& r, int k, bool caterpillars_only,
                               std::optional<std::uint64_t> node_limit = std::nullopt);

struct DicolorResult {
  Answer answer = Answer::unknown;
  std::vector<int> colors;  // 0/1 per vertex on yes
  std::uint64_t nodes = 0;
};

DicolorResult two_dicolorable(const Digraph& d, std::optional<std::uint64_t> node_limit = std::nullopt);

/// True when colors has one 0/1 entry per vertex and both classes are acyclic.
bool is_dicoloring(const Digraph& d, const std::vector<int>& colors);

}  // namespace ternperm
