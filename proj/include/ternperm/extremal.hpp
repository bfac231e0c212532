#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ternperm/phylo.hpp"

namespace ternperm {

/// All 3*C(n,3) triplets over labels "1".."n" (taxon i is label i+1), sorted.
/// Throws std::invalid_argument for n < 3.
TripletSet full_triplet_set(int n);

/// One linear row of the 0/1 cover model over variables x[triplet, slot].
struct ModelRow {
  int group = 0;  // 1..5
  std::vector<std::pair<int, int>> terms;  // (variable, coefficient)
  char sense = '<';                        // '<' (<=), '>' (>=) or '='
  int rhs = 0;
};

/// The 0/1 model deciding whether k trees (caterpillars in caterpillar mode)
/// display every triplet over n leaves. Variable of triplet i in slot t is
/// t * triplets.size() + i.
struct CoverModel {
  int n = 0;
  int k = 0;
  bool caterpillar_mode = false;
  std::vector<Triplet> triplets;  // over taxa 0..n-1
  std::vector<ModelRow> rows;

  int var(std::size_t triplet, int slot) const {
    return slot * static_cast<int>(triplets.size()) + static_cast<int>(triplet);
  }
  int num_vars() const { return k * static_cast<int>(triplets.size()); }
  std::string var_name(int v) const;
};

CoverModel build_cover_model(int n, int k, bool caterpillar_mode);
/// CPLEX LP text: a zero objective, the rows and a Binary section.
std::string export_lp(const CoverModel& m);

struct TauDecision {
  Answer answer = Answer::unknown;
  std::vector<RootedTree> trees;  // on yes, over taxa 0..n-1
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
};

/// Whether k trees (caterpillars) display all of T_n. conflict_limit bounds the
/// search; exceeding it gives unknown. Throws std::logic_error if a witness
/// fails to display T_n.
TauDecision tau_decision(int n, int k, bool caterpillar_mode,
                         std::optional<std::uint64_t> conflict_limit = std::nullopt);

struct TauResult {
  int value = 0;       // tau when exact, else a proven lower bound
  bool exact = false;  // false when the search at `value` ran out of budget
  std::vector<RootedTree> trees;
  std::uint64_t conflicts = 0;
};

TauResult tau(int n, bool caterpillar_mode, std::optional<std::uint64_t> conflict_limit = std::nullopt);

/// ceil((log(n(n-1)(n-2)) - log 2) / log(3/2)) for n >= 3.
int log_upper_bound(int n);

struct GreedyCover {
  std::vector<RootedTree> caterpillars;
  std::vector<std::size_t> covered;    // triplets newly displayed per round
  std::vector<std::size_t> remaining;  // triplets left before each round
};

/// Caterpillars built by conditional expectation over a uniformly random
/// root-first leaf order; every round displays at least a third of what is
/// left (throws std::logic_error otherwise).
GreedyCover greedy_caterpillar_cover(const TripletSet& r);

/// Unrooted binary tree; leaves carry taxa 0..n-1, internal vertices have
/// degree 3.
class UnrootedTree {
 public:
  /// Edges over vertices 0..V-1; taxa[v] is -1 for internal vertices.
  UnrootedTree(std::vector<std::pair<int, int>> edges, std::vector<Taxon> taxa);

  /// Leaves 0..n-1 attached in order, each subdividing the edge picked by
  /// choose(num_edges). n >= 3.
  template <class Choose>
  static UnrootedTree grow(int n, Choose&& choose);
  /// Unrooted caterpillar with leaf order 0..n-1.
  static UnrootedTree caterpillar(int n);

  std::size_t num_leaves() const { return leaves_; }
  std::size_t num_vertices() const { return adj_.size(); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& adjacent(int v) const { return adj_[static_cast<std::size_t>(v)]; }
  Taxon taxon(int v) const { return taxa_[static_cast<std::size_t>(v)]; }
  int leaf_vertex(Taxon t) const;
  /// Index of the edge {u, v}; throws if absent.
  int edge_index(int u, int v) const;
  /// Index of the pendant edge of taxon t.
  int leaf_edge(Taxon t) const;

 private:
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<Taxon> taxa_;
  std::size_t leaves_ = 0;
};

/// Rooting of `base` at the edge with index root_location.
RootedTree rooted_at(const UnrootedTree& base, int root_location);
/// One rooted tree per edge, in edge order: 2n-3 trees.
std::vector<RootedTree> rootings_of(const UnrootedTree& t);

struct MissingTriplet {
  Triplet triplet;
  std::string method;  // "cherry", "chain" or "scan"
};

/// A triplet over the taxa of t displayed by none of the rootings at the given
/// root locations (edge indices). Tries the cherry argument when fewer than
/// 2c rootings are given (c cherries), else a chain (u,v,w) whose middle leg
/// is unused; falls back to scanning all triplets.
std::optional<MissingTriplet> find_missing_triplet(const UnrootedTree& t, const std::vector<int>& root_locations);

template <class Choose>
UnrootedTree UnrootedTree::grow(int n, Choose&& choose) {
  if (n < 3) throw std::invalid_argument("unrooted trees need at least 3 leaves");
  // vertex ids: leaves 0..n-1, internal from n
  std::vector<std::pair<int, int>> edges{{0, n}, {1, n}, {2, n}};
  int next = n + 1;
  for (int leaf = 3; leaf < n; ++leaf) {
    const auto e = static_cast<std::size_t>(choose(edges.size()));
    const auto [u, v] = edges.at(e);
    const int mid = next++;
    edges[e] = {u, mid};
    edges.push_back({mid, v});
    edges.push_back({leaf, mid});
  }
  std::vector<Taxon> taxa(static_cast<std::size_t>(next), -1);
  for (int i = 0; i < n; ++i) taxa[static_cast<std::size_t>(i)] = i;
  return UnrootedTree(std::move(edges), std::move(taxa));
}

}  // namespace ternperm
