#pragma once

#include <array>
#include <string>
#include <vector>

#include "ternperm/orderings.hpp"
#include "ternperm/phylo.hpp"
#include "ternperm/solver.hpp"

namespace ternperm {

enum class SymmetryKind {
  none,
  /// Solutions equal after reversing any subset of members.
  per_order_reversal,
  /// Orderings equal up to swapping their last two positions (the cherry of
  /// the corresponding caterpillar).
  swap_last_two,
};

struct SymmetrySpec {
  SymmetryKind kind = SymmetryKind::none;
  std::string description;

  static SymmetrySpec none() { return {SymmetryKind::none, "no symmetry"}; }
  static SymmetrySpec reversal() { return {SymmetryKind::per_order_reversal, "member-wise reversal"}; }
  static SymmetrySpec cherry_swap() { return {SymmetryKind::swap_last_two, "swap of the last two positions"}; }
};

const char* to_string(SymmetryKind k);

/// Canonical representative of a solution's class under the symmetry.
Solution quotient(const Solution& s, SymmetryKind kind);

struct GadgetReport {
  Instance instance;
  SymmetrySpec symmetry;
  std::vector<Solution> expected;  // the generators, one multiset
  std::vector<Solution> found;     // every satisfying multiset, canonical order
  std::vector<Solution> classes;   // found, quotiented and deduplicated
  /// Number of ordered k-tuples behind `found` (each multiset counted once
  /// per distinct arrangement of its members).
  std::uint64_t ordered_count = 0;
  std::uint64_t nodes = 0;
  bool unique = false;
};

/// Instance over variables "1".."m" (ids 0..m-1) whose constraints are the
/// union of the generators' implied constraints; k = number of generators.
Instance gadget_instance(const std::vector<LinearOrdering>& generators, const PiFamily& pi);

GadgetReport verify_uniqueness(const std::vector<LinearOrdering>& generators, const PiFamily& pi, int k,
                               const SymmetrySpec& sym, SolverConfig cfg = {});

/// Generators of the built-in ordering gadgets "pi5", "pi6", "pi9" (0-based ids).
std::vector<LinearOrdering> builtin_generators(const std::string& name);
PiFamily builtin_family(const std::string& name);
SymmetrySpec builtin_symmetry(const std::string& name);

using TreeTriple = std::array<RootedTree, 3>;

struct CaterpillarTriple {
  TreeTriple trees;                         // on taxa 0..5
  std::array<LinearOrdering, 3> orderings;  // root-first, see ordering_of
  std::uint64_t candidates_checked = 0;
};

struct TreeGadgetReport {
  TreeTriple triple;
  std::vector<Triplet> cover;  // union of the displayed triplets
  std::size_t trees_per_slot = 0;
  /// Multisets {T1,T2,T3} of trees on 0..5 jointly displaying `cover`; at
  /// most 256 are kept, found_count has the total.
  std::vector<TreeTriple> found;
  std::uint64_t found_count = 0;
  /// True if some kept covering multiset other than the input contains a
  /// tree with two or more cherries.
  bool non_caterpillar_cover = false;
  bool unique = false;
};

/// Exhaustive check over all multisets of three trees on taxa 0..5. With
/// `stop_early` the scan ends at the first covering multiset that differs
/// from the input (found then holds just that witness).
TreeGadgetReport verify_tree_uniqueness(const TreeTriple& triple, unsigned threads = 1, bool stop_early = false);

/// Lexicographically first caterpillar triple (by root-first orderings) with
/// root children 5, 1, 0, cherries {0,1} and {0,5} and leaf 4 above 2 in the
/// first two, leaf 3 above 2 in the second, leaf 2 above 3, 4 and 5 and leaf
/// 3 above 1 and 5 in the third, whose displayed triplets admit no other
/// covering triple of trees. Throws std::runtime_error if none exists.
CaterpillarTriple derive_caterpillar_triple(unsigned threads = 1);

}  // namespace ternperm
