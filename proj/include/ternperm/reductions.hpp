#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ternperm/orderings.hpp"
#include "ternperm/phylo.hpp"
#include "ternperm/solver.hpp"

namespace ternperm {

/// Sizes and renamings of one transform, in emission order.
struct Manifest {
  std::string reduction;
  std::string source_problem;
  std::string target_problem;
  std::vector<std::pair<std::string, std::uint64_t>> sizes;
  /// Source name -> target name, only for elements that were renamed.
  std::vector<std::pair<std::string, std::string>> renamed;

  std::uint64_t size(std::string_view key) const;
};

/// A transformed instance together with the solution maps of its proof.
/// lift_forward maps a source solution to a target solution and throws
/// std::invalid_argument when its input is not a valid source solution.
/// lift_backward does the same in the other direction.
template <class Src, class Tgt, class SrcSol, class TgtSol>
struct Reduction {
  Src source;
  Tgt target;
  Manifest manifest;
  std::function<TgtSol(const SrcSol&)> lift_forward;
  std::function<SrcSol(const TgtSol&)> lift_backward;
};

using Coloring = std::vector<int>;
using Trees = std::vector<RootedTree>;

using CspReduction = Reduction<Instance, Instance, Solution, Solution>;
using TripletReduction = Reduction<TripletSet, TripletSet, Trees, Trees>;
using DigraphReduction = Reduction<Digraph, Digraph, Coloring, Coloring>;
using DicolorReduction = Reduction<Digraph, TripletSet, Coloring, Trees>;

/// Fresh element name `g:<reduction>:<index>:<role>`. Shared gadget elements
/// use index "g".
std::string fresh_name(std::string_view reduction, std::string_view index, std::string_view role);

CspReduction reduce_1pi5_to_2pi0(const Instance& src);
CspReduction reduce_2pi0_to_2pi1(const Instance& src);
CspReduction reduce_1pi9_to_2pi4(const Instance& src);
CspReduction reduce_1pi5_to_2pi5(const Instance& src);
CspReduction reduce_2pi1_to_2pi6(const Instance& src);
/// Target variables are the source variables that occur in a constraint,
/// followed by four fresh variables per constraint.
CspReduction reduce_1pi5_to_2pi9(const Instance& src);

/// Source labels must not be named "0".."5"; those are the gadget leaves.
TripletReduction reduce_2cat_to_3cat(const TripletSet& src);
TripletReduction reduce_2cat_to_3tree(const TripletSet& src);

DigraphReduction reduce_dichromatic_to_outdeg3(const Digraph& src);
/// Throws std::invalid_argument when some out-degree exceeds 3.
DicolorReduction reduce_outdeg3_to_2cat(const Digraph& src);

/// Turns a tree whose restriction to `frame` is a caterpillar into a
/// caterpillar on the same leaves. Pendant subtrees without frame leaves are
/// laid out along the spine, each next to the place where it hung; leaves of
/// one subtree keep their depth order. For leaves x, y with lca(c,y) a strict
/// ancestor of lca(c,x), c the smaller cherry leaf of the frame, the same holds
/// in the result. Requires the frame to span the root and its cherry to be a
/// cherry of t; throws std::invalid_argument otherwise.
RootedTree flatten_to_caterpillar(const RootedTree& t, std::span<const Taxon> frame);
/// Frame {0,...,5}, as in the three-tree reduction.
RootedTree flatten_to_caterpillar(const RootedTree& t);

/// Registered reduction names, e.g. "1pi5-to-2pi0", in a fixed order.
const std::vector<std::string>& reduction_names();
/// "csp", "triplets" or "digraph".
std::string reduction_input_kind(std::string_view name);
std::string reduction_output_kind(std::string_view name);

}  // namespace ternperm
