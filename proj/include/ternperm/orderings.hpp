#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ternperm/common.hpp"

namespace ternperm {

/// One element of S3 written as the word pi(1)pi(2)pi(3); pi maps positions
/// to symbols, so the word 132 asks for alpha(v1) < alpha(v3) < alpha(v2).
using Perm3 = std::array<std::uint8_t, 3>;

/// The six words of S3 in lexicographic order; bit i of a family mask refers
/// to kS3[i].
inline constexpr std::array<Perm3, 6> kS3 = {{{1, 2, 3}, {1, 3, 2}, {2, 1, 3}, {2, 3, 1}, {3, 1, 2}, {3, 2, 1}}};

int perm_index(const Perm3& p);
std::string perm_word(const Perm3& p);

class PiFamily {
 public:
  /// Family 0..10 of the classical table of ternary permutation CSPs.
  static PiFamily of(int index);

  int index() const { return index_; }
  std::uint8_t mask() const { return mask_; }
  bool contains(const Perm3& p) const { return (mask_ >> perm_index(p)) & 1U; }
  std::vector<Perm3> perms() const;
  std::size_t size() const;
  /// True when the word set is closed under reversing the ordering.
  bool reversal_closed() const;

  friend bool operator==(const PiFamily& a, const PiFamily& b) { return a.index_ == b.index_; }

 private:
  PiFamily(int index, std::uint8_t mask) : index_(index), mask_(mask) {}
  int index_;
  std::uint8_t mask_;
};

inline PiFamily pi_family(int index) { return PiFamily::of(index); }

struct Constraint {
  std::array<VarId, 3> v;

  friend auto operator<=>(const Constraint&, const Constraint&) = default;
};

/// Bijection between a variable set and positions 0..m-1. Position i holds
/// seq()[i]; position(v) is its exact inverse.
class LinearOrdering {
 public:
  LinearOrdering() = default;
  explicit LinearOrdering(std::vector<VarId> seq);

  std::size_t size() const { return seq_.size(); }
  bool empty() const { return seq_.empty(); }
  const std::vector<VarId>& seq() const { return seq_; }
  VarId at(std::size_t i) const { return seq_[i]; }

  bool contains(VarId v) const {
    return v >= 0 && static_cast<std::size_t>(v) < pos_.size() && pos_[static_cast<std::size_t>(v)] >= 0;
  }
  /// 0-based position; throws if v is not ordered.
  int position(VarId v) const;

  /// Sorted variable set.
  std::vector<VarId> domain() const;

  friend bool operator==(const LinearOrdering& a, const LinearOrdering& b) { return a.seq_ == b.seq_; }
  friend auto operator<=>(const LinearOrdering& a, const LinearOrdering& b) { return a.seq_ <=> b.seq_; }

 private:
  std::vector<VarId> seq_;
  std::vector<int> pos_;
};

/// The word of S3 realised by alpha on the constraint's variables.
Perm3 pattern(const LinearOrdering& alpha, const Constraint& c);

bool satisfies(const PiFamily& pi, const LinearOrdering& alpha, const Constraint& c);

LinearOrdering reversal(const LinearOrdering& alpha);
LinearOrdering restrict(const LinearOrdering& alpha, std::span<const VarId> keep);
LinearOrdering concat(const LinearOrdering& alpha, const LinearOrdering& beta);

/// All ordered triples of distinct domain variables that alpha satisfies
/// under pi, sorted.
std::vector<Constraint> implied_constraints(const LinearOrdering& alpha, const PiFamily& pi);

/// Variable set, constraints, family and budget of one k-Pi instance.
struct Instance {
  Interner vars;
  std::vector<Constraint> constraints;
  PiFamily pi = PiFamily::of(0);
  int k = 1;

  std::size_t num_vars() const { return vars.size(); }
  /// Checks variable references and k >= 1; throws std::invalid_argument.
  void validate() const;
  /// Sorts and removes duplicate constraints.
  void normalize();

  Constraint constraint(std::string_view a, std::string_view b, std::string_view c) const {
    return {{vars.at(a), vars.at(b), vars.at(c)}};
  }
};

/// Parses the `.csp` text format:
///   pi <i>
///   k <k>
///   vars <name>...
///   c <a> <b> <c>
/// Whitespace separated; `#` starts a comment. Duplicate constraints are
/// dropped.
Instance parse_instance(std::string_view text);
std::string format_instance(const Instance& inst);

/// Renders an ordering with the instance's variable names, e.g. "(a,b,c)".
std::string format_ordering(const LinearOrdering& alpha, const Interner& names);
/// Parses "(a,b,c)" or "a b c" against a name table.
LinearOrdering parse_ordering(std::string_view text, const Interner& names);

/// Ordering of ids 0..m-1 in ascending order.
LinearOrdering identity_ordering(std::size_t m);

}  // namespace ternperm
