#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ternperm/orderings.hpp"

namespace ternperm {

enum class SearchMode { exhaustive, branch_and_bound };

/// Three-valued outcome of every exact search in the library. `unknown` only
/// ever means the node budget ran out.
enum class Answer { yes, no, unknown };

const char* to_string(Answer a);

struct SolverConfig {
  SearchMode mode = SearchMode::branch_and_bound;
  /// Fixes the relative order of one variable pair in every ordering when the
  /// family is reversal closed. Ignored while enumerating.
  bool symmetry_breaking = false;
  bool enumerate_all = false;
  std::optional<std::uint64_t> node_limit;
  unsigned threads = 1;
};

/// A multiset of orderings, kept sorted lexicographically.
struct Solution {
  std::vector<LinearOrdering> orderings;

  void canonicalize();
  friend bool operator==(const Solution&, const Solution&) = default;
  friend auto operator<=>(const Solution& a, const Solution& b) { return a.orderings <=> b.orderings; }
};

struct SolveResult {
  Answer answer = Answer::unknown;
  std::optional<Solution> solution;
  std::uint64_t nodes = 0;
};

struct EnumerateResult {
  std::vector<Solution> solutions;  // canonical order
  std::uint64_t nodes = 0;
};

/// True iff every constraint is satisfied by some member and the multiset has
/// at most k members. Throws std::invalid_argument if an ordering's domain is
/// not exactly the instance's variable set.
bool check_solution(const Instance& inst, const Solution& sol);

SolveResult solve(const Instance& inst, const SolverConfig& cfg = {});

/// All multisets of exactly k orderings satisfying the instance. Throws
/// BudgetExceeded when cfg.node_limit is hit.
EnumerateResult enumerate_solutions(const Instance& inst, SolverConfig cfg = {});

}  // namespace ternperm
