#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ternperm/solver.hpp"

namespace ternperm {

/// Literal of variable v: 2v for x_v = 1, 2v+1 for x_v = 0.
inline int pos_lit(int v) { return 2 * v; }
inline int neg_lit(int v) { return 2 * v + 1; }

struct ZeroOneResult {
  Answer answer = Answer::unknown;
  std::vector<char> values;  // 0/1 per variable on yes
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
};

/// Complete 0/1 search over clauses: unit propagation with watched literals,
/// conflict-driven clause learning, activity-ordered branching and restarts.
class ZeroOneSolver {
 public:
  explicit ZeroOneSolver(int num_vars = 0);

  int new_var();
  int num_vars() const { return static_cast<int>(assign_.size()); }
  /// Adds a clause; duplicate literals are merged and tautologies dropped.
  void add_clause(std::vector<int> lits);
  /// Pairwise encoding of "at most one of lits is true".
  void add_at_most_one(const std::vector<int>& lits);

  /// conflict_limit bounds the number of conflicts; exceeding it gives unknown.
  ZeroOneResult solve(std::optional<std::uint64_t> conflict_limit = std::nullopt);

 private:
  struct Clause {
    std::vector<int> lits;
    bool learnt = false;
  };

  signed char value(int lit) const;
  void enqueue(int lit, int reason);
  int propagate();
  void analyze(int confl, std::vector<int>& learnt, int& back_level);
  void backtrack(int level);
  int pick_branch();
  void bump(int v);
  void reduce_learnts();
  int attach(std::vector<int> lits, bool learnt);

  void heap_insert(int v);
  void heap_up(std::size_t i);
  void heap_down(std::size_t i);
  int heap_pop();

  std::vector<Clause> clauses_;
  std::vector<std::vector<int>> watches_;  // per literal: clauses watching its negation
  std::vector<signed char> assign_;        // -1 unassigned, 0/1
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<char> phase_;
  std::vector<double> activity_;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  std::vector<int> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  double inc_ = 1.0;
  bool empty_clause_ = false;
  std::vector<char> seen_;
};

}  // namespace ternperm
