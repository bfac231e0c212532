#include "ternperm/zeroone.hpp"

#include <algorithm>
#include <stdexcept>

namespace ternperm {

namespace {

// Luby restart sequence 1,1,2,1,1,2,4,...
std::uint64_t luby(std::uint64_t i) {
  std::uint64_t size = 1;
  int seq = 0;
  while (size < i + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != i) {
    size = (size - 1) / 2;
    --seq;
    i %= size;
  }
  return std::uint64_t{1} << seq;
}

}  // namespace

ZeroOneSolver::ZeroOneSolver(int num_vars) {
  for (int i = 0; i < num_vars; ++i) new_var();
}

int ZeroOneSolver::new_var() {
  const int v = num_vars();
  assign_.push_back(-1);
  level_.push_back(0);
  reason_.push_back(-1);
  phase_.push_back(0);
  activity_.push_back(0.0);
  seen_.push_back(0);
  heap_pos_.push_back(-1);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

signed char ZeroOneSolver::value(int lit) const {
  const signed char a = assign_[static_cast<std::size_t>(lit >> 1)];
  if (a < 0) return -1;
  return static_cast<signed char>((lit & 1) ? 1 - a : a);
}

void ZeroOneSolver::add_clause(std::vector<int> lits) {
  for (int l : lits)
    if (l < 0 || (l >> 1) >= num_vars()) throw std::invalid_argument("literal refers to an unknown variable");
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (std::size_t i = 0; i + 1 < lits.size(); ++i)
    if ((lits[i] ^ 1) == lits[i + 1]) return;
  if (lits.empty()) {
    empty_clause_ = true;
    return;
  }
  if (lits.size() == 1) {
    clauses_.push_back({lits, false});
    return;
  }
  attach(std::move(lits), false);
}

void ZeroOneSolver::add_at_most_one(const std::vector<int>& lits) {
  for (std::size_t i = 0; i < lits.size(); ++i)
    for (std::size_t j = i + 1; j < lits.size(); ++j) add_clause({lits[i] ^ 1, lits[j] ^ 1});
}

int ZeroOneSolver::attach(std::vector<int> lits, bool learnt) {
  const int ci = static_cast<int>(clauses_.size());
  watches_[static_cast<std::size_t>(lits[0])].push_back(ci);
  watches_[static_cast<std::size_t>(lits[1])].push_back(ci);
  clauses_.push_back({std::move(lits), learnt});
  return ci;
}

void ZeroOneSolver::enqueue(int lit, int reason) {
  const auto v = static_cast<std::size_t>(lit >> 1);
  assign_[v] = static_cast<signed char>((lit & 1) ? 0 : 1);
  level_[v] = static_cast<int>(trail_lim_.size());
  reason_[v] = reason;
  trail_.push_back(lit);
}

// Watches hold clauses by watched literal; a clause is revisited when one of
// its two watched literals becomes false. Returns a conflicting clause or -1.
int ZeroOneSolver::propagate() {
  while (qhead_ < trail_.size()) {
    const int falsified = trail_[qhead_++] ^ 1;
    auto& ws = watches_[static_cast<std::size_t>(falsified)];
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      const int ci = ws[i++];
      auto& c = clauses_[static_cast<std::size_t>(ci)].lits;
      if (c.empty()) continue;  // deleted
      if (c[0] == falsified) std::swap(c[0], c[1]);
      if (value(c[0]) == 1) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k)
        if (value(c[k]) != 0) {
          std::swap(c[1], c[k]);
          watches_[static_cast<std::size_t>(c[1])].push_back(ci);
          moved = true;
          break;
        }
      if (moved) continue;
      ws[j++] = ci;
      if (value(c[0]) == 0) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        return ci;
      }
      enqueue(c[0], ci);
    }
    ws.resize(j);
  }
  return -1;
}

void ZeroOneSolver::bump(int v) {
  auto& a = activity_[static_cast<std::size_t>(v)];
  a += inc_;
  if (a > 1e100) {
    for (auto& x : activity_) x *= 1e-100;
    inc_ *= 1e-100;
  }
  if (heap_pos_[static_cast<std::size_t>(v)] >= 0) heap_up(static_cast<std::size_t>(heap_pos_[static_cast<std::size_t>(v)]));
}

void ZeroOneSolver::analyze(int confl, std::vector<int>& learnt, int& back_level) {
  const int current = static_cast<int>(trail_lim_.size());
  learnt.assign(1, -1);
  int path = 0;
  int p = -1;
  std::size_t idx = trail_.size();
  do {
    const auto& c = clauses_[static_cast<std::size_t>(confl)].lits;
    for (std::size_t k = (p < 0 ? 0 : 1); k < c.size(); ++k) {
      const int q = c[k];
      const auto v = static_cast<std::size_t>(q >> 1);
      if (seen_[v] || level_[v] == 0) continue;
      seen_[v] = 1;
      bump(static_cast<int>(v));
      if (level_[v] == current) ++path;
      else learnt.push_back(q);
    }
    while (!seen_[static_cast<std::size_t>(trail_[--idx] >> 1)]) {
    }
    p = trail_[idx];
    confl = reason_[static_cast<std::size_t>(p >> 1)];
    seen_[static_cast<std::size_t>(p >> 1)] = 0;
    --path;
  } while (path > 0);
  learnt[0] = p ^ 1;

  // drop literals implied by the rest of the clause
  std::vector<int> kept{learnt[0]};
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    const int r = reason_[static_cast<std::size_t>(learnt[k] >> 1)];
    bool redundant = r >= 0;
    if (redundant) {
      const auto& c = clauses_[static_cast<std::size_t>(r)].lits;
      for (std::size_t m = 1; m < c.size() && redundant; ++m) {
        const auto v = static_cast<std::size_t>(c[m] >> 1);
        redundant = seen_[v] || level_[v] == 0;
      }
    }
    if (!redundant) kept.push_back(learnt[k]);
  }
  for (std::size_t k = 1; k < learnt.size(); ++k) seen_[static_cast<std::size_t>(learnt[k] >> 1)] = 0;
  learnt = std::move(kept);

  back_level = 0;
  std::size_t max_i = 1;
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    const int lv = level_[static_cast<std::size_t>(learnt[k] >> 1)];
    if (lv > back_level) {
      back_level = lv;
      max_i = k;
    }
  }
  if (learnt.size() > 1) std::swap(learnt[1], learnt[max_i]);
}

void ZeroOneSolver::backtrack(int level) {
  if (static_cast<int>(trail_lim_.size()) <= level) return;
  const std::size_t stop = trail_lim_[static_cast<std::size_t>(level)];
  for (std::size_t i = trail_.size(); i-- > stop;) {
    const auto v = static_cast<std::size_t>(trail_[i] >> 1);
    phase_[v] = static_cast<char>(assign_[v]);
    assign_[v] = -1;
    reason_[v] = -1;
    if (heap_pos_[v] < 0) heap_insert(static_cast<int>(v));
  }
  trail_.resize(stop);
  trail_lim_.resize(static_cast<std::size_t>(level));
  qhead_ = std::min(qhead_, trail_.size());
}

int ZeroOneSolver::pick_branch() {
  while (!heap_.empty()) {
    const int v = heap_pop();
    if (assign_[static_cast<std::size_t>(v)] < 0) return v;
  }
  return -1;
}

void ZeroOneSolver::reduce_learnts() {
  std::vector<int> idx;
  for (std::size_t i = 0; i < clauses_.size(); ++i)
    if (clauses_[i].learnt && clauses_[i].lits.size() > 2) idx.push_back(static_cast<int>(i));
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return clauses_[static_cast<std::size_t>(a)].lits.size() > clauses_[static_cast<std::size_t>(b)].lits.size();
  });
  for (std::size_t k = 0; k < idx.size() / 2; ++k) {
    auto& c = clauses_[static_cast<std::size_t>(idx[k])];
    const auto v = static_cast<std::size_t>(c.lits[0] >> 1);
    if (assign_[v] >= 0 && reason_[v] == idx[k]) continue;  // locked
    c.lits.clear();
    c.lits.shrink_to_fit();
    c.learnt = false;
  }
}

ZeroOneResult ZeroOneSolver::solve(std::optional<std::uint64_t> conflict_limit) {
  ZeroOneResult res;
  backtrack(0);
  if (empty_clause_) {
    res.answer = Answer::no;
    return res;
  }
  for (std::size_t i = 0; i < clauses_.size(); ++i)
    if (clauses_[i].lits.size() == 1) {
      const int l = clauses_[i].lits[0];
      if (value(l) == 0) {
        res.answer = Answer::no;
        return res;
      }
      if (value(l) < 0) enqueue(l, -1);
    }
  std::uint64_t restarts = 0;
  std::uint64_t since_restart = 0;
  std::uint64_t learnt_count = 0;
  double max_learnts = static_cast<double>(clauses_.size()) / 3.0 + 2000.0;
  std::vector<int> learnt;
  for (;;) {
    const int confl = propagate();
    if (confl >= 0) {
      ++res.conflicts;
      ++since_restart;
      if (trail_lim_.empty()) {
        res.answer = Answer::no;
        return res;
      }
      if (conflict_limit && res.conflicts > *conflict_limit) {
        backtrack(0);
        res.answer = Answer::unknown;
        return res;
      }
      int back = 0;
      analyze(confl, learnt, back);
      backtrack(back);
      if (learnt.size() == 1) {
        enqueue(learnt[0], -1);
      } else {
        const int ci = attach(learnt, true);
        ++learnt_count;
        enqueue(learnt[0], ci);
      }
      inc_ /= 0.95;
      continue;
    }
    if (since_restart >= 100 * luby(restarts)) {
      ++restarts;
      since_restart = 0;
      backtrack(0);
    }
    if (static_cast<double>(learnt_count) > max_learnts) {
      reduce_learnts();
      learnt_count /= 2;
      max_learnts *= 1.1;
    }
    const int v = pick_branch();
    if (v < 0) {
      res.answer = Answer::yes;
      res.values.assign(assign_.begin(), assign_.end());
      backtrack(0);
      return res;
    }
    ++res.decisions;
    trail_lim_.push_back(trail_.size());
    enqueue(phase_[static_cast<std::size_t>(v)] ? pos_lit(v) : neg_lit(v), -1);
  }
}

void ZeroOneSolver::heap_insert(int v) {
  heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

void ZeroOneSolver::heap_up(std::size_t i) {
  const int v = heap_[i];
  const double a = activity_[static_cast<std::size_t>(v)];
  while (i > 0) {
    const std::size_t parent = (i - 1) / 2;
    if (activity_[static_cast<std::size_t>(heap_[parent])] >= a) break;
    heap_[i] = heap_[parent];
    heap_pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
}

void ZeroOneSolver::heap_down(std::size_t i) {
  const int v = heap_[i];
  const double a = activity_[static_cast<std::size_t>(v)];
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= heap_.size()) break;
    if (child + 1 < heap_.size() &&
        activity_[static_cast<std::size_t>(heap_[child + 1])] > activity_[static_cast<std::size_t>(heap_[child])])
      ++child;
    if (activity_[static_cast<std::size_t>(heap_[child])] <= a) break;
    heap_[i] = heap_[child];
    heap_pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
    i = child;
  }
  heap_[i] = v;
  heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
}

int ZeroOneSolver::heap_pop() {
  const int top = heap_.front();
  heap_pos_[static_cast<std::size_t>(top)] = -1;
  heap_.front() = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_pos_[static_cast<std::size_t>(heap_.front())] = 0;
    heap_down(0);
  }
  return top;
}

}  // namespace ternperm
