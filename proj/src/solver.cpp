#include "ternperm/solver.hpp"

#include <algorithm>
#include <bit>
#include <mutex>
#include <numeric>

namespace ternperm {

const char* to_string(Answer a) {
  switch (a) {
    case Answer::yes: return "yes";
    case Answer::no: return "no";
    case Answer::unknown: return "unknown";
  }
  return "unknown";
}

void Solution::canonicalize() { std::sort(orderings.begin(), orderings.end()); }

bool check_solution(const Instance& inst, const Solution& sol) {
  const auto n = inst.num_vars();
  for (const auto& alpha : sol.orderings) {
    if (alpha.size() != n) throw std::invalid_argument("ordering domain does not match the instance variables");
    for (std::size_t v = 0; v < n; ++v)
      if (!alpha.contains(static_cast<VarId>(v)))
        throw std::invalid_argument("ordering domain does not match the instance variables");
  }
  if (sol.orderings.size() > static_cast<std::size_t>(inst.k)) return false;
  for (const auto& c : inst.constraints) {
    bool ok = false;
    for (const auto& alpha : sol.orderings)
      if (satisfies(inst.pi, alpha, c)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

namespace {

// Pair (u, w) whose order is fixed in every ordering under reversal symmetry
// breaking; -1 when disabled.
std::pair<VarId, VarId> reversal_pair(const Instance& inst, const SolverConfig& cfg) {
  if (!cfg.symmetry_breaking || cfg.enumerate_all || !inst.pi.reversal_closed() || inst.num_vars() < 2) return {-1, -1};
  return {0, 1};
}

struct SearchLimit {
  std::optional<std::uint64_t> limit;
  std::atomic<std::uint64_t> nodes{0};
  std::atomic<bool> exceeded{false};
  std::atomic<bool> stop{false};

  bool tick(std::uint64_t n = 1) {
    auto total = nodes.fetch_add(n) + n;
    if (limit && total > *limit) {
      exceeded = true;
      return false;
    }
    return !stop.load(std::memory_order_relaxed);
  }
};

// Transitively closed precedence relation per slot, undone through a trail.
// A constraint whose words fit in only one slot imposes there the relations
// shared by its remaining words; one that fits in no slot is a conflict.
class SlotOrders {
 public:
  SlotOrders(const Instance& inst, const SolverConfig& cfg)
      : inst_(inst), m_(static_cast<int>(inst.num_vars())), k_(inst.k), family_(inst.pi.mask()) {
    if (m_ > 64) throw std::invalid_argument("branch-and-bound supports at most 64 variables");
    const auto uk = static_cast<std::size_t>(k_);
    succ_.assign(uk, std::vector<std::uint64_t>(static_cast<std::size_t>(m_), 0));
    pred_ = succ_;
    weight_.assign(inst.constraints.size(), 1);
    for (int w = 0; w < 6; ++w) {
      const auto& p = kS3[static_cast<std::size_t>(w)];
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
          before_[w][p[static_cast<std::size_t>(a)] - 1][p[static_cast<std::size_t>(b)] - 1] = true;
    }
    auto [u, w] = reversal_pair(inst, cfg);
    if (u >= 0)
      for (int t = 0; t < k_ && root_ok_; ++t) root_ok_ = add(t, u, w);
    root_ok_ = root_ok_ && propagate();
  }

 protected:
  static std::uint64_t bit(int v) { return std::uint64_t{1} << v; }
  std::uint64_t full() const { return m_ == 64 ? ~std::uint64_t{0} : bit(m_) - 1; }
  bool known(int t, int u, int v) const {
    return (succ_[static_cast<std::size_t>(t)][static_cast<std::size_t>(u)] & bit(v)) != 0;
  }

  // Records u before v in slot t; false if v is already before u.
  bool add(int t, int u, int v) {
    auto& succ = succ_[static_cast<std::size_t>(t)];
    auto& pred = pred_[static_cast<std::size_t>(t)];
    if (succ[static_cast<std::size_t>(u)] & bit(v)) return true;
    if (u == v || (succ[static_cast<std::size_t>(v)] & bit(u))) return false;
    const std::uint64_t P = pred[static_cast<std::size_t>(u)] | bit(u);
    const std::uint64_t S = succ[static_cast<std::size_t>(v)] | bit(v);
    for (std::uint64_t r = P; r; r &= r - 1) {
      const int p = std::countr_zero(r);
      const auto cur = succ[static_cast<std::size_t>(p)];
      if ((cur & S) != S) set(t, p, true, cur | S);
    }
    for (std::uint64_t r = S; r; r &= r - 1) {
      const int q = std::countr_zero(r);
      const auto cur = pred[static_cast<std::size_t>(q)];
      if ((cur & P) != P) set(t, q, false, cur | P);
    }
    changed_ = true;
    return true;
  }

  bool add_word(int t, const Constraint& c, int w) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (before_[w][a][b] && !add(t, c.v[static_cast<std::size_t>(a)], c.v[static_cast<std::size_t>(b)]))
          return false;
    return true;
  }

  // Family words still consistent with slot t's relation on c.
  int live_words(int t, const Constraint& c) const {
    int mask = family_;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b && known(t, c.v[static_cast<std::size_t>(b)], c.v[static_cast<std::size_t>(a)]))
          for (int w = 0; w < 6; ++w)
            if (before_[w][a][b]) mask &= ~(1 << w);
    return mask;
  }

  // True when slot t fixes all three pairs of c, i.e. c holds there.
  bool decided(int t, const Constraint& c) const {
    int n = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b && known(t, c.v[static_cast<std::size_t>(a)], c.v[static_cast<std::size_t>(b)])) ++n;
    return n == 3;
  }

  bool propagate() {
    do {
      changed_ = false;
      for (std::size_t ci = 0; ci < inst_.constraints.size(); ++ci) {
        const auto& c = inst_.constraints[ci];
        int only = -1;
        int words = 0;
        int live = 0;
        for (int t = 0; t < k_ && live < 2; ++t) {
          const int w = live_words(t, c);
          if (w) {
            ++live;
            only = t;
            words = w;
          }
        }
        if (live == 0) {
          ++weight_[ci];
          return false;
        }
        if (live > 1) continue;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            bool all = true;
            for (int w = 0; w < 6 && all; ++w)
              if ((words >> w) & 1) all = before_[w][a][b];
            if (all && !add(only, c.v[static_cast<std::size_t>(a)], c.v[static_cast<std::size_t>(b)])) {
              ++weight_[ci];
              return false;
            }
          }
      }
    } while (changed_);
    return true;
  }

  void unwind(std::size_t mark) {
    while (trail_.size() > mark) {
      const auto& e = trail_.back();
      auto& rows = e.is_succ ? succ_ : pred_;
      rows[static_cast<std::size_t>(e.t)][static_cast<std::size_t>(e.v)] = e.old;
      trail_.pop_back();
    }
  }

  const Instance& inst_;
  int m_;
  int k_;
  int family_;
  bool before_[6][3][3] = {};
  bool root_ok_ = true;
  // conflicts caused per constraint; guides branching
  std::vector<std::uint64_t> weight_;
  std::vector<std::vector<std::uint64_t>> succ_;
  std::vector<std::vector<std::uint64_t>> pred_;

  struct Undo {
    int t;
    int v;
    bool is_succ;
    std::uint64_t old;
  };
  std::vector<Undo> trail_;

 private:
  void set(int t, int v, bool is_succ, std::uint64_t value) {
    auto& row = (is_succ ? succ_ : pred_)[static_cast<std::size_t>(t)];
    trail_.push_back({t, v, is_succ, row[static_cast<std::size_t>(v)]});
    row[static_cast<std::size_t>(v)] = value;
  }

  bool changed_ = false;
};

// Builds the k orderings position by position, interleaving slots; placing x
// puts it before every unplaced variable of its slot. Slots are kept in
// non-decreasing lexicographic order so each multiset is visited once.
class BranchAndBound : SlotOrders {
 public:
  BranchAndBound(const Instance& inst, const SolverConfig& cfg, bool enumerate, SearchLimit& limit)
      : SlotOrders(inst, cfg), enumerate_(enumerate), limit_(limit) {
    const auto uk = static_cast<std::size_t>(k_);
    placed_.assign(uk, 0);
    seq_.assign(uk, {});
    tie_.assign(uk, 1);
    occ_.assign(static_cast<std::size_t>(m_), 0);
    for (const auto& c : inst.constraints)
      for (auto v : c.v) ++occ_[static_cast<std::size_t>(v)];
  }

  void run() {
    if (root_ok_) descend(0);
  }

  std::vector<Solution>& found() { return found_; }

 private:
  bool descend(int step) {
    if (step == m_ * k_) {
      Solution sol;
      for (const auto& s : seq_) sol.orderings.emplace_back(s);
      sol.canonicalize();
      found_.push_back(std::move(sol));
      return !enumerate_;
    }
    const int t = step % k_;
    const auto ut = static_cast<std::size_t>(t);
    const std::size_t p = seq_[ut].size();
    const bool low = t > 0 && tie_[ut];
    const VarId lo = low ? seq_[ut - 1][p] : 0;
    const std::uint64_t placed = placed_[ut];

    std::vector<std::pair<int, VarId>> cand;
    for (std::uint64_t r = ~placed & full(); r; r &= r - 1) {
      const VarId x = std::countr_zero(r);
      if (x < lo || (pred_[ut][static_cast<std::size_t>(x)] & ~placed)) continue;
      cand.push_back({-occ_[static_cast<std::size_t>(x)], x});
    }
    std::sort(cand.begin(), cand.end());

    for (auto [neg, x] : cand) {
      if (!limit_.tick()) return true;
      const std::size_t mark = trail_.size();
      bool ok = true;
      for (std::uint64_t r = ~(placed | bit(x)) & full(); r && ok; r &= r - 1) ok = add(t, x, std::countr_zero(r));
      ok = ok && propagate();
      if (ok) {
        seq_[ut].push_back(x);
        placed_[ut] |= bit(x);
        const char saved = tie_[ut];
        if (low) tie_[ut] = static_cast<char>(x == lo);
        const bool done = descend(step + 1);
        tie_[ut] = saved;
        placed_[ut] &= ~bit(x);
        seq_[ut].pop_back();
        unwind(mark);
        if (done) return true;
      } else {
        unwind(mark);
      }
    }
    return false;
  }

  bool enumerate_;
  SearchLimit& limit_;
  std::vector<std::uint64_t> placed_;
  std::vector<int> occ_;
  std::vector<std::vector<VarId>> seq_;
  std::vector<char> tie_;
  std::vector<Solution> found_;
};

// Decision search: branches on the slot and word that satisfy one constraint,
// choosing the constraint with the fewest live options, until every
// constraint is fixed in some slot; any linear extension then works. Options
// in a slot whose relation equals the previous slot's are skipped.
class WordSearch : SlotOrders {
 public:
  WordSearch(const Instance& inst, const SolverConfig& cfg, bool, SearchLimit& limit)
      : SlotOrders(inst, cfg), limit_(limit) {}

  void run() {
    if (root_ok_) descend();
  }

  std::vector<Solution>& found() { return found_; }

 private:
  bool same_as_previous(int t) const {
    return t > 0 && succ_[static_cast<std::size_t>(t)] == succ_[static_cast<std::size_t>(t) - 1];
  }

  bool descend() {
    int best = -1;
    int best_count = 0;
    std::vector<int> best_words;
    std::vector<int> words(static_cast<std::size_t>(k_));
    for (std::size_t ci = 0; ci < inst_.constraints.size(); ++ci) {
      const auto& c = inst_.constraints[ci];
      int count = 0;
      bool done = false;
      for (int t = 0; t < k_ && !done; ++t) {
        const int w = live_words(t, c);
        words[static_cast<std::size_t>(t)] = w;
        if (w && decided(t, c)) done = true;
        count += std::popcount(static_cast<unsigned>(w));
      }
      if (done) continue;
      // fewest options per unit of conflict weight
      if (best < 0 || count * weight_[static_cast<std::size_t>(best)] < best_count * weight_[ci]) {
        best = static_cast<int>(ci);
        best_count = count;
        best_words = words;
      }
    }
    if (best < 0) {
      found_.push_back(extension());
      return true;
    }
    const auto& c = inst_.constraints[static_cast<std::size_t>(best)];
    for (int t = 0; t < k_; ++t) {
      if (same_as_previous(t)) continue;
      for (int w = 0; w < 6; ++w) {
        if (!((best_words[static_cast<std::size_t>(t)] >> w) & 1)) continue;
        if (!limit_.tick()) return true;
        const std::size_t mark = trail_.size();
        const bool ok = add_word(t, c, w) && propagate();
        const bool done = ok && descend();
        unwind(mark);
        if (done) return true;
      }
    }
    return false;
  }

  Solution extension() const {
    Solution sol;
    for (int t = 0; t < k_; ++t) {
      const auto& pred = pred_[static_cast<std::size_t>(t)];
      std::vector<VarId> seq;
      std::uint64_t placed = 0;
      while (static_cast<int>(seq.size()) < m_)
        for (int x = 0; x < m_; ++x)
          if (!(placed & bit(x)) && !(pred[static_cast<std::size_t>(x)] & ~placed)) {
            seq.push_back(x);
            placed |= bit(x);
            break;
          }
      sol.orderings.emplace_back(seq);
    }
    sol.canonicalize();
    return sol;
  }

  SearchLimit& limit_;
  std::vector<Solution> found_;
};

// Scans all multisets of k orderings using per-ordering satisfaction bitsets.
class Exhaustive {
 public:
  Exhaustive(const Instance& inst, const SolverConfig& cfg, bool enumerate, SearchLimit& limit)
      : inst_(inst), k_(inst.k), enumerate_(enumerate), threads_(cfg.threads), limit_(limit) {
    const auto m = inst.num_vars();
    if (m > 10) throw std::invalid_argument("exhaustive mode supports at most 10 variables");
    auto [u, w] = reversal_pair(inst, cfg);
    const auto nc = inst.constraints.size();
    words_ = (nc + 63) / 64;
    full_.assign(words_, ~0ULL);
    if (nc % 64) full_.back() = (1ULL << (nc % 64)) - 1;
    if (nc == 0) full_.assign(words_, 0);
    std::vector<VarId> s(m);
    std::iota(s.begin(), s.end(), 0);
    do {
      LinearOrdering alpha(s);
      if (u >= 0 && alpha.position(u) > alpha.position(w)) continue;
      std::vector<std::uint64_t> bits(words_, 0);
      for (std::size_t ci = 0; ci < nc; ++ci)
        if (satisfies(inst.pi, alpha, inst.constraints[ci])) bits[ci / 64] |= 1ULL << (ci % 64);
      perms_.push_back(std::move(alpha));
      sat_.insert(sat_.end(), bits.begin(), bits.end());
    } while (std::next_permutation(s.begin(), s.end()));
  }

  void run() {
    const std::size_t np = perms_.size();
    std::vector<std::vector<std::vector<std::size_t>>> per_first(np);
    parallel_for(np, threads_, [&](std::size_t i) {
      if (limit_.stop || limit_.exceeded) return;
      std::vector<std::size_t> chosen{i};
      std::vector<std::uint64_t> acc(sat_.begin() + static_cast<std::ptrdiff_t>(i * words_),
                                     sat_.begin() + static_cast<std::ptrdiff_t>((i + 1) * words_));
      scan(chosen, acc, per_first[i]);
    });
    for (auto& bucket : per_first)
      for (auto& idx : bucket) {
        Solution sol;
        for (auto i : idx) sol.orderings.push_back(perms_[i]);
        found_.push_back(std::move(sol));
        if (!enumerate_) return;
      }
  }

  std::vector<Solution>& found() { return found_; }

 private:
  bool covers(const std::vector<std::uint64_t>& acc) const {
    for (std::size_t w = 0; w < words_; ++w)
      if (acc[w] != full_[w]) return false;
    return true;
  }

  void scan(std::vector<std::size_t>& chosen, std::vector<std::uint64_t>& acc,
            std::vector<std::vector<std::size_t>>& out) {
    if (!limit_.tick()) return;
    if (chosen.size() == static_cast<std::size_t>(k_)) {
      if (covers(acc)) {
        out.push_back(chosen);
        if (!enumerate_) limit_.stop = true;
      }
      return;
    }
    for (std::size_t j = chosen.back(); j < perms_.size(); ++j) {
      if (limit_.stop || limit_.exceeded) return;
      std::vector<std::uint64_t> next(acc);
      for (std::size_t w = 0; w < words_; ++w) next[w] |= sat_[j * words_ + w];
      chosen.push_back(j);
      scan(chosen, next, out);
      chosen.pop_back();
    }
  }

  const Instance& inst_;
  int k_;
  bool enumerate_;
  unsigned threads_;
  SearchLimit& limit_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> full_;
  std::vector<LinearOrdering> perms_;
  std::vector<std::uint64_t> sat_;
  std::vector<Solution> found_;
};

template <class Engine>
std::vector<Solution> run_engine(const Instance& inst, const SolverConfig& cfg, bool enumerate, SearchLimit& limit) {
  Engine engine(inst, cfg, enumerate, limit);
  engine.run();
  return std::move(engine.found());
}

bool every_pattern_or_reverse(const PiFamily& pi) {
  for (const auto& p : kS3)
    if (!pi.contains(p) && !pi.contains({p[2], p[1], p[0]})) return false;
  return true;
}

}  // namespace

SolveResult solve(const Instance& inst, const SolverConfig& cfg) {
  inst.validate();
  if (cfg.mode == SearchMode::branch_and_bound && inst.k >= 2 && every_pattern_or_reverse(inst.pi)) {
    // an ordering and its reversal realise p or its reverse on every triple
    const auto alpha = identity_ordering(inst.num_vars());
    SolveResult r;
    r.answer = Answer::yes;
    r.solution = Solution{{alpha, reversal(alpha)}};
    r.solution->canonicalize();
    return r;
  }
  SearchLimit limit;
  limit.limit = cfg.node_limit;
  SolverConfig c = cfg;
  c.enumerate_all = false;
  auto found = c.mode == SearchMode::exhaustive ? run_engine<Exhaustive>(inst, c, false, limit)
                                                 : run_engine<WordSearch>(inst, c, false, limit);
  SolveResult r;
  r.nodes = limit.nodes;
  if (!found.empty()) {
    r.answer = Answer::yes;
    found.front().canonicalize();
    r.solution = std::move(found.front());
  } else {
    r.answer = limit.exceeded ? Answer::unknown : Answer::no;
  }
  return r;
}

EnumerateResult enumerate_solutions(const Instance& inst, SolverConfig cfg) {
  inst.validate();
  cfg.enumerate_all = true;
  cfg.symmetry_breaking = false;
  SearchLimit limit;
  limit.limit = cfg.node_limit;
  auto found = cfg.mode == SearchMode::exhaustive ? run_engine<Exhaustive>(inst, cfg, true, limit)
                                                   : run_engine<BranchAndBound>(inst, cfg, true, limit);
  if (limit.exceeded) throw BudgetExceeded("enumeration exceeded the node budget");
  for (auto& s : found) s.canonicalize();
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return {std::move(found), limit.nodes};
}

}  // namespace ternperm
