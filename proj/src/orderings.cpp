#include "ternperm/orderings.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace ternperm {

int perm_index(const Perm3& p) {
  for (int i = 0; i < 6; ++i)
    if (kS3[static_cast<std::size_t>(i)] == p) return i;
  throw std::invalid_argument("not a permutation of 123");
}

std::string perm_word(const Perm3& p) {
  return {static_cast<char>('0' + p[0]), static_cast<char>('0' + p[1]), static_cast<char>('0' + p[2])};
}

namespace {

constexpr std::uint8_t bit(int word) {
  switch (word) {
    case 123: return 1U << 0;
    case 132: return 1U << 1;
    case 213: return 1U << 2;
    case 231: return 1U << 3;
    case 312: return 1U << 4;
    case 321: return 1U << 5;
    default: return 0;
  }
}

constexpr std::uint8_t kAll = 0x3F;

constexpr std::array<std::uint8_t, 11> kFamilies = {
    bit(123),                                 // 0 linear ordering
    bit(123) | bit(132),                      // 1
    bit(123) | bit(213) | bit(231),           // 2
    bit(123) | bit(231) | bit(312) | bit(321),  // 3
    bit(123) | bit(231),                      // 4
    bit(123) | bit(321),                      // 5 betweenness
    bit(123) | bit(132) | bit(231),           // 6
    bit(123) | bit(231) | bit(312),           // 7 circular ordering
    kAll & ~(bit(123) | bit(231)),            // 8
    kAll & ~(bit(123) | bit(321)),            // 9 non-betweenness
    kAll & ~bit(123),                         // 10
};

}  // namespace

PiFamily PiFamily::of(int index) {
  if (index < 0 || index > 10) throw std::invalid_argument("Pi family index out of range: " + std::to_string(index));
  return PiFamily(index, kFamilies[static_cast<std::size_t>(index)]);
}

std::vector<Perm3> PiFamily::perms() const {
  std::vector<Perm3> out;
  for (int i = 0; i < 6; ++i)
    if ((mask_ >> i) & 1U) out.push_back(kS3[static_cast<std::size_t>(i)]);
  return out;
}

std::size_t PiFamily::size() const { return static_cast<std::size_t>(__builtin_popcount(mask_)); }

bool PiFamily::reversal_closed() const {
  for (const auto& p : perms()) {
    Perm3 r{p[2], p[1], p[0]};
    if (!contains(r)) return false;
  }
  return true;
}

LinearOrdering::LinearOrdering(std::vector<VarId> seq) : seq_(std::move(seq)) {
  VarId hi = -1;
  for (VarId v : seq_) {
    if (v < 0) throw std::invalid_argument("negative variable id in ordering");
    hi = std::max(hi, v);
  }
  pos_.assign(static_cast<std::size_t>(hi + 1), -1);
  for (std::size_t i = 0; i < seq_.size(); ++i) {
    auto& slot = pos_[static_cast<std::size_t>(seq_[i])];
    if (slot >= 0) throw std::invalid_argument("variable repeated in ordering");
    slot = static_cast<int>(i);
  }
}

int LinearOrdering::position(VarId v) const {
  if (!contains(v)) throw std::invalid_argument("variable " + std::to_string(v) + " not in ordering");
  return pos_[static_cast<std::size_t>(v)];
}

std::vector<VarId> LinearOrdering::domain() const {
  std::vector<VarId> d = seq_;
  std::sort(d.begin(), d.end());
  return d;
}

Perm3 pattern(const LinearOrdering& alpha, const Constraint& c) {
  std::array<std::pair<int, std::uint8_t>, 3> keyed{};
  for (std::uint8_t i = 0; i < 3; ++i) keyed[i] = {alpha.position(c.v[i]), static_cast<std::uint8_t>(i + 1)};
  std::sort(keyed.begin(), keyed.end());
  return {keyed[0].second, keyed[1].second, keyed[2].second};
}

bool satisfies(const PiFamily& pi, const LinearOrdering& alpha, const Constraint& c) {
  return pi.contains(pattern(alpha, c));
}

LinearOrdering reversal(const LinearOrdering& alpha) {
  std::vector<VarId> s(alpha.seq().rbegin(), alpha.seq().rend());
  return LinearOrdering(std::move(s));
}

LinearOrdering restrict(const LinearOrdering& alpha, std::span<const VarId> keep) {
  std::vector<bool> wanted;
  for (VarId v : keep) {
    if (!alpha.contains(v)) throw std::invalid_argument("restriction set is not a subset of the ordering's domain");
    if (static_cast<std::size_t>(v) >= wanted.size()) wanted.resize(static_cast<std::size_t>(v) + 1, false);
    wanted[static_cast<std::size_t>(v)] = true;
  }
  std::vector<VarId> s;
  for (VarId v : alpha.seq())
    if (static_cast<std::size_t>(v) < wanted.size() && wanted[static_cast<std::size_t>(v)]) s.push_back(v);
  return LinearOrdering(std::move(s));
}

LinearOrdering concat(const LinearOrdering& alpha, const LinearOrdering& beta) {
  for (VarId v : beta.seq())
    if (alpha.contains(v)) throw std::invalid_argument("concatenation of orderings with overlapping domains");
  std::vector<VarId> s = alpha.seq();
  s.insert(s.end(), beta.seq().begin(), beta.seq().end());
  return LinearOrdering(std::move(s));
}

std::vector<Constraint> implied_constraints(const LinearOrdering& alpha, const PiFamily& pi) {
  std::vector<Constraint> out;
  const auto& s = alpha.seq();
  const std::size_t m = s.size();
  // Enumerate position triples i<j<l; each realised word w puts s[i],s[j],s[l]
  // at constraint slots w^-1.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t l = j + 1; l < m; ++l) {
        const std::array<VarId, 3> ascending{s[i], s[j], s[l]};
        for (const auto& w : pi.perms()) {
          Constraint c{};
          for (std::size_t r = 0; r < 3; ++r) c.v[static_cast<std::size_t>(w[r] - 1)] = ascending[r];
          out.push_back(c);
        }
      }
  std::sort(out.begin(), out.end());
  return out;
}

void Instance::validate() const {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  const auto n = static_cast<VarId>(vars.size());
  for (const auto& c : constraints) {
    for (VarId v : c.v)
      if (v < 0 || v >= n) throw std::invalid_argument("constraint references an undeclared variable");
    if (c.v[0] == c.v[1] || c.v[0] == c.v[2] || c.v[1] == c.v[2])
      throw std::invalid_argument("constraint variables must be pairwise distinct");
  }
}

void Instance::normalize() {
  std::sort(constraints.begin(), constraints.end());
  constraints.erase(std::unique(constraints.begin(), constraints.end()), constraints.end());
}

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

int parse_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected an integer, got '" + s + "'");
  }
}

}  // namespace

Instance parse_instance(std::string_view text) {
  Instance inst;
  bool have_pi = false, have_k = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  std::vector<std::pair<int, std::array<std::string, 3>>> pending;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    auto tok = split_ws(raw);
    if (tok.empty()) continue;
    const auto& kw = tok[0];
    if (kw == "pi") {
      if (tok.size() != 2) throw ParseError(line, "expected 'pi <index>'");
      int i = parse_int(tok[1], line);
      if (i < 0 || i > 10) throw ParseError(line, "pi index must be in 0..10");
      inst.pi = PiFamily::of(i);
      have_pi = true;
    } else if (kw == "k") {
      if (tok.size() != 2) throw ParseError(line, "expected 'k <budget>'");
      inst.k = parse_int(tok[1], line);
      if (inst.k < 1) throw ParseError(line, "k must be at least 1");
      have_k = true;
    } else if (kw == "vars") {
      for (std::size_t i = 1; i < tok.size(); ++i) {
        if (inst.vars.contains(tok[i])) throw ParseError(line, "duplicate variable '" + tok[i] + "'");
        inst.vars.intern(tok[i]);
      }
    } else if (kw == "c") {
      if (tok.size() != 4) throw ParseError(line, "expected 'c <a> <b> <c>'");
      pending.push_back({line, {tok[1], tok[2], tok[3]}});
    } else {
      throw ParseError(line, "unknown directive '" + kw + "'");
    }
  }
  if (!have_pi) throw ParseError(line, "missing 'pi' line");
  if (!have_k) throw ParseError(line, "missing 'k' line");
  for (const auto& [ln, names] : pending) {
    Constraint c{};
    for (std::size_t i = 0; i < 3; ++i) {
      VarId id = inst.vars.find(names[i]);
      if (id < 0) throw ParseError(ln, "undeclared variable '" + names[i] + "'");
      c.v[i] = id;
    }
    if (c.v[0] == c.v[1] || c.v[0] == c.v[2] || c.v[1] == c.v[2])
      throw ParseError(ln, "constraint variables must be distinct");
    inst.constraints.push_back(c);
  }
  inst.normalize();
  return inst;
}

std::string format_instance(const Instance& inst) {
  std::ostringstream out;
  out << "pi " << inst.pi.index() << "\n";
  out << "k " << inst.k << "\n";
  out << "vars";
  for (const auto& n : inst.vars.names()) out << ' ' << n;
  out << "\n";
  for (const auto& c : inst.constraints)
    out << "c " << inst.vars.name(c.v[0]) << ' ' << inst.vars.name(c.v[1]) << ' ' << inst.vars.name(c.v[2]) << "\n";
  return out.str();
}

std::string format_ordering(const LinearOrdering& alpha, const Interner& names) {
  std::string s = "(";
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) s += ',';
    s += names.name(alpha.at(i));
  }
  return s + ")";
}

LinearOrdering parse_ordering(std::string_view text, const Interner& names) {
  std::string t(text);
  for (char& ch : t)
    if (ch == '(' || ch == ')' || ch == ',') ch = ' ';
  std::vector<VarId> s;
  for (const auto& tok : split_ws(t)) s.push_back(names.at(tok));
  return LinearOrdering(std::move(s));
}

LinearOrdering identity_ordering(std::size_t m) {
  std::vector<VarId> s(m);
  std::iota(s.begin(), s.end(), 0);
  return LinearOrdering(std::move(s));
}

}  // namespace ternperm
