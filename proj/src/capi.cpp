#include "ternperm/ternperm.h"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "json.hpp"
#include "ternperm/extremal.hpp"
#include "ternperm/gadgets.hpp"
#include "ternperm/reductions.hpp"

using json = nlohmann::ordered_json;
using namespace ternperm;

struct tp_report {
  tp_answer answer = TP_UNKNOWN;
  std::string json;
  std::optional<std::string> artifact;
  std::optional<std::string> manifest;
};

struct tp_document {
  tp_kind kind = TP_CSP;
  std::variant<Instance, TripletSet, Digraph> value;
  std::string text;
};

namespace {

thread_local std::string last_error;

tp_status guard(const std::function<void()>& body) {
  try {
    body();
    last_error.clear();
    return TP_OK;
  } catch (const ParseError& e) {
    last_error = e.what();
    return TP_ERR_PARSE;
  } catch (const BudgetExceeded& e) {
    last_error = e.what();
    return TP_ERR_BUDGET;
  } catch (const std::invalid_argument& e) {
    last_error = e.what();
    return TP_ERR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    last_error = e.what();
    return TP_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TP_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return TP_ERR_INTERNAL;
  }
}

tp_options resolve(const tp_options* opts) {
  tp_options o;
  tp_options_init(&o);
  return opts ? *opts : o;
}

std::optional<std::uint64_t> limit(const tp_options& o) {
  if (o.node_limit == 0) return std::nullopt;
  return o.node_limit;
}

tp_answer to_c(Answer a) {
  switch (a) {
    case Answer::yes:
      return TP_YES;
    case Answer::no:
      return TP_NO;
    default:
      return TP_UNKNOWN;
  }
}

std::string digest(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

tp_report* finish(const char* command, json options, std::string_view input, json result, json stats,
                  const Timer& timer, const tp_options& o, tp_answer answer) {
  json j;
  j["schema"] = 1;
  j["command"] = command;
  j["options"] = std::move(options);
  j["input_digest"] = digest(input);
  j["result"] = std::move(result);
  j["stats"] = std::move(stats);
  if (!o.deterministic) j["timings"] = {{"wall_ms", timer.ms()}};
  auto* r = new tp_report;
  r->answer = answer;
  r->json = j.dump(2) + "\n";
  return r;
}

json orderings_json(const Solution& s, const Interner& names) {
  json a = json::array();
  for (const auto& o : s.orderings) a.push_back(format_ordering(o, names));
  return a;
}

json newick_list(const std::vector<RootedTree>& trees, const Interner& names) {
  json a = json::array();
  for (const auto& t : trees) a.push_back(to_newick(t, names));
  return a;
}

json manifest_json(const Manifest& m) {
  json sizes = json::object();
  for (const auto& [k, v] : m.sizes) sizes[k] = v;
  json renamed = json::object();
  for (const auto& [k, v] : m.renamed) renamed[k] = v;
  return {{"reduction", m.reduction},
          {"source_problem", m.source_problem},
          {"target_problem", m.target_problem},
          {"sizes", sizes},
          {"renamed", renamed}};
}

const char* symmetry_name(int s) {
  switch (s) {
    case TP_SYM_NONE:
      return "none";
    case TP_SYM_REVERSAL:
      return "reversal";
    case TP_SYM_CHERRY_SWAP:
      return "cherry-swap";
    default:
      return "default";
  }
}

SymmetrySpec symmetry_of(int s, const SymmetrySpec& fallback) {
  switch (s) {
    case TP_SYM_NONE:
      return SymmetrySpec::none();
    case TP_SYM_REVERSAL:
      return SymmetrySpec::reversal();
    case TP_SYM_CHERRY_SWAP:
      return SymmetrySpec::cherry_swap();
    case TP_SYM_DEFAULT:
      return fallback;
    default:
      throw std::invalid_argument("unknown symmetry " + std::to_string(s));
  }
}

Interner digit_names(int from, int to) {
  Interner names;
  for (int i = from; i <= to; ++i) names.intern(std::to_string(i));
  return names;
}

struct GadgetSpec {
  std::vector<LinearOrdering> generators;
  PiFamily pi = PiFamily::of(0);
  SymmetrySpec symmetry;
  Interner names;
};

// "pi<i>:<ordering>/<ordering>/..." with labels 1..m.
GadgetSpec parse_gadget_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (text.substr(0, 2) != "pi" || colon == std::string_view::npos)
    throw std::invalid_argument("gadget spec must look like pi<i>:<ordering>/<ordering>");
  GadgetSpec g;
  g.pi = pi_family(std::stoi(std::string(text.substr(2, colon - 2))));
  g.symmetry = SymmetrySpec::none();
  std::vector<std::string> parts;
  std::stringstream ss{std::string(text.substr(colon + 1))};
  for (std::string part; std::getline(ss, part, '/');) parts.push_back(part);
  if (parts.empty()) throw std::invalid_argument("gadget spec has no orderings");
  std::stringstream first(parts[0]);
  int m = 0;
  for (std::string tok; first >> tok;) ++m;
  g.names = digit_names(1, m);
  for (const auto& p : parts) g.generators.push_back(parse_ordering(p, g.names));
  return g;
}

std::string_view view(const char* text, size_t len) {
  if (text == nullptr && len > 0) throw std::invalid_argument("null text");
  return {text == nullptr ? "" : text, len};
}

bool same_digraph(const Digraph& a, const Digraph& b) { return a.names() == b.names() && a.arcs() == b.arcs(); }

bool same_instance(Instance a, Instance b) {
  a.normalize();
  b.normalize();
  return a.vars == b.vars && a.constraints == b.constraints && a.pi == b.pi && a.k == b.k;
}

bool same_triplets(TripletSet a, TripletSet b) {
  a.normalize();
  b.normalize();
  return a.labels == b.labels && a.triplets == b.triplets;
}

}  // namespace

extern "C" {

void tp_options_init(tp_options* opts) {
  if (opts == nullptr) return;
  *opts = tp_options{};
  opts->threads = 0;
  opts->symmetry = TP_SYM_DEFAULT;
}

const char* tp_version(void) { return "1.0.0"; }

const char* tp_last_error(void) { return last_error.c_str(); }

const char* tp_status_name(tp_status s) {
  switch (s) {
    case TP_OK:
      return "ok";
    case TP_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case TP_ERR_PARSE:
      return "parse error";
    case TP_ERR_BUDGET:
      return "budget exceeded";
    case TP_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

tp_status tp_document_parse(tp_kind kind, const char* text, size_t len, tp_document** out) {
  return guard([&] {
    if (out == nullptr) throw std::invalid_argument("null output handle");
    *out = nullptr;
    const auto src = view(text, len);
    auto* d = new tp_document;
    d->kind = kind;
    try {
      switch (kind) {
        case TP_CSP: {
          auto inst = parse_instance(src);
          d->text = format_instance(inst);
          d->value = std::move(inst);
          break;
        }
        case TP_TRIPLETS: {
          auto r = parse_triplets(src);
          d->text = format_triplets(r);
          d->value = std::move(r);
          break;
        }
        case TP_DIGRAPH: {
          auto g = parse_dot(src);
          d->text = to_dot(g);
          d->value = std::move(g);
          break;
        }
        default:
          throw std::invalid_argument("unknown document kind");
      }
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
  });
}

const char* tp_document_text(const tp_document* doc) { return doc ? doc->text.c_str() : nullptr; }

tp_kind tp_document_kind(const tp_document* doc) { return doc ? doc->kind : TP_CSP; }

int tp_document_equal(const tp_document* a, const tp_document* b) {
  if (a == nullptr || b == nullptr || a->kind != b->kind) return 0;
  switch (a->kind) {
    case TP_CSP:
      return same_instance(std::get<Instance>(a->value), std::get<Instance>(b->value)) ? 1 : 0;
    case TP_TRIPLETS:
      return same_triplets(std::get<TripletSet>(a->value), std::get<TripletSet>(b->value)) ? 1 : 0;
    case TP_DIGRAPH:
      return same_digraph(std::get<Digraph>(a->value), std::get<Digraph>(b->value)) ? 1 : 0;
  }
  return 0;
}

void tp_document_free(tp_document* doc) { delete doc; }

tp_status tp_solve(const char* csp_text, size_t len, const tp_options* opts, tp_report** out) {
  return guard([&] {
    if (out == nullptr) throw std::invalid_argument("null output handle");
    *out = nullptr;
    const Timer timer;
    const auto o = resolve(opts);
    const auto text = view(csp_text, len);
    const auto inst = parse_instance(text);
    inst.validate();
    SolverConfig cfg;
    cfg.mode = o.exhaustive ? SearchMode::exhaustive : SearchMode::branch_and_bound;
    cfg.symmetry_breaking = o.symmetry_breaking != 0;
    cfg.node_limit = limit(o);
    cfg.threads = o.threads;
    json options = {{"mode", o.exhaustive ? "exhaustive" : "branch_and_bound"},
                    {"enumerate", o.enumerate != 0},
                    {"symmetry_breaking", o.symmetry_breaking != 0},
                    {"node_limit", o.node_limit}};
    json result = {{"pi", inst.pi.index()},
                   {"k", inst.k},
                   {"vars", inst.num_vars()},
                   {"constraints", inst.constraints.size()}};
    tp_answer answer = TP_UNKNOWN;
    std::uint64_t nodes = 0;
    if (o.enumerate) {
      cfg.enumerate_all = true;
      try {
        auto res = enumerate_solutions(inst, cfg);
        nodes = res.nodes;
        json list = json::array();
        for (const auto& s : res.solutions) list.push_back(orderings_json(s, inst.vars));
        answer = res.solutions.empty() ? TP_NO : TP_YES;
        result["answer"] = answer == TP_YES ? "yes" : "no";
        result["count"] = res.solutions.size();
        result["solutions"] = std::move(list);
      } catch (const BudgetExceeded&) {
        result["answer"] = "unknown";
        result["count"] = nullptr;
        result["solutions"] = nullptr;
      }
    } else {
      auto res = solve(inst, cfg);
      nodes = res.nodes;
      answer = to_c(res.answer);
      result["answer"] = to_string(res.answer);
      if (res.solution) {
        if (!check_solution(inst, *res.solution)) throw std::logic_error("solver returned an invalid solution");
        result["solution"] = orderings_json(*res.solution, inst.vars);
      } else {
        result["solution"] = nullptr;
      }
    }
    *out = finish("solve", std::move(options), text, std::move(result), {{"nodes", nodes}}, timer, o, answer);
  });
}

tp_status tp_reduce(const char* name, const char* text, size_t len, const tp_options* opts, tp_report** out) {
  return guard([&] {
    if (out == nullptr || name == nullptr) throw std::invalid_argument("null argument");
    *out = nullptr;
    const Timer timer;
    const auto o = resolve(opts);
    const std::string red(name);
    const auto src = view(text, len);
    const auto in_kind = reduction_input_kind(red);
    Manifest manifest;
    std::string artifact;
    if (in_kind == "csp") {
      static const std::map<std::string, CspReduction (*)(const Instance&)> csp = {
          {"1pi5-to-2pi0", reduce_1pi5_to_2pi0}, {"2pi0-to-2pi1", reduce_2pi0_to_2pi1},
          {"1pi9-to-2pi4", reduce_1pi9_to_2pi4}, {"1pi5-to-2pi5", reduce_1pi5_to_2pi5},
          {"2pi1-to-2pi6", reduce_2pi1_to_2pi6}, {"1pi5-to-2pi9", reduce_1pi5_to_2pi9}};
      auto r = csp.at(red)(parse_instance(src));
      manifest = r.manifest;
      artifact = format_instance(r.target);
    } else if (red == "2cat-to-3cat" || red == "2cat-to-3tree") {
      auto r = (red == "2cat-to-3cat" ? reduce_2cat_to_3cat : reduce_2cat_to_3tree)(parse_triplets(src));
      manifest = r.manifest;
      artifact = format_triplets(r.target);
    } else if (red == "dichromatic-to-outdeg3") {
      auto r = reduce_dichromatic_to_outdeg3(parse_dot(src));
      manifest = r.manifest;
      artifact = to_dot(r.target);
    } else {
      auto r = reduce_outdeg3_to_2cat(parse_dot(src));
      manifest = r.manifest;
      artifact = format_triplets(r.target);
    }
    json m = manifest_json(manifest);
    json result = m;
    result["output_kind"] = reduction_output_kind(red);
    result["output_digest"] = digest(artifact);
    auto* r = finish("reduce", {{"reduction", red}}, src, std::move(result), json::object(), timer, o, TP_YES);
    r->artifact = std::move(artifact);
    r->manifest = m.dump(2) + "\n";
    *out = r;
  });
}

tp_status tp_gadget_verify(const char* name, const tp_options* opts, tp_report** out) {
  return guard([&] {
    if (out == nullptr || name == nullptr) throw std::invalid_argument("null argument");
    *out = nullptr;
    const Timer timer;
    const auto o = resolve(opts);
    const std::string g(name);
    json options = {{"gadget", g}, {"symmetry", symmetry_name(o.symmetry)}};
    json result;
    json stats;
    bool unique = false;
    if (g == "tree-triple") {
      const auto derived = derive_caterpillar_triple(o.threads);
      const auto rep = verify_tree_uniqueness(derived.trees, o.threads);
      const auto names = digit_names(0, 5);
      json orders = json::array();
      for (const auto& ord : derived.orderings) orders.push_back(format_ordering(ord, names));
      unique = rep.unique;
      result = {{"gadget", g},
                {"trees", newick_list({rep.triple.begin(), rep.triple.end()}, names)},
                {"orderings", std::move(orders)},
                {"cover_size", rep.cover.size()},
                {"trees_per_slot", rep.trees_per_slot},
                {"covering_multisets", rep.found_count},
                {"non_caterpillar_cover", rep.non_caterpillar_cover},
                {"unique", rep.unique}};
      stats = {{"candidates_checked", derived.candidates_checked}};
    } else {
      GadgetSpec spec;
      if (g == "pi5" || g == "pi6" || g == "pi9") {
        spec.generators = builtin_generators(g);
        spec.pi = builtin_family(g);
        spec.symmetry = builtin_symmetry(g);
        spec.names = digit_names(1, static_cast<int>(spec.generators.front().size()));
      } else {
        spec = parse_gadget_spec(g);
      }
      const auto sym = symmetry_of(o.symmetry, spec.symmetry);
      SolverConfig cfg;
      cfg.threads = o.threads;
      cfg.node_limit = limit(o);
      const auto rep = verify_uniqueness(spec.generators, spec.pi, static_cast<int>(spec.generators.size()), sym, cfg);
      unique = rep.unique;
      json found = json::array();
      for (const auto& s : rep.found) found.push_back(orderings_json(s, spec.names));
      json classes = json::array();
      for (const auto& s : rep.classes) classes.push_back(orderings_json(s, spec.names));
      result = {{"gadget", g},
                {"pi", spec.pi.index()},
                {"k", spec.generators.size()},
                {"constraints", rep.instance.constraints.size()},
                {"symmetry", rep.symmetry.description},
                {"expected", orderings_json(rep.expected.front(), spec.names)},
                {"multisets", rep.found.size()},
                {"ordered_tuples", rep.ordered_count},
                {"classes", rep.classes.size()},
                {"solutions", std::move(found)},
                {"class_representatives", std::move(classes)},
                {"unique", rep.unique}};
      stats = {{"nodes", rep.nodes}};
    }
    *out = finish("gadget-verify", std::move(options), g, std::move(result), std::move(stats), timer, o,
                  unique ? TP_YES : TP_NO);
  });
}

tp_status tp_tau(int n, const tp_options* opts, tp_report** out) {
  return guard([&] {
    if (out == nullptr) throw std::invalid_argument("null output handle");
    *out = nullptr;
    const Timer timer;
    const auto o = resolve(opts);
    const bool cat = o.caterpillar != 0;
    if (o.k < 0) throw std::invalid_argument("k must be positive");
    const auto names = full_triplet_set(n).labels;
    json options = {{"n", n}, {"caterpillar", cat}, {"k", o.k}, {"conflict_limit", o.node_limit}};
    json result = {{"n", n}, {"caterpillar", cat}};
    json stats;
    tp_answer answer = TP_UNKNOWN;
    int model_k = o.k;
    if (o.k > 0) {
      const auto d = tau_decision(n, o.k, cat, limit(o));
      answer = to_c(d.answer);
      result["k"] = o.k;
      result["decision"] = to_string(d.answer);
      result["trees"] = newick_list(d.trees, names);
      stats = {{"conflicts", d.conflicts}, {"decisions", d.decisions}};
    } else {
      const auto t = tau(n, cat, limit(o));
      answer = t.exact ? TP_YES : TP_UNKNOWN;
      result["value"] = t.value;
      result["exact"] = t.exact;
      result["trees"] = newick_list(t.trees, names);
      result["log_upper_bound"] = log_upper_bound(n);
      stats = {{"conflicts", t.conflicts}};
      model_k = t.value;
    }
    const std::string input = "tau " + std::to_string(n) + (cat ? " caterpillar" : "") + " k " + std::to_string(o.k);
    auto* r = finish("tau", std::move(options), input, std::move(result), std::move(stats), timer, o, answer);
    if (o.export_lp) r->artifact = export_lp(build_cover_model(n, model_k, cat));
    *out = r;
  });
}

tp_status tp_compat(const char* trip_text, size_t len, const tp_options* opts, tp_report** out) {
  return guard([&] {
    if (out == nullptr) throw std::invalid_argument("null output handle");
    *out = nullptr;
    const Timer timer;
    const auto o = resolve(opts);
    const auto text = view(trip_text, len);
    const auto r = parse_triplets(text);
    const int k = o.k > 0 ? o.k : 1;
    const bool cat = o.caterpillar != 0;
    const auto res = k_tree_compatible(r, k, cat, limit(o));
    json result = {{"k", k},
                   {"caterpillar", cat},
                   {"labels", r.labels.size()},
                   {"triplets", r.size()},
                   {"answer", to_string(res.answer)},
                   {"trees", newick_list(res.trees, r.labels)}};
    *out = finish("compat", {{"k", k}, {"caterpillar", cat}, {"node_limit", o.node_limit}}, text, std::move(result),
                  {{"nodes", res.nodes}}, timer, o, to_c(res.answer));
  });
}

tp_status tp_dicolor(const char* dot_text, size_t len, const tp_options* opts, tp_report** out) {
  return guard([&] {
    if (out == nullptr) throw std::invalid_argument("null output handle");
    *out = nullptr;
    const Timer timer;
    const auto o = resolve(opts);
    const auto text = view(dot_text, len);
    const auto d = parse_dot(text);
    const auto res = two_dicolorable(d, limit(o));
    json coloring = json::object();
    for (std::size_t v = 0; v < res.colors.size(); ++v) coloring[d.names().name(static_cast<int>(v))] = res.colors[v];
    json result = {{"vertices", d.size()},
                   {"arcs", d.num_arcs()},
                   {"answer", to_string(res.answer)},
                   {"coloring", res.answer == Answer::yes ? coloring : json(nullptr)}};
    *out = finish("dicolor", {{"node_limit", o.node_limit}}, text, std::move(result), {{"nodes", res.nodes}}, timer, o,
                  to_c(res.answer));
  });
}

tp_answer tp_report_answer(const tp_report* r) { return r ? r->answer : TP_UNKNOWN; }

const char* tp_report_json(const tp_report* r) { return r ? r->json.c_str() : nullptr; }

const char* tp_report_artifact(const tp_report* r) { return r && r->artifact ? r->artifact->c_str() : nullptr; }

const char* tp_report_manifest(const tp_report* r) { return r && r->manifest ? r->manifest->c_str() : nullptr; }

void tp_report_free(tp_report* r) { delete r; }

}  // extern "C"
