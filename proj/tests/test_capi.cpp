#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ternperm/ternperm.h"

using json = nlohmann::json;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(TERNPERM_DATA_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

tp_options det() {
  tp_options o;
  tp_options_init(&o);
  o.deterministic = 1;
  return o;
}

// Runs one command and returns its parsed report; the handle is freed.
template <class F>
json report(F&& call, tp_answer* answer = nullptr, std::string* artifact = nullptr, std::string* manifest = nullptr) {
  tp_report* r = nullptr;
  const tp_status s = call(&r);
  REQUIRE_MESSAGE(s == TP_OK, tp_last_error());
  REQUIRE(r != nullptr);
  if (answer) *answer = tp_report_answer(r);
  if (artifact && tp_report_artifact(r)) *artifact = tp_report_artifact(r);
  if (manifest && tp_report_manifest(r)) *manifest = tp_report_manifest(r);
  auto j = json::parse(tp_report_json(r));
  tp_report_free(r);
  return j;
}

json solve_text(const std::string& text, tp_options o, tp_answer* a = nullptr) {
  return report([&](tp_report** r) { return tp_solve(text.data(), text.size(), &o, r); }, a);
}

}  // namespace

TEST_CASE("options, version and status names") {
  tp_options o;
  std::memset(&o, 0xff, sizeof o);
  tp_options_init(&o);
  CHECK(o.deterministic == 0);
  CHECK(o.threads == 0);
  CHECK(o.node_limit == 0);
  CHECK(o.k == 0);
  CHECK(o.symmetry == TP_SYM_DEFAULT);
  CHECK(std::string(tp_version()) == "1.0.0");
  CHECK(std::string(tp_status_name(TP_ERR_PARSE)) == "parse error");
  CHECK(std::string(tp_status_name(TP_OK)) == "ok");
}

TEST_CASE("errors are codes plus a per-thread message") {
  tp_report* r = nullptr;
  const std::string bad = "pi 0\nk 1\nvars a b\nc a b q\n";
  CHECK(tp_solve(bad.data(), bad.size(), nullptr, &r) == TP_ERR_PARSE);
  CHECK(r == nullptr);
  CHECK(std::string(tp_last_error()).find("line 4") != std::string::npos);

  std::string other;
  std::thread([&] { other = tp_last_error(); }).join();
  CHECK(other.empty());

  CHECK(tp_solve(bad.data(), bad.size(), nullptr, nullptr) == TP_ERR_INVALID_ARGUMENT);
  CHECK(tp_reduce("no-such", bad.data(), bad.size(), nullptr, &r) == TP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(tp_last_error()).find("no-such") != std::string::npos);
  CHECK(tp_gadget_verify("pi4", nullptr, &r) == TP_ERR_INVALID_ARGUMENT);
  CHECK(tp_tau(2, nullptr, &r) == TP_ERR_INVALID_ARGUMENT);
  const std::string trip = "a b | c\n";
  CHECK(tp_reduce("1pi5-to-2pi0", trip.data(), trip.size(), nullptr, &r) == TP_ERR_PARSE);

  const std::string ok = "pi 0\nk 1\nvars a b c\nc a b c\n";
  CHECK(tp_solve(ok.data(), ok.size(), nullptr, &r) == TP_OK);
  CHECK(std::string(tp_last_error()).empty());
  tp_report_free(r);
  tp_report_free(nullptr);
  tp_document_free(nullptr);
  CHECK(tp_report_json(nullptr) == nullptr);
}

TEST_CASE("budget exhaustion is unknown") {
  auto o = det();
  o.node_limit = 2;
  o.enumerate = 1;
  tp_answer a = TP_YES;
  auto j = solve_text(slurp("gadget_pi6.csp"), o, &a);
  CHECK(a == TP_UNKNOWN);
  CHECK(j["result"]["answer"] == "unknown");
}

TEST_CASE("documents round trip") {
  struct Case {
    tp_kind kind;
    const char* file;
  };
  for (const auto& c : {Case{TP_CSP, "gadget_pi6.csp"}, Case{TP_CSP, "trivial_pi7.csp"},
                        Case{TP_TRIPLETS, "counterexample.trip"}, Case{TP_DIGRAPH, "twocycles.dot"}}) {
    const auto text = slurp(c.file);
    tp_document* a = nullptr;
    REQUIRE(tp_document_parse(c.kind, text.data(), text.size(), &a) == TP_OK);
    const std::string canon = tp_document_text(a);
    tp_document* b = nullptr;
    REQUIRE(tp_document_parse(c.kind, canon.data(), canon.size(), &b) == TP_OK);
    CHECK(tp_document_equal(a, b) == 1);
    CHECK(std::string(tp_document_text(b)) == canon);
    CHECK(tp_document_kind(b) == c.kind);
    tp_document_free(a);
    tp_document_free(b);
  }
  tp_document *x = nullptr, *y = nullptr;
  const std::string p = "a b | c\n", q = "a c | b\n";
  REQUIRE(tp_document_parse(TP_TRIPLETS, p.data(), p.size(), &x) == TP_OK);
  REQUIRE(tp_document_parse(TP_TRIPLETS, q.data(), q.size(), &y) == TP_OK);
  CHECK(tp_document_equal(x, y) == 0);
  CHECK(tp_document_equal(x, nullptr) == 0);
  tp_document_free(x);
  tp_document_free(y);
}

TEST_CASE("solve reports") {
  tp_answer a;
  auto o = det();
  o.enumerate = 1;
  auto j = solve_text(slurp("gadget_pi6.csp"), o, &a);
  CHECK(a == TP_YES);
  CHECK(j["result"]["count"] == 1);
  CHECK(j["result"]["solutions"] == json::parse(R"j([["(1,2,3,4)","(2,4,1,3)"]])j"));

  j = solve_text(slurp("trivial_pi7.csp"), det(), &a);
  CHECK(a == TP_YES);
  const auto sol = j["result"]["solution"];
  REQUIRE(sol.size() == 2);
  std::string rev = sol[1].get<std::string>();
  // (f,e,d,c,b,a) reversed back
  std::string fwd = sol[0].get<std::string>();
  std::string inner = rev.substr(1, rev.size() - 2), back;
  std::stringstream ss(inner);
  std::vector<std::string> parts;
  for (std::string s; std::getline(ss, s, ',');) parts.push_back(s);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) back += (back.empty() ? "" : ",") + *it;
  CHECK("(" + back + ")" == fwd);

  j = solve_text("pi 0\nk 1\nvars a b c\nc a b c\nc c b a\n", det(), &a);
  CHECK(a == TP_NO);
  CHECK(j["result"]["solution"].is_null());
}

TEST_CASE("report schema is pinned") {
  const auto j = solve_text("pi 0\nk 1\nvars a b c\nc a b c\n", det());
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"command", "input_digest", "options", "result", "schema", "stats"});
  CHECK(j["schema"] == 1);
  CHECK(j["command"] == "solve");
  CHECK(j["input_digest"].get<std::string>().size() == 16);
  CHECK(j["result"] == json::parse(R"j({"pi": 0, "k": 1, "vars": 3, "constraints": 1, "answer": "yes", "solution": ["(a,b,c)"]})j"));
  CHECK(j["options"] == json::parse(R"j({"mode": "branch_and_bound", "enumerate": false, "symmetry_breaking": false, "node_limit": 0})j"));
  CHECK(!j.contains("timings"));

  const std::string text = "pi 0\nk 1\nvars a b c\nc a b c\n";
  tp_report* r = nullptr;
  REQUIRE(tp_solve(text.data(), text.size(), nullptr, &r) == TP_OK);
  const std::string raw = tp_report_json(r);
  tp_report_free(r);
  CHECK(json::parse(raw).contains("timings"));
  // emitted key order, not just key set
  CHECK(raw.find("\"schema\"") < raw.find("\"command\""));
  CHECK(raw.find("\"command\"") < raw.find("\"options\""));
  CHECK(raw.find("\"input_digest\"") < raw.find("\"result\""));
  CHECK(raw.find("\"stats\"") < raw.find("\"timings\""));
}

TEST_CASE("deterministic reports are identical across runs and thread counts") {
  auto o = det();
  std::string first;
  for (unsigned threads : {1u, 2u, 3u}) {
    o.threads = threads;
    tp_report* r = nullptr;
    REQUIRE(tp_gadget_verify("tree-triple", &o, &r) == TP_OK);
    const std::string s = tp_report_json(r);
    tp_report_free(r);
    if (first.empty()) first = s;
    CHECK(s == first);
  }
  const auto text = slurp("gadget_pi6.csp");
  o.enumerate = 1;
  CHECK(solve_text(text, o).dump() == solve_text(text, o).dump());
}

TEST_CASE("reduce reports, artifacts and chaining") {
  const std::string src = "pi 5\nk 1\nvars a b c d\nc a b c\nc b c d\nc d a c\n";
  std::string artifact, manifest;
  tp_answer a;
  auto j = report([&](tp_report** r) { return tp_reduce("1pi5-to-2pi0", src.data(), src.size(), nullptr, r); }, &a,
                  &artifact, &manifest);
  CHECK(a == TP_YES);
  const auto m = json::parse(manifest);
  CHECK(m["sizes"]["target_constraints"] == 2 * m["sizes"]["source_constraints"].get<int>());
  CHECK(m["sizes"]["source_constraints"] == 3);
  CHECK(j["result"]["target_problem"] == "2-pi0");

  // 1pi5 -> 2pi0 -> 2pi1 -> 2pi6: fresh names never collide
  std::string cur = artifact;
  for (const char* step : {"2pi0-to-2pi1", "2pi1-to-2pi6"}) {
    std::string next, man;
    report([&](tp_report** r) { return tp_reduce(step, cur.data(), cur.size(), nullptr, r); }, nullptr, &next, &man);
    tp_document* d = nullptr;
    REQUIRE(tp_document_parse(TP_CSP, next.data(), next.size(), &d) == TP_OK);
    CHECK(std::string(tp_document_text(d)) == next);
    tp_document_free(d);
    const auto mm = json::parse(man);
    std::istringstream lines(next);
    std::string line;
    std::set<std::string> names;
    std::size_t declared = 0;
    while (std::getline(lines, line))
      if (line.rfind("vars ", 0) == 0) {
        std::istringstream ws(line.substr(5));
        for (std::string w; ws >> w; ++declared) names.insert(w);
      }
    CHECK(names.size() == declared);
    CHECK(declared == mm["sizes"]["target_vars"].get<std::size_t>());
    cur = next;
  }

  const std::string trip = "a b | c\nd e | a\n";
  std::string out;
  j = report([&](tp_report** r) { return tp_reduce("2cat-to-3tree", trip.data(), trip.size(), nullptr, r); }, nullptr,
             &out);
  for (const char* key : {"R1", "R2", "R3", "R4", "R5", "R6"}) CHECK(j["result"]["sizes"].contains(key));
  tp_document* d = nullptr;
  REQUIRE(tp_document_parse(TP_TRIPLETS, out.data(), out.size(), &d) == TP_OK);
  CHECK(std::string(tp_document_text(d)) == out);
  tp_document_free(d);

  const auto dot = slurp("twocycles.dot");
  out.clear();
  report([&](tp_report** r) { return tp_reduce("dichromatic-to-outdeg3", dot.data(), dot.size(), nullptr, r); }, nullptr,
         &out);
  REQUIRE(tp_document_parse(TP_DIGRAPH, out.data(), out.size(), &d) == TP_OK);
  CHECK(std::string(tp_document_text(d)) == out);
  tp_document_free(d);
}

TEST_CASE("gadget reports") {
  tp_answer a;
  auto o = det();
  auto j = report([&](tp_report** r) { return tp_gadget_verify("pi6", &o, r); }, &a);
  CHECK(a == TP_YES);
  CHECK(j["result"]["multisets"] == 1);
  CHECK(j["result"]["ordered_tuples"] == 2);

  j = report([&](tp_report** r) { return tp_gadget_verify("pi9", &o, r); }, &a);
  CHECK(a == TP_YES);
  CHECK(j["result"]["classes"] == 1);
  CHECK(j["result"]["multisets"] == 4);

  o.symmetry = TP_SYM_NONE;
  j = report([&](tp_report** r) { return tp_gadget_verify("pi5", &o, r); }, &a);
  CHECK(a == TP_NO);
  CHECK(j["result"]["multisets"] == 4);
  CHECK(j["result"]["classes"] == 4);

  o.symmetry = TP_SYM_DEFAULT;
  j = report([&](tp_report** r) { return tp_gadget_verify("pi6:1 2 3 4/2 4 1 3", &o, r); }, &a);
  CHECK(a == TP_YES);
  j = report([&](tp_report** r) { return tp_gadget_verify("pi0:1 2 3", &o, r); }, &a);
  CHECK(a == TP_YES);
  j = report([&](tp_report** r) { return tp_gadget_verify("pi2:1 2 3/3 2 1", &o, r); }, &a);
  CHECK(a == TP_NO);

  j = report([&](tp_report** r) { return tp_gadget_verify("tree-triple", &o, r); }, &a);
  CHECK(a == TP_YES);
  CHECK(j["result"]["trees_per_slot"] == 945);
  CHECK(j["result"]["covering_multisets"] == 1);
}

TEST_CASE("tau, compat and dicolor reports") {
  tp_answer a;
  auto o = det();
  auto j = report([&](tp_report** r) { return tp_tau(5, &o, r); }, &a);
  CHECK(a == TP_YES);
  CHECK(j["result"]["value"] == 4);
  CHECK(j["result"]["trees"].size() == 4);
  CHECK(j["result"]["log_upper_bound"] == 9);

  o.k = 3;
  o.caterpillar = 1;
  o.export_lp = 1;
  std::string lp;
  j = report([&](tp_report** r) { return tp_tau(4, &o, r); }, &a, &lp);
  CHECK(a == TP_YES);
  CHECK(j["result"]["decision"] == "yes");
  CHECK(lp.find("Binary") != std::string::npos);
  CHECK(lp.find("g5_") != std::string::npos);

  o.k = 2;
  o.export_lp = 0;
  lp.clear();
  report([&](tp_report** r) { return tp_tau(4, &o, r); }, &a, &lp);
  CHECK(a == TP_NO);
  CHECK(lp.empty());

  const auto trip = slurp("counterexample.trip");
  o = det();
  o.k = 2;
  j = report([&](tp_report** r) { return tp_compat(trip.data(), trip.size(), &o, r); }, &a);
  CHECK(a == TP_YES);
  CHECK(j["result"]["trees"].size() == 2);
  o.caterpillar = 1;
  report([&](tp_report** r) { return tp_compat(trip.data(), trip.size(), &o, r); }, &a);
  CHECK(a == TP_NO);
  o.k = 3;
  report([&](tp_report** r) { return tp_compat(trip.data(), trip.size(), &o, r); }, &a);
  CHECK(a == TP_YES);

  const auto dot = slurp("twocycles.dot");
  j = report([&](tp_report** r) { return tp_dicolor(dot.data(), dot.size(), nullptr, r); }, &a);
  CHECK(a == TP_YES);
  CHECK(j["result"]["coloring"]["a"] != j["result"]["coloring"]["b"]);
  CHECK(j["result"]["coloring"]["c"] != j["result"]["coloring"]["d"]);

  const std::string k3 = "digraph k { a -> b; b -> a; b -> c; c -> b; a -> c; c -> a; }";
  j = report([&](tp_report** r) { return tp_dicolor(k3.data(), k3.size(), nullptr, r); }, &a);
  CHECK(a == TP_NO);
  CHECK(j["result"]["coloring"].is_null());
}
