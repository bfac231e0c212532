// ternperm command line: thin layer over the C API in ternperm.h.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ternperm/ternperm.h"

namespace {

constexpr int kExitError = 2;

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

int fail(const std::string& what) {
  std::cerr << "error: " << what << "\n";
  return kExitError;
}

int fail(tp_status s) { return fail(std::string(tp_status_name(s)) + ": " + tp_last_error()); }

int exit_of(tp_answer a) { return a == TP_YES ? 0 : a == TP_NO ? 1 : kExitError; }

// Prints the report, optionally copies it to a file, returns the exit code.
int emit(tp_report* r, const std::string& report_path, bool answer_exit) {
  const std::string json = tp_report_json(r);
  std::cout << json;
  const int code = answer_exit ? exit_of(tp_report_answer(r)) : 0;
  tp_report_free(r);
  if (!report_path.empty() && !write_file(report_path, json)) return fail("cannot write " + report_path);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact solvers for ternary permutation CSPs and rooted triplet covers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tp_version()));

  tp_options opts;
  tp_options_init(&opts);
  bool deterministic = false;
  std::string report_path;
  app.add_option("--threads", opts.threads, "Worker threads (0: all)");
  app.add_flag("--deterministic", deterministic, "Omit wall-clock timings from the report");
  app.add_option("--report", report_path, "Also write the JSON report to this file");

  std::string file;
  std::uint64_t node_limit = 0;

  auto* solve = app.add_subcommand("solve", "Decide a k-Pi instance (.csp)");
  bool enumerate = false, exhaustive = false, symmetry_breaking = false;
  solve->add_option("file", file, "Instance file")->required();
  solve->add_flag("--enumerate", enumerate, "List every solution");
  solve->add_flag("--exhaustive", exhaustive, "Plain enumeration of all k-tuples");
  solve->add_flag("--symmetry-breaking", symmetry_breaking, "Fix one pair for reversal-closed families");
  solve->add_option("--node-limit", node_limit, "Search node budget (0: none)");

  auto* reduce = app.add_subcommand("reduce", "Apply a hardness reduction to an instance");
  std::string reduction, out_file, manifest_path;
  reduce->add_option("name", reduction, "Reduction name")->required();
  reduce->add_option("in", file, "Source file")->required();
  reduce->add_option("out", out_file, "Target file")->required();
  reduce->add_option("--manifest", manifest_path, "Manifest path (default: <out>.manifest.json)");

  auto* gadget = app.add_subcommand("gadget-verify", "Check a uniqueness gadget by complete enumeration");
  std::string gadget_name, symmetry;
  bool no_symmetry = false;
  gadget->add_option("gadget", gadget_name, "pi5, pi6, pi9, tree-triple or pi<i>:<ordering>/<ordering>")->required();
  gadget->add_flag("--no-symmetry", no_symmetry, "Count raw solutions");
  gadget->add_option("--symmetry", symmetry, "none, reversal or cherry-swap")
      ->check(CLI::IsMember({"none", "reversal", "cherry-swap"}));
  gadget->add_option("--node-limit", node_limit, "Search node budget (0: none)");

  auto* tau = app.add_subcommand("tau", "Fewest trees (caterpillars) displaying all triplets on n leaves");
  int n = 0;
  bool caterpillar = false;
  int tau_k = 0;
  std::string lp_path;
  tau->add_option("--n", n, "Number of leaves")->required()->check(CLI::Range(3, 64));
  tau->add_flag("--caterpillar", caterpillar, "Caterpillars only");
  tau->add_option("--k", tau_k, "Decide this k only")->check(CLI::PositiveNumber);
  tau->add_option("--export-lp", lp_path, "Write the 0/1 model in LP format");
  tau->add_option("--conflict-limit", node_limit, "Conflict budget per decision (0: none)");

  auto* compat = app.add_subcommand("compat", "Are the triplets displayed by at most k trees");
  compat->add_option("file", file, "Triplet file")->required();
  int compat_k = 1;
  compat->add_option("--k", compat_k, "Number of trees")->default_val(1)->check(CLI::PositiveNumber);
  compat->add_flag("--caterpillar", caterpillar, "Caterpillars only");
  compat->add_option("--node-limit", node_limit, "Search node budget (0: none)");

  auto* dicolor = app.add_subcommand("dicolor", "Two-color a digraph with acyclic color classes");
  dicolor->add_option("file", file, "DOT file")->required();
  dicolor->add_option("--node-limit", node_limit, "Search node budget (0: none)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  opts.deterministic = deterministic ? 1 : 0;
  opts.node_limit = node_limit;
  opts.k = *compat ? compat_k : tau_k;
  opts.caterpillar = caterpillar ? 1 : 0;
  tp_report* r = nullptr;
  std::string text;

  if (*solve) {
    if (!read_file(file, text)) return fail("cannot read " + file);
    opts.enumerate = enumerate ? 1 : 0;
    opts.exhaustive = exhaustive ? 1 : 0;
    opts.symmetry_breaking = symmetry_breaking ? 1 : 0;
    if (auto s = tp_solve(text.data(), text.size(), &opts, &r); s != TP_OK) return fail(s);
    return emit(r, report_path, true);
  }
  if (*reduce) {
    if (!read_file(file, text)) return fail("cannot read " + file);
    if (auto s = tp_reduce(reduction.c_str(), text.data(), text.size(), &opts, &r); s != TP_OK) return fail(s);
    if (manifest_path.empty()) manifest_path = out_file + ".manifest.json";
    const bool ok = write_file(out_file, tp_report_artifact(r)) && write_file(manifest_path, tp_report_manifest(r));
    if (!ok) {
      tp_report_free(r);
      return fail("cannot write " + out_file + " or " + manifest_path);
    }
    return emit(r, report_path, false);
  }
  if (*gadget) {
    if (no_symmetry) opts.symmetry = TP_SYM_NONE;
    if (symmetry == "none") opts.symmetry = TP_SYM_NONE;
    if (symmetry == "reversal") opts.symmetry = TP_SYM_REVERSAL;
    if (symmetry == "cherry-swap") opts.symmetry = TP_SYM_CHERRY_SWAP;
    if (auto s = tp_gadget_verify(gadget_name.c_str(), &opts, &r); s != TP_OK) return fail(s);
    return emit(r, report_path, true);
  }
  if (*tau) {
    opts.export_lp = lp_path.empty() ? 0 : 1;
    if (auto s = tp_tau(n, &opts, &r); s != TP_OK) return fail(s);
    if (!lp_path.empty() && !write_file(lp_path, tp_report_artifact(r))) {
      tp_report_free(r);
      return fail("cannot write " + lp_path);
    }
    return emit(r, report_path, true);
  }
  if (*compat) {
    if (!read_file(file, text)) return fail("cannot read " + file);
    if (auto s = tp_compat(text.data(), text.size(), &opts, &r); s != TP_OK) return fail(s);
    return emit(r, report_path, true);
  }
  if (!read_file(file, text)) return fail("cannot read " + file);
  if (auto s = tp_dicolor(text.data(), text.size(), &opts, &r); s != TP_OK) return fail(s);
  return emit(r, report_path, true);
}
