#ifndef TERNPERM_H
#define TERNPERM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TP_API __declspec(dllexport)
#else
#define TP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  TP_OK = 0,
  TP_ERR_INVALID_ARGUMENT = 1,
  TP_ERR_PARSE = 2,
  TP_ERR_BUDGET = 3,
  TP_ERR_INTERNAL = 4
} tp_status;

typedef enum { TP_YES = 0, TP_NO = 1, TP_UNKNOWN = 2 } tp_answer;

typedef enum { TP_CSP = 0, TP_TRIPLETS = 1, TP_DIGRAPH = 2 } tp_kind;

/* -1 keeps the gadget's own symmetry. */
typedef enum { TP_SYM_DEFAULT = -1, TP_SYM_NONE = 0, TP_SYM_REVERSAL = 1, TP_SYM_CHERRY_SWAP = 2 } tp_symmetry;

typedef struct {
  int deterministic;      /* omit wall-clock timings from reports */
  unsigned threads;       /* 0: all hardware threads */
  uint64_t node_limit;    /* 0: unlimited; conflict limit for tau */
  int exhaustive;         /* solve: exhaustive instead of branch and bound */
  int enumerate;          /* solve: list every solution */
  int symmetry_breaking;  /* solve: fix one pair for reversal-closed families */
  int caterpillar;        /* compat and tau: caterpillars only */
  int k;                  /* compat: tree count; tau: single decision when > 0 */
  int export_lp;          /* tau: attach the LP model as the artifact */
  int symmetry;           /* gadget-verify, a tp_symmetry */
} tp_options;

/* Opaque handles. */
typedef struct tp_report tp_report;
typedef struct tp_document tp_document;

TP_API void tp_options_init(tp_options* opts);
TP_API const char* tp_version(void);
/* Message of the last failed call on this thread; "" if none. */
TP_API const char* tp_last_error(void);
TP_API const char* tp_status_name(tp_status s);

/* Parses a .csp, .trip or DOT text into a document. */
TP_API tp_status tp_document_parse(tp_kind kind, const char* text, size_t len, tp_document** out);
/* Canonical text of the document; owned by the handle. */
TP_API const char* tp_document_text(const tp_document* doc);
TP_API tp_kind tp_document_kind(const tp_document* doc);
/* 1 if both documents hold equal objects, 0 otherwise. */
TP_API int tp_document_equal(const tp_document* a, const tp_document* b);
TP_API void tp_document_free(tp_document* doc);

/* Every command produces a report: a JSON text, an answer and, for reduce and
 * tau with export_lp, an artifact text. opts may be NULL for defaults. */
TP_API tp_status tp_solve(const char* csp_text, size_t len, const tp_options* opts, tp_report** out);
TP_API tp_status tp_reduce(const char* name, const char* text, size_t len, const tp_options* opts, tp_report** out);
/* name: pi5, pi6, pi9, tree-triple, or "pi<i>:<ordering>/<ordering>/..." with
 * orderings over 1..m written as space separated labels. */
TP_API tp_status tp_gadget_verify(const char* name, const tp_options* opts, tp_report** out);
TP_API tp_status tp_tau(int n, const tp_options* opts, tp_report** out);
TP_API tp_status tp_compat(const char* trip_text, size_t len, const tp_options* opts, tp_report** out);
TP_API tp_status tp_dicolor(const char* dot_text, size_t len, const tp_options* opts, tp_report** out);

TP_API tp_answer tp_report_answer(const tp_report* r);
TP_API const char* tp_report_json(const tp_report* r);
/* NULL when the command produced no artifact. */
TP_API const char* tp_report_artifact(const tp_report* r);
/* Manifest JSON of a reduce report; NULL otherwise. */
TP_API const char* tp_report_manifest(const tp_report* r);
TP_API void tp_report_free(tp_report* r);

#ifdef __cplusplus
}
#endif

#endif
