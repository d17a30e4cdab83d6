#ifndef TWEETKG_H
#define TWEETKG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum TkgStatus {
  TKG_STATUS_OK = 0,
  TKG_STATUS_NULL_ARGUMENT = 1,
  TKG_STATUS_INVALID_UTF8 = 2,
  TKG_STATUS_IO = 3,
  TKG_STATUS_PARSE = 4,
  TKG_STATUS_INVALID_INPUT = 5,
  /*
   Emitted graph failed validation or an IRI could not be minted.
   */
  TKG_STATUS_INVARIANT = 6,
  TKG_STATUS_LINKING = 7,
  /*
   Statistic undefined for the input (e.g. every rating identical).
   */
  TKG_STATUS_UNDEFINED = 8,
  TKG_STATUS_PANIC = 9,
} TkgStatus;

/*
 Pipeline configuration handle.
 */
typedef struct TkgConfig TkgConfig;

/*
 Summary of a full pipeline run.
 */
typedef struct TkgRunReport TkgRunReport;

/*
 Result of validating a Turtle graph.
 */
typedef struct TkgValidation TkgValidation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static string.
 */
const char *tkg_version(void);

/*
 Message of the last failed call on this thread, or NULL. The pointer stays
 valid until the next `tkg_*` call on the same thread.
 */
const char *tkg_last_error(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from a `tkg_*` function returning `char *` and not be freed twice.
 */
void tkg_string_free(char *s);

/*
 Default configuration (no input paths set).

 # Safety
 `out` must be a valid pointer.
 */
enum TkgStatus tkg_config_new(struct TkgConfig **out);

/*
 Loads a TOML configuration; relative paths resolve against its directory.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TkgStatus tkg_config_load(const char *path, struct TkgConfig **out);

/*
 # Safety
 `cfg` must be a live handle and `dir` a NUL-terminated string.
 */
enum TkgStatus tkg_config_set_out_dir(struct TkgConfig *cfg, const char *dir);

/*
 Sets one input file. `which` is one of "posts", "first_pass",
 "second_pass", "coref", "vectors", "patterns".

 # Safety
 `cfg` must be a live handle; `which` and `path` NUL-terminated strings.
 */
enum TkgStatus tkg_config_set_input(struct TkgConfig *cfg, const char *which, const char *path);

/*
 # Safety
 `cfg` must be a live handle.
 */
enum TkgStatus tkg_config_set_seed(struct TkgConfig *cfg, uint64_t seed);

/*
 Turns entity linking on or off.

 # Safety
 `cfg` must be a live handle.
 */
enum TkgStatus tkg_config_set_linking(struct TkgConfig *cfg, bool enabled);

/*
 # Safety
 `cfg` must be NULL or a handle not yet freed.
 */
void tkg_config_free(struct TkgConfig *cfg);

/*
 Runs normalize, extract and refine/emit, writing every artifact into the
 configured output directory.

 # Safety
 `cfg` must be a live handle and `out` a valid pointer.
 */
enum TkgStatus tkg_run_all(const struct TkgConfig *cfg, struct TkgRunReport **out);

/*
 Number of statements in the emitted graph; 0 for NULL.

 # Safety
 `r` must be NULL or a live handle.
 */
size_t tkg_run_report_statements(const struct TkgRunReport *r);

/*
 Full report as JSON; free with `tkg_string_free`. NULL on a NULL handle.

 # Safety
 `r` must be NULL or a live handle.
 */
char *tkg_run_report_json(const struct TkgRunReport *r);

/*
 # Safety
 `r` must be NULL or a handle not yet freed.
 */
void tkg_run_report_free(struct TkgRunReport *r);

/*
 Parses a Turtle file and checks statement reification. Violations are
 reported through the handle, not the status.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TkgStatus tkg_validate_file(const char *path, struct TkgValidation **out);

/*
 # Safety
 `v` must be NULL or a live handle.
 */
size_t tkg_validation_statements(const struct TkgValidation *v);

/*
 # Safety
 `v` must be NULL or a live handle.
 */
size_t tkg_validation_violations(const struct TkgValidation *v);

/*
 # Safety
 `v` must be NULL or a live handle.
 */
size_t tkg_validation_same_as_links(const struct TkgValidation *v);

/*
 # Safety
 `v` must be NULL or a live handle.
 */
char *tkg_validation_json(const struct TkgValidation *v);

/*
 # Safety
 `v` must be NULL or a handle not yet freed.
 */
void tkg_validation_free(struct TkgValidation *v);

/*
 Normalized Levenshtein similarity in [0, 1].

 # Safety
 `a`, `b` must be NUL-terminated strings and `out` a valid pointer.
 */
enum TkgStatus tkg_levenshtein_similarity(const char *a, const char *b, double *out);

/*
 Fleiss' kappa over a row-major `items × categories` count matrix.

 # Safety
 `counts` must point to `items * categories` values and `out` be valid.
 */
enum TkgStatus tkg_fleiss_kappa(const size_t *counts, size_t items, size_t categories, double *out);

/*
 Cohen's kappa of two raters' integer labels over `n` items.

 # Safety
 `a` and `b` must point to `n` values and `out` be valid.
 */
enum TkgStatus tkg_cohen_kappa(const int32_t *a, const int32_t *b, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWEETKG_H */
