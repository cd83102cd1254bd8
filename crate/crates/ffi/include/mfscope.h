#ifndef MFSCOPE_H
#define MFSCOPE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MfsStatus {
  MFS_STATUS_OK = 0,
  MFS_STATUS_NULL_POINTER = 1,
  MFS_STATUS_INVALID_UTF8 = 2,
  MFS_STATUS_INVALID_ARGUMENT = 3,
  MFS_STATUS_PARSE_ERROR = 4,
  MFS_STATUS_UNKNOWN_BID = 5,
  MFS_STATUS_REDUCE_FAILED = 6,
  MFS_STATUS_PANIC = 7,
} MfsStatus;

/**
 * Parsed HTML observation.
 */
typedef struct MfsDocument MfsDocument;

/**
 * Configured reduction method.
 */
typedef struct MfsReducer MfsReducer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next library call on the same thread.
 */
const char *mfs_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void mfs_string_free(char *s);

/**
 * # Safety
 * `html` must be a NUL-terminated string; `out` a valid pointer.
 */
enum MfsStatus mfs_document_parse(const char *html, struct MfsDocument **out);

/**
 * # Safety
 * `doc` must be null or a handle from this library, not yet freed.
 */
void mfs_document_free(struct MfsDocument *doc);

/**
 * Canonical markup; release with [`mfs_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_document_serialize(const struct MfsDocument *doc, char **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_document_char_length(const struct MfsDocument *doc, size_t *out);

/**
 * Whether the `"bid:attr"` unit is present.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_document_contains_ref(const struct MfsDocument *doc,
                                         const char *unit_str,
                                         bool *out);

/**
 * New document with the listed units removed.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_document_ablate(const struct MfsDocument *doc,
                                   const char *units_json,
                                   struct MfsDocument **out);

/**
 * Tree distance between two units.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_dom_distance(const struct MfsDocument *doc,
                                const char *a,
                                const char *b,
                                size_t *out);

/**
 * New document with the built-in normalization rules applied.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_document_normalize(const struct MfsDocument *doc, struct MfsDocument **out);

/**
 * Builds a reducer from a method spec such as `dmr-bm25:k=10`, using the
 * offline provider backends.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_reducer_new(const char *spec, struct MfsReducer **out);

/**
 * # Safety
 * `reducer` must be null or a handle from this library, not yet freed.
 */
void mfs_reducer_free(struct MfsReducer *reducer);

/**
 * Reduces `doc`. `goal` and `history_json` (a JSON array of action
 * strings) may be null.
 *
 * # Safety
 * Non-null pointers must be valid.
 */
enum MfsStatus mfs_reducer_reduce(const struct MfsReducer *reducer,
                                  const struct MfsDocument *doc,
                                  const char *goal,
                                  const char *history_json,
                                  struct MfsDocument **out);

/**
 * Sets `out` to whether every unit of `mfs_json` is still in `reduced`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_coverage(const struct MfsDocument *reduced, const char *mfs_json, bool *out);

/**
 * 1 iff the size ratio is at most `r_target` and the MFS survived.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MfsStatus mfs_gepa_objective(const struct MfsDocument *reduced,
                                  const struct MfsDocument *original,
                                  const char *mfs_json,
                                  double r_target,
                                  uint8_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MFSCOPE_H */
