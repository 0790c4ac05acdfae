#ifndef TGRL_H
#define TGRL_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum TgrlStatus {
  TGRL_STATUS_OK = 0,
  TGRL_STATUS_NULL_POINTER = 1,
  TGRL_STATUS_INVALID_UTF8 = 2,
  TGRL_STATUS_PARSE = 3,
  TGRL_STATUS_INVALID_GAME = 4,
  TGRL_STATUS_NOT_FOUND = 5,
  TGRL_STATUS_IO = 6,
  TGRL_STATUS_ENV_DONE = 7,
  TGRL_STATUS_SNAPSHOT_MISMATCH = 8,
  TGRL_STATUS_INVALID_ARGUMENT = 9,
  TGRL_STATUS_PANIC = 10,
  TGRL_STATUS_INTERNAL = 11,
} TgrlStatus;

// A running environment.
typedef struct TgrlEnv TgrlEnv;

// A loaded game definition.
typedef struct TgrlGame TgrlGame;

// A saved environment state.
typedef struct TgrlSnapshot TgrlSnapshot;

// Observation triple. Free with [`tgrl_observation_free`].
typedef struct TgrlObservation {
  char *response;
  char *inventory;
  char *look;
} TgrlObservation;

// Owned array of strings. Free with [`tgrl_string_list_free`].
typedef struct TgrlStringList {
  char **items;
  size_t len;
} TgrlStringList;

// Outcome of one step. Free the observation with [`tgrl_observation_free`].
typedef struct TgrlStepResult {
  struct TgrlObservation observation;
  int64_t reward;
  bool done;
  bool world_changed;
} TgrlStepResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Error message of the most recent call on this thread, or null if it
// succeeded. Valid until the next call on the same thread.
const char *tgrl_last_error(void);

// # Safety
// `s` must be null or a string returned by this library.
void tgrl_string_free(char *s);

// # Safety
// `o` must be null or point to an observation filled by this library.
void tgrl_observation_free(struct TgrlObservation *o);

// # Safety
// `list` must be null or point to a list filled by this library.
void tgrl_string_list_free(struct TgrlStringList *list);

// Parses a game definition from JSON text.
//
// # Safety
// `text` must be a valid C string and `out` a valid pointer.
enum TgrlStatus tgrl_game_from_str(const char *text, struct TgrlGame **out);

// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum TgrlStatus tgrl_game_from_file(const char *path, struct TgrlGame **out);

// Loads one of the bundled games by name.
//
// # Safety
// `name` must be a valid C string and `out` a valid pointer.
enum TgrlStatus tgrl_game_bundled(const char *name, struct TgrlGame **out);

// # Safety
// `game` must be null or a handle from this library, not yet freed.
void tgrl_game_free(struct TgrlGame *game);

// # Safety
// `game` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_game_max_score(const struct TgrlGame *game, int64_t *out);

// Creates an environment. The game handle may be freed afterwards.
//
// # Safety
// `game` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_env_new(const struct TgrlGame *game, struct TgrlEnv **out);

// # Safety
// `env` must be null or a handle from this library, not yet freed.
void tgrl_env_free(struct TgrlEnv *env);

// # Safety
// `env` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_env_reset(struct TgrlEnv *env, struct TgrlObservation *out);

// # Safety
// `env` must be a valid handle, `action` a valid C string and `out` a
// valid pointer.
enum TgrlStatus tgrl_env_step(struct TgrlEnv *env, const char *action, struct TgrlStepResult *out);

// # Safety
// `env` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_env_valid_actions(struct TgrlEnv *env, struct TgrlStringList *out);

// # Safety
// `env` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_env_score(const struct TgrlEnv *env, int64_t *out);

// # Safety
// `env` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_env_is_done(const struct TgrlEnv *env, bool *out);

// Hash of the full canonical world state.
//
// # Safety
// `env` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_env_state_hash(const struct TgrlEnv *env, uint64_t *out);

// Id of the room the player is in. Free the string with [`tgrl_string_free`].
//
// # Safety
// `env` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_env_room_id(const struct TgrlEnv *env, char **out);

// # Safety
// `env` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_env_snapshot(const struct TgrlEnv *env, struct TgrlSnapshot **out);

// # Safety
// `env` and `snap` must be valid handles.
enum TgrlStatus tgrl_env_restore(struct TgrlEnv *env, const struct TgrlSnapshot *snap);

// # Safety
// `snap` must be null or a handle from this library, not yet freed.
void tgrl_snapshot_free(struct TgrlSnapshot *snap);

// Location key of the current state at the given probe depth. Free the
// string with [`tgrl_string_free`].
//
// # Safety
// `env` must be a valid handle and `out` a valid pointer.
enum TgrlStatus tgrl_locate(struct TgrlEnv *env, size_t depth, char **out);

// 64-bit hash of a UTF-8 string.
//
// # Safety
// `s` must be a valid C string and `out` a valid pointer.
enum TgrlStatus tgrl_str_hash(const char *s, uint64_t *out);

// Writes the `dim`-dimensional hash vector of `s` into `out`.
//
// # Safety
// `s` must be a valid C string and `out` must have room for `dim` values.
enum TgrlStatus tgrl_hash_vec(const char *s, size_t dim, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TGRL_H */
