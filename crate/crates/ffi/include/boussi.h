#ifndef BOUSSI_H
#define BOUSSI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Error-norm selector for fit queries.
 */
typedef enum BoussiNorm {
  BoussiL2 = 0,
  BoussiLinf = 1,
} BoussiNorm;

/**
 * Approximation order selector for result queries.
 */
typedef enum BoussiOrder {
  BoussiKdvOnly = 0,
  BoussiSecondOrder = 1,
} BoussiOrder;

/**
 * Status codes returned by every fallible call.
 */
typedef enum BoussiStatus {
  BoussiOk = 0,
  BoussiErrConfig = 2,
  BoussiErrSolver = 3,
  BoussiErrIo = 4,
  BoussiErrNullArgument = 5,
  BoussiErrPanic = 6,
} BoussiStatus;

/**
 * Opaque scenario handle.
 */
typedef struct BoussiScenario BoussiScenario;

/**
 * Opaque sweep-result handle.
 */
typedef struct BoussiSweep BoussiSweep;

/**
 * One sup-in-time error measurement.
 */
typedef struct BoussiErrorRecord {
  double eps;
  enum BoussiOrder order;
  double sup_l2;
  double sup_linf;
  double t_at_max;
} BoussiErrorRecord;

/**
 * A fitted power law `error = constant * eps^slope`.
 */
typedef struct BoussiFit {
  double slope;
  double constant;
  double residual;
} BoussiFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *boussi_last_error(void);

/**
 * The built-in head-on collision scenario. Never fails.
 */
struct BoussiScenario *boussi_scenario_head_on(void);

/**
 * The built-in overtaking scenario. Never fails.
 */
struct BoussiScenario *boussi_scenario_overtaking(void);

/**
 * Parse a configuration text (the same format the CLI accepts). Returns
 * null and sets the last error on failure.
 *
 * # Safety
 * `text` must be a valid NUL-terminated C string.
 */
struct BoussiScenario *boussi_scenario_from_config(const char *text);

/**
 * Replace the eps sweep (values are sorted descending internally).
 *
 * # Safety
 * `scenario` must come from a `boussi_scenario_*` constructor and `eps`
 * must point to `len` doubles.
 */
enum BoussiStatus boussi_scenario_set_eps(struct BoussiScenario *scenario,
                                          const double *eps,
                                          uintptr_t len);

/**
 * # Safety
 * `scenario` must come from a `boussi_scenario_*` constructor; it must
 * not be used afterwards.
 */
void boussi_scenario_free(struct BoussiScenario *scenario);

/**
 * Run the sweep. Returns null and sets the last error on failure.
 *
 * # Safety
 * `scenario` must come from a `boussi_scenario_*` constructor.
 */
struct BoussiSweep *boussi_run(const struct BoussiScenario *scenario, int threads);

/**
 * Number of (eps, order) error records in a sweep result.
 *
 * # Safety
 * `sweep` must come from `boussi_run`.
 */
uintptr_t boussi_sweep_record_count(const struct BoussiSweep *sweep);

/**
 * Copy record `index` into `out`.
 *
 * # Safety
 * `sweep` must come from `boussi_run`; `out` must be a valid pointer.
 */
enum BoussiStatus boussi_sweep_record(const struct BoussiSweep *sweep,
                                      uintptr_t index,
                                      struct BoussiErrorRecord *out);

/**
 * Fit the error order of one approximation/norm over the sweep
 * (eps <= 0.1 only, at least three values).
 *
 * # Safety
 * `sweep` must come from `boussi_run`; `out` must be a valid pointer.
 */
enum BoussiStatus boussi_sweep_fit(const struct BoussiSweep *sweep,
                                   enum BoussiOrder order,
                                   enum BoussiNorm norm,
                                   struct BoussiFit *out);

/**
 * # Safety
 * `sweep` must come from `boussi_run`; it must not be used afterwards.
 */
void boussi_sweep_free(struct BoussiSweep *sweep);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOUSSI_H */
