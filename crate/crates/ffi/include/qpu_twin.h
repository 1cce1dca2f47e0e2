/* C interface for the qpu-twin simulator. */

#ifndef QPU_TWIN_H
#define QPU_TWIN_H

#pragma once

/* This file is generated by cbindgen from qpu-twin-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of every fallible call. Anything other than `Ok` leaves an
// explanation in `qpu_twin_last_error`.
typedef enum QpuTwinStatus {
  QPU_TWIN_STATUS_OK = 0,
  // Null pointer, unknown name, index out of range, bad UTF-8.
  QPU_TWIN_STATUS_INVALID_ARGUMENT = 1,
  // Malformed QASM or JSON input.
  QPU_TWIN_STATUS_PARSE_ERROR = 2,
  // Well-formed input that violates a semantic rule.
  QPU_TWIN_STATUS_VALIDATION_ERROR = 3,
  // The run would exceed a qubit or memory cap.
  QPU_TWIN_STATUS_RESOURCE_ERROR = 4,
  // A bug on this side of the boundary; state may be inconsistent.
  QPU_TWIN_STATUS_INTERNAL_ERROR = 5,
} QpuTwinStatus;

// Noise mode, mirroring the CLI's `--mode` values.
typedef enum QpuTwinMode {
  QPU_TWIN_MODE_PAPER = 0,
  QPU_TWIN_MODE_UNM_STYLE = 1,
  QPU_TWIN_MODE_NOISELESS = 2,
} QpuTwinMode;

// Device calibration table (opaque).
typedef struct QpuTwinCalibration QpuTwinCalibration;

// Parsed circuit (opaque).
typedef struct QpuTwinCircuit QpuTwinCircuit;

// Measurement outcome distribution (opaque). Entries are sorted by
// bitstring and addressed by index.
typedef struct QpuTwinDistribution QpuTwinDistribution;

// Simulation knobs. Obtain defaults from `qpu_twin_sim_options_default`
// and adjust fields; zero-initializing by hand is not supported.
typedef struct QpuTwinSimOptions {
  enum QpuTwinMode mode;
  // Drive dephasing from the pure-dephasing time `1/(1/T2 - 1/(2 T1))`
  // instead of the printed T2.
  bool dephasing_from_tphi;
  // Charge the idle tail after a qubit's last gate (`paper` mode only).
  bool trailing_idle;
  // Run the density matrix in f32 instead of f64.
  bool single_precision;
  // Cap on gate-touched qubits before the run is refused.
  size_t max_qubits;
} QpuTwinSimOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; never freed.
const char *qpu_twin_version(void);

// Message for the most recent failure on this thread, or null after a
// success. The pointer is invalidated by the next call on the same thread.
const char *qpu_twin_last_error(void);

// Release a string returned through a `char**` out-parameter.
//
// # Safety
// `s` must have come from this library and not have been freed already.
// Null is ignored.
void qpu_twin_string_free(char *s);

// Parse OpenQASM 2.0 text into a circuit handle.
//
// # Safety
// `src` must be a NUL-terminated string and `out` a valid pointer.
enum QpuTwinStatus qpu_twin_circuit_from_qasm(const char *src, struct QpuTwinCircuit **out);

// Load one of the bundled benchmark fixtures by name, e.g. `"GHZ-2"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum QpuTwinStatus qpu_twin_circuit_from_fixture(const char *name, struct QpuTwinCircuit **out);

// Serialize a circuit back to canonical OpenQASM 2.0. The result is owned
// by the caller; release it with `qpu_twin_string_free`.
//
// # Safety
// `circuit` must be a live handle and `out` a valid pointer.
enum QpuTwinStatus qpu_twin_circuit_to_qasm(const struct QpuTwinCircuit *circuit, char **out);

// Report circuit size figures. Any of the out-pointers may be null to skip
// that figure. `qubits` counts gate-touched qubits, not declared wires.
//
// # Safety
// `circuit` must be a live handle.
enum QpuTwinStatus qpu_twin_circuit_stats(const struct QpuTwinCircuit *circuit,
                                          size_t *qubits,
                                          size_t *depth,
                                          size_t *one_qubit_gates,
                                          size_t *two_qubit_gates);

// Release a circuit handle. Null is ignored.
//
// # Safety
// `circuit` must have come from this library and not have been freed
// already.
void qpu_twin_circuit_free(struct QpuTwinCircuit *circuit);

// Route a circuit onto a built-in topology (`"iqm-q20"` or
// `"ibmq-melbourne"`) and lower it to a native gateset (`"iqm-prx-cz"` or
// `"ibmq-u-cnot"`, aliases `"iqm"`/`"ibmq"`). Produces a new circuit
// handle; the input is untouched.
//
// # Safety
// `circuit` must be a live handle, the strings NUL-terminated, and `out` a
// valid pointer.
enum QpuTwinStatus qpu_twin_compile(const struct QpuTwinCircuit *circuit,
                                    const char *topology,
                                    const char *gateset,
                                    struct QpuTwinCircuit **out);

// Load a built-in calibration table: `"iqm-q20"` or `"ibmq-melbourne"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum QpuTwinStatus qpu_twin_calibration_builtin(const char *name, struct QpuTwinCalibration **out);

// Parse and validate a calibration table from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum QpuTwinStatus qpu_twin_calibration_from_json(const char *json,
                                                  struct QpuTwinCalibration **out);

// Number of qubits the calibration covers; 0 for a null handle.
//
// # Safety
// `cal` must be a live handle or null.
size_t qpu_twin_calibration_num_qubits(const struct QpuTwinCalibration *cal);

// Release a calibration handle. Null is ignored.
//
// # Safety
// `cal` must have come from this library and not have been freed already.
void qpu_twin_calibration_free(struct QpuTwinCalibration *cal);

// The defaults the CLI uses: paper mode, printed T2, trailing idle on,
// double precision, 15-qubit cap.
struct QpuTwinSimOptions qpu_twin_sim_options_default(void);

// Run the density-matrix simulation and produce an outcome distribution.
// `opts` may be null for defaults.
//
// # Safety
// `circuit` and `cal` must be live handles, `opts` null or valid, and
// `out` a valid pointer.
enum QpuTwinStatus qpu_twin_simulate(const struct QpuTwinCircuit *circuit,
                                     const struct QpuTwinCalibration *cal,
                                     const struct QpuTwinSimOptions *opts,
                                     struct QpuTwinDistribution **out);

// Number of outcomes with nonzero probability; 0 for a null handle.
//
// # Safety
// `dist` must be a live handle or null.
size_t qpu_twin_distribution_len(const struct QpuTwinDistribution *dist);

// Width of the outcome bitstrings in classical bits; 0 for a null handle.
//
// # Safety
// `dist` must be a live handle or null.
size_t qpu_twin_distribution_num_bits(const struct QpuTwinDistribution *dist);

// Fetch entry `index` (sorted by bitstring). The bitstring pointer borrows
// from the handle; do not free it. Either out-pointer may be null.
//
// # Safety
// `dist` must be a live handle.
enum QpuTwinStatus qpu_twin_distribution_entry(const struct QpuTwinDistribution *dist,
                                               size_t index,
                                               const char **bitstring,
                                               double *probability);

// Probability of one bitstring; absent outcomes read as 0.
//
// # Safety
// `dist` must be a live handle, `bitstring` NUL-terminated, and `out` a
// valid pointer.
enum QpuTwinStatus qpu_twin_distribution_probability(const struct QpuTwinDistribution *dist,
                                                     const char *bitstring,
                                                     double *out);

// Hellinger distance in [0, 1] between two distributions of equal width.
// Each input is renormalized by its own total first, so the trace drift of
// a single-precision run does not trip the strict normalization check.
//
// # Safety
// `a` and `b` must be live handles and `out` a valid pointer.
enum QpuTwinStatus qpu_twin_hellinger(const struct QpuTwinDistribution *a,
                                      const struct QpuTwinDistribution *b,
                                      double *out);

// Release a distribution handle. Null is ignored.
//
// # Safety
// `dist` must have come from this library and not have been freed already.
void qpu_twin_distribution_free(struct QpuTwinDistribution *dist);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPU_TWIN_H */
