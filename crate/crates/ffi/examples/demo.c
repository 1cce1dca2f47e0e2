/* Minimal C caller: load a fixture, simulate it twice, compare.
 *
 * Build (from the workspace root, after `cargo build -p qpu-twin-ffi`):
 *   cc -std=c99 -Icrates/ffi/include crates/ffi/examples/demo.c \
 *      target/debug/libqpu_twin_ffi.a -lpthread -ldl -lm -o demo
 */
#include <stdio.h>
#include "qpu_twin.h"

int main(void) {
    printf("version %s\n", qpu_twin_version());

    QpuTwinCircuit *c = NULL;
    if (qpu_twin_circuit_from_fixture("GHZ-3", &c) != QPU_TWIN_STATUS_OK) {
        fprintf(stderr, "load: %s\n", qpu_twin_last_error());
        return 1;
    }
    size_t qubits = 0, depth = 0;
    qpu_twin_circuit_stats(c, &qubits, &depth, NULL, NULL);
    printf("GHZ-3: %zu qubits, depth %zu\n", qubits, depth);

    QpuTwinCalibration *cal = NULL;
    if (qpu_twin_calibration_builtin("iqm-q20", &cal) != QPU_TWIN_STATUS_OK) return 1;

    QpuTwinSimOptions opts = qpu_twin_sim_options_default();
    opts.mode = QPU_TWIN_MODE_NOISELESS;
    QpuTwinDistribution *ideal = NULL;
    if (qpu_twin_simulate(c, cal, &opts, &ideal) != QPU_TWIN_STATUS_OK) {
        fprintf(stderr, "simulate: %s\n", qpu_twin_last_error());
        return 1;
    }
    QpuTwinDistribution *noisy = NULL;
    if (qpu_twin_simulate(c, cal, NULL, &noisy) != QPU_TWIN_STATUS_OK) return 1;

    for (size_t i = 0; i < qpu_twin_distribution_len(ideal); i++) {
        const char *bits = NULL;
        double p = 0.0;
        qpu_twin_distribution_entry(ideal, i, &bits, &p);
        if (p > 1e-6) printf("  %s %.6f\n", bits, p);
    }
    double h = -1.0;
    if (qpu_twin_hellinger(ideal, noisy, &h) != QPU_TWIN_STATUS_OK) return 1;
    printf("hellinger(ideal, paper) = %.4f\n", h);

    /* error path: message then cleanup */
    QpuTwinCircuit *bad = NULL;
    QpuTwinStatus s = qpu_twin_circuit_from_qasm("OPENQASM 2.0;\nqreg q[1];\nnope q[0];\n", &bad);
    printf("bad parse -> %d (%s)\n", (int)s, qpu_twin_last_error());
    if (s != QPU_TWIN_STATUS_PARSE_ERROR) return 1;

    qpu_twin_distribution_free(noisy);
    qpu_twin_distribution_free(ideal);
    qpu_twin_calibration_free(cal);
    qpu_twin_circuit_free(c);
    puts("ok");
    return 0;
}
