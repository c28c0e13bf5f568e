#ifndef FRAGPREP_H
#define FRAGPREP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum FpStatus {
  FP_STATUS_OK = 0,
  FP_STATUS_NULL_POINTER = 1,
  FP_STATUS_INVALID_ARGUMENT = 2,
  FP_STATUS_PARSE = 3,
  // Size cap exceeded, mismatched sizes, or an output buffer too small.
  FP_STATUS_SIZE = 4,
  FP_STATUS_NOT_HERMITIAN = 5,
  FP_STATUS_PREPARATION_FAILED = 6,
  FP_STATUS_NUMERIC = 7,
  FP_STATUS_IO = 8,
  FP_STATUS_PANIC = 9,
} FpStatus;

// How the controlled powers of `U = e^{iHb}` are realized in QPE.
typedef enum FpUnitaryMode {
  FP_UNITARY_MODE_TROTTER = 0,
  FP_UNITARY_MODE_EXACT = 1,
  FP_UNITARY_MODE_RESCALED_TROTTER = 2,
} FpUnitaryMode;

// Opaque qubit Hamiltonian.
typedef struct FpHamiltonian FpHamiltonian;

// Opaque normalized statevector.
typedef struct FpStatevector FpStatevector;

// QPE settings; start from [`fp_qpe_options_default`].
typedef struct FpQpeOptions {
  size_t n_ancilla;
  size_t n_trotter;
  size_t shots;
  uint64_t seed;
  // Multiplies the default scale factor `pi / (2 ||H||_1)`; at least 1.
  double b_multiplier;
  enum FpUnitaryMode mode;
  // Computational basis state loaded into the system register.
  uint64_t initial_basis;
} FpQpeOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len - 1` bytes) and returns the full message
// length excluding the terminator. `buf` may be null to query the length.
size_t fp_last_error(char *buf, size_t len);

// Parses a Hamiltonian in the Pauli text format. The identity term is
// split off into the stored energy offset.
enum FpStatus fp_hamiltonian_parse(const char *text, struct FpHamiltonian **out_h);

// Loads a bundled example: `h2`, `ising3` or `xxz4`.
enum FpStatus fp_hamiltonian_builtin(const char *name, struct FpHamiltonian **out_h);

// Releases a Hamiltonian; null is a no-op.
void fp_hamiltonian_free(struct FpHamiltonian *h);

enum FpStatus fp_hamiltonian_n_qubits(const struct FpHamiltonian *h, size_t *out_n);

// Sum of |coefficients| over the non-identity terms.
enum FpStatus fp_hamiltonian_one_norm(const struct FpHamiltonian *h, double *out_norm);

// Ascending eigenvalues including the identity offset. Needs room for
// `2^n` values; `written` receives the required count either way.
enum FpStatus fp_hamiltonian_spectrum(const struct FpHamiltonian *h,
                                      double *out_values,
                                      size_t cap,
                                      size_t *written);

// Defaults for `h`: 6 ancillas, 4 Trotter steps, 1000 shots, seed 0,
// Trotter mode, system in `|0...0>`.
enum FpStatus fp_qpe_options_default(const struct FpHamiltonian *h, struct FpQpeOptions *out_opts);

// Runs seeded QPE and reports the most frequent bin: its energy (offset
// included) and empirical frequency.
enum FpStatus fp_qpe_peak(const struct FpHamiltonian *h,
                          const struct FpQpeOptions *opts,
                          double *out_energy,
                          double *out_frequency);

// Repeat-until-success QPE preparation of the ground state of `h`: repeats
// seeded readouts until the bin nearest the exact ground energy appears and
// returns the collapsed system register. `max_attempts = 0` selects the
// default budget.
enum FpStatus fp_qpe_prepare_ground(const struct FpHamiltonian *h,
                                    const struct FpQpeOptions *opts,
                                    size_t max_attempts,
                                    struct FpStatevector **out_state,
                                    size_t *out_attempts);

// Builds a state from `2^n` amplitudes split into real and imaginary
// arrays; the norm must be 1 within 1e-10.
enum FpStatus fp_statevector_new(const double *re,
                                 const double *im,
                                 size_t len,
                                 struct FpStatevector **out_state);

// Releases a statevector; null is a no-op.
void fp_statevector_free(struct FpStatevector *s);

enum FpStatus fp_statevector_n_qubits(const struct FpStatevector *s, size_t *out_n);

// Copies the `2^n` amplitudes out; `written` receives the required count.
enum FpStatus fp_statevector_amplitudes(const struct FpStatevector *s,
                                        double *out_re,
                                        double *out_im,
                                        size_t cap,
                                        size_t *written);

// `<psi|H|psi>` including the identity offset.
enum FpStatus fp_statevector_expectation(const struct FpStatevector *s,
                                         const struct FpHamiltonian *h,
                                         double *out_energy);

// CNOT-equivalent count of the compiled direct initializer for `s`.
enum FpStatus fp_direct_init_cnots(const struct FpStatevector *s, uint64_t *out_cnots);

// Closed-form CNOT count of direct initialization on `n_qubits`.
enum FpStatus fp_di_cnot_count(uint32_t n_qubits, uint64_t *out_cnots);

// Closed-form CNOT count of QPE with `n_u` CNOTs per Trotter step.
enum FpStatus fp_qpe_cnot_count(uint64_t n_u,
                                uint64_t n_trotter,
                                uint32_t n_ancilla,
                                uint64_t *out_cnots);

// Prony fit of order `order` to `len` autocorrelation samples taken at
// spacing `tau` under `U = e^{iHb}`. Components come out sorted by
// descending weight magnitude; `written` receives their count.
enum FpStatus fp_prony_fit(const double *re,
                           const double *im,
                           size_t len,
                           double tau,
                           double b,
                           size_t order,
                           double *out_energy,
                           double *out_weight_re,
                           double *out_weight_im,
                           size_t cap,
                           size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAGPREP_H */
