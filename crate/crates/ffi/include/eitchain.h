#ifndef EITCHAIN_H
#define EITCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum EitStatus {
  EIT_STATUS_OK = 0,
  EIT_STATUS_NULL_POINTER = 1,
  EIT_STATUS_INVALID_PARAMETER = 2,
  EIT_STATUS_INVALID_REGIME = 3,
  EIT_STATUS_DEGENERATE_POLE = 4,
  EIT_STATUS_SINGULAR = 5,
  EIT_STATUS_QUADRATURE_FAILURE = 6,
  EIT_STATUS_DEGENERATE_FIT = 7,
  EIT_STATUS_PANIC = 8,
} EitStatus;

// How disorder perturbs each realization.
typedef enum EitDisorderKind {
  // Gaussian positions around the lattice sites; `mean` is the lattice constant.
  EIT_DISORDER_KIND_POSITION = 0,
  // Gaussian shift of every atom's transition frequencies.
  EIT_DISORDER_KIND_FREQUENCY = 1,
} EitDisorderKind;

// Opaque chain of atoms.
typedef struct EitChain EitChain;

// Waveguide dispersion; `v_l = 0` selects a chiral waveguide.
typedef struct EitWaveguide {
  double v_r;
  double v_l;
  double omega0;
  double wavelength;
} EitWaveguide;

// One driven Λ-type atom.
typedef struct EitAtom {
  double omega2;
  double omega3;
  double rabi;
  double gamma2;
  double gamma_r;
  double gamma_l;
  // In units of the wavelength.
  double position;
} EitAtom;

typedef struct EitScatter {
  double transmission;
  double reflection;
  // Finite even when the transmission underflows.
  double ln_transmission;
} EitScatter;

typedef struct EitEnsembleStats {
  size_t realizations;
  double mean_t;
  double stderr_t;
  double mean_ln_t;
  double stderr_ln_t;
  double xi_fixed_n;
  size_t excluded;
  size_t underflows;
} EitEnsembleStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *eit_version(void);

// Message of the last failure on this thread, or an empty string.
// The pointer stays valid until the next failing call on the same thread.
const char *eit_last_error_message(void);

// Symmetric waveguide with v_R = v_L = 1 and λ = 2π.
struct EitWaveguide eit_waveguide_symmetric(void);

// Chiral waveguide with v_R = 1 and λ = 2π.
struct EitWaveguide eit_waveguide_chiral(void);

// Empty chain with mean spacing `lattice_constant` (units of λ).
//
// # Safety
// `out` must be valid for writes. The handle written there must be released
// with [`eit_chain_free`].
enum EitStatus eit_chain_new(double lattice_constant, struct EitChain **out);

// `n` copies of `atom` at positions j·L, j = 1..=n.
//
// # Safety
// `atom` must be valid for reads and `out` for writes.
enum EitStatus eit_chain_periodic(const struct EitAtom *atom,
                                  size_t n,
                                  double lattice_constant,
                                  struct EitChain **out);

// Releases a chain. Null is ignored.
//
// # Safety
// `chain` must come from this library and not be used afterwards.
void eit_chain_free(struct EitChain *chain);

// Appends an atom; positions must stay strictly increasing.
//
// # Safety
// `chain` must be a live handle and `atom` valid for reads.
enum EitStatus eit_chain_push_atom(struct EitChain *chain, const struct EitAtom *atom);

// Number of atoms, or 0 for a null handle.
//
// # Safety
// `chain` must be null or a live handle.
size_t eit_chain_len(const struct EitChain *chain);

// Transmission of a chain in a chiral waveguide.
//
// # Safety
// `chain` must be a live handle and `transmission` valid for writes.
enum EitStatus eit_chiral_transmission(const struct EitChain *chain,
                                       double omega,
                                       double *transmission);

// Transmission and reflection of a chain in a bidirectional waveguide.
//
// # Safety
// `chain` and `waveguide` must be valid for reads and `out` for writes.
enum EitStatus eit_chain_scatter(const struct EitChain *chain,
                                 const struct EitWaveguide *waveguide,
                                 double omega,
                                 struct EitScatter *out);

// Gaussian average of the single-atom chiral transmission.
//
// # Safety
// `out` must be valid for writes.
enum EitStatus eit_avg_tau_sq(double mean_delta2,
                              double sigma,
                              double rabi,
                              double gamma2,
                              double gamma,
                              double *out);

// Inverse localization length of a chiral chain at critical coupling.
//
// # Safety
// `out` must be valid for writes.
enum EitStatus eit_xi_inverse(double mean_delta2,
                              double sigma,
                              double rabi,
                              double gamma2,
                              double gamma,
                              double *out);

// cos(KL) of a lossless periodic chain in a symmetric waveguide.
//
// # Safety
// `atom` and `waveguide` must be valid for reads and `out` for writes.
enum EitStatus eit_cos_kl_symmetric(const struct EitAtom *atom,
                                    const struct EitWaveguide *waveguide,
                                    double omega,
                                    double lattice_constant,
                                    double *out);

// Disorder ensemble around `chain`. Results depend only on the inputs and
// `seed`, not on the number of worker threads.
//
// # Safety
// `chain` and `waveguide` must be valid for reads and `out` for writes.
enum EitStatus eit_run_ensemble(const struct EitChain *chain,
                                const struct EitWaveguide *waveguide,
                                enum EitDisorderKind kind,
                                double mean,
                                double sigma,
                                double omega,
                                size_t realizations,
                                uint64_t seed,
                                struct EitEnsembleStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EITCHAIN_H */
