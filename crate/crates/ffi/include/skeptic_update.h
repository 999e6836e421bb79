/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SKEPTIC_UPDATE_H
#define SKEPTIC_UPDATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum SuStatus {
  SU_STATUS_OK = 0,
  SU_STATUS_NULL_POINTER = 1,
  SU_STATUS_INVALID_ARGUMENT = 2,
  SU_STATUS_DATA_ERROR = 3,
  SU_STATUS_ESTIMATION_ERROR = 4,
  SU_STATUS_SIMULATION_ERROR = 5,
  SU_STATUS_PANIC = 6,
} SuStatus;

typedef enum SuModel {
  SU_MODEL_TOBIT = 0,
  SU_MODEL_HURDLE = 1,
  SU_MODEL_LINEAR = 2,
} SuModel;

typedef enum SuLink {
  SU_LINK_PROBIT = 0,
  SU_LINK_LOGIT = 1,
} SuLink;

/*
 Probit or logit fit of Change.
 */
typedef struct SuBinaryFit SuBinaryFit;

/*
 Survey rows, valid and invalid.
 */
typedef struct SuDataset SuDataset;

/*
 Generalized Tobit fit.
 */
typedef struct SuTobitFit SuTobitFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *su_version(void);

/*
 Message of the last failed call on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *su_last_error_message(void);

void su_clear_last_error(void);

/*
 Posterior mean `N/(c+N)·π* + c/(c+N)·π0` with shock weight `N` and prior
 concentration `c = α + β`.

 # Safety
 `out` must be NULL or point to writable memory for one double.
 */
enum SuStatus su_posterior_mean_structural(double pi0,
                                           double pi_star,
                                           double weight,
                                           double concentration,
                                           double *out);

/*
 Posterior mean `(1 + 1/η)⁻¹·π* + (1 + η)⁻¹·π0` for informational quality `η`.

 # Safety
 `out` must be NULL or point to writable memory for one double.
 */
enum SuStatus su_posterior_mean_quality(double pi0, double pi_star, double eta, double *out);

/*
 Loads a survey CSV. With `strict` non-zero, any invariant violation fails
 the load; otherwise offending rows are kept but excluded from analyses.

 # Safety
 `path` must be NULL or a NUL-terminated string; `out` must be NULL or
 point to writable memory for one pointer.
 */
enum SuStatus su_dataset_load(const char *path, int32_t strict, struct SuDataset **out);

/*
 Draws a synthetic survey with the default planted parameters.

 # Safety
 `out` must be NULL or point to writable memory for one pointer.
 */
enum SuStatus su_simulate(enum SuModel model, size_t n, uint64_t seed, struct SuDataset **out);

/*
 # Safety
 `data` must be NULL or a handle from this library not yet freed.
 */
void su_dataset_free(struct SuDataset *data);

/*
 Number of rows, valid or not; 0 for NULL.

 # Safety
 `data` must be NULL or a live handle.
 */
size_t su_dataset_len(const struct SuDataset *data);

/*
 Number of rows that passed validation; 0 for NULL.

 # Safety
 `data` must be NULL or a live handle.
 */
size_t su_dataset_n_valid(const struct SuDataset *data);

/*
 Generalized Tobit of `Prior − Post` on Prior and the comma-separated
 covariates, after listwise deletion.

 # Safety
 `data` must be NULL or a live handle, `covariates` NULL or a
 NUL-terminated string, `out` NULL or writable.
 */
enum SuStatus su_fit_tobit(const struct SuDataset *data,
                           const char *covariates_csv,
                           struct SuTobitFit **out);

/*
 # Safety
 `fit` must be NULL or a handle from this library not yet freed.
 */
void su_tobit_free(struct SuTobitFit *fit);

/*
 γ of the latent posterior `Post* = γ·Prior + Xδ + u` and its standard error.

 # Safety
 `fit` must be NULL or a live handle; `estimate` and `std_error` NULL or writable.
 */
enum SuStatus su_tobit_gamma(const struct SuTobitFit *fit, double *estimate, double *std_error);

/*
 σ of the latent error and its standard error.

 # Safety
 As [`su_tobit_gamma`].
 */
enum SuStatus su_tobit_sigma(const struct SuTobitFit *fit, double *estimate, double *std_error);

/*
 Number of δ coefficients, intercept included; 0 for NULL.

 # Safety
 `fit` must be NULL or a live handle.
 */
size_t su_tobit_num_delta(const struct SuTobitFit *fit);

/*
 δ coefficient `index` (intercept first) with its standard error.

 # Safety
 As [`su_tobit_gamma`].
 */
enum SuStatus su_tobit_delta(const struct SuTobitFit *fit,
                             size_t index,
                             double *estimate,
                             double *std_error);

/*
 Name of δ coefficient `index`, or NULL. Owned by the fit.

 # Safety
 `fit` must be NULL or a live handle.
 */
const char *su_tobit_delta_name(const struct SuTobitFit *fit, size_t index);

/*
 Observations, censored observations and log-likelihood.

 # Safety
 `fit` must be NULL or a live handle; outputs NULL or writable.
 */
enum SuStatus su_tobit_summary(const struct SuTobitFit *fit,
                               size_t *n,
                               size_t *n_censored,
                               double *log_likelihood);

/*
 Probit or logit of Change on an intercept, Prior and the comma-separated
 covariates.

 # Safety
 As [`su_fit_tobit`].
 */
enum SuStatus su_fit_binary(const struct SuDataset *data,
                            const char *covariates_csv,
                            enum SuLink link,
                            struct SuBinaryFit **out);

/*
 # Safety
 `fit` must be NULL or a handle from this library not yet freed.
 */
void su_binary_free(struct SuBinaryFit *fit);

/*
 Number of coefficients, intercept included; 0 for NULL.

 # Safety
 `fit` must be NULL or a live handle.
 */
size_t su_binary_num_coefficients(const struct SuBinaryFit *fit);

/*
 Coefficient `index` (intercept first) with its standard error.

 # Safety
 `fit` must be NULL or a live handle; outputs NULL or writable.
 */
enum SuStatus su_binary_coefficient(const struct SuBinaryFit *fit,
                                    size_t index,
                                    double *estimate,
                                    double *std_error);

/*
 Name of coefficient `index`, or NULL. Owned by the fit.

 # Safety
 `fit` must be NULL or a live handle.
 */
const char *su_binary_coefficient_name(const struct SuBinaryFit *fit, size_t index);

/*
 Share of valid rows whose Change is predicted correctly when Change = 1
 is predicted at fitted probability `>= threshold`.

 # Safety
 `fit` and `data` must be NULL or live handles; `success_rate` NULL or writable.
 */
enum SuStatus su_binary_success_rate(const struct SuBinaryFit *fit,
                                     const struct SuDataset *data,
                                     double threshold,
                                     double *success_rate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEPTIC_UPDATE_H */
