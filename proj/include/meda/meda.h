/* meda — marginalized denoising domain adaptation library.
 *
 * C interface over the C++ core: dense linear algebra (Schur,
 * Bartels-Stewart Sylvester), closed-form dropout marginalization, the
 * denoiser/classifier model family, downstream classifiers and the
 * experiment harness.
 *
 * Conventions:
 *   - every fallible call returns meda_status; MEDA_OK is 0
 *   - on failure, meda_last_error() returns a thread-local message
 *   - objects returned through **out parameters are owned by the caller and
 *     released with the matching *_free function
 *   - matrices are dense row-major doubles
 */

#ifndef MEDA_H
#define MEDA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum meda_status {
    MEDA_OK = 0,
    MEDA_ERR_INVALID_ARGUMENT,
    MEDA_ERR_DIMENSION_MISMATCH,
    MEDA_ERR_LENGTH_MISMATCH,
    MEDA_ERR_NOT_FINITE,
    MEDA_ERR_SINGULAR_MATRIX,
    MEDA_ERR_CONVERGENCE_FAILURE,
    MEDA_ERR_SPECTRUM_OVERLAP,
    MEDA_ERR_DIMENSION_TOO_LARGE,
    MEDA_ERR_EMPTY_DOMAIN,
    MEDA_ERR_NO_SHARED_CLASSES,
    MEDA_ERR_NON_DECREASING_LOSS,
    MEDA_ERR_PARSE,
    MEDA_ERR_INCONSISTENT_WIDTH,
    MEDA_ERR_NEGATIVE_INDEX,
    MEDA_ERR_LABEL_OUT_OF_RANGE,
    MEDA_ERR_INSUFFICIENT_TARGET_LABELS,
    MEDA_ERR_EMPTY_TRAINING_SET,
    MEDA_ERR_EMPTY_CLASS,
    MEDA_ERR_IO,
    MEDA_ERR_UNKNOWN
} meda_status;

const char* meda_status_name(meda_status status);
const char* meda_last_error(void);
const char* meda_version(void);
void meda_string_free(char* s);

/* ------------------------------------------------------------------ */
/* dense matrices                                                      */
/* ------------------------------------------------------------------ */

typedef struct meda_mat meda_mat;

/* data may be NULL for a zero matrix; otherwise rows*cols row-major doubles */
meda_status meda_mat_create(size_t rows, size_t cols, const double* data, meda_mat** out);
void meda_mat_free(meda_mat* m);
size_t meda_mat_rows(const meda_mat* m);
size_t meda_mat_cols(const meda_mat* m);
double meda_mat_get(const meda_mat* m, size_t i, size_t j);
meda_status meda_mat_copy_data(const meda_mat* m, double* out);

/* ------------------------------------------------------------------ */
/* linear algebra kernels                                              */
/* ------------------------------------------------------------------ */

meda_status meda_solve_linear(const meda_mat* a, const meda_mat* b, meda_mat** out);
meda_status meda_schur_decompose(const meda_mat* a, meda_mat** q_out, meda_mat** t_out);
meda_status meda_solve_sylvester(const meda_mat* a, const meda_mat* b, const meda_mat* c,
                                 meda_mat** out);
meda_status meda_sylvester_oracle_kron(const meda_mat* a, const meda_mat* b, const meda_mat* c,
                                       meda_mat** out);

/* ------------------------------------------------------------------ */
/* dropout marginalization                                             */
/* ------------------------------------------------------------------ */

/* domain tags: 0 = source, 1 = target. labels: class ids, -1 = unlabeled. */

meda_status meda_scatter(const meda_mat* x, meda_mat** out);
meda_status meda_expected_p(const meda_mat* s, double p, meda_mat** out);
meda_status meda_expected_q(const meda_mat* s, double p, meda_mat** out);
meda_status meda_mmd_coupling(const int* domain_tags, size_t n, meda_mat** out);
meda_status meda_class_coupling(const int* domain_tags, const int* labels, size_t n, meda_mat** out);

/* rule: 0 = exact expectation, 1 = simplified scatter rule ("paper") */
meda_status meda_expected_coupled_q(const meda_mat* x, const int* domain_tags, const int* labels,
                                    double p, int rule, meda_mat** out);
meda_status meda_coupling_quadratic(const meda_mat* x, const int* domain_tags, const int* labels,
                                    double* out);
meda_status meda_corrupt(const meda_mat* x, double p, uint64_t seed, meda_mat** out);

/* ------------------------------------------------------------------ */
/* datasets and adaptation scenarios                                   */
/* ------------------------------------------------------------------ */

typedef struct meda_dataset meda_dataset;

/* format: 0 = autodetect, 1 = dense csv, 2 = sparse idx:val */
meda_status meda_dataset_load(const char* path, int format, meda_dataset** out);
meda_status meda_dataset_create(size_t rows, size_t cols, const double* features, const int* labels,
                                const char* domain, meda_dataset** out);
void meda_dataset_free(meda_dataset* ds);
size_t meda_dataset_rows(const meda_dataset* ds);
size_t meda_dataset_dim(const meda_dataset* ds);
int meda_dataset_class_count(const meda_dataset* ds);
meda_status meda_dataset_save_dense(const meda_dataset* ds, const char* path);

meda_status meda_synth_shift(uint64_t seed, size_t d, int class_count, size_t n_per_class,
                             double shift_magnitude, double rotation_angle, meda_dataset** source_out,
                             meda_dataset** target_out);

typedef struct meda_split meda_split;

/* scenario: 0 = us, 1 = sup, 2 = ss */
meda_status meda_build_scenario(const meda_dataset* source, const meda_dataset* target, int scenario,
                                size_t labeled_per_class, uint64_t seed, meda_split** out);
void meda_split_free(meda_split* sp);
size_t meda_split_train_rows(const meda_split* sp);
size_t meda_split_labeled_rows(const meda_split* sp);
size_t meda_split_test_rows(const meda_split* sp);

/* ------------------------------------------------------------------ */
/* model fitting                                                       */
/* ------------------------------------------------------------------ */

enum {
    MEDA_MODEL_BL = 0,
    MEDA_MODEL_S1,
    MEDA_MODEL_S1M,
    MEDA_MODEL_S1C,
    MEDA_MODEL_S1D,
    MEDA_MODEL_J12,
    MEDA_MODEL_J12M,
    MEDA_MODEL_J12C,
    MEDA_MODEL_J12D
};

typedef struct meda_model_params {
    int model;          /* MEDA_MODEL_* */
    double p;           /* dropout probability */
    double lambda;      /* class-loss weight */
    double gamma;       /* domain-loss weight */
    double omega;       /* denoiser norm regularizer */
    double delta;       /* classifier norm regularizer */
    double alpha;       /* domain-classifier norm regularizer */
    int max_iters;
    double rel_tol;
    int coupling_rule;  /* 0 exact, 1 simplified ("paper") */
} meda_model_params;

void meda_model_params_init(meda_model_params* params);

typedef struct meda_fit_result meda_fit_result;

meda_status meda_fit(const meda_model_params* params, const meda_split* split, meda_fit_result** out);
void meda_fit_result_free(meda_fit_result* res);
meda_status meda_fit_result_w(const meda_fit_result* res, meda_mat** out);
/* *out is set to NULL when the model carries no jointly learned classifier */
meda_status meda_fit_result_classifier(const meda_fit_result* res, meda_mat** out);
int meda_fit_result_iterations(const meda_fit_result* res);
int meda_fit_result_converged(const meda_fit_result* res);
size_t meda_fit_result_trace_len(const meda_fit_result* res);
meda_status meda_fit_result_trace(const meda_fit_result* res, double* out);

meda_status meda_fit_ridge(const meda_mat* w, const meda_mat* x_l, const meda_mat* y_l, double p,
                           double delta, meda_mat** out);
meda_status meda_fit_domain_classifier(const meda_mat* x, const int* domain_tags, double alpha,
                                       meda_mat** out);
meda_status meda_expected_loss(const meda_model_params* params, const meda_split* split,
                               const meda_mat* w, const meda_mat* z, double* out);
meda_status meda_loss_gradients(const meda_model_params* params, const meda_split* split,
                                const meda_mat* w, const meda_mat* z, meda_mat** dw_out,
                                meda_mat** dz_out);

/* ------------------------------------------------------------------ */
/* downstream classifiers                                              */
/* ------------------------------------------------------------------ */

meda_status meda_predict_linear(const meda_mat* x, const meda_mat* z, int* labels_out);
meda_status meda_nn_classify(const meda_mat* train_x, const int* train_labels, const meda_mat* test_x,
                             int* labels_out);
meda_status meda_dscm_classify(const meda_mat* train_x, const int* train_labels,
                               const int* train_domains, int class_count, const meda_mat* test_x,
                               double sigma, int* labels_out);
meda_status meda_accuracy(const int* predicted, const int* truth, size_t n, double* out);
meda_status meda_make_label_matrix(const int* labels, size_t n, int class_count, meda_mat** out);
meda_status meda_standardize(const meda_mat* stats_from, const meda_mat* apply_to, meda_mat** out);

/* ------------------------------------------------------------------ */
/* experiment harness                                                  */
/* ------------------------------------------------------------------ */

typedef struct meda_config meda_config;

meda_status meda_config_create(meda_config** out);
meda_status meda_config_load(const char* path, meda_config** out);
/* keys match the config file: scenario, models, classifiers, seeds, noise,
 * lambda, gamma, omega, delta, alpha, max_iters, rel_tol, coupling_rule,
 * labeled_per_class, standardize, add_bias, timing, sigma, format, output,
 * and domain.<name> = <path> */
meda_status meda_config_set(meda_config* cfg, const char* key, const char* value);
void meda_config_free(meda_config* cfg);

/* report_out receives a malloc'd report (meda_string_free); ok_out is 1 when
 * no violation was found */
meda_status meda_validate(const meda_config* cfg, char** report_out, int* ok_out);

/* runs the full grid and writes records.csv / aggregate.txt under the
 * configured output directory; failed_cells_out counts failing cells */
meda_status meda_run(const meda_config* cfg, int* failed_cells_out);

/* comma-separated grids; NULL or "" keeps the configured value fixed */
meda_status meda_sweep(const meda_config* cfg, const char* lambda_grid, const char* gamma_grid,
                       const char* noise_grid);

/* writes source.csv and target.csv under out_dir */
meda_status meda_synth_write(uint64_t seed, size_t d, int class_count, size_t n_per_class,
                             double shift_magnitude, double rotation_angle, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* MEDA_H */
