#ifndef GPK_H
#define GPK_H

/* C interface to the partitioned-system Krylov solvers. All handles are
 * opaque and owned by the caller once returned. Functions that can fail
 * return a gpk_status; the message of the last failure on the calling
 * thread is available from gpk_last_error(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(GPK_BUILDING)
#define GPK_API __declspec(dllexport)
#else
#define GPK_API __declspec(dllimport)
#endif
#else
#define GPK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct gpk_matrix gpk_matrix;
typedef struct gpk_system gpk_system;
typedef struct gpk_result gpk_result;

typedef enum gpk_status {
  GPK_OK = 0,
  GPK_ERR_NULL = 1,       /* a required pointer was NULL */
  GPK_ERR_USAGE = 2,      /* invalid argument or option */
  GPK_ERR_DIMENSION = 3,  /* incompatible shapes */
  GPK_ERR_SIZE_GUARD = 4, /* problem too large for a dense operation */
  GPK_ERR_PARSE = 5,
  GPK_ERR_IO = 6,
  GPK_ERR_NUMERIC = 7,    /* singular or rank-deficient input */
  GPK_ERR_INTERNAL = 8
} gpk_status;

typedef enum gpk_method {
  GPK_METHOD_GPBILQ = 0,
  GPK_METHOD_GPBICG = 1,
  GPK_METHOD_GPQMR = 2,
  GPK_METHOD_GPMR = 3,
  GPK_METHOD_GPMR_RESTARTED = 4
} gpk_method;

typedef enum gpk_termination {
  GPK_CONVERGED = 0,
  GPK_MAX_ITERATIONS = 1,
  GPK_BREAKDOWN = 2
} gpk_termination;

typedef enum gpk_residual_policy {
  GPK_RESIDUAL_ESTIMATE = 0,
  GPK_RESIDUAL_EXPLICIT = 1
} gpk_residual_policy;

typedef struct gpk_solve_options {
  double tol;      /* absolute tolerance on the residual norm */
  size_t maxit;
  gpk_residual_policy residual;
  size_t restart;  /* GPMR(r) cycle length */
} gpk_solve_options;

typedef struct gpk_iteration {
  size_t k;
  double est_residual;
  double true_residual; /* NaN unless the explicit policy was used */
  int transfer_defined;
  double elapsed_s;
} gpk_iteration;

GPK_API const char* gpk_version(void);
GPK_API const char* gpk_last_error(void);
GPK_API const char* gpk_status_string(gpk_status status);

GPK_API const char* gpk_method_name(gpk_method method);
/* Accepts the lowercase names, plus "gpmr(r)" which also sets *restart when non-NULL. */
GPK_API gpk_status gpk_method_parse(const char* name, gpk_method* out, size_t* restart);

GPK_API void gpk_solve_options_init(gpk_solve_options* opts);

/* Matrices. Indices are 0-based. */
GPK_API gpk_status gpk_matrix_from_triplets(size_t rows, size_t cols, size_t nnz,
                                            const size_t* row, const size_t* col,
                                            const double* val, gpk_matrix** out);
GPK_API gpk_status gpk_matrix_from_dense(size_t rows, size_t cols, const double* col_major,
                                         gpk_matrix** out);
GPK_API gpk_status gpk_matrix_read_mtx(const char* path, gpk_matrix** out);
GPK_API gpk_status gpk_matrix_write_mtx(const gpk_matrix* M, const char* path);
GPK_API gpk_status gpk_matrix_transpose(const gpk_matrix* M, gpk_matrix** out);
GPK_API size_t gpk_matrix_rows(const gpk_matrix* M);
GPK_API size_t gpk_matrix_cols(const gpk_matrix* M);
GPK_API size_t gpk_matrix_nnz(const gpk_matrix* M);
/* Dense column-major copy into buf of length rows * cols. */
GPK_API gpk_status gpk_matrix_to_dense(const gpk_matrix* M, double* buf, size_t len);
GPK_API void gpk_matrix_free(gpk_matrix* M);

/* Systems [lambda I, A; B, mu I][x; y] = [b; c]. The matrices are copied.
 * f and g may be NULL, meaning f = b and g = c. */
GPK_API gpk_status gpk_system_create(const gpk_matrix* A, const gpk_matrix* B, double lambda,
                                     double mu, const double* b, const double* c,
                                     const double* f, const double* g, gpk_system** out);
/* Right-hand sides chosen so that x = 1, y = 1 solves the system. */
GPK_API gpk_status gpk_system_unit_solution(const gpk_matrix* A, const gpk_matrix* B,
                                            double lambda, double mu, gpk_system** out);
GPK_API gpk_status gpk_system_random(size_t m, size_t n, double lambda, double mu,
                                     uint64_t seed, int symmetric_coupling, gpk_system** out);
/* Named benchmark system loaded from dir; NaN lambda or mu selects the default. */
GPK_API gpk_status gpk_system_experiment(const char* name, const char* dir, double lambda,
                                         double mu, gpk_system** out);
/* Replaces the shadow vectors; NULL keeps the current one. */
GPK_API gpk_status gpk_system_set_shadows(gpk_system* sys, const double* f, const double* g);
GPK_API size_t gpk_system_m(const gpk_system* sys);
GPK_API size_t gpk_system_n(const gpk_system* sys);
GPK_API gpk_status gpk_system_residual_norm(const gpk_system* sys, const double* x,
                                            const double* y, double* out);
GPK_API void gpk_system_free(gpk_system* sys);

/* Solving. opts may be NULL for the defaults. */
GPK_API gpk_status gpk_solve(const gpk_system* sys, gpk_method method,
                             const gpk_solve_options* opts, gpk_result** out);
GPK_API gpk_method gpk_result_method(const gpk_result* r);
GPK_API gpk_termination gpk_result_termination(const gpk_result* r);
GPK_API size_t gpk_result_iterations(const gpk_result* r);
GPK_API double gpk_result_residual(const gpk_result* r);
GPK_API int gpk_result_bicg_defined(const gpk_result* r);
GPK_API const char* gpk_result_reason(const gpk_result* r);
GPK_API gpk_status gpk_result_solution(const gpk_result* r, double* x, size_t m, double* y,
                                       size_t n);
GPK_API size_t gpk_result_history_length(const gpk_result* r);
GPK_API gpk_status gpk_result_history(const gpk_result* r, size_t i, gpk_iteration* out);
GPK_API gpk_status gpk_result_write_csv(const gpk_result* r, const char* path);
GPK_API void gpk_result_free(gpk_result* r);

/* Several results side by side: a wide CSV or a log-scale SVG plot. */
GPK_API gpk_status gpk_write_wide_csv(const gpk_result* const* results, const char* const* names,
                                      size_t count, const char* path);
GPK_API gpk_status gpk_write_svg(const gpk_result* const* results, const char* const* names,
                                 size_t count, const char* title, const char* path);

/* Invariant suite on seeded random systems of order size x size. The table
 * is returned in *table (release with gpk_string_free) when table is non-NULL. */
GPK_API gpk_status gpk_check_run(size_t size, uint64_t seed, int force_breakdown,
                                 int* all_passed, char** table);
GPK_API void gpk_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* GPK_H */
