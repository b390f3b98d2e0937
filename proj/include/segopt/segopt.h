/* segopt -- binary segmentation energies with non-linear regional terms,
 * optimized by level-set gradient descent or graph-cut fast trust region.
 *
 * C API over the C++ core: opaque handles, status codes, thread-local error
 * messages. Every function returns SEGOPT_OK on success; on failure the
 * output parameters are left untouched and segopt_last_error() describes
 * what went wrong on the calling thread.
 */
#ifndef SEGOPT_H
#define SEGOPT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum segopt_status {
  SEGOPT_OK = 0,
  SEGOPT_ERROR_INVALID_ARGUMENT = 1,
  SEGOPT_ERROR_DIMENSION_MISMATCH = 2,
  SEGOPT_ERROR_IO = 3,
  SEGOPT_ERROR_DEGENERATE_MASK = 4,
  SEGOPT_ERROR_NUMERIC = 5,
  SEGOPT_ERROR_STATE = 6,
  SEGOPT_ERROR_UNSUPPORTED = 7,
  SEGOPT_ERROR_INTERNAL = 8
} segopt_status;

typedef enum segopt_run_status {
  SEGOPT_RUN_CONVERGED = 0,
  SEGOPT_RUN_CAPPED = 1,
  SEGOPT_RUN_STALLED = 2,
  SEGOPT_RUN_ABORTED = 3
} segopt_run_status;

const char* segopt_version(void);
const char* segopt_status_name(segopt_status status);
/* Message of the last failing call on this thread; empty string if none. */
const char* segopt_last_error(void);

typedef struct segopt_image segopt_image;
typedef struct segopt_labeling segopt_labeling;
typedef struct segopt_field segopt_field;
typedef struct segopt_histogram segopt_histogram;
typedef struct segopt_model segopt_model;
typedef struct segopt_energy segopt_energy;
typedef struct segopt_flow segopt_flow;
typedef struct segopt_trace segopt_trace;

/* ------------------------------------------------------------------ image */

/* channels is 1 or 3; data (optional) is row-major, channel-interleaved,
 * width*height*channels doubles. */
segopt_status segopt_image_create(uint32_t width, uint32_t height,
                                  uint32_t channels, const double* data,
                                  segopt_image** out);
segopt_status segopt_image_load(const char* path, segopt_image** out);
segopt_status segopt_image_save(const segopt_image* img, const char* path);
void segopt_image_destroy(segopt_image* img);
uint32_t segopt_image_width(const segopt_image* img);
uint32_t segopt_image_height(const segopt_image* img);
uint32_t segopt_image_channels(const segopt_image* img);
segopt_status segopt_image_data(const segopt_image* img, double* buffer,
                                size_t buffer_len);

/* --------------------------------------------------------------- labeling */

/* mask (optional) is width*height bytes, nonzero = inside. */
segopt_status segopt_labeling_create(uint32_t width, uint32_t height,
                                     const uint8_t* mask,
                                     segopt_labeling** out);
segopt_status segopt_labeling_load(const char* path, segopt_labeling** out);
segopt_status segopt_labeling_save(const segopt_labeling* s, const char* path);
void segopt_labeling_destroy(segopt_labeling* s);
uint32_t segopt_labeling_width(const segopt_labeling* s);
uint32_t segopt_labeling_height(const segopt_labeling* s);
uint64_t segopt_labeling_area(const segopt_labeling* s);
segopt_status segopt_labeling_data(const segopt_labeling* s, uint8_t* buffer,
                                   size_t buffer_len);

/* ------------------------------------------------------------------ field */

segopt_status segopt_field_create(uint32_t width, uint32_t height,
                                  const double* values, segopt_field** out);
segopt_status segopt_field_load(const char* path, segopt_field** out);
segopt_status segopt_field_save(const segopt_field* f, const char* path);
void segopt_field_destroy(segopt_field* f);
uint32_t segopt_field_width(const segopt_field* f);
uint32_t segopt_field_height(const segopt_field* f);
segopt_status segopt_field_data(const segopt_field* f, double* buffer,
                                size_t buffer_len);

/* Exact signed distance to the half-pixel boundary; negative inside.
 * degenerate (optional) is set to 1 when the mask has no boundary. */
segopt_status segopt_signed_distance(const segopt_labeling* s, int* degenerate,
                                     segopt_field** out);
/* <f,S>: sum of the field over the set pixels. */
segopt_status segopt_linear_sum(const segopt_field* f,
                                const segopt_labeling* s, double* out);

/* -------------------------------------------------------------- histogram */

segopt_status segopt_bin_counts(const segopt_image* img,
                                const segopt_labeling* s, uint32_t bins,
                                segopt_histogram** out);
segopt_status segopt_histogram_load(const char* path, segopt_histogram** out);
segopt_status segopt_histogram_save(const segopt_histogram* h,
                                    const char* path);
void segopt_histogram_destroy(segopt_histogram* h);
uint32_t segopt_histogram_channels(const segopt_histogram* h);
uint32_t segopt_histogram_bins(const segopt_histogram* h);
segopt_status segopt_histogram_value(const segopt_histogram* h,
                                     uint32_t channel, uint32_t bin,
                                     double* out);
segopt_status segopt_histogram_normalize(segopt_histogram* h);

/* ----------------------------------------------------- regional functionals */

segopt_status segopt_model_volume(double v0, segopt_model** out);
/* count targets given as parallel arrays of p, q and target values. */
segopt_status segopt_model_moments(const int32_t* p, const int32_t* q,
                                   const double* value, size_t count,
                                   int32_t order, segopt_model** out);
segopt_status segopt_model_l2_bins(const segopt_histogram* target,
                                   segopt_model** out);
segopt_status segopt_model_kl(const segopt_histogram* target,
                              segopt_model** out);
segopt_status segopt_model_bhattacharyya(const segopt_histogram* target,
                                         segopt_model** out);
void segopt_model_destroy(segopt_model* m);
/* R(S) = F(<f_1,S>,...,<f_k,S>). */
segopt_status segopt_model_evaluate(const segopt_model* m,
                                    const segopt_image* img,
                                    const segopt_labeling* s, double* out);
/* Per-pixel first-order derivative field of R at S. */
segopt_status segopt_model_gradient(const segopt_model* m,
                                    const segopt_image* img,
                                    const segopt_labeling* s,
                                    segopt_field** out);
/* Log-likelihood appearance unary from normalized fg/bg histograms. */
segopt_status segopt_loglikelihood_field(const segopt_image* img,
                                         const segopt_histogram* fg,
                                         const segopt_histogram* bg,
                                         segopt_field** out);

/* ----------------------------------------------------------------- energy */

typedef struct segopt_energy_report {
  double total;
  double regional;
  double unary;
  double length_cont;
  double length_crofton;
  uint64_t evaluations; /* counter value after this evaluation */
} segopt_energy_report;

segopt_status segopt_energy_create(segopt_energy** out);
void segopt_energy_destroy(segopt_energy* e);
segopt_status segopt_energy_add_model(segopt_energy* e, const segopt_model* m,
                                      double weight);
segopt_status segopt_energy_set_unary(segopt_energy* e, const segopt_field* f,
                                      double weight);
/* use_crofton selects which length convention defines the total. */
segopt_status segopt_energy_set_length(segopt_energy* e, double weight,
                                       int use_crofton, uint32_t crofton_order,
                                       double dirac_epsilon);
/* One counted evaluation per call; the counter lives on the handle. */
segopt_status segopt_energy_evaluate(segopt_energy* e, const segopt_image* img,
                                     const segopt_labeling* s,
                                     segopt_energy_report* out);
segopt_status segopt_energy_reset_evaluations(segopt_energy* e);

/* ---------------------------------------------------------------- maxflow */

segopt_status segopt_flow_create(segopt_flow** out);
void segopt_flow_destroy(segopt_flow* f);
segopt_status segopt_flow_add_nodes(segopt_flow* f, uint32_t count,
                                    uint32_t* first_index);
segopt_status segopt_flow_add_edge(segopt_flow* f, uint32_t u, uint32_t v,
                                   double cap, double rev_cap);
/* Repeated calls accumulate. */
segopt_status segopt_flow_add_terminal(segopt_flow* f, uint32_t node,
                                       double source_cap, double sink_cap);
segopt_status segopt_flow_solve(segopt_flow* f, double* flow_value);
/* is_source_side is 1 when the node sits on the source side of the min cut;
 * requires segopt_flow_solve first. */
segopt_status segopt_flow_cut_side(const segopt_flow* f, uint32_t node,
                                   int* is_source_side);

/* ---------------------------------------------------------------- solvers */

typedef struct segopt_levelset_options {
  double dt;
  double epsilon;
  double mu;
  uint32_t max_iters;
  uint32_t convergence_window;
  double convergence_tol;
  int adaptive; /* nonzero: backtracking variant */
} segopt_levelset_options;

typedef struct segopt_ftr_options {
  double initial_radius;
  double alpha;
  double tau2;
  uint32_t max_iters;
} segopt_ftr_options;

void segopt_levelset_defaults(segopt_levelset_options* opts);
void segopt_ftr_defaults(segopt_ftr_options* opts);

/* Runs a solver on the energy (level sets use the continuous length
 * convention, FTR the Cauchy-Crofton one, regardless of the handle setting).
 * Each run owns a fresh evaluation counter; its final value is in the trace.
 * Outputs are optional except the final labeling. */
segopt_status segopt_levelset_run(const segopt_image* img,
                                  const segopt_labeling* init,
                                  const segopt_energy* energy,
                                  const segopt_levelset_options* opts,
                                  segopt_labeling** final_labeling,
                                  segopt_trace** trace,
                                  segopt_run_status* run_status);
segopt_status segopt_ftr_run(const segopt_image* img,
                             const segopt_labeling* init,
                             const segopt_energy* energy,
                             const segopt_ftr_options* opts,
                             segopt_labeling** final_labeling,
                             segopt_trace** trace,
                             segopt_run_status* run_status);

uint64_t segopt_trace_rows(const segopt_trace* t);
uint64_t segopt_trace_evaluations(const segopt_trace* t);
segopt_status segopt_trace_save_csv(const segopt_trace* t, const char* path);
void segopt_trace_destroy(segopt_trace* t);

/* ------------------------------------------------------------------ bench */

/* Writes a deterministic synthetic image (and optionally the default initial
 * mask) for the volume experiment. */
segopt_status segopt_bench_synth(uint32_t size, double v0, uint64_t seed,
                                 double noise, const char* image_path,
                                 const char* init_mask_path);
/* Rasterizes the ellipse on the image and writes <prefix>_moments.txt,
 * <prefix>_fg.txt, <prefix>_bg.txt and <prefix>_mask.pgm. */
segopt_status segopt_bench_targets(const char* image_path, double cx, double cy,
                                   double a, double b, double theta,
                                   uint32_t bins, uint32_t order,
                                   const char* out_prefix);
/* Runs a configured experiment sweep. config_path may be NULL; overrides are
 * "key=value" strings applied on top. The summary.csv path is copied into
 * summary_path_out when provided. */
segopt_status segopt_bench_run(const char* config_path,
                               const char* const* overrides, size_t n_overrides,
                               char* summary_path_out, size_t summary_path_len);
/* Compares two summary.csv files (same problem hash required) and writes
 * <prefix>.txt and <prefix>.csv. */
segopt_status segopt_bench_compare(const char* summary_a, const char* summary_b,
                                   const char* out_prefix);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SEGOPT_H */
