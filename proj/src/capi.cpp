#include "segopt/segopt.h"

#include <cstring>
#include <new>
#include <string>

#include "core/bench.hpp"
#include "core/functionals.hpp"
#include "core/grid.hpp"
#include "core/io.hpp"
#include "core/level_set.hpp"
#include "core/maxflow.hpp"
#include "core/trace.hpp"
#include "core/trust_region.hpp"

struct segopt_image {
  segopt::Image value;
};
struct segopt_labeling {
  segopt::Labeling value;
};
struct segopt_field {
  segopt::ScalarField value;
};
struct segopt_histogram {
  segopt::Histogram value;
};
struct segopt_model {
  std::shared_ptr<const segopt::RegionalModel> value;
};
struct segopt_energy {
  segopt::EnergyTerms terms;
  segopt::EvalCounter counter;
};
struct segopt_flow {
  segopt::FlowNetwork value;
};
struct segopt_trace {
  segopt::Trace value;
  std::uint64_t evaluations = 0;
};

namespace {

thread_local std::string g_last_error;

segopt_status map_code(segopt::ErrorCode code) {
  using segopt::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return SEGOPT_ERROR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return SEGOPT_ERROR_DIMENSION_MISMATCH;
    case ErrorCode::Io: return SEGOPT_ERROR_IO;
    case ErrorCode::DegenerateMask: return SEGOPT_ERROR_DEGENERATE_MASK;
    case ErrorCode::Numeric: return SEGOPT_ERROR_NUMERIC;
    case ErrorCode::State: return SEGOPT_ERROR_STATE;
    case ErrorCode::Unsupported: return SEGOPT_ERROR_UNSUPPORTED;
  }
  return SEGOPT_ERROR_INTERNAL;
}

template <typename Fn>
segopt_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SEGOPT_OK;
  } catch (const segopt::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SEGOPT_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SEGOPT_ERROR_INTERNAL;
  }
}

void check_arg(bool ok, const char* message) {
  segopt::require(ok, segopt::ErrorCode::InvalidArgument, message);
}

segopt_run_status map_run_status(segopt::RunStatus status) {
  switch (status) {
    case segopt::RunStatus::Converged: return SEGOPT_RUN_CONVERGED;
    case segopt::RunStatus::IterationCap: return SEGOPT_RUN_CAPPED;
    case segopt::RunStatus::Stalled: return SEGOPT_RUN_STALLED;
    case segopt::RunStatus::Aborted: return SEGOPT_RUN_ABORTED;
  }
  return SEGOPT_RUN_ABORTED;
}

void emit_run_outputs(segopt::RunResult&& run, std::uint64_t evaluations,
                      segopt_labeling** final_labeling, segopt_trace** trace,
                      segopt_run_status* run_status) {
  if (run_status) *run_status = map_run_status(run.status);
  if (trace) {
    *trace = new segopt_trace{std::move(run.trace), evaluations};
  }
  *final_labeling = new segopt_labeling{std::move(run.labeling)};
}

}  // namespace

extern "C" {

const char* segopt_version(void) { return "0.1.0"; }

const char* segopt_status_name(segopt_status status) {
  switch (status) {
    case SEGOPT_OK: return "ok";
    case SEGOPT_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case SEGOPT_ERROR_DIMENSION_MISMATCH: return "dimension mismatch";
    case SEGOPT_ERROR_IO: return "io error";
    case SEGOPT_ERROR_DEGENERATE_MASK: return "degenerate mask";
    case SEGOPT_ERROR_NUMERIC: return "numeric error";
    case SEGOPT_ERROR_STATE: return "invalid state";
    case SEGOPT_ERROR_UNSUPPORTED: return "unsupported";
    case SEGOPT_ERROR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* segopt_last_error(void) { return g_last_error.c_str(); }

/* image */

segopt_status segopt_image_create(uint32_t width, uint32_t height,
                                  uint32_t channels, const double* data,
                                  segopt_image** out) {
  return guarded([&] {
    check_arg(out != nullptr, "out must not be NULL");
    if (data) {
      std::vector<double> copy(
          data, data + static_cast<std::size_t>(width) * height * channels);
      *out = new segopt_image{segopt::Image::from_data(
          static_cast<int>(width), static_cast<int>(height),
          static_cast<int>(channels), std::move(copy))};
    } else {
      *out = new segopt_image{segopt::Image(static_cast<int>(width),
                                            static_cast<int>(height),
                                            static_cast<int>(channels))};
    }
  });
}

segopt_status segopt_image_load(const char* path, segopt_image** out) {
  return guarded([&] {
    check_arg(path && out, "path and out must not be NULL");
    *out = new segopt_image{segopt::load_image(path)};
  });
}

segopt_status segopt_image_save(const segopt_image* img, const char* path) {
  return guarded([&] {
    check_arg(img && path, "image and path must not be NULL");
    segopt::save_image(img->value, path);
  });
}

void segopt_image_destroy(segopt_image* img) { delete img; }

uint32_t segopt_image_width(const segopt_image* img) {
  return img ? static_cast<uint32_t>(img->value.width()) : 0;
}
uint32_t segopt_image_height(const segopt_image* img) {
  return img ? static_cast<uint32_t>(img->value.height()) : 0;
}
uint32_t segopt_image_channels(const segopt_image* img) {
  return img ? static_cast<uint32_t>(img->value.channels()) : 0;
}

segopt_status segopt_image_data(const segopt_image* img, double* buffer,
                                size_t buffer_len) {
  return guarded([&] {
    check_arg(img && buffer, "image and buffer must not be NULL");
    const auto data = img->value.data();
    check_arg(buffer_len >= data.size(), "buffer too small");
    std::memcpy(buffer, data.data(), data.size() * sizeof(double));
  });
}

/* labeling */

segopt_status segopt_labeling_create(uint32_t width, uint32_t height,
                                     const uint8_t* mask,
                                     segopt_labeling** out) {
  return guarded([&] {
    check_arg(out != nullptr, "out must not be NULL");
    segopt::Labeling s(static_cast<int>(width), static_cast<int>(height));
    if (mask) {
      for (uint32_t y = 0; y < height; ++y) {
        for (uint32_t x = 0; x < width; ++x) {
          if (mask[static_cast<std::size_t>(y) * width + x]) {
            s.set(static_cast<int>(x), static_cast<int>(y), true);
          }
        }
      }
    }
    *out = new segopt_labeling{std::move(s)};
  });
}

segopt_status segopt_labeling_load(const char* path, segopt_labeling** out) {
  return guarded([&] {
    check_arg(path && out, "path and out must not be NULL");
    *out = new segopt_labeling{segopt::load_mask(path)};
  });
}

segopt_status segopt_labeling_save(const segopt_labeling* s, const char* path) {
  return guarded([&] {
    check_arg(s && path, "labeling and path must not be NULL");
    segopt::save_mask(s->value, path);
  });
}

void segopt_labeling_destroy(segopt_labeling* s) { delete s; }

uint32_t segopt_labeling_width(const segopt_labeling* s) {
  return s ? static_cast<uint32_t>(s->value.width()) : 0;
}
uint32_t segopt_labeling_height(const segopt_labeling* s) {
  return s ? static_cast<uint32_t>(s->value.height()) : 0;
}
uint64_t segopt_labeling_area(const segopt_labeling* s) {
  return s ? static_cast<uint64_t>(s->value.area()) : 0;
}

segopt_status segopt_labeling_data(const segopt_labeling* s, uint8_t* buffer,
                                   size_t buffer_len) {
  return guarded([&] {
    check_arg(s && buffer, "labeling and buffer must not be NULL");
    const auto raw = s->value.raw();
    check_arg(buffer_len >= raw.size(), "buffer too small");
    std::memcpy(buffer, raw.data(), raw.size());
  });
}

/* field */

segopt_status segopt_field_create(uint32_t width, uint32_t height,
                                  const double* values, segopt_field** out) {
  return guarded([&] {
    check_arg(out != nullptr, "out must not be NULL");
    if (values) {
      std::vector<double> copy(values,
                               values + static_cast<std::size_t>(width) * height);
      *out = new segopt_field{segopt::ScalarField::from_data(
          static_cast<int>(width), static_cast<int>(height), std::move(copy))};
    } else {
      *out = new segopt_field{
          segopt::ScalarField(static_cast<int>(width), static_cast<int>(height))};
    }
  });
}

segopt_status segopt_field_load(const char* path, segopt_field** out) {
  return guarded([&] {
    check_arg(path && out, "path and out must not be NULL");
    *out = new segopt_field{segopt::load_field(path)};
  });
}

segopt_status segopt_field_save(const segopt_field* f, const char* path) {
  return guarded([&] {
    check_arg(f && path, "field and path must not be NULL");
    segopt::save_field(f->value, path);
  });
}

void segopt_field_destroy(segopt_field* f) { delete f; }

uint32_t segopt_field_width(const segopt_field* f) {
  return f ? static_cast<uint32_t>(f->value.width()) : 0;
}
uint32_t segopt_field_height(const segopt_field* f) {
  return f ? static_cast<uint32_t>(f->value.height()) : 0;
}

segopt_status segopt_field_data(const segopt_field* f, double* buffer,
                                size_t buffer_len) {
  return guarded([&] {
    check_arg(f && buffer, "field and buffer must not be NULL");
    const auto data = f->value.data();
    check_arg(buffer_len >= data.size(), "buffer too small");
    std::memcpy(buffer, data.data(), data.size() * sizeof(double));
  });
}

segopt_status segopt_signed_distance(const segopt_labeling* s, int* degenerate,
                                     segopt_field** out) {
  return guarded([&] {
    check_arg(s && out, "labeling and out must not be NULL");
    segopt::SignedDistance sd = segopt::signed_distance(s->value);
    if (degenerate) *degenerate = sd.degenerate ? 1 : 0;
    *out = new segopt_field{std::move(sd.field)};
  });
}

segopt_status segopt_linear_sum(const segopt_field* f,
                                const segopt_labeling* s, double* out) {
  return guarded([&] {
    check_arg(f && s && out, "field, labeling and out must not be NULL");
    *out = segopt::linear_sum(f->value, s->value);
  });
}

/* histogram */

segopt_status segopt_bin_counts(const segopt_image* img,
                                const segopt_labeling* s, uint32_t bins,
                                segopt_histogram** out) {
  return guarded([&] {
    check_arg(img && s && out, "image, labeling and out must not be NULL");
    *out = new segopt_histogram{
        segopt::bin_counts(img->value, s->value, static_cast<int>(bins))};
  });
}

segopt_status segopt_histogram_load(const char* path, segopt_histogram** out) {
  return guarded([&] {
    check_arg(path && out, "path and out must not be NULL");
    *out = new segopt_histogram{segopt::load_histogram(path)};
  });
}

segopt_status segopt_histogram_save(const segopt_histogram* h,
                                    const char* path) {
  return guarded([&] {
    check_arg(h && path, "histogram and path must not be NULL");
    segopt::save_histogram(h->value, path);
  });
}

void segopt_histogram_destroy(segopt_histogram* h) { delete h; }

uint32_t segopt_histogram_channels(const segopt_histogram* h) {
  return h ? static_cast<uint32_t>(h->value.channels()) : 0;
}
uint32_t segopt_histogram_bins(const segopt_histogram* h) {
  return h ? static_cast<uint32_t>(h->value.bins()) : 0;
}

segopt_status segopt_histogram_value(const segopt_histogram* h,
                                     uint32_t channel, uint32_t bin,
                                     double* out) {
  return guarded([&] {
    check_arg(h && out, "histogram and out must not be NULL");
    check_arg(channel < static_cast<uint32_t>(h->value.channels()) &&
                  bin < static_cast<uint32_t>(h->value.bins()),
              "channel or bin out of range");
    *out = h->value.at(static_cast<int>(channel), static_cast<int>(bin));
  });
}

segopt_status segopt_histogram_normalize(segopt_histogram* h) {
  return guarded([&] {
    check_arg(h != nullptr, "histogram must not be NULL");
    h->value.normalize();
  });
}

/* models */

segopt_status segopt_model_volume(double v0, segopt_model** out) {
  return guarded([&] {
    check_arg(out != nullptr, "out must not be NULL");
    *out = new segopt_model{segopt::make_volume(v0)};
  });
}

segopt_status segopt_model_moments(const int32_t* p, const int32_t* q,
                                   const double* value, size_t count,
                                   int32_t order, segopt_model** out) {
  return guarded([&] {
    check_arg(p && q && value && out, "arrays and out must not be NULL");
    std::vector<segopt::MomentTarget> targets(count);
    for (size_t i = 0; i < count; ++i) {
      targets[i] = {static_cast<int>(p[i]), static_cast<int>(q[i]), value[i]};
    }
    *out = new segopt_model{
        segopt::make_moments(std::move(targets), static_cast<int>(order))};
  });
}

segopt_status segopt_model_l2_bins(const segopt_histogram* target,
                                   segopt_model** out) {
  return guarded([&] {
    check_arg(target && out, "target and out must not be NULL");
    *out = new segopt_model{segopt::make_l2_bins(target->value)};
  });
}

segopt_status segopt_model_kl(const segopt_histogram* target,
                              segopt_model** out) {
  return guarded([&] {
    check_arg(target && out, "target and out must not be NULL");
    *out = new segopt_model{segopt::make_kl(target->value)};
  });
}

segopt_status segopt_model_bhattacharyya(const segopt_histogram* target,
                                         segopt_model** out) {
  return guarded([&] {
    check_arg(target && out, "target and out must not be NULL");
    *out = new segopt_model{segopt::make_bhattacharyya(target->value)};
  });
}

void segopt_model_destroy(segopt_model* m) { delete m; }

segopt_status segopt_model_evaluate(const segopt_model* m,
                                    const segopt_image* img,
                                    const segopt_labeling* s, double* out) {
  return guarded([&] {
    check_arg(m && img && s && out, "model, image, labeling, out required");
    *out = m->value->evaluate(img->value, s->value);
  });
}

segopt_status segopt_model_gradient(const segopt_model* m,
                                    const segopt_image* img,
                                    const segopt_labeling* s,
                                    segopt_field** out) {
  return guarded([&] {
    check_arg(m && img && s && out, "model, image, labeling, out required");
    *out = new segopt_field{m->value->gradient_field(img->value, s->value)};
  });
}

segopt_status segopt_loglikelihood_field(const segopt_image* img,
                                         const segopt_histogram* fg,
                                         const segopt_histogram* bg,
                                         segopt_field** out) {
  return guarded([&] {
    check_arg(img && fg && bg && out, "image, fg, bg, out required");
    *out = new segopt_field{
        segopt::make_loglikelihood(img->value, fg->value, bg->value)};
  });
}

/* energy */

segopt_status segopt_energy_create(segopt_energy** out) {
  return guarded([&] {
    check_arg(out != nullptr, "out must not be NULL");
    *out = new segopt_energy{};
  });
}

void segopt_energy_destroy(segopt_energy* e) { delete e; }

segopt_status segopt_energy_add_model(segopt_energy* e, const segopt_model* m,
                                      double weight) {
  return guarded([&] {
    check_arg(e && m, "energy and model must not be NULL");
    e->terms.regional.push_back({m->value, weight});
  });
}

segopt_status segopt_energy_set_unary(segopt_energy* e, const segopt_field* f,
                                      double weight) {
  return guarded([&] {
    check_arg(e && f, "energy and field must not be NULL");
    e->terms.unary = f->value;
    e->terms.unary_weight = weight;
  });
}

segopt_status segopt_energy_set_length(segopt_energy* e, double weight,
                                       int use_crofton, uint32_t crofton_order,
                                       double dirac_epsilon) {
  return guarded([&] {
    check_arg(e != nullptr, "energy must not be NULL");
    e->terms.length_weight = weight;
    e->terms.convention = use_crofton ? segopt::LengthConvention::Crofton
                                      : segopt::LengthConvention::Continuous;
    e->terms.crofton_order = static_cast<int>(crofton_order);
    e->terms.dirac_epsilon = dirac_epsilon;
  });
}

segopt_status segopt_energy_evaluate(segopt_energy* e, const segopt_image* img,
                                     const segopt_labeling* s,
                                     segopt_energy_report* out) {
  return guarded([&] {
    check_arg(e && img && s && out, "energy, image, labeling, out required");
    const segopt::EnergyReport report =
        segopt::composite_energy(e->terms, img->value, s->value, &e->counter);
    out->total = report.total;
    out->regional = report.regional;
    out->unary = report.unary;
    out->length_cont = report.length_cont;
    out->length_crofton = report.length_crofton;
    out->evaluations = report.evaluations;
  });
}

segopt_status segopt_energy_reset_evaluations(segopt_energy* e) {
  return guarded([&] {
    check_arg(e != nullptr, "energy must not be NULL");
    e->counter = segopt::EvalCounter();
  });
}

/* maxflow */

segopt_status segopt_flow_create(segopt_flow** out) {
  return guarded([&] {
    check_arg(out != nullptr, "out must not be NULL");
    *out = new segopt_flow{};
  });
}

void segopt_flow_destroy(segopt_flow* f) { delete f; }

segopt_status segopt_flow_add_nodes(segopt_flow* f, uint32_t count,
                                    uint32_t* first_index) {
  return guarded([&] {
    check_arg(f != nullptr, "flow must not be NULL");
    const std::size_t first = f->value.add_nodes(count);
    if (first_index) *first_index = static_cast<uint32_t>(first);
  });
}

segopt_status segopt_flow_add_edge(segopt_flow* f, uint32_t u, uint32_t v,
                                   double cap, double rev_cap) {
  return guarded([&] {
    check_arg(f != nullptr, "flow must not be NULL");
    f->value.add_edge(u, v, cap, rev_cap);
  });
}

segopt_status segopt_flow_add_terminal(segopt_flow* f, uint32_t node,
                                       double source_cap, double sink_cap) {
  return guarded([&] {
    check_arg(f != nullptr, "flow must not be NULL");
    f->value.add_terminal(node, source_cap, sink_cap);
  });
}

segopt_status segopt_flow_solve(segopt_flow* f, double* flow_value) {
  return guarded([&] {
    check_arg(f != nullptr, "flow must not be NULL");
    const double value = f->value.max_flow();
    if (flow_value) *flow_value = value;
  });
}

segopt_status segopt_flow_cut_side(const segopt_flow* f, uint32_t node,
                                   int* is_source_side) {
  return guarded([&] {
    check_arg(f && is_source_side, "flow and out must not be NULL");
    *is_source_side =
        f->value.cut_side(node) == segopt::FlowNetwork::Side::Source ? 1 : 0;
  });
}

/* solvers */

void segopt_levelset_defaults(segopt_levelset_options* opts) {
  if (!opts) return;
  opts->dt = 1.0;
  opts->epsilon = 1.5;
  opts->mu = 0.05;
  opts->max_iters = 10000;
  opts->convergence_window = 50;
  opts->convergence_tol = 1e-6;
  opts->adaptive = 0;
}

void segopt_ftr_defaults(segopt_ftr_options* opts) {
  if (!opts) return;
  opts->initial_radius = 10.0;
  opts->alpha = 2.0;
  opts->tau2 = 0.25;
  opts->max_iters = 1000;
}

segopt_status segopt_levelset_run(const segopt_image* img,
                                  const segopt_labeling* init,
                                  const segopt_energy* energy,
                                  const segopt_levelset_options* opts,
                                  segopt_labeling** final_labeling,
                                  segopt_trace** trace,
                                  segopt_run_status* run_status) {
  return guarded([&] {
    check_arg(img && init && energy && final_labeling,
              "image, init, energy, final_labeling required");
    segopt_levelset_options defaults;
    segopt_levelset_defaults(&defaults);
    const segopt_levelset_options& o = opts ? *opts : defaults;

    segopt::EnergyTerms terms = energy->terms;
    terms.convention = segopt::LengthConvention::Continuous;
    segopt::LevelSetConfig cfg;
    cfg.dt = o.dt;
    cfg.epsilon = o.epsilon;
    cfg.mu = o.mu;
    cfg.max_iters = static_cast<int>(o.max_iters);
    cfg.convergence_window = static_cast<int>(o.convergence_window);
    cfg.convergence_tol = o.convergence_tol;

    segopt::EvalCounter counter;
    segopt::RunResult run =
        o.adaptive
            ? segopt::run_level_set_adaptive(img->value, init->value, terms,
                                             cfg, counter)
            : segopt::run_level_set(img->value, init->value, terms, cfg,
                                    counter);
    emit_run_outputs(std::move(run), counter.count(), final_labeling, trace,
                     run_status);
  });
}

segopt_status segopt_ftr_run(const segopt_image* img,
                             const segopt_labeling* init,
                             const segopt_energy* energy,
                             const segopt_ftr_options* opts,
                             segopt_labeling** final_labeling,
                             segopt_trace** trace,
                             segopt_run_status* run_status) {
  return guarded([&] {
    check_arg(img && init && energy && final_labeling,
              "image, init, energy, final_labeling required");
    segopt_ftr_options defaults;
    segopt_ftr_defaults(&defaults);
    const segopt_ftr_options& o = opts ? *opts : defaults;

    segopt::EnergyTerms terms = energy->terms;
    terms.convention = segopt::LengthConvention::Crofton;
    segopt::TrustRegionConfig cfg;
    cfg.initial_radius = o.initial_radius;
    cfg.alpha = o.alpha;
    cfg.tau2 = o.tau2;
    cfg.max_iters = static_cast<int>(o.max_iters);

    segopt::EvalCounter counter;
    segopt::RunResult run =
        segopt::run_trust_region(img->value, init->value, terms, cfg, counter);
    emit_run_outputs(std::move(run), counter.count(), final_labeling, trace,
                     run_status);
  });
}

uint64_t segopt_trace_rows(const segopt_trace* t) {
  return t ? static_cast<uint64_t>(t->value.rows.size()) : 0;
}

uint64_t segopt_trace_evaluations(const segopt_trace* t) {
  return t ? t->evaluations : 0;
}

segopt_status segopt_trace_save_csv(const segopt_trace* t, const char* path) {
  return guarded([&] {
    check_arg(t && path, "trace and path must not be NULL");
    t->value.save_csv(path);
  });
}

void segopt_trace_destroy(segopt_trace* t) { delete t; }

/* bench */

segopt_status segopt_bench_synth(uint32_t size, double v0, uint64_t seed,
                                 double noise, const char* image_path,
                                 const char* init_mask_path) {
  return guarded([&] {
    check_arg(image_path != nullptr, "image_path must not be NULL");
    segopt::bench_synth(static_cast<int>(size), v0, seed, noise, image_path,
                        init_mask_path ? init_mask_path : "");
  });
}

segopt_status segopt_bench_targets(const char* image_path, double cx, double cy,
                                   double a, double b, double theta,
                                   uint32_t bins, uint32_t order,
                                   const char* out_prefix) {
  return guarded([&] {
    check_arg(image_path && out_prefix, "image_path and out_prefix required");
    segopt::bench_targets(image_path, {cx, cy, a, b, theta},
                          static_cast<int>(bins), static_cast<int>(order),
                          out_prefix);
  });
}

segopt_status segopt_bench_run(const char* config_path,
                               const char* const* overrides, size_t n_overrides,
                               char* summary_path_out,
                               size_t summary_path_len) {
  return guarded([&] {
    std::map<std::string, std::string> kv;
    if (config_path) kv = segopt::read_config_file(config_path);
    for (size_t i = 0; i < n_overrides; ++i) {
      check_arg(overrides && overrides[i], "override must not be NULL");
      segopt::apply_override(kv, overrides[i]);
    }
    const segopt::Summary summary =
        segopt::run_experiment(segopt::parse_config(kv));
    if (summary_path_out && summary_path_len > 0) {
      std::snprintf(summary_path_out, summary_path_len, "%s",
                    summary.path.c_str());
    }
  });
}

segopt_status segopt_bench_compare(const char* summary_a, const char* summary_b,
                                   const char* out_prefix) {
  return guarded([&] {
    check_arg(summary_a && summary_b && out_prefix,
              "summary paths and out_prefix required");
    const segopt::Summary a = segopt::load_summary(summary_a);
    const segopt::Summary b = segopt::load_summary(summary_b);
    const segopt::Comparison cmp = segopt::compare_summaries(a, b);
    segopt::write_comparison(cmp, a, b, out_prefix);
  });
}

} /* extern "C" */
