#ifndef SEGOPT_CORE_BENCH_HPP
#define SEGOPT_CORE_BENCH_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/functionals.hpp"
#include "core/grid.hpp"
#include "core/trace.hpp"

namespace segopt {

enum class ProblemKind { Volume, Moments, L2, KL, Bhattacharyya };
enum class SolverKind { LevelSet, LevelSetAdaptive, TrustRegion };

const char* problem_name(ProblemKind kind);
const char* solver_name(SolverKind kind);
ProblemKind parse_problem(const std::string& name);
SolverKind parse_solver(const std::string& name);

struct EllipseSpec {
  double cx = 0.0;
  double cy = 0.0;
  double a = 1.0;
  double b = 1.0;
  double theta = 0.0;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::Volume;
  SolverKind solver = SolverKind::TrustRegion;

  std::string image_path;  // empty -> synthetic flat image of `size`
  int size = 100;
  double noise = 0.0;

  double v0 = 2000.0;
  std::optional<EllipseSpec> ellipse;
  std::string target_mask_path;
  std::string init_mask_path;

  int bins = 100;
  int order = 2;
  double lambda_length = 0.0;
  double lambda_volume = 0.0;
  double lambda_shape = 0.0;
  double lambda_app = 0.0;

  std::vector<double> dt_list = {1, 5, 10, 50, 100, 500, 1000};
  std::vector<double> alpha_list = {1.01, 1.1, 2, 10};
  int max_iters = 0;  // 0 -> solver default (10000 level sets, 1000 FTR)
  double epsilon = 1.5;
  double mu = 0.05;
  double d0 = 10.0;
  double tau2 = 0.25;
  int crofton_order = 16;

  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int workers = 0;  // 0 -> auto; SEGOPT_THREADS caps either way
};

/// key=value lines, '#' comments. Every key is mirrored by a CLI flag.
ExperimentConfig parse_config(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_override(std::map<std::string, std::string>& kv,
                    const std::string& key_equals_value);

/// Deterministic flat grayscale image (optional seeded noise) plus the
/// default initial mask: a centered square of area V0/2 when a volume target
/// is given, a quarter of the grid otherwise.
Image synth_image(int size, std::uint64_t seed, double noise, double v0,
                  Labeling* initial_mask);

struct EllipseTargets {
  std::vector<MomentTarget> moments;
  Histogram fg;
  Histogram bg;
  Labeling mask;
};

/// Rasterizes the ellipse and derives moment targets (orders 0..l, normalized
/// coordinates) and normalized fg/bg appearance histograms from it.
EllipseTargets targets_from_ellipse(const EllipseSpec& ellipse, const Image& img,
                                    int bins, int order);

struct SummaryRow {
  std::string solver;
  double param = 0.0;
  std::string status;
  std::uint64_t iterations = 0;
  std::uint64_t evaluations = 0;
  double cpu_ms = 0.0;
  double energy = 0.0;          // under the solver's length convention
  double energy_cont = 0.0;
  double energy_crofton = 0.0;
  double regional = 0.0;
  double unary = 0.0;
  double length_cont = 0.0;
  double length_crofton = 0.0;
  std::uint64_t area = 0;
  double isoperimetric = 0.0;
  std::string problem_hash;
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::string problem_hash;
  std::string path;
};

/// Runs the configured sweep (one solver run per dt / alpha value, workers in
/// parallel), writes trace_<solver>_<param>.csv, mask_<solver>_<param>.pgm and
/// summary.csv under out_dir.
Summary run_experiment(const ExperimentConfig& cfg);

Summary load_summary(const std::string& path);
void save_summary(const Summary& summary, const std::string& path);

struct Comparison {
  SummaryRow best_a;
  SummaryRow best_b;
  double evals_ratio = 1.0;  // best_b / best_a
  double cpu_ratio = 1.0;
  double gap_cont = 0.0;  // E_cont(best_b) - E_cont(best_a)
  double gap_crofton = 0.0;
  std::string problem_hash;
};

/// Refuses to compare summaries with different problem hashes.
Comparison compare_summaries(const Summary& a, const Summary& b);
void write_comparison(const Comparison& cmp, const Summary& a, const Summary& b,
                      const std::string& out_prefix);

/// Problem identity (everything except solver choice and solver parameters).
std::string problem_hash(const ExperimentConfig& cfg);

/// File-level helpers behind the CLI subcommands.
void bench_synth(int size, double v0, std::uint64_t seed, double noise,
                 const std::string& image_path, const std::string& init_path);
void bench_targets(const std::string& image_path, const EllipseSpec& ellipse,
                   int bins, int order, const std::string& out_prefix);

}  // namespace segopt

#endif
