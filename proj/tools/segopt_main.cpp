// segopt command line: synthetic inputs, target construction, experiment
// sweeps and solver comparisons. Talks to the library through the public C
// API only.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "segopt/segopt.h"

namespace {

int report(segopt_status status) {
  if (status == SEGOPT_OK) return 0;
  std::fprintf(stderr, "error (%s): %s\n", segopt_status_name(status),
               segopt_last_error());
  return 1;
}

struct EllipseArg {
  double cx = 0, cy = 0, a = 1, b = 1, theta = 0;
};

bool parse_ellipse_arg(const std::string& text, EllipseArg& out) {
  return std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf,%lf", &out.cx, &out.cy,
                     &out.a, &out.b, &out.theta) == 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segmentation energy benchmark (level sets vs fast trust region)"};
  app.require_subcommand(1);

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "write a deterministic synthetic image and its initial mask");
  std::uint32_t synth_size = 100;
  double synth_v0 = 2000.0;
  std::uint64_t synth_seed = 1;
  double synth_noise = 0.0;
  std::string synth_image = "synthetic.pgm";
  std::string synth_init = "init.pgm";
  synth->add_option("--size", synth_size, "grid size (>= 32)");
  synth->add_option("--v0", synth_v0, "target volume (initial mask area V0/2)");
  synth->add_option("--seed", synth_seed, "noise seed");
  synth->add_option("--noise", synth_noise, "noise amplitude (0 = flat)");
  synth->add_option("--out-image", synth_image, "output image path (PGM)");
  synth->add_option("--out-init", synth_init, "output initial mask path (PGM)");

  // targets ----------------------------------------------------------------
  auto* targets = app.add_subcommand(
      "targets", "derive moment targets and fg/bg histograms from an ellipse");
  std::string targets_image;
  std::string targets_ellipse;
  std::uint32_t targets_bins = 100;
  std::uint32_t targets_order = 2;
  std::string targets_prefix = "targets";
  targets->add_option("--image", targets_image, "input image (PGM/PPM)")
      ->required();
  targets->add_option("--ellipse", targets_ellipse, "cx,cy,a,b,theta")
      ->required();
  targets->add_option("--bins", targets_bins, "bins per channel");
  targets->add_option("--order", targets_order, "max moment order l");
  targets->add_option("--out-prefix", targets_prefix, "output file prefix");

  // run ---------------------------------------------------------------------
  auto* run = app.add_subcommand(
      "run", "run an experiment sweep and write traces, masks and summary.csv");
  std::string run_config;
  run->add_option("--config", run_config, "key=value config file");
  std::vector<std::string> run_overrides;
  // Every config key doubles as a flag; collected as key=value overrides.
  struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const FlagSpec flags[] = {
      {"--problem", "problem", "volume|moments|l2|kl|bhattacharyya"},
      {"--solver", "solver", "levelset|levelset-adaptive|ftr"},
      {"--image", "image", "input image path (empty = synthetic)"},
      {"--size", "size", "synthetic grid size"},
      {"--noise", "noise", "synthetic noise amplitude"},
      {"--v0", "v0", "target volume"},
      {"--ellipse", "ellipse", "target ellipse cx,cy,a,b,theta"},
      {"--target-mask", "target_mask", "ground-truth mask path"},
      {"--init-mask", "init_mask", "initial mask path"},
      {"--bins", "bins", "bins per channel"},
      {"--order", "order", "max moment order"},
      {"--lambda-length", "lambda_length", "length weight"},
      {"--lambda-volume", "lambda_volume", "volume weight"},
      {"--lambda-shape", "lambda_shape", "shape weight"},
      {"--lambda-app", "lambda_app", "appearance weight"},
      {"--dt-list", "dt_list", "level-set time steps, comma separated"},
      {"--alpha-list", "alpha_list", "trust region multipliers, comma separated"},
      {"--max-iters", "max_iters", "iteration cap (0 = solver default)"},
      {"--epsilon", "epsilon", "dirac width"},
      {"--mu", "mu", "distance penalty weight"},
      {"--d0", "d0", "initial trust radius"},
      {"--tau2", "tau2", "trust region growth threshold"},
      {"--crofton-order", "crofton_order", "4, 8 or 16"},
      {"--seed", "seed", "random seed"},
      {"--out-dir", "out_dir", "output directory"},
      {"--workers", "workers", "sweep parallelism (SEGOPT_THREADS caps)"},
  };
  std::vector<std::string> flag_values(std::size(flags));
  for (std::size_t i = 0; i < std::size(flags); ++i) {
    run->add_option(flags[i].flag, flag_values[i], flags[i].help);
  }

  // compare -----------------------------------------------------------------
  auto* compare = app.add_subcommand(
      "compare", "compare two summary.csv files over the same problem");
  std::string cmp_a, cmp_b, cmp_out = "comparison";
  compare->add_option("--a", cmp_a, "first summary.csv")->required();
  compare->add_option("--b", cmp_b, "second summary.csv")->required();
  compare->add_option("--out", cmp_out, "output prefix (.txt/.csv appended)");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    return report(segopt_bench_synth(synth_size, synth_v0, synth_seed,
                                     synth_noise, synth_image.c_str(),
                                     synth_init.empty() ? nullptr
                                                        : synth_init.c_str()));
  }

  if (targets->parsed()) {
    EllipseArg e;
    if (!parse_ellipse_arg(targets_ellipse, e)) {
      std::fprintf(stderr, "error: --ellipse expects cx,cy,a,b,theta\n");
      return 1;
    }
    return report(segopt_bench_targets(targets_image.c_str(), e.cx, e.cy, e.a,
                                       e.b, e.theta, targets_bins,
                                       targets_order, targets_prefix.c_str()));
  }

  if (run->parsed()) {
    std::vector<std::string> overrides;
    for (std::size_t i = 0; i < std::size(flags); ++i) {
      if (run->count(flags[i].flag) > 0) {
        overrides.push_back(std::string(flags[i].key) + "=" + flag_values[i]);
      }
    }
    std::vector<const char*> override_ptrs;
    for (const auto& o : overrides) override_ptrs.push_back(o.c_str());
    char summary_path[4096] = {0};
    const segopt_status status = segopt_bench_run(
        run_config.empty() ? nullptr : run_config.c_str(),
        override_ptrs.empty() ? nullptr : override_ptrs.data(),
        override_ptrs.size(), summary_path, sizeof summary_path);
    if (status == SEGOPT_OK) std::printf("summary: %s\n", summary_path);
    return report(status);
  }

  if (compare->parsed()) {
    const segopt_status status =
        segopt_bench_compare(cmp_a.c_str(), cmp_b.c_str(), cmp_out.c_str());
    if (status == SEGOPT_OK) {
      std::printf("comparison: %s.txt %s.csv\n", cmp_out.c_str(),
                  cmp_out.c_str());
    }
    return report(status);
  }

  return 0;
}
