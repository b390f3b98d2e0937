#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "core/bench.hpp"
#include "core/io.hpp"
#include "doctest.h"

using namespace segopt;

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Trace CSV with the cpu_ms column removed; wall-clock operand of the
// determinism comparison.
std::string strip_cpu_column(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string field;
    int i = 0;
    while (std::getline(ls, field, ',')) {
      if (i != 1) out << field << ",";
      ++i;
    }
    out << "\n";
  }
  return out.str();
}

std::map<std::string, std::string> kv(
    std::initializer_list<std::pair<std::string, std::string>> pairs) {
  std::map<std::string, std::string> m;
  for (const auto& [k, v] : pairs) m[k] = v;
  return m;
}

}  // namespace

TEST_CASE("synth determinism and defaults") {
  Labeling init1(1, 1), init2(1, 1);
  const Image a = synth_image(64, 7, 3.0, 800.0, &init1);
  const Image b = synth_image(64, 7, 3.0, 800.0, &init2);
  CHECK(a.data().size() == b.data().size());
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    CHECK(a.data()[i] == b.data()[i]);
  }
  CHECK(init1 == init2);

  // Default initial mask: centered square of area V0/2.
  CHECK(static_cast<double>(init1.area()) ==
        doctest::Approx(400.0).epsilon(0.05));

  Labeling no_v0(1, 1);
  synth_image(64, 7, 0.0, 0.0, &no_v0);
  CHECK(static_cast<double>(no_v0.area()) ==
        doctest::Approx(0.25 * 64 * 64).epsilon(0.05));

  const Image c = synth_image(64, 8, 3.0, 800.0, nullptr);
  bool different = false;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    if (a.data()[i] != c.data()[i]) different = true;
  }
  CHECK(different);
}

TEST_CASE("targets_from_ellipse") {
  Image img(96, 96, 1, 90.0);

  SUBCASE("area matches pi a b and first moments sit at the center") {
    const EllipseSpec e{48.0, 48.0, 24.0, 20.0, 0.0};
    const EllipseTargets t = targets_from_ellipse(e, img, 16, 2);
    double m00 = 0, m10 = 0, m01 = 0;
    for (const auto& m : t.moments) {
      if (m.p == 0 && m.q == 0) m00 = m.value;
      if (m.p == 1 && m.q == 0) m10 = m.value;
      if (m.p == 0 && m.q == 1) m01 = m.value;
    }
    CHECK(m00 == doctest::Approx(std::numbers::pi * 24 * 20).epsilon(0.02));
    // Normalized coordinates: the centroid is cx / (width - 1).
    CHECK(m10 / m00 == doctest::Approx(48.0 / 95.0).epsilon(0.01));
    CHECK(m01 / m00 == doctest::Approx(48.0 / 95.0).epsilon(0.01));
  }

  SUBCASE("order 0 gives the single area target") {
    const EllipseSpec e{48.0, 48.0, 22.0, 22.0, 0.0};
    const EllipseTargets t = targets_from_ellipse(e, img, 8, 0);
    REQUIRE(t.moments.size() == 1);
    CHECK(t.moments[0].p == 0);
    CHECK(t.moments[0].q == 0);
    CHECK(t.moments[0].value ==
          doctest::Approx(std::numbers::pi * 22 * 22).epsilon(0.02));
  }

  SUBCASE("theta = 0 and theta = pi rasterize identically") {
    const EllipseSpec e0{40.0, 50.0, 25.0, 12.0, 0.0};
    const EllipseSpec epi{40.0, 50.0, 25.0, 12.0, std::numbers::pi};
    CHECK(targets_from_ellipse(e0, img, 8, 1).mask ==
          targets_from_ellipse(epi, img, 8, 1).mask);
  }

  SUBCASE("histograms are normalized per channel") {
    const EllipseSpec e{48.0, 48.0, 18.0, 14.0, 0.4};
    const EllipseTargets t = targets_from_ellipse(e, img, 32, 1);
    CHECK(t.fg.total(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t.bg.total(0) == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("empty rasterization is rejected") {
    const EllipseSpec off{-500.0, -500.0, 5.0, 5.0, 0.0};
    CHECK_THROWS_AS(targets_from_ellipse(off, img, 8, 1), Error);
  }
}

TEST_CASE("config parsing") {
  SUBCASE("paper defaults per problem kind") {
    const ExperimentConfig volume = parse_config(kv({{"problem", "volume"}}));
    CHECK(volume.lambda_length == 1.0);
    CHECK(volume.lambda_volume == 1e-4);

    const ExperimentConfig moments = parse_config(kv({{"problem", "moments"}}));
    CHECK(moments.lambda_length == 10.0);
    CHECK(moments.lambda_shape == 0.01);
    CHECK(moments.lambda_app == 1.0);
    CHECK(moments.bins == 100);
    CHECK(moments.order == 2);

    const ExperimentConfig l2 = parse_config(kv({{"problem", "l2"}}));
    CHECK(l2.lambda_app == 1.0);
    CHECK(l2.lambda_length == 1.0);

    const ExperimentConfig kl_cfg = parse_config(kv({{"problem", "kl"}}));
    CHECK(kl_cfg.lambda_app == 100.0);
    CHECK(kl_cfg.lambda_length == 0.01);

    const ExperimentConfig bh = parse_config(kv({{"problem", "bhattacharyya"}}));
    CHECK(bh.lambda_app == 1000.0);
    CHECK(bh.lambda_length == 0.01);
  }

  SUBCASE("default sweeps") {
    const ExperimentConfig cfg = parse_config(kv({}));
    CHECK(cfg.dt_list == std::vector<double>{1, 5, 10, 50, 100, 500, 1000});
    CHECK(cfg.alpha_list == std::vector<double>{1.01, 1.1, 2, 10});
  }

  SUBCASE("overrides and file parsing") {
    const std::string dir = temp_dir("segopt_cfg");
    const std::string path = dir + "/exp.cfg";
    {
      std::ofstream out(path);
      out << "# comment\n";
      out << "problem = volume\n";
      out << "v0 = 1234\n";
      out << "dt_list = 2,4\n";
    }
    auto m = read_config_file(path);
    apply_override(m, "v0=999");
    const ExperimentConfig cfg = parse_config(m);
    CHECK(cfg.problem == ProblemKind::Volume);
    CHECK(cfg.v0 == 999.0);
    CHECK(cfg.dt_list == std::vector<double>{2, 4});
  }

  SUBCASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(parse_config(kv({{"no_such_key", "1"}})), Error);
    CHECK_THROWS_AS(parse_config(kv({{"v0", "abc"}})), Error);
    CHECK_THROWS_AS(parse_config(kv({{"problem", "nope"}})), Error);
    CHECK_THROWS_AS(parse_config(kv({{"lambda_length", "-1"}})), Error);
  }

  SUBCASE("exactly one target spec for the appearance and shape problems") {
    CHECK_THROWS_AS(parse_config(kv({{"problem", "kl"},
                                     {"ellipse", "10,10,4,3,0"},
                                     {"target_mask", "gt.pgm"}})),
                    Error);
  }
}

TEST_CASE("run_experiment writes traces, masks and a summary") {
  const std::string dir = temp_dir("segopt_exp");
  ExperimentConfig cfg = parse_config(kv({{"problem", "volume"},
                                          {"solver", "ftr"},
                                          {"size", "48"},
                                          {"v0", "700"},
                                          {"alpha_list", "1.5,2"},
                                          {"max_iters", "60"},
                                          {"out_dir", dir},
                                          {"workers", "2"}}));
  const Summary summary = run_experiment(cfg);
  REQUIRE(summary.rows.size() == 2);
  CHECK(std::filesystem::exists(dir + "/trace_ftr_1.5.csv"));
  CHECK(std::filesystem::exists(dir + "/trace_ftr_2.csv"));
  CHECK(std::filesystem::exists(dir + "/mask_ftr_2.pgm"));
  CHECK(std::filesystem::exists(dir + "/summary.csv"));

  SUBCASE("summary round trips through the csv") {
    const Summary loaded = load_summary(dir + "/summary.csv");
    REQUIRE(loaded.rows.size() == 2);
    CHECK(loaded.problem_hash == summary.problem_hash);
    CHECK(loaded.rows[0].solver == "ftr");
    CHECK(loaded.rows[0].param == 1.5);
    CHECK(loaded.rows[0].energy == summary.rows[0].energy);
  }

  SUBCASE("trace csv schema is pinned") {
    std::string header;
    {
      std::ifstream in(dir + "/trace_ftr_2.csv");
      std::getline(in, header);
    }
    CHECK(header == "iter,cpu_ms,evals,E,R,L_cont,L_crofton,area,accepted,d");
  }

  SUBCASE("summary energy equals the last trace row for ftr") {
    const std::string csv = slurp(dir + "/trace_ftr_2.csv");
    std::stringstream ss(csv);
    std::string line, last;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
      if (!line.empty()) last = line;
    }
    std::stringstream ls(last);
    std::string field;
    for (int i = 0; i < 4; ++i) std::getline(ls, field, ',');
    CHECK(std::stod(field) == summary.rows[1].energy);
  }
}

TEST_CASE("byte-identical reruns modulo the timing column") {
  const std::string dir1 = temp_dir("segopt_det1");
  const std::string dir2 = temp_dir("segopt_det2");
  for (const std::string& dir : {dir1, dir2}) {
    ExperimentConfig cfg = parse_config(kv({{"problem", "volume"},
                                            {"solver", "levelset"},
                                            {"size", "40"},
                                            {"v0", "300"},
                                            {"dt_list", "1,5"},
                                            {"max_iters", "40"},
                                            {"seed", "11"},
                                            {"noise", "4"},
                                            {"out_dir", dir},
                                            {"workers", "2"}}));
    run_experiment(cfg);
  }
  for (const std::string name : {"trace_levelset_1.csv", "trace_levelset_5.csv"}) {
    CHECK(strip_cpu_column(slurp(dir1 + "/" + name)) ==
          strip_cpu_column(slurp(dir2 + "/" + name)));
  }
  CHECK(slurp(dir1 + "/mask_levelset_1.pgm") ==
        slurp(dir2 + "/mask_levelset_1.pgm"));

  std::string header;
  {
    std::ifstream in(dir1 + "/trace_levelset_1.csv");
    std::getline(in, header);
  }
  CHECK(header == "iter,cpu_ms,evals,E,R,L_cont,L_crofton,area");
}

TEST_CASE("appearance-free runs ignore the image content") {
  const std::string dir1 = temp_dir("segopt_app1");
  const std::string dir2 = temp_dir("segopt_app2");
  // Different noise seeds change the image; with no appearance term the
  // volume traces must match row for row.
  int which = 0;
  for (const std::string& dir : {dir1, dir2}) {
    ExperimentConfig cfg = parse_config(kv({{"problem", "volume"},
                                            {"solver", "levelset"},
                                            {"size", "40"},
                                            {"v0", "300"},
                                            {"dt_list", "1"},
                                            {"max_iters", "25"},
                                            {"seed", which++ == 0 ? "3" : "77"},
                                            {"noise", "10"},
                                            {"out_dir", dir}}));
    run_experiment(cfg);
  }
  CHECK(strip_cpu_column(slurp(dir1 + "/trace_levelset_1.csv")) ==
        strip_cpu_column(slurp(dir2 + "/trace_levelset_1.csv")));
}

TEST_CASE("compare") {
  const std::string dir_a = temp_dir("segopt_cmp_a");
  const std::string dir_b = temp_dir("segopt_cmp_b");
  ExperimentConfig base = parse_config(kv({{"problem", "volume"},
                                           {"solver", "ftr"},
                                           {"size", "48"},
                                           {"v0", "700"},
                                           {"alpha_list", "2"},
                                           {"max_iters", "60"}}));
  base.out_dir = dir_a;
  const Summary a = run_experiment(base);
  ExperimentConfig other = base;
  other.solver = SolverKind::LevelSet;
  other.dt_list = {1};
  other.max_iters = 80;
  other.out_dir = dir_b;
  const Summary b = run_experiment(other);

  SUBCASE("identical summaries give unit ratios") {
    const Comparison cmp = compare_summaries(a, a);
    CHECK(cmp.evals_ratio == 1.0);
    CHECK(cmp.cpu_ratio == 1.0);
    CHECK(cmp.gap_cont == 0.0);
    CHECK(cmp.gap_crofton == 0.0);
  }

  SUBCASE("cross-solver comparison reports and writes files") {
    const Comparison cmp = compare_summaries(a, b);
    CHECK(cmp.best_a.solver == "ftr");
    CHECK(cmp.best_b.solver == "levelset");
    CHECK(cmp.evals_ratio > 0.0);
    const std::string prefix = dir_a + "/cmp";
    write_comparison(cmp, a, b, prefix);
    CHECK(std::filesystem::exists(prefix + ".txt"));
    CHECK(std::filesystem::exists(prefix + ".csv"));
  }

  SUBCASE("different problems are refused") {
    ExperimentConfig changed = base;
    changed.v0 = 999;
    changed.out_dir = temp_dir("segopt_cmp_c");
    const Summary c = run_experiment(changed);
    CHECK_THROWS_AS(compare_summaries(a, c), Error);
  }
}

TEST_CASE("moments experiment end to end at small scale") {
  const std::string dir = temp_dir("segopt_moments");
  // The synthetic image is flat, so the appearance term carries no signal;
  // shape-dominant weights keep the desk-scale problem well posed.
  ExperimentConfig cfg = parse_config(kv({{"problem", "moments"},
                                          {"solver", "ftr"},
                                          {"size", "48"},
                                          {"ellipse", "24,24,12,8,0.3"},
                                          {"bins", "16"},
                                          {"order", "2"},
                                          {"lambda_shape", "1"},
                                          {"lambda_length", "0.5"},
                                          {"lambda_app", "0"},
                                          {"alpha_list", "2"},
                                          {"max_iters", "60"},
                                          {"out_dir", dir}}));
  const Summary summary = run_experiment(cfg);
  REQUIRE(summary.rows.size() == 1);
  CHECK(summary.rows[0].status != "aborted");
  // The shape prior pulls the square initialization toward the ellipse.
  const Labeling final_mask = load_mask(dir + "/mask_ftr_2.pgm");
  const Labeling ellipse_mask =
      targets_from_ellipse({24, 24, 12, 8, 0.3}, synth_image(48, 1, 0, 0, nullptr),
                           16, 2)
          .mask;
  std::size_t overlap = 0;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      if (final_mask.get(x, y) && ellipse_mask.get(x, y)) ++overlap;
    }
  }
  const double dice = 2.0 * static_cast<double>(overlap) /
                      static_cast<double>(final_mask.area() + ellipse_mask.area());
  CHECK(dice > 0.8);
}

namespace {

// Color image with a distinctly colored ellipse on a noisy background; the
// appearance experiments should recover the ellipse from the histograms.
std::string write_two_tone_image(const std::string& dir, int size,
                                 const EllipseSpec& e) {
  std::mt19937 rng(2718);
  std::uniform_real_distribution<double> noise(-12.0, 12.0);
  const double fg_color[3] = {185.0, 60.0, 120.0};
  const double bg_color[3] = {60.0, 150.0, 85.0};
  Image img(size, size, 3, 0.0);
  const double ct = std::cos(e.theta), st = std::sin(e.theta);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - e.cx, dy = y - e.cy;
      const double ex = (dx * ct + dy * st) / e.a;
      const double ey = (-dx * st + dy * ct) / e.b;
      const bool inside = ex * ex + ey * ey <= 1.0;
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = std::clamp(
            (inside ? fg_color[c] : bg_color[c]) + noise(rng), 0.0, 255.0);
      }
    }
  }
  const std::string path = dir + "/two_tone.ppm";
  save_image(img, path);
  return path;
}

double dice_against_ellipse(const Labeling& mask, const EllipseSpec& e) {
  const double ct = std::cos(e.theta), st = std::sin(e.theta);
  std::size_t overlap = 0, ellipse_area = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const double dx = x - e.cx, dy = y - e.cy;
      const double ex = (dx * ct + dy * st) / e.a;
      const double ey = (-dx * st + dy * ct) / e.b;
      const bool inside = ex * ex + ey * ey <= 1.0;
      ellipse_area += inside;
      overlap += inside && mask.get(x, y);
    }
  }
  return 2.0 * static_cast<double>(overlap) /
         static_cast<double>(mask.area() + ellipse_area);
}

}  // namespace

TEST_CASE("appearance experiments recover a colored ellipse") {
  const std::string dir = temp_dir("segopt_appearance");
  const EllipseSpec e{24.0, 22.0, 13.0, 9.0, 0.5};
  const std::string image = write_two_tone_image(dir, 48, e);

  // Paper-default weights per problem kind; trust region solver.
  for (const std::string problem : {"kl", "bhattacharyya", "l2"}) {
    const std::string out = dir + "/" + problem;
    ExperimentConfig cfg = parse_config(kv({{"problem", problem},
                                            {"image", image},
                                            {"ellipse", "24,22,13,9,0.5"},
                                            {"bins", "32"},
                                            {"solver", "ftr"},
                                            {"alpha_list", "2"},
                                            {"max_iters", "80"},
                                            {"out_dir", out}}));
    const Summary summary = run_experiment(cfg);
    REQUIRE(summary.rows.size() == 1);
    CHECK(summary.rows[0].status == "converged");
    const Labeling mask = load_mask(out + "/mask_ftr_2.pgm");
    CHECK(dice_against_ellipse(mask, e) > 0.9);
    CHECK(summary.rows[0].regional >= 0.0);
  }

  SUBCASE("level sets run the same appearance problem") {
    const std::string out = dir + "/kl_ls";
    ExperimentConfig cfg = parse_config(kv({{"problem", "kl"},
                                            {"image", image},
                                            {"ellipse", "24,22,13,9,0.5"},
                                            {"bins", "32"},
                                            {"solver", "levelset"},
                                            {"dt_list", "1"},
                                            {"max_iters", "400"},
                                            {"out_dir", out}}));
    const Summary summary = run_experiment(cfg);
    REQUIRE(summary.rows.size() == 1);
    CHECK(summary.rows[0].status != "aborted");
    const Labeling mask = load_mask(out + "/mask_levelset_1.pgm");
    CHECK(dice_against_ellipse(mask, e) > 0.5);
  }
}

TEST_CASE("bench file helpers") {
  const std::string dir = temp_dir("segopt_files");
  bench_synth(48, 500, 3, 2.0, dir + "/img.pgm", dir + "/init.pgm");
  CHECK(load_image(dir + "/img.pgm").width() == 48);
  CHECK(load_mask(dir + "/init.pgm").area() > 0);

  bench_targets(dir + "/img.pgm", {24, 24, 10, 8, 0.0}, 8, 2, dir + "/t");
  CHECK(load_moments(dir + "/t_moments.txt").size() == 6);
  CHECK(load_histogram(dir + "/t_fg.txt").bins() == 8);
  CHECK(load_mask(dir + "/t_mask.pgm").area() > 0);
}
