// Exercises the shared-library surface: opaque handles, status codes and the
// thread-local error message, plus a small end-to-end bench round trip.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "segopt/segopt.h"

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

segopt_labeling* make_disk(uint32_t size, double r) {
  std::vector<uint8_t> mask(size * size, 0);
  const double c = (size - 1) / 2.0;
  for (uint32_t y = 0; y < size; ++y) {
    for (uint32_t x = 0; x < size; ++x) {
      if (std::hypot(x - c, y - c) <= r) mask[y * size + x] = 1;
    }
  }
  segopt_labeling* s = nullptr;
  REQUIRE(segopt_labeling_create(size, size, mask.data(), &s) == SEGOPT_OK);
  return s;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(segopt_version() != nullptr);
  CHECK(std::strcmp(segopt_status_name(SEGOPT_OK), "ok") == 0);
  CHECK(std::strcmp(segopt_status_name(SEGOPT_ERROR_IO), "io error") == 0);
}

TEST_CASE("null arguments produce a status and an error message") {
  CHECK(segopt_image_load(nullptr, nullptr) == SEGOPT_ERROR_INVALID_ARGUMENT);
  CHECK(std::strlen(segopt_last_error()) > 0);

  segopt_image* img = nullptr;
  CHECK(segopt_image_load("/nonexistent/file.pgm", &img) == SEGOPT_ERROR_IO);
  CHECK(img == nullptr);
}

TEST_CASE("image and labeling round trip through handles") {
  std::vector<double> data(32 * 32, 100.0);
  segopt_image* img = nullptr;
  REQUIRE(segopt_image_create(32, 32, 1, data.data(), &img) == SEGOPT_OK);
  CHECK(segopt_image_width(img) == 32);
  CHECK(segopt_image_channels(img) == 1);

  segopt_labeling* s = make_disk(32, 8.0);
  CHECK(segopt_labeling_area(s) > 0);

  SUBCASE("signed distance flags degenerate masks") {
    segopt_labeling* empty = nullptr;
    REQUIRE(segopt_labeling_create(8, 8, nullptr, &empty) == SEGOPT_OK);
    int degenerate = 0;
    segopt_field* field = nullptr;
    REQUIRE(segopt_signed_distance(empty, &degenerate, &field) == SEGOPT_OK);
    CHECK(degenerate == 1);
    segopt_field_destroy(field);
    segopt_labeling_destroy(empty);
  }

  SUBCASE("linear sum via fields") {
    segopt_field* ones = nullptr;
    std::vector<double> fv(32 * 32, 1.0);
    REQUIRE(segopt_field_create(32, 32, fv.data(), &ones) == SEGOPT_OK);
    double sum = -1.0;
    REQUIRE(segopt_linear_sum(ones, s, &sum) == SEGOPT_OK);
    CHECK(sum == static_cast<double>(segopt_labeling_area(s)));
    segopt_field_destroy(ones);
  }

  SUBCASE("dimension mismatch is reported as such") {
    segopt_field* small = nullptr;
    REQUIRE(segopt_field_create(4, 4, nullptr, &small) == SEGOPT_OK);
    double sum = 0.0;
    CHECK(segopt_linear_sum(small, s, &sum) == SEGOPT_ERROR_DIMENSION_MISMATCH);
    segopt_field_destroy(small);
  }

  segopt_labeling_destroy(s);
  segopt_image_destroy(img);
}

TEST_CASE("models and energy through the C surface") {
  segopt_image* img = nullptr;
  REQUIRE(segopt_image_create(24, 24, 1, nullptr, &img) == SEGOPT_OK);
  segopt_labeling* s = make_disk(24, 6.0);

  // V0 and weight chosen so the target disk beats the empty set.
  segopt_model* volume = nullptr;
  REQUIRE(segopt_model_volume(400.0, &volume) == SEGOPT_OK);
  double value = 0.0;
  REQUIRE(segopt_model_evaluate(volume, img, s, &value) == SEGOPT_OK);
  const double area = static_cast<double>(segopt_labeling_area(s));
  CHECK(value == (area - 400.0) * (area - 400.0));

  segopt_field* grad = nullptr;
  REQUIRE(segopt_model_gradient(volume, img, s, &grad) == SEGOPT_OK);
  std::vector<double> gv(24 * 24);
  REQUIRE(segopt_field_data(grad, gv.data(), gv.size()) == SEGOPT_OK);
  CHECK(gv[0] == 2.0 * (area - 400.0));
  segopt_field_destroy(grad);

  CHECK(segopt_model_volume(-1.0, &volume) == SEGOPT_ERROR_INVALID_ARGUMENT);

  segopt_energy* energy = nullptr;
  REQUIRE(segopt_energy_create(&energy) == SEGOPT_OK);
  REQUIRE(segopt_energy_add_model(energy, volume, 1e-2) == SEGOPT_OK);
  REQUIRE(segopt_energy_set_length(energy, 1.0, 1, 16, 1.5) == SEGOPT_OK);
  segopt_energy_report report{};
  REQUIRE(segopt_energy_evaluate(energy, img, s, &report) == SEGOPT_OK);
  CHECK(report.total ==
        doctest::Approx(1e-2 * value + report.length_crofton).epsilon(1e-12));
  CHECK(report.evaluations == 1);
  REQUIRE(segopt_energy_evaluate(energy, img, s, &report) == SEGOPT_OK);
  CHECK(report.evaluations == 2);
  REQUIRE(segopt_energy_reset_evaluations(energy) == SEGOPT_OK);

  SUBCASE("ftr run descends and returns a trace") {
    segopt_ftr_options opts;
    segopt_ftr_defaults(&opts);
    opts.max_iters = 80;
    segopt_labeling* final_mask = nullptr;
    segopt_trace* trace = nullptr;
    segopt_run_status status;
    REQUIRE(segopt_ftr_run(img, s, energy, &opts, &final_mask, &trace,
                           &status) == SEGOPT_OK);
    CHECK(segopt_trace_rows(trace) > 0);
    CHECK(segopt_trace_evaluations(trace) > 0);
    CHECK(static_cast<double>(segopt_labeling_area(final_mask)) ==
          doctest::Approx(400.0).epsilon(0.15));

    const std::string dir = temp_dir("segopt_capi_trace");
    CHECK(segopt_trace_save_csv(trace, (dir + "/t.csv").c_str()) == SEGOPT_OK);
    CHECK(std::filesystem::exists(dir + "/t.csv"));
    segopt_trace_destroy(trace);
    segopt_labeling_destroy(final_mask);
  }

  SUBCASE("level set run with defaults") {
    segopt_levelset_options opts;
    segopt_levelset_defaults(&opts);
    opts.max_iters = 40;
    segopt_labeling* final_mask = nullptr;
    segopt_run_status status;
    REQUIRE(segopt_levelset_run(img, s, energy, &opts, &final_mask, nullptr,
                                &status) == SEGOPT_OK);
    CHECK(segopt_labeling_area(final_mask) > 0);
    segopt_labeling_destroy(final_mask);
  }

  SUBCASE("adaptive level set run reports its status") {
    segopt_levelset_options opts;
    segopt_levelset_defaults(&opts);
    opts.adaptive = 1;
    opts.max_iters = 60;
    segopt_labeling* final_mask = nullptr;
    segopt_trace* trace = nullptr;
    segopt_run_status status;
    REQUIRE(segopt_levelset_run(img, s, energy, &opts, &final_mask, &trace,
                                &status) == SEGOPT_OK);
    CHECK((status == SEGOPT_RUN_STALLED || status == SEGOPT_RUN_CAPPED ||
           status == SEGOPT_RUN_CONVERGED));
    CHECK(segopt_trace_evaluations(trace) > 0);
    segopt_trace_destroy(trace);
    segopt_labeling_destroy(final_mask);
  }

  segopt_energy_destroy(energy);
  segopt_model_destroy(volume);
  segopt_labeling_destroy(s);
  segopt_image_destroy(img);
}

TEST_CASE("maxflow through the C surface") {
  segopt_flow* flow = nullptr;
  REQUIRE(segopt_flow_create(&flow) == SEGOPT_OK);
  uint32_t first = 99;
  REQUIRE(segopt_flow_add_nodes(flow, 2, &first) == SEGOPT_OK);
  CHECK(first == 0);
  REQUIRE(segopt_flow_add_terminal(flow, 0, 3.0, 0.0) == SEGOPT_OK);
  REQUIRE(segopt_flow_add_edge(flow, 0, 1, 2.0, 0.0) == SEGOPT_OK);
  REQUIRE(segopt_flow_add_terminal(flow, 1, 0.0, 5.0) == SEGOPT_OK);

  int side = -1;
  CHECK(segopt_flow_cut_side(flow, 0, &side) == SEGOPT_ERROR_STATE);

  double value = 0.0;
  REQUIRE(segopt_flow_solve(flow, &value) == SEGOPT_OK);
  CHECK(value == doctest::Approx(2.0).epsilon(1e-12));
  REQUIRE(segopt_flow_cut_side(flow, 0, &side) == SEGOPT_OK);
  CHECK(side == 1);
  REQUIRE(segopt_flow_cut_side(flow, 1, &side) == SEGOPT_OK);
  CHECK(side == 0);

  CHECK(segopt_flow_add_edge(flow, 0, 1, 1.0, 0.0) == SEGOPT_ERROR_STATE);
  CHECK(segopt_flow_add_edge(flow, 0, 9, 1.0, 0.0) != SEGOPT_OK);
  segopt_flow_destroy(flow);
}

TEST_CASE("bench pipeline through the C surface") {
  const std::string dir = temp_dir("segopt_capi_bench");
  const std::string img_path = dir + "/img.pgm";
  const std::string init_path = dir + "/init.pgm";
  REQUIRE(segopt_bench_synth(48, 600, 5, 0.0, img_path.c_str(),
                             init_path.c_str()) == SEGOPT_OK);
  CHECK(std::filesystem::exists(img_path));
  CHECK(std::filesystem::exists(init_path));

  REQUIRE(segopt_bench_targets(img_path.c_str(), 24, 24, 10, 8, 0.0, 8, 2,
                               (dir + "/t").c_str()) == SEGOPT_OK);
  CHECK(std::filesystem::exists(dir + "/t_moments.txt"));
  CHECK(std::filesystem::exists(dir + "/t_fg.txt"));

  const std::string out_a = dir + "/ftr";
  std::vector<std::string> overrides = {
      "problem=volume", "solver=ftr",      "size=48",
      "v0=600",         "alpha_list=2",    "max_iters=60",
      "out_dir=" + out_a};
  std::vector<const char*> ptrs;
  for (const auto& o : overrides) ptrs.push_back(o.c_str());
  char summary_path[512] = {0};
  REQUIRE(segopt_bench_run(nullptr, ptrs.data(), ptrs.size(), summary_path,
                           sizeof summary_path) == SEGOPT_OK);
  CHECK(std::string(summary_path) == out_a + "/summary.csv");

  const std::string out_b = dir + "/ls";
  overrides = {"problem=volume", "solver=levelset", "size=48",
               "v0=600",         "dt_list=1",       "max_iters=60",
               "out_dir=" + out_b};
  ptrs.clear();
  for (const auto& o : overrides) ptrs.push_back(o.c_str());
  REQUIRE(segopt_bench_run(nullptr, ptrs.data(), ptrs.size(), nullptr, 0) ==
          SEGOPT_OK);

  REQUIRE(segopt_bench_compare((out_a + "/summary.csv").c_str(),
                               (out_b + "/summary.csv").c_str(),
                               (dir + "/cmp").c_str()) == SEGOPT_OK);
  CHECK(std::filesystem::exists(dir + "/cmp.txt"));
  CHECK(std::filesystem::exists(dir + "/cmp.csv"));

  // Mismatched problems are refused with a hash message.
  const std::string out_c = dir + "/other";
  overrides = {"problem=volume", "solver=ftr",   "size=48",
               "v0=999",         "alpha_list=2", "max_iters=30",
               "out_dir=" + out_c};
  ptrs.clear();
  for (const auto& o : overrides) ptrs.push_back(o.c_str());
  REQUIRE(segopt_bench_run(nullptr, ptrs.data(), ptrs.size(), nullptr, 0) ==
          SEGOPT_OK);
  CHECK(segopt_bench_compare((out_a + "/summary.csv").c_str(),
                             (out_c + "/summary.csv").c_str(),
                             (dir + "/cmp2").c_str()) ==
        SEGOPT_ERROR_INVALID_ARGUMENT);
  CHECK(std::string(segopt_last_error()).find("hash") != std::string::npos);
}
