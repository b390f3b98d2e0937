#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "core/functionals.hpp"
#include "core/io.hpp"
#include "core/level_set.hpp"
#include "doctest.h"

using namespace segopt;

namespace {

Labeling disk_mask(int size, double cx, double cy, double r) {
  Labeling s(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (std::hypot(x - cx, y - cy) <= r) s.set(x, y, true);
    }
  }
  return s;
}

// Analytic signed distance of a disk, not the discrete transform.
ScalarField disk_sdf(int size, double cx, double cy, double r) {
  ScalarField phi(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      phi.at(x, y) = std::hypot(x - cx, y - cy) - r;
    }
  }
  return phi;
}

EnergyTerms volume_terms(double v0, double lambda_volume,
                         double lambda_length) {
  EnergyTerms terms;
  terms.regional.push_back({make_volume(v0), lambda_volume});
  terms.length_weight = lambda_length;
  terms.convention = LengthConvention::Continuous;
  return terms;
}

}  // namespace

TEST_CASE("init_phi") {
  Labeling s = disk_mask(32, 16, 16, 8);
  const LevelSetField field = init_phi(s);
  SUBCASE("negative strictly inside, positive strictly outside") {
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        if (s.get(x, y)) {
          CHECK(field.phi.at(x, y) < 0.0);
        } else {
          CHECK(field.phi.at(x, y) > 0.0);
        }
      }
    }
  }
  SUBCASE("extraction round trip") { CHECK(extract(field) == s); }
  SUBCASE("boundary-adjacent pixels have |phi| = 0.5") {
    int found = 0;
    for (int y = 0; y < 31; ++y) {
      for (int x = 0; x < 31; ++x) {
        if (s.get(x, y) != s.get(x + 1, y)) {
          CHECK(std::min(std::abs(field.phi.at(x, y)),
                         std::abs(field.phi.at(x + 1, y))) ==
                doctest::Approx(0.5).epsilon(1e-12));
          ++found;
        }
      }
    }
    CHECK(found > 0);
  }
  SUBCASE("degenerate masks are rejected") {
    CHECK_THROWS_AS(init_phi(Labeling(8, 8)), Error);
    CHECK_THROWS_AS(init_phi(Labeling(8, 8, true)), Error);
  }
}

TEST_CASE("dirac regularization") {
  CHECK(dirac(0.0, 1.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(dirac(1.5, 1.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dirac(2.0, 1.5) == 0.0);
  CHECK(dirac(-2.0, 1.5) == 0.0);

  SUBCASE("even, exactly") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> t(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
      const double v = t(rng);
      CHECK(dirac(v, 1.5) == dirac(-v, 1.5));
    }
  }
  SUBCASE("unit mass by trapezoid quadrature") {
    const double eps = 1.5;
    const double h = 1e-4;
    double mass = 0.0;
    const int n = static_cast<int>(2 * eps / h);
    for (int i = 0; i <= n; ++i) {
      const double t = -eps + i * h;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      mass += w * dirac(t, eps) * h;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("curvature") {
  SUBCASE("disk: kappa at the boundary is about 1/r, positive") {
    for (double r : {10.0, 15.0, 20.0}) {
      const ScalarField phi = disk_sdf(64, 32, 32, r);
      // Probe a boundary-adjacent pixel on the +x axis.
      const int bx = static_cast<int>(32 + r);
      const double k = curvature(phi, bx, 32);
      CHECK(k > 0.0);
      CHECK(k == doctest::Approx(1.0 / r).epsilon(0.10));
    }
  }
  SUBCASE("planar ramp has zero curvature") {
    ScalarField phi(24, 24);
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 24; ++x) phi.at(x, y) = 0.3 * x + 0.7 * y - 5.0;
    }
    for (int y = 2; y < 22; ++y) {
      for (int x = 2; x < 22; ++x) {
        CHECK(std::abs(curvature(phi, x, y)) <= 1e-6);
      }
    }
  }
  SUBCASE("field agrees with the pointwise version") {
    const ScalarField phi = disk_sdf(32, 16, 16, 9);
    const ScalarField k = curvature_field(phi);
    for (int y = 0; y < 32; y += 5) {
      for (int x = 0; x < 32; x += 5) {
        CHECK(k.at(x, y) == curvature(phi, x, y));
      }
    }
  }
}

TEST_CASE("length_continuous") {
  SUBCASE("disk perimeter within 5%") {
    const ScalarField phi = disk_sdf(128, 64, 64, 30);
    CHECK(length_continuous(phi, 1.5) ==
          doctest::Approx(2 * std::numbers::pi * 30).epsilon(0.05));
  }
  SUBCASE("no zero level set in band gives zero") {
    CHECK(length_continuous(ScalarField(32, 32, 10.0), 1.5) == 0.0);
  }
  SUBCASE("doubling the radius doubles the length") {
    const double l1 = length_continuous(disk_sdf(160, 80, 80, 18), 1.5);
    const double l2 = length_continuous(disk_sdf(160, 80, 80, 36), 1.5);
    CHECK(l2 / l1 == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("step") {
  LevelSetConfig cfg;
  cfg.dt = 1.0;

  SUBCASE("zero forces leave phi unchanged") {
    cfg.mu = 0.0;
    const LevelSetField field = init_phi(disk_mask(24, 12, 12, 6));
    const ScalarField zero(24, 24, 0.0);
    const LevelSetField next = step(field, zero, 0.0, cfg);
    for (std::size_t i = 0; i < next.phi.data().size(); ++i) {
      CHECK(next.phi.data()[i] == field.phi.data()[i]);
    }
    CHECK(next.iteration == field.iteration + 1);
  }

  SUBCASE("pure curvature flow shrinks a disk") {
    cfg.mu = 0.05;
    LevelSetField field = init_phi(disk_mask(48, 24, 24, 14));
    const ScalarField zero(48, 48, 0.0);
    std::size_t prev_area = extract(field).area();
    const std::size_t start_area = prev_area;
    for (int j = 0; j < 200; ++j) {
      field = step(field, zero, 1.0, cfg);
      const std::size_t area = extract(field).area();
      CHECK(area <= prev_area + 2);  // monotone up to pixel rounding
      prev_area = area;
    }
    CHECK(prev_area < start_area);
    // dr/dt = -lambda/r integrates to r^2(t) = r0^2 - 2 lambda t; coarse
    // tolerance for the band discretization.
    const double expected_area =
        std::numbers::pi * (14.0 * 14.0 - 2.0 * 1.0 * 200.0 / 14.0 * 14.0 / 14.0);
    CHECK(static_cast<double>(prev_area) ==
          doctest::Approx(expected_area).epsilon(0.25));
  }

  SUBCASE("distance penalty keeps |grad phi| near 1 in the band") {
    cfg.mu = 0.2;
    cfg.dt = 1.0;
    // Start from a deliberately distorted embedding: 2x a signed distance.
    LevelSetField field = init_phi(disk_mask(48, 24, 24, 12));
    for (auto& v : field.phi.data()) v *= 2.0;

    const auto band_deviation = [&](const LevelSetField& f) {
      double total = 0.0;
      int count = 0;
      for (int y = 1; y < 47; ++y) {
        for (int x = 1; x < 47; ++x) {
          if (std::abs(f.phi.at(x, y)) >= 1.5) continue;
          const double gx = 0.5 * (f.phi.at(x + 1, y) - f.phi.at(x - 1, y));
          const double gy = 0.5 * (f.phi.at(x, y + 1) - f.phi.at(x, y - 1));
          total += std::abs(std::sqrt(gx * gx + gy * gy) - 1.0);
          ++count;
        }
      }
      return count > 0 ? total / count : 0.0;
    };

    const double before = band_deviation(field);
    const ScalarField zero(48, 48, 0.0);
    for (int j = 0; j < 100; ++j) field = step(field, zero, 0.0, cfg);
    CHECK(band_deviation(field) <= before);
  }

  SUBCASE("with mu = 0 nothing outside the dirac band changes") {
    cfg.mu = 0.0;
    cfg.dt = 2.0;
    const LevelSetField field = init_phi(disk_mask(32, 16, 16, 9));
    ScalarField g(32, 32, 0.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> force(-1.0, 1.0);
    for (auto& v : g.data()) v = force(rng);
    const LevelSetField next = step(field, g, 1.0, cfg);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        if (std::abs(field.phi.at(x, y)) > cfg.epsilon) {
          CHECK(next.phi.at(x, y) == field.phi.at(x, y));
        }
      }
    }
  }

  SUBCASE("non-finite update is a hard failure") {
    cfg.mu = 10.0;
    cfg.dt = 1e30;
    LevelSetField field = init_phi(disk_mask(16, 8, 8, 4));
    const ScalarField zero(16, 16, 0.0);
    bool threw = false;
    try {
      for (int j = 0; j < 500; ++j) field = step(field, zero, 0.0, cfg);
    } catch (const Error& e) {
      threw = true;
      CHECK(e.code() == ErrorCode::Numeric);
    }
    CHECK(threw);
  }
}

TEST_CASE("run_level_set") {
  Image img(48, 48, 1, 128.0);
  const Labeling init = disk_mask(48, 24, 24, 10);

  SUBCASE("max_iters = 0 returns the initial mask with an empty trace") {
    LevelSetConfig cfg;
    cfg.max_iters = 0;
    EvalCounter counter;
    const RunResult result =
        run_level_set(img, init, volume_terms(500, 1e-3, 1.0), cfg, counter);
    CHECK(result.labeling == init);
    CHECK(result.trace.rows.empty());
  }

  SUBCASE("volume descent moves the area toward the target") {
    LevelSetConfig cfg;
    cfg.dt = 1.0;
    cfg.max_iters = 400;
    EvalCounter counter;
    // Strong volume pull, no length: area should grow from ~314 toward 600.
    const RunResult result =
        run_level_set(img, init, volume_terms(600, 1e-2, 0.0), cfg, counter);
    CHECK(static_cast<double>(result.labeling.area()) ==
          doctest::Approx(600.0).epsilon(0.05));
  }

  SUBCASE("trace replay equality on stored masks") {
    LevelSetConfig cfg;
    cfg.dt = 1.0;
    cfg.max_iters = 30;
    cfg.record_masks = true;
    EnergyTerms terms = volume_terms(500, 1e-3, 1.0);
    EvalCounter counter;
    const RunResult result = run_level_set(img, init, terms, cfg, counter);
    REQUIRE(result.trace.masks.size() == result.trace.rows.size());
    for (std::size_t i = 0; i < result.trace.rows.size(); ++i) {
      const EnergyReport replay =
          composite_energy(terms, img, result.trace.masks[i], nullptr);
      CHECK(replay.total == result.trace.rows[i].energy);
      CHECK(result.trace.rows[i].area == result.trace.masks[i].area());
    }
  }

  SUBCASE("returned labeling is the best energy seen") {
    LevelSetConfig cfg;
    cfg.dt = 5.0;
    cfg.max_iters = 60;
    EnergyTerms terms = volume_terms(400, 1e-3, 1.0);
    EvalCounter counter;
    const RunResult result = run_level_set(img, init, terms, cfg, counter);
    const double final_energy =
        composite_energy(terms, img, result.labeling, nullptr).total;
    for (const auto& row : result.trace.rows) {
      CHECK(final_energy <= row.energy + 1e-12);
    }
  }

  SUBCASE("field snapshots are dumped every N iterations") {
    const auto dir = std::filesystem::temp_directory_path() / "segopt_snaps";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    LevelSetConfig cfg;
    cfg.dt = 1.0;
    cfg.max_iters = 10;
    cfg.snapshot_every = 4;
    cfg.snapshot_prefix = (dir / "phi_").string();
    EvalCounter counter;
    run_level_set(img, init, volume_terms(500, 1e-3, 1.0), cfg, counter);
    CHECK(std::filesystem::exists(dir / "phi_4.sfld"));
    CHECK(std::filesystem::exists(dir / "phi_8.sfld"));
    CHECK(!std::filesystem::exists(dir / "phi_5.sfld"));
    const ScalarField phi = load_field((dir / "phi_8.sfld").string());
    CHECK(phi.width() == 48);
    CHECK(phi.height() == 48);
  }

  SUBCASE("one counted evaluation per iteration plus the initial one") {
    LevelSetConfig cfg;
    cfg.dt = 1.0;
    cfg.max_iters = 17;
    EvalCounter counter;
    const RunResult result =
        run_level_set(img, init, volume_terms(500, 1e-3, 1.0), cfg, counter);
    CHECK(counter.count() == result.trace.rows.size() + 1);
    CHECK(result.trace.rows.back().evals == counter.count());
  }
}

TEST_CASE("run_level_set_adaptive") {
  Image img(48, 48, 1, 128.0);
  const Labeling init = disk_mask(48, 24, 24, 10);

  SUBCASE("accepted energies strictly decrease") {
    LevelSetConfig cfg;
    cfg.dt = 10.0;
    cfg.max_iters = 50;
    EvalCounter counter;
    const RunResult result = run_level_set_adaptive(
        img, init, volume_terms(700, 1e-2, 0.5), cfg, counter);
    REQUIRE(!result.accepted_energies.empty());
    for (std::size_t i = 1; i < result.accepted_energies.size(); ++i) {
      CHECK(result.accepted_energies[i] < result.accepted_energies[i - 1]);
    }
  }

  SUBCASE("stalls when there is no force at all") {
    LevelSetConfig cfg;
    cfg.dt = 1.0;
    cfg.max_iters = 10;
    EnergyTerms terms;
    terms.regional.push_back({make_volume(100.0), 0.0});  // weight 0: g == 0
    terms.convention = LengthConvention::Continuous;
    EvalCounter counter;
    const RunResult result =
        run_level_set_adaptive(img, init, terms, cfg, counter);
    CHECK(result.status == RunStatus::Stalled);
    CHECK(result.labeling == init);
  }

  SUBCASE("stops earlier than the fixed-step run on a hard problem") {
    LevelSetConfig cfg;
    cfg.dt = 1.0;
    cfg.max_iters = 300;
    EnergyTerms terms = volume_terms(900, 1e-3, 1.0);
    EvalCounter c1, c2;
    const RunResult adaptive =
        run_level_set_adaptive(img, init, terms, cfg, c1);
    const RunResult fixed = run_level_set(img, init, terms, cfg, c2);
    CHECK(adaptive.iterations <= fixed.iterations);
  }
}
