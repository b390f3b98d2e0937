#include "core/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "core/io.hpp"
#include "core/level_set.hpp"
#include "core/trust_region.hpp"

namespace segopt {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_param(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& key) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad number '" + item + "' in " + key);
    }
  }
  require(!values.empty(), ErrorCode::InvalidArgument, key + " list is empty");
  return values;
}

double parse_double(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    require(pos == text.size(), ErrorCode::InvalidArgument,
            "bad number for " + key);
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "bad number '" + text + "' for " + key);
  }
}

long parse_long(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(text, &pos);
    require(pos == text.size(), ErrorCode::InvalidArgument,
            "bad integer for " + key);
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "bad integer '" + text + "' for " + key);
  }
}

EllipseSpec parse_ellipse(const std::string& text) {
  const std::vector<double> v = parse_double_list(text, "ellipse");
  require(v.size() == 5, ErrorCode::InvalidArgument,
          "ellipse needs cx,cy,a,b,theta");
  EllipseSpec e{v[0], v[1], v[2], v[3], v[4]};
  require(e.a > 0.0 && e.b > 0.0, ErrorCode::InvalidArgument,
          "ellipse semi-axes must be positive");
  return e;
}

// FNV-1a, enough to tell problems apart in summaries.
std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Labeling centered_square(int width, int height, double target_area) {
  const int max_side = std::max(1, std::min(width, height) - 2);
  int side = static_cast<int>(std::lround(std::sqrt(std::max(1.0, target_area))));
  side = std::clamp(side, 1, max_side);
  Labeling mask(width, height);
  const int x0 = (width - side) / 2;
  const int y0 = (height - side) / 2;
  for (int y = y0; y < y0 + side; ++y) {
    for (int x = x0; x < x0 + side; ++x) mask.set(x, y, true);
  }
  return mask;
}

}  // namespace

const char* problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Volume: return "volume";
    case ProblemKind::Moments: return "moments";
    case ProblemKind::L2: return "l2";
    case ProblemKind::KL: return "kl";
    case ProblemKind::Bhattacharyya: return "bhattacharyya";
  }
  return "unknown";
}

const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::LevelSet: return "levelset";
    case SolverKind::LevelSetAdaptive: return "levelset-adaptive";
    case SolverKind::TrustRegion: return "ftr";
  }
  return "unknown";
}

ProblemKind parse_problem(const std::string& name) {
  if (name == "volume") return ProblemKind::Volume;
  if (name == "moments") return ProblemKind::Moments;
  if (name == "l2") return ProblemKind::L2;
  if (name == "kl") return ProblemKind::KL;
  if (name == "bhattacharyya") return ProblemKind::Bhattacharyya;
  fail(ErrorCode::InvalidArgument, "unknown problem kind: " + name);
}

SolverKind parse_solver(const std::string& name) {
  if (name == "levelset") return SolverKind::LevelSet;
  if (name == "levelset-adaptive") return SolverKind::LevelSetAdaptive;
  if (name == "ftr") return SolverKind::TrustRegion;
  fail(ErrorCode::InvalidArgument, "unknown solver: " + name);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io,
          path + ": cannot open for reading");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::Io,
            path + ": expected key=value, got: " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_override(std::map<std::string, std::string>& kv,
                    const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  require(eq != std::string::npos && eq > 0, ErrorCode::InvalidArgument,
          "override must be key=value: " + key_equals_value);
  kv[key_equals_value.substr(0, eq)] = key_equals_value.substr(eq + 1);
}

ExperimentConfig parse_config(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("problem")) cfg.problem = parse_problem(*v);
  if (const auto* v = get("solver")) cfg.solver = parse_solver(*v);
  if (const auto* v = get("image")) cfg.image_path = *v;
  if (const auto* v = get("size")) cfg.size = static_cast<int>(parse_long(*v, "size"));
  if (const auto* v = get("noise")) cfg.noise = parse_double(*v, "noise");
  if (const auto* v = get("v0")) cfg.v0 = parse_double(*v, "v0");
  if (const auto* v = get("ellipse")) cfg.ellipse = parse_ellipse(*v);
  if (const auto* v = get("target_mask")) cfg.target_mask_path = *v;
  if (const auto* v = get("init_mask")) cfg.init_mask_path = *v;
  if (const auto* v = get("bins")) cfg.bins = static_cast<int>(parse_long(*v, "bins"));
  if (const auto* v = get("order")) cfg.order = static_cast<int>(parse_long(*v, "order"));
  if (const auto* v = get("dt_list")) cfg.dt_list = parse_double_list(*v, "dt_list");
  if (const auto* v = get("alpha_list")) cfg.alpha_list = parse_double_list(*v, "alpha_list");
  if (const auto* v = get("max_iters")) cfg.max_iters = static_cast<int>(parse_long(*v, "max_iters"));
  if (const auto* v = get("epsilon")) cfg.epsilon = parse_double(*v, "epsilon");
  if (const auto* v = get("mu")) cfg.mu = parse_double(*v, "mu");
  if (const auto* v = get("d0")) cfg.d0 = parse_double(*v, "d0");
  if (const auto* v = get("tau2")) cfg.tau2 = parse_double(*v, "tau2");
  if (const auto* v = get("crofton_order")) cfg.crofton_order = static_cast<int>(parse_long(*v, "crofton_order"));
  if (const auto* v = get("seed")) cfg.seed = static_cast<std::uint64_t>(parse_long(*v, "seed"));
  if (const auto* v = get("out_dir")) cfg.out_dir = *v;
  if (const auto* v = get("workers")) cfg.workers = static_cast<int>(parse_long(*v, "workers"));

  // Weight defaults follow the experiment family when not set explicitly.
  auto weight = [&](const char* key, double fallback) {
    const auto* v = get(key);
    return v ? parse_double(*v, key) : fallback;
  };
  switch (cfg.problem) {
    case ProblemKind::Volume:
      cfg.lambda_length = weight("lambda_length", 1.0);
      cfg.lambda_volume = weight("lambda_volume", 1e-4);
      cfg.lambda_shape = weight("lambda_shape", 0.0);
      cfg.lambda_app = weight("lambda_app", 0.0);
      break;
    case ProblemKind::Moments:
      cfg.lambda_length = weight("lambda_length", 10.0);
      cfg.lambda_shape = weight("lambda_shape", 0.01);
      cfg.lambda_app = weight("lambda_app", 1.0);
      cfg.lambda_volume = weight("lambda_volume", 0.0);
      break;
    case ProblemKind::L2:
      cfg.lambda_app = weight("lambda_app", 1.0);
      cfg.lambda_length = weight("lambda_length", 1.0);
      cfg.lambda_shape = weight("lambda_shape", 0.0);
      cfg.lambda_volume = weight("lambda_volume", 0.0);
      break;
    case ProblemKind::KL:
      cfg.lambda_app = weight("lambda_app", 100.0);
      cfg.lambda_length = weight("lambda_length", 0.01);
      cfg.lambda_shape = weight("lambda_shape", 0.0);
      cfg.lambda_volume = weight("lambda_volume", 0.0);
      break;
    case ProblemKind::Bhattacharyya:
      cfg.lambda_app = weight("lambda_app", 1000.0);
      cfg.lambda_length = weight("lambda_length", 0.01);
      cfg.lambda_shape = weight("lambda_shape", 0.0);
      cfg.lambda_volume = weight("lambda_volume", 0.0);
      break;
  }

  for (const auto& [key, value] : kv) {
    static const std::set<std::string> known = {
        "problem", "solver", "image", "size", "noise", "v0", "ellipse",
        "target_mask", "init_mask", "bins", "order", "dt_list", "alpha_list",
        "max_iters", "epsilon", "mu", "d0", "tau2", "crofton_order", "seed",
        "out_dir", "workers", "lambda_length", "lambda_volume", "lambda_shape",
        "lambda_app"};
    require(known.count(key) != 0, ErrorCode::InvalidArgument,
            "unknown config key: " + key + "=" + value);
  }

  require(cfg.size >= 32, ErrorCode::InvalidArgument, "size must be >= 32");
  require(cfg.bins >= 1, ErrorCode::InvalidArgument, "bins must be >= 1");
  require(cfg.order >= 0, ErrorCode::InvalidArgument, "order must be >= 0");
  require(cfg.lambda_length >= 0 && cfg.lambda_volume >= 0 &&
              cfg.lambda_shape >= 0 && cfg.lambda_app >= 0,
          ErrorCode::InvalidArgument, "weights must be >= 0");
  if (cfg.problem != ProblemKind::Volume) {
    require(!(cfg.ellipse.has_value() && !cfg.target_mask_path.empty()),
            ErrorCode::InvalidArgument,
            "give either an ellipse or a target mask, not both");
  }
  return cfg;
}

Image synth_image(int size, std::uint64_t seed, double noise, double v0,
                  Labeling* initial_mask) {
  require(size >= 32, ErrorCode::InvalidArgument,
          "synthetic image size must be >= 32");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Image img(size, size, 1, 128.0);
  if (noise != 0.0) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        img.at(x, y) = std::clamp(128.0 + noise * uni(rng), 0.0, 255.0);
      }
    }
  }
  if (initial_mask) {
    const double target = v0 > 0.0 ? v0 / 2.0 : 0.25 * size * size;
    *initial_mask = centered_square(size, size, target);
  }
  return img;
}

EllipseTargets targets_from_ellipse(const EllipseSpec& ellipse, const Image& img,
                                    int bins, int order) {
  require(ellipse.a > 0.0 && ellipse.b > 0.0, ErrorCode::InvalidArgument,
          "ellipse semi-axes must be positive");
  require(order >= 0, ErrorCode::InvalidArgument, "order must be >= 0");

  Labeling mask(img.width(), img.height());
  const double ct = std::cos(ellipse.theta);
  const double st = std::sin(ellipse.theta);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double dx = x - ellipse.cx;
      const double dy = y - ellipse.cy;
      const double ex = (dx * ct + dy * st) / ellipse.a;
      const double ey = (-dx * st + dy * ct) / ellipse.b;
      if (ex * ex + ey * ey <= 1.0) mask.set(x, y, true);
    }
  }
  require(!mask.empty(), ErrorCode::InvalidArgument,
          "ellipse rasterization is empty");
  require(!mask.full(), ErrorCode::InvalidArgument,
          "ellipse covers the whole grid; no background left");

  std::vector<MomentTarget> moments;
  for (int p = 0; p <= order; ++p) {
    for (int q = 0; p + q <= order; ++q) {
      moments.push_back({p, q, 0.0});
    }
  }
  const auto model = make_moments(moments, order);
  const auto values = model->features(img, mask);
  for (std::size_t i = 0; i < moments.size(); ++i) moments[i].value = values[i];

  Labeling complement(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      complement.set(x, y, !mask.get(x, y));
    }
  }
  Histogram fg = bin_counts(img, mask, bins);
  Histogram bg = bin_counts(img, complement, bins);
  fg.normalize();
  bg.normalize();
  return {std::move(moments), std::move(fg), std::move(bg), std::move(mask)};
}

std::string problem_hash(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << problem_name(cfg.problem) << "|img=" << cfg.image_path
     << "|size=" << cfg.size << "|noise=" << format_double(cfg.noise)
     << "|v0=" << format_double(cfg.v0);
  if (cfg.ellipse) {
    os << "|ellipse=" << format_double(cfg.ellipse->cx) << ","
       << format_double(cfg.ellipse->cy) << "," << format_double(cfg.ellipse->a)
       << "," << format_double(cfg.ellipse->b) << ","
       << format_double(cfg.ellipse->theta);
  }
  os << "|target=" << cfg.target_mask_path << "|init=" << cfg.init_mask_path
     << "|bins=" << cfg.bins << "|order=" << cfg.order
     << "|ll=" << format_double(cfg.lambda_length)
     << "|lv=" << format_double(cfg.lambda_volume)
     << "|ls=" << format_double(cfg.lambda_shape)
     << "|la=" << format_double(cfg.lambda_app)
     << "|eps=" << format_double(cfg.epsilon) << "|mu=" << format_double(cfg.mu)
     << "|crofton=" << cfg.crofton_order << "|seed=" << cfg.seed;
  return fnv1a_hex(os.str());
}

namespace {

struct ProblemSetup {
  Image image;
  Labeling init;
  EnergyTerms terms;  // convention set per solver later
  std::string hash;
};

ProblemSetup build_problem(const ExperimentConfig& cfg) {
  Labeling synth_init(1, 1);
  Labeling* synth_init_ptr = cfg.image_path.empty() ? &synth_init : nullptr;
  Image image = cfg.image_path.empty()
                    ? synth_image(cfg.size, cfg.seed, cfg.noise,
                                  cfg.problem == ProblemKind::Volume ? cfg.v0 : 0.0,
                                  synth_init_ptr)
                    : load_image(cfg.image_path);

  Labeling init(1, 1);
  if (!cfg.init_mask_path.empty()) {
    init = load_mask(cfg.init_mask_path);
    require_same_dims(init.width(), init.height(), image.width(),
                      image.height(), "initial mask");
  } else if (cfg.image_path.empty()) {
    init = synth_init;
  } else {
    init = centered_square(image.width(), image.height(),
                           0.25 * image.pixel_count());
  }

  EnergyTerms terms;
  terms.length_weight = cfg.lambda_length;
  terms.dirac_epsilon = cfg.epsilon;
  terms.crofton_order = cfg.crofton_order;

  auto target_mask = [&]() -> Labeling {
    if (!cfg.target_mask_path.empty()) {
      Labeling m = load_mask(cfg.target_mask_path);
      require_same_dims(m.width(), m.height(), image.width(), image.height(),
                        "target mask");
      require(!m.empty() && !m.full(), ErrorCode::InvalidArgument,
              "target mask must be non-degenerate");
      return m;
    }
    require(cfg.ellipse.has_value(), ErrorCode::InvalidArgument,
            "this problem needs an ellipse or a target mask");
    return targets_from_ellipse(*cfg.ellipse, image, cfg.bins, cfg.order).mask;
  };

  switch (cfg.problem) {
    case ProblemKind::Volume: {
      terms.regional.push_back({make_volume(cfg.v0), cfg.lambda_volume});
      break;
    }
    case ProblemKind::Moments: {
      // Moment targets plus the log-likelihood appearance term, both derived
      // from the provided ellipse (or ground-truth mask).
      Labeling mask = target_mask();
      std::vector<MomentTarget> moments;
      for (int p = 0; p <= cfg.order; ++p) {
        for (int q = 0; p + q <= cfg.order; ++q) moments.push_back({p, q, 0.0});
      }
      auto probe = make_moments(moments, cfg.order);
      const auto values = probe->features(image, mask);
      for (std::size_t i = 0; i < moments.size(); ++i) {
        moments[i].value = values[i];
      }
      terms.regional.push_back(
          {make_moments(std::move(moments), cfg.order), cfg.lambda_shape});

      Labeling complement(image.width(), image.height());
      for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
          complement.set(x, y, !mask.get(x, y));
        }
      }
      Histogram fg = bin_counts(image, mask, cfg.bins);
      Histogram bg = bin_counts(image, complement, cfg.bins);
      fg.normalize();
      bg.normalize();
      terms.unary = make_loglikelihood(image, fg, bg);
      terms.unary_weight = cfg.lambda_app;
      break;
    }
    case ProblemKind::L2: {
      const Labeling mask = target_mask();
      const Histogram target = bin_counts(image, mask, cfg.bins);
      terms.regional.push_back({make_l2_bins(target), cfg.lambda_app});
      break;
    }
    case ProblemKind::KL:
    case ProblemKind::Bhattacharyya: {
      const Labeling mask = target_mask();
      Histogram target = bin_counts(image, mask, cfg.bins);
      target.normalize();
      terms.regional.push_back(
          {cfg.problem == ProblemKind::KL ? make_kl(target)
                                          : make_bhattacharyya(target),
           cfg.lambda_app});
      break;
    }
  }

  require(!init.empty() && !init.full(), ErrorCode::DegenerateMask,
          "initial mask must be non-degenerate");
  return {std::move(image), std::move(init), std::move(terms),
          problem_hash(cfg)};
}

int resolve_workers(const ExperimentConfig& cfg, std::size_t points) {
  int workers = cfg.workers > 0
                    ? cfg.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SEGOPT_THREADS")) {
    try {
      workers = std::min(workers, std::max(1, std::stoi(env)));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "SEGOPT_THREADS is not an integer");
    }
  }
  workers = std::max(1, std::min<int>(workers, static_cast<int>(points)));
  return workers;
}

SummaryRow summarize(const ExperimentConfig& cfg, const ProblemSetup& setup,
                     double param, const RunResult& run,
                     const EvalCounter& counter, LengthConvention convention) {
  EnergyTerms terms = setup.terms;
  terms.convention = convention;
  const EnergyReport report =
      composite_energy(terms, setup.image, run.labeling, nullptr);

  SummaryRow row;
  row.solver = solver_name(cfg.solver);
  row.param = param;
  row.status = run_status_name(run.status);
  row.iterations = run.iterations;
  row.evaluations = counter.count();
  row.cpu_ms = run.cpu_ms;
  row.energy = report.total;
  row.regional = report.regional;
  row.unary = report.unary;
  row.length_cont = report.length_cont;
  row.length_crofton = report.length_crofton;
  row.energy_cont = report.regional + report.unary +
                    cfg.lambda_length * report.length_cont;
  row.energy_crofton = report.regional + report.unary +
                       cfg.lambda_length * report.length_crofton;
  row.area = run.labeling.area();
  const double perimeter = report.length_crofton;
  row.isoperimetric =
      perimeter > 0.0
          ? 4.0 * std::numbers::pi * static_cast<double>(row.area) /
                (perimeter * perimeter)
          : 0.0;
  row.problem_hash = setup.hash;
  return row;
}

}  // namespace

Summary run_experiment(const ExperimentConfig& cfg) {
  const ProblemSetup setup = build_problem(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  const bool is_tr = cfg.solver == SolverKind::TrustRegion;
  const std::vector<double>& params = is_tr ? cfg.alpha_list : cfg.dt_list;
  const LengthConvention convention =
      is_tr ? LengthConvention::Crofton : LengthConvention::Continuous;

  struct Slot {
    SummaryRow row;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(params.size());

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= params.size()) break;
      try {
        const double param = params[i];
        EnergyTerms terms = setup.terms;
        terms.convention = convention;
        EvalCounter counter;
        const RunResult run = [&]() {
          if (is_tr) {
            TrustRegionConfig tr;
            tr.initial_radius = cfg.d0;
            tr.alpha = param;
            tr.tau2 = cfg.tau2;
            tr.max_iters = cfg.max_iters > 0 ? cfg.max_iters : 1000;
            return run_trust_region(setup.image, setup.init, terms, tr,
                                    counter);
          }
          LevelSetConfig ls;
          ls.dt = param;
          ls.epsilon = cfg.epsilon;
          ls.mu = cfg.mu;
          ls.max_iters = cfg.max_iters > 0 ? cfg.max_iters : 10000;
          return cfg.solver == SolverKind::LevelSetAdaptive
                     ? run_level_set_adaptive(setup.image, setup.init, terms,
                                              ls, counter)
                     : run_level_set(setup.image, setup.init, terms, ls,
                                     counter);
        }();
        const std::string tag =
            std::string(solver_name(cfg.solver)) + "_" + format_param(param);
        run.trace.save_csv(cfg.out_dir + "/trace_" + tag + ".csv");
        save_mask(run.labeling, cfg.out_dir + "/mask_" + tag + ".pgm");
        slots[i].row = summarize(cfg, setup, param, run, counter, convention);
      } catch (...) {
        slots[i].error = std::current_exception();
      }
    }
  };

  const int workers = resolve_workers(cfg, params.size());
  std::vector<std::thread> pool;
  for (int t = 0; t < workers - 1; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (auto& slot : slots) {
    if (slot.error) std::rethrow_exception(slot.error);
  }

  Summary summary;
  summary.problem_hash = setup.hash;
  for (auto& slot : slots) summary.rows.push_back(std::move(slot.row));
  summary.path = cfg.out_dir + "/summary.csv";
  save_summary(summary, summary.path);
  return summary;
}

void save_summary(const Summary& summary, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::Io,
          path + ": cannot open for writing");
  out << "solver,param,status,iterations,evaluations,cpu_ms,E,E_cont,"
         "E_crofton,R,D,L_cont,L_crofton,area,isoperimetric,problem_hash\n";
  for (const auto& r : summary.rows) {
    out << r.solver << "," << format_param(r.param) << "," << r.status << ","
        << r.iterations << "," << r.evaluations << ",";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%.3f,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.cpu_ms,
                  r.energy, r.energy_cont, r.energy_crofton, r.regional,
                  r.unary, r.length_cont, r.length_crofton);
    out << buf << "," << r.area << ",";
    std::snprintf(buf, sizeof buf, "%.17g", r.isoperimetric);
    out << buf << "," << r.problem_hash << "\n";
  }
  require(static_cast<bool>(out), ErrorCode::Io, path + ": write failed");
}

Summary load_summary(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io,
          path + ": cannot open for reading");
  Summary summary;
  summary.path = path;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io,
          path + ": empty summary");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    require(fields.size() == 16, ErrorCode::Io,
            path + ": malformed summary row: " + line);
    SummaryRow r;
    r.solver = fields[0];
    r.param = parse_double(fields[1], "param");
    r.status = fields[2];
    r.iterations = static_cast<std::uint64_t>(parse_long(fields[3], "iterations"));
    r.evaluations = static_cast<std::uint64_t>(parse_long(fields[4], "evaluations"));
    r.cpu_ms = parse_double(fields[5], "cpu_ms");
    r.energy = parse_double(fields[6], "E");
    r.energy_cont = parse_double(fields[7], "E_cont");
    r.energy_crofton = parse_double(fields[8], "E_crofton");
    r.regional = parse_double(fields[9], "R");
    r.unary = parse_double(fields[10], "D");
    r.length_cont = parse_double(fields[11], "L_cont");
    r.length_crofton = parse_double(fields[12], "L_crofton");
    r.area = static_cast<std::uint64_t>(parse_long(fields[13], "area"));
    r.isoperimetric = parse_double(fields[14], "isoperimetric");
    r.problem_hash = fields[15];
    summary.rows.push_back(std::move(r));
  }
  require(!summary.rows.empty(), ErrorCode::Io, path + ": no summary rows");
  summary.problem_hash = summary.rows.front().problem_hash;
  for (const auto& r : summary.rows) {
    require(r.problem_hash == summary.problem_hash, ErrorCode::Io,
            path + ": mixed problem hashes in one summary");
  }
  return summary;
}

Comparison compare_summaries(const Summary& a, const Summary& b) {
  require(!a.rows.empty() && !b.rows.empty(), ErrorCode::InvalidArgument,
          "cannot compare empty summaries");
  require(a.problem_hash == b.problem_hash, ErrorCode::InvalidArgument,
          "refusing to compare different problems (hash mismatch: " +
              a.problem_hash + " vs " + b.problem_hash + ")");

  // Best by energy; evaluation count then param break exact ties.
  const auto best = [](const Summary& s) {
    return *std::min_element(
        s.rows.begin(), s.rows.end(),
        [](const SummaryRow& x, const SummaryRow& y) {
          return std::tie(x.energy, x.evaluations, x.param) <
                 std::tie(y.energy, y.evaluations, y.param);
        });
  };

  Comparison cmp;
  cmp.best_a = best(a);
  cmp.best_b = best(b);
  cmp.problem_hash = a.problem_hash;
  const auto ratio = [](double num, double den) {
    return den != 0.0 ? num / den : 0.0;
  };
  cmp.evals_ratio = ratio(static_cast<double>(cmp.best_b.evaluations),
                          static_cast<double>(cmp.best_a.evaluations));
  cmp.cpu_ratio = ratio(cmp.best_b.cpu_ms, cmp.best_a.cpu_ms);
  cmp.gap_cont = cmp.best_b.energy_cont - cmp.best_a.energy_cont;
  cmp.gap_crofton = cmp.best_b.energy_crofton - cmp.best_a.energy_crofton;
  return cmp;
}

void write_comparison(const Comparison& cmp, const Summary& a, const Summary& b,
                      const std::string& out_prefix) {
  {
    std::ofstream out(out_prefix + ".txt");
    require(static_cast<bool>(out), ErrorCode::Io,
            out_prefix + ".txt: cannot open for writing");
    out << "problem hash: " << cmp.problem_hash << "\n";
    auto describe = [&](const char* tag, const SummaryRow& r) {
      out << tag << ": solver=" << r.solver << " param=" << format_param(r.param)
          << " status=" << r.status << " E=" << format_double(r.energy)
          << " E_cont=" << format_double(r.energy_cont)
          << " E_crofton=" << format_double(r.energy_crofton)
          << " evaluations=" << r.evaluations << " cpu_ms=" << r.cpu_ms
          << " iterations=" << r.iterations << "\n";
    };
    describe("best A", cmp.best_a);
    describe("best B", cmp.best_b);
    out << "evaluations ratio (B/A): " << format_double(cmp.evals_ratio) << "\n";
    out << "cpu ratio (B/A): " << format_double(cmp.cpu_ratio) << "\n";
    out << "energy gap B-A (continuous length): "
        << format_double(cmp.gap_cont) << "\n";
    out << "energy gap B-A (crofton length): "
        << format_double(cmp.gap_crofton) << "\n";
  }
  {
    std::ofstream out(out_prefix + ".csv");
    require(static_cast<bool>(out), ErrorCode::Io,
            out_prefix + ".csv: cannot open for writing");
    out << "side,solver,param,status,iterations,evaluations,cpu_ms,E,E_cont,"
           "E_crofton,best\n";
    auto emit = [&](const char* side, const Summary& s, const SummaryRow& best) {
      for (const auto& r : s.rows) {
        const bool is_best = r.param == best.param && r.solver == best.solver;
        out << side << "," << r.solver << "," << format_param(r.param) << ","
            << r.status << "," << r.iterations << "," << r.evaluations << ","
            << r.cpu_ms << "," << format_double(r.energy) << ","
            << format_double(r.energy_cont) << ","
            << format_double(r.energy_crofton) << "," << (is_best ? 1 : 0)
            << "\n";
      }
    };
    emit("A", a, cmp.best_a);
    emit("B", b, cmp.best_b);
    out << "ratio,evaluations," << format_double(cmp.evals_ratio) << ",,,,,,,,"
        << "\n";
    out << "ratio,cpu_ms," << format_double(cmp.cpu_ratio) << ",,,,,,,,\n";
  }
}

void bench_synth(int size, double v0, std::uint64_t seed, double noise,
                 const std::string& image_path, const std::string& init_path) {
  Labeling init(1, 1);
  const Image img = synth_image(size, seed, noise, v0, &init);
  save_image(img, image_path);
  if (!init_path.empty()) save_mask(init, init_path);
}

void bench_targets(const std::string& image_path, const EllipseSpec& ellipse,
                   int bins, int order, const std::string& out_prefix) {
  const Image img = load_image(image_path);
  const EllipseTargets targets = targets_from_ellipse(ellipse, img, bins, order);
  save_moments(targets.moments, out_prefix + "_moments.txt");
  save_histogram(targets.fg, out_prefix + "_fg.txt");
  save_histogram(targets.bg, out_prefix + "_bg.txt");
  save_mask(targets.mask, out_prefix + "_mask.pgm");
}

}  // namespace segopt
