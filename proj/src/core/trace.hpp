#ifndef SEGOPT_CORE_TRACE_HPP
#define SEGOPT_CORE_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace segopt {

/// One row per optimizer iteration. Both solvers share the schema; the trust
/// region solver appends an accepted flag and the region size.
struct TraceRow {
  std::uint64_t iter = 0;
  double cpu_ms = 0.0;
  std::uint64_t evals = 0;
  double energy = 0.0;
  double regional = 0.0;
  double length_cont = 0.0;
  double length_crofton = 0.0;
  std::uint64_t area = 0;
  bool accepted = false;
  double trust_radius = 0.0;
};

struct Trace {
  std::vector<TraceRow> rows;
  bool trust_region_columns = false;
  /// Populated only when the run was configured to keep per-iteration masks.
  std::vector<Labeling> masks;

  void save_csv(const std::string& path) const;
};

enum class RunStatus { Converged, IterationCap, Stalled, Aborted };

const char* run_status_name(RunStatus status);

struct RunResult {
  Labeling labeling;
  Trace trace;
  RunStatus status = RunStatus::Converged;
  std::string message;
  std::uint64_t iterations = 0;
  double cpu_ms = 0.0;
  /// Accepted backtracking energies (adaptive level sets only).
  std::vector<double> accepted_energies;
};

/// Thread CPU time in milliseconds; the per-iteration trace clock.
double thread_cpu_ms();

}  // namespace segopt

#endif
