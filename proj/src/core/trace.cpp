#include "core/trace.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "core/errors.hpp"

namespace segopt {

void Trace::save_csv(const std::string& path) const {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::Io,
          path + ": cannot open for writing");
  out << "iter,cpu_ms,evals,E,R,L_cont,L_crofton,area";
  if (trust_region_columns) out << ",accepted,d";
  out << "\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%.3f,%llu,%.17g,%.17g,%.17g,%.17g,%llu",
                  static_cast<unsigned long long>(row.iter), row.cpu_ms,
                  static_cast<unsigned long long>(row.evals), row.energy,
                  row.regional, row.length_cont, row.length_crofton,
                  static_cast<unsigned long long>(row.area));
    out << buf;
    if (trust_region_columns) {
      std::snprintf(buf, sizeof buf, ",%d,%.17g", row.accepted ? 1 : 0,
                    row.trust_radius);
      out << buf;
    }
    out << "\n";
  }
  require(static_cast<bool>(out), ErrorCode::Io, path + ": write failed");
}

const char* run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::IterationCap: return "capped";
    case RunStatus::Stalled: return "stalled";
    case RunStatus::Aborted: return "aborted";
  }
  return "unknown";
}

double thread_cpu_ms() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return ts.tv_sec * 1e3 + ts.tv_nsec * 1e-6;
}

}  // namespace segopt
