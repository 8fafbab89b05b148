#include "run_stats.hpp"

#include <sys/resource.h>

#include <json.hpp>

namespace tda::service {

std::size_t peak_rss_bytes() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return static_cast<std::size_t>(usage.ru_maxrss) * 1024;  // Linux reports KiB
}

RunStats::RunStats(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

double RunStats::wall_seconds() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void RunStats::log(std::ostream& out, int exit_code) const {
  out << nlohmann::json{{"run", {{"command", command_},
                                 {"exit_code", exit_code},
                                 {"wall_seconds", wall_seconds()},
                                 {"peak_rss_bytes", peak_rss_bytes()}}}}
             .dump()
      << '\n';
}

}  // namespace tda::service
