#pragma once

#include <chrono>
#include <cstddef>
#include <ostream>
#include <string>

namespace tda::service {

/// Peak resident set size of this process in bytes (0 if unavailable).
std::size_t peak_rss_bytes();

/// Wall clock since construction plus peak RSS, logged as one JSON line.
class RunStats {
 public:
  explicit RunStats(std::string command);
  double wall_seconds() const;
  void log(std::ostream& out, int exit_code) const;

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace tda::service
