#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace terragan {

struct EpochRecord {
  int epoch = 0;  // 1-based
  std::vector<std::pair<std::string, double>> metrics;
  double seconds = 0.0;
};

/// Per-epoch training metrics. Persists as a long-format CSV
/// (epoch,metric,value) with bit-stable ordering; wall time goes to a
/// separate timing CSV so metric logs from identical seeded runs compare
/// byte-for-byte.
struct TrainLog {
  std::vector<EpochRecord> epochs;

  void add(int epoch, std::vector<std::pair<std::string, double>> metrics,
           double seconds);

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  void write_timing_csv(const std::filesystem::path& path) const;
};

/// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

}  // namespace terragan
