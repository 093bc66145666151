#include "terragan/train_log.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "terragan/errors.hpp"

namespace terragan {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void TrainLog::add(int epoch, std::vector<std::pair<std::string, double>> metrics,
                   double seconds) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.metrics = std::move(metrics);
  rec.seconds = seconds;
  epochs.push_back(std::move(rec));
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os << "epoch,metric,value\n";
  for (const EpochRecord& rec : epochs)
    for (const auto& [name, value] : rec.metrics)
      os << rec.epoch << "," << name << "," << format_double(value) << "\n";
  return os.str();
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write log: " + path.string());
  out << to_csv();
  if (!out) throw DataError("write failure: " + path.string());
}

void TrainLog::write_timing_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write log: " + path.string());
  out << "epoch,metric,value\n";
  for (const EpochRecord& rec : epochs)
    out << rec.epoch << ",seconds," << format_double(rec.seconds) << "\n";
  if (!out) throw DataError("write failure: " + path.string());
}

}  // namespace terragan
