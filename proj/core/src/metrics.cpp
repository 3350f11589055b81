#include "vxae/metrics.hpp"

#include <charconv>
#include <nlohmann/json.hpp>
#include <sstream>

#include "vxae/errors.hpp"
#include "vxae/fs_util.hpp"

namespace vxae {

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string to_csv_row(const MetricsRecord& r, bool zero_wall_clock) {
  return std::to_string(r.step) + "," + std::to_string(r.epoch) + "," + r.split + "," + format_double(r.mse) + "," +
         (zero_wall_clock ? std::string("0") : format_double(r.wall_seconds));
}

std::string to_csv(const std::vector<MetricsRecord>& records, bool zero_wall_clock) {
  std::string out = std::string(kMetricsCsvHeader) + "\n";
  for (const auto& r : records) out += to_csv_row(r, zero_wall_clock) + "\n";
  return out;
}

std::string to_json_line(const MetricsRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["epoch"] = r.epoch;
  j["split"] = r.split;
  j["mse"] = r.mse;
  j["wall_seconds"] = r.wall_seconds;
  return j.dump();
}

std::vector<MetricsRecord> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsCsvHeader)
    throw FormatError(std::string("metrics CSV must start with '") + kMetricsCsvHeader + "'");
  std::vector<MetricsRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 5) throw FormatError("metrics CSV line " + std::to_string(line_no) + ": expected 5 columns");
    try {
      MetricsRecord r;
      r.step = std::stoull(cols[0]);
      r.epoch = std::stoi(cols[1]);
      r.split = cols[2];
      r.mse = std::stod(cols[3]);
      r.wall_seconds = std::stod(cols[4]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw FormatError("metrics CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records,
                       bool zero_wall_clock) {
  write_file_atomic(path, to_csv(records, zero_wall_clock));
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_metrics_csv(std::string(bytes.begin(), bytes.end()));
}

}  // namespace vxae
