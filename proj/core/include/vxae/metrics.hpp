#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vxae {

struct MetricsRecord {
  std::uint64_t step = 0;
  int epoch = 0;
  std::string split = "train";  // "train" or "eval"
  double mse = 0.0;
  double wall_seconds = 0.0;
  bool operator==(const MetricsRecord&) const = default;
};

inline constexpr const char* kMetricsCsvHeader = "step,epoch,split,mse,wall_seconds";

// Numbers use the shortest text that round-trips. With `zero_wall_clock` the
// wall_seconds column is written as 0 so the file depends only on the computation.
std::string to_csv_row(const MetricsRecord& record, bool zero_wall_clock = false);
std::string to_csv(const std::vector<MetricsRecord>& records, bool zero_wall_clock = false);
// One JSON object per record, e.g. {"step":1,"epoch":0,"split":"train","mse":0.25,"wall_seconds":0.1}.
std::string to_json_line(const MetricsRecord& record);

std::vector<MetricsRecord> parse_metrics_csv(const std::string& text);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records,
                       bool zero_wall_clock = false);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

std::string format_double(double value);

}  // namespace vxae
