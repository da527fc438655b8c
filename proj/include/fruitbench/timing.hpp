#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fruitbench/reporting.hpp"

namespace fruitbench {

struct TimingRecord {
  std::string model;
  std::vector<double> latencies_ms;  // per image, each > 0
};

// JSON lines: {"model": ..., "image_id": ..., "latency_ms": ...}. Records are
// grouped by model in order of first appearance. Blank lines are skipped.
std::vector<TimingRecord> parse_timing_log(std::string_view text);
std::vector<TimingRecord> load_timing_log(const std::filesystem::path& path);

struct TimingSummary {
  std::string model;
  std::size_t samples = 0;
  double mean_ms = 0.0;
  double fps = 0.0;  // 1000 / mean_ms
};

// Throws ValidationError on an empty latency list or a non-positive latency.
TimingSummary summarize(const TimingRecord& record);

// "21.9 FPS, 45.7 ms"
std::string format_timing(const TimingSummary& summary);

// Timing table: model, FPS, latency per image.
std::string summarize_timing(const std::vector<TimingRecord>& records,
                             OutputFormat format = OutputFormat::kMarkdown);

}  // namespace fruitbench
