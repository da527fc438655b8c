#include "fruitbench/timing.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "fruitbench/coco_io.hpp"
#include "fruitbench/error.hpp"
#include "json_util.hpp"

namespace fruitbench {

using detail::json;

std::vector<TimingRecord> parse_timing_log(std::string_view text) {
  std::vector<TimingRecord> records;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const std::string ctx = "timing log line " + std::to_string(line_no);
    const json row = detail::parse_json(line, ctx);
    const json& model = detail::require_field(row, "model", ctx);
    if (!model.is_string()) throw ValidationError(ctx + " model must be a string");
    const double latency =
        detail::require_number(detail::require_field(row, "latency_ms", ctx), ctx);
    if (!(latency > 0.0) || !std::isfinite(latency)) {
      throw ValidationError(ctx + " latency_ms must be positive");
    }
    const std::string name = model.get<std::string>();
    auto [it, inserted] = index.emplace(name, records.size());
    if (inserted) records.push_back({name, {}});
    records[it->second].latencies_ms.push_back(latency);
    if (end == text.size()) break;
  }
  return records;
}

std::vector<TimingRecord> load_timing_log(const std::filesystem::path& path) {
  return parse_timing_log(read_file(path));
}

TimingSummary summarize(const TimingRecord& record) {
  if (record.latencies_ms.empty()) {
    throw ValidationError("model '" + record.model + "' has no latency samples");
  }
  double sum = 0.0;
  for (double ms : record.latencies_ms) {
    if (!(ms > 0.0)) {
      throw ValidationError("model '" + record.model + "' has a non-positive latency");
    }
    sum += ms;
  }
  TimingSummary s;
  s.model = record.model;
  s.samples = record.latencies_ms.size();
  s.mean_ms = sum / static_cast<double>(s.samples);
  s.fps = 1000.0 / s.mean_ms;
  return s;
}

namespace {

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

std::string format_timing(const TimingSummary& summary) {
  return one_decimal(summary.fps) + " FPS, " + one_decimal(summary.mean_ms) + " ms";
}

std::string summarize_timing(const std::vector<TimingRecord>& records,
                             OutputFormat format) {
  std::vector<TimingSummary> rows;
  for (const auto& r : records) rows.push_back(summarize(r));

  if (format == OutputFormat::kJson) {
    detail::ordered_json out = detail::ordered_json::array();
    for (const auto& s : rows) {
      out.push_back({{"model", s.model},
                     {"samples", s.samples},
                     {"mean_ms", s.mean_ms},
                     {"fps", s.fps}});
    }
    return out.dump(1) + "\n";
  }
  std::string text;
  if (format == OutputFormat::kCsv) {
    text += "model,fps,ms_per_image\n";
    for (const auto& s : rows) {
      text += s.model + "," + one_decimal(s.fps) + "," + one_decimal(s.mean_ms) + "\n";
    }
    return text;
  }
  text += "| Model | FPS (imgs/s) | Inference time per image (ms) |\n";
  text += "|---|---:|---:|\n";
  for (const auto& s : rows) {
    text += "| " + s.model + " | " + one_decimal(s.fps) + " | " +
            one_decimal(s.mean_ms) + " |\n";
  }
  return text;
}

}  // namespace fruitbench
