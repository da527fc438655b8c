#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fruitbench/evaluation.hpp"
#include "fruitbench/splits.hpp"
#include "fruitbench/stats.hpp"

namespace fruitbench {

enum class OutputFormat { kMarkdown, kCsv, kJson };

OutputFormat parse_output_format(std::string_view text);

// Display helpers shared by the renderers.
//   format_count(62040)        -> "62,040"
//   format_rounded(1193.4)     -> "1,193"   (round half to even)
//   format_percent(0.594)      -> "59.4"    (x100, one decimal)
std::string format_count(std::size_t value);
std::string format_rounded(double value);
std::string format_percent(double fraction);
// Category names are shown with an upper-case first letter ("apple" ->
// "Apple").
std::string display_name(std::string_view name);

// Per-category dataset statistics plus a total row. Absent averages show
// as "—".
std::string render_stats_table(const DatasetStats& stats, OutputFormat format);

enum class Metric { kMAP, kAP50, kMAR };
std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

struct ExperimentRow {
  std::string label;
  // Absent: every image is a test image.
  std::optional<SplitSpec> split;
  // Alternative to `split`: a manifest file.
  std::optional<std::filesystem::path> manifest;
  std::filesystem::path predictions;
};

struct ExperimentGrid {
  std::vector<ExperimentRow> rows;
  std::vector<Metric> metrics{Metric::kMAP, Metric::kAP50, Metric::kMAR};
  OutputFormat format = OutputFormat::kMarkdown;

  // Throws ValidationError on duplicate labels or an empty metric list.
  void validate() const;
};

// Grid file: {"rows": [{"label", "predictions", "split"?: {kind, fraction,
// k, held_out, seed}, "manifest"?}], "metrics"?: [...], "format"?: "..."}.
// Relative paths resolve against `base_dir`. held_out may be a category
// name when `ds` is given.
ExperimentGrid parse_grid(std::string_view json_text,
                          const std::filesystem::path& base_dir,
                          const DetectionDataset* ds = nullptr);

// Evaluates every row: builds or loads its split, loads its predictions,
// and runs evaluate(). Missing files raise IoError.
std::map<std::string, EvaluationReport> evaluate_grid(
    const DetectionDataset& ds, const ExperimentGrid& grid,
    const EvaluationConfig& config = {});

struct RenderedGrid {
  std::string text;
  // Cells rendered as "—" because their value was unavailable.
  std::size_t warnings = 0;
};

// Rows are experiment settings, column groups categories, each with the
// selected metrics x100 to one decimal. A missing report or metric value
// renders as "—" and counts one warning.
RenderedGrid render_metric_grid(
    const ExperimentGrid& grid, const std::vector<Category>& categories,
    const std::map<std::string, EvaluationReport>& reports);

// Single-report summary: one line per category plus the aggregate.
std::string render_report(const EvaluationReport& report, OutputFormat format);

}  // namespace fruitbench
