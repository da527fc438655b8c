#include "fruitbench/reporting.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "fruitbench/coco_io.hpp"
#include "fruitbench/error.hpp"
#include "json_util.hpp"

namespace fruitbench {

using detail::json;
using detail::ordered_json;

namespace {

constexpr const char* kMissing = "—";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string plain_rounded(double value) {
  std::ostringstream os;
  os << static_cast<long long>(std::nearbyint(value));
  return os.str();
}

std::string markdown_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ",";
    out += csv_field(cells[i]);
  }
  return out + "\n";
}

std::string markdown_rule(std::size_t columns) {
  std::string out = "|---|";
  for (std::size_t i = 1; i < columns; ++i) out += "---:|";
  return out + "\n";
}

std::optional<double> metric_value(const CategoryMetrics& m, Metric metric) {
  switch (metric) {
    case Metric::kMAP:
      return m.mAP;
    case Metric::kAP50:
      return m.AP50;
    case Metric::kMAR:
      return m.mAR;
  }
  return std::nullopt;
}

}  // namespace

OutputFormat parse_output_format(std::string_view text) {
  if (text == "markdown" || text == "md") return OutputFormat::kMarkdown;
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  throw ValidationError("unknown output format '" + std::string(text) + "'");
}

std::string format_count(std::size_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  const std::size_t lead = digits.size() % 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && i >= lead && (i - lead) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string format_rounded(double value) {
  // nearbyint honours the default round-to-nearest-even mode.
  const double r = std::nearbyint(value);
  if (r < 0) return "-" + format_count(static_cast<std::size_t>(-r));
  return format_count(static_cast<std::size_t>(r));
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

std::string display_name(std::string_view name) {
  std::string out(name);
  if (!out.empty()) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

std::string render_stats_table(const DatasetStats& stats, OutputFormat format) {
  std::vector<const StatsRow*> rows;
  for (const auto& r : stats.categories) rows.push_back(&r);
  rows.push_back(&stats.total);

  if (format == OutputFormat::kJson) {
    ordered_json out = ordered_json::array();
    for (const StatsRow* r : rows) {
      ordered_json j;
      j["label"] = r->label;
      j["images"] = r->image_count;
      j["bboxes"] = r->bbox_count;
      j["avg_bboxes_per_image"] =
          r->avg_bboxes_per_image ? ordered_json(*r->avg_bboxes_per_image) : ordered_json();
      j["avg_size_per_instance"] =
          r->avg_size_per_instance ? ordered_json(*r->avg_size_per_instance) : ordered_json();
      j["region"] = r->region;
      out.push_back(std::move(j));
    }
    return out.dump(1) + "\n";
  }

  std::string text;
  if (format == OutputFormat::kCsv) {
    text += csv_row({"category", "images", "bboxes", "avg_bboxes_per_image",
                     "avg_size_per_instance", "region"});
    for (const StatsRow* r : rows) {
      text += csv_row({r->label, std::to_string(r->image_count),
                       std::to_string(r->bbox_count),
                       r->avg_bboxes_per_image ? plain_rounded(*r->avg_bboxes_per_image) : "",
                       r->avg_size_per_instance ? plain_rounded(*r->avg_size_per_instance) : "",
                       r->region});
    }
    return text;
  }

  text += markdown_row({"", "# imgs", "# bboxes", "# avg. bboxes/image",
                        "# avg. size/instance", "Region"});
  text += markdown_rule(6);
  for (const StatsRow* r : rows) {
    text += markdown_row(
        {r == &stats.total ? r->label : display_name(r->label),
         format_count(r->image_count), format_count(r->bbox_count),
         r->avg_bboxes_per_image ? format_rounded(*r->avg_bboxes_per_image) : kMissing,
         r->avg_size_per_instance ? format_rounded(*r->avg_size_per_instance) : kMissing,
         r->region});
  }
  return text;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kMAP:
      return "mAP";
    case Metric::kAP50:
      return "AP50";
    case Metric::kMAR:
      return "mAR";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  if (text == "mAP") return Metric::kMAP;
  if (text == "AP50") return Metric::kAP50;
  if (text == "mAR") return Metric::kMAR;
  throw ValidationError("unknown metric '" + std::string(text) + "'");
}

void ExperimentGrid::validate() const {
  if (metrics.empty()) throw ValidationError("grid selects no metrics");
  std::set<std::string> labels;
  for (const auto& row : rows) {
    if (!labels.insert(row.label).second) {
      throw ValidationError("duplicate grid row label '" + row.label + "'");
    }
    if (row.split) row.split->validate();
  }
}

ExperimentGrid parse_grid(std::string_view json_text,
                          const std::filesystem::path& base_dir,
                          const DetectionDataset* ds) {
  const json root = detail::parse_json(json_text, "grid");
  ExperimentGrid grid;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  for (const json& r : detail::require_array(root, "rows", "grid")) {
    ExperimentRow row;
    const json& label = detail::require_field(r, "label", "grid row");
    if (!label.is_string()) throw ValidationError("grid row label must be a string");
    row.label = label.get<std::string>();
    const std::string ctx = "grid row '" + row.label + "'";
    const json& preds = detail::require_field(r, "predictions", ctx);
    if (!preds.is_string()) throw ValidationError(ctx + " predictions must be a path");
    row.predictions = resolve(preds.get<std::string>());
    if (auto it = r.find("manifest"); it != r.end() && it->is_string()) {
      row.manifest = resolve(it->get<std::string>());
    }
    if (auto it = r.find("split"); it != r.end() && !it->is_null()) {
      const json& s = *it;
      SplitSpec spec;
      const json& kind = detail::require_field(s, "kind", ctx + " split");
      if (!kind.is_string()) throw ValidationError(ctx + " split kind must be a string");
      spec.kind = parse_split_kind(kind.get<std::string>());
      if (auto f = s.find("fraction"); f != s.end() && !f->is_null()) {
        spec.train_fraction = detail::require_number(*f, ctx + " fraction");
      }
      if (auto k = s.find("k"); k != s.end() && !k->is_null()) {
        if (!k->is_number_unsigned()) throw ValidationError(ctx + " k must be >= 0");
        spec.k = k->get<std::uint32_t>();
      }
      if (auto h = s.find("held_out"); h != s.end() && !h->is_null()) {
        if (h->is_number_integer()) {
          spec.held_out = h->get<CategoryId>();
        } else if (h->is_string() && ds != nullptr) {
          const Category* c = ds->find_category_by_name(h->get<std::string>());
          if (c == nullptr) {
            throw IntegrityError(ctx + " held_out names unknown category " + h->dump());
          }
          spec.held_out = c->id;
        } else {
          throw ValidationError(ctx + " held_out must be a category id");
        }
      }
      if (auto seed = s.find("seed"); seed != s.end()) {
        if (!seed->is_number_unsigned()) throw ValidationError(ctx + " seed must be unsigned");
        spec.seed = seed->get<std::uint64_t>();
      }
      row.split = spec;
    }
    grid.rows.push_back(std::move(row));
  }
  if (auto it = root.find("metrics"); it != root.end()) {
    grid.metrics.clear();
    for (const json& m : *it) {
      if (!m.is_string()) throw ValidationError("grid metrics must be strings");
      grid.metrics.push_back(parse_metric(m.get<std::string>()));
    }
  }
  if (auto it = root.find("format"); it != root.end() && it->is_string()) {
    grid.format = parse_output_format(it->get<std::string>());
  }
  grid.validate();
  return grid;
}

std::map<std::string, EvaluationReport> evaluate_grid(
    const DetectionDataset& ds, const ExperimentGrid& grid,
    const EvaluationConfig& config) {
  grid.validate();
  std::map<std::string, EvaluationReport> reports;
  for (const auto& row : grid.rows) {
    std::optional<SplitResult> split;
    if (row.manifest) {
      split = load_manifest(*row.manifest);
    } else if (row.split) {
      split = make_split(ds, *row.split);
    }
    const std::vector<Detection> dets = load_predictions(row.predictions, ds);
    reports.emplace(row.label,
                    evaluate(ds, split ? &*split : nullptr, dets, config));
  }
  return reports;
}

RenderedGrid render_metric_grid(
    const ExperimentGrid& grid, const std::vector<Category>& categories,
    const std::map<std::string, EvaluationReport>& reports) {
  grid.validate();
  RenderedGrid out;

  // cells[row][category][metric]; empty string = missing.
  std::vector<std::vector<std::vector<std::string>>> cells;
  for (const auto& row : grid.rows) {
    auto report_it = reports.find(row.label);
    std::vector<std::vector<std::string>> row_cells;
    for (const auto& cat : categories) {
      const CategoryMetrics* m = nullptr;
      if (report_it != reports.end()) {
        for (const auto& pc : report_it->second.per_category) {
          if (pc.category_id == cat.id) m = &pc;
        }
      }
      std::vector<std::string> values;
      for (Metric metric : grid.metrics) {
        std::optional<double> v = m ? metric_value(*m, metric) : std::nullopt;
        if (v) {
          values.push_back(format_percent(*v));
        } else {
          values.emplace_back();
          ++out.warnings;
        }
      }
      row_cells.push_back(std::move(values));
    }
    cells.push_back(std::move(row_cells));
  }

  if (grid.format == OutputFormat::kJson) {
    ordered_json root;
    ordered_json metrics = ordered_json::array();
    for (Metric metric : grid.metrics) metrics.push_back(std::string(to_string(metric)));
    root["metrics"] = std::move(metrics);
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < grid.rows.size(); ++r) {
      ordered_json row;
      row["label"] = grid.rows[r].label;
      ordered_json row_cells = ordered_json::object();
      for (std::size_t c = 0; c < categories.size(); ++c) {
        ordered_json cell = ordered_json::object();
        for (std::size_t k = 0; k < grid.metrics.size(); ++k) {
          const std::string& v = cells[r][c][k];
          cell[std::string(to_string(grid.metrics[k]))] =
              v.empty() ? ordered_json() : ordered_json(std::stod(v));
        }
        row_cells[display_name(categories[c].name)] = std::move(cell);
      }
      row["cells"] = std::move(row_cells);
      rows.push_back(std::move(row));
    }
    root["rows"] = std::move(rows);
    root["warnings"] = out.warnings;
    out.text = root.dump(1) + "\n";
    return out;
  }

  std::vector<std::string> header{"Setting"};
  for (const auto& cat : categories) {
    for (Metric metric : grid.metrics) {
      header.push_back(display_name(cat.name) + " " + std::string(to_string(metric)));
    }
  }
  const bool csv = grid.format == OutputFormat::kCsv;
  out.text += csv ? csv_row(header) : markdown_row(header);
  if (!csv) out.text += markdown_rule(header.size());
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    std::vector<std::string> line{grid.rows[r].label};
    for (const auto& cat_cells : cells[r]) {
      for (const auto& v : cat_cells) {
        line.push_back(v.empty() ? (csv ? "" : kMissing) : v);
      }
    }
    out.text += csv ? csv_row(line) : markdown_row(line);
  }
  return out;
}

std::string render_report(const EvaluationReport& report, OutputFormat format) {
  if (format == OutputFormat::kJson) return to_report_json(report);
  auto cell = [](const std::optional<double>& v) {
    return v ? format_percent(*v) : std::string(kMissing);
  };
  const bool csv = format == OutputFormat::kCsv;
  auto emit = [&](const std::vector<std::string>& cells) {
    return csv ? csv_row(cells) : markdown_row(cells);
  };
  std::string text;
  if (!csv && report.prompt) text += "Prompt: " + *report.prompt + "\n\n";
  text += emit({"Category", "mAP", "AP50", "mAR", "#gt", "#dets"});
  if (!csv) text += markdown_rule(6);
  for (const auto& m : report.per_category) {
    text += emit({display_name(m.name), cell(m.mAP), cell(m.AP50), cell(m.mAR),
                  std::to_string(m.num_ground_truth), std::to_string(m.num_detections)});
  }
  text += emit({"Mean", cell(report.aggregate.mAP), cell(report.aggregate.AP50),
                cell(report.aggregate.mAR), std::to_string(report.counts.ground_truth),
                std::to_string(report.counts.detections)});
  return text;
}

}  // namespace fruitbench
