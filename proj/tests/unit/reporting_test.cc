#include "fruitbench/reporting.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fruitbench/coco_io.hpp"
#include "fruitbench/error.hpp"
#include "fruitbench/timing.hpp"

namespace fruitbench {
namespace {

namespace fs = std::filesystem;
const fs::path kData = FRUITBENCH_TEST_DATA_DIR;

std::vector<std::string> split_cells(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    const auto b = cell.find_first_not_of(' ');
    const auto e = cell.find_last_not_of(' ');
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(Format, Counts) {
  EXPECT_EQ(format_count(0), "0");
  EXPECT_EQ(format_count(812), "812");
  EXPECT_EQ(format_count(1193), "1,193");
  EXPECT_EQ(format_count(62040), "62,040");
  EXPECT_EQ(format_count(248015), "248,015");
  EXPECT_EQ(format_count(1234567), "1,234,567");
}

TEST(Format, RoundHalfToEven) {
  EXPECT_EQ(format_rounded(76.4), "76");
  EXPECT_EQ(format_rounded(1193.4), "1,193");
  EXPECT_EQ(format_rounded(2.5), "2");
  EXPECT_EQ(format_rounded(3.5), "4");
  EXPECT_EQ(format_rounded(1132.5), "1,132");
  EXPECT_EQ(format_rounded(0.0), "0");
}

TEST(Format, Percent) {
  EXPECT_EQ(format_percent(0.594), "59.4");
  EXPECT_EQ(format_percent(1.0), "100.0");
  EXPECT_EQ(format_percent(0.0), "0.0");
  EXPECT_EQ(display_name("apple"), "Apple");
  EXPECT_EQ(parse_output_format("csv"), OutputFormat::kCsv);
  EXPECT_THROW(parse_output_format("xml"), ValidationError);
}

TEST(StatsTable, EmptyDataset) {
  const std::string text = render_stats_table(compute_stats(DetectionDataset{}), OutputFormat::kMarkdown);
  const auto lines = lines_of(text);
  ASSERT_EQ(lines.size(), 3u);  // header, rule, total
  EXPECT_EQ(lines[2], "| Total | 0 | 0 | — | — |  |");
}

TEST(StatsTable, SingleCategoryTotalEqualsCategoryRow) {
  const DetectionDataset ds = DetectionDataset::create(
      {{1, "apple"}}, {{1, "a.jpg", 100, 100, "Michigan"}, {2, "b.jpg", 100, 100, "Michigan"}},
      {{1, 1, 1, BoundingBox::from_corners(0, 0, 10, 10), {}, false},
       {2, 1, 1, BoundingBox::from_corners(0, 0, 20, 10), {}, false},
       {3, 2, 1, BoundingBox::from_corners(5, 5, 15, 35), {}, false}});
  for (OutputFormat f : {OutputFormat::kMarkdown, OutputFormat::kCsv}) {
    const char sep = f == OutputFormat::kCsv ? ',' : '|';
    const auto lines = lines_of(render_stats_table(compute_stats(ds), f));
    const auto cat = split_cells(lines[lines.size() - 2], sep);
    const auto total = split_cells(lines.back(), sep);
    ASSERT_EQ(cat.size(), total.size());
    for (std::size_t i = (sep == '|' ? 2 : 1); i < cat.size(); ++i) EXPECT_EQ(cat[i], total[i]);
  }
}

TEST(StatsTable, FixtureRowsMatchPrecomputedDisplay) {
  const DetectionDataset ds = load_coco(kData / "metafruit_subset" / "annotations.json").dataset;
  const auto expected =
      nlohmann::json::parse(read_file(kData / "metafruit_subset" / "expected_stats.json"));
  const std::string text = render_stats_table(compute_stats(ds), OutputFormat::kMarkdown);
  EXPECT_EQ(text, render_stats_table(compute_stats(ds), OutputFormat::kMarkdown));
  const auto lines = lines_of(text);
  ASSERT_EQ(lines.size(), 2 + expected["categories"].size() + 1);
  for (std::size_t i = 0; i <= expected["categories"].size(); ++i) {
    const auto& e = i < expected["categories"].size() ? expected["categories"][i] : expected["total"];
    const auto cells = split_cells(lines[2 + i], '|');
    ASSERT_EQ(cells.size(), 7u);
    const std::string label = e["label"];
    EXPECT_EQ(cells[1], i < expected["categories"].size() ? display_name(label) : label);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(cells[2 + k], e["display"][k].get<std::string>());
    EXPECT_EQ(cells[6], e["region"].get<std::string>());
  }
}

EvaluationReport mock_report(double map, double ap50, double mar) {
  EvaluationReport r;
  CategoryMetrics m;
  m.category_id = 1;
  m.name = "apple";
  m.mAP = map;
  m.AP50 = ap50;
  m.mAR = mar;
  r.per_category.push_back(m);
  return r;
}

ExperimentGrid grid_of(std::vector<std::string> labels, OutputFormat format) {
  ExperimentGrid g;
  for (auto& l : labels) g.rows.push_back({l, std::nullopt, std::nullopt, "unused.json"});
  g.format = format;
  return g;
}

TEST(MetricGrid, PublishedFormatCheck) {
  const ExperimentGrid grid = grid_of({"Fine-tuning"}, OutputFormat::kMarkdown);
  const RenderedGrid out =
      render_metric_grid(grid, {{1, "apple"}}, {{"Fine-tuning", mock_report(0.594, 0.941, 0.647)}});
  const auto lines = lines_of(out.text);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "| Setting | Apple mAP | Apple AP50 | Apple mAR |");
  const auto cells = split_cells(lines[2], '|');
  EXPECT_EQ(cells[2] + " " + cells[3] + " " + cells[4], "59.4 94.1 64.7");
  EXPECT_EQ(out.warnings, 0u);
}

TEST(MetricGrid, PerfectReportsRenderHundred) {
  const ExperimentGrid grid = grid_of({"zero-shot", "1-shot"}, OutputFormat::kCsv);
  const RenderedGrid out = render_metric_grid(
      grid, {{1, "apple"}}, {{"zero-shot", mock_report(1, 1, 1)}, {"1-shot", mock_report(1, 1, 1)}});
  const auto lines = lines_of(out.text);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1], "zero-shot,100.0,100.0,100.0");
  EXPECT_EQ(lines[2], "1-shot,100.0,100.0,100.0");
}

TEST(MetricGrid, MissingCellWarns) {
  const ExperimentGrid grid = grid_of({"a", "b"}, OutputFormat::kMarkdown);
  EvaluationReport partial = mock_report(0.5, 0.7, 0.6);
  partial.per_category[0].AP50.reset();
  const RenderedGrid out =
      render_metric_grid(grid, {{1, "apple"}}, {{"a", mock_report(0.5, 0.7, 0.6)}, {"b", partial}});
  EXPECT_EQ(out.warnings, 1u);
  const auto cells = split_cells(lines_of(out.text)[3], '|');
  EXPECT_EQ(cells[3], "—");

  // A row without any report: one warning per metric.
  const RenderedGrid absent = render_metric_grid(grid, {{1, "apple"}}, {{"a", mock_report(1, 1, 1)}});
  EXPECT_EQ(absent.warnings, 3u);
}

TEST(MetricGrid, CsvAndMarkdownCarrySameNumbers) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::string, EvaluationReport> reports{
        {"x", mock_report(unit(gen), unit(gen), unit(gen))},
        {"y", mock_report(unit(gen), unit(gen), unit(gen))}};
    const auto md = lines_of(
        render_metric_grid(grid_of({"x", "y"}, OutputFormat::kMarkdown), {{1, "apple"}}, reports).text);
    const auto csv = lines_of(
        render_metric_grid(grid_of({"x", "y"}, OutputFormat::kCsv), {{1, "apple"}}, reports).text);
    for (std::size_t r = 0; r < 2; ++r) {
      auto m = split_cells(md[2 + r], '|');
      m.erase(m.begin());
      ASSERT_EQ(m, split_cells(csv[1 + r], ','));
    }
  }
}

TEST(MetricGrid, DuplicateLabelsRejected) {
  EXPECT_THROW(grid_of({"a", "a"}, OutputFormat::kCsv).validate(), ValidationError);
  ExperimentGrid g = grid_of({"a"}, OutputFormat::kCsv);
  g.metrics.clear();
  EXPECT_THROW(g.validate(), ValidationError);
}

TEST(Grid, ParseResolvesPathsAndSplits) {
  const ExperimentGrid g = parse_grid(read_file(kData / "e2e" / "grid.json"), kData / "e2e");
  ASSERT_EQ(g.rows.size(), 3u);
  EXPECT_EQ(g.rows[0].predictions, kData / "e2e" / "preds_perfect.json");
  ASSERT_TRUE(g.rows[1].split);
  EXPECT_EQ(g.rows[1].split->seed, 7u);
  EXPECT_EQ(g.format, OutputFormat::kMarkdown);
  EXPECT_THROW(parse_grid(R"({"rows": [{"label": "a"}]})", "."), Error);
  EXPECT_THROW(parse_grid(R"({"rows": [], "metrics": ["F1"]})", "."), ValidationError);
}

TEST(Grid, EvaluatesBundledCorpus) {
  const DetectionDataset ds = load_coco(kData / "e2e" / "annotations.json").dataset;
  const ExperimentGrid g = parse_grid(read_file(kData / "e2e" / "grid.json"), kData / "e2e", &ds);
  const auto reports = evaluate_grid(ds, g);
  EXPECT_EQ(reports.at("perfect").aggregate.mAP, 1.0);
  EXPECT_EQ(reports.at("empty").aggregate.mAP, 0.0);
  const double noisy = *reports.at("noisy").aggregate.mAP;
  EXPECT_GT(noisy, 0.0);
  EXPECT_LT(noisy, 1.0);

  ExperimentGrid missing = g;
  missing.rows[0].predictions = kData / "e2e" / "nope.json";
  EXPECT_THROW(evaluate_grid(ds, missing), IoError);
}

TEST(Timing, PublishedRows) {
  auto constant = [](const std::string& model, double ms) {
    return TimingRecord{model, std::vector<double>(50, ms)};
  };
  EXPECT_EQ(format_timing(summarize(constant("a", 45.7))), "21.9 FPS, 45.7 ms");
  EXPECT_EQ(format_timing(summarize(constant("b", 181.8))), "5.5 FPS, 181.8 ms");
  EXPECT_EQ(format_timing(summarize(constant("c", 1000.0))), "1.0 FPS, 1000.0 ms");
}

TEST(Timing, ParsesLogAndRendersTable) {
  const auto records = parse_timing_log(
      "{\"model\": \"Retinanet\", \"image_id\": 1, \"latency_ms\": 40.7}\n"
      "\n"
      "{\"model\": \"FMFruit-T\", \"image_id\": 1, \"latency_ms\": 181.8}\n"
      "{\"model\": \"Retinanet\", \"image_id\": 2, \"latency_ms\": 50.7}\n");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].model, "Retinanet");
  EXPECT_EQ(records[0].latencies_ms.size(), 2u);
  const auto lines = lines_of(summarize_timing(records));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[2], "| Retinanet | 21.9 | 45.7 |");
  EXPECT_EQ(lines[3], "| FMFruit-T | 5.5 | 181.8 |");
}

TEST(Timing, FpsTimesLatencyIsThousand) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> ms(1.0, 2000.0);
  for (int trial = 0; trial < 500; ++trial) {
    TimingRecord r{"m", {}};
    for (int i = 0; i < 10; ++i) r.latencies_ms.push_back(ms(gen));
    const TimingSummary s = summarize(r);
    ASSERT_NEAR(s.fps * s.mean_ms, 1000.0, 1e-9);
    // Displayed values: each off by at most 0.05 before multiplying.
    const double fps = std::stod(format_timing(s));
    const double shown_ms = std::stod(format_timing(s).substr(format_timing(s).find(", ") + 2));
    ASSERT_NEAR(fps * shown_ms, 1000.0, 0.05 * (fps + shown_ms) + 0.0025);
  }
}

TEST(Timing, Errors) {
  EXPECT_THROW(summarize({"m", {}}), ValidationError);
  EXPECT_THROW(summarize({"m", {10.0, 0.0}}), ValidationError);
  EXPECT_THROW(parse_timing_log("{\"model\": \"m\", \"image_id\": 1, \"latency_ms\": -3}\n"),
               ValidationError);
  EXPECT_THROW(parse_timing_log("{\"model\": \n"), ParseError);
}

}  // namespace
}  // namespace fruitbench
