#include "fruitbench/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fruitbench/coco_io.hpp"
#include "fruitbench/error.hpp"
#include "fruitbench/evaluation.hpp"
#include "fruitbench/labelme.hpp"
#include "fruitbench/rec.hpp"
#include "fruitbench/reporting.hpp"
#include "fruitbench/set_loss.hpp"
#include "fruitbench/splits.hpp"
#include "fruitbench/stats.hpp"
#include "fruitbench/timing.hpp"
#include "json_util.hpp"

namespace fruitbench {

namespace {

struct RunConfig {
  bool json_errors = false;
  int verbosity = 0;
  unsigned threads = 1;

  std::string annotations;
  std::string predictions;
  std::string split_manifest;
  std::string output;
  std::string format;

  // ingest-labelme
  std::string labelme_dir;
  std::vector<std::string> category_names;
  std::string region;

  // split
  std::string kind = "train-test";
  double fraction = 0.6;
  std::optional<std::uint32_t> k;
  std::string held_out;
  std::uint64_t seed = 0;

  // evaluate / rec-eval / report
  std::size_t max_dets = 100;
  std::string filters;
  std::string grid;

  // loss
  std::string queries;
  double w_l1 = 1.0;
  double w_giou = 1.0;
  double w_cons = 1.0;
  bool no_unmatched_penalty = false;

  // bench
  std::string timing_log;
};

unsigned default_threads() {
  if (const char* env = std::getenv("FRUITBENCH_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return 1;
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.output.empty()) {
    out << text;
  } else {
    write_file(cfg.output, text);
  }
}

OutputFormat format_or(const RunConfig& cfg, OutputFormat fallback) {
  return cfg.format.empty() ? fallback : parse_output_format(cfg.format);
}

EvaluationConfig eval_config(const RunConfig& cfg) {
  EvaluationConfig ec;
  ec.max_dets = cfg.max_dets;
  ec.threads = cfg.threads;
  return ec;
}

DetectionDataset load_annotations(const RunConfig& cfg, std::ostream& err) {
  CocoLoadResult loaded = load_coco(cfg.annotations);
  if (loaded.clamped_boxes > 0 && cfg.verbosity >= 0) {
    err << "warning: clamped " << loaded.clamped_boxes
        << " ground-truth boxes to their image bounds\n";
  }
  return std::move(loaded.dataset);
}

std::optional<SplitResult> load_optional_split(const RunConfig& cfg) {
  if (cfg.split_manifest.empty()) return std::nullopt;
  return load_manifest(cfg.split_manifest);
}

CategoryId resolve_category(const DetectionDataset& ds, const std::string& ref) {
  if (const Category* c = ds.find_category_by_name(ref)) return c->id;
  try {
    std::size_t used = 0;
    const long long id = std::stoll(ref, &used);
    if (used == ref.size()) {
      if (const Category* c = ds.find_category(id)) return c->id;
    }
  } catch (const std::exception&) {
  }
  throw ValidationError("unknown category '" + ref + "'");
}

int cmd_ingest_labelme(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::map<std::string, Category> category_map;
  CategoryId next_id = 1;
  for (const auto& name : cfg.category_names) {
    category_map[name] = Category{next_id++, fold_name(name)};
  }
  LabelmeOptions options;
  if (!cfg.region.empty()) options.region = cfg.region;
  const LabelmeImportResult result = load_labelme(cfg.labelme_dir, category_map, options);
  write_coco(result.dataset, cfg.output);

  detail::ordered_json summary;
  summary["images"] = result.dataset.images().size();
  summary["instances"] = result.dataset.instances().size();
  summary["clamped_boxes"] = result.clamped_boxes;
  summary["unmapped_labels"] = result.unmapped_labels;
  out << summary.dump(1) << "\n";
  if (!result.unmapped_labels.empty()) {
    err << "warning: " << result.unmapped_labels.size() << " unmapped label(s)\n";
  }
  return kExitOk;
}

int cmd_write_coco(const RunConfig& cfg, std::ostream&, std::ostream& err) {
  write_coco(load_annotations(cfg, err), cfg.output);
  return kExitOk;
}

int cmd_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const OutputFormat format = format_or(cfg, OutputFormat::kMarkdown);
  const DetectionDataset ds = load_annotations(cfg, err);
  emit(cfg, out, render_stats_table(compute_stats(ds), format));
  return kExitOk;
}

int cmd_split(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SplitSpec spec;
  spec.kind = parse_split_kind(cfg.kind);
  spec.train_fraction = cfg.fraction;
  spec.seed = cfg.seed;
  if (spec.kind == SplitKind::kKShot) {
    if (!cfg.k) throw ValidationError("--k is required for k-shot splits");
    spec.k = *cfg.k;
  }
  if (spec.kind == SplitKind::kCrossClass) {
    if (cfg.held_out.empty()) {
      throw ValidationError("--held-out is required for cross-class splits");
    }
    spec.held_out = 0;  // resolved once the dataset is loaded
  }
  spec.validate();

  const DetectionDataset ds = load_annotations(cfg, err);
  if (spec.kind == SplitKind::kCrossClass) spec.held_out = resolve_category(ds, cfg.held_out);
  const SplitResult sr = make_split(ds, spec);
  if (cfg.output.empty()) {
    out << to_manifest_json(sr);
  } else {
    write_manifest(sr, cfg.output);
    out << sr.manifest_digest << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const OutputFormat format = format_or(cfg, OutputFormat::kJson);
  const DetectionDataset ds = load_annotations(cfg, err);
  const std::optional<SplitResult> split = load_optional_split(cfg);
  const std::vector<Detection> dets = load_predictions(cfg.predictions, ds);
  const EvaluationReport report = evaluate(ds, split ? &*split : nullptr, dets, eval_config(cfg));
  if (report.counts.ignored_detections > 0) {
    err << "warning: ignored " << report.counts.ignored_detections
        << " detections on images outside the test split\n";
  }
  emit(cfg, out, render_report(report, format));
  return kExitOk;
}

int cmd_rec_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const OutputFormat format = format_or(cfg, OutputFormat::kJson);
  const DetectionDataset ds = load_annotations(cfg, err);
  const std::optional<SplitResult> split = load_optional_split(cfg);
  const std::vector<Detection> dets = load_predictions(cfg.predictions, ds);
  const PromptFilters filters = parse_prompt_filters(read_file(cfg.filters), ds);
  const auto reports = evaluate_rec(ds, split ? &*split : nullptr, dets, filters, eval_config(cfg));
  std::string text;
  if (format == OutputFormat::kJson) {
    detail::json arr = detail::json::array();
    for (const auto& r : reports) arr.push_back(detail::json::parse(to_report_json(r)));
    text = arr.dump(1) + "\n";
  } else {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i > 0) text += "\n";
      text += render_report(reports[i], format);
    }
  }
  emit(cfg, out, text);
  return kExitOk;
}

int cmd_loss(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  LossOptions options;
  options.weights = {cfg.w_l1, cfg.w_giou, cfg.w_cons};
  options.penalize_unmatched = !cfg.no_unmatched_penalty;
  if (!(cfg.w_l1 >= 0 && cfg.w_giou >= 0 && cfg.w_cons >= 0)) {
    throw ValidationError("loss weights must be non-negative");
  }
  const DetectionDataset ds = load_annotations(cfg, err);
  const LossQueries queries = parse_loss_queries(read_file(cfg.queries), ds);
  emit(cfg, out, to_loss_report_json(compute_loss_report(ds, queries, options)));
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::optional<OutputFormat> format_override;
  if (!cfg.format.empty()) format_override = parse_output_format(cfg.format);
  const DetectionDataset ds = load_annotations(cfg, err);
  const std::filesystem::path grid_path(cfg.grid);
  ExperimentGrid grid = parse_grid(read_file(grid_path), grid_path.parent_path(), &ds);
  if (format_override) grid.format = *format_override;
  const auto reports = evaluate_grid(ds, grid, eval_config(cfg));
  const RenderedGrid rendered = render_metric_grid(grid, ds.categories(), reports);
  if (rendered.warnings > 0) {
    err << "warning: " << rendered.warnings << " missing cell(s)\n";
  }
  emit(cfg, out, rendered.text);
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const OutputFormat format = format_or(cfg, OutputFormat::kMarkdown);
  emit(cfg, out, summarize_timing(load_timing_log(cfg.timing_log), format));
  return kExitOk;
}

void report_error(const RunConfig& cfg, std::ostream& err, const char* kind,
                  const std::string& message, int code) {
  if (cfg.json_errors) {
    detail::ordered_json j;
    j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    err << j.dump() << "\n";
  } else {
    err << "error: " << message << "\n";
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.threads = default_threads();

  CLI::App app{"fruitbench: detection benchmark engine for open-set fruit detection"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI key-value file");
  app.add_flag("--json-errors", cfg.json_errors, "Print errors as JSON on stderr");
  app.add_option("--threads", cfg.threads, "Worker threads for evaluation")
      ->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", cfg.verbosity, "Increase verbosity");

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("-o,--output", cfg.output, "Output file (default: stdout)");
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "markdown | csv | json")
        ->check(CLI::IsMember({"markdown", "md", "csv", "json"}));
  };
  auto add_annotations = [&](CLI::App* sub) {
    sub->add_option("-a,--annotations", cfg.annotations, "COCO-style annotation file")
        ->required();
  };

  auto* ingest = app.add_subcommand("ingest-labelme", "Convert a Labelme directory to COCO JSON");
  ingest->add_option("--dir", cfg.labelme_dir, "Directory of Labelme JSON files")->required();
  ingest->add_option("--categories", cfg.category_names, "Category names, in id order")
      ->required()
      ->delimiter(',');
  ingest->add_option("--region", cfg.region, "Region tag for every image");
  ingest->add_option("-o,--output", cfg.output, "Output annotation file")->required();

  auto* write = app.add_subcommand("write-coco", "Validate, clamp and re-emit an annotation file");
  add_annotations(write);
  write->add_option("-o,--output", cfg.output, "Output annotation file")->required();

  auto* stats = app.add_subcommand("stats", "Dataset statistics table");
  add_annotations(stats);
  add_format(stats);
  add_output(stats);

  auto* split = app.add_subcommand("split", "Generate a split manifest");
  add_annotations(split);
  split->add_option("--kind", cfg.kind, "train-test | k-shot | zero-shot | cross-class")
      ->check(CLI::IsMember({"train-test", "k-shot", "zero-shot", "cross-class"}));
  split->add_option("--fraction", cfg.fraction, "Train fraction")->check(CLI::Range(0.0, 1.0));
  split->add_option("--k", cfg.k, "Images per category for k-shot");
  split->add_option("--held-out", cfg.held_out, "Held-out category (name or id)");
  split->add_option("--seed", cfg.seed, "Seed");
  add_output(split);

  auto add_eval = [&](CLI::App* sub) {
    add_annotations(sub);
    sub->add_option("-p,--predictions", cfg.predictions, "Results array file")->required();
    sub->add_option("-s,--split", cfg.split_manifest, "Split manifest (default: all images)");
    sub->add_option("--max-dets", cfg.max_dets, "Detections kept per image and category")
        ->check(CLI::PositiveNumber);
    add_format(sub);
    add_output(sub);
  };
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions (mAP, AP50, mAR)");
  add_eval(evaluate_cmd);

  auto* rec = app.add_subcommand("rec-eval", "Score prompt-conditioned predictions");
  add_eval(rec);
  rec->add_option("--filters", cfg.filters, "Prompt filter file")->required();

  auto* loss = app.add_subcommand("loss", "Set-prediction loss over matched queries");
  add_annotations(loss);
  loss->add_option("--queries", cfg.queries, "Query file with boxes and token logits")->required();
  loss->add_option("--w-l1", cfg.w_l1, "L1 weight")->check(CLI::NonNegativeNumber);
  loss->add_option("--w-giou", cfg.w_giou, "GIoU weight")->check(CLI::NonNegativeNumber);
  loss->add_option("--w-cons", cfg.w_cons, "Contrastive weight")->check(CLI::NonNegativeNumber);
  loss->add_flag("--no-unmatched-penalty", cfg.no_unmatched_penalty,
                 "Skip contrastive loss for unmatched predictions");
  add_output(loss);

  auto* report = app.add_subcommand("report", "Evaluate an experiment grid into a metric table");
  add_annotations(report);
  report->add_option("--grid", cfg.grid, "Grid file")->required();
  report->add_option("--max-dets", cfg.max_dets, "Detections kept per image and category")
      ->check(CLI::PositiveNumber);
  add_format(report);
  add_output(report);

  auto* bench = app.add_subcommand("bench", "Summarize a latency log (FPS and ms per image)");
  bench->add_option("--log", cfg.timing_log, "JSON-lines latency log")->required();
  add_format(bench);
  add_output(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(cfg, err, "usage", e.what(), kExitValidation);
    return kExitValidation;
  }

  try {
    if (*ingest) return cmd_ingest_labelme(cfg, out, err);
    if (*write) return cmd_write_coco(cfg, out, err);
    if (*stats) return cmd_stats(cfg, out, err);
    if (*split) return cmd_split(cfg, out, err);
    if (*evaluate_cmd) return cmd_evaluate(cfg, out, err);
    if (*rec) return cmd_rec_eval(cfg, out, err);
    if (*loss) return cmd_loss(cfg, out, err);
    if (*report) return cmd_report(cfg, out, err);
    if (*bench) return cmd_bench(cfg, out, err);
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::kIo ? kExitIo : kExitValidation;
    report_error(cfg, err, to_string(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    report_error(cfg, err, "internal", e.what(), kExitValidation);
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace fruitbench
