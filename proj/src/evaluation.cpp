#include "fruitbench/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "fruitbench/error.hpp"
#include "json_util.hpp"

namespace fruitbench {

namespace {

bool outcome_before(const ScoredOutcome& a, const ScoredOutcome& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.order < b.order;
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) return std::nullopt;
    sum += *v;
  }
  return sum / static_cast<double>(values.size());
}

// Indices into `items` ordered by (score desc, position asc).
template <typename Scored>
std::vector<std::size_t> score_order(const std::vector<Scored>& items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].score > items[b].score;
  });
  return order;
}

// Greedy matcher over a precomputed IoU table (row = detection in score
// order, column = ground truth). row_scores[r] is the score of det_order[r].
std::vector<MatchRecord> greedy_match(const std::vector<std::size_t>& det_order,
                                      const std::vector<double>& row_scores,
                                      const std::vector<char>& crowd,
                                      const std::vector<double>& ious,
                                      double threshold) {
  const std::size_t n_gt = crowd.size();
  std::vector<char> taken(n_gt, 0);
  std::vector<MatchRecord> out;
  out.reserve(det_order.size());
  for (std::size_t row = 0; row < det_order.size(); ++row) {
    const double* iou_row = ious.data() + row * n_gt;
    MatchRecord rec;
    rec.detection_index = det_order[row];
    rec.score = row_scores[row];

    std::optional<std::size_t> best;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (crowd[g] || taken[g] || iou_row[g] < threshold) continue;
      if (!best || iou_row[g] > best_iou) {
        best = g;
        best_iou = iou_row[g];
      }
    }
    if (best) {
      taken[*best] = 1;
      rec.gt_index = best;
      rec.status = MatchStatus::kTruePositive;
    } else {
      for (std::size_t g = 0; g < n_gt; ++g) {
        if (!crowd[g] || iou_row[g] < threshold) continue;
        if (!best || iou_row[g] > best_iou) {
          best = g;
          best_iou = iou_row[g];
        }
      }
      if (best) {
        rec.gt_index = best;
        rec.status = MatchStatus::kIgnored;
      }
    }
    out.push_back(rec);
  }
  return out;
}

struct Cell {
  std::vector<std::size_t> gt;   // indices into ds.instances()
  std::vector<std::size_t> det;  // indices into the detection input
};

CategoryMetrics evaluate_category(const DetectionDataset& ds,
                                  const Category& category,
                                  const std::map<ImageId, Cell>& cells,
                                  const std::vector<Detection>& detections,
                                  const EvaluationConfig& config,
                                  std::size_t ap50_index) {
  const std::size_t n_thr = config.iou_thresholds.size();
  CategoryMetrics m;
  m.category_id = category.id;
  m.name = category.name;
  std::vector<std::vector<ScoredOutcome>> outcomes(n_thr);

  for (const auto& [image_id, cell] : cells) {
    std::vector<char> crowd;
    for (std::size_t gi : cell.gt) {
      const bool is_crowd = ds.instances()[gi].iscrowd;
      crowd.push_back(is_crowd ? 1 : 0);
      if (!is_crowd) ++m.num_ground_truth;
    }
    // cell.det is ascending input order, so a stable score sort gives
    // (score desc, input order).
    std::vector<std::size_t> dets = cell.det;
    std::stable_sort(dets.begin(), dets.end(), [&](std::size_t a, std::size_t b) {
      return detections[a].score > detections[b].score;
    });
    if (dets.size() > config.max_dets) dets.resize(config.max_dets);
    m.num_detections += dets.size();

    std::vector<double> ious(dets.size() * cell.gt.size());
    for (std::size_t r = 0; r < dets.size(); ++r) {
      for (std::size_t g = 0; g < cell.gt.size(); ++g) {
        ious[r * cell.gt.size() + g] =
            iou(detections[dets[r]].box, ds.instances()[cell.gt[g]].box);
      }
    }
    std::vector<double> row_scores;
    row_scores.reserve(dets.size());
    for (std::size_t d : dets) row_scores.push_back(detections[d].score);
    for (std::size_t t = 0; t < n_thr; ++t) {
      for (const MatchRecord& rec :
           greedy_match(dets, row_scores, crowd, ious, config.iou_thresholds[t])) {
        if (rec.status == MatchStatus::kIgnored) continue;
        outcomes[t].push_back({rec.score, rec.detection_index,
                               rec.status == MatchStatus::kTruePositive});
      }
    }
  }

  m.ap_per_threshold.resize(n_thr);
  m.recall_per_threshold.resize(n_thr);
  m.curves.resize(n_thr);
  for (std::size_t t = 0; t < n_thr; ++t) {
    const bool any = !outcomes[t].empty();
    m.curves[t] = build_pr_curve(std::move(outcomes[t]), m.num_ground_truth);
    if (m.num_ground_truth == 0) {
      m.ap_per_threshold[t] = any ? std::optional<double>(0.0) : std::nullopt;
      m.recall_per_threshold[t] = std::nullopt;
      continue;
    }
    double sum = 0.0;
    for (double p : m.curves[t].interpolated) sum += p;
    m.ap_per_threshold[t] = sum / static_cast<double>(kRecallLevels);
    m.recall_per_threshold[t] =
        m.curves[t].points.empty() ? 0.0 : m.curves[t].points.back().recall;
  }
  m.mAP = mean_of(m.ap_per_threshold);
  m.AP50 = ap50_index < n_thr ? m.ap_per_threshold[ap50_index] : std::nullopt;
  m.mAR = mean_of(m.recall_per_threshold);
  return m;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<MatchRecord> match_detections(
    const std::vector<Detection>& detections,
    const std::vector<GroundTruthInstance>& ground_truth, double threshold) {
  const auto order = score_order(detections);
  std::vector<double> scores;
  scores.reserve(order.size());
  for (std::size_t d : order) scores.push_back(detections[d].score);
  std::vector<char> crowd;
  for (const auto& g : ground_truth) crowd.push_back(g.iscrowd ? 1 : 0);
  std::vector<double> ious(order.size() * ground_truth.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      ious[r * ground_truth.size() + g] =
          iou(detections[order[r]].box, ground_truth[g].box);
    }
  }
  return greedy_match(order, scores, crowd, ious, threshold);
}

PrecisionRecallCurve build_pr_curve(std::vector<ScoredOutcome> outcomes,
                                    std::size_t total_gt) {
  std::sort(outcomes.begin(), outcomes.end(), outcome_before);
  PrecisionRecallCurve curve;
  curve.interpolated.assign(kRecallLevels, 0.0);
  if (total_gt == 0) return curve;

  std::size_t tp = 0;
  std::size_t fp = 0;
  curve.points.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    (o.true_positive ? tp : fp) += 1;
    curve.points.push_back(
        {static_cast<double>(tp) / static_cast<double>(total_gt),
         static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  // Envelope: running max from the right.
  std::vector<double> envelope(curve.points.size());
  double running = 0.0;
  for (std::size_t i = curve.points.size(); i-- > 0;) {
    running = std::max(running, curve.points[i].precision);
    envelope[i] = running;
  }
  // For each recall level, the first sweep position reaching it.
  std::size_t pos = 0;
  for (std::size_t level = 0; level < kRecallLevels; ++level) {
    const double r = static_cast<double>(level) / 100.0;
    while (pos < curve.points.size() && curve.points[pos].recall < r) ++pos;
    if (pos == curve.points.size()) break;
    curve.interpolated[level] = envelope[pos];
  }
  return curve;
}

std::optional<double> average_precision(std::vector<ScoredOutcome> outcomes,
                                        std::size_t total_gt) {
  if (total_gt == 0) {
    return outcomes.empty() ? std::nullopt : std::optional<double>(0.0);
  }
  const PrecisionRecallCurve curve = build_pr_curve(std::move(outcomes), total_gt);
  double sum = 0.0;
  for (double p : curve.interpolated) sum += p;
  return sum / static_cast<double>(kRecallLevels);
}

std::vector<double> default_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(static_cast<double>(50 + 5 * i) / 100.0);
  return t;
}

const CategoryMetrics* EvaluationReport::find(std::string_view category_name) const {
  const std::string key = fold_name(category_name);
  for (const auto& m : per_category) {
    if (fold_name(m.name) == key) return &m;
  }
  return nullptr;
}

EvaluationReport evaluate(const DetectionDataset& ds, const SplitResult* split,
                          const std::vector<Detection>& detections,
                          const EvaluationConfig& config) {
  if (config.iou_thresholds.empty()) {
    throw ValidationError("at least one IoU threshold is required");
  }
  for (double t : config.iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw ValidationError("IoU thresholds must lie in (0,1]");
    }
  }
  if (config.max_dets == 0) throw ValidationError("max_dets must be positive");
  validate_detections(ds, detections);

  std::unordered_set<ImageId> test_images;
  if (split != nullptr) {
    for (ImageId id : split->test_image_ids) {
      if (ds.find_image(id) == nullptr) {
        throw IntegrityError("split references missing image " + std::to_string(id));
      }
      test_images.insert(id);
    }
  } else {
    for (const auto& im : ds.images()) test_images.insert(im.id);
  }
  if (test_images.empty()) throw ValidationError("empty test split");

  EvaluationReport report;
  report.iou_thresholds = config.iou_thresholds;
  report.counts.images = test_images.size();
  if (split != nullptr) report.split_digest = split->manifest_digest;

  std::map<CategoryId, std::map<ImageId, Cell>> cells;
  for (std::size_t i = 0; i < ds.instances().size(); ++i) {
    const auto& inst = ds.instances()[i];
    if (!test_images.count(inst.image_id)) continue;
    cells[inst.category_id][inst.image_id].gt.push_back(i);
  }
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    if (!test_images.count(d.image_id)) {
      ++report.counts.ignored_detections;
      continue;
    }
    cells[d.category_id][d.image_id].det.push_back(i);
  }

  std::size_t ap50_index = config.iou_thresholds.size();
  for (std::size_t t = 0; t < config.iou_thresholds.size(); ++t) {
    if (config.iou_thresholds[t] == 0.5) ap50_index = t;
  }

  const auto& categories = ds.categories();
  report.per_category.resize(categories.size());
  static const std::map<ImageId, Cell> kEmpty;
  parallel_for(categories.size(), config.threads, [&](std::size_t c) {
    auto it = cells.find(categories[c].id);
    report.per_category[c] =
        evaluate_category(ds, categories[c], it == cells.end() ? kEmpty : it->second,
                          detections, config, ap50_index);
  });

  double sum_map = 0.0;
  double sum_ap50 = 0.0;
  double sum_mar = 0.0;
  bool ap50_ok = true;
  for (const auto& m : report.per_category) {
    report.counts.ground_truth += m.num_ground_truth;
    report.counts.detections += m.num_detections;
    if (m.num_ground_truth == 0) continue;
    ++report.aggregate.categories_counted;
    sum_map += *m.mAP;
    sum_mar += *m.mAR;
    if (m.AP50) {
      sum_ap50 += *m.AP50;
    } else {
      ap50_ok = false;
    }
  }
  if (const std::size_t n = report.aggregate.categories_counted; n > 0) {
    report.aggregate.mAP = sum_map / static_cast<double>(n);
    report.aggregate.mAR = sum_mar / static_cast<double>(n);
    if (ap50_ok) report.aggregate.AP50 = sum_ap50 / static_cast<double>(n);
  }
  return report;
}

std::string to_report_json(const EvaluationReport& report) {
  using detail::ordered_json;
  auto opt = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json();
  };
  ordered_json root;
  ordered_json per_category = ordered_json::object();
  for (const auto& m : report.per_category) {
    ordered_json j;
    j["category_id"] = m.category_id;
    j["mAP"] = opt(m.mAP);
    j["AP50"] = opt(m.AP50);
    j["mAR"] = opt(m.mAR);
    ordered_json ap = ordered_json::array();
    for (const auto& v : m.ap_per_threshold) ap.push_back(opt(v));
    j["per_threshold_AP"] = std::move(ap);
    ordered_json rc = ordered_json::array();
    for (const auto& v : m.recall_per_threshold) rc.push_back(opt(v));
    j["per_threshold_recall"] = std::move(rc);
    j["num_ground_truth"] = m.num_ground_truth;
    j["num_detections"] = m.num_detections;
    per_category[m.name] = std::move(j);
  }
  root["per_category"] = std::move(per_category);
  root["aggregate"] = {{"mAP", opt(report.aggregate.mAP)},
                       {"AP50", opt(report.aggregate.AP50)},
                       {"mAR", opt(report.aggregate.mAR)},
                       {"categories_counted", report.aggregate.categories_counted}};
  root["iou_thresholds"] = report.iou_thresholds;
  root["counts"] = {{"images", report.counts.images},
                    {"ground_truth", report.counts.ground_truth},
                    {"detections", report.counts.detections},
                    {"ignored_detections", report.counts.ignored_detections}};
  root["split_digest"] = report.split_digest;
  if (report.prompt) root["prompt"] = *report.prompt;
  return root.dump(1) + "\n";
}

}  // namespace fruitbench
