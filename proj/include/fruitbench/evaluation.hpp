#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fruitbench/dataset.hpp"
#include "fruitbench/splits.hpp"

namespace fruitbench {

// COCO-style box evaluation: greedy score-ordered matching, 101-point
// interpolated precision, AP/recall at IoU 0.50:0.05:0.95, area-agnostic.

enum class MatchStatus { kTruePositive, kFalsePositive, kIgnored };

struct MatchRecord {
  std::size_t detection_index = 0;  // into the detections passed in
  std::optional<std::size_t> gt_index;  // into the ground truth passed in
  MatchStatus status = MatchStatus::kFalsePositive;
  double score = 0.0;
};

// One image, one category, one threshold. Detections are visited by
// descending score (ties by input order); each takes the unmatched
// non-crowd ground truth with the highest IoU >= threshold (ties to the
// lowest index). A detection that only reaches a crowd region is ignored;
// crowd regions can absorb any number of detections and never count as
// misses.
std::vector<MatchRecord> match_detections(
    const std::vector<Detection>& detections,
    const std::vector<GroundTruthInstance>& ground_truth, double threshold);

// A detection outcome after matching, pooled across images.
struct ScoredOutcome {
  double score = 0.0;
  std::size_t order = 0;  // tie-breaker: position in the detection input
  bool true_positive = false;
};

struct PrecisionRecallCurve {
  struct Point {
    double recall = 0.0;
    double precision = 0.0;
  };
  // Cumulative (recall, precision) after each detection in sweep order.
  std::vector<Point> points;
  // Precision envelope sampled at recall levels 0.00, 0.01, ..., 1.00; zero
  // past the highest achieved recall.
  std::vector<double> interpolated;
};

inline constexpr std::size_t kRecallLevels = 101;

PrecisionRecallCurve build_pr_curve(std::vector<ScoredOutcome> outcomes,
                                    std::size_t total_gt);

// Mean of the interpolated envelope. Absent when there is neither ground
// truth nor a detection; 0 when there is no ground truth but detections.
std::optional<double> average_precision(std::vector<ScoredOutcome> outcomes,
                                        std::size_t total_gt);

// 0.50, 0.55, ..., 0.95.
std::vector<double> default_iou_thresholds();

struct EvaluationConfig {
  std::vector<double> iou_thresholds = default_iou_thresholds();
  // Highest-scoring detections kept per image and category.
  std::size_t max_dets = 100;
  // Worker threads over categories; results do not depend on this.
  unsigned threads = 1;
};

struct CategoryMetrics {
  CategoryId category_id = 0;
  std::string name;
  std::size_t num_ground_truth = 0;  // non-crowd, test images only
  std::size_t num_detections = 0;    // after the max_dets cap
  std::optional<double> mAP;
  std::optional<double> AP50;
  std::optional<double> mAR;
  std::vector<std::optional<double>> ap_per_threshold;
  std::vector<std::optional<double>> recall_per_threshold;
  std::vector<PrecisionRecallCurve> curves;  // one per threshold
};

struct AggregateMetrics {
  std::optional<double> mAP;
  std::optional<double> AP50;
  std::optional<double> mAR;
  // Categories with ground truth in the test images; the means run over
  // these only.
  std::size_t categories_counted = 0;
};

struct EvaluationCounts {
  std::size_t images = 0;
  std::size_t ground_truth = 0;
  std::size_t detections = 0;
  // Detections on images outside the test split.
  std::size_t ignored_detections = 0;
};

struct EvaluationReport {
  std::vector<double> iou_thresholds;
  std::vector<CategoryMetrics> per_category;  // dataset category order
  AggregateMetrics aggregate;
  EvaluationCounts counts;
  std::string split_digest;
  std::optional<std::string> prompt;

  const CategoryMetrics* find(std::string_view category_name) const;
};

// Evaluates on the split's test images (all images when split is null).
// Throws ValidationError on an empty test set.
EvaluationReport evaluate(const DetectionDataset& ds, const SplitResult* split,
                          const std::vector<Detection>& detections,
                          const EvaluationConfig& config = {});

std::string to_report_json(const EvaluationReport& report);

}  // namespace fruitbench
