#pragma once

#include <cstddef>
#include <map>
#include <string_view>
#include <string>
#include <vector>

#include "fruitbench/assignment.hpp"
#include "fruitbench/dataset.hpp"
#include "fruitbench/geometry.hpp"

namespace fruitbench {

// One predicted query: a box plus its alignment logits over the text tokens.
struct PredictedQuery {
  BoundingBox box;
  std::vector<double> token_logits;
};

// One ground-truth target: a box plus the mask of tokens that describe it.
struct LossTarget {
  BoundingBox box;
  std::vector<bool> positive_tokens;
};

struct LossWeights {
  double l1 = 1.0;
  double giou = 1.0;
  double contrastive = 1.0;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossOptions {
  LossWeights weights;
  // Unmatched predictions pay the contrastive loss against an all-negative
  // mask.
  bool penalize_unmatched = true;
};

struct LossBreakdown {
  double l1 = 0.0;
  double giou_loss = 0.0;
  double contrastive = 0.0;
  double total = 0.0;
  LossWeights weights;
  // Set when nothing was matched (no predictions or no targets).
  bool no_matches = false;
  Assignment assignment;
};

// Mean over tokens of the sigmoid binary cross-entropy between logits and
// mask, computed as max(x,0) - x*y + log1p(exp(-|x|)). Empty input gives 0.
// Throws ValidationError on length mismatch.
double token_alignment_cost(const std::vector<double>& logits,
                            const std::vector<bool>& positive_tokens);

// entry(i, j) = w_l1 * l1_box_distance + w_giou * (1 - giou)
//             + w_cons * token_alignment_cost(i, j)
CostMatrix build_match_cost(const std::vector<PredictedQuery>& preds,
                            const std::vector<LossTarget>& targets,
                            double img_w, double img_h,
                            const LossWeights& weights);

// L = L1 + L_GIoU + L_Cons over the optimal assignment, each term summed over
// matched pairs (plus unmatched-prediction contrastive when enabled) and
// divided by the number of targets (by 1 when there are none).
LossBreakdown set_loss(const std::vector<PredictedQuery>& preds,
                       const std::vector<LossTarget>& targets, double img_w,
                       double img_h, const LossOptions& options = {});

// Per-image loss over a dataset. Query file:
//   {"num_tokens": T,
//    "category_tokens": {"apple": [0], "orange": [1, 2], ...},
//    "queries": [{"image_id": 1, "bbox": [x, y, w, h], "logits": [...]}, ...]}
// Each ground-truth instance's positive-token mask comes from its category.
struct LossQueries {
  std::size_t num_tokens = 0;
  std::map<CategoryId, std::vector<bool>> category_masks;
  std::map<ImageId, std::vector<PredictedQuery>> queries;
};

LossQueries parse_loss_queries(std::string_view json_text,
                               const DetectionDataset& ds);

struct ImageLoss {
  ImageId image_id = 0;
  LossBreakdown loss;
};

struct LossReport {
  std::vector<ImageLoss> images;  // ascending image id
  // Means over images; total is recomputed from the mean terms.
  LossBreakdown mean;
};

// Evaluates set_loss on every image that has queries or ground truth.
LossReport compute_loss_report(const DetectionDataset& ds,
                               const LossQueries& queries,
                               const LossOptions& options = {});

std::string to_loss_report_json(const LossReport& report);

}  // namespace fruitbench
