#include "fruitbench/set_loss.hpp"

#include <algorithm>
#include <cmath>

#include "fruitbench/error.hpp"
#include "json_util.hpp"

namespace fruitbench {

namespace {

void check_weights(const LossWeights& w) {
  if (!(w.l1 >= 0.0) || !(w.giou >= 0.0) || !(w.contrastive >= 0.0) ||
      !std::isfinite(w.l1) || !std::isfinite(w.giou) ||
      !std::isfinite(w.contrastive)) {
    throw ValidationError("loss weights must be finite and non-negative");
  }
}

void check_tokens(const std::vector<PredictedQuery>& preds,
                  const std::vector<LossTarget>& targets) {
  std::size_t tokens = 0;
  bool seen = false;
  auto check = [&](std::size_t n, const char* what, std::size_t index) {
    if (!seen) {
      tokens = n;
      seen = true;
    } else if (n != tokens) {
      throw ValidationError(std::string("token dimension mismatch: ") + what +
                            " " + std::to_string(index) + " has " +
                            std::to_string(n) + " tokens, expected " +
                            std::to_string(tokens));
    }
  };
  for (std::size_t i = 0; i < preds.size(); ++i) {
    check(preds[i].token_logits.size(), "prediction", i);
  }
  for (std::size_t j = 0; j < targets.size(); ++j) {
    check(targets[j].positive_tokens.size(), "target", j);
  }
}

}  // namespace

double token_alignment_cost(const std::vector<double>& logits,
                            const std::vector<bool>& positive_tokens) {
  if (logits.size() != positive_tokens.size()) {
    throw ValidationError("token dimension mismatch: " +
                          std::to_string(logits.size()) + " logits vs " +
                          std::to_string(positive_tokens.size()) + " mask entries");
  }
  if (logits.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < logits.size(); ++t) {
    const double x = logits[t];
    const double y = positive_tokens[t] ? 1.0 : 0.0;
    sum += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  return sum / static_cast<double>(logits.size());
}

CostMatrix build_match_cost(const std::vector<PredictedQuery>& preds,
                            const std::vector<LossTarget>& targets,
                            double img_w, double img_h,
                            const LossWeights& weights) {
  check_weights(weights);
  check_tokens(preds, targets);
  CostMatrix costs(preds.size(), targets.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const double l1 = l1_box_distance(preds[i].box, targets[j].box, img_w, img_h);
      const double g = giou(preds[i].box, targets[j].box);
      const double cons = token_alignment_cost(preds[i].token_logits,
                                               targets[j].positive_tokens);
      costs.set(i, j, weights.l1 * l1 + weights.giou * (1.0 - g) +
                          weights.contrastive * cons);
    }
  }
  return costs;
}

LossBreakdown set_loss(const std::vector<PredictedQuery>& preds,
                       const std::vector<LossTarget>& targets, double img_w,
                       double img_h, const LossOptions& options) {
  const LossWeights& w = options.weights;
  LossBreakdown out;
  out.weights = w;
  out.assignment = hungarian(build_match_cost(preds, targets, img_w, img_h, w));
  out.no_matches = out.assignment.pairs.empty();

  for (const auto& [i, j] : out.assignment.pairs) {
    out.l1 += l1_box_distance(preds[i].box, targets[j].box, img_w, img_h);
    out.giou_loss += 1.0 - giou(preds[i].box, targets[j].box);
    out.contrastive += token_alignment_cost(preds[i].token_logits,
                                            targets[j].positive_tokens);
  }
  if (options.penalize_unmatched) {
    for (std::size_t i : out.assignment.unmatched_predictions) {
      const std::vector<bool> negatives(preds[i].token_logits.size(), false);
      out.contrastive += token_alignment_cost(preds[i].token_logits, negatives);
    }
  }
  const double norm = static_cast<double>(std::max<std::size_t>(targets.size(), 1));
  out.l1 /= norm;
  out.giou_loss /= norm;
  out.contrastive /= norm;
  out.total = w.l1 * out.l1 + w.giou * out.giou_loss + w.contrastive * out.contrastive;
  return out;
}

LossQueries parse_loss_queries(std::string_view json_text,
                               const DetectionDataset& ds) {
  using detail::json;
  const json root = detail::parse_json(json_text, "loss query");
  LossQueries out;
  const std::int64_t tokens = detail::require_int(root, "num_tokens", "loss query file");
  if (tokens < 0) throw ValidationError("num_tokens must be non-negative");
  out.num_tokens = static_cast<std::size_t>(tokens);

  const json& cat_tokens = detail::require_field(root, "category_tokens", "loss query file");
  if (!cat_tokens.is_object()) throw ValidationError("category_tokens must be an object");
  for (const auto& [name, indices] : cat_tokens.items()) {
    const Category* cat = ds.find_category_by_name(name);
    if (cat == nullptr) {
      throw IntegrityError("category_tokens names unknown category '" + name + "'");
    }
    std::vector<bool> mask(out.num_tokens, false);
    if (!indices.is_array()) throw ValidationError("category_tokens values must be arrays");
    for (const json& t : indices) {
      if (!t.is_number_unsigned() || t.get<std::size_t>() >= out.num_tokens) {
        throw ValidationError("token index out of range for category '" + name + "'");
      }
      mask[t.get<std::size_t>()] = true;
    }
    out.category_masks[cat->id] = std::move(mask);
  }

  const json& queries = detail::require_array(root, "queries", "loss query file");
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const json& q = queries[i];
    const std::string ctx = "query " + std::to_string(i);
    const ImageId image_id = detail::require_int(q, "image_id", ctx);
    if (ds.find_image(image_id) == nullptr) {
      throw IntegrityError(ctx + " references missing image " + std::to_string(image_id));
    }
    const json& bbox = detail::require_field(q, "bbox", ctx);
    if (!bbox.is_array() || bbox.size() != 4) {
      throw ValidationError(ctx + " bbox must be [x, y, w, h]");
    }
    PredictedQuery pq;
    pq.box = BoundingBox::from_top_left_size(
        detail::require_number(bbox[0], ctx), detail::require_number(bbox[1], ctx),
        detail::require_number(bbox[2], ctx), detail::require_number(bbox[3], ctx));
    for (const json& v : detail::require_array(q, "logits", ctx)) {
      pq.token_logits.push_back(detail::require_number(v, ctx + " logit"));
    }
    if (pq.token_logits.size() != out.num_tokens) {
      throw ValidationError("token dimension mismatch: " + ctx + " has " +
                            std::to_string(pq.token_logits.size()) + " logits, expected " +
                            std::to_string(out.num_tokens));
    }
    out.queries[image_id].push_back(std::move(pq));
  }
  return out;
}

LossReport compute_loss_report(const DetectionDataset& ds,
                               const LossQueries& queries,
                               const LossOptions& options) {
  LossReport report;
  static const std::vector<PredictedQuery> kNoQueries;
  for (const auto& image : ds.images()) {
    auto q = queries.queries.find(image.id);
    const auto& gt_indices = ds.instances_of_image(image.id);
    if (q == queries.queries.end() && gt_indices.empty()) continue;

    std::vector<LossTarget> targets;
    for (std::size_t idx : gt_indices) {
      const auto& inst = ds.instances()[idx];
      auto mask = queries.category_masks.find(inst.category_id);
      if (mask == queries.category_masks.end()) {
        const Category* cat = ds.find_category(inst.category_id);
        throw ValidationError("no token mapping for category '" +
                              (cat ? cat->name : std::to_string(inst.category_id)) + "'");
      }
      targets.push_back({inst.box, mask->second});
    }
    ImageLoss entry;
    entry.image_id = image.id;
    entry.loss = set_loss(q == queries.queries.end() ? kNoQueries : q->second, targets,
                          image.width, image.height, options);
    report.images.push_back(std::move(entry));
  }

  report.mean.weights = options.weights;
  if (!report.images.empty()) {
    const double n = static_cast<double>(report.images.size());
    for (const auto& e : report.images) {
      report.mean.l1 += e.loss.l1;
      report.mean.giou_loss += e.loss.giou_loss;
      report.mean.contrastive += e.loss.contrastive;
    }
    report.mean.l1 /= n;
    report.mean.giou_loss /= n;
    report.mean.contrastive /= n;
  }
  const LossWeights& w = options.weights;
  report.mean.total = w.l1 * report.mean.l1 + w.giou * report.mean.giou_loss +
                      w.contrastive * report.mean.contrastive;
  report.mean.no_matches = report.images.empty();
  return report;
}

std::string to_loss_report_json(const LossReport& report) {
  using detail::ordered_json;
  auto breakdown = [](const LossBreakdown& b, ordered_json j) {
    j["l1"] = b.l1;
    j["giou_loss"] = b.giou_loss;
    j["contrastive"] = b.contrastive;
    j["total"] = b.total;
    j["no_matches"] = b.no_matches;
    return j;
  };
  ordered_json root;
  const LossWeights& w = report.mean.weights;
  root["weights"] = {{"l1", w.l1}, {"giou", w.giou}, {"contrastive", w.contrastive}};
  ordered_json images = ordered_json::array();
  for (const auto& e : report.images) {
    ordered_json j = breakdown(e.loss, {{"image_id", e.image_id}});
    ordered_json pairs = ordered_json::array();
    for (const auto& [p, g] : e.loss.assignment.pairs) pairs.push_back({p, g});
    j["pairs"] = std::move(pairs);
    images.push_back(std::move(j));
  }
  root["images"] = std::move(images);
  root["aggregate"] = breakdown(report.mean, ordered_json::object());
  root["aggregate"]["images"] = report.images.size();
  return root.dump(1) + "\n";
}

}  // namespace fruitbench
