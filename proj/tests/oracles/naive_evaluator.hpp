#pragma once

// Reference evaluator written from the protocol definition, without the
// precision envelope or any shared code with the library: integer boxes,
// selection-sort ordering, and interpolated precision taken as the maximum
// precision over every sweep position whose recall reaches the level.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace fruitbench::oracle {

struct NaiveGt {
  std::int64_t image = 0;
  std::int64_t category = 0;
  std::array<long long, 4> box{};  // x_min, y_min, x_max, y_max
  bool crowd = false;
};

struct NaiveDet {
  std::int64_t image = 0;
  std::int64_t category = 0;
  std::array<long long, 4> box{};
  double score = 0.0;
};

struct NaiveCategoryResult {
  std::vector<std::optional<double>> ap;
  std::vector<std::optional<double>> recall;
  std::optional<double> mAP;
  std::optional<double> AP50;
  std::optional<double> mAR;
  std::size_t num_gt = 0;
};

struct NaiveResult {
  std::vector<NaiveCategoryResult> categories;
  std::optional<double> mAP;
  std::optional<double> AP50;
  std::optional<double> mAR;
};

inline double naive_iou(const std::array<long long, 4>& a,
                        const std::array<long long, 4>& b) {
  const long long iw = std::min(a[2], b[2]) - std::max(a[0], b[0]);
  const long long ih = std::min(a[3], b[3]) - std::max(a[1], b[1]);
  const long long inter = (iw > 0 && ih > 0) ? iw * ih : 0;
  const long long area_a = (a[2] - a[0]) * (a[3] - a[1]);
  const long long area_b = (b[2] - b[0]) * (b[3] - b[1]);
  const long long uni = area_a + area_b - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Indices of `dets` restricted to `keep`, by score desc then index asc, via
// repeated selection of the best remaining element.
inline std::vector<std::size_t> naive_order(const std::vector<NaiveDet>& dets,
                                            std::vector<std::size_t> keep) {
  std::vector<std::size_t> out;
  while (!keep.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < keep.size(); ++i) {
      const auto& c = dets[keep[i]];
      const auto& b = dets[keep[best]];
      if (c.score > b.score || (c.score == b.score && keep[i] < keep[best])) best = i;
    }
    out.push_back(keep[best]);
    keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

inline NaiveResult naive_evaluate(const std::vector<std::int64_t>& images,
                                  const std::vector<std::int64_t>& categories,
                                  const std::vector<NaiveGt>& gts,
                                  const std::vector<NaiveDet>& dets,
                                  const std::vector<double>& thresholds,
                                  std::size_t max_dets) {
  NaiveResult result;
  std::size_t counted = 0;
  double sum_map = 0.0, sum_ap50 = 0.0, sum_mar = 0.0;
  bool ap50_ok = true;

  for (std::int64_t cat : categories) {
    NaiveCategoryResult cr;
    for (const auto& g : gts) {
      if (g.category != cat || g.crowd) continue;
      for (std::int64_t im : images) {
        if (im == g.image) ++cr.num_gt;
      }
    }
    for (double thr : thresholds) {
      struct Outcome {
        double score;
        std::size_t index;
        bool tp;
      };
      std::vector<Outcome> outcomes;
      for (std::int64_t im : images) {
        std::vector<std::size_t> gt_idx;
        for (std::size_t g = 0; g < gts.size(); ++g) {
          if (gts[g].image == im && gts[g].category == cat) gt_idx.push_back(g);
        }
        std::vector<std::size_t> det_idx;
        for (std::size_t d = 0; d < dets.size(); ++d) {
          if (dets[d].image == im && dets[d].category == cat) det_idx.push_back(d);
        }
        std::vector<std::size_t> ordered = naive_order(dets, det_idx);
        if (ordered.size() > max_dets) ordered.resize(max_dets);
        std::vector<bool> used(gt_idx.size(), false);
        for (std::size_t d : ordered) {
          int best = -1;
          double best_iou = -1.0;
          for (std::size_t k = 0; k < gt_idx.size(); ++k) {
            const auto& g = gts[gt_idx[k]];
            if (g.crowd || used[k]) continue;
            const double v = naive_iou(dets[d].box, g.box);
            if (v >= thr && v > best_iou) {
              best = static_cast<int>(k);
              best_iou = v;
            }
          }
          if (best >= 0) {
            used[static_cast<std::size_t>(best)] = true;
            outcomes.push_back({dets[d].score, d, true});
            continue;
          }
          bool crowd_hit = false;
          for (std::size_t k = 0; k < gt_idx.size(); ++k) {
            const auto& g = gts[gt_idx[k]];
            if (g.crowd && naive_iou(dets[d].box, g.box) >= thr) crowd_hit = true;
          }
          if (!crowd_hit) outcomes.push_back({dets[d].score, d, false});
        }
      }
      if (cr.num_gt == 0) {
        cr.ap.push_back(outcomes.empty() ? std::nullopt : std::optional<double>(0.0));
        cr.recall.push_back(std::nullopt);
        continue;
      }
      // Global order: score desc, input index asc (bubble sort).
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        for (std::size_t j = 0; j + 1 < outcomes.size() - i; ++j) {
          const auto& a = outcomes[j];
          const auto& b = outcomes[j + 1];
          if (b.score > a.score || (b.score == a.score && b.index < a.index)) {
            std::swap(outcomes[j], outcomes[j + 1]);
          }
        }
      }
      std::vector<double> rc, pr;
      std::size_t tp = 0, fp = 0;
      for (const auto& o : outcomes) {
        if (o.tp) ++tp; else ++fp;
        rc.push_back(static_cast<double>(tp) / static_cast<double>(cr.num_gt));
        pr.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
      }
      double sum = 0.0;
      for (int level = 0; level <= 100; ++level) {
        const double r = static_cast<double>(level) / 100.0;
        double q = 0.0;
        for (std::size_t k = 0; k < rc.size(); ++k) {
          if (rc[k] >= r && pr[k] > q) q = pr[k];
        }
        sum += q;
      }
      cr.ap.push_back(sum / 101.0);
      cr.recall.push_back(rc.empty() ? 0.0 : rc.back());
    }
    auto mean = [](const std::vector<std::optional<double>>& v) -> std::optional<double> {
      double s = 0.0;
      for (const auto& x : v) {
        if (!x) return std::nullopt;
        s += *x;
      }
      return v.empty() ? std::nullopt : std::optional<double>(s / static_cast<double>(v.size()));
    };
    cr.mAP = mean(cr.ap);
    cr.mAR = mean(cr.recall);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (thresholds[t] == 0.5) cr.AP50 = cr.ap[t];
    }
    if (cr.num_gt > 0) {
      ++counted;
      sum_map += *cr.mAP;
      sum_mar += *cr.mAR;
      if (cr.AP50) sum_ap50 += *cr.AP50; else ap50_ok = false;
    }
    result.categories.push_back(std::move(cr));
  }
  if (counted > 0) {
    result.mAP = sum_map / static_cast<double>(counted);
    result.mAR = sum_mar / static_cast<double>(counted);
    if (ap50_ok) result.AP50 = sum_ap50 / static_cast<double>(counted);
  }
  return result;
}

}  // namespace fruitbench::oracle
