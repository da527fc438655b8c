#pragma once

// Random small evaluation instances (<= 5 images, <= 8 ground truths, <= 8
// detections) expressed both as library types and as oracle inputs.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fruitbench/dataset.hpp"
#include "oracles/naive_evaluator.hpp"

namespace fruitbench::oracle {

struct EvalInstance {
  DetectionDataset ds;
  std::vector<Detection> dets;
  std::vector<NaiveGt> naive_gts;
  std::vector<NaiveDet> naive_dets;
  std::vector<std::int64_t> images;
  std::vector<std::int64_t> categories;
};

inline EvalInstance random_eval_instance(std::mt19937_64& gen) {
  EvalInstance inst;
  std::uniform_int_distribution<int> n_images(1, 5), n_items(0, 8), n_cats(1, 3);
  std::uniform_int_distribution<int> pos(0, 12), ext(1, 8);
  // Coarse score levels produce ties.
  std::uniform_int_distribution<int> score(0, 10);
  const int images = n_images(gen), cats = n_cats(gen);
  std::vector<Category> categories;
  for (int c = 1; c <= cats; ++c) {
    categories.push_back({c, "c" + std::to_string(c)});
    inst.categories.push_back(c);
  }
  std::vector<ImageRecord> image_records;
  for (int i = 1; i <= images; ++i) {
    image_records.push_back({i, "i.jpg", 40, 40, std::nullopt});
    inst.images.push_back(i);
  }
  auto random_box = [&] {
    const long long x = pos(gen), y = pos(gen);
    return std::array<long long, 4>{x, y, x + ext(gen), y + ext(gen)};
  };
  auto to_box = [](const std::array<long long, 4>& b) {
    return BoundingBox::from_corners(static_cast<double>(b[0]), static_cast<double>(b[1]),
                                     static_cast<double>(b[2]), static_cast<double>(b[3]));
  };
  std::vector<GroundTruthInstance> gts;
  const int n_gt = n_items(gen);
  for (int k = 0; k < n_gt; ++k) {
    const auto b = random_box();
    const std::int64_t im = 1 + static_cast<std::int64_t>(gen() % images);
    const std::int64_t c = 1 + static_cast<std::int64_t>(gen() % cats);
    const bool crowd = gen() % 8 == 0;
    gts.push_back({k + 1, im, c, to_box(b), {}, crowd});
    inst.naive_gts.push_back({im, c, b, crowd});
  }
  const int n_det = n_items(gen);
  for (int k = 0; k < n_det; ++k) {
    std::array<long long, 4> b;
    std::int64_t im, c;
    if (!gts.empty() && gen() % 2 == 0) {
      // Jitter an existing ground truth so IoUs spread over the thresholds.
      const auto& src = inst.naive_gts[gen() % inst.naive_gts.size()];
      im = src.image;
      c = gen() % 4 == 0 ? 1 + static_cast<std::int64_t>(gen() % cats) : src.category;
      b = src.box;
      b[0] += static_cast<long long>(gen() % 3);
      b[2] += static_cast<long long>(gen() % 3);
      b[3] += static_cast<long long>(gen() % 2);
      b[2] = std::max(b[2], b[0]);
    } else {
      b = random_box();
      im = 1 + static_cast<std::int64_t>(gen() % images);
      c = 1 + static_cast<std::int64_t>(gen() % cats);
    }
    const double s = score(gen) / 10.0;
    inst.dets.push_back({im, c, to_box(b), s, std::nullopt});
    inst.naive_dets.push_back({im, c, b, s});
  }
  inst.ds = DetectionDataset::create(categories, image_records, gts);
  return inst;
}

}  // namespace fruitbench::oracle
