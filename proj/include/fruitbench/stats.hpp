#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fruitbench/dataset.hpp"

namespace fruitbench {

struct StatsRow {
  std::string label;
  std::size_t image_count = 0;
  std::size_t bbox_count = 0;
  // Exact ratios; absent when the row has no images / no boxes.
  std::optional<double> avg_bboxes_per_image;
  std::optional<double> avg_size_per_instance;
  // Distinct image regions in first-seen (image id) order, joined by " & ".
  std::string region;
};

struct DatasetStats {
  std::vector<StatsRow> categories;  // dataset category order (by id)
  StatsRow total;
};

// Per-category image counts, box counts, mean boxes per image and mean box
// area. The total row counts every image in the dataset and every instance.
DatasetStats compute_stats(const DetectionDataset& ds);

}  // namespace fruitbench
