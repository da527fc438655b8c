#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "fruitbench/dataset.hpp"

namespace fruitbench {

struct LabelmeImportResult {
  DetectionDataset dataset;
  // Labels (as written in the files) that did not match the category map,
  // with occurrence counts.
  std::map<std::string, std::size_t> unmapped_labels;
  std::size_t clamped_boxes = 0;
};

struct LabelmeOptions {
  // Applied to every imported image.
  std::optional<std::string> region;
};

// Imports a directory of Labelme files (one JSON per image). Rectangles and
// polygons become their bounding boxes. Labels are matched against the map
// keys after trimming whitespace and case folding. Image and annotation ids
// are assigned sequentially in file-name order.
LabelmeImportResult load_labelme(
    const std::filesystem::path& dir,
    const std::map<std::string, Category>& category_map,
    const LabelmeOptions& options = {});

}  // namespace fruitbench
