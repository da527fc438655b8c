#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fruitbench/dataset.hpp"

namespace fruitbench {

// Whole-file helpers; failures raise IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

struct CocoLoadResult {
  DetectionDataset dataset;
  // Ground-truth boxes that extended past their image and were clamped.
  std::size_t clamped_boxes = 0;
};

// Annotation file: {"images": [...], "annotations": [...], "categories": [...]}
// with bbox stored as [x, y, w, h].
CocoLoadResult parse_coco(std::string_view json_text);
CocoLoadResult load_coco(const std::filesystem::path& path);

std::string to_coco_json(const DetectionDataset& ds);
void write_coco(const DetectionDataset& ds, const std::filesystem::path& path);

// Results array: [{"image_id", "category_id", "bbox", "score", "prompt"?}].
std::vector<Detection> parse_predictions(std::string_view json_text,
                                         const DetectionDataset& ds);
std::vector<Detection> load_predictions(const std::filesystem::path& path,
                                        const DetectionDataset& ds);
std::string to_predictions_json(const std::vector<Detection>& detections);

}  // namespace fruitbench
