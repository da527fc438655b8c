#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fruitbench/geometry.hpp"

namespace fruitbench {

using CategoryId = std::int64_t;
using ImageId = std::int64_t;
using InstanceId = std::int64_t;

struct Category {
  CategoryId id = 0;
  std::string name;

  friend bool operator==(const Category&, const Category&) = default;
};

struct ImageRecord {
  ImageId id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  std::optional<std::string> region;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

// Free-form attribute tags, e.g. {"occlusion": "branch"}.
using Attributes = std::map<std::string, std::string>;

struct GroundTruthInstance {
  InstanceId id = 0;
  ImageId image_id = 0;
  CategoryId category_id = 0;
  BoundingBox box;
  Attributes attributes;
  bool iscrowd = false;

  friend bool operator==(const GroundTruthInstance&,
                         const GroundTruthInstance&) = default;
};

struct Detection {
  ImageId image_id = 0;
  CategoryId category_id = 0;
  BoundingBox box;
  double score = 0.0;
  std::optional<std::string> prompt;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Lower-cased, whitespace-trimmed form used for case-insensitive name
// comparisons.
std::string fold_name(std::string_view name);

// Validated, immutable corpus. Lists are kept sorted by id, so two datasets
// built from permuted inputs compare equal.
class DetectionDataset {
 public:
  DetectionDataset() = default;

  // Validates ids, dimensions and references. Instance boxes must already
  // lie inside their image (see load_coco for clamping).
  static DetectionDataset create(std::vector<Category> categories,
                                 std::vector<ImageRecord> images,
                                 std::vector<GroundTruthInstance> instances);

  const std::vector<Category>& categories() const noexcept {
    return categories_;
  }
  const std::vector<ImageRecord>& images() const noexcept { return images_; }
  const std::vector<GroundTruthInstance>& instances() const noexcept {
    return instances_;
  }

  const Category* find_category(CategoryId id) const;
  const Category* find_category_by_name(std::string_view name) const;
  const ImageRecord* find_image(ImageId id) const;
  bool empty() const noexcept { return images_.empty(); }

  // Indices into instances(), grouped by image id.
  const std::vector<std::size_t>& instances_of_image(ImageId id) const;

  // Category with the most instances on the image, ties to the lowest id;
  // nullopt for images without instances.
  std::optional<CategoryId> majority_category(ImageId id) const;

  friend bool operator==(const DetectionDataset& a,
                         const DetectionDataset& b) {
    return a.categories_ == b.categories_ && a.images_ == b.images_ &&
           a.instances_ == b.instances_;
  }

 private:
  void build_indices();

  std::vector<Category> categories_;
  std::vector<ImageRecord> images_;
  std::vector<GroundTruthInstance> instances_;
  std::unordered_map<CategoryId, std::size_t> category_index_;
  std::unordered_map<ImageId, std::size_t> image_index_;
  std::unordered_map<ImageId, std::vector<std::size_t>> by_image_;
};

// Checks that every detection references a known image and category and has
// a score in [0,1]. Throws IntegrityError / ValidationError.
void validate_detections(const DetectionDataset& ds,
                         const std::vector<Detection>& detections);

}  // namespace fruitbench
