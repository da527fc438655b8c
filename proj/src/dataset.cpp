#include "fruitbench/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "fruitbench/error.hpp"

namespace fruitbench {

std::string fold_name(std::string_view name) {
  std::size_t begin = 0;
  std::size_t end = name.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(name[begin]))) {
    ++begin;
  }
  while (end > begin &&
         std::isspace(static_cast<unsigned char>(name[end - 1]))) {
    --end;
  }
  std::string out(name.substr(begin, end - begin));
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

DetectionDataset DetectionDataset::create(
    std::vector<Category> categories, std::vector<ImageRecord> images,
    std::vector<GroundTruthInstance> instances) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(categories.begin(), categories.end(), by_id);
  std::sort(images.begin(), images.end(), by_id);
  std::sort(instances.begin(), instances.end(), by_id);

  std::set<std::string> folded_names;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& c = categories[i];
    if (c.id <= 0) {
      throw ValidationError("category id must be positive, got " +
                            std::to_string(c.id));
    }
    if (i > 0 && categories[i - 1].id == c.id) {
      throw ValidationError("duplicate category " + std::to_string(c.id));
    }
    if (!folded_names.insert(fold_name(c.name)).second) {
      throw ValidationError("duplicate category name '" + c.name + "'");
    }
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& im = images[i];
    if (im.id <= 0) {
      throw ValidationError("image id must be positive, got " +
                            std::to_string(im.id));
    }
    if (i > 0 && images[i - 1].id == im.id) {
      throw ValidationError("duplicate image " + std::to_string(im.id));
    }
    if (im.width <= 0 || im.height <= 0) {
      throw ValidationError("image " + std::to_string(im.id) +
                            " has non-positive width/height");
    }
  }

  DetectionDataset ds;
  ds.categories_ = std::move(categories);
  ds.images_ = std::move(images);
  ds.build_indices();

  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (inst.id <= 0) {
      throw ValidationError("annotation id must be positive, got " +
                            std::to_string(inst.id));
    }
    if (i > 0 && instances[i - 1].id == inst.id) {
      throw ValidationError("duplicate annotation " + std::to_string(inst.id));
    }
    const ImageRecord* im = ds.find_image(inst.image_id);
    if (im == nullptr) {
      throw IntegrityError("annotation " + std::to_string(inst.id) +
                           " references missing image " +
                           std::to_string(inst.image_id));
    }
    if (ds.find_category(inst.category_id) == nullptr) {
      throw IntegrityError("annotation " + std::to_string(inst.id) +
                           " references missing category " +
                           std::to_string(inst.category_id));
    }
    const auto& b = inst.box;
    if (b.x_min() < 0.0 || b.y_min() < 0.0 || b.x_max() > im->width ||
        b.y_max() > im->height) {
      throw ValidationError("annotation " + std::to_string(inst.id) +
                            " lies outside image " +
                            std::to_string(inst.image_id));
    }
  }
  ds.instances_ = std::move(instances);
  ds.build_indices();
  return ds;
}

void DetectionDataset::build_indices() {
  category_index_.clear();
  image_index_.clear();
  by_image_.clear();
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    category_index_[categories_[i].id] = i;
  }
  for (std::size_t i = 0; i < images_.size(); ++i) {
    image_index_[images_[i].id] = i;
  }
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    by_image_[instances_[i].image_id].push_back(i);
  }
}

const Category* DetectionDataset::find_category(CategoryId id) const {
  auto it = category_index_.find(id);
  return it == category_index_.end() ? nullptr : &categories_[it->second];
}

const Category* DetectionDataset::find_category_by_name(
    std::string_view name) const {
  const std::string key = fold_name(name);
  for (const auto& c : categories_) {
    if (fold_name(c.name) == key) return &c;
  }
  return nullptr;
}

const ImageRecord* DetectionDataset::find_image(ImageId id) const {
  auto it = image_index_.find(id);
  return it == image_index_.end() ? nullptr : &images_[it->second];
}

const std::vector<std::size_t>& DetectionDataset::instances_of_image(
    ImageId id) const {
  static const std::vector<std::size_t> kNone;
  auto it = by_image_.find(id);
  return it == by_image_.end() ? kNone : it->second;
}

std::optional<CategoryId> DetectionDataset::majority_category(
    ImageId id) const {
  std::map<CategoryId, std::size_t> counts;
  for (std::size_t idx : instances_of_image(id)) {
    ++counts[instances_[idx].category_id];
  }
  std::optional<CategoryId> best;
  std::size_t best_count = 0;
  // std::map iterates ids ascending; strict > keeps the lowest id on ties.
  for (const auto& [cat, n] : counts) {
    if (n > best_count) {
      best = cat;
      best_count = n;
    }
  }
  return best;
}

void validate_detections(const DetectionDataset& ds,
                         const std::vector<Detection>& detections) {
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    if (ds.find_image(d.image_id) == nullptr) {
      throw IntegrityError("detection " + std::to_string(i) +
                           " references missing image " +
                           std::to_string(d.image_id));
    }
    if (ds.find_category(d.category_id) == nullptr) {
      throw IntegrityError("detection " + std::to_string(i) +
                           " references missing category " +
                           std::to_string(d.category_id));
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw ValidationError("detection " + std::to_string(i) +
                            " has invalid score " + std::to_string(d.score) +
                            " (must lie in [0,1])");
    }
  }
}

}  // namespace fruitbench
