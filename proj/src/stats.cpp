#include "fruitbench/stats.hpp"

#include <map>
#include <set>

namespace fruitbench {

namespace {

struct Accumulator {
  std::set<ImageId> images;
  std::size_t boxes = 0;
  double area_sum = 0.0;
  std::vector<std::string> regions;

  void add_region(const std::optional<std::string>& region) {
    if (!region) return;
    for (const auto& r : regions) {
      if (r == *region) return;
    }
    regions.push_back(*region);
  }

  StatsRow row(std::string label, std::size_t image_count) const {
    StatsRow r;
    r.label = std::move(label);
    r.image_count = image_count;
    r.bbox_count = boxes;
    if (image_count > 0) {
      r.avg_bboxes_per_image =
          static_cast<double>(boxes) / static_cast<double>(image_count);
    }
    if (boxes > 0) r.avg_size_per_instance = area_sum / static_cast<double>(boxes);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      if (i > 0) r.region += " & ";
      r.region += regions[i];
    }
    return r;
  }
};

}  // namespace

DatasetStats compute_stats(const DetectionDataset& ds) {
  std::map<CategoryId, Accumulator> per_category;
  Accumulator total;
  for (const auto& image : ds.images()) {
    total.add_region(image.region);
    for (std::size_t idx : ds.instances_of_image(image.id)) {
      const auto& inst = ds.instances()[idx];
      auto& acc = per_category[inst.category_id];
      if (acc.images.insert(image.id).second) acc.add_region(image.region);
      ++acc.boxes;
      acc.area_sum += area(inst.box);
      ++total.boxes;
      total.area_sum += area(inst.box);
    }
  }

  DatasetStats stats;
  for (const auto& cat : ds.categories()) {
    const Accumulator& acc = per_category[cat.id];
    stats.categories.push_back(acc.row(cat.name, acc.images.size()));
  }
  stats.total = total.row("Total", ds.images().size());
  return stats;
}

}  // namespace fruitbench
