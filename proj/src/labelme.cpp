#include "fruitbench/labelme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fruitbench/coco_io.hpp"
#include "json_util.hpp"

namespace fruitbench {

using detail::json;

namespace {

BoundingBox shape_box(const json& shape, const std::string& ctx) {
  const json& points = detail::require_array(shape, "points", ctx);
  if (points.size() < 2) {
    throw ValidationError(ctx + " has fewer than 2 points");
  }
  std::vector<std::pair<double, double>> pts;
  for (const json& p : points) {
    if (!p.is_array() || p.size() < 2) {
      throw ValidationError(ctx + " has a malformed point");
    }
    pts.emplace_back(detail::require_number(p[0], ctx),
                     detail::require_number(p[1], ctx));
  }
  std::string type = "polygon";
  if (auto it = shape.find("shape_type"); it != shape.end() && it->is_string()) {
    type = it->get<std::string>();
  }
  if (type == "circle") {
    // center, then a point on the circumference
    const double r = std::hypot(pts[1].first - pts[0].first,
                                pts[1].second - pts[0].second);
    return BoundingBox::from_corners(pts[0].first - r, pts[0].second - r,
                                     pts[0].first + r, pts[0].second + r);
  }
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (const auto& [x, y] : pts) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  return BoundingBox::from_corners(x0, y0, x1, y1);
}

}  // namespace

LabelmeImportResult load_labelme(
    const std::filesystem::path& dir,
    const std::map<std::string, Category>& category_map,
    const LabelmeOptions& options) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  std::map<std::string, Category> folded_map;
  std::map<CategoryId, Category> categories;
  for (const auto& [label, cat] : category_map) {
    folded_map[fold_name(label)] = cat;
    categories[cat.id] = cat;
  }

  LabelmeImportResult result;
  std::vector<ImageRecord> images;
  std::vector<GroundTruthInstance> instances;
  for (const auto& file : files) {
    const json root = detail::parse_json(read_file(file), "Labelme");
    const std::string ctx = file.filename().string();
    ImageRecord image;
    image.id = static_cast<ImageId>(images.size() + 1);
    image.file_name = file.stem().string();
    if (auto it = root.find("imagePath"); it != root.end() && it->is_string()) {
      image.file_name = it->get<std::string>();
    }
    const std::int64_t w = detail::require_int(root, "imageWidth", ctx);
    const std::int64_t h = detail::require_int(root, "imageHeight", ctx);
    if (w <= 0 || h <= 0) {
      throw ValidationError(ctx + " has non-positive width/height");
    }
    image.width = static_cast<int>(w);
    image.height = static_cast<int>(h);
    image.region = options.region;

    const json& shapes = detail::require_array(root, "shapes", ctx);
    for (std::size_t s = 0; s < shapes.size(); ++s) {
      const json& shape = shapes[s];
      const std::string shape_ctx = ctx + " shape " + std::to_string(s);
      const json& label = detail::require_field(shape, "label", shape_ctx);
      if (!label.is_string()) {
        throw ValidationError(shape_ctx + " label must be a string");
      }
      const std::string raw_label = label.get<std::string>();
      BoundingBox box = shape_box(shape, shape_ctx);
      auto mapped = folded_map.find(fold_name(raw_label));
      if (mapped == folded_map.end()) {
        ++result.unmapped_labels[raw_label];
        continue;
      }
      const BoundingBox clamped = box.clamped(image.width, image.height);
      if (!(clamped == box)) ++result.clamped_boxes;

      GroundTruthInstance inst;
      inst.id = static_cast<InstanceId>(instances.size() + 1);
      inst.image_id = image.id;
      inst.category_id = mapped->second.id;
      inst.box = clamped;
      if (auto it = shape.find("attributes"); it != shape.end() && it->is_object()) {
        for (const auto& [k, v] : it->items()) {
          if (v.is_string()) inst.attributes[k] = v.get<std::string>();
        }
      }
      if (auto it = shape.find("flags"); it != shape.end() && it->is_object()) {
        for (const auto& [k, v] : it->items()) {
          if (v.is_boolean() && v.get<bool>()) inst.attributes[k] = "true";
        }
      }
      instances.push_back(std::move(inst));
    }
    images.push_back(std::move(image));
  }

  std::vector<Category> cats;
  for (auto& [id, c] : categories) cats.push_back(c);
  result.dataset = DetectionDataset::create(std::move(cats), std::move(images),
                                            std::move(instances));
  return result;
}

}  // namespace fruitbench
