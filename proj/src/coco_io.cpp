#include "fruitbench/coco_io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace fruitbench {

using detail::json;
using detail::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

BoundingBox parse_xywh(const json& bbox, std::string_view context) {
  if (!bbox.is_array() || bbox.size() != 4) {
    throw ValidationError(std::string(context) +
                          " bbox must be an array [x, y, w, h]");
  }
  const double x = detail::require_number(bbox[0], context);
  const double y = detail::require_number(bbox[1], context);
  const double w = detail::require_number(bbox[2], context);
  const double h = detail::require_number(bbox[3], context);
  if (w < 0.0 || h < 0.0) {
    throw ValidationError(std::string(context) +
                          " has negative width/height");
  }
  return BoundingBox::from_top_left_size(x, y, w, h);
}

ordered_json xywh_json(const BoundingBox& b) {
  const auto q = b.top_left_size();
  return ordered_json::array({q[0], q[1], q[2], q[3]});
}

}  // namespace

CocoLoadResult parse_coco(std::string_view json_text) {
  const json root = detail::parse_json(json_text, "annotation");
  if (!root.is_object()) {
    throw ValidationError("annotation file must be a JSON object");
  }

  std::vector<Category> categories;
  for (const json& c : detail::require_array(root, "categories", "file")) {
    Category cat;
    cat.id = detail::require_int(c, "id", "category");
    const json& name = detail::require_field(c, "name", "category");
    if (!name.is_string()) throw ValidationError("category name must be a string");
    cat.name = name.get<std::string>();
    categories.push_back(std::move(cat));
  }

  std::vector<ImageRecord> images;
  for (const json& im : detail::require_array(root, "images", "file")) {
    ImageRecord rec;
    rec.id = detail::require_int(im, "id", "image");
    const std::string ctx = "image " + std::to_string(rec.id);
    const json& fname = detail::require_field(im, "file_name", ctx);
    rec.file_name = fname.is_string() ? fname.get<std::string>() : fname.dump();
    const std::int64_t w = detail::require_int(im, "width", ctx);
    const std::int64_t h = detail::require_int(im, "height", ctx);
    if (w <= 0 || h <= 0) {
      throw ValidationError(ctx + " has non-positive width/height");
    }
    rec.width = static_cast<int>(w);
    rec.height = static_cast<int>(h);
    if (auto it = im.find("region"); it != im.end() && it->is_string()) {
      rec.region = it->get<std::string>();
    }
    images.push_back(std::move(rec));
  }

  std::unordered_map<ImageId, std::pair<int, int>> dims;
  for (const auto& im : images) dims[im.id] = {im.width, im.height};

  CocoLoadResult result;
  std::vector<GroundTruthInstance> instances;
  for (const json& a : detail::require_array(root, "annotations", "file")) {
    GroundTruthInstance inst;
    inst.id = detail::require_int(a, "id", "annotation");
    const std::string ctx = "annotation " + std::to_string(inst.id);
    inst.image_id = detail::require_int(a, "image_id", ctx);
    inst.category_id = detail::require_int(a, "category_id", ctx);
    inst.box = parse_xywh(detail::require_field(a, "bbox", ctx), ctx);
    if (auto it = a.find("iscrowd"); it != a.end()) {
      if (it->is_boolean()) {
        inst.iscrowd = it->get<bool>();
      } else if (it->is_number_integer()) {
        inst.iscrowd = it->get<std::int64_t>() != 0;
      } else {
        throw ValidationError(ctx + " iscrowd must be 0/1");
      }
    }
    if (auto it = a.find("attributes"); it != a.end() && !it->is_null()) {
      if (!it->is_object()) {
        throw ValidationError(ctx + " attributes must be an object");
      }
      for (const auto& [key, value] : it->items()) {
        if (!value.is_string()) {
          throw ValidationError(ctx + " attribute '" + key +
                                "' must be a string");
        }
        inst.attributes[key] = value.get<std::string>();
      }
    }
    auto dim = dims.find(inst.image_id);
    if (dim == dims.end()) {
      throw IntegrityError(ctx + " references missing image " +
                           std::to_string(inst.image_id));
    }
    const auto [w, h] = dim->second;
    const BoundingBox clamped = inst.box.clamped(w, h);
    if (!(clamped == inst.box)) {
      inst.box = clamped;
      ++result.clamped_boxes;
    }
    instances.push_back(std::move(inst));
  }

  result.dataset = DetectionDataset::create(
      std::move(categories), std::move(images), std::move(instances));
  return result;
}

CocoLoadResult load_coco(const std::filesystem::path& path) {
  return parse_coco(read_file(path));
}

std::string to_coco_json(const DetectionDataset& ds) {
  ordered_json root;
  ordered_json images = ordered_json::array();
  for (const auto& im : ds.images()) {
    ordered_json j;
    j["id"] = im.id;
    j["file_name"] = im.file_name;
    j["width"] = im.width;
    j["height"] = im.height;
    if (im.region) j["region"] = *im.region;
    images.push_back(std::move(j));
  }
  ordered_json annotations = ordered_json::array();
  for (const auto& inst : ds.instances()) {
    ordered_json j;
    j["id"] = inst.id;
    j["image_id"] = inst.image_id;
    j["category_id"] = inst.category_id;
    j["bbox"] = xywh_json(inst.box);
    j["area"] = area(inst.box);
    j["iscrowd"] = inst.iscrowd ? 1 : 0;
    if (!inst.attributes.empty()) {
      ordered_json attrs = ordered_json::object();
      for (const auto& [k, v] : inst.attributes) attrs[k] = v;
      j["attributes"] = std::move(attrs);
    }
    annotations.push_back(std::move(j));
  }
  ordered_json categories = ordered_json::array();
  for (const auto& c : ds.categories()) {
    categories.push_back(ordered_json{{"id", c.id}, {"name", c.name}});
  }
  root["images"] = std::move(images);
  root["annotations"] = std::move(annotations);
  root["categories"] = std::move(categories);
  return root.dump(1) + "\n";
}

void write_coco(const DetectionDataset& ds, const std::filesystem::path& path) {
  write_file(path, to_coco_json(ds));
}

std::vector<Detection> parse_predictions(std::string_view json_text,
                                         const DetectionDataset& ds) {
  const json root = detail::parse_json(json_text, "prediction");
  if (!root.is_array()) {
    throw ValidationError("prediction file must be a JSON array");
  }
  std::vector<Detection> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& r = root[i];
    const std::string ctx = "prediction " + std::to_string(i);
    Detection d;
    d.image_id = detail::require_int(r, "image_id", ctx);
    d.category_id = detail::require_int(r, "category_id", ctx);
    d.box = parse_xywh(detail::require_field(r, "bbox", ctx), ctx);
    d.score = detail::require_number(detail::require_field(r, "score", ctx),
                                     ctx + " score");
    if (auto it = r.find("prompt"); it != r.end() && !it->is_null()) {
      if (!it->is_string()) throw ValidationError(ctx + " prompt must be a string");
      d.prompt = it->get<std::string>();
    }
    out.push_back(std::move(d));
  }
  validate_detections(ds, out);
  return out;
}

std::vector<Detection> load_predictions(const std::filesystem::path& path,
                                        const DetectionDataset& ds) {
  return parse_predictions(read_file(path), ds);
}

std::string to_predictions_json(const std::vector<Detection>& detections) {
  ordered_json root = ordered_json::array();
  for (const auto& d : detections) {
    ordered_json j;
    j["image_id"] = d.image_id;
    j["category_id"] = d.category_id;
    j["bbox"] = xywh_json(d.box);
    j["score"] = d.score;
    if (d.prompt) j["prompt"] = *d.prompt;
    root.push_back(std::move(j));
  }
  return root.dump() + "\n";
}

}  // namespace fruitbench
