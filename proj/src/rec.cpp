#include "fruitbench/rec.hpp"

#include <algorithm>

#include "fruitbench/error.hpp"
#include "json_util.hpp"

namespace fruitbench {

using detail::json;

bool AttributeRule::operator()(const GroundTruthInstance& inst) const {
  for (const auto& [key, allowed] : require) {
    auto it = inst.attributes.find(key);
    if (it == inst.attributes.end()) return false;
    if (std::find(allowed.begin(), allowed.end(), it->second) == allowed.end()) {
      return false;
    }
  }
  for (const auto& [key, banned] : exclude) {
    auto it = inst.attributes.find(key);
    if (it != inst.attributes.end() &&
        std::find(banned.begin(), banned.end(), it->second) != banned.end()) {
      return false;
    }
  }
  return true;
}

namespace {

std::map<std::string, std::vector<std::string>> parse_value_map(
    const json& node, const std::string& ctx) {
  std::map<std::string, std::vector<std::string>> out;
  if (!node.is_object()) throw ValidationError(ctx + " must be an object");
  for (const auto& [key, values] : node.items()) {
    if (values.is_string()) {
      out[key].push_back(values.get<std::string>());
      continue;
    }
    if (!values.is_array()) {
      throw ValidationError(ctx + " '" + key + "' must be a string or array");
    }
    for (const json& v : values) {
      if (!v.is_string()) {
        throw ValidationError(ctx + " '" + key + "' values must be strings");
      }
      out[key].push_back(v.get<std::string>());
    }
  }
  return out;
}

}  // namespace

PromptFilters parse_prompt_filters(std::string_view json_text,
                                   const DetectionDataset& ds) {
  const json root = detail::parse_json(json_text, "prompt filter");
  if (!root.is_object()) {
    throw ValidationError("prompt filter file must be a JSON object");
  }
  PromptFilters filters;
  for (const auto& [prompt, node] : root.items()) {
    const std::string ctx = "prompt '" + prompt + "'";
    if (!node.is_object()) throw ValidationError(ctx + " filter must be an object");
    PromptFilter filter;
    if (auto it = node.find("category"); it != node.end() && !it->is_null()) {
      const Category* cat = nullptr;
      if (it->is_string()) {
        cat = ds.find_category_by_name(it->get<std::string>());
      } else if (it->is_number_integer()) {
        cat = ds.find_category(it->get<CategoryId>());
      }
      if (cat == nullptr) {
        throw IntegrityError(ctx + " references unknown category " + it->dump());
      }
      filter.category = cat->id;
    }
    AttributeRule rule;
    if (auto it = node.find("require"); it != node.end()) {
      rule.require = parse_value_map(*it, ctx + " require");
    }
    if (auto it = node.find("exclude"); it != node.end()) {
      rule.exclude = parse_value_map(*it, ctx + " exclude");
    }
    filter.predicate = rule;
    filters.emplace(prompt, std::move(filter));
  }
  return filters;
}

std::vector<EvaluationReport> evaluate_rec(const DetectionDataset& ds,
                                           const SplitResult* split,
                                           const std::vector<Detection>& detections,
                                           const PromptFilters& filters,
                                           const EvaluationConfig& config) {
  for (const auto& d : detections) {
    if (d.prompt && !filters.count(*d.prompt)) {
      throw ValidationError("unknown prompt '" + *d.prompt + "'");
    }
  }

  std::vector<EvaluationReport> reports;
  for (const auto& [prompt, filter] : filters) {
    std::vector<Category> categories;
    for (const auto& c : ds.categories()) {
      if (!filter.category || c.id == *filter.category) categories.push_back(c);
    }
    std::vector<GroundTruthInstance> instances;
    for (const auto& inst : ds.instances()) {
      if (filter.category && inst.category_id != *filter.category) continue;
      if (filter.predicate && !filter.predicate(inst)) continue;
      instances.push_back(inst);
    }
    const DetectionDataset filtered = DetectionDataset::create(
        std::move(categories), ds.images(), std::move(instances));

    std::vector<Detection> prompted;
    for (const auto& d : detections) {
      if (!d.prompt || *d.prompt != prompt) continue;
      if (filter.category && d.category_id != *filter.category) continue;
      prompted.push_back(d);
    }
    EvaluationReport report = evaluate(filtered, split, prompted, config);
    report.prompt = prompt;
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace fruitbench
