#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fruitbench/dataset.hpp"
#include "fruitbench/evaluation.hpp"

namespace fruitbench {

using InstancePredicate = std::function<bool(const GroundTruthInstance&)>;

// Attribute rule: every `require` key must be present with one of the listed
// values; no `exclude` key may carry one of its listed values.
struct AttributeRule {
  std::map<std::string, std::vector<std::string>> require;
  std::map<std::string, std::vector<std::string>> exclude;

  bool operator()(const GroundTruthInstance& inst) const;
};

// Ground truth a referring expression denotes.
struct PromptFilter {
  // Restricts ground truth and detections to one category when set.
  std::optional<CategoryId> category;
  InstancePredicate predicate = [](const GroundTruthInstance&) { return true; };
};

using PromptFilters = std::map<std::string, PromptFilter>;

// Filter file: {"<prompt>": {"category": "apple", "require": {...},
// "exclude": {"occlusion": ["branch"]}}, ...}.
PromptFilters parse_prompt_filters(std::string_view json_text,
                                   const DetectionDataset& ds);

// One report per prompt, in prompt order: ground truth restricted to the
// instances the prompt's filter accepts, detections to those carrying the
// prompt. Detections without a prompt are skipped. Throws ValidationError for
// a detection prompt with no filter.
std::vector<EvaluationReport> evaluate_rec(const DetectionDataset& ds,
                                           const SplitResult* split,
                                           const std::vector<Detection>& detections,
                                           const PromptFilters& filters,
                                           const EvaluationConfig& config = {});

}  // namespace fruitbench
