#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fruitbench/dataset.hpp"

namespace fruitbench {

enum class SplitKind { kTrainTest, kKShot, kCrossClass, kZeroShot };

std::string_view to_string(SplitKind kind);
SplitKind parse_split_kind(std::string_view text);

// Declarative experiment definition. Which optional fields must be set
// depends on the kind:
//   train-test:  train_fraction
//   k-shot:      train_fraction (of the pool), k >= 1
//   zero-shot:   train_fraction (of the pool)
//   cross-class: train_fraction, held_out
struct SplitSpec {
  SplitKind kind = SplitKind::kTrainTest;
  std::optional<double> train_fraction;
  std::optional<std::uint32_t> k;
  std::optional<CategoryId> held_out;
  std::uint64_t seed = 0;

  // Throws ValidationError when fields do not match the kind.
  void validate() const;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct SplitResult {
  std::vector<ImageId> train_image_ids;  // ascending
  std::vector<ImageId> test_image_ids;   // ascending
  SplitSpec spec;
  std::string manifest_digest;

  friend bool operator==(const SplitResult&, const SplitResult&) = default;
};

// Number of training items for a stratum of n items: floor(fraction * n),
// snapped to the nearest integer when the product is within 1e-9 of it so
// decimal fractions such as 0.29 * 100 give 29, not 28.
std::size_t train_count(double fraction, std::size_t n);

// Per-category stratified split. Images are stratified by majority category
// (ties to the lowest id; images without instances form their own stratum).
// Each stratum is sorted by image id, shuffled with its own counter stream,
// and its first train_count() images go to train.
SplitResult split_train_test(const DetectionDataset& ds, double fraction,
                             std::uint64_t seed);

// Exactly k images per category, drawn without replacement from the pool's
// train images of that category. The test set is the pool's. k == 0 yields a
// zero-shot split with an empty train set. Draws for different k are
// independent: a 5-shot sample need not contain the 1-shot sample.
SplitResult sample_k_shot(const DetectionDataset& ds,
                          const SplitResult& train_pool, std::uint32_t k,
                          std::uint64_t seed);

// Train on the train portion of every image that contains no held-out
// instance; test on the standard test portion of held-out-majority images.
SplitResult split_cross_class(const DetectionDataset& ds, CategoryId held_out,
                              double fraction, std::uint64_t seed);

// Builds the split a spec describes (train-test pool first for k-shot and
// zero-shot).
SplitResult make_split(const DetectionDataset& ds, const SplitSpec& spec);

// FNV-1a 64 over the canonical compact JSON of {spec, train, test}, as 16
// lowercase hex digits.
std::string compute_digest(const SplitResult& sr);

std::string to_manifest_json(const SplitResult& sr);
// Recomputes the digest and throws TamperError on mismatch.
SplitResult parse_manifest(std::string_view json_text);
void write_manifest(const SplitResult& sr, const std::filesystem::path& path);
SplitResult load_manifest(const std::filesystem::path& path);

}  // namespace fruitbench
