#include "fruitbench/splits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "fruitbench/coco_io.hpp"
#include "fruitbench/error.hpp"
#include "fruitbench/rng.hpp"
#include "json_util.hpp"

namespace fruitbench {

using detail::json;

namespace {

// Purpose tags keep the train/test shuffle and the k-shot draws on separate
// streams.
constexpr std::uint64_t kTrainTestStream = 0x7472616974657374ULL;
constexpr std::uint64_t kKShotStream = 0x6b73686f74000000ULL;

// Background stratum for images without instances.
constexpr CategoryId kNoCategory = 0;

std::map<CategoryId, std::vector<ImageId>> stratify(
    const DetectionDataset& ds, const std::vector<ImageId>& image_ids) {
  std::map<CategoryId, std::vector<ImageId>> strata;
  for (ImageId id : image_ids) {
    strata[ds.majority_category(id).value_or(kNoCategory)].push_back(id);
  }
  for (auto& [cat, ids] : strata) std::sort(ids.begin(), ids.end());
  return strata;
}

std::vector<ImageId> all_image_ids(const DetectionDataset& ds) {
  std::vector<ImageId> ids;
  ids.reserve(ds.images().size());
  for (const auto& im : ds.images()) ids.push_back(im.id);
  return ids;
}

void require_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("train fraction must lie in (0,1), got " +
                          std::to_string(fraction));
  }
}

SplitResult finish(std::vector<ImageId> train, std::vector<ImageId> test,
                   SplitSpec spec) {
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  SplitResult sr{std::move(train), std::move(test), std::move(spec), {}};
  sr.manifest_digest = compute_digest(sr);
  return sr;
}

std::string category_label(const DetectionDataset& ds, CategoryId id) {
  const Category* c = ds.find_category(id);
  return c ? "'" + c->name + "' (id " + std::to_string(id) + ")"
           : "id " + std::to_string(id);
}

json spec_json(const SplitSpec& spec) {
  json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["fraction"] = spec.train_fraction ? json(*spec.train_fraction) : json();
  j["k"] = spec.k ? json(*spec.k) : json();
  j["held_out"] = spec.held_out ? json(*spec.held_out) : json();
  j["seed"] = spec.seed;
  return j;
}

}  // namespace

std::string_view to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::kTrainTest:
      return "train-test";
    case SplitKind::kKShot:
      return "k-shot";
    case SplitKind::kCrossClass:
      return "cross-class";
    case SplitKind::kZeroShot:
      return "zero-shot";
  }
  return "unknown";
}

SplitKind parse_split_kind(std::string_view text) {
  if (text == "train-test") return SplitKind::kTrainTest;
  if (text == "k-shot") return SplitKind::kKShot;
  if (text == "cross-class") return SplitKind::kCrossClass;
  if (text == "zero-shot") return SplitKind::kZeroShot;
  throw ValidationError("unknown split kind '" + std::string(text) + "'");
}

void SplitSpec::validate() const {
  const std::string name(to_string(kind));
  if (!train_fraction) {
    throw ValidationError(name + " split requires a train fraction");
  }
  require_fraction(*train_fraction);
  const bool wants_k = kind == SplitKind::kKShot;
  const bool wants_held_out = kind == SplitKind::kCrossClass;
  if (wants_k != k.has_value()) {
    throw ValidationError(name + (wants_k ? " split requires k"
                                          : " split must not set k"));
  }
  if (wants_k && *k == 0) {
    throw ValidationError("k-shot split requires k >= 1 (use zero-shot)");
  }
  if (wants_held_out != held_out.has_value()) {
    throw ValidationError(name + (wants_held_out
                                      ? " split requires a held-out category"
                                      : " split must not set held_out"));
  }
}

std::size_t train_count(double fraction, std::size_t n) {
  const double x = fraction * static_cast<double>(n);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::floor(x));
}

SplitResult split_train_test(const DetectionDataset& ds, double fraction,
                             std::uint64_t seed) {
  require_fraction(fraction);
  if (ds.empty()) throw ValidationError("cannot split an empty dataset");

  std::vector<ImageId> train;
  std::vector<ImageId> test;
  for (auto& [cat, ids] : stratify(ds, all_image_ids(ds))) {
    CounterRng rng(CounterRng::stream_key(seed, cat, kTrainTestStream));
    pinned_shuffle(std::span<ImageId>(ids), rng);
    const std::size_t n_train = train_count(fraction, ids.size());
    train.insert(train.end(), ids.begin(), ids.begin() + n_train);
    test.insert(test.end(), ids.begin() + n_train, ids.end());
  }
  SplitSpec spec;
  spec.kind = SplitKind::kTrainTest;
  spec.train_fraction = fraction;
  spec.seed = seed;
  return finish(std::move(train), std::move(test), spec);
}

SplitResult sample_k_shot(const DetectionDataset& ds,
                          const SplitResult& train_pool, std::uint32_t k,
                          std::uint64_t seed) {
  SplitSpec spec;
  spec.kind = k == 0 ? SplitKind::kZeroShot : SplitKind::kKShot;
  spec.train_fraction = train_pool.spec.train_fraction;
  if (k > 0) spec.k = k;
  spec.seed = seed;
  if (k == 0) return finish({}, train_pool.test_image_ids, spec);

  // Every category that is the majority of some image must supply k shots.
  std::set<CategoryId> categories;
  for (const auto& im : ds.images()) {
    if (auto c = ds.majority_category(im.id)) categories.insert(*c);
  }
  auto pool = stratify(ds, train_pool.train_image_ids);

  std::vector<ImageId> train;
  for (CategoryId cat : categories) {
    std::vector<ImageId>& ids = pool[cat];
    if (ids.size() < k) {
      throw ValidationError("category " + category_label(ds, cat) +
                            " has only " + std::to_string(ids.size()) +
                            " images in the training pool, " +
                            std::to_string(k) + "-shot needs " +
                            std::to_string(k));
    }
    CounterRng rng(CounterRng::stream_key(seed, cat, kKShotStream + k));
    pinned_shuffle(std::span<ImageId>(ids), rng);
    train.insert(train.end(), ids.begin(), ids.begin() + k);
  }
  return finish(std::move(train), train_pool.test_image_ids, spec);
}

SplitResult split_cross_class(const DetectionDataset& ds, CategoryId held_out,
                              double fraction, std::uint64_t seed) {
  if (ds.categories().size() < 2) {
    throw ValidationError(
        "cross-class split needs at least two categories (single-category "
        "dataset)");
  }
  if (ds.find_category(held_out) == nullptr) {
    throw ValidationError("held-out category " + std::to_string(held_out) +
                          " does not exist");
  }
  const SplitResult base = split_train_test(ds, fraction, seed);

  std::vector<ImageId> train;
  for (ImageId id : base.train_image_ids) {
    bool has_held_out = false;
    for (std::size_t idx : ds.instances_of_image(id)) {
      if (ds.instances()[idx].category_id == held_out) {
        has_held_out = true;
        break;
      }
    }
    if (!has_held_out) train.push_back(id);
  }
  std::vector<ImageId> test;
  for (ImageId id : base.test_image_ids) {
    if (ds.majority_category(id) == held_out) test.push_back(id);
  }
  SplitSpec spec;
  spec.kind = SplitKind::kCrossClass;
  spec.train_fraction = fraction;
  spec.held_out = held_out;
  spec.seed = seed;
  return finish(std::move(train), std::move(test), spec);
}

SplitResult make_split(const DetectionDataset& ds, const SplitSpec& spec) {
  spec.validate();
  const double fraction = *spec.train_fraction;
  switch (spec.kind) {
    case SplitKind::kTrainTest:
      return split_train_test(ds, fraction, spec.seed);
    case SplitKind::kKShot:
      return sample_k_shot(ds, split_train_test(ds, fraction, spec.seed),
                           *spec.k, spec.seed);
    case SplitKind::kZeroShot:
      return sample_k_shot(ds, split_train_test(ds, fraction, spec.seed), 0,
                           spec.seed);
    case SplitKind::kCrossClass:
      return split_cross_class(ds, *spec.held_out, fraction, spec.seed);
  }
  throw ValidationError("unknown split kind");
}

std::string compute_digest(const SplitResult& sr) {
  json body;
  body["spec"] = spec_json(sr.spec);
  body["train_image_ids"] = sr.train_image_ids;
  body["test_image_ids"] = sr.test_image_ids;
  const std::string canonical = body.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::string to_manifest_json(const SplitResult& sr) {
  detail::ordered_json root;
  const json spec = spec_json(sr.spec);
  root["spec"] = {{"kind", spec["kind"]},
                  {"fraction", spec["fraction"]},
                  {"k", spec["k"]},
                  {"held_out", spec["held_out"]},
                  {"seed", spec["seed"]}};
  root["train_image_ids"] = sr.train_image_ids;
  root["test_image_ids"] = sr.test_image_ids;
  root["digest"] = sr.manifest_digest;
  return root.dump(1) + "\n";
}

SplitResult parse_manifest(std::string_view json_text) {
  const json root = detail::parse_json(json_text, "manifest");
  const json& spec_node = detail::require_field(root, "spec", "manifest");
  SplitResult sr;
  const json& kind = detail::require_field(spec_node, "kind", "manifest spec");
  if (!kind.is_string()) throw ValidationError("manifest spec kind must be a string");
  sr.spec.kind = parse_split_kind(kind.get<std::string>());
  if (auto it = spec_node.find("fraction"); it != spec_node.end() && !it->is_null()) {
    sr.spec.train_fraction = detail::require_number(*it, "manifest fraction");
  }
  if (auto it = spec_node.find("k"); it != spec_node.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw ValidationError("manifest k must be a non-negative integer");
    sr.spec.k = it->get<std::uint32_t>();
  }
  if (auto it = spec_node.find("held_out"); it != spec_node.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ValidationError("manifest held_out must be a category id");
    sr.spec.held_out = it->get<CategoryId>();
  }
  const json& seed = detail::require_field(spec_node, "seed", "manifest spec");
  if (!seed.is_number_unsigned()) {
    throw ValidationError("manifest seed must be an unsigned integer");
  }
  sr.spec.seed = seed.get<std::uint64_t>();
  sr.spec.validate();

  auto read_ids = [&](const char* key) {
    std::vector<ImageId> ids;
    for (const json& v : detail::require_array(root, key, "manifest")) {
      if (!v.is_number_integer()) {
        throw ValidationError(std::string("manifest ") + key + " must hold integers");
      }
      ids.push_back(v.get<ImageId>());
    }
    return ids;
  };
  sr.train_image_ids = read_ids("train_image_ids");
  sr.test_image_ids = read_ids("test_image_ids");
  const json& digest = detail::require_field(root, "digest", "manifest");
  if (!digest.is_string()) throw ValidationError("manifest digest must be a string");
  sr.manifest_digest = digest.get<std::string>();

  const std::string expected = compute_digest(sr);
  if (expected != sr.manifest_digest) {
    throw TamperError("manifest digest mismatch: stored " + sr.manifest_digest +
                      ", content hashes to " + expected);
  }
  if (!std::is_sorted(sr.train_image_ids.begin(), sr.train_image_ids.end()) ||
      !std::is_sorted(sr.test_image_ids.begin(), sr.test_image_ids.end())) {
    throw ValidationError("manifest image ids must be ascending");
  }
  std::vector<ImageId> both;
  std::set_intersection(sr.train_image_ids.begin(), sr.train_image_ids.end(),
                        sr.test_image_ids.begin(), sr.test_image_ids.end(),
                        std::back_inserter(both));
  if (!both.empty()) {
    throw ValidationError("manifest train and test overlap at image " +
                          std::to_string(both.front()));
  }
  return sr;
}

void write_manifest(const SplitResult& sr, const std::filesystem::path& path) {
  write_file(path, to_manifest_json(sr));
}

SplitResult load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

}  // namespace fruitbench
