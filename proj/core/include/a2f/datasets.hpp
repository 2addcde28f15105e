#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "a2f/face_crop.hpp"
#include "a2f/manifest.hpp"
#include "a2f/schema.hpp"

namespace a2f {

enum class DatasetKind { celeba, lfwa, cuhk, synthetic };

DatasetKind parse_dataset_kind(std::string_view name);
std::string_view to_string(DatasetKind kind);

// File names of a table-annotated photo dataset below its root.
struct DatasetLayout {
  std::string annotation_file;
  std::string partition_file;  // optional; hash split when absent
  std::string image_dir;
};

DatasetLayout layout_for(DatasetKind kind);

// "<count>\n<names...>\n<file> <label>..." attribute table (CelebA format).
struct AttributeTable {
  std::vector<std::string> columns;
  std::map<std::string, std::vector<int>> rows;  // keyed by image file name
};

AttributeTable parse_attribute_table(std::string_view text);
std::string format_attribute_table(const AttributeTable& table);

// "<file> <partition>" lines; 0 = train, 1 = validation, 2 = test.
std::map<std::string, int> parse_partition(std::string_view text);
// Train and validation merge into the training split.
Split partition_to_split(int partition);

// Picks `cap` ids by seeded hash rank, independent of input order. cap < 0
// keeps every id. The result is sorted by id.
std::vector<std::string> deterministic_subsample(std::vector<std::string> ids, std::int64_t cap,
                                                 std::uint64_t seed);

// Hash-based split used when a dataset ships no partition file.
Split hash_split(const std::string& id, std::uint64_t seed, double test_fraction);

struct SplitSpec {
  std::int64_t cap_train = -1;
  std::int64_t cap_test = -1;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
};

struct PrepareOptions {
  std::filesystem::path output_dir;
  double sketch_sigma = 3.0;
  const FaceDetector* detector = nullptr;  // center-crop when null
};

// Ingests a dataset below `root`, writes 64x64 face crops and sketches as
// PNG under options.output_dir and returns the manifest (also written to
// output_dir/manifest.jsonl). Records whose face is not detected are
// skipped with a warning.
Manifest build_manifest(const std::filesystem::path& root, DatasetKind kind,
                        const AttributeSchema& schema, const SplitSpec& split,
                        const PrepareOptions& options);

}  // namespace a2f
