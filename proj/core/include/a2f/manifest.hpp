#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <torch/types.h>

#include "a2f/image.hpp"
#include "a2f/schema.hpp"

namespace a2f {

enum class Split { train, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

// One in-memory training sample. face and sketch are 64x64x3 in [0,1];
// the sketch channels are identical.
struct SampleRecord {
  std::string id;
  Image face;
  Image sketch;
  AttributeVector attributes;
  Split split = Split::train;
};

// On-disk reference to a sample. Paths are relative to the manifest file.
struct ManifestRecord {
  std::string id;
  std::filesystem::path face_path;
  std::filesystem::path sketch_path;
  AttributeVector attributes;
  Split split = Split::train;
};

struct Provenance {
  std::string dataset;
  std::string preprocessing_version = "a2f-prep/1";
  double sketch_sigma = 3.0;
  std::uint64_t seed = 0;
  std::string detector;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t test = 0;
};

// Line-delimited JSON: a header line {"kind":"header","schema":..,"provenance":..}
// followed by one {id, face_path, sketch_path, attributes, split} line per record.
class Manifest {
 public:
  Manifest() = default;
  Manifest(AttributeSchema schema, std::vector<ManifestRecord> records, Provenance provenance);

  [[nodiscard]] const AttributeSchema& schema() const { return schema_; }
  [[nodiscard]] const std::vector<ManifestRecord>& records() const { return records_; }
  [[nodiscard]] const Provenance& provenance() const { return provenance_; }
  [[nodiscard]] const std::filesystem::path& base_dir() const { return base_dir_; }
  [[nodiscard]] SplitCounts counts() const;
  [[nodiscard]] std::vector<ManifestRecord> split(Split s) const;

  // Throws DataError on schema mismatch or ids present in both splits.
  void validate() const;

  void write(const std::filesystem::path& path) const;
  static Manifest read(const std::filesystem::path& path);

  [[nodiscard]] std::filesystem::path resolve(const std::filesystem::path& p) const;

 private:
  AttributeSchema schema_;
  std::vector<ManifestRecord> records_;
  Provenance provenance_;
  std::filesystem::path base_dir_;
};

// Dense tensors for one split: images NCHW in [-1,1], attributes N x A.
struct SampleTensors {
  std::vector<std::string> ids;
  torch::Tensor faces;
  torch::Tensor sketches;
  torch::Tensor attributes;
  [[nodiscard]] std::int64_t size() const { return static_cast<std::int64_t>(ids.size()); }
  [[nodiscard]] SampleTensors subset(std::int64_t count) const;
};

SampleTensors load_split(const Manifest& manifest, Split split, std::int64_t limit = -1);
SampleTensors to_tensors(const std::vector<SampleRecord>& records);

// Columns of `schema.texture_indices()` from an N x A attribute tensor.
torch::Tensor texture_columns(const torch::Tensor& attributes, const AttributeSchema& schema);
torch::Tensor attribute_tensor(const AttributeVector& a);

}  // namespace a2f
