#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace a2f {

enum class AttributeGroup { texture, color };

std::string_view to_string(AttributeGroup group);
AttributeGroup parse_attribute_group(std::string_view text);

// Ordered attribute vocabulary split into texture and color groups.
// Immutable after construction.
class AttributeSchema {
 public:
  struct Entry {
    std::string name;
    AttributeGroup group;
    bool operator==(const Entry&) const = default;
  };

  AttributeSchema() = default;
  // Throws SchemaError on empty input or duplicate names.
  explicit AttributeSchema(std::vector<Entry> entries);

  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] const std::vector<std::size_t>& texture_indices() const { return texture_; }
  [[nodiscard]] const std::vector<std::size_t>& color_indices() const { return color_; }

  // Throws SchemaError for unknown names.
  [[nodiscard]] std::size_t index_of(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const;

  // Stable 64-bit hash of names and groups, hex encoded.
  [[nodiscard]] std::string fingerprint() const;

  // {"attributes":[{"name":..,"group":..,"default":-1}, ...]}
  [[nodiscard]] std::string to_json() const;
  static AttributeSchema from_json(std::string_view json);

  // One "<name> <group>" record per line, '#' comments allowed.
  [[nodiscard]] std::string to_text() const;
  static AttributeSchema parse(std::string_view text);

  bool operator==(const AttributeSchema& other) const { return entries_ == other.entries_; }

 private:
  std::vector<Entry> entries_;
  std::vector<std::size_t> texture_;
  std::vector<std::size_t> color_;
};

AttributeSchema load_schema(const std::filesystem::path& path);

// The 19 attributes of the shipped default schema (13 texture + 6 color).
const AttributeSchema& default_schema();

// Soft attribute values in [-1, 1]; binary labels map to {-1, +1}.
class AttributeVector {
 public:
  AttributeVector() = default;
  // Throws SchemaError for non-finite or out-of-range entries.
  explicit AttributeVector(std::vector<double> values);

  static AttributeVector filled(std::size_t size, double value);
  // Maps dataset labels {0,1} (or {-1,1}) to {-1,+1}.
  static AttributeVector from_binary_labels(std::span<const int> labels);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  // Returns a copy with entry `index` replaced. Throws on bad index/value.
  [[nodiscard]] AttributeVector with(std::size_t index, double value) const;

  bool operator==(const AttributeVector&) const = default;

 private:
  std::vector<double> values_;
};

// Throws SchemaError if the vector length differs from the schema.
void check_matches(const AttributeVector& a, const AttributeSchema& schema);

// Texture sub-vector, order preserving.
AttributeVector texture_projection(const AttributeVector& a, const AttributeSchema& schema);

// Weights used to visualize attribute control with fixed noise.
inline constexpr double kSweepWeights[] = {-1.0, -0.1, 0.1, 0.4, 0.7, 1.0};

// One copy of `base` per weight, with only entry `index` replaced.
std::vector<AttributeVector> sweep_vectors(const AttributeVector& base, std::size_t index,
                                           std::span<const double> weights);

}  // namespace a2f
