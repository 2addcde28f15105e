#pragma once

#include <cstdint>
#include <filesystem>

#include "a2f/image.hpp"
#include "a2f/schema.hpp"

namespace a2f {

// Procedural, attribute-driven face drawings. Attributes that the default
// schema names (Male, Smiling, Black_Hair, ...) change visible features;
// unknown names are ignored. Used for offline tests and desk-scale runs.
Image render_synthetic_face(const AttributeSchema& schema, const AttributeVector& attributes,
                            std::uint64_t seed, int width = 88, int height = 104);

// Random +/-1 attributes for sample `index`.
AttributeVector random_attributes(const AttributeSchema& schema, std::uint64_t seed,
                                  std::uint64_t index);

// Writes a raw dataset in the table layout (images/, list_attr.txt,
// list_eval_partition.txt) with `count` samples, every tenth one in test.
void write_synthetic_dataset(const std::filesystem::path& root, const AttributeSchema& schema,
                             int count, std::uint64_t seed);

}  // namespace a2f
