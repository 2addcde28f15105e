#pragma once

#include <string>
#include <vector>

#include "a2f/manifest.hpp"

namespace a2f {

struct AugmentOp {
  enum class Kind { identity, hflip, rotate };
  Kind kind = Kind::identity;
  double degrees = 0.0;

  static AugmentOp identity() { return {Kind::identity, 0.0}; }
  static AugmentOp flip() { return {Kind::hflip, 0.0}; }
  static AugmentOp rotation(double deg) { return {Kind::rotate, deg}; }

  [[nodiscard]] std::string suffix() const;
};

inline constexpr double kMaxRotationDegrees = 10.0;

// One output record per op; face and sketch get the same transform and the
// attribute vector is copied unchanged. Throws ConfigError for |theta| > 10.
std::vector<SampleRecord> augment(const SampleRecord& record, const std::vector<AugmentOp>& ops);

// Three-way recipe {identity, hflip, rotate(+5)} used for the paired
// sketch dataset: 88 pairs -> 264 records, 100 -> 300.
std::vector<AugmentOp> paired_dataset_recipe();

}  // namespace a2f
