#include "a2f/augment.hpp"

#include <cmath>
#include <cstdio>

#include "a2f/errors.hpp"

namespace a2f {

std::string AugmentOp::suffix() const {
  switch (kind) {
    case Kind::identity:
      return "";
    case Kind::hflip:
      return "_hflip";
    case Kind::rotate: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "_rot%+g", degrees);
      return buf;
    }
  }
  return "";
}

std::vector<SampleRecord> augment(const SampleRecord& record, const std::vector<AugmentOp>& ops) {
  std::vector<SampleRecord> out;
  out.reserve(ops.size());
  for (const auto& op : ops) {
    SampleRecord r = record;
    r.id = record.id + op.suffix();
    switch (op.kind) {
      case AugmentOp::Kind::identity:
        break;
      case AugmentOp::Kind::hflip:
        r.face = hflip(record.face);
        r.sketch = hflip(record.sketch);
        break;
      case AugmentOp::Kind::rotate:
        if (!std::isfinite(op.degrees) || std::abs(op.degrees) > kMaxRotationDegrees) {
          throw ConfigError("rotation angle must lie within +/-10 degrees");
        }
        r.face = rotate(record.face, op.degrees);
        r.sketch = rotate(record.sketch, op.degrees);
        break;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AugmentOp> paired_dataset_recipe() {
  return {AugmentOp::identity(), AugmentOp::flip(), AugmentOp::rotation(5.0)};
}

}  // namespace a2f
