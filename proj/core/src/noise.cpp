#include "a2f/noise.hpp"

#include <cmath>
#include <numbers>

namespace a2f {

double NoiseStream::next_uniform() {
  // (0, 1]: never zero, so the logarithm below is finite.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NoiseStream::next_normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double r = std::sqrt(-2.0 * std::log(next_uniform()));
  const double theta = 2.0 * std::numbers::pi * next_uniform();
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

torch::Tensor NoiseStream::normal(const std::vector<std::int64_t>& shape) {
  auto out = torch::empty(shape, torch::kFloat32);
  auto* data = out.data_ptr<float>();
  for (std::int64_t i = 0; i < out.numel(); ++i) data[i] = static_cast<float>(next_normal());
  return out;
}

}  // namespace a2f
