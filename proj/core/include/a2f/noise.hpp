#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <torch/torch.h>

namespace a2f {

// Recorded in every synthesis result so outputs can be regenerated.
inline constexpr const char* kNoiseAlgorithm = "mt19937_64+box-muller/v1";

// Standard-normal stream: std::mt19937_64 seeded with `seed`, 53-bit
// uniforms, Box-Muller pairs (cosine branch first). Each instance owns its
// state.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}

  double next_normal();
  // Row-major float32 tensor of fresh draws.
  torch::Tensor normal(const std::vector<std::int64_t>& shape);

 private:
  double next_uniform();

  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace a2f
