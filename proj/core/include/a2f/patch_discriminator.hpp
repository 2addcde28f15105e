#pragma once

#include <array>
#include <string>

#include <torch/torch.h>

namespace a2f {

// Four 4x4 conv blocks with strides (2,2,2,1) and a final 4x4 conv to one
// channel, all padded by 1: 64 -> 32 -> 16 -> 8 -> 7 -> 6. Sigmoid output.
struct PatchDiscriminatorConfig {
  int image_channels = 3;
  // Condition image concatenated to the candidate (6 input channels).
  bool conditional = true;
  std::array<int, 4> channels{64, 128, 256, 512};
  double leaky_slope = 0.2;

  void validate() const;
  [[nodiscard]] int input_channels() const { return conditional ? 2 * image_channels : image_channels; }
  [[nodiscard]] PatchDiscriminatorConfig scaled(int divisor) const;
  [[nodiscard]] std::string to_json() const;
  static PatchDiscriminatorConfig from_json(const std::string& json);
};

// Spatial size after a conv with the given kernel/stride/padding.
constexpr std::int64_t conv_output_size(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                                        std::int64_t padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

class PatchDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit PatchDiscriminatorImpl(PatchDiscriminatorConfig config);

  // Per-patch real probabilities B x 1 x 6 x 6. `condition` is ignored
  // (may be undefined) for an unconditional discriminator.
  torch::Tensor forward(const torch::Tensor& condition, const torch::Tensor& candidate);

  [[nodiscard]] const PatchDiscriminatorConfig& config() const { return config_; }

 private:
  PatchDiscriminatorConfig config_;
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

PatchDiscriminator make_patch_discriminator(const PatchDiscriminatorConfig& config, std::uint64_t seed);

}  // namespace a2f
