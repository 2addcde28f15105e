#pragma once

#include <array>
#include <string>

#include <torch/torch.h>

#include "a2f/audenet.hpp"

namespace a2f {

// Sketch-to-face UNet. Encoder C(64)-C(128)-C(256)-C(512)-C(512), stride 2,
// 64 -> 2; the full attribute vector is embedded, broadcast over the 2x2
// bottleneck, concatenated and fused by a projection plus a two-layer
// residual block; decoder DC(512)-DC(256)-DC(128)-DC(64)-DC(out) with skips.
struct Stage3Config {
  int in_channels = 3;
  // The text names the last layer DC(1); a colour face needs 3 channels.
  int out_channels = 3;
  std::array<int, 5> encoder_channels{64, 128, 256, 512, 512};
  std::array<int, 4> decoder_channels{512, 256, 128, 64};
  int attr_dim = 19;
  int attr_embed_dim = 128;
  bool attribute_conditioning = true;
  double leaky_slope = 0.2;

  void validate() const;
  [[nodiscard]] Stage3Config scaled(int divisor) const;
  [[nodiscard]] std::string layer_plan() const;
  [[nodiscard]] std::string to_json() const;
  static Stage3Config from_json(const std::string& json);
};

// x + BN(Conv3x3(ReLU(BN(Conv3x3(x))))). No output activation, so zeroed
// conv weights give the identity.
class ResidualBlockImpl : public torch::nn::Module {
 public:
  explicit ResidualBlockImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);
  torch::nn::Conv2d& conv1() { return conv1_; }
  torch::nn::Conv2d& conv2() { return conv2_; }

 private:
  torch::nn::Conv2d conv1_{nullptr};
  torch::nn::BatchNorm2d bn1_{nullptr};
  torch::nn::Conv2d conv2_{nullptr};
  torch::nn::BatchNorm2d bn2_{nullptr};
};
TORCH_MODULE(ResidualBlock);

struct Stage3Trace {
  std::vector<SkipRecord> skips;
  torch::Tensor projected;  // fused input of the residual block
  torch::Tensor fused;      // residual block output
  torch::Tensor attr_embedding;
};

class Stage3GeneratorImpl : public torch::nn::Module {
 public:
  explicit Stage3GeneratorImpl(Stage3Config config);

  // sketch B x 3 x 64 x 64 in [-1,1], attributes B x attr_dim in [-1,1].
  torch::Tensor forward(const torch::Tensor& sketch, const torch::Tensor& attributes,
                        bool use_attributes = true, Stage3Trace* trace = nullptr);

  [[nodiscard]] const Stage3Config& config() const { return config_; }
  ResidualBlock& residual() { return residual_; }
  torch::nn::Linear& attribute_embedder() { return embed_; }

 private:
  Stage3Config config_;
  std::vector<torch::nn::Sequential> encoder_;
  torch::nn::Linear embed_{nullptr};
  torch::nn::Sequential projection_{nullptr};
  ResidualBlock residual_{nullptr};
  std::vector<torch::nn::Sequential> decoder_;
  torch::nn::Sequential head_{nullptr};
};
TORCH_MODULE(Stage3Generator);

Stage3Generator make_stage3_generator(const Stage3Config& config, std::uint64_t seed);

}  // namespace a2f
