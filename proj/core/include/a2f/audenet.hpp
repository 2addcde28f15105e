#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

namespace a2f {

// Dense UNet sketch enhancer. Encoder: C(stem)-M-[D-T]x3-D(bottleneck);
// decoder: [DT-D...]x3-DT-C(out). Widths follow the channel plan below; the
// attribute embedding joins at the 4x4 bottleneck.
struct AUDeNetConfig {
  int in_channels = 3;
  int out_channels = 3;
  int stem = 64;
  std::array<int, 3> down_dense{256, 512, 1024};
  std::array<int, 3> down_transition{128, 256, 512};
  int bottleneck = 1024;
  std::array<int, 3> up_transition{256, 128, 64};
  std::array<std::vector<int>, 3> up_dense{std::vector<int>{512}, std::vector<int>{256},
                                           std::vector<int>{64, 32, 32}};
  int final_transition = 16;
  int layers_per_block = 6;
  int growth_rate = 32;
  int attr_embed_dim = 256;
  bool attribute_conditioning = true;

  void validate() const;
  // Divides every channel width (and the growth rate) by `divisor`;
  // attr_embed_dim is left alone since it must match Stage 1.
  [[nodiscard]] AUDeNetConfig scaled(int divisor) const;
  // "C(64)-M(64)-D(256)-T(128)-...-DT(16)-C(3)"
  [[nodiscard]] std::string layer_plan() const;

  [[nodiscard]] std::string to_json() const;
  static AUDeNetConfig from_json(const std::string& json);
};

// Pre-activation DenseNet-BC block: every layer is
// BN-ReLU-Conv1x1(4g)-BN-ReLU-Conv3x3(g) applied to the concatenation of the
// block input and all earlier layer outputs; a final 1x1 conv maps the full
// concatenation to `out_channels`.
class DenseBlockImpl : public torch::nn::Module {
 public:
  DenseBlockImpl(int in_channels, int out_channels, int layers, int growth_rate);
  torch::Tensor forward(const torch::Tensor& x);

  // Replaces feature `source` (0 = block input, i = output of layer i) with
  // zeros in the input of layer `layer` (1-based). Used to check that the
  // internal concatenations are live.
  void sever_link(std::optional<std::pair<int, int>> link) { severed_ = link; }
  [[nodiscard]] int in_channels() const { return in_channels_; }
  [[nodiscard]] int out_channels() const { return out_channels_; }

 private:
  int in_channels_;
  int out_channels_;
  std::vector<torch::nn::Sequential> layers_;
  torch::nn::Sequential projection_{nullptr};
  std::optional<std::pair<int, int>> severed_;
};
TORCH_MODULE(DenseBlock);

struct SkipRecord {
  std::int64_t resolution = 0;
  std::int64_t encoder_channels = 0;
  std::int64_t decoder_channels = 0;
};

struct AUDeNetTrace {
  std::vector<SkipRecord> skips;
  std::vector<std::int64_t> bottleneck_shape;
};

class AUDeNetImpl : public torch::nn::Module {
 public:
  explicit AUDeNetImpl(AUDeNetConfig config);

  // coarse B x 3 x 64 x 64 in [-1,1], attr_embedding B x attr_embed_dim.
  // use_attributes=false zeroes the embedding at the fusion site.
  torch::Tensor forward(const torch::Tensor& coarse, const torch::Tensor& attr_embedding,
                        bool use_attributes = true, AUDeNetTrace* trace = nullptr);

  [[nodiscard]] const AUDeNetConfig& config() const { return config_; }
  // All dense blocks in plan order.
  std::vector<DenseBlock> dense_blocks() const;

 private:
  AUDeNetConfig config_;
  torch::nn::Sequential stem_{nullptr};
  std::vector<DenseBlock> down_blocks_;
  std::vector<torch::nn::Sequential> down_transitions_;
  DenseBlock bottleneck_{nullptr};
  torch::nn::Conv2d fusion_{nullptr};
  std::vector<torch::nn::Sequential> up_transitions_;
  std::vector<std::vector<DenseBlock>> up_blocks_;
  torch::nn::Sequential final_transition_{nullptr};
  torch::nn::Sequential head_{nullptr};
};
TORCH_MODULE(AUDeNet);

AUDeNet make_audenet(const AUDeNetConfig& config, std::uint64_t seed);

}  // namespace a2f
