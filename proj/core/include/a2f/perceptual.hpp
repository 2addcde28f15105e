#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <torch/torch.h>

namespace a2f {

// Fixed (non-trainable) feature map used by the perceptual loss. Images come
// in as NCHW in [-1, 1]; gradients flow to the input only.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  [[nodiscard]] virtual torch::Tensor features(const torch::Tensor& images) const = 0;
  [[nodiscard]] virtual std::string describe() const = 0;
};

class IdentityExtractor final : public FeatureExtractor {
 public:
  [[nodiscard]] torch::Tensor features(const torch::Tensor& images) const override { return images; }
  [[nodiscard]] std::string describe() const override { return "identity"; }
};

// The first VGG-16 block up to conv1_2 (+ReLU). Input is mapped to [0,1]
// and normalized with the ImageNet channel statistics
// mean (0.485, 0.456, 0.406), std (0.229, 0.224, 0.225).
class VggConv12Extractor final : public FeatureExtractor {
 public:
  // Loads conv1_1/conv1_2 weights from a torch archive with keys
  // conv1_1_weight, conv1_1_bias, conv1_2_weight, conv1_2_bias (see tools/export_vgg_conv12.py).
  static std::shared_ptr<VggConv12Extractor> from_file(const std::filesystem::path& path);
  // Seeded random fixed weights (offline fallback). `width` defaults to the
  // VGG-16 width of 64 channels.
  static std::shared_ptr<VggConv12Extractor> random(std::uint64_t seed, int width = 64);

  [[nodiscard]] torch::Tensor features(const torch::Tensor& images) const override;
  [[nodiscard]] std::string describe() const override { return description_; }
  [[nodiscard]] std::vector<torch::Tensor> parameters() const;

  void to(torch::Dtype dtype);

 private:
  VggConv12Extractor(int width, std::string description);

  torch::nn::Conv2d conv1_1_{nullptr};
  torch::nn::Conv2d conv1_2_{nullptr};
  torch::Tensor mean_;
  torch::Tensor std_;
  std::string description_;
};

}  // namespace a2f
