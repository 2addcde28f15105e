#include "a2f/perceptual.hpp"

#include "a2f/errors.hpp"

namespace a2f {

namespace nn = torch::nn;

VggConv12Extractor::VggConv12Extractor(int width, std::string description)
    : conv1_1_(nn::Conv2dOptions(3, width, 3).padding(1)),
      conv1_2_(nn::Conv2dOptions(width, width, 3).padding(1)),
      mean_(torch::tensor({0.485f, 0.456f, 0.406f}).view({1, 3, 1, 1})),
      std_(torch::tensor({0.229f, 0.224f, 0.225f}).view({1, 3, 1, 1})),
      description_(std::move(description)) {
  for (auto& p : parameters()) p.set_requires_grad(false);
  conv1_1_->eval();
  conv1_2_->eval();
}

std::shared_ptr<VggConv12Extractor> VggConv12Extractor::from_file(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
  } catch (const c10::Error& e) {
    throw CheckpointError("cannot load VGG weights from " + path.string());
  }
  torch::Tensor w11, b11, w12, b12;
  archive.read("conv1_1_weight", w11);
  archive.read("conv1_1_bias", b11);
  archive.read("conv1_2_weight", w12);
  archive.read("conv1_2_bias", b12);
  if (w11.dim() != 4 || w11.size(1) != 3 || w12.size(1) != w11.size(0)) {
    throw CheckpointError("unexpected VGG conv1 weight shapes in " + path.string());
  }
  const int width = static_cast<int>(w11.size(0));
  std::shared_ptr<VggConv12Extractor> ex(
      new VggConv12Extractor(width, "vgg16-conv1_2(" + path.filename().string() + ")"));
  torch::NoGradGuard guard;
  ex->conv1_1_->weight.copy_(w11);
  ex->conv1_1_->bias.copy_(b11);
  ex->conv1_2_->weight.copy_(w12);
  ex->conv1_2_->bias.copy_(b12);
  return ex;
}

std::shared_ptr<VggConv12Extractor> VggConv12Extractor::random(std::uint64_t seed, int width) {
  torch::manual_seed(seed);
  return std::shared_ptr<VggConv12Extractor>(new VggConv12Extractor(
      width, "vgg16-conv1_2(random-fixed, seed=" + std::to_string(seed) +
                 ", width=" + std::to_string(width) + ")"));
}

torch::Tensor VggConv12Extractor::features(const torch::Tensor& images) const {
  auto x = ((images + 1.0) * 0.5 - mean_.to(images.dtype())) / std_.to(images.dtype());
  x = torch::relu(torch::conv2d(x, conv1_1_->weight, conv1_1_->bias, 1, 1));
  return torch::relu(torch::conv2d(x, conv1_2_->weight, conv1_2_->bias, 1, 1));
}

std::vector<torch::Tensor> VggConv12Extractor::parameters() const {
  return {conv1_1_->weight, conv1_1_->bias, conv1_2_->weight, conv1_2_->bias};
}

void VggConv12Extractor::to(torch::Dtype dtype) {
  conv1_1_->to(dtype);
  conv1_2_->to(dtype);
}

}  // namespace a2f
