#include "a2f/patch_discriminator.hpp"

#include "a2f/errors.hpp"
#include "json.hpp"

namespace a2f {

namespace nn = torch::nn;
using nlohmann::json;

void PatchDiscriminatorConfig::validate() const {
  if (image_channels <= 0) throw ConfigError("discriminator: image_channels must be positive");
  for (int c : channels) {
    if (c <= 0) throw ConfigError("discriminator: channels must be positive");
  }
  if (leaky_slope < 0) throw ConfigError("discriminator: leaky_slope must be >= 0");
}

PatchDiscriminatorConfig PatchDiscriminatorConfig::scaled(int divisor) const {
  if (divisor < 1) throw ConfigError("width divisor must be >= 1");
  auto c = *this;
  for (auto& ch : c.channels) ch = std::max(1, ch / divisor);
  return c;
}

std::string PatchDiscriminatorConfig::to_json() const {
  return json{{"image_channels", image_channels},
              {"conditional", conditional},
              {"channels", channels},
              {"leaky_slope", leaky_slope}}
      .dump();
}

PatchDiscriminatorConfig PatchDiscriminatorConfig::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    PatchDiscriminatorConfig c;
    c.image_channels = j.at("image_channels");
    c.conditional = j.at("conditional");
    c.channels = j.at("channels").get<std::array<int, 4>>();
    c.leaky_slope = j.at("leaky_slope");
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("discriminator config: ") + e.what());
  }
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(PatchDiscriminatorConfig config) : config_(config) {
  config_.validate();
  const auto lrelu = nn::LeakyReLUOptions().negative_slope(config_.leaky_slope);
  static constexpr int kStrides[] = {2, 2, 2, 1};
  nn::Sequential net;
  int in = config_.input_channels();
  for (int i = 0; i < 4; ++i) {
    const int out = config_.channels[i];
    net->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(kStrides[i]).padding(1).bias(i == 0)));
    if (i > 0) net->push_back(nn::BatchNorm2d(out));
    net->push_back(nn::LeakyReLU(lrelu));
    in = out;
  }
  net->push_back(nn::Conv2d(nn::Conv2dOptions(in, 1, 4).stride(1).padding(1)));
  net->push_back(nn::Sigmoid());
  net_ = register_module("net", net);
}

torch::Tensor PatchDiscriminatorImpl::forward(const torch::Tensor& condition, const torch::Tensor& candidate) {
  const int ch = config_.image_channels;
  auto check = [ch](const torch::Tensor& t, const char* what) {
    if (t.dim() != 4 || t.size(1) != ch || t.size(2) != 64 || t.size(3) != 64) {
      throw ShapeError(std::string("discriminator: ") + what + " must be B x " + std::to_string(ch) +
                       " x 64 x 64");
    }
  };
  check(candidate, "candidate");
  if (!config_.conditional) return net_->forward(candidate);
  check(condition, "condition");
  if (condition.size(0) != candidate.size(0)) throw ShapeError("discriminator: batch size mismatch");
  return net_->forward(torch::cat({condition, candidate}, 1));
}

PatchDiscriminator make_patch_discriminator(const PatchDiscriminatorConfig& config, std::uint64_t seed) {
  torch::manual_seed(seed);
  return PatchDiscriminator(config);
}

}  // namespace a2f
