#include "a2f/stage3.hpp"

#include "a2f/errors.hpp"
#include "json.hpp"

namespace a2f {

namespace nn = torch::nn;
using nlohmann::json;

void Stage3Config::validate() const {
  bool ok = in_channels > 0 && out_channels > 0 && attr_dim > 0 && attr_embed_dim > 0 && leaky_slope >= 0;
  for (int c : encoder_channels) ok = ok && c > 0;
  for (int c : decoder_channels) ok = ok && c > 0;
  if (!ok) throw ConfigError("stage3: dimensions must be positive");
}

Stage3Config Stage3Config::scaled(int divisor) const {
  if (divisor < 1) throw ConfigError("width divisor must be >= 1");
  auto c = *this;
  for (auto& ch : c.encoder_channels) ch = std::max(1, ch / divisor);
  for (auto& ch : c.decoder_channels) ch = std::max(1, ch / divisor);
  c.attr_embed_dim = std::max(1, attr_embed_dim / divisor);
  return c;
}

std::string Stage3Config::layer_plan() const {
  std::string out;
  for (int c : encoder_channels) out += (out.empty() ? "" : "-") + ("C(" + std::to_string(c) + ")");
  out += "-R(" + std::to_string(encoder_channels.back()) + ")";
  for (int c : decoder_channels) out += "-DC(" + std::to_string(c) + ")";
  out += "-DC(" + std::to_string(out_channels) + ")";
  return out;
}

std::string Stage3Config::to_json() const {
  return json{{"in_channels", in_channels},
              {"out_channels", out_channels},
              {"encoder_channels", encoder_channels},
              {"decoder_channels", decoder_channels},
              {"attr_dim", attr_dim},
              {"attr_embed_dim", attr_embed_dim},
              {"attribute_conditioning", attribute_conditioning},
              {"leaky_slope", leaky_slope}}
      .dump();
}

Stage3Config Stage3Config::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    Stage3Config c;
    c.in_channels = j.at("in_channels");
    c.out_channels = j.at("out_channels");
    c.encoder_channels = j.at("encoder_channels").get<std::array<int, 5>>();
    c.decoder_channels = j.at("decoder_channels").get<std::array<int, 4>>();
    c.attr_dim = j.at("attr_dim");
    c.attr_embed_dim = j.at("attr_embed_dim");
    c.attribute_conditioning = j.at("attribute_conditioning");
    c.leaky_slope = j.at("leaky_slope");
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("stage3 config: ") + e.what());
  }
}

ResidualBlockImpl::ResidualBlockImpl(int channels) {
  conv1_ = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1).bias(false)));
  bn1_ = register_module("bn1", nn::BatchNorm2d(channels));
  conv2_ = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1).bias(false)));
  bn2_ = register_module("bn2", nn::BatchNorm2d(channels));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
  return x + bn2_->forward(conv2_->forward(torch::relu(bn1_->forward(conv1_->forward(x)))));
}

Stage3GeneratorImpl::Stage3GeneratorImpl(Stage3Config config) : config_(config) {
  config_.validate();
  const auto& c = config_;
  const auto lrelu = nn::LeakyReLUOptions().negative_slope(c.leaky_slope);
  int in = c.in_channels;
  for (std::size_t i = 0; i < c.encoder_channels.size(); ++i) {
    const int out = c.encoder_channels[i];
    nn::Sequential block(nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(2).padding(1).bias(false)),
                         nn::BatchNorm2d(out), nn::LeakyReLU(lrelu));
    encoder_.push_back(register_module("enc" + std::to_string(i + 1), block));
    in = out;
  }
  const int width = c.encoder_channels.back();
  const int fused_in = width + (c.attribute_conditioning ? c.attr_embed_dim : 0);
  if (c.attribute_conditioning) {
    embed_ = register_module("attr_embed", nn::Linear(c.attr_dim, c.attr_embed_dim));
  }
  projection_ = register_module(
      "projection", nn::Sequential(nn::Conv2d(nn::Conv2dOptions(fused_in, width, 3).padding(1).bias(false)),
                                   nn::BatchNorm2d(width), nn::ReLU()));
  residual_ = register_module("residual", ResidualBlock(width));
  in = width;
  for (std::size_t i = 0; i < c.decoder_channels.size(); ++i) {
    const int out = c.decoder_channels[i];
    nn::Sequential block(
        nn::ConvTranspose2d(nn::ConvTranspose2dOptions(in, out, 4).stride(2).padding(1).bias(false)),
        nn::BatchNorm2d(out), nn::ReLU());
    decoder_.push_back(register_module("dec" + std::to_string(i + 1), block));
    // Skip from the encoder output of the new resolution: 4, 8, 16, 32.
    in = out + c.encoder_channels[c.encoder_channels.size() - 2 - i];
  }
  head_ = register_module(
      "head", nn::Sequential(nn::ConvTranspose2d(nn::ConvTranspose2dOptions(in, c.out_channels, 4).stride(2).padding(1)),
                             nn::Tanh()));
}

torch::Tensor Stage3GeneratorImpl::forward(const torch::Tensor& sketch, const torch::Tensor& attributes,
                                           bool use_attributes, Stage3Trace* trace) {
  const auto& c = config_;
  if (sketch.dim() != 4 || sketch.size(1) != c.in_channels || sketch.size(2) != 64 || sketch.size(3) != 64) {
    throw ShapeError("stage3: sketch must be B x " + std::to_string(c.in_channels) + " x 64 x 64");
  }
  if (attributes.dim() != 2 || attributes.size(0) != sketch.size(0) || attributes.size(1) != c.attr_dim) {
    throw ShapeError("stage3: attributes must be B x " + std::to_string(c.attr_dim));
  }
  std::vector<torch::Tensor> skips;
  auto x = sketch;
  for (auto& block : encoder_) {
    x = block->forward(x);
    skips.push_back(x);  // 32, 16, 8, 4, 2
  }
  if (embed_) {
    auto e = embed_->forward(attributes);
    if (!use_attributes) e = torch::zeros_like(e);
    if (trace) trace->attr_embedding = e;
    e = e.view({e.size(0), e.size(1), 1, 1}).expand({-1, -1, x.size(2), x.size(3)});
    x = torch::cat({x, e}, 1);
  }
  x = projection_->forward(x);
  if (trace) trace->projected = x;
  x = residual_->forward(x);
  if (trace) trace->fused = x;
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    x = decoder_[i]->forward(x);
    const auto& skip = skips[skips.size() - 2 - i];
    if (trace) trace->skips.push_back({x.size(2), skip.size(1), x.size(1)});
    x = torch::cat({x, skip}, 1);
  }
  return head_->forward(x);
}

Stage3Generator make_stage3_generator(const Stage3Config& config, std::uint64_t seed) {
  torch::manual_seed(seed);
  return Stage3Generator(config);
}

}  // namespace a2f
