#include "a2f/audenet.hpp"

#include "a2f/errors.hpp"
#include "json.hpp"

namespace a2f {

namespace nn = torch::nn;
using nlohmann::json;

namespace {

nn::Sequential bn_relu_conv(int in, int out, int kernel) {
  return nn::Sequential(nn::BatchNorm2d(in), nn::ReLU(),
                        nn::Conv2d(nn::Conv2dOptions(in, out, kernel).padding(kernel / 2).bias(false)));
}

int shrink(int channels, int divisor) { return std::max(1, channels / divisor); }

}  // namespace

void AUDeNetConfig::validate() const {
  auto positive = [](int v) { return v > 0; };
  bool ok = positive(in_channels) && positive(out_channels) && positive(stem) &&
            positive(bottleneck) && positive(final_transition) && positive(layers_per_block) &&
            positive(growth_rate) && positive(attr_embed_dim);
  for (int i = 0; i < 3; ++i) {
    ok = ok && positive(down_dense[i]) && positive(down_transition[i]) && positive(up_transition[i]) &&
         !up_dense[i].empty();
    for (int c : up_dense[i]) ok = ok && positive(c);
  }
  if (!ok) throw ConfigError("audenet: all widths must be positive and every decoder level needs a dense block");
}

AUDeNetConfig AUDeNetConfig::scaled(int divisor) const {
  if (divisor < 1) throw ConfigError("width divisor must be >= 1");
  AUDeNetConfig c = *this;
  c.stem = shrink(stem, divisor);
  for (int i = 0; i < 3; ++i) {
    c.down_dense[i] = shrink(down_dense[i], divisor);
    c.down_transition[i] = shrink(down_transition[i], divisor);
    c.up_transition[i] = shrink(up_transition[i], divisor);
    for (auto& w : c.up_dense[i]) w = shrink(w, divisor);
  }
  c.bottleneck = shrink(bottleneck, divisor);
  c.final_transition = shrink(final_transition, divisor);
  c.growth_rate = shrink(growth_rate, divisor);
  return c;
}

std::string AUDeNetConfig::layer_plan() const {
  auto tag = [](const char* kind, int k) { return std::string(kind) + "(" + std::to_string(k) + ")"; };
  std::vector<std::string> parts{tag("C", stem), tag("M", stem)};
  for (int i = 0; i < 3; ++i) {
    parts.push_back(tag("D", down_dense[i]));
    parts.push_back(tag("T", down_transition[i]));
  }
  parts.push_back(tag("D", bottleneck));
  for (int i = 0; i < 3; ++i) {
    parts.push_back(tag("DT", up_transition[i]));
    for (int w : up_dense[i]) parts.push_back(tag("D", w));
  }
  parts.push_back(tag("DT", final_transition));
  parts.push_back(tag("C", out_channels));
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "-") + p;
  return out;
}

std::string AUDeNetConfig::to_json() const {
  return json{{"in_channels", in_channels},
              {"out_channels", out_channels},
              {"stem", stem},
              {"down_dense", down_dense},
              {"down_transition", down_transition},
              {"bottleneck", bottleneck},
              {"up_transition", up_transition},
              {"up_dense", up_dense},
              {"final_transition", final_transition},
              {"layers_per_block", layers_per_block},
              {"growth_rate", growth_rate},
              {"attr_embed_dim", attr_embed_dim},
              {"attribute_conditioning", attribute_conditioning}}
      .dump();
}

AUDeNetConfig AUDeNetConfig::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    AUDeNetConfig c;
    c.in_channels = j.at("in_channels");
    c.out_channels = j.at("out_channels");
    c.stem = j.at("stem");
    c.down_dense = j.at("down_dense").get<std::array<int, 3>>();
    c.down_transition = j.at("down_transition").get<std::array<int, 3>>();
    c.bottleneck = j.at("bottleneck");
    c.up_transition = j.at("up_transition").get<std::array<int, 3>>();
    c.up_dense = j.at("up_dense").get<std::array<std::vector<int>, 3>>();
    c.final_transition = j.at("final_transition");
    c.layers_per_block = j.at("layers_per_block");
    c.growth_rate = j.at("growth_rate");
    c.attr_embed_dim = j.at("attr_embed_dim");
    c.attribute_conditioning = j.at("attribute_conditioning");
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("audenet config: ") + e.what());
  }
}

DenseBlockImpl::DenseBlockImpl(int in_channels, int out_channels, int layers, int growth_rate)
    : in_channels_(in_channels), out_channels_(out_channels) {
  int width = in_channels;
  for (int i = 0; i < layers; ++i) {
    nn::Sequential layer(
        nn::BatchNorm2d(width), nn::ReLU(),
        nn::Conv2d(nn::Conv2dOptions(width, 4 * growth_rate, 1).bias(false)),
        nn::BatchNorm2d(4 * growth_rate), nn::ReLU(),
        nn::Conv2d(nn::Conv2dOptions(4 * growth_rate, growth_rate, 3).padding(1).bias(false)));
    layers_.push_back(register_module("layer" + std::to_string(i + 1), layer));
    width += growth_rate;
  }
  projection_ = register_module("projection", bn_relu_conv(width, out_channels, 1));
}

torch::Tensor DenseBlockImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != in_channels_) {
    throw ShapeError("dense block expects " + std::to_string(in_channels_) + " input channels");
  }
  std::vector<torch::Tensor> features{x};
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    std::vector<torch::Tensor> inputs = features;
    if (severed_ && severed_->first == static_cast<int>(i) + 1 && severed_->second >= 0 &&
        severed_->second < static_cast<int>(inputs.size())) {
      inputs[severed_->second] = torch::zeros_like(inputs[severed_->second]);
    }
    features.push_back(layers_[i]->forward(torch::cat(inputs, 1)));
  }
  return projection_->forward(torch::cat(features, 1));
}

AUDeNetImpl::AUDeNetImpl(AUDeNetConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& c = config_;
  const int L = c.layers_per_block;
  const int g = c.growth_rate;

  stem_ = register_module(
      "stem", nn::Sequential(nn::Conv2d(nn::Conv2dOptions(c.in_channels, c.stem, 3).padding(1).bias(false)),
                             nn::BatchNorm2d(c.stem), nn::ReLU()));
  int width = c.stem;
  for (int i = 0; i < 3; ++i) {
    down_blocks_.push_back(
        register_module("down_dense" + std::to_string(i + 1), DenseBlock(width, c.down_dense[i], L, g)));
    auto t = bn_relu_conv(c.down_dense[i], c.down_transition[i], 1);
    t->push_back(nn::AvgPool2d(2));
    down_transitions_.push_back(register_module("down_transition" + std::to_string(i + 1), t));
    width = c.down_transition[i];
  }
  bottleneck_ = register_module("bottleneck", DenseBlock(width, c.bottleneck, L, g));
  if (c.attribute_conditioning) {
    fusion_ = register_module(
        "fusion", nn::Conv2d(nn::Conv2dOptions(c.bottleneck + c.attr_embed_dim, c.bottleneck, 1)));
  }
  width = c.bottleneck;
  for (int i = 0; i < 3; ++i) {
    up_transitions_.push_back(register_module(
        "up_transition" + std::to_string(i + 1),
        nn::Sequential(nn::BatchNorm2d(width), nn::ReLU(),
                       nn::ConvTranspose2d(nn::ConvTranspose2dOptions(width, c.up_transition[i], 4)
                                               .stride(2)
                                               .padding(1)
                                               .bias(false)))));
    // Skip from the encoder dense block of the same resolution.
    width = c.up_transition[i] + c.down_dense[2 - i];
    std::vector<DenseBlock> level;
    for (std::size_t j = 0; j < c.up_dense[i].size(); ++j) {
      level.push_back(register_module("up_dense" + std::to_string(i + 1) + "_" + std::to_string(j + 1),
                                      DenseBlock(width, c.up_dense[i][j], L, g)));
      width = c.up_dense[i][j];
    }
    up_blocks_.push_back(std::move(level));
  }
  final_transition_ = register_module(
      "final_transition",
      nn::Sequential(nn::BatchNorm2d(width), nn::ReLU(),
                     nn::ConvTranspose2d(
                         nn::ConvTranspose2dOptions(width, c.final_transition, 4).stride(2).padding(1).bias(false))));
  width = c.final_transition + c.stem;
  head_ = register_module("head", bn_relu_conv(width, c.out_channels, 3));
  head_->push_back(nn::Tanh());
}

std::vector<DenseBlock> AUDeNetImpl::dense_blocks() const {
  std::vector<DenseBlock> out(down_blocks_.begin(), down_blocks_.end());
  out.push_back(bottleneck_);
  for (const auto& level : up_blocks_) out.insert(out.end(), level.begin(), level.end());
  return out;
}

torch::Tensor AUDeNetImpl::forward(const torch::Tensor& coarse, const torch::Tensor& attr_embedding,
                                   bool use_attributes, AUDeNetTrace* trace) {
  const auto& c = config_;
  if (coarse.dim() != 4 || coarse.size(1) != c.in_channels || coarse.size(2) != 64 || coarse.size(3) != 64) {
    throw ShapeError("audenet: input must be B x " + std::to_string(c.in_channels) + " x 64 x 64");
  }
  if (attr_embedding.dim() != 2 || attr_embedding.size(0) != coarse.size(0) ||
      attr_embedding.size(1) != c.attr_embed_dim) {
    throw ShapeError("audenet: attribute embedding must be B x " + std::to_string(c.attr_embed_dim));
  }
  auto stem = stem_->forward(coarse);                  // 64x64
  auto x = torch::max_pool2d(stem, 2);                 // 32x32
  std::vector<torch::Tensor> skips;
  for (int i = 0; i < 3; ++i) {
    x = down_blocks_[i]->forward(x);
    skips.push_back(x);                                // 32, 16, 8
    x = down_transitions_[i]->forward(x);
  }
  x = bottleneck_->forward(x);                         // 4x4
  if (fusion_) {
    auto e = use_attributes ? attr_embedding : torch::zeros_like(attr_embedding);
    e = e.view({e.size(0), e.size(1), 1, 1}).expand({-1, -1, x.size(2), x.size(3)});
    x = fusion_->forward(torch::cat({x, e}, 1));
  }
  if (trace) trace->bottleneck_shape = x.sizes().vec();
  for (int i = 0; i < 3; ++i) {
    x = up_transitions_[i]->forward(x);
    const auto& skip = skips[2 - i];
    if (trace) trace->skips.push_back({x.size(2), skip.size(1), x.size(1)});
    x = torch::cat({x, skip}, 1);
    for (auto& block : up_blocks_[i]) x = block->forward(x);
  }
  x = final_transition_->forward(x);
  if (trace) trace->skips.push_back({x.size(2), stem.size(1), x.size(1)});
  return head_->forward(torch::cat({x, stem}, 1));
}

AUDeNet make_audenet(const AUDeNetConfig& config, std::uint64_t seed) {
  torch::manual_seed(seed);
  return AUDeNet(config);
}

}  // namespace a2f
