#include "a2f/stage1.hpp"

#include "a2f/checkpoint.hpp"
#include "a2f/errors.hpp"
#include "a2f/log.hpp"
#include "json.hpp"

namespace a2f {

namespace nn = torch::nn;
using nlohmann::json;

void Stage1Config::validate() const {
  if (texture_dim <= 0) throw ConfigError("stage1: texture_dim must be positive");
  for (int c : encoder_channels) {
    if (c <= 0) throw ConfigError("stage1: encoder channels must be positive");
  }
  for (int c : decoder_channels) {
    if (c <= 0) throw ConfigError("stage1: decoder channels must be positive");
  }
  if (encoder_channels.back() != 2 * z_dim) {
    throw ConfigError("stage1: final encoder width must equal 2 * z_dim");
  }
  if (z_dim <= 0 || attr_embed_dim <= 0 || noise_dim <= 0 || decoder_seed_channels <= 0) {
    throw ConfigError("stage1: dimensions must be positive");
  }
}

Stage1Config Stage1Config::scaled(int divisor) const {
  if (divisor < 1) throw ConfigError("width divisor must be >= 1");
  Stage1Config c = *this;
  for (auto& ch : c.encoder_channels) ch = std::max(1, ch / divisor);
  for (auto& ch : c.decoder_channels) ch = std::max(1, ch / divisor);
  c.decoder_seed_channels = std::max(1, decoder_seed_channels / divisor);
  c.z_dim = std::max(1, z_dim / divisor);
  c.encoder_channels.back() = 2 * c.z_dim;
  c.attr_embed_dim = std::max(1, attr_embed_dim / divisor);
  return c;
}

std::string Stage1Config::encoder_plan() const {
  static constexpr int kKernels[] = {5, 5, 3, 3, 4};
  std::string out;
  for (std::size_t i = 0; i < encoder_channels.size(); ++i) {
    if (i) out += '-';
    out += "CONV" + std::to_string(kKernels[i]) + "(" + std::to_string(encoder_channels[i]) + ")";
  }
  return out;
}

std::string Stage1Config::to_json() const {
  return json{{"texture_dim", texture_dim},
              {"encoder_channels", encoder_channels},
              {"z_dim", z_dim},
              {"attr_embed_dim", attr_embed_dim},
              {"noise_dim", noise_dim},
              {"decoder_seed_channels", decoder_seed_channels},
              {"decoder_channels", decoder_channels},
              {"reconstruction", reconstruction == ReconstructionKind::l1 ? "l1" : "mse"}}
      .dump();
}

Stage1Config Stage1Config::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    Stage1Config c;
    c.texture_dim = j.at("texture_dim");
    c.encoder_channels = j.at("encoder_channels").get<std::array<int, 5>>();
    c.z_dim = j.at("z_dim");
    c.attr_embed_dim = j.at("attr_embed_dim");
    c.noise_dim = j.at("noise_dim");
    c.decoder_seed_channels = j.at("decoder_seed_channels");
    c.decoder_channels = j.at("decoder_channels").get<std::array<int, 4>>();
    c.reconstruction = j.value("reconstruction", "l1") == "mse" ? ReconstructionKind::mse
                                                               : ReconstructionKind::l1;
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("stage1 config: ") + e.what());
  }
}

Stage1ModelImpl::Stage1ModelImpl(Stage1Config config) : config_(std::move(config)) {
  config_.validate();
  const auto& ec = config_.encoder_channels;
  sketch_encoder_ = register_module(
      "sketch_encoder",
      nn::Sequential(
          nn::Conv2d(nn::Conv2dOptions(3, ec[0], 5).padding(2)), nn::ReLU(), nn::MaxPool2d(2),
          nn::Conv2d(nn::Conv2dOptions(ec[0], ec[1], 5).padding(2)), nn::ReLU(), nn::MaxPool2d(2),
          nn::Conv2d(nn::Conv2dOptions(ec[1], ec[2], 3).stride(2).padding(1)), nn::BatchNorm2d(ec[2]),
          nn::ReLU(),
          nn::Conv2d(nn::Conv2dOptions(ec[2], ec[3], 3).stride(2).padding(1)), nn::BatchNorm2d(ec[3]),
          nn::ReLU(),
          nn::Conv2d(nn::Conv2dOptions(ec[3], ec[4], 4))));  // 4x4 -> 1x1
  attr_embedder_ = register_module(
      "attr_embedder",
      nn::Sequential(nn::Linear(config_.texture_dim, config_.attr_embed_dim),
                     nn::BatchNorm1d(config_.attr_embed_dim), nn::ReLU()));
  noise_encoder_ = register_module(
      "noise_encoder",
      nn::Sequential(nn::Linear(config_.noise_dim, 2 * config_.z_dim),
                     nn::BatchNorm1d(2 * config_.z_dim), nn::ReLU()));
  const int seed_ch = config_.decoder_seed_channels;
  decoder_fc_ = register_module(
      "decoder_fc", nn::Linear(config_.z_dim + config_.attr_embed_dim, seed_ch * 16));
  nn::Sequential dec;
  dec->push_back(nn::BatchNorm2d(seed_ch));
  dec->push_back(nn::ReLU());
  int in = seed_ch;
  for (int out : config_.decoder_channels) {
    dec->push_back(nn::Upsample(
        nn::UpsampleOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest)));
    dec->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, 3).padding(1)));
    dec->push_back(nn::BatchNorm2d(out));
    dec->push_back(nn::ReLU());
    in = out;
  }
  dec->push_back(nn::Conv2d(nn::Conv2dOptions(in, 3, 3).padding(1)));
  dec->push_back(nn::Tanh());
  decoder_ = register_module("decoder", dec);
}

void Stage1ModelImpl::check_texture(const torch::Tensor& texture, std::int64_t batch) const {
  if (texture.dim() != 2 || texture.size(0) != batch || texture.size(1) != config_.texture_dim) {
    throw ShapeError("stage1: texture attributes must be B x " + std::to_string(config_.texture_dim));
  }
}

GaussianPosterior Stage1ModelImpl::split_posterior(const torch::Tensor& encoding) const {
  auto parts = encoding.split(config_.z_dim, 1);
  return {parts[0], parts[1].clamp(kLogVarianceMin, kLogVarianceMax)};
}

torch::Tensor Stage1ModelImpl::embed_attributes(const torch::Tensor& texture) {
  check_texture(texture, texture.size(0));
  return attr_embedder_->forward(texture);
}

Stage1Encoding Stage1ModelImpl::encode_sketch(const torch::Tensor& sketches, const torch::Tensor& texture) {
  if (sketches.dim() != 4 || sketches.size(1) != 3 || sketches.size(2) != 64 || sketches.size(3) != 64) {
    throw ShapeError("stage1: sketches must be B x 3 x 64 x 64");
  }
  check_texture(texture, sketches.size(0));
  auto encoding = sketch_encoder_->forward(sketches).flatten(1);
  return {split_posterior(encoding), attr_embedder_->forward(texture)};
}

Stage1Encoding Stage1ModelImpl::encode_noise(const torch::Tensor& noise, const torch::Tensor& texture) {
  if (noise.dim() != 2 || noise.size(1) != config_.noise_dim) {
    throw ShapeError("stage1: noise must be B x " + std::to_string(config_.noise_dim));
  }
  check_texture(texture, noise.size(0));
  return {split_posterior(noise_encoder_->forward(noise)), attr_embedder_->forward(texture)};
}

torch::Tensor Stage1ModelImpl::decode(const torch::Tensor& z, const torch::Tensor& attr_embedding) {
  if (z.dim() != 2 || z.size(1) != config_.z_dim) {
    throw ShapeError("stage1: z must be B x " + std::to_string(config_.z_dim));
  }
  if (attr_embedding.dim() != 2 || attr_embedding.size(1) != config_.attr_embed_dim ||
      attr_embedding.size(0) != z.size(0)) {
    throw ShapeError("stage1: attribute embedding must be B x " + std::to_string(config_.attr_embed_dim));
  }
  auto h = decoder_fc_->forward(torch::cat({z, attr_embedding}, 1));
  h = h.view({z.size(0), config_.decoder_seed_channels, 4, 4});
  return decoder_->forward(h);
}

std::vector<torch::Tensor> Stage1ModelImpl::decoder_parameters() {
  auto params = decoder_fc_->parameters();
  for (auto& p : decoder_->parameters()) params.push_back(p);
  return params;
}

Stage1Model make_stage1_model(const Stage1Config& config, std::uint64_t seed) {
  torch::manual_seed(seed);
  return Stage1Model(config);
}

Stage1Draws draw_stage1_inputs(std::int64_t batch, const Stage1Config& config,
                               torch::Generator& generator) {
  return {torch::randn({batch, config.noise_dim}, generator),
          torch::randn({batch, config.z_dim}, generator)};
}

std::map<std::string, double> Stage1Loss::values() const {
  return {{"total", total.item<double>()},
          {"kl_sketch", kl_sketch.item<double>()},
          {"kl_noise", kl_noise.item<double>()},
          {"reconstruction", reconstruction.item<double>()}};
}

Stage1Loss stage1_loss(Stage1ModelImpl& model, const torch::Tensor& sketches,
                       const torch::Tensor& texture, const Stage1Draws& draws,
                       const LossWeights& weights) {
  if (sketches.size(0) == 0) throw DataError("stage1_loss: empty batch");
  const auto sketch_branch = model.encode_sketch(sketches, texture);
  const auto noise_branch = model.encode_noise(draws.noise, texture);
  Stage1Loss loss;
  loss.kl_sketch = kl_standard_normal(sketch_branch.posterior);
  loss.kl_noise = kl_standard_normal(noise_branch.posterior);
  const auto z = reparameterize(sketch_branch.posterior, draws.eps_sketch);
  const auto recon = model.decode(z, sketch_branch.attr_embedding);
  loss.reconstruction = model.config().reconstruction == ReconstructionKind::l1
                            ? a2f::l1_loss(recon, sketches)
                            : (recon - sketches).pow(2).mean();
  loss.total = weights.lambda_kl_sketch * loss.kl_sketch + weights.lambda_kl_noise * loss.kl_noise +
               loss.reconstruction;
  return loss;
}

TrainingLog train_stage1(Stage1Model& model, const torch::Tensor& sketches,
                         const torch::Tensor& texture, const TrainOptions& options,
                         const LossWeights& weights, const AttributeSchema& schema,
                         const StepCallback& on_step) {
  options.validate();
  weights.validate();
  if (sketches.size(0) != texture.size(0)) throw DataError("stage1: sketch/attribute count mismatch");
  if (sketches.size(0) < 2) throw DataError("stage1: need at least two training sketches");
  TrainingLog log;
  if (options.epochs == 0) return log;

  auto gen = make_generator(options.seed);
  auto optimizer = make_adam(model->parameters(), options);
  model->train();
  bool stop = false;
  for (int epoch = 0; epoch < options.epochs && !stop; ++epoch) {
    const double lr = learning_rate_at(options, epoch);
    set_learning_rate(optimizer, lr);
    EpochRecord record{epoch + 1, lr, 0, {}};
    for (const auto& idx : epoch_batches(sketches.size(0), options.batch_size, gen)) {
      if (idx.size(0) < 2) continue;  // batch norm needs two samples
      const auto batch_sketches = sketches.index_select(0, idx);
      const auto batch_texture = texture.index_select(0, idx);
      const auto draws = draw_stage1_inputs(idx.size(0), model->config(), gen);
      optimizer.zero_grad();
      auto loss = stage1_loss(*model, batch_sketches, batch_texture, draws, weights);
      const auto values = loss.values();
      check_finite_losses(values, epoch, log.total_steps + 1);
      loss.total.backward();
      optimizer.step();
      ++log.total_steps;
      ++record.steps;
      for (const auto& [k, v] : values) record.losses[k] += v;
      if (on_step && !on_step(log.total_steps, values)) stop = true;
      if (options.max_steps > 0 && log.total_steps >= options.max_steps) stop = true;
      if (stop) break;
    }
    for (auto& [k, v] : record.losses) v /= std::max<std::int64_t>(1, record.steps);
    log::info("stage1 epoch ", record.epoch, ": total=", record.losses["total"],
              " recon=", record.losses["reconstruction"]);
    log.epochs.push_back(record);
    if (options.checkpoint_path) {
      save_stage1(*options.checkpoint_path, model, schema, record.epoch, &optimizer);
    }
  }
  return log;
}

void save_stage1(const std::filesystem::path& path, Stage1Model& model,
                 const AttributeSchema& schema, std::int64_t epoch,
                 const torch::optim::Optimizer* optimizer) {
  CheckpointHeader header;
  header.stage = "stage1";
  header.config_json = model->config().to_json();
  header.schema = schema;
  header.epoch = epoch;
  save_checkpoint(path, header, {{"S1", model.get(), optimizer}});
}

LoadedStage1 load_stage1(const std::filesystem::path& path) {
  CheckpointReader reader(path);
  reader.expect_stage("stage1");
  LoadedStage1 out;
  out.model = Stage1Model(Stage1Config::from_json(reader.header().config_json));
  reader.load_module("S1", *out.model);
  out.model->eval();
  out.schema = reader.header().schema;
  out.epoch = reader.header().epoch;
  return out;
}

}  // namespace a2f
