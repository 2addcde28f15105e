#include "a2f/attribute_predictor.hpp"

#include "a2f/checkpoint.hpp"
#include "a2f/errors.hpp"
#include "a2f/log.hpp"
#include "json.hpp"

namespace a2f {

namespace nn = torch::nn;
using nlohmann::json;

void AttributePredictorConfig::validate() const {
  bool ok = attr_dim > 0;
  for (int c : channels) ok = ok && c > 0;
  if (!ok) throw ConfigError("attribute predictor: dimensions must be positive");
}

std::string AttributePredictorConfig::to_json() const {
  return json{{"attr_dim", attr_dim}, {"channels", channels}}.dump();
}

AttributePredictorConfig AttributePredictorConfig::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    AttributePredictorConfig c;
    c.attr_dim = j.at("attr_dim");
    c.channels = j.at("channels").get<std::array<int, 4>>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("attribute predictor config: ") + e.what());
  }
}

AttributePredictorImpl::AttributePredictorImpl(AttributePredictorConfig config) : config_(config) {
  config_.validate();
  nn::Sequential f;
  int in = 3;
  for (int out : config_.channels) {
    f->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(2).padding(1).bias(false)));
    f->push_back(nn::BatchNorm2d(out));
    f->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
    in = out;
  }
  features_ = register_module("features", f);
  head_ = register_module("head", nn::Linear(in * 16, config_.attr_dim));
}

torch::Tensor AttributePredictorImpl::forward(const torch::Tensor& images) {
  if (images.dim() != 4 || images.size(1) != 3 || images.size(2) != 64 || images.size(3) != 64) {
    throw ShapeError("attribute predictor: images must be N x 3 x 64 x 64");
  }
  return head_->forward(features_->forward(images).flatten(1));
}

AttributePredictor make_attribute_predictor(const AttributePredictorConfig& config, std::uint64_t seed) {
  torch::manual_seed(seed);
  return AttributePredictor(config);
}

torch::Tensor predict_attributes(AttributePredictor& model, const torch::Tensor& images, std::int64_t batch_size) {
  torch::NoGradGuard no_grad;
  const bool was_training = model->is_training();
  model->eval();
  std::vector<torch::Tensor> out;
  for (std::int64_t i = 0; i < images.size(0); i += batch_size) {
    const auto len = std::min(batch_size, images.size(0) - i);
    out.push_back(torch::sigmoid(model->forward(images.narrow(0, i, len))));
  }
  model->train(was_training);
  if (out.empty()) return torch::empty({0, model->config().attr_dim});
  return torch::cat(out, 0);
}

TrainingLog train_attribute_predictor(AttributePredictor& model, const torch::Tensor& images,
                                      const torch::Tensor& labels, const TrainOptions& options,
                                      const AttributeSchema& schema, const StepCallback& on_step) {
  options.validate();
  if (labels.dim() != 2 || labels.size(0) != images.size(0) || labels.size(1) != model->config().attr_dim) {
    throw DataError("attribute predictor: labels must be N x " + std::to_string(model->config().attr_dim));
  }
  if (images.size(0) < 2) throw DataError("attribute predictor: need at least two samples");
  const auto targets = (labels > 0).to(torch::kFloat32);
  const auto positives = targets.sum(0);
  const auto mask = ((positives > 0) & (positives < targets.size(0))).to(torch::kFloat32);
  for (std::int64_t j = 0; j < mask.size(0); ++j) {
    if (mask[j].item<float>() == 0.0f) {
      const auto name = static_cast<std::size_t>(j) < schema.size() ? schema.names()[j] : std::to_string(j);
      log::warn("attribute predictor: skipping single-class column ", name);
    }
  }
  const auto active = mask.sum().item<double>();
  TrainingLog log;
  if (options.epochs == 0 || active == 0) return log;

  auto gen = make_generator(options.seed);
  auto optimizer = make_adam(model->parameters(), options);
  model->train();
  bool stop = false;
  for (int epoch = 0; epoch < options.epochs && !stop; ++epoch) {
    const double lr = learning_rate_at(options, epoch);
    set_learning_rate(optimizer, lr);
    EpochRecord record{epoch + 1, lr, 0, {}};
    for (const auto& idx : epoch_batches(images.size(0), options.batch_size, gen)) {
      if (idx.size(0) < 2) continue;
      optimizer.zero_grad();
      const auto logits = model->forward(images.index_select(0, idx));
      const auto bce = torch::binary_cross_entropy_with_logits(logits, targets.index_select(0, idx),
                                                               {}, {}, at::Reduction::None);
      const auto loss = (bce * mask).sum() / (active * static_cast<double>(idx.size(0)));
      std::map<std::string, double> values{{"bce", loss.item<double>()}};
      check_finite_losses(values, epoch, log.total_steps + 1);
      loss.backward();
      optimizer.step();
      ++log.total_steps;
      ++record.steps;
      record.losses["bce"] += values["bce"];
      if (on_step && !on_step(log.total_steps, values)) stop = true;
      if (options.max_steps > 0 && log.total_steps >= options.max_steps) stop = true;
      if (stop) break;
    }
    for (auto& [k, v] : record.losses) v /= std::max<std::int64_t>(1, record.steps);
    log.epochs.push_back(record);
  }
  if (options.checkpoint_path) save_attribute_predictor(*options.checkpoint_path, model, schema);
  return log;
}

double attribute_accuracy(const torch::Tensor& probabilities, const torch::Tensor& labels) {
  if (!probabilities.sizes().equals(labels.sizes())) throw ShapeError("attribute_accuracy: shape mismatch");
  return ((probabilities > 0.5) == (labels > 0)).to(torch::kFloat64).mean().item<double>();
}

void save_attribute_predictor(const std::filesystem::path& path, AttributePredictor& model,
                              const AttributeSchema& schema) {
  CheckpointHeader header;
  header.stage = "predictor";
  header.config_json = model->config().to_json();
  header.schema = schema;
  save_checkpoint(path, header, {{"AP", model.get(), nullptr}});
}

LoadedPredictor load_attribute_predictor(const std::filesystem::path& path) {
  CheckpointReader reader(path);
  reader.expect_stage("predictor");
  LoadedPredictor out;
  out.model = AttributePredictor(AttributePredictorConfig::from_json(reader.header().config_json));
  reader.load_module("AP", *out.model);
  out.model->eval();
  out.schema = reader.header().schema;
  return out;
}

PredictorScorer::PredictorScorer(AttributePredictor model, std::string label)
    : model_(std::move(model)), label_(std::move(label)) {}

torch::Tensor PredictorScorer::scores(const torch::Tensor& images) const {
  return predict_attributes(model_, images);
}

}  // namespace a2f
