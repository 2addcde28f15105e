#include "a2f/training.hpp"

#include <cmath>
#include <fstream>

#include <ATen/CPUGeneratorImpl.h>

#include "a2f/errors.hpp"
#include "json.hpp"

namespace a2f {

void TrainOptions::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (warm_epochs < 0) throw ConfigError("warm_epochs must be >= 0");
  if (decay_epochs < 1) throw ConfigError("decay_epochs must be >= 1");
}

TrainOptions TrainOptions::celeba() {
  TrainOptions o;
  o.epochs = 20;
  o.batch_size = 128;
  o.warm_epochs = 10;
  o.decay_epochs = 10;
  return o;
}

TrainOptions TrainOptions::lfwa() {
  TrainOptions o;
  o.epochs = 40;
  o.batch_size = 128;
  o.warm_epochs = 20;
  o.decay_epochs = 20;
  return o;
}

TrainOptions TrainOptions::paired() {
  TrainOptions o = celeba();
  o.batch_size = 8;
  return o;
}

double learning_rate_at(const TrainOptions& options, int epoch) {
  if (epoch < options.warm_epochs) return options.learning_rate;
  const double factor = 1.0 - 1.0 / options.decay_epochs;
  return options.learning_rate * std::pow(factor, epoch - options.warm_epochs + 1);
}

torch::optim::Adam make_adam(std::vector<torch::Tensor> params, const TrainOptions& options) {
  return torch::optim::Adam(std::move(params), torch::optim::AdamOptions(options.learning_rate)
                                                   .betas({options.beta1, options.beta2}));
}

void set_learning_rate(torch::optim::Optimizer& optimizer, double lr) {
  for (auto& group : optimizer.param_groups()) {
    static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  }
}

std::string TrainingLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    nlohmann::json j = {{"epoch", e.epoch}, {"lr", e.learning_rate}, {"steps", e.steps}};
    for (const auto& [k, v] : e.losses) j["losses"][k] = v;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void TrainingLog::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << to_jsonl();
}

std::vector<torch::Tensor> epoch_batches(std::int64_t count, std::int64_t batch_size,
                                         torch::Generator& generator) {
  const auto perm = torch::randperm(count, generator, torch::kLong);
  std::vector<torch::Tensor> out;
  for (std::int64_t start = 0; start < count; start += batch_size) {
    out.push_back(perm.slice(0, start, std::min(count, start + batch_size)));
  }
  return out;
}

void check_finite_losses(const std::map<std::string, double>& losses, int epoch, std::int64_t step) {
  for (const auto& [name, value] : losses) {
    if (!std::isfinite(value)) {
      throw TrainingDiverged("loss component '" + name + "' became non-finite at epoch " +
                             std::to_string(epoch + 1) + ", step " + std::to_string(step));
    }
  }
}

torch::Generator make_generator(std::uint64_t seed) {
  return at::make_generator<at::CPUGeneratorImpl>(seed);
}

}  // namespace a2f
