#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>

#include <torch/torch.h>

#include "a2f/metrics.hpp"
#include "a2f/schema.hpp"
#include "a2f/training.hpp"

namespace a2f {

// Small multi-label CNN: four stride-2 4x4 convs (64 -> 4) and a linear
// head with one logit per attribute.
struct AttributePredictorConfig {
  int attr_dim = 19;
  std::array<int, 4> channels{32, 64, 128, 256};

  void validate() const;
  [[nodiscard]] std::string to_json() const;
  static AttributePredictorConfig from_json(const std::string& json);
};

class AttributePredictorImpl : public torch::nn::Module {
 public:
  explicit AttributePredictorImpl(AttributePredictorConfig config);
  // Logits N x attr_dim for images N x 3 x 64 x 64 in [-1,1].
  torch::Tensor forward(const torch::Tensor& images);
  [[nodiscard]] const AttributePredictorConfig& config() const { return config_; }

 private:
  AttributePredictorConfig config_;
  torch::nn::Sequential features_{nullptr};
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(AttributePredictor);

AttributePredictor make_attribute_predictor(const AttributePredictorConfig& config, std::uint64_t seed);

// Probabilities in [0,1] (eval mode, no gradient).
torch::Tensor predict_attributes(AttributePredictor& model, const torch::Tensor& images,
                                 std::int64_t batch_size = 128);

// Labels in [-1,1] (positive = present). Columns with a single class in the
// training labels are masked out of the loss with a warning. Mean binary
// cross-entropy over the remaining columns.
TrainingLog train_attribute_predictor(AttributePredictor& model, const torch::Tensor& images,
                                      const torch::Tensor& labels, const TrainOptions& options,
                                      const AttributeSchema& schema, const StepCallback& on_step = {});

// Per-attribute mean accuracy of (prob > 0.5) against (label > 0).
double attribute_accuracy(const torch::Tensor& probabilities, const torch::Tensor& labels);

void save_attribute_predictor(const std::filesystem::path& path, AttributePredictor& model,
                              const AttributeSchema& schema);
struct LoadedPredictor {
  AttributePredictor model{nullptr};
  AttributeSchema schema;
};
LoadedPredictor load_attribute_predictor(const std::filesystem::path& path);

class PredictorScorer final : public AttributeScorer {
 public:
  PredictorScorer(AttributePredictor model, std::string label);
  [[nodiscard]] torch::Tensor scores(const torch::Tensor& images) const override;
  [[nodiscard]] std::string describe() const override { return label_; }

 private:
  mutable AttributePredictor model_;
  std::string label_;
};

}  // namespace a2f
