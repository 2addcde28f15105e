#pragma once

#include <filesystem>
#include <functional>

#include <torch/torch.h>

#include "a2f/audenet.hpp"
#include "a2f/objectives.hpp"
#include "a2f/patch_discriminator.hpp"
#include "a2f/perceptual.hpp"
#include "a2f/schema.hpp"
#include "a2f/stage1.hpp"
#include "a2f/stage3.hpp"
#include "a2f/training.hpp"

namespace a2f {

// Conditional pairs: the generator maps (condition, attributes) to target;
// the discriminator judges (condition, candidate).
struct GanData {
  torch::Tensor conditions;  // N x 3 x 64 x 64, [-1,1]
  torch::Tensor targets;     // N x 3 x 64 x 64, [-1,1]
  torch::Tensor attributes;  // N x E
};

struct GanSwitches {
  bool update_generator = true;
  bool update_discriminator = true;
};

using ConditionalGenerator =
    std::function<torch::Tensor(const torch::Tensor& condition, const torch::Tensor& attributes)>;
using EpochHook = std::function<void(int epoch, const torch::optim::Optimizer& g_opt,
                                     const torch::optim::Optimizer& d_opt)>;

// Alternating updates per mini-batch: D minimises the conditional
// adversarial loss on (real, detached fake); G minimises
// adv + lambda_l1 * L1 + lambda_perp * perceptual. Logged components:
// d_loss, d_accuracy, g_adv, l1, perceptual, g_total.
TrainingLog train_conditional_gan(torch::nn::Module& generator, const ConditionalGenerator& generate,
                                  PatchDiscriminatorImpl& discriminator, const GanData& data,
                                  const TrainOptions& options, const LossWeights& weights,
                                  const FeatureExtractor* extractor, const GanSwitches& switches = {},
                                  const StepCallback& on_step = {}, const EpochHook& on_epoch = {});

// Fraction of correctly classified patches over a real and a fake batch
// (real > 0.5, fake < 0.5).
double patch_accuracy(const torch::Tensor& real_scores, const torch::Tensor& fake_scores);

// Stage 2 training data: coarse sketches are the Stage-1 reconstructions at
// the posterior mean, the attribute codes come from the Stage-1 embedder.
struct Stage2Pairs {
  torch::Tensor coarse;
  torch::Tensor targets;
  torch::Tensor attr_embedding;
};
Stage2Pairs make_stage2_pairs(Stage1ModelImpl& stage1, const torch::Tensor& sketches,
                              const torch::Tensor& texture);

TrainingLog train_stage2(AUDeNet& generator, PatchDiscriminator& discriminator, const Stage2Pairs& pairs,
                         const TrainOptions& options, const LossWeights& weights,
                         const FeatureExtractor* extractor, const AttributeSchema& schema,
                         const GanSwitches& switches = {}, const StepCallback& on_step = {});

// Stage 3 training data: enhanced sketches, target faces, full attributes.
struct Stage3Pairs {
  torch::Tensor sketches;
  torch::Tensor faces;
  torch::Tensor attributes;
};
// Runs the Stage-2 generator over the coarse sketches.
torch::Tensor enhance_sketches(AUDeNetImpl& generator, const Stage2Pairs& pairs,
                               std::int64_t batch_size = 64);

TrainingLog train_stage3(Stage3Generator& generator, PatchDiscriminator& discriminator,
                         const Stage3Pairs& pairs, const TrainOptions& options, const LossWeights& weights,
                         const FeatureExtractor* extractor, const AttributeSchema& schema,
                         const GanSwitches& switches = {}, const StepCallback& on_step = {});

void save_stage2(const std::filesystem::path& path, AUDeNet& generator, PatchDiscriminator& discriminator,
                 const AttributeSchema& schema, std::int64_t epoch,
                 const torch::optim::Optimizer* g_opt = nullptr, const torch::optim::Optimizer* d_opt = nullptr);
void save_stage3(const std::filesystem::path& path, Stage3Generator& generator,
                 PatchDiscriminator& discriminator, const AttributeSchema& schema, std::int64_t epoch,
                 const torch::optim::Optimizer* g_opt = nullptr, const torch::optim::Optimizer* d_opt = nullptr);

struct LoadedStage2 {
  AUDeNet generator{nullptr};
  PatchDiscriminator discriminator{nullptr};
  AttributeSchema schema;
  std::int64_t epoch = 0;
};
struct LoadedStage3 {
  Stage3Generator generator{nullptr};
  PatchDiscriminator discriminator{nullptr};
  AttributeSchema schema;
  std::int64_t epoch = 0;
};
LoadedStage2 load_stage2(const std::filesystem::path& path);
LoadedStage3 load_stage3(const std::filesystem::path& path);

}  // namespace a2f
