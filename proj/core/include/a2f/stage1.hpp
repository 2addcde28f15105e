#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>

#include <torch/torch.h>

#include "a2f/objectives.hpp"
#include "a2f/schema.hpp"
#include "a2f/training.hpp"

namespace a2f {

enum class ReconstructionKind { l1, mse };

// Attribute-to-sketch CVAE. The sketch encoder ends in 2*z_dim channels
// that split into mean / log-variance; the noise encoder does the same from
// a fully connected layer; the texture attributes get a separate
// deterministic embedding that is concatenated with z before decoding.
struct Stage1Config {
  int texture_dim = 13;
  std::array<int, 5> encoder_channels{64, 128, 256, 512, 1024};
  int z_dim = 512;
  int attr_embed_dim = 256;
  int noise_dim = 100;
  int decoder_seed_channels = 512;
  std::array<int, 4> decoder_channels{256, 128, 64, 64};
  ReconstructionKind reconstruction = ReconstructionKind::l1;

  void validate() const;
  [[nodiscard]] Stage1Config scaled(int divisor) const;
  // "CONV5(64)-CONV5(128)-CONV3(256)-CONV3(512)-CONV4(1024)"
  [[nodiscard]] std::string encoder_plan() const;

  [[nodiscard]] std::string to_json() const;
  static Stage1Config from_json(const std::string& json);
};

struct Stage1Encoding {
  GaussianPosterior posterior;
  torch::Tensor attr_embedding;
};

class Stage1ModelImpl : public torch::nn::Module {
 public:
  explicit Stage1ModelImpl(Stage1Config config);

  // q_phi: sketches B x 3 x 64 x 64 in [-1,1], texture attributes B x T.
  Stage1Encoding encode_sketch(const torch::Tensor& sketches, const torch::Tensor& texture);
  // q_beta: noise B x noise_dim.
  Stage1Encoding encode_noise(const torch::Tensor& noise, const torch::Tensor& texture);
  torch::Tensor embed_attributes(const torch::Tensor& texture);
  // z B x z_dim, embedding B x attr_embed_dim -> B x 3 x 64 x 64 in [-1,1].
  torch::Tensor decode(const torch::Tensor& z, const torch::Tensor& attr_embedding);

  [[nodiscard]] const Stage1Config& config() const { return config_; }
  torch::nn::Sequential& sketch_encoder() { return sketch_encoder_; }
  torch::nn::Sequential& noise_encoder() { return noise_encoder_; }
  torch::nn::Sequential& attribute_embedder() { return attr_embedder_; }
  std::vector<torch::Tensor> decoder_parameters();

 private:
  GaussianPosterior split_posterior(const torch::Tensor& encoding) const;
  void check_texture(const torch::Tensor& texture, std::int64_t batch) const;

  Stage1Config config_;
  torch::nn::Sequential sketch_encoder_{nullptr};
  torch::nn::Sequential attr_embedder_{nullptr};
  torch::nn::Sequential noise_encoder_{nullptr};
  torch::nn::Linear decoder_fc_{nullptr};
  torch::nn::Sequential decoder_{nullptr};
};
TORCH_MODULE(Stage1Model);

Stage1Model make_stage1_model(const Stage1Config& config, std::uint64_t seed);

// Random inputs of one training step.
struct Stage1Draws {
  torch::Tensor noise;       // B x noise_dim, N(0,1)
  torch::Tensor eps_sketch;  // B x z_dim, N(0,1)
};

Stage1Draws draw_stage1_inputs(std::int64_t batch, const Stage1Config& config,
                               torch::Generator& generator);

struct Stage1Loss {
  torch::Tensor total;
  torch::Tensor kl_sketch;
  torch::Tensor kl_noise;
  torch::Tensor reconstruction;
  [[nodiscard]] std::map<std::string, double> values() const;
};

// total = lambda_kl_sketch * KL(q_phi) + lambda_kl_noise * KL(q_beta) + reconstruction,
// reconstruction = mean L1 (or MSE) between decode(reparameterize(q_phi), e) and the sketch.
Stage1Loss stage1_loss(Stage1ModelImpl& model, const torch::Tensor& sketches,
                       const torch::Tensor& texture, const Stage1Draws& draws,
                       const LossWeights& weights);

// Trains in place. Sketches N x 3 x 64 x 64 in [-1,1], texture N x T.
TrainingLog train_stage1(Stage1Model& model, const torch::Tensor& sketches,
                         const torch::Tensor& texture, const TrainOptions& options,
                         const LossWeights& weights, const AttributeSchema& schema,
                         const StepCallback& on_step = {});

void save_stage1(const std::filesystem::path& path, Stage1Model& model,
                 const AttributeSchema& schema, std::int64_t epoch,
                 const torch::optim::Optimizer* optimizer = nullptr);

struct LoadedStage1 {
  Stage1Model model{nullptr};
  AttributeSchema schema;
  std::int64_t epoch = 0;
};
LoadedStage1 load_stage1(const std::filesystem::path& path);

}  // namespace a2f
