#include "fixtures.hpp"

#include <atomic>
#include <functional>
#include <optional>
#include <random>

#include "a2f/gan_training.hpp"
#include "a2f/schema.hpp"
#include "a2f/training.hpp"

namespace a2f::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Stage1Config tiny_stage1_config() {
  auto c = Stage1Config{}.scaled(16);
  c.attr_embed_dim = 16;
  c.noise_dim = 8;
  return c;
}

AUDeNetConfig tiny_audenet_config() {
  auto c = AUDeNetConfig{}.scaled(16);
  c.layers_per_block = 2;
  c.attr_embed_dim = tiny_stage1_config().attr_embed_dim;
  return c;
}

Stage3Config tiny_stage3_config() {
  auto c = Stage3Config{}.scaled(16);
  c.attr_dim = static_cast<int>(default_schema().size());
  return c;
}

PatchDiscriminatorConfig tiny_discriminator_config(bool conditional) {
  auto c = PatchDiscriminatorConfig{}.scaled(16);
  c.conditional = conditional;
  return c;
}

namespace {

// Runs `forward` in train mode with momentum 1 so the running statistics equal
// that batch's statistics, then restores momentum and eval mode.
void calibrate(torch::nn::Module& module, const std::function<void()>& forward) {
  std::vector<std::pair<torch::nn::BatchNormOptions*, std::optional<double>>> saved;
  for (const auto& m : module.modules()) {
    torch::nn::BatchNormOptions* o = nullptr;
    if (auto* b = dynamic_cast<torch::nn::BatchNorm1dImpl*>(m.get())) o = &b->options;
    if (auto* b = dynamic_cast<torch::nn::BatchNorm2dImpl*>(m.get())) o = &b->options;
    if (o == nullptr) continue;
    saved.emplace_back(o, o->momentum());
    o->momentum(1.0);
  }
  module.train();
  {
    torch::NoGradGuard no_grad;
    forward();
  }
  module.eval();
  for (auto& [o, momentum] : saved) o->momentum(momentum);
}

}  // namespace

void calibrate_batchnorm(Stage1Model& stage1, AUDeNet& stage2, Stage3Generator& stage3, std::uint64_t seed) {
  auto gen = make_generator(seed);
  const std::int64_t n = 8;
  const auto& c1 = stage1->config();
  const auto sketches = torch::rand({n, 3, 64, 64}, gen) * 2 - 1;
  const auto texture = torch::rand({n, c1.texture_dim}, gen) * 2 - 1;
  const auto draws = draw_stage1_inputs(n, c1, gen);
  calibrate(*stage1, [&] {
    stage1_loss(*stage1, sketches, texture, draws, {});
    stage1->encode_noise(draws.noise, texture);
  });
  torch::Tensor embedding;
  {
    torch::NoGradGuard no_grad;
    embedding = stage1->embed_attributes(texture);
  }
  calibrate(*stage2, [&] { stage2->forward(sketches, embedding); });
  const auto attributes = torch::rand({n, stage3->config().attr_dim}, gen) * 2 - 1;
  calibrate(*stage3, [&] { stage3->forward(sketches, attributes); });
}

TinyModels tiny_models(std::uint64_t seed) {
  TinyModels m{make_stage1_model(tiny_stage1_config(), seed), make_audenet(tiny_audenet_config(), seed + 1),
               make_stage3_generator(tiny_stage3_config(), seed + 2)};
  calibrate_batchnorm(m.stage1, m.stage2, m.stage3, seed);
  return m;
}

std::shared_ptr<PipelineSession> tiny_session(std::uint64_t seed, AblationFlags flags) {
  auto m = tiny_models(seed);
  return PipelineSession::from_models(m.stage1, m.stage2, m.stage3, default_schema(), flags);
}

SessionPaths write_tiny_checkpoints(const fs::path& dir, std::uint64_t seed) {
  fs::create_directories(dir);
  auto m = tiny_models(seed);
  auto d2 = make_patch_discriminator(tiny_discriminator_config(), seed + 3);
  auto d3 = make_patch_discriminator(tiny_discriminator_config(), seed + 4);
  SessionPaths paths{dir / "stage1.ckpt", dir / "stage2.ckpt", dir / "stage3.ckpt"};
  save_stage1(paths.stage1, m.stage1, default_schema(), 0);
  save_stage2(*paths.stage2, m.stage2, d2, default_schema(), 0);
  save_stage3(paths.stage3, m.stage3, d3, default_schema(), 0);
  return paths;
}

}  // namespace a2f::testing
