#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "a2f/audenet.hpp"
#include "a2f/patch_discriminator.hpp"
#include "a2f/pipeline.hpp"
#include "a2f/stage1.hpp"
#include "a2f/stage3.hpp"

namespace a2f::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "a2f");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Width-reduced configurations that keep every layer of the full models.
Stage1Config tiny_stage1_config();
AUDeNetConfig tiny_audenet_config();
Stage3Config tiny_stage3_config();
PatchDiscriminatorConfig tiny_discriminator_config(bool conditional = true);

struct TinyModels {
  Stage1Model stage1{nullptr};
  AUDeNet stage2{nullptr};
  Stage3Generator stage3{nullptr};
};
// Fresh models with BatchNorm running statistics taken from one train-mode
// batch, as training would leave them. Without this, eval-mode forwards of an
// untrained net shrink deep-path signals (such as the Stage 2 attribute code)
// below float resolution.
TinyModels tiny_models(std::uint64_t seed = 1);

void calibrate_batchnorm(Stage1Model& stage1, AUDeNet& stage2, Stage3Generator& stage3, std::uint64_t seed);

std::shared_ptr<PipelineSession> tiny_session(std::uint64_t seed = 1, AblationFlags flags = {});

// stage1.ckpt, stage2.ckpt, stage3.ckpt under `dir`.
SessionPaths write_tiny_checkpoints(const std::filesystem::path& dir, std::uint64_t seed = 1);

}  // namespace a2f::testing
