#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "a2f/schema.hpp"

namespace a2f {

inline constexpr std::int64_t kCheckpointFormatVersion = 1;

// Versioned container: header (stage, config, schema + fingerprint, epoch)
// plus parameters and optional optimizer state per role ("S1", "G2", "D2",
// "G3", "D3", "AP").
struct CheckpointHeader {
  std::int64_t format_version = kCheckpointFormatVersion;
  std::string stage;
  std::string config_json;
  AttributeSchema schema;
  std::string schema_fingerprint;
  std::int64_t epoch = 0;
};

struct CheckpointPart {
  std::string role;
  const torch::nn::Module* module = nullptr;
  const torch::optim::Optimizer* optimizer = nullptr;
};

// Writes atomically (temporary file + rename).
void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     const std::vector<CheckpointPart>& parts);

class CheckpointReader {
 public:
  // Throws CheckpointError for missing, corrupted or incompatible files.
  explicit CheckpointReader(const std::filesystem::path& path);

  [[nodiscard]] const CheckpointHeader& header() const { return header_; }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] bool has_role(const std::string& role) const;
  void load_module(const std::string& role, torch::nn::Module& module);
  // Returns false if no optimizer state was stored for the role.
  bool load_optimizer(const std::string& role, torch::optim::Optimizer& optimizer);
  // Throws CheckpointError unless the header names `stage`.
  void expect_stage(const std::string& stage) const;

 private:
  std::filesystem::path path_;
  torch::serialize::InputArchive archive_;
  CheckpointHeader header_;
  std::vector<std::string> roles_;
};

}  // namespace a2f
