#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "a2f/attribute_predictor.hpp"
#include "a2f/audenet.hpp"
#include "a2f/objectives.hpp"
#include "a2f/patch_discriminator.hpp"
#include "a2f/perceptual.hpp"
#include "a2f/schema.hpp"
#include "a2f/stage1.hpp"
#include "a2f/stage3.hpp"
#include "a2f/training.hpp"

namespace a2f {

// Flat key=value run configuration. Every key has a typed default;
// precedence is defaults < file < environment (A2F_<KEY>) < explicit set().
class RunConfig {
 public:
  enum class Type { string, integer, real, boolean };
  struct Key {
    std::string name;
    Type type;
    std::string default_value;
    std::string help;
  };

  RunConfig();

  static const std::vector<Key>& keys();

  // Throws ConfigError for unknown keys or values of the wrong type.
  void set(const std::string& key, const std::string& value);
  // "key = value" lines; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  void parse(const std::string& text, const std::string& origin = "<text>");
  // Reads A2F_<KEY upper-cased> for every key through `getenv`.
  void apply_env(const std::function<const char*(const char*)>& getenv);

  [[nodiscard]] std::string get(const std::string& key) const;
  [[nodiscard]] std::int64_t get_int(const std::string& key) const;
  [[nodiscard]] double get_double(const std::string& key) const;
  [[nodiscard]] bool get_bool(const std::string& key) const;
  [[nodiscard]] std::optional<std::filesystem::path> get_path(const std::string& key) const;

  // Sorted "key=value" lines of the effective configuration.
  [[nodiscard]] std::string canonical() const;
  // FNV-1a of canonical(), hex.
  [[nodiscard]] std::string provenance_hash() const;

 private:
  std::map<std::string, std::string> values_;
};

AttributeSchema schema_from(const RunConfig& c);
TrainOptions train_options_from(const RunConfig& c);
LossWeights loss_weights_from(const RunConfig& c);
Stage1Config stage1_config_from(const RunConfig& c, const AttributeSchema& schema);
AUDeNetConfig audenet_config_from(const RunConfig& c);
PatchDiscriminatorConfig discriminator_config_from(const RunConfig& c, int stage);
Stage3Config stage3_config_from(const RunConfig& c, const AttributeSchema& schema);
AttributePredictorConfig predictor_config_from(const RunConfig& c, const AttributeSchema& schema);
// VGG conv1_2 from `vgg_weights`, or seeded random weights when it is empty.
std::shared_ptr<VggConv12Extractor> extractor_from(const RunConfig& c);

}  // namespace a2f
