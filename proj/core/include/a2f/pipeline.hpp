#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "a2f/audenet.hpp"
#include "a2f/image.hpp"
#include "a2f/schema.hpp"
#include "a2f/stage1.hpp"
#include "a2f/stage3.hpp"

namespace a2f {

// Inference-time ablations. no_attr_* zero the attribute code at the fusion
// site; skip_stage2 feeds the coarse sketch straight into Stage 3.
struct AblationFlags {
  bool skip_stage2 = false;
  bool no_attr_stage2 = false;
  bool no_attr_stage3 = false;

  [[nodiscard]] std::string to_json() const;
  static AblationFlags from_json(const std::string& json);
  bool operator==(const AblationFlags&) const = default;
};

struct SessionPaths {
  std::filesystem::path stage1;
  std::optional<std::filesystem::path> stage2;
  std::filesystem::path stage3;
};

// Loaded models in eval mode. Immutable once built; synthesize() may be
// called concurrently.
struct PipelineSession {
  Stage1Model stage1{nullptr};
  AUDeNet stage2{nullptr};  // null when Stage 2 is skipped
  Stage3Generator stage3{nullptr};
  AttributeSchema schema;
  AblationFlags flags;
  std::map<std::string, std::string> checkpoint_hashes;

  // Validates widths and schema compatibility and switches models to eval.
  static std::shared_ptr<PipelineSession> from_models(Stage1Model stage1, AUDeNet stage2, Stage3Generator stage3,
                                                      AttributeSchema schema, AblationFlags flags = {});
};

// Throws CheckpointError when a needed checkpoint is missing or corrupt and
// SchemaError when the checkpoints disagree on the schema.
std::shared_ptr<PipelineSession> load_session(const SessionPaths& paths, const AblationFlags& flags);

struct SynthesisResult {
  Image coarse_sketch;
  Image enhanced_sketch;
  Image face;
  AttributeVector attributes;
  std::uint64_t seed = 0;
  AblationFlags flags;
};

// Noise n and the reparameterization draw come from a NoiseStream seeded
// with `seed`; Stage 1 runs through the noise encoder.
SynthesisResult synthesize(const PipelineSession& session, const AttributeVector& attributes, std::uint64_t seed);
SynthesisResult synthesize(const PipelineSession& session, const AttributeVector& attributes, std::uint64_t seed,
                           const AblationFlags& flags);

// One result per weight, same seed (hence the same noise) throughout.
std::vector<SynthesisResult> sweep(const PipelineSession& session, const AttributeVector& base,
                                   std::size_t attribute_index, std::uint64_t seed,
                                   std::span<const double> weights = kSweepWeights);
std::vector<SynthesisResult> sweep(const PipelineSession& session, const AttributeVector& base,
                                   std::size_t attribute_index, std::uint64_t seed,
                                   std::span<const double> weights, const AblationFlags& flags);

// {attributes (by name), seed, noise algorithm, flags, checkpoint hashes}
std::string result_meta_json(const SynthesisResult& result, const PipelineSession& session);

// <run>/<seed>/stage{1,2,3}.png + meta.json; returns the seed directory.
std::filesystem::path write_result(const std::filesystem::path& run_dir, const SynthesisResult& result,
                                   const PipelineSession& session);
// <run>/<seed>/sweep_<attr>/<index>_<weight>.png (Stage-3 faces) + meta.json.
std::filesystem::path write_sweep(const std::filesystem::path& run_dir, const std::vector<SynthesisResult>& results,
                                  const std::string& attribute, std::span<const double> weights,
                                  const PipelineSession& session);

}  // namespace a2f
