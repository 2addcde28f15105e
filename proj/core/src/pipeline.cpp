#include "a2f/pipeline.hpp"

#include <cstdio>

#include "a2f/errors.hpp"
#include "a2f/gan_training.hpp"
#include "a2f/noise.hpp"
#include "a2f/util.hpp"
#include "json.hpp"

namespace a2f {

using nlohmann::json;

namespace {

json flags_json(const AblationFlags& f) {
  return {{"skip_stage2", f.skip_stage2}, {"no_attr_stage2", f.no_attr_stage2}, {"no_attr_stage3", f.no_attr_stage3}};
}

torch::Tensor row_tensor(const std::vector<double>& values) {
  std::vector<float> v(values.begin(), values.end());
  return torch::tensor(v).view({1, static_cast<std::int64_t>(v.size())});
}

Image first_image(const torch::Tensor& batch) { return tensor_to_image(to_unit_range(batch[0])); }

std::string weight_label(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f", w);
  return buf;
}

}  // namespace

std::string AblationFlags::to_json() const { return flags_json(*this).dump(); }

AblationFlags AblationFlags::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    AblationFlags f;
    f.skip_stage2 = j.value("skip_stage2", false);
    f.no_attr_stage2 = j.value("no_attr_stage2", false);
    f.no_attr_stage3 = j.value("no_attr_stage3", false);
    return f;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ablation flags: ") + e.what());
  }
}

std::shared_ptr<PipelineSession> PipelineSession::from_models(Stage1Model stage1, AUDeNet stage2,
                                                              Stage3Generator stage3, AttributeSchema schema,
                                                              AblationFlags flags) {
  if (!stage1 || !stage3) throw CheckpointError("session needs Stage 1 and Stage 3 models");
  if (!stage2 && !flags.skip_stage2) throw CheckpointError("session has no Stage 2 model and skip_stage2 is off");
  if (static_cast<std::size_t>(stage1->config().texture_dim) != schema.texture_indices().size()) {
    throw SchemaError("Stage 1 texture width does not match the schema");
  }
  if (static_cast<std::size_t>(stage3->config().attr_dim) != schema.size()) {
    throw SchemaError("Stage 3 attribute width does not match the schema");
  }
  if (stage2 && stage2->config().attr_embed_dim != stage1->config().attr_embed_dim) {
    throw SchemaError("Stage 2 attribute embedding width does not match Stage 1");
  }
  auto s = std::make_shared<PipelineSession>();
  s->stage1 = std::move(stage1);
  s->stage2 = std::move(stage2);
  s->stage3 = std::move(stage3);
  s->schema = std::move(schema);
  s->flags = flags;
  s->stage1->eval();
  if (s->stage2) s->stage2->eval();
  s->stage3->eval();
  return s;
}

std::shared_ptr<PipelineSession> load_session(const SessionPaths& paths, const AblationFlags& flags) {
  auto s1 = load_stage1(paths.stage1);
  auto s3 = load_stage3(paths.stage3);
  if (s1.schema.fingerprint() != s3.schema.fingerprint()) {
    throw SchemaError("Stage 1 and Stage 3 checkpoints were trained with different schemas");
  }
  AUDeNet g2{nullptr};
  std::map<std::string, std::string> hashes{{"stage1", file_fingerprint(paths.stage1)},
                                            {"stage3", file_fingerprint(paths.stage3)}};
  if (paths.stage2) {
    auto s2 = load_stage2(*paths.stage2);
    if (s2.schema.fingerprint() != s1.schema.fingerprint()) {
      throw SchemaError("Stage 2 checkpoint was trained with a different schema");
    }
    g2 = s2.generator;
    hashes["stage2"] = file_fingerprint(*paths.stage2);
  } else if (!flags.skip_stage2) {
    throw CheckpointError("no Stage 2 checkpoint given and skip_stage2 is off");
  }
  auto session = PipelineSession::from_models(s1.model, g2, s3.generator, s1.schema, flags);
  session->checkpoint_hashes = std::move(hashes);
  return session;
}

SynthesisResult synthesize(const PipelineSession& session, const AttributeVector& attributes, std::uint64_t seed) {
  return synthesize(session, attributes, seed, session.flags);
}

SynthesisResult synthesize(const PipelineSession& session, const AttributeVector& attributes, std::uint64_t seed,
                           const AblationFlags& flags) {
  check_matches(attributes, session.schema);
  if (!flags.skip_stage2 && !session.stage2) throw CheckpointError("Stage 2 is not loaded in this session");
  torch::NoGradGuard no_grad;
  // Holder copies share the modules; eval-mode forwards do not mutate them.
  auto s1_holder = session.stage1;
  auto g2 = session.stage2;
  auto g3 = session.stage3;
  auto& s1 = *s1_holder;
  NoiseStream noise(seed);
  const auto n = noise.normal({1, s1.config().noise_dim});
  const auto eps = noise.normal({1, s1.config().z_dim});
  const auto texture = row_tensor(texture_projection(attributes, session.schema).values());
  const auto full = row_tensor(attributes.values());

  const auto enc = s1.encode_noise(n, texture);
  const auto coarse = s1.decode(reparameterize(enc.posterior, eps), enc.attr_embedding);
  const auto enhanced =
      flags.skip_stage2 ? coarse : g2->forward(coarse, enc.attr_embedding, !flags.no_attr_stage2);
  const auto face = g3->forward(enhanced, full, !flags.no_attr_stage3);

  SynthesisResult r;
  r.coarse_sketch = first_image(coarse);
  r.enhanced_sketch = first_image(enhanced);
  r.face = first_image(face);
  r.attributes = attributes;
  r.seed = seed;
  r.flags = flags;
  return r;
}

std::vector<SynthesisResult> sweep(const PipelineSession& session, const AttributeVector& base,
                                   std::size_t attribute_index, std::uint64_t seed, std::span<const double> weights) {
  return sweep(session, base, attribute_index, seed, weights, session.flags);
}

std::vector<SynthesisResult> sweep(const PipelineSession& session, const AttributeVector& base,
                                   std::size_t attribute_index, std::uint64_t seed, std::span<const double> weights,
                                   const AblationFlags& flags) {
  check_matches(base, session.schema);
  std::vector<SynthesisResult> out;
  for (const auto& a : sweep_vectors(base, attribute_index, weights)) {
    out.push_back(synthesize(session, a, seed, flags));
  }
  return out;
}

std::string result_meta_json(const SynthesisResult& result, const PipelineSession& session) {
  json attrs = json::object();
  const auto names = session.schema.names();
  for (std::size_t i = 0; i < names.size(); ++i) attrs[names[i]] = result.attributes[i];
  return json{{"attributes", attrs},
              {"attribute_order", names},
              {"seed", result.seed},
              {"noise", kNoiseAlgorithm},
              {"flags", flags_json(result.flags)},
              {"schema_fingerprint", session.schema.fingerprint()},
              {"checkpoints", session.checkpoint_hashes}}
      .dump(2);
}

std::filesystem::path write_result(const std::filesystem::path& run_dir, const SynthesisResult& result,
                                   const PipelineSession& session) {
  const auto dir = run_dir / std::to_string(result.seed);
  std::filesystem::create_directories(dir);
  write_png(result.coarse_sketch, dir / "stage1.png");
  write_png(result.enhanced_sketch, dir / "stage2.png");
  write_png(result.face, dir / "stage3.png");
  write_text_file(dir / "meta.json", result_meta_json(result, session));
  return dir;
}

std::filesystem::path write_sweep(const std::filesystem::path& run_dir, const std::vector<SynthesisResult>& results,
                                  const std::string& attribute, std::span<const double> weights,
                                  const PipelineSession& session) {
  if (results.size() != weights.size()) throw Error("write_sweep: one result per weight expected");
  if (results.empty()) throw Error("write_sweep: nothing to write");
  const auto dir = run_dir / std::to_string(results.front().seed) / ("sweep_" + attribute);
  std::filesystem::create_directories(dir);
  json frames = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto name = std::to_string(i) + "_" + weight_label(weights[i]) + ".png";
    write_png(results[i].face, dir / name);
    frames.push_back({{"file", name}, {"weight", weights[i]}});
  }
  auto meta = json::parse(result_meta_json(results.front(), session));
  meta["sweep"] = {{"attribute", attribute}, {"frames", frames}};
  write_text_file(dir / "meta.json", meta.dump(2));
  return dir;
}

}  // namespace a2f
