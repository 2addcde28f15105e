#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "a2f/attribute_predictor.hpp"
#include "a2f/config.hpp"
#include "a2f/datasets.hpp"
#include "a2f/errors.hpp"
#include "a2f/face_crop.hpp"
#include "a2f/gan_training.hpp"
#include "a2f/image.hpp"
#include "a2f/log.hpp"
#include "a2f/manifest.hpp"
#include "a2f/metrics.hpp"
#include "a2f/pipeline.hpp"
#include "a2f/report.hpp"
#include "a2f/service.hpp"
#include "a2f/stage1.hpp"
#include "a2f/stage3.hpp"
#include "a2f/synthetic.hpp"
#include "a2f/util.hpp"

namespace a2f::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

// Sources of configuration shared by every subcommand. Specific flags land in
// `overrides` keyed by config name and win over --set.
struct ConfigSources {
  std::string file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* app, ConfigSources& src) {
  app->add_option("--config", src.file, "key = value config file")->check(CLI::ExistingFile);
  app->add_option("--set", src.sets, "override a config key (key=value), repeatable");
  app->add_option_function<std::string>(
      "--log-level", [&src](const std::string& v) { src.overrides["log_level"] = v; },
      "debug | info | warn | error | off");
}

CLI::Option* bind(CLI::App* app, ConfigSources& src, const std::string& flag, const std::string& key,
                  const std::string& help) {
  return app->add_option_function<std::string>(
      flag, [&src, key](const std::string& v) { src.overrides[key] = v; }, help);
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

RunConfig effective_config(const ConfigSources& src) {
  RunConfig rc;
  if (!src.file.empty()) rc.load_file(src.file);
  rc.apply_env([](const char* name) { return std::getenv(name); });
  for (const auto& s : src.sets) {
    const auto [k, v] = split_assignment(s);
    rc.set(k, v);
  }
  for (const auto& [k, v] : src.overrides) rc.set(k, v);
  log::set_level(log::parse_level(rc.get("log_level")));
  return rc;
}

json config_json(const RunConfig& rc) {
  json j = json::object();
  for (const auto& key : RunConfig::keys()) j[key.name] = rc.get(key.name);
  return j;
}

// The hash covers the effective config, the command and its inputs; nothing
// time-dependent goes in, so identical invocations agree.
std::string write_provenance(const fs::path& dir, const std::string& command, const RunConfig& rc,
                             const json& inputs) {
  // Where results land and how loudly they are logged do not change them.
  RunConfig located = rc;
  located.set("output_dir", "");
  located.set("log_level", "info");
  const std::string hash =
      to_hex(fnv1a64(located.canonical() + "\n" + command + "\n" + inputs.dump()));
  json j = {{"command", command},
            {"provenance_hash", hash},
            {"config_hash", rc.provenance_hash()},
            {"config", config_json(rc)},
            {"inputs", inputs}};
  fs::create_directories(dir);
  write_text_file(dir / ("provenance_" + command + ".json"), j.dump(2) + "\n");
  return hash;
}

std::string fingerprint_or_empty(const std::optional<fs::path>& p) {
  return p && fs::exists(*p) ? file_fingerprint(*p) : std::string{};
}

AttributeVector parse_attributes(const std::vector<std::string>& assignments, const AttributeSchema& schema) {
  auto a = AttributeVector::filled(schema.size(), -1.0);
  for (const auto& s : assignments) {
    const auto [name, value] = split_assignment(s);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError("attribute '" + name + "' needs a number, got '" + value + "'");
    }
    if (!(v >= -1.0 && v <= 1.0)) throw ConfigError("attribute '" + name + "' must lie in [-1, 1]");
    a = a.with(schema.index_of(name), v);
  }
  return a;
}

Manifest read_manifest(const RunConfig& rc) {
  const auto path = rc.get_path("manifest");
  if (!path) throw ConfigError("no manifest given (--manifest or manifest=)");
  auto m = Manifest::read(*path);
  if (const auto schema_path = rc.get_path("schema")) {
    const auto configured = load_schema(*schema_path);
    if (!(configured == m.schema())) {
      throw SchemaError("manifest schema " + m.schema().fingerprint() + " differs from configured schema " +
                        configured.fingerprint());
    }
  }
  return m;
}

void expect_schema(const AttributeSchema& have, const AttributeSchema& want, const std::string& what) {
  if (!(have == want)) {
    throw SchemaError(what + " was trained on schema " + have.fingerprint() + ", manifest uses " +
                      want.fingerprint());
  }
}

std::shared_ptr<FeatureExtractor> perceptual_extractor(const RunConfig& rc, const LossWeights& w) {
  if (w.lambda_perp <= 0.0) return nullptr;
  return extractor_from(rc);
}

// ---------------------------------------------------------------- prepare-data

struct PrepareArgs {
  ConfigSources src;
  int generate = 0;
};

void setup_prepare(CLI::App& app, PrepareArgs& args) {
  auto* cmd = app.add_subcommand("prepare-data", "crop faces, render pencil sketches, write a manifest");
  add_config_options(cmd, args.src);
  bind(cmd, args.src, "--dataset", "dataset", "celeba | lfwa | cuhk | synthetic");
  bind(cmd, args.src, "--root", "data_root", "dataset root directory");
  bind(cmd, args.src, "--out", "output_dir", "where the manifest and images go");
  bind(cmd, args.src, "--cap", "cap_train", "subsample the train split");
  bind(cmd, args.src, "--cap-test", "cap_test", "subsample the test split");
  bind(cmd, args.src, "--seed", "seed", "subsampling / split seed");
  bind(cmd, args.src, "--sigma", "sketch_sigma", "pencil-sketch blur sigma");
  bind(cmd, args.src, "--schema", "schema", "attribute schema file");
  bind(cmd, args.src, "--boxes", "detector_boxes", "face boxes file");
  bind(cmd, args.src, "--test-fraction", "test_fraction", "test share when there is no partition file");
  cmd->add_option("--generate", args.generate, "first write N synthetic faces under --root (synthetic only)")
      ->check(CLI::NonNegativeNumber);
}

int run_prepare(const PrepareArgs& args) {
  const auto rc = effective_config(args.src);
  const auto schema = schema_from(rc);
  const auto kind = parse_dataset_kind(rc.get("dataset"));
  const auto root = rc.get_path("data_root");
  if (!root) throw ConfigError("no dataset root given (--root or data_root=)");
  const auto seed = static_cast<std::uint64_t>(rc.get_int("seed"));
  if (args.generate > 0) {
    if (kind != DatasetKind::synthetic) throw ConfigError("--generate only applies to --dataset synthetic");
    write_synthetic_dataset(*root, schema, args.generate, seed);
  }

  std::unique_ptr<FaceDetector> detector;
  if (const auto boxes = rc.get_path("detector_boxes")) {
    detector = std::make_unique<BoxFileDetector>(*boxes);
  } else {
    detector = std::make_unique<CenterCropDetector>();
  }
  const fs::path out = rc.get("output_dir");
  SplitSpec split{rc.get_int("cap_train"), rc.get_int("cap_test"), seed, rc.get_double("test_fraction")};
  PrepareOptions options{out, rc.get_double("sketch_sigma"), detector.get()};
  const auto manifest = build_manifest(*root, kind, schema, split, options);
  const auto counts = manifest.counts();
  write_provenance(out, "prepare-data", rc,
                   {{"generated", args.generate}, {"manifest", file_fingerprint(out / "manifest.jsonl")}});
  std::cout << (out / "manifest.jsonl").string() << ": " << counts.train << " train, " << counts.test
            << " test\n";
  return 0;
}

// ----------------------------------------------------------------------- train

struct TrainArgs {
  ConfigSources src;
  std::string stage;
  bool skip_stage2 = false;
};

void setup_train(CLI::App& app, TrainArgs& args) {
  auto* cmd = app.add_subcommand("train", "train one stage (1, 2, 3) or the attribute predictor");
  add_config_options(cmd, args.src);
  cmd->add_option("--stage", args.stage, "1 | 2 | 3 | predictor")
      ->required()
      ->check(CLI::IsMember({"1", "2", "3", "predictor"}));
  bind(cmd, args.src, "--manifest", "manifest", "manifest.jsonl from prepare-data");
  bind(cmd, args.src, "--out", "output_dir", "checkpoint / log directory");
  bind(cmd, args.src, "--epochs", "epochs", "training epochs");
  bind(cmd, args.src, "--batch-size", "batch_size", "mini-batch size");
  bind(cmd, args.src, "--lr", "lr", "Adam learning rate");
  bind(cmd, args.src, "--max-steps", "max_steps", "stop after this many steps");
  bind(cmd, args.src, "--seed", "seed", "initialization and shuffling seed");
  bind(cmd, args.src, "--cap", "cap_train", "use at most this many training samples");
  bind(cmd, args.src, "--width-divisor", "width_divisor", "divide every channel width");
  bind(cmd, args.src, "--stage1-ckpt", "stage1_ckpt", "Stage-1 checkpoint (stages 2 and 3)");
  auto* s2 = bind(cmd, args.src, "--stage2-ckpt", "stage2_ckpt", "Stage-2 checkpoint (stage 3)");
  cmd->add_flag("--skip-stage2", args.skip_stage2, "train Stage 3 on coarse Stage-1 sketches")->excludes(s2);
}

TrainOptions options_with_checkpoint(const RunConfig& rc, const fs::path& ckpt) {
  auto o = train_options_from(rc);
  o.checkpoint_path = ckpt;
  return o;
}

LoadedStage1 require_stage1(const RunConfig& rc, const AttributeSchema& schema) {
  const auto p = rc.get_path("stage1_ckpt");
  if (!p) throw CheckpointError("a Stage-1 checkpoint is required (--stage1-ckpt)");
  auto s1 = load_stage1(*p);
  expect_schema(s1.schema, schema, "Stage-1 checkpoint");
  return s1;
}

int run_train(const TrainArgs& args) {
  const auto rc = effective_config(args.src);
  const auto manifest = read_manifest(rc);
  const auto& schema = manifest.schema();
  const auto data = load_split(manifest, Split::train, rc.get_int("cap_train"));
  if (data.ids.empty()) throw DataError("the manifest has no training samples");
  const auto texture = texture_columns(data.attributes, schema);
  const fs::path out = rc.get("output_dir");
  fs::create_directories(out);
  const auto seed = static_cast<std::uint64_t>(rc.get_int("seed"));
  const auto weights = loss_weights_from(rc);

  json inputs = {{"stage", args.stage},
                 {"manifest", file_fingerprint(*rc.get_path("manifest"))},
                 {"samples", data.ids.size()}};
  const std::string tag = args.stage == "predictor" ? "predictor" : "stage" + args.stage;
  const fs::path ckpt = out / (tag + ".ckpt");
  const auto options = options_with_checkpoint(rc, ckpt);
  auto progress = [](std::int64_t step, const std::map<std::string, double>& losses) {
    if (step % 50 == 0) {
      std::string line = "step " + std::to_string(step);
      for (const auto& [k, v] : losses) line += " " + k + "=" + std::to_string(v);
      log::debug(line);
    }
    return true;
  };

  TrainingLog training;
  if (args.stage == "1") {
    auto model = make_stage1_model(stage1_config_from(rc, schema), seed);
    training = train_stage1(model, data.sketches, texture, options, weights, schema, progress);
    if (!fs::exists(ckpt)) save_stage1(ckpt, model, schema, 0);
  } else if (args.stage == "2") {
    auto s1 = require_stage1(rc, schema);
    inputs["stage1_ckpt"] = fingerprint_or_empty(rc.get_path("stage1_ckpt"));
    const auto pairs = make_stage2_pairs(*s1.model, data.sketches, texture);
    auto g = make_audenet(audenet_config_from(rc), seed);
    auto d = make_patch_discriminator(discriminator_config_from(rc, 2), seed + 1);
    const auto extractor = perceptual_extractor(rc, weights);
    training = train_stage2(g, d, pairs, options, weights, extractor.get(), schema, {}, progress);
    if (!fs::exists(ckpt)) save_stage2(ckpt, g, d, schema, 0);
  } else if (args.stage == "3") {
    // Conditions: enhanced sketches with a Stage-2 checkpoint, coarse ones
    // with --skip-stage2, otherwise the ground-truth pencil sketches.
    torch::Tensor conditions = data.sketches;
    const auto s2_path = rc.get_path("stage2_ckpt");
    if (args.skip_stage2 || s2_path) {
      auto s1 = require_stage1(rc, schema);
      inputs["stage1_ckpt"] = fingerprint_or_empty(rc.get_path("stage1_ckpt"));
      const auto pairs = make_stage2_pairs(*s1.model, data.sketches, texture);
      if (args.skip_stage2) {
        conditions = pairs.coarse;
      } else {
        auto s2 = load_stage2(*s2_path);
        expect_schema(s2.schema, schema, "Stage-2 checkpoint");
        inputs["stage2_ckpt"] = file_fingerprint(*s2_path);
        conditions = enhance_sketches(*s2.generator, pairs);
      }
    }
    inputs["conditions"] = args.skip_stage2 ? "coarse" : s2_path ? "enhanced" : "ground_truth";
    Stage3Pairs pairs{conditions, data.faces, data.attributes};
    auto g = make_stage3_generator(stage3_config_from(rc, schema), seed);
    auto d = make_patch_discriminator(discriminator_config_from(rc, 3), seed + 1);
    const auto extractor = perceptual_extractor(rc, weights);
    training = train_stage3(g, d, pairs, options, weights, extractor.get(), schema, {}, progress);
    if (!fs::exists(ckpt)) save_stage3(ckpt, g, d, schema, 0);
  } else {
    auto model = make_attribute_predictor(predictor_config_from(rc, schema), seed);
    const auto labels = (data.attributes + 1.0) / 2.0;
    training = train_attribute_predictor(model, data.faces, labels, options, schema, progress);
    if (!fs::exists(ckpt)) save_attribute_predictor(ckpt, model, schema);
    const auto test = load_split(manifest, Split::test, rc.get_int("cap_test"));
    if (!test.ids.empty()) {
      const double acc = attribute_accuracy(predict_attributes(model, test.faces), (test.attributes + 1.0) / 2.0);
      log::info("predictor test accuracy ", acc, " on ", test.ids.size(), " samples");
      inputs["test_accuracy"] = acc;
    }
  }

  training.write(out / (tag + "_log.jsonl"));
  write_provenance(out, "train_" + tag, rc, inputs);
  std::cout << ckpt.string() << ": " << training.total_steps << " steps\n";
  return 0;
}

// -------------------------------------------------------- session-based commands

struct SessionArgs {
  ConfigSources src;
  std::string session_dir;
  bool skip_stage2 = false;
  bool no_attr_stage2 = false;
  bool no_attr_stage3 = false;
};

void add_session_options(CLI::App* cmd, SessionArgs& args, bool ablation_flags) {
  add_config_options(cmd, args.src);
  cmd->add_option("--session", args.session_dir, "directory holding stage{1,2,3}.ckpt");
  bind(cmd, args.src, "--stage1-ckpt", "stage1_ckpt", "Stage-1 checkpoint");
  auto* s2 = bind(cmd, args.src, "--stage2-ckpt", "stage2_ckpt", "Stage-2 checkpoint");
  bind(cmd, args.src, "--stage3-ckpt", "stage3_ckpt", "Stage-3 checkpoint");
  bind(cmd, args.src, "--out", "output_dir", "run directory");
  if (ablation_flags) {
    cmd->add_flag("--skip-stage2", args.skip_stage2, "feed the coarse sketch straight to Stage 3")->excludes(s2);
    cmd->add_flag("--no-attr-stage2", args.no_attr_stage2, "zero the Stage-2 attribute code");
    cmd->add_flag("--no-attr-stage3", args.no_attr_stage3, "zero the Stage-3 attribute code");
  }
}

SessionPaths session_paths(const RunConfig& rc, const SessionArgs& args, bool want_stage2) {
  auto pick = [&](const std::string& key, const std::string& file) -> std::optional<fs::path> {
    if (auto p = rc.get_path(key)) return p;
    if (!args.session_dir.empty()) return fs::path(args.session_dir) / file;
    return std::nullopt;
  };
  const auto s1 = pick("stage1_ckpt", "stage1.ckpt");
  const auto s3 = pick("stage3_ckpt", "stage3.ckpt");
  if (!s1 || !s3) throw ConfigError("need --session or both --stage1-ckpt and --stage3-ckpt");
  SessionPaths paths{*s1, std::nullopt, *s3};
  if (want_stage2) {
    paths.stage2 = pick("stage2_ckpt", "stage2.ckpt");
    if (!paths.stage2) throw ConfigError("need --session or --stage2-ckpt (or --skip-stage2)");
  }
  return paths;
}

json session_inputs(const std::shared_ptr<PipelineSession>& session) {
  json j = json::object();
  for (const auto& [k, v] : session->checkpoint_hashes) j[k] = v;
  return j;
}

AblationFlags flags_of(const SessionArgs& args) {
  return {args.skip_stage2, args.no_attr_stage2, args.no_attr_stage3};
}

struct SynthesizeArgs {
  SessionArgs session;
  std::vector<std::string> attributes;
  std::vector<std::uint64_t> seeds;
};

void setup_synthesize(CLI::App& app, SynthesizeArgs& args) {
  auto* cmd = app.add_subcommand("synthesize", "attributes -> coarse sketch -> sketch -> face");
  add_session_options(cmd, args.session, true);
  cmd->add_option("--attr", args.attributes, "NAME=VALUE in [-1,1], repeatable; unset attributes are -1");
  cmd->add_option("--seed", args.seeds, "noise seed, repeatable (default: config seed)");
}

int run_synthesize(const SynthesizeArgs& args) {
  const auto rc = effective_config(args.session.src);
  const auto flags = flags_of(args.session);
  const auto session = load_session(session_paths(rc, args.session, !flags.skip_stage2), flags);
  const auto a = parse_attributes(args.attributes, session->schema);
  auto seeds = args.seeds;
  if (seeds.empty()) seeds.push_back(static_cast<std::uint64_t>(rc.get_int("seed")));
  const fs::path out = rc.get("output_dir");
  for (const auto seed : seeds) {
    const auto dir = write_result(out, synthesize(*session, a, seed), *session);
    std::cout << dir.string() << "\n";
  }
  auto inputs = session_inputs(session);
  write_provenance(out, "synthesize", rc,
                   {{"checkpoints", inputs}, {"attributes", a.values()}, {"seeds", seeds},
                    {"flags", json::parse(flags.to_json())}});
  return 0;
}

struct SweepArgs {
  SessionArgs session;
  std::string attribute;
  std::vector<std::string> base;
  std::optional<std::uint64_t> seed;
  std::vector<double> weights;
};

void setup_sweep(CLI::App& app, SweepArgs& args) {
  auto* cmd = app.add_subcommand("sweep", "vary one attribute with the noise held fixed");
  add_session_options(cmd, args.session, true);
  cmd->add_option("--attr", args.attribute, "attribute to sweep")->required();
  cmd->add_option("--base", args.base, "NAME=VALUE for the other attributes, repeatable");
  cmd->add_option("--seed", args.seed, "noise seed (default: config seed)");
  cmd->add_option("--weights", args.weights, "comma-separated weights")->delimiter(',');
}

int run_sweep(const SweepArgs& args) {
  const auto rc = effective_config(args.session.src);
  const auto flags = flags_of(args.session);
  const auto session = load_session(session_paths(rc, args.session, !flags.skip_stage2), flags);
  const auto base = parse_attributes(args.base, session->schema);
  const auto index = session->schema.index_of(args.attribute);
  std::vector<double> weights(std::begin(kSweepWeights), std::end(kSweepWeights));
  if (!args.weights.empty()) weights = args.weights;
  const auto seed = args.seed.value_or(static_cast<std::uint64_t>(rc.get_int("seed")));
  const fs::path out = rc.get("output_dir");
  const auto results = sweep(*session, base, index, seed, weights);
  const auto dir = write_sweep(out, results, args.attribute, weights, *session);
  write_provenance(out, "sweep", rc,
                   {{"checkpoints", session_inputs(session)}, {"attribute", args.attribute},
                    {"base", base.values()}, {"seed", seed}, {"weights", weights},
                    {"flags", json::parse(flags.to_json())}});
  std::cout << dir.string() << ": " << results.size() << " images\n";
  return 0;
}

struct AblateArgs {
  SessionArgs session;
  std::vector<std::string> attributes;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};
};

void setup_ablate(CLI::App& app, AblateArgs& args) {
  auto* cmd = app.add_subcommand("ablate", "run the inference-time ablations side by side");
  add_session_options(cmd, args.session, false);
  cmd->add_option("--attr", args.attributes, "NAME=VALUE in [-1,1], repeatable");
  cmd->add_option("--seed", args.seeds, "noise seeds, repeatable")->capture_default_str();
}

int run_ablate(const AblateArgs& args) {
  const auto rc = effective_config(args.session.src);
  const auto session = load_session(session_paths(rc, args.session, true), {});
  const auto a = parse_attributes(args.attributes, session->schema);
  const fs::path out = rc.get("output_dir");
  const std::vector<std::pair<std::string, AblationFlags>> configs = {
      {"proposed", {}},
      {"no_attr_stage2", {false, true, false}},
      {"skip_stage2", {true, false, false}},
      {"no_attr_stage3", {false, false, true}},
  };
  std::vector<Image> proposed;
  json summary = json::array();
  for (const auto& [name, flags] : configs) {
    double diff = 0.0;
    for (std::size_t i = 0; i < args.seeds.size(); ++i) {
      const auto r = synthesize(*session, a, args.seeds[i], flags);
      write_result(out / name, r, *session);
      if (name == "proposed") {
        proposed.push_back(r.face);
      } else {
        const auto& ref = proposed[i].pixels;
        double sum = 0.0;
        for (std::size_t k = 0; k < ref.size(); ++k) sum += std::abs(ref[k] - r.face.pixels[k]);
        diff += sum / static_cast<double>(ref.size());
      }
    }
    const double mean_diff = args.seeds.empty() ? 0.0 : diff / static_cast<double>(args.seeds.size());
    summary.push_back({{"config", name}, {"flags", json::parse(flags.to_json())}, {"mean_abs_diff", mean_diff}});
    std::cout << name << ": mean |face - proposed| = " << mean_diff << "\n";
  }
  fs::create_directories(out);
  write_text_file(out / "ablation.json", summary.dump(2) + "\n");
  write_provenance(out, "ablate", rc,
                   {{"checkpoints", session_inputs(session)}, {"attributes", a.values()}, {"seeds", args.seeds}});
  return 0;
}

// -------------------------------------------------------------------- evaluate

struct EvaluateArgs {
  ConfigSources src;
  std::string synth;
  std::string ref;
  std::string dataset = "CelebA";
  std::string method = "Attribute2Sketch2Face";
  std::string report;
};

void setup_evaluate(CLI::App& app, EvaluateArgs& args) {
  auto* cmd = app.add_subcommand("evaluate", "Inception Score and Attribute L2 over two image folders");
  add_config_options(cmd, args.src);
  cmd->add_option("--synth", args.synth, "synthesized images")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--ref", args.ref, "reference images, paired by sorted path")
      ->required()
      ->check(CLI::ExistingDirectory);
  bind(cmd, args.src, "--predictor", "predictor_ckpt", "attribute predictor checkpoint");
  bind(cmd, args.src, "--splits", "splits", "Inception Score splits");
  bind(cmd, args.src, "--out", "output_dir", "report directory");
  cmd->add_option("--dataset-label", args.dataset, "dataset column of the report")->capture_default_str();
  cmd->add_option("--method", args.method, "method column of the report")->capture_default_str();
  cmd->add_option("--report", args.report, "report path stem (default: <output_dir>/evaluation)");
}

// PNGs under `dir` sorted by relative path. When pipeline run folders are
// present only their stage3.png faces are taken.
std::vector<fs::path> collect_images(const fs::path& dir) {
  std::vector<fs::path> all;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") all.push_back(e.path());
  }
  const bool runs = std::any_of(all.begin(), all.end(), [](const fs::path& p) { return p.filename() == "stage3.png"; });
  if (runs) {
    std::erase_if(all, [](const fs::path& p) { return p.filename() != "stage3.png"; });
  }
  std::sort(all.begin(), all.end(), [&](const fs::path& a, const fs::path& b) {
    return a.lexically_relative(dir) < b.lexically_relative(dir);
  });
  return all;
}

torch::Tensor load_images(const std::vector<fs::path>& paths) {
  std::vector<torch::Tensor> tensors;
  tensors.reserve(paths.size());
  for (const auto& p : paths) {
    auto img = read_image(p);
    if (img.width != kImageSize || img.height != kImageSize) img = resize(img, kImageSize, kImageSize);
    tensors.push_back(to_model_range(image_to_tensor(img)));
  }
  return torch::stack(tensors);
}

std::vector<std::size_t> pattern_indices(const RunConfig& rc, const AttributeSchema& schema) {
  std::vector<std::size_t> out;
  std::string list = rc.get("is_attributes");
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    const auto name = list.substr(start, end - start);
    if (!name.empty()) out.push_back(schema.index_of(name));
    start = end + 1;
  }
  if (out.empty()) throw ConfigError("is_attributes lists no attributes");
  return out;
}

int run_evaluate(const EvaluateArgs& args) {
  const auto rc = effective_config(args.src);
  const auto predictor_path = rc.get_path("predictor_ckpt");
  if (!predictor_path) throw ConfigError("an attribute predictor is required (--predictor)");
  const auto synth_paths = collect_images(args.synth);
  const auto ref_paths = collect_images(args.ref);
  if (synth_paths.empty()) throw DataError("no PNG images under " + args.synth);
  if (synth_paths.size() != ref_paths.size()) {
    throw DataError("synth has " + std::to_string(synth_paths.size()) + " images, ref has " +
                    std::to_string(ref_paths.size()));
  }
  auto loaded = load_attribute_predictor(*predictor_path);
  auto scorer = std::make_shared<PredictorScorer>(loaded.model, predictor_path->filename().string());
  PatternClassifier classifier(scorer, pattern_indices(rc, loaded.schema));

  EvaluationInputs inputs;
  inputs.synth = load_images(synth_paths);
  inputs.ref = load_images(ref_paths);
  inputs.dataset = args.dataset;
  inputs.method = args.method;
  inputs.splits = static_cast<int>(rc.get_int("splits"));
  const auto report = evaluate_run(inputs, *scorer, classifier);

  const fs::path stem = args.report.empty() ? fs::path(rc.get("output_dir")) / "evaluation" : fs::path(args.report);
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  write_text_file(stem.string() + ".md", report.to_text());
  write_text_file(stem.string() + ".json", report.to_json() + "\n");
  write_provenance(stem.has_parent_path() ? stem.parent_path() : fs::path("."), "evaluate", rc,
                   {{"predictor", file_fingerprint(*predictor_path)},
                    {"synth", args.synth},
                    {"ref", args.ref},
                    {"images", synth_paths.size()}});
  std::cout << report.to_text();
  return 0;
}

// ----------------------------------------------------------------------- serve

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct ServeArgs {
  SessionArgs session;
};

void setup_serve(CLI::App& app, ServeArgs& args) {
  auto* cmd = app.add_subcommand("serve", "HTTP inference service");
  add_session_options(cmd, args.session, true);
  bind(cmd, args.session.src, "--port", "port", "listen port (0: any free port)");
  bind(cmd, args.session.src, "--host", "host", "bind address");
  bind(cmd, args.session.src, "--cors-origin", "cors_origin", "Access-Control-Allow-Origin");
}

int run_serve(const ServeArgs& args) {
  const auto rc = effective_config(args.session.src);
  const auto flags = flags_of(args.session);
  ServiceOptions options{rc.get("host"), static_cast<int>(rc.get_int("port")), rc.get("cors_origin")};
  InferenceService service(options);
  service.set_session(load_session(session_paths(rc, args.session, !flags.skip_stage2), flags));
  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int port = service.start();
  std::cout << "listening on " << options.host << ":" << port << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  service.stop();
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"attribute -> sketch -> face synthesis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "a2f 0.1.0");

  PrepareArgs prepare;
  TrainArgs train;
  SynthesizeArgs synth;
  SweepArgs sweep_args;
  EvaluateArgs evaluate;
  AblateArgs ablate;
  ServeArgs serve;
  setup_prepare(app, prepare);
  setup_train(app, train);
  setup_synthesize(app, synth);
  setup_sweep(app, sweep_args);
  setup_evaluate(app, evaluate);
  setup_ablate(app, ablate);
  setup_serve(app, serve);

  try {
    // CLI11 wants the arguments in reverse order without the program name.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const auto* cmd = app.get_subcommands().front();
    const auto& name = cmd->get_name();
    if (name == "prepare-data") return run_prepare(prepare);
    if (name == "train") return run_train(train);
    if (name == "synthesize") return run_synthesize(synth);
    if (name == "sweep") return run_sweep(sweep_args);
    if (name == "evaluate") return run_evaluate(evaluate);
    if (name == "ablate") return run_ablate(ablate);
    return run_serve(serve);
  } catch (const ConfigError& e) {
    std::cerr << "a2f: configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingDiverged& e) {
    std::cerr << "a2f: training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const DataError& e) {
    std::cerr << "a2f: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const SchemaError& e) {
    std::cerr << "a2f: schema error: " << e.what() << "\n";
    return kExitData;
  } catch (const CheckpointError& e) {
    std::cerr << "a2f: checkpoint error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "a2f: error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args);
}

}  // namespace a2f::cli
