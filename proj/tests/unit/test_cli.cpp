#include "testing.hpp"

#include <algorithm>

#include <json.hpp>

#include "a2f/attribute_predictor.hpp"
#include "a2f/report.hpp"
#include "a2f/schema.hpp"
#include "a2f/util.hpp"
#include "cli.hpp"
#include "fixtures.hpp"

using namespace a2f;
using a2f::cli::run_command;
using a2f::testing::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> pngs(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".png") out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("--help exits 0 for every subcommand") {
  CHECK(run_command({"--help"}) == 0);
  for (const char* cmd : {"prepare-data", "train", "synthesize", "sweep", "evaluate", "ablate", "serve"}) {
    CAPTURE(cmd);
    CHECK(run_command({cmd, "--help"}) == 0);
  }
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_command({}) == 2);
  CHECK(run_command({"frobnicate"}) == 2);
  CHECK(run_command({"synthesize", "--no-such-flag"}) == 2);
  CHECK(run_command({"train"}) == 2);
  CHECK(run_command({"train", "--stage", "4"}) == 2);
  CHECK(run_command({"synthesize", "--skip-stage2", "--stage2-ckpt", "x.ckpt"}) == 2);
  CHECK(run_command({"train", "--stage", "3", "--skip-stage2", "--stage2-ckpt", "x.ckpt"}) == 2);
  CHECK(run_command({"train", "--stage", "1", "--set", "epochs"}) == 2);
  CHECK(run_command({"train", "--stage", "1", "--set", "no_such_key=1"}) == 2);
  CHECK(run_command({"train", "--stage", "1"}) == 2);  // no manifest
}

TEST_CASE("prepare-data and train write checkpoints, logs and provenance") {
  TempDir dir("a2f-cli-train");
  const auto raw = (dir / "raw").string();
  const auto data = (dir / "data").string();
  REQUIRE(run_command({"prepare-data", "--dataset", "synthetic", "--root", raw, "--generate", "24", "--out", data,
                       "--cap", "16", "--seed", "3"}) == 0);
  REQUIRE(fs::exists(dir / "data" / "manifest.jsonl"));
  CHECK(fs::exists(dir / "data" / "provenance_prepare-data.json"));

  const auto manifest = (dir / "data" / "manifest.jsonl").string();
  const auto run = (dir / "run").string();
  const std::vector<std::string> train1{"train",   "--stage",  "1",   "--manifest", manifest, "--out", run,
                                        "--epochs", "1",       "--batch-size", "8", "--set", "width_divisor=16"};
  REQUIRE(run_command(train1) == 0);
  CHECK(fs::exists(dir / "run" / "stage1.ckpt"));
  CHECK(fs::exists(dir / "run" / "stage1_log.jsonl"));
  const auto prov = json::parse(read_text_file(dir / "run" / "provenance_train_stage1.json"));
  CHECK(prov["config"]["width_divisor"] == "16");
  CHECK(prov["config"]["epochs"] == "1");

  // Stage 2 without a Stage-1 checkpoint is a checkpoint error.
  CHECK(run_command({"train", "--stage", "2", "--manifest", manifest, "--out", run}) == 3);
  // A missing manifest is a data error.
  CHECK(run_command({"train", "--stage", "1", "--manifest", (dir / "none.jsonl").string()}) == 3);
}

TEST_CASE("sweep writes six PNGs in weight order") {
  TempDir dir("a2f-cli-sweep");
  testing::write_tiny_checkpoints(dir / "session");
  const auto out = (dir / "out").string();
  REQUIRE(run_command({"sweep", "--session", (dir / "session").string(), "--attr", "Male", "--seed", "7", "--out",
                       out}) == 0);
  CHECK(pngs(dir / "out" / "7" / "sweep_Male") ==
        (std::vector<std::string>{"0_-1.0.png", "1_-0.1.png", "2_+0.1.png", "3_+0.4.png", "4_+0.7.png",
                                  "5_+1.0.png"}));
  CHECK(run_command({"sweep", "--session", (dir / "session").string(), "--attr", "Male", "--weights", "0.5",
                     "--out", out}) == 0);
  CHECK(pngs(dir / "out" / "0" / "sweep_Male").size() == 1);
  CHECK(run_command({"sweep", "--session", (dir / "session").string(), "--out", out}) == 2);
}

TEST_CASE("synthesize, ablate and evaluate over a session") {
  TempDir dir("a2f-cli-synth");
  const auto session = (dir / "session").string();
  testing::write_tiny_checkpoints(dir / "session");
  auto synth = [&](const std::string& out) {
    return run_command({"synthesize", "--session", session, "--attr", "Male=1", "--attr", "Smiling=0.4", "--seed",
                        "1", "--seed", "2", "--out", out});
  };
  REQUIRE(synth((dir / "a").string()) == 0);
  REQUIRE(synth((dir / "b").string()) == 0);
  for (const char* f : {"1/stage1.png", "1/stage2.png", "1/stage3.png", "2/meta.json"}) CHECK(fs::exists(dir / "a" / f));
  CHECK(read_binary_file(dir / "a" / "1" / "stage3.png") == read_binary_file(dir / "b" / "1" / "stage3.png"));
  const auto pa = json::parse(read_text_file(dir / "a" / "provenance_synthesize.json"));
  const auto pb = json::parse(read_text_file(dir / "b" / "provenance_synthesize.json"));
  CHECK(pa["provenance_hash"] == pb["provenance_hash"]);
  CHECK(run_command({"synthesize", "--session", session, "--attr", "Male=1.5", "--out", (dir / "c").string()}) == 2);
  CHECK(run_command({"synthesize", "--session", session, "--attr", "Hat=1", "--out", (dir / "c").string()}) == 3);
  CHECK(run_command({"synthesize", "--session", session, "--skip-stage2", "--out", (dir / "s").string()}) == 0);

  REQUIRE(run_command({"ablate", "--session", session, "--seed", "1", "--out", (dir / "abl").string()}) == 0);
  for (const char* c : {"proposed", "no_attr_stage2", "skip_stage2", "no_attr_stage3"})
    CHECK(fs::exists(dir / "abl" / c / "1" / "stage3.png"));
  CHECK(json::parse(read_text_file(dir / "abl" / "ablation.json")).size() == 4);

  auto predictor = make_attribute_predictor(AttributePredictorConfig{}, 1);
  save_attribute_predictor(dir / "predictor.ckpt", predictor, default_schema());
  const auto stem = (dir / "eval" / "report").string();
  REQUIRE(run_command({"evaluate", "--synth", (dir / "a").string(), "--ref", (dir / "a").string(), "--predictor",
                       (dir / "predictor.ckpt").string(), "--splits", "1", "--report", stem}) == 0);
  const auto report = EvaluationReport::from_json(read_text_file(stem + ".json"));
  const auto l2 = report.get(kAttributeL2Metric, "CelebA", "Attribute2Sketch2Face");
  REQUIRE(l2);
  CHECK(l2->mean == 0.0);
  CHECK(fs::exists(stem + ".md"));
  CHECK(run_command({"evaluate", "--synth", (dir / "a").string(), "--ref", (dir / "abl").string(), "--predictor",
                     (dir / "predictor.ckpt").string(), "--splits", "1", "--report", stem}) == 3);
}
