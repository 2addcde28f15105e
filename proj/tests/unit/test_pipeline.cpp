#include "testing.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "a2f/errors.hpp"
#include "a2f/noise.hpp"
#include "a2f/pipeline.hpp"
#include "a2f/util.hpp"
#include "fixtures.hpp"

using namespace a2f;
using a2f::testing::TempDir;
using nlohmann::json;

namespace {

AttributeVector some_attributes() {
  std::vector<double> v(19);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 3 == 0) ? 1.0 : -0.5;
  return AttributeVector(v);
}

}  // namespace

TEST_CASE("noise stream follows the documented recipe") {
  std::mt19937_64 engine(42);
  auto uniform = [&] { return (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53; };
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  NoiseStream s(42);
  CHECK(s.next_normal() == r * std::cos(2.0 * M_PI * u2));
  CHECK(s.next_normal() == r * std::sin(2.0 * M_PI * u2));
  NoiseStream a(7), b(7);
  CHECK(torch::equal(a.normal({2, 5}), b.normal({2, 5})));
  CHECK(a.normal({3}).dtype() == torch::kFloat32);
}

TEST_CASE("synthesize is bit-identical for a fixed seed") {
  const auto session = testing::tiny_session();
  const auto a = some_attributes();
  const auto r1 = synthesize(*session, a, 17);
  const auto r2 = synthesize(*session, a, 17);
  CHECK(r1.coarse_sketch == r2.coarse_sketch);
  CHECK(r1.enhanced_sketch == r2.enhanced_sketch);
  CHECK(r1.face == r2.face);
  CHECK(r1.face.width == 64);
  CHECK(r1.face.channels == 3);
  const auto r3 = synthesize(*session, a, 18);
  CHECK_FALSE(r3.coarse_sketch == r1.coarse_sketch);
  CHECK_THROWS_AS(synthesize(*session, AttributeVector::filled(5, 0.0), 1), SchemaError);
}

TEST_CASE("sweep holds the noise fixed across the six weights") {
  const auto session = testing::tiny_session();
  const auto base = some_attributes();
  const auto index = session->schema.index_of("Smiling");
  const auto strip = sweep(*session, base, index, 5);
  REQUIRE(strip.size() == 6);
  for (std::size_t i = 0; i < strip.size(); ++i) {
    CHECK(strip[i].attributes[index] == kSweepWeights[i]);
    CHECK(strip[i].face == synthesize(*session, base.with(index, kSweepWeights[i]), 5).face);
  }
  // A color attribute never reaches Stage 1, so the coarse sketch is shared.
  const auto color = sweep(*session, base, session->schema.index_of("Blond_Hair"), 5);
  for (const auto& r : color) CHECK(r.coarse_sketch == color.front().coarse_sketch);
  CHECK_FALSE(color.front().face == color.back().face);
}

TEST_CASE("ablation flags route and zero the right parts") {
  const auto session = testing::tiny_session();
  const auto a = some_attributes();
  const auto full = synthesize(*session, a, 3);

  const auto no3 = synthesize(*session, a, 3, {false, false, true});
  CHECK(no3.coarse_sketch == full.coarse_sketch);
  CHECK(no3.enhanced_sketch == full.enhanced_sketch);
  CHECK_FALSE(no3.face == full.face);

  const auto no2 = synthesize(*session, a, 3, {false, true, false});
  CHECK(no2.coarse_sketch == full.coarse_sketch);
  CHECK_FALSE(no2.enhanced_sketch == full.enhanced_sketch);

  const auto skip = synthesize(*session, a, 3, {true, false, false});
  CHECK(skip.coarse_sketch == full.coarse_sketch);
  CHECK(skip.enhanced_sketch == full.coarse_sketch);
  CHECK_FALSE(skip.face == full.face);
}

TEST_CASE("sessions without Stage 2 need skip_stage2") {
  auto m = testing::tiny_models();
  CHECK_THROWS_AS(PipelineSession::from_models(m.stage1, nullptr, m.stage3, default_schema()), CheckpointError);
  const auto s = PipelineSession::from_models(m.stage1, nullptr, m.stage3, default_schema(), {true, false, false});
  CHECK_NOTHROW(synthesize(*s, some_attributes(), 1));
  CHECK_THROWS_AS(synthesize(*s, some_attributes(), 1, AblationFlags{}), CheckpointError);
}

TEST_CASE("sessions load from checkpoints and record their hashes") {
  TempDir dir("a2f-session");
  const auto paths = testing::write_tiny_checkpoints(dir.path(), 4);
  const auto session = load_session(paths, {});
  CHECK(session->checkpoint_hashes.size() == 3);
  CHECK(session->checkpoint_hashes.at("stage1") == file_fingerprint(paths.stage1));
  const auto in_memory = testing::tiny_session(4);
  CHECK(synthesize(*session, some_attributes(), 9).face == synthesize(*in_memory, some_attributes(), 9).face);

  auto no2 = paths;
  no2.stage2.reset();
  CHECK_THROWS_AS(load_session(no2, {}), CheckpointError);
  CHECK_NOTHROW(load_session(no2, {true, false, false}));
  auto wrong = paths;
  wrong.stage3 = paths.stage1;
  CHECK_THROWS_AS(load_session(wrong, {}), CheckpointError);
}

TEST_CASE("results are written as <run>/<seed>/stage{1,2,3}.png with meta") {
  TempDir dir("a2f-out");
  const auto session = testing::tiny_session();
  const auto r = synthesize(*session, some_attributes(), 23);
  const auto seed_dir = write_result(dir.path(), r, *session);
  CHECK(seed_dir == dir / "23");
  for (const char* f : {"stage1.png", "stage2.png", "stage3.png", "meta.json"}) CHECK(std::filesystem::exists(seed_dir / f));
  const auto meta = json::parse(read_text_file(seed_dir / "meta.json"));
  CHECK(meta["seed"] == 23);
  CHECK(meta["noise"] == kNoiseAlgorithm);
  CHECK(meta["attributes"]["Arched_Eyebrows"] == 1.0);
  CHECK(meta["flags"]["skip_stage2"] == false);

  const auto index = session->schema.index_of("Male");
  const auto strip = sweep(*session, some_attributes(), index, 23);
  const auto sweep_dir = write_sweep(dir.path(), strip, "Male", kSweepWeights, *session);
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(sweep_dir))
    if (e.path().extension() == ".png") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  CHECK(names == (std::vector<std::string>{"0_-1.0.png", "1_-0.1.png", "2_+0.1.png", "3_+0.4.png", "4_+0.7.png",
                                          "5_+1.0.png"}));
}

TEST_CASE("ablation flags serialize") {
  AblationFlags f{true, false, true};
  CHECK(AblationFlags::from_json(f.to_json()) == f);
}
