#include "testing.hpp"

#include <set>

#include "a2f/augment.hpp"
#include "a2f/datasets.hpp"
#include "a2f/errors.hpp"
#include "a2f/face_crop.hpp"
#include "a2f/manifest.hpp"
#include "a2f/synthetic.hpp"
#include "a2f/util.hpp"
#include "fixtures.hpp"

using namespace a2f;

TEST_CASE("attribute tables parse and re-format") {
  const std::string text = "2\nMale Smiling\na.jpg  1 -1\nb.jpg -1  1\n";
  const auto t = parse_attribute_table(text);
  CHECK(t.columns == (std::vector<std::string>{"Male", "Smiling"}));
  CHECK(t.rows.at("a.jpg") == (std::vector<int>{1, -1}));
  CHECK(parse_attribute_table(format_attribute_table(t)).rows == t.rows);
  CHECK_THROWS_AS(parse_attribute_table(""), DataError);
  CHECK_THROWS_AS(parse_attribute_table("1\nMale\na.jpg 1 1\n"), DataError);
}

TEST_CASE("partition files map to splits") {
  const auto p = parse_partition("a.jpg 0\nb.jpg 1\nc.jpg 2\n");
  CHECK(partition_to_split(p.at("a.jpg")) == Split::train);
  CHECK(partition_to_split(p.at("c.jpg")) == Split::test);
  CHECK_THROWS_AS(parse_partition("a.jpg 3\n"), DataError);
}

TEST_CASE("subsampling is deterministic, capped and seed dependent") {
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("img" + std::to_string(i));
  const auto a = deterministic_subsample(ids, 10, 7);
  CHECK(a.size() == 10);
  std::vector<std::string> shuffled(ids.rbegin(), ids.rend());
  CHECK(deterministic_subsample(shuffled, 10, 7) == a);
  CHECK(deterministic_subsample(ids, 10, 8) != a);
  CHECK(deterministic_subsample(ids, -1, 7).size() == 100);
}

TEST_CASE("hash split is stable and near the requested fraction") {
  int test = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto id = "f" + std::to_string(i);
    const auto s = hash_split(id, 3, 0.1);
    CHECK(s == hash_split(id, 3, 0.1));
    test += s == Split::test;
  }
  CHECK(test > 140);
  CHECK(test < 260);
}

TEST_CASE("augmentation recipe triples the paired set") {
  SampleRecord r;
  r.id = "p1";
  r.face = render_synthetic_face(default_schema(), AttributeVector::filled(19, -1.0), 1, 64, 64);
  r.sketch = r.face;
  r.attributes = AttributeVector::filled(19, 1.0);
  const auto out = augment(r, paired_dataset_recipe());
  REQUIRE(out.size() == 3);
  CHECK(out[0].face == r.face);
  CHECK(out[1].face == hflip(r.face));
  std::set<std::string> ids;
  for (const auto& o : out) {
    ids.insert(o.id);
    CHECK(o.attributes == r.attributes);
    CHECK(o.face == o.sketch);
  }
  CHECK(ids.size() == 3);
  CHECK_THROWS_AS(augment(r, {AugmentOp::rotation(12.0)}), ConfigError);
}

TEST_CASE("centre crop finds a face, a box file can reject one") {
  testing::TempDir dir("a2f-crop");
  const auto photo = render_synthetic_face(default_schema(), AttributeVector::filled(19, 1.0), 2);
  const auto face = crop_face(photo, CenterCropDetector());
  CHECK(face.width == kImageSize);
  CHECK(face.height == kImageSize);
  CHECK_THROWS_AS(crop_face(Image(20, 20, 3, 0.5f), CenterCropDetector()), NoFaceDetected);
  write_text_file(dir / "boxes.txt", "known.png 4 4 40 40\n");
  BoxFileDetector boxes(dir / "boxes.txt");
  CHECK(crop_face(photo, boxes, "known.png").width == kImageSize);
  CHECK_THROWS_AS(crop_face(photo, boxes, "other.png"), NoFaceDetected);
}

TEST_CASE("synthetic dataset builds a manifest that round-trips") {
  testing::TempDir dir("a2f-data");
  write_synthetic_dataset(dir / "raw", default_schema(), 30, 5);
  SplitSpec split{12, 4, 5, 0.2};
  PrepareOptions options{dir / "prepared", 3.0, nullptr};
  const auto m = build_manifest(dir / "raw", DatasetKind::synthetic, default_schema(), split, options);
  const auto counts = m.counts();
  CHECK(counts.train <= 12);
  CHECK(counts.test <= 4);
  CHECK(counts.train > 0);
  CHECK(m.schema() == default_schema());
  CHECK(m.provenance().dataset == "synthetic");
  CHECK_NOTHROW(m.validate());

  const auto again = Manifest::read(dir / "prepared" / "manifest.jsonl");
  CHECK(again.records().size() == m.records().size());
  CHECK(again.records().front().id == m.records().front().id);

  const auto t = load_split(m, Split::train);
  const auto n = static_cast<std::int64_t>(counts.train);
  CHECK(t.faces.sizes() == torch::IntArrayRef({n, 3, 64, 64}));
  CHECK(t.sketches.sizes() == torch::IntArrayRef({n, 3, 64, 64}));
  CHECK(t.attributes.sizes() == torch::IntArrayRef({n, 19}));
  CHECK(t.faces.min().item<float>() >= -1.0f);
  CHECK(t.sketches.max().item<float>() <= 1.0f);
  CHECK(texture_columns(t.attributes, m.schema()).size(1) == 13);
  CHECK(load_split(m, Split::train, 3).ids.size() == 3);

  // Same inputs, same manifest.
  PrepareOptions options2{dir / "prepared2", 3.0, nullptr};
  build_manifest(dir / "raw", DatasetKind::synthetic, default_schema(), split, options2);
  CHECK(read_text_file(dir / "prepared" / "manifest.jsonl").size() ==
        read_text_file(dir / "prepared2" / "manifest.jsonl").size());
}

TEST_CASE("missing dataset files are data errors") {
  testing::TempDir dir("a2f-missing");
  PrepareOptions options{dir / "out", 3.0, nullptr};
  CHECK_THROWS_AS(build_manifest(dir / "nothing", DatasetKind::celeba, default_schema(), {}, options), DataError);
  CHECK_THROWS_AS(Manifest::read(dir / "nope.jsonl"), DataError);
}
