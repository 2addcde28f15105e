#include "a2f/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <torch/torch.h>

#include "a2f/errors.hpp"
#include "json.hpp"

namespace a2f {

using nlohmann::json;

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  throw DataError("unknown split '" + std::string(text) + "'");
}

Manifest::Manifest(AttributeSchema schema, std::vector<ManifestRecord> records, Provenance provenance)
    : schema_(std::move(schema)), records_(std::move(records)), provenance_(std::move(provenance)) {
  validate();
}

SplitCounts Manifest::counts() const {
  SplitCounts c;
  for (const auto& r : records_) (r.split == Split::train ? c.train : c.test) += 1;
  return c;
}

std::vector<ManifestRecord> Manifest::split(Split s) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records_) {
    if (r.split == s) out.push_back(r);
  }
  return out;
}

void Manifest::validate() const {
  std::set<std::string> train_ids, test_ids;
  for (const auto& r : records_) {
    if (r.attributes.size() != schema_.size()) {
      throw DataError("record '" + r.id + "' does not match the manifest schema");
    }
    auto& ids = r.split == Split::train ? train_ids : test_ids;
    if (!ids.insert(r.id).second) throw DataError("duplicate record id '" + r.id + "'");
  }
  for (const auto& id : train_ids) {
    if (test_ids.count(id)) throw DataError("id '" + id + "' appears in both splits");
  }
}

void Manifest::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  json header = {
      {"kind", "header"},
      {"schema", json::parse(schema_.to_json())},
      {"provenance",
       {{"dataset", provenance_.dataset},
        {"preprocessing_version", provenance_.preprocessing_version},
        {"sketch_sigma", provenance_.sketch_sigma},
        {"seed", provenance_.seed},
        {"detector", provenance_.detector}}},
  };
  out << header.dump() << '\n';
  for (const auto& r : records_) {
    json rec = {{"id", r.id},
                {"face_path", r.face_path.generic_string()},
                {"sketch_path", r.sketch_path.generic_string()},
                {"attributes", r.attributes.values()},
                {"split", to_string(r.split)}};
    out << rec.dump() << '\n';
  }
}

Manifest Manifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty manifest " + path.string());
  Manifest m;
  try {
    const json header = json::parse(line);
    if (header.value("kind", "") != "header") throw DataError("manifest lacks a header line");
    m.schema_ = AttributeSchema::from_json(header.at("schema").dump());
    const auto& p = header.at("provenance");
    m.provenance_.dataset = p.value("dataset", "");
    m.provenance_.preprocessing_version = p.value("preprocessing_version", "");
    m.provenance_.sketch_sigma = p.value("sketch_sigma", 3.0);
    m.provenance_.seed = p.value("seed", std::uint64_t{0});
    m.provenance_.detector = p.value("detector", "");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      m.records_.push_back({rec.at("id").get<std::string>(),
                            rec.at("face_path").get<std::string>(),
                            rec.at("sketch_path").get<std::string>(),
                            AttributeVector(rec.at("attributes").get<std::vector<double>>()),
                            parse_split(rec.at("split").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  } catch (const SchemaError& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  m.base_dir_ = path.parent_path();
  m.validate();
  return m;
}

std::filesystem::path Manifest::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir_ / p;
}

SampleTensors SampleTensors::subset(std::int64_t count) const {
  count = std::min(count, size());
  SampleTensors s;
  s.ids.assign(ids.begin(), ids.begin() + count);
  s.faces = faces.slice(0, 0, count);
  s.sketches = sketches.slice(0, 0, count);
  s.attributes = attributes.slice(0, 0, count);
  return s;
}

namespace {

void check_sample_image(const Image& img, const std::string& what, const std::string& id) {
  if (img.width != kImageSize || img.height != kImageSize || img.channels != 3) {
    throw DataError(what + " of '" + id + "' is not 64x64x3");
  }
}

}  // namespace

SampleTensors to_tensors(const std::vector<SampleRecord>& records) {
  SampleTensors t;
  if (records.empty()) throw DataError("no samples to load");
  std::vector<torch::Tensor> faces, sketches, attrs;
  for (const auto& r : records) {
    check_sample_image(r.face, "face", r.id);
    check_sample_image(r.sketch, "sketch", r.id);
    t.ids.push_back(r.id);
    faces.push_back(to_model_range(image_to_tensor(r.face)));
    sketches.push_back(to_model_range(image_to_tensor(r.sketch)));
    attrs.push_back(attribute_tensor(r.attributes));
  }
  t.faces = torch::stack(faces);
  t.sketches = torch::stack(sketches);
  t.attributes = torch::stack(attrs);
  return t;
}

SampleTensors load_split(const Manifest& manifest, Split split, std::int64_t limit) {
  std::vector<SampleRecord> records;
  for (const auto& r : manifest.records()) {
    if (r.split != split) continue;
    if (limit >= 0 && static_cast<std::int64_t>(records.size()) >= limit) break;
    records.push_back({r.id, read_image(manifest.resolve(r.face_path)),
                       read_image(manifest.resolve(r.sketch_path)), r.attributes, r.split});
  }
  if (records.empty()) {
    throw DataError("manifest has no " + std::string(to_string(split)) + " records");
  }
  return to_tensors(records);
}

torch::Tensor texture_columns(const torch::Tensor& attributes, const AttributeSchema& schema) {
  const auto& idx = schema.texture_indices();
  std::vector<std::int64_t> cols(idx.begin(), idx.end());
  return attributes.index_select(attributes.dim() - 1, torch::tensor(cols, torch::kLong));
}

torch::Tensor attribute_tensor(const AttributeVector& a) {
  std::vector<float> v(a.values().begin(), a.values().end());
  return torch::tensor(v, torch::kFloat32);
}

}  // namespace a2f
