#include "a2f/datasets.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "a2f/augment.hpp"
#include "a2f/errors.hpp"
#include "a2f/log.hpp"
#include "a2f/sketch.hpp"
#include "a2f/util.hpp"

namespace a2f {

namespace fs = std::filesystem;

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "celeba") return DatasetKind::celeba;
  if (name == "lfwa") return DatasetKind::lfwa;
  if (name == "cuhk") return DatasetKind::cuhk;
  if (name == "synthetic") return DatasetKind::synthetic;
  throw ConfigError("unknown dataset '" + std::string(name) + "'");
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::celeba: return "celeba";
    case DatasetKind::lfwa: return "lfwa";
    case DatasetKind::cuhk: return "cuhk";
    case DatasetKind::synthetic: return "synthetic";
  }
  return "unknown";
}

DatasetLayout layout_for(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::celeba:
      return {"list_attr_celeba.txt", "list_eval_partition.txt", "img_align_celeba"};
    case DatasetKind::lfwa:
      return {"list_attr_lfwa.txt", "list_eval_partition_lfwa.txt", "lfw"};
    case DatasetKind::cuhk:
      return {"attributes.txt", "", ""};
    case DatasetKind::synthetic:
      return {"list_attr.txt", "list_eval_partition.txt", "images"};
  }
  return {};
}

AttributeTable parse_attribute_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  AttributeTable table;
  long declared = -1;
  if (!std::getline(in, line)) throw DataError("attribute table is empty");
  {
    std::istringstream first(line);
    if (!(first >> declared)) throw DataError("attribute table must start with a row count");
  }
  if (!std::getline(in, line)) throw DataError("attribute table lacks a header line");
  {
    std::istringstream names(line);
    std::string n;
    while (names >> n) table.columns.push_back(n);
  }
  if (table.columns.empty()) throw DataError("attribute table header names no attributes");
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string file;
    if (!(fields >> file)) continue;
    std::vector<int> labels;
    int v;
    while (fields >> v) labels.push_back(v);
    if (labels.size() != table.columns.size()) {
      throw DataError("attribute table line " + std::to_string(line_no) + " has " +
                      std::to_string(labels.size()) + " labels, expected " +
                      std::to_string(table.columns.size()));
    }
    if (!table.rows.emplace(file, std::move(labels)).second) {
      throw DataError("attribute table lists '" + file + "' twice");
    }
  }
  if (declared != static_cast<long>(table.rows.size())) {
    throw DataError("attribute table declares " + std::to_string(declared) + " rows but has " +
                    std::to_string(table.rows.size()));
  }
  return table;
}

std::string format_attribute_table(const AttributeTable& table) {
  std::ostringstream out;
  out << table.rows.size() << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? " " : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& [file, labels] : table.rows) {
    out << file;
    for (int l : labels) out << ' ' << (l > 0 ? " 1" : "-1");
    out << '\n';
  }
  return out.str();
}

std::map<std::string, int> parse_partition(std::string_view text) {
  std::map<std::string, int> out;
  std::istringstream in{std::string(text)};
  std::string file;
  int part;
  while (in >> file >> part) {
    if (part < 0 || part > 2) throw DataError("partition of '" + file + "' must be 0, 1 or 2");
    out[file] = part;
  }
  return out;
}

Split partition_to_split(int partition) { return partition == 2 ? Split::test : Split::train; }

std::vector<std::string> deterministic_subsample(std::vector<std::string> ids, std::int64_t cap,
                                                 std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (cap < 0 || cap >= static_cast<std::int64_t>(ids.size())) return ids;
  const std::uint64_t salt = fnv1a64(std::to_string(seed));
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  ranked.reserve(ids.size());
  for (auto& id : ids) ranked.emplace_back(fnv1a64(id, salt), std::move(id));
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(cap));
  for (std::int64_t i = 0; i < cap; ++i) out.push_back(std::move(ranked[i].second));
  std::sort(out.begin(), out.end());
  return out;
}

Split hash_split(const std::string& id, std::uint64_t seed, double test_fraction) {
  std::uint64_t h = fnv1a64(id, fnv1a64("split:" + std::to_string(seed)));
  // FNV-1a leaves the high bits of short, similar ids correlated; finish with
  // the splitmix64 mixer before taking a uniform from them.
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  h ^= h >> 31;
  const double u = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
  return u < test_fraction ? Split::test : Split::train;
}

namespace {

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

std::vector<std::string> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("image directory " + dir.string() + " not found");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      files.push_back(entry.path().filename().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<std::size_t> schema_columns(const AttributeTable& table, const AttributeSchema& schema) {
  std::vector<std::size_t> cols;
  for (const auto& name : schema.names()) {
    auto it = std::find(table.columns.begin(), table.columns.end(), name);
    if (it == table.columns.end()) {
      throw DataError("annotation lacks schema attribute '" + name + "'");
    }
    cols.push_back(static_cast<std::size_t>(it - table.columns.begin()));
  }
  return cols;
}

AttributeVector select_labels(const std::vector<int>& labels, const std::vector<std::size_t>& cols) {
  std::vector<int> picked;
  picked.reserve(cols.size());
  for (auto c : cols) picked.push_back(labels[c]);
  return AttributeVector::from_binary_labels(picked);
}

std::string stem_of(const std::string& file) { return fs::path(file).stem().string(); }

struct Emitter {
  fs::path out_dir;
  std::vector<ManifestRecord> records;

  void emit(const SampleRecord& s) {
    const fs::path face_rel = fs::path("faces") / (s.id + ".png");
    const fs::path sketch_rel = fs::path("sketches") / (s.id + ".png");
    write_png(s.face, out_dir / face_rel);
    write_png(s.sketch, out_dir / sketch_rel);
    records.push_back({s.id, face_rel, sketch_rel, s.attributes, s.split});
  }
};

Image to_sketch_channels(const Image& img) {
  const auto gray = grayscale(img);
  Image out(img.width, img.height, 3);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const auto v = static_cast<float>(gray[i]);
    out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = v;
  }
  return out;
}

void build_table_dataset(const fs::path& root, DatasetKind kind, const AttributeSchema& schema,
                         const SplitSpec& spec, const PrepareOptions& options,
                         const FaceDetector& detector, Emitter& emitter) {
  const auto layout = layout_for(kind);
  const auto table = parse_attribute_table(read_text_file(root / layout.annotation_file));
  const auto cols = schema_columns(table, schema);
  const auto images = list_images(root / layout.image_dir);
  for (const auto& file : images) {
    if (!table.rows.count(file)) throw DataError("missing annotation for image '" + file + "'");
  }
  if (images.size() != table.rows.size()) {
    throw DataError("annotation has " + std::to_string(table.rows.size()) + " rows but " +
                    std::to_string(images.size()) + " images were found");
  }
  std::map<std::string, int> partition;
  const bool has_partition =
      !layout.partition_file.empty() && fs::exists(root / layout.partition_file);
  if (has_partition) partition = parse_partition(read_text_file(root / layout.partition_file));

  std::vector<std::string> train, test;
  for (const auto& file : images) {
    Split s;
    if (has_partition) {
      auto it = partition.find(file);
      if (it == partition.end()) throw DataError("no partition entry for '" + file + "'");
      s = partition_to_split(it->second);
    } else {
      s = hash_split(file, spec.seed, spec.test_fraction);
    }
    (s == Split::train ? train : test).push_back(file);
  }
  log::info(to_string(kind), ": ", train.size(), " train / ", test.size(), " test before capping");

  for (auto [files, split, cap] : {std::tuple{&train, Split::train, spec.cap_train},
                                   std::tuple{&test, Split::test, spec.cap_test}}) {
    for (const auto& file : deterministic_subsample(*files, cap, spec.seed)) {
      const auto photo = read_image(root / layout.image_dir / file);
      Image face;
      try {
        face = quantize8(crop_face(photo, detector, file));
      } catch (const NoFaceDetected& e) {
        log::warn("skipping ", file, ": ", e.what());
        continue;
      }
      SampleRecord rec{stem_of(file), face, pencil_sketch(face, options.sketch_sigma),
                       select_labels(table.rows.at(file), cols), split};
      emitter.emit(rec);
    }
  }
}

// root/{train,test}/{photos,sketches}/<id>.<ext> plus root/attributes.txt
// keyed by photo file name.
void build_paired_dataset(const fs::path& root, const AttributeSchema& schema,
                          const SplitSpec& spec, const FaceDetector& detector, Emitter& emitter) {
  const auto table = parse_attribute_table(read_text_file(root / layout_for(DatasetKind::cuhk).annotation_file));
  const auto cols = schema_columns(table, schema);
  const auto recipe = paired_dataset_recipe();
  for (auto [split, cap] : {std::pair{Split::train, spec.cap_train}, std::pair{Split::test, spec.cap_test}}) {
    const fs::path dir = root / std::string(to_string(split));
    const auto photos = list_images(dir / "photos");
    std::map<std::string, std::string> sketch_by_stem;
    for (const auto& s : list_images(dir / "sketches")) sketch_by_stem[stem_of(s)] = s;
    for (const auto& file : deterministic_subsample(photos, cap, spec.seed)) {
      auto row = table.rows.find(file);
      if (row == table.rows.end()) throw DataError("missing annotation for image '" + file + "'");
      auto sk = sketch_by_stem.find(stem_of(file));
      if (sk == sketch_by_stem.end()) throw DataError("no sketch paired with '" + file + "'");
      const auto photo = read_image(dir / "photos" / file);
      const auto boxes = detector.detect(photo, file);
      if (boxes.empty()) {
        log::warn("skipping ", file, ": no face detected");
        continue;
      }
      const auto box = *std::max_element(boxes.begin(), boxes.end(),
                                         [](const Box& a, const Box& b) { return a.area() < b.area(); });
      auto sketch_img = resize(read_image(dir / "sketches" / sk->second), photo.width, photo.height);
      SampleRecord base{stem_of(file), quantize8(crop_resize(photo, box)),
                        quantize8(to_sketch_channels(crop_resize(sketch_img, box))),
                        select_labels(row->second, cols), split};
      for (const auto& r : augment(base, recipe)) emitter.emit(r);
    }
  }
}

}  // namespace

Manifest build_manifest(const fs::path& root, DatasetKind kind, const AttributeSchema& schema,
                        const SplitSpec& split, const PrepareOptions& options) {
  if (options.output_dir.empty()) throw ConfigError("build_manifest needs an output directory");
  CenterCropDetector fallback;
  const FaceDetector& detector = options.detector ? *options.detector : fallback;
  Emitter emitter{options.output_dir, {}};
  if (kind == DatasetKind::cuhk) {
    build_paired_dataset(root, schema, split, detector, emitter);
  } else {
    build_table_dataset(root, kind, schema, split, options, detector, emitter);
  }
  Provenance prov{std::string(to_string(kind)), "a2f-prep/1", options.sketch_sigma, split.seed,
                  detector.name()};
  Manifest manifest(schema, std::move(emitter.records), prov);
  manifest.write(options.output_dir / "manifest.jsonl");
  const auto counts = manifest.counts();
  log::info("manifest: ", counts.train, " train / ", counts.test, " test records");
  return Manifest::read(options.output_dir / "manifest.jsonl");
}

}  // namespace a2f
