#include "a2f/schema.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "a2f/errors.hpp"
#include "a2f/util.hpp"
#include "json.hpp"

namespace a2f {

using nlohmann::json;

std::string_view to_string(AttributeGroup group) {
  return group == AttributeGroup::texture ? "texture" : "color";
}

AttributeGroup parse_attribute_group(std::string_view text) {
  if (text == "texture") return AttributeGroup::texture;
  if (text == "color") return AttributeGroup::color;
  throw SchemaError("unknown attribute group '" + std::string(text) + "'");
}

AttributeSchema::AttributeSchema(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw SchemaError("attribute schema is empty");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.name.empty()) throw SchemaError("attribute with empty name");
    if (!seen.insert(e.name).second) {
      throw SchemaError("duplicate attribute '" + e.name + "'");
    }
    (e.group == AttributeGroup::texture ? texture_ : color_).push_back(i);
  }
}

std::vector<std::string> AttributeSchema::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::size_t AttributeSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  throw SchemaError("unknown attribute '" + std::string(name) + "'");
}

bool AttributeSchema::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

std::string AttributeSchema::fingerprint() const { return to_hex(fnv1a64(to_text())); }

std::string AttributeSchema::to_json() const {
  json attrs = json::array();
  for (const auto& e : entries_) {
    attrs.push_back({{"name", e.name}, {"group", to_string(e.group)}, {"default", -1.0}});
  }
  return json{{"attributes", attrs}}.dump();
}

AttributeSchema AttributeSchema::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema json: ") + e.what());
  }
  if (!j.contains("attributes") || !j["attributes"].is_array()) {
    throw SchemaError("schema json lacks an 'attributes' array");
  }
  std::vector<Entry> entries;
  for (const auto& a : j["attributes"]) {
    if (!a.contains("name") || !a.contains("group")) {
      throw SchemaError("schema json record needs name and group");
    }
    entries.push_back({a["name"].get<std::string>(),
                       parse_attribute_group(a["group"].get<std::string>())});
  }
  return AttributeSchema(std::move(entries));
}

std::string AttributeSchema::to_text() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e.name;
    out += ' ';
    out += to_string(e.group);
    out += '\n';
  }
  return out;
}

AttributeSchema AttributeSchema::parse(std::string_view text) {
  std::vector<Entry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, group, extra;
    if (!(fields >> name)) continue;
    if (!(fields >> group)) {
      throw SchemaError("line " + std::to_string(line_no) + ": attribute '" + name +
                        "' has no group tag");
    }
    if (fields >> extra) {
      throw SchemaError("line " + std::to_string(line_no) + ": unexpected field '" + extra + "'");
    }
    entries.push_back({name, parse_attribute_group(group)});
  }
  return AttributeSchema(std::move(entries));
}

AttributeSchema load_schema(const std::filesystem::path& path) {
  return AttributeSchema::parse(read_text_file(path));
}

const AttributeSchema& default_schema() {
  static const AttributeSchema schema = [] {
    using G = AttributeGroup;
    return AttributeSchema({
        {"Arched_Eyebrows", G::texture}, {"Bags_Under_Eyes", G::texture},
        {"Bald", G::texture},            {"Bangs", G::texture},
        {"Big_Lips", G::texture},        {"Big_Nose", G::texture},
        {"Bushy_Eyebrows", G::texture},  {"Chubby", G::texture},
        {"Male", G::texture},            {"Narrow_Eyes", G::texture},
        {"No_Beard", G::texture},        {"Smiling", G::texture},
        {"Young", G::texture},           {"Black_Hair", G::color},
        {"Blond_Hair", G::color},        {"Brown_Hair", G::color},
        {"Gray_Hair", G::color},         {"Pale_Skin", G::color},
        {"Rosy_Cheeks", G::color},
    });
  }();
  return schema;
}

namespace {
void check_value(double v) {
  if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
    throw SchemaError("attribute value " + std::to_string(v) + " outside [-1, 1]");
  }
}
}  // namespace

AttributeVector::AttributeVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) check_value(v);
}

AttributeVector AttributeVector::filled(std::size_t size, double value) {
  return AttributeVector(std::vector<double>(size, value));
}

AttributeVector AttributeVector::from_binary_labels(std::span<const int> labels) {
  std::vector<double> values;
  values.reserve(labels.size());
  for (int l : labels) {
    if (l == 1) {
      values.push_back(1.0);
    } else if (l == 0 || l == -1) {
      values.push_back(-1.0);
    } else {
      throw SchemaError("binary attribute label must be 0, 1 or -1, got " + std::to_string(l));
    }
  }
  return AttributeVector(std::move(values));
}

AttributeVector AttributeVector::with(std::size_t index, double value) const {
  if (index >= values_.size()) {
    throw SchemaError("attribute index " + std::to_string(index) + " out of range");
  }
  check_value(value);
  AttributeVector copy = *this;
  copy.values_[index] = value;
  return copy;
}

void check_matches(const AttributeVector& a, const AttributeSchema& schema) {
  if (a.size() != schema.size()) {
    throw SchemaError("attribute vector has " + std::to_string(a.size()) +
                      " entries, schema has " + std::to_string(schema.size()));
  }
}

AttributeVector texture_projection(const AttributeVector& a, const AttributeSchema& schema) {
  check_matches(a, schema);
  std::vector<double> out;
  out.reserve(schema.texture_indices().size());
  for (std::size_t i : schema.texture_indices()) out.push_back(a[i]);
  return AttributeVector(std::move(out));
}

std::vector<AttributeVector> sweep_vectors(const AttributeVector& base, std::size_t index,
                                           std::span<const double> weights) {
  if (index >= base.size()) {
    throw SchemaError("sweep index " + std::to_string(index) + " out of range");
  }
  std::vector<AttributeVector> out;
  out.reserve(weights.size());
  for (double w : weights) out.push_back(base.with(index, w));
  return out;
}

}  // namespace a2f
