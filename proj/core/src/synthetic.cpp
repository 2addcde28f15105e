#include "a2f/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "a2f/datasets.hpp"
#include "a2f/util.hpp"

namespace a2f {

namespace {

using Rgb = std::array<float, 3>;

struct Canvas {
  Image& img;

  void blend(int x, int y, const Rgb& c, float alpha = 1.0f) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    for (int k = 0; k < 3; ++k) img.at(y, x, k) = img.at(y, x, k) * (1 - alpha) + c[k] * alpha;
  }

  // Filled ellipse; `from_y`/`to_y` restrict the rows (in ellipse-relative units).
  void ellipse(double cx, double cy, double rx, double ry, const Rgb& c, float alpha = 1.0f,
               double from = -1.0, double to = 1.0) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        if (dx * dx + dy * dy <= 1.0 && dy >= from && dy <= to) blend(x, y, c, alpha);
      }
    }
  }

  // Thick parabolic arc y = cy + bend * t^2 for t in [-1, 1] mapped to [cx-hw, cx+hw].
  void arc(double cx, double cy, double half_width, double bend, double thickness, const Rgb& c,
           float alpha = 1.0f) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const double t = (x - cx) / half_width;
        if (std::abs(t) > 1.0) continue;
        const double yc = cy + bend * t * t;
        if (std::abs(y - yc) <= thickness * 0.5) blend(x, y, c, alpha);
      }
    }
  }
};

double attr(const AttributeSchema& schema, const AttributeVector& a, const char* name) {
  return schema.contains(name) ? a[schema.index_of(name)] : -1.0;
}

bool on(double v) { return v > 0.0; }

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  Rgb out;
  for (int k = 0; k < 3; ++k) out[k] = static_cast<float>(a[k] * (1 - t) + b[k] * t);
  return out;
}

}  // namespace

Image render_synthetic_face(const AttributeSchema& schema, const AttributeVector& a,
                            std::uint64_t seed, int width, int height) {
  check_matches(a, schema);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto jitter = [&](double s) { return (u(rng) - 0.5) * 2.0 * s; };

  const Rgb background = {static_cast<float>(0.35 + 0.4 * u(rng)), static_cast<float>(0.35 + 0.4 * u(rng)),
                          static_cast<float>(0.35 + 0.4 * u(rng))};
  Image img(width, height, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = background[i % 3];
  Canvas cv{img};

  const double s = std::min(width, height) / 64.0;
  const double cx = width * 0.5 + jitter(2.0 * s);
  const double cy = height * 0.5 + jitter(2.0 * s) + 2.0 * s;

  // Skin tone
  const Rgb skin_tones[] = {{0.92f, 0.76f, 0.62f}, {0.80f, 0.60f, 0.45f}, {0.62f, 0.45f, 0.32f}};
  Rgb skin = skin_tones[static_cast<int>(u(rng) * 3) % 3];
  const double pale = attr(schema, a, "Pale_Skin");
  skin = mix(skin, {0.98f, 0.93f, 0.90f}, 0.35 * (pale + 1.0));

  // Hair colour: the strongest colour attribute wins.
  struct HairChoice { const char* name; Rgb color; };
  const HairChoice hair_choices[] = {{"Black_Hair", {0.08f, 0.07f, 0.07f}},
                                     {"Blond_Hair", {0.93f, 0.80f, 0.45f}},
                                     {"Brown_Hair", {0.45f, 0.28f, 0.15f}},
                                     {"Gray_Hair", {0.70f, 0.70f, 0.72f}}};
  Rgb hair = {0.30f, 0.20f, 0.12f};
  double best = 0.0;
  for (const auto& h : hair_choices) {
    const double v = attr(schema, a, h.name);
    if (v > best) {
      best = v;
      hair = h.color;
    }
  }

  const double chubby = attr(schema, a, "Chubby");
  const double male = attr(schema, a, "Male");
  const double rx = (19.0 + 2.5 * (chubby + 1.0) + 1.0 * (male + 1.0)) * s;
  const double ry = (25.0 + 0.8 * (male + 1.0)) * s;

  // Hair volume behind the face, unless bald.
  const bool bald = on(attr(schema, a, "Bald"));
  if (!bald) {
    const double hair_len = on(male) ? 0.2 : 0.9;
    cv.ellipse(cx, cy - 4 * s, rx + 5 * s, ry + 6 * s, hair, 1.0f, -1.0, hair_len);
  }
  cv.ellipse(cx, cy, rx, ry, skin);
  if (bald) cv.ellipse(cx, cy - ry * 0.55, rx * 0.7, ry * 0.3, mix(skin, {1, 1, 1}, 0.25), 0.7f);
  if (!bald) cv.ellipse(cx, cy - 4 * s, rx + 3 * s, ry + 3 * s, hair, 1.0f, -1.0, -0.62);
  if (on(attr(schema, a, "Bangs")) && !bald) {
    cv.ellipse(cx, cy - ry * 0.55, rx * 0.95, ry * 0.35, hair, 1.0f, -1.0, 0.35);
  }

  const Rgb dark = {0.12f, 0.08f, 0.07f};
  const double eye_y = cy - ry * 0.12;
  const double eye_dx = rx * 0.42;

  // Eyebrows
  const double brow_thick = (on(attr(schema, a, "Bushy_Eyebrows")) ? 2.6 : 1.3) * s;
  const double brow_bend = (on(attr(schema, a, "Arched_Eyebrows")) ? 2.5 : 0.3) * s;
  for (int side : {-1, 1}) {
    cv.arc(cx + side * eye_dx, eye_y - 6.0 * s + brow_bend, 5.0 * s, -brow_bend, brow_thick,
           mix(hair, dark, 0.5));
  }

  // Eyes
  const double eye_ry = (on(attr(schema, a, "Narrow_Eyes")) ? 0.9 : 2.0) * s;
  for (int side : {-1, 1}) {
    cv.ellipse(cx + side * eye_dx, eye_y, 3.4 * s, eye_ry + 0.6 * s, {0.97f, 0.97f, 0.97f});
    cv.ellipse(cx + side * eye_dx, eye_y, 1.6 * s, eye_ry, {0.15f, 0.12f, 0.10f});
    if (on(attr(schema, a, "Bags_Under_Eyes"))) {
      cv.arc(cx + side * eye_dx, eye_y + 3.8 * s, 3.5 * s, 1.2 * s, 1.1 * s, mix(skin, dark, 0.45));
    }
  }

  // Nose
  const double nose = on(attr(schema, a, "Big_Nose")) ? 1.8 : 1.0;
  cv.ellipse(cx, cy + ry * 0.18, 2.2 * s * nose, 4.0 * s * nose, mix(skin, dark, 0.25));

  // Cheeks
  if (on(attr(schema, a, "Rosy_Cheeks"))) {
    for (int side : {-1, 1}) {
      cv.ellipse(cx + side * rx * 0.55, cy + ry * 0.25, 4.0 * s, 3.0 * s, {0.90f, 0.35f, 0.35f}, 0.55f);
    }
  }

  // Beard
  if (!on(attr(schema, a, "No_Beard"))) {
    cv.ellipse(cx, cy + ry * 0.15, rx * 0.98, ry * 0.85, mix(hair, dark, 0.4), 0.85f, 0.35, 1.0);
  }

  // Mouth
  const double lips = (on(attr(schema, a, "Big_Lips")) ? 2.6 : 1.4) * s;
  const double smile = on(attr(schema, a, "Smiling")) ? -3.2 * s : 0.4 * s;
  const double mouth_y = cy + ry * 0.55;
  if (on(attr(schema, a, "Smiling"))) {
    cv.arc(cx, mouth_y - smile + 1.0 * s, 6.0 * s, smile, 2.2 * s, {0.98f, 0.98f, 0.96f});
  }
  cv.arc(cx, mouth_y - smile, 6.5 * s, smile, lips, {0.70f, 0.25f, 0.25f});

  // Age lines
  if (!on(attr(schema, a, "Young"))) {
    for (int k = 0; k < 2; ++k) {
      cv.arc(cx, cy - ry * 0.5 + k * 2.5 * s, rx * 0.45, 0.0, 0.7 * s, mix(skin, dark, 0.35));
    }
  }

  // Mild sensor noise
  std::normal_distribution<double> noise(0.0, 0.01);
  for (float& v : img.pixels) v = std::clamp(static_cast<float>(v + noise(rng)), 0.0f, 1.0f);
  return img;
}

AttributeVector random_attributes(const AttributeSchema& schema, std::uint64_t seed,
                                  std::uint64_t index) {
  std::mt19937_64 rng(fnv1a64(std::to_string(index), seed + 0x9e3779b97f4a7c15ULL));
  std::bernoulli_distribution coin(0.5);
  std::vector<int> labels(schema.size());
  for (auto& l : labels) l = coin(rng) ? 1 : -1;
  // At most one hair colour.
  std::vector<std::size_t> hair;
  for (const char* n : {"Black_Hair", "Blond_Hair", "Brown_Hair", "Gray_Hair"}) {
    if (schema.contains(n)) hair.push_back(schema.index_of(n));
  }
  if (!hair.empty()) {
    for (auto i : hair) labels[i] = -1;
    std::uniform_int_distribution<std::size_t> pick(0, hair.size());
    const auto k = pick(rng);
    if (k < hair.size()) labels[hair[k]] = 1;
  }
  return AttributeVector::from_binary_labels(labels);
}

void write_synthetic_dataset(const std::filesystem::path& root, const AttributeSchema& schema,
                             int count, std::uint64_t seed) {
  const auto layout = layout_for(DatasetKind::synthetic);
  std::filesystem::create_directories(root / layout.image_dir);
  AttributeTable table;
  table.columns = schema.names();
  std::ostringstream partition;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", i + 1);
    const auto a = random_attributes(schema, seed, static_cast<std::uint64_t>(i));
    write_png(render_synthetic_face(schema, a, seed * 1000003ULL + static_cast<std::uint64_t>(i)),
              root / layout.image_dir / name);
    std::vector<int> labels;
    for (double v : a.values()) labels.push_back(v > 0 ? 1 : -1);
    table.rows[name] = labels;
    partition << name << ' ' << (i % 10 == 9 ? 2 : 0) << '\n';
  }
  write_text_file(root / layout.annotation_file, format_attribute_table(table));
  write_text_file(root / layout.partition_file, partition.str());
}

}  // namespace a2f
