#include "testing.hpp"

#include <cmath>

#include "a2f/errors.hpp"
#include "a2f/image.hpp"
#include "a2f/sketch.hpp"
#include "a2f/synthetic.hpp"

using namespace a2f;

namespace {

Image gradient_image(int w, int h) {
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>((x * 7 + y * 3 + c * 11) % 97) / 96.0f;
  return img;
}

}  // namespace

TEST_CASE("color dodge saturates near a white top layer") {
  CHECK(color_dodge(0.5, 0.0) == doctest::Approx(0.5));
  CHECK(color_dodge(0.25, 0.5) == doctest::Approx(0.5));
  CHECK(color_dodge(0.9, 0.5) == 1.0);
  CHECK(color_dodge(0.3, 1.0) == 1.0);
  CHECK(color_dodge(0.0, 1.0) == 1.0);
}

TEST_CASE("grayscale uses BT.601 luma") {
  Image img(1, 1, 3);
  img.at(0, 0, 0) = 1.0f;
  CHECK(grayscale(img)[0] == doctest::Approx(0.299));
  img.at(0, 0, 0) = 0.0f;
  img.at(0, 0, 1) = 1.0f;
  CHECK(grayscale(img)[0] == doctest::Approx(0.587));
}

TEST_CASE("blur preserves a constant plane and is a no-op at sigma 0") {
  std::vector<double> plane(64, 0.37);
  for (double v : gaussian_blur(plane, 8, 8, 2.5)) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
  std::vector<double> ramp(16);
  for (int i = 0; i < 16; ++i) ramp[i] = i;
  CHECK(gaussian_blur(ramp, 4, 4, 0.0) == ramp);
}

TEST_CASE("uniform images sketch to white") {
  for (int level : {1, 64, 128, 200, 255}) {
    Image img(16, 16, 3, static_cast<float>(level) / 255.0f);
    const auto s = pencil_sketch(img, 3.0);
    for (float v : s.pixels) CHECK(v == 1.0f);
  }
}

TEST_CASE("pencil sketch is deterministic and depends on sigma") {
  const auto face = render_synthetic_face(default_schema(), AttributeVector::filled(19, 1.0), 3, 64, 64);
  const auto a = pencil_sketch(face, 3.0);
  CHECK(a == pencil_sketch(face, 3.0));
  CHECK_FALSE(a == pencil_sketch(face, 1.0));
  CHECK(a.channels == 3);
  for (int y = 0; y < a.height; ++y) CHECK(a.at(y, 5, 0) == a.at(y, 5, 2));
}

TEST_CASE("non-finite pixels are rejected") {
  Image img(4, 4, 3, 0.5f);
  img.at(1, 1, 1) = std::nanf("");
  CHECK_THROWS_AS(pencil_sketch(img), DataError);
}

TEST_CASE("PNG round trip is exact on 8-bit levels") {
  const auto img = quantize8(gradient_image(13, 9));
  const auto back = decode_image(encode_png(img));
  REQUIRE(back.width == 13);
  REQUIRE(back.height == 9);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) CHECK(back.pixels[i] == doctest::Approx(img.pixels[i]));
}

TEST_CASE("geometric helpers") {
  const auto img = gradient_image(10, 6);
  CHECK(hflip(hflip(img)) == img);
  CHECK(hflip(img).at(2, 0, 1) == img.at(2, 9, 1));
  const auto r = resize(img, 20, 12);
  CHECK(r.width == 20);
  CHECK(r.height == 12);
  const auto t = image_to_tensor(img);
  CHECK(t.sizes() == torch::IntArrayRef({3, 6, 10}));
  CHECK(t.min().item<float>() >= 0.0f);
  CHECK(t.max().item<float>() <= 1.0f);
  CHECK(tensor_to_image(t) == img);
  CHECK(torch::allclose(to_unit_range(to_model_range(t)), t));
}
