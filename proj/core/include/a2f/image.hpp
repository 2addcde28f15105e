#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <torch/types.h>

namespace a2f {

inline constexpr int kImageSize = 64;

// Interleaved (HWC) float image with values in [0, 1]. Channel order RGB.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<float> pixels;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  [[nodiscard]] float& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  [[nodiscard]] float at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  [[nodiscard]] bool empty() const { return pixels.empty(); }

  bool operator==(const Image&) const = default;
};

// Loads any format OpenCV decodes (PNG, JPEG, ...). 8-bit values map to [0,1].
Image read_image(const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_image(std::span<const std::uint8_t> bytes);

// Quantizes to 8 bits and back, matching what a PNG round-trip produces.
Image quantize8(const Image& image);

// Rectangle in pixel coordinates.
struct Box {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  [[nodiscard]] long area() const { return static_cast<long>(width) * height; }
};

// Crops `box` (clipped to the image) and bilinearly resizes to size x size.
Image crop_resize(const Image& image, const Box& box, int size = kImageSize);
Image resize(const Image& image, int width, int height);
Image hflip(const Image& image);
// Rotation about the centre, bilinear, replicated border, values clamped to [0,1].
Image rotate(const Image& image, double degrees);

// CHW float tensor in [0,1].
torch::Tensor image_to_tensor(const Image& image);
// Accepts CHW in [0,1]; values are clamped.
Image tensor_to_image(const torch::Tensor& chw);

// [0,1] <-> [-1,1] conversions used at the model boundary.
inline torch::Tensor to_model_range(const torch::Tensor& unit) { return unit * 2.0 - 1.0; }
inline torch::Tensor to_unit_range(const torch::Tensor& model) {
  return ((model + 1.0) * 0.5).clamp(0.0, 1.0);
}

}  // namespace a2f
