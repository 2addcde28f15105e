#include "a2f/sketch.hpp"

#include <algorithm>
#include <cmath>

#include "a2f/errors.hpp"

namespace a2f {

double color_dodge(double base, double top) {
  const double denom = 1.0 - top;
  if (denom <= kDodgeEpsilon || base >= denom) return 1.0;
  return std::min(1.0, base / denom);
}

std::vector<double> grayscale(const Image& image) {
  std::vector<double> out(static_cast<std::size_t>(image.width) * image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      double g;
      if (image.channels >= 3) {
        g = 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2);
      } else {
        g = image.at(y, x, 0);
      }
      out[static_cast<std::size_t>(y) * image.width + x] = std::clamp(g, 0.0, 1.0);
    }
  }
  return out;
}

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

std::vector<double> gaussian_blur(const std::vector<double>& plane, int width, int height,
                                  double sigma) {
  if (sigma <= 0.0) return plane;
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(plane.size());
  std::vector<double> out(plane.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[i + radius] * plane[static_cast<std::size_t>(y) * width + reflect101(x + i, width)];
      }
      tmp[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[i + radius] * tmp[static_cast<std::size_t>(reflect101(y + i, height)) * width + x];
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

Image pencil_sketch(const Image& face, double blur_sigma) {
  for (float v : face.pixels) {
    if (!std::isfinite(v)) throw DataError("pencil_sketch: non-finite pixel");
  }
  const auto gray = grayscale(face);
  std::vector<double> inverted(gray.size());
  std::transform(gray.begin(), gray.end(), inverted.begin(), [](double g) { return 1.0 - g; });
  const auto blurred = gaussian_blur(inverted, face.width, face.height, blur_sigma);

  Image out(face.width, face.height, 3);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const auto v = static_cast<float>(std::clamp(color_dodge(gray[i], blurred[i]), 0.0, 1.0));
    out.pixels[3 * i] = v;
    out.pixels[3 * i + 1] = v;
    out.pixels[3 * i + 2] = v;
  }
  return out;
}

}  // namespace a2f
