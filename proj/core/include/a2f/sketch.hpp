#pragma once

#include <vector>

#include "a2f/image.hpp"

namespace a2f {

inline constexpr double kDefaultSketchSigma = 3.0;
inline constexpr double kDodgeEpsilon = 1e-6;

// Color-dodge blend of a base layer with an (inverted, blurred) top layer:
// min(1, base / (1 - top)), saturating to 1 when the denominator is <= eps.
double color_dodge(double base, double top);

// Luma (BT.601 weights) of an RGB image, single channel.
std::vector<double> grayscale(const Image& image);

// Separable Gaussian blur with reflect-101 borders. sigma <= 0 is a no-op.
std::vector<double> gaussian_blur(const std::vector<double>& plane, int width, int height,
                                  double sigma);

// Pencil-sketch filter: grayscale, invert, blur, dodge. The result is gray
// replicated to three channels, values in [0,1]. Deterministic for a given
// input and sigma. Throws DataError on non-finite pixels.
Image pencil_sketch(const Image& face, double blur_sigma = kDefaultSketchSigma);

}  // namespace a2f
