#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "a2f/image.hpp"

namespace a2f {

// Pluggable face detector. `id` identifies the source image so detectors
// backed by precomputed boxes can look them up.
class FaceDetector {
 public:
  virtual ~FaceDetector() = default;
  [[nodiscard]] virtual std::vector<Box> detect(const Image& image, const std::string& id) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

// Treats the central square of the image as the face. Images without any
// content (pixel variance below `min_variance`) yield no detection.
class CenterCropDetector final : public FaceDetector {
 public:
  explicit CenterCropDetector(double scale = 1.0, double min_variance = 1e-6)
      : scale_(scale), min_variance_(min_variance) {}
  [[nodiscard]] std::vector<Box> detect(const Image& image, const std::string& id) const override;
  [[nodiscard]] std::string name() const override { return "center-crop"; }

 private:
  double scale_;
  double min_variance_;
};

// Boxes produced offline by an external detector (e.g. MTCNN), one
// "<id> <x> <y> <w> <h>" line per box.
class BoxFileDetector final : public FaceDetector {
 public:
  explicit BoxFileDetector(const std::filesystem::path& path);
  [[nodiscard]] std::vector<Box> detect(const Image& image, const std::string& id) const override;
  [[nodiscard]] std::string name() const override { return "box-file"; }

 private:
  std::map<std::string, std::vector<Box>> boxes_;
};

// Largest detected face, cropped and bilinearly resized to 64x64.
// Throws NoFaceDetected if the detector returns nothing.
Image crop_face(const Image& photo, const FaceDetector& detector, const std::string& id = {});

}  // namespace a2f
