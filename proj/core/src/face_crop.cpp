#include "a2f/face_crop.hpp"

#include <algorithm>
#include <sstream>

#include "a2f/errors.hpp"
#include "a2f/util.hpp"

namespace a2f {

std::vector<Box> CenterCropDetector::detect(const Image& image, const std::string&) const {
  if (image.empty()) return {};
  double sum = 0.0, sq = 0.0;
  for (float v : image.pixels) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(image.pixels.size());
  const double variance = sq / n - (sum / n) * (sum / n);
  if (variance < min_variance_) return {};
  const int side = std::max(1, static_cast<int>(std::min(image.width, image.height) * scale_));
  return {Box{(image.width - side) / 2, (image.height - side) / 2, side, side}};
}

BoxFileDetector::BoxFileDetector(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string id;
    Box b;
    if (!(fields >> id)) continue;
    if (!(fields >> b.x >> b.y >> b.width >> b.height)) {
      throw DataError("malformed box record for '" + id + "' in " + path.string());
    }
    boxes_[id].push_back(b);
  }
}

std::vector<Box> BoxFileDetector::detect(const Image&, const std::string& id) const {
  auto it = boxes_.find(id);
  return it == boxes_.end() ? std::vector<Box>{} : it->second;
}

Image crop_face(const Image& photo, const FaceDetector& detector, const std::string& id) {
  const auto boxes = detector.detect(photo, id);
  if (boxes.empty()) {
    throw NoFaceDetected("no face detected" + (id.empty() ? std::string() : " in " + id));
  }
  const auto largest = std::max_element(boxes.begin(), boxes.end(),
                                        [](const Box& a, const Box& b) { return a.area() < b.area(); });
  return crop_resize(photo, *largest, kImageSize);
}

}  // namespace a2f
