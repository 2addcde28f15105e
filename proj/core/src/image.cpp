#include "a2f/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "a2f/errors.hpp"

namespace a2f {

namespace {

cv::Mat to_mat8(const Image& image) {
  const int type = image.channels == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat mat(image.height, image.width, type);
  for (int y = 0; y < image.height; ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        // RGB -> BGR for OpenCV
        const int src_c = image.channels == 3 ? 2 - c : c;
        const float v = std::clamp(image.at(y, x, src_c), 0.0f, 1.0f);
        row[x * image.channels + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
    }
  }
  return mat;
}

Image from_mat8(const cv::Mat& mat) {
  cv::Mat rgb;
  if (mat.channels() == 1) {
    cv::cvtColor(mat, rgb, cv::COLOR_GRAY2RGB);
  } else if (mat.channels() == 4) {
    cv::cvtColor(mat, rgb, cv::COLOR_BGRA2RGB);
  } else {
    cv::cvtColor(mat, rgb, cv::COLOR_BGR2RGB);
  }
  if (rgb.depth() != CV_8U) rgb.convertTo(rgb, CV_8U);
  Image out(rgb.cols, rgb.rows, 3);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* row = rgb.ptr<std::uint8_t>(y);
    for (int x = 0; x < rgb.cols * 3; ++x) {
      out.pixels[static_cast<std::size_t>(y) * rgb.cols * 3 + x] = row[x] / 255.0f;
    }
  }
  return out;
}

cv::Mat to_mat32(const Image& image) {
  cv::Mat mat(image.height, image.width, CV_32FC(image.channels));
  std::copy(image.pixels.begin(), image.pixels.end(), mat.ptr<float>(0));
  return mat;
}

Image from_mat32(const cv::Mat& mat) {
  Image out(mat.cols, mat.rows, mat.channels());
  cv::Mat cont = mat.isContinuous() ? mat : mat.clone();
  const auto* p = cont.ptr<float>(0);
  std::copy(p, p + out.pixels.size(), out.pixels.begin());
  return out;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError("cannot read image " + path.string());
  return from_mat8(mat);
}

void write_png(const Image& image, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), to_mat8(image))) {
    throw DataError("cannot write image " + path.string());
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", to_mat8(image), buf)) throw DataError("png encoding failed");
  return buf;
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat mat = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError("cannot decode image bytes");
  return from_mat8(mat);
}

Image quantize8(const Image& image) {
  Image out = image;
  for (float& v : out.pixels) v = std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f) / 255.0f;
  return out;
}

Image crop_resize(const Image& image, const Box& box, int size) {
  const int x0 = std::clamp(box.x, 0, image.width);
  const int y0 = std::clamp(box.y, 0, image.height);
  const int x1 = std::clamp(box.x + box.width, 0, image.width);
  const int y1 = std::clamp(box.y + box.height, 0, image.height);
  if (x1 <= x0 || y1 <= y0) throw DataError("crop box lies outside the image");
  cv::Mat roi = to_mat32(image)(cv::Rect(x0, y0, x1 - x0, y1 - y0));
  if (roi.cols == size && roi.rows == size) return from_mat32(roi.clone());
  cv::Mat out;
  cv::resize(roi, out, cv::Size(size, size), 0, 0, cv::INTER_LINEAR);
  return from_mat32(out);
}

Image resize(const Image& image, int width, int height) {
  if (image.width == width && image.height == height) return image;
  cv::Mat out;
  cv::resize(to_mat32(image), out, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  return from_mat32(out);
}

Image hflip(const Image& image) {
  Image out(image.width, image.height, image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
      }
    }
  }
  return out;
}

Image rotate(const Image& image, double degrees) {
  if (degrees == 0.0) return image;
  const cv::Point2f centre((image.width - 1) * 0.5f, (image.height - 1) * 0.5f);
  const cv::Mat m = cv::getRotationMatrix2D(centre, degrees, 1.0);
  cv::Mat out;
  cv::warpAffine(to_mat32(image), out, m, cv::Size(image.width, image.height), cv::INTER_LINEAR,
                 cv::BORDER_REPLICATE);
  Image result = from_mat32(out);
  for (float& v : result.pixels) v = std::clamp(v, 0.0f, 1.0f);
  return result;
}

torch::Tensor image_to_tensor(const Image& image) {
  auto hwc = torch::from_blob(const_cast<float*>(image.pixels.data()),
                              {image.height, image.width, image.channels}, torch::kFloat32);
  return hwc.permute({2, 0, 1}).contiguous().clone();
}

Image tensor_to_image(const torch::Tensor& chw) {
  if (chw.dim() != 3) throw ShapeError("expected a CHW tensor");
  auto hwc = chw.detach().to(torch::kCPU, torch::kFloat32).clamp(0.0, 1.0).permute({1, 2, 0}).contiguous();
  Image out(static_cast<int>(hwc.size(1)), static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(2)));
  std::copy(hwc.data_ptr<float>(), hwc.data_ptr<float>() + hwc.numel(), out.pixels.begin());
  return out;
}

}  // namespace a2f
