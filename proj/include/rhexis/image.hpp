// ============================================================================
// image.hpp - planar float RGB images, 8-bit storage, PNG io
// ============================================================================

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "rhexis/common.hpp"

namespace rhexis {

// RGB image, planar layout [c][y][x], values in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // 3 * height * width

  Image() = default;
  Image(int w, int h, float fill = 0.f)
      : width(w), height(h), data(static_cast<size_t>(3) * w * h, fill) {}

  float& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  size_t plane_size() const { return static_cast<size_t>(width) * height; }
  bool empty() const { return data.empty(); }

  void clamp01() {
    for (float& v : data) v = std::clamp(v, 0.f, 1.f);
  }
};

// Compact 8-bit storage for in-memory corpora.
struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // planar, 3 * height * width

  ImageU8() = default;
  ImageU8(int w, int h)
      : width(w), height(h), data(static_cast<size_t>(3) * w * h, 0) {}
  size_t plane_size() const { return static_cast<size_t>(width) * height; }
  bool empty() const { return data.empty(); }
  std::uint8_t& at(int c, int y, int x) {
    return data[c * plane_size() + static_cast<size_t>(y) * width + x];
  }
  std::uint8_t at(int c, int y, int x) const {
    return data[c * plane_size() + static_cast<size_t>(y) * width + x];
  }
};

inline ImageU8 quantize(const Image& img) {
  ImageU8 out(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i) {
    float v = std::clamp(img.data[i], 0.f, 1.f);
    out.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.f));
  }
  return out;
}

inline Image dequantize(const ImageU8& img) {
  Image out(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i)
    out.data[i] = static_cast<float>(img.data[i]) / 255.f;
  return out;
}

// ---------------------------------------------------------------------------
// OpenCV bridge (cv::Mat is 8-bit BGR interleaved)
// ---------------------------------------------------------------------------

inline cv::Mat to_mat(const ImageU8& img) {
  cv::Mat m(img.height, img.width, CV_8UC3);
  const size_t ps = img.plane_size();
  for (int y = 0; y < img.height; ++y) {
    auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) {
      const size_t i = static_cast<size_t>(y) * img.width + x;
      row[x] = cv::Vec3b(img.data[2 * ps + i], img.data[ps + i], img.data[i]);
    }
  }
  return m;
}

inline ImageU8 from_mat(const cv::Mat& m) {
  CV_Assert(m.type() == CV_8UC3);
  ImageU8 img(m.cols, m.rows);
  const size_t ps = img.plane_size();
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x) {
      const size_t i = static_cast<size_t>(y) * img.width + x;
      img.data[i] = row[x][2];
      img.data[ps + i] = row[x][1];
      img.data[2 * ps + i] = row[x][0];
    }
  }
  return img;
}

inline void write_png(const std::string& path, const ImageU8& img) {
  if (!cv::imwrite(path, to_mat(img), {cv::IMWRITE_PNG_COMPRESSION, 1}))
    throw DataError("failed to write " + path);
}

inline ImageU8 read_png(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
  if (m.empty()) throw DataError("failed to decode " + path);
  return from_mat(m);
}

// Area-averaging resize; operates on float images to avoid double quantization.
inline Image resize(const Image& img, int w, int h) {
  if (img.width == w && img.height == h) return img;
  cv::Mat src(img.height, img.width, CV_32FC3);
  const size_t ps = img.plane_size();
  for (int y = 0; y < img.height; ++y) {
    auto* row = src.ptr<cv::Vec3f>(y);
    for (int x = 0; x < img.width; ++x) {
      const size_t i = static_cast<size_t>(y) * img.width + x;
      row[x] = cv::Vec3f(img.data[i], img.data[ps + i], img.data[2 * ps + i]);
    }
  }
  cv::Mat dst;
  const int interp = (w < img.width) ? cv::INTER_AREA : cv::INTER_LINEAR;
  cv::resize(src, dst, cv::Size(w, h), 0, 0, interp);
  Image out(w, h);
  const size_t ops = out.plane_size();
  for (int y = 0; y < h; ++y) {
    const auto* row = dst.ptr<cv::Vec3f>(y);
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      out.data[i] = row[x][0];
      out.data[ops + i] = row[x][1];
      out.data[2 * ops + i] = row[x][2];
    }
  }
  out.clamp01();
  return out;
}

inline Image crop(const Image& img, int x0, int y0, int w, int h) {
  Image out(w, h);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
  return out;
}

}  // namespace rhexis
