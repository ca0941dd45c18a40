#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>

#include "vinebud/errors.hpp"

namespace vinebud {

// Row-major raster: rows == height, cols == width; element (y, x).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Single-channel intensities. Images produced by to_grayscale lie in [0, 1];
// derived planes (DoG, gradients) reuse the type without that bound.
using GrayImage = Plane<double>;

// 1 marks a bud pixel.
using Mask = Plane<std::uint8_t>;

struct RgbImage {
  Plane<std::uint8_t> r, g, b;

  RgbImage() = default;
  RgbImage(int width, int height) : r(height, width), g(height, width), b(height, width) {
    r.setZero();
    g.setZero();
    b.setZero();
  }

  int width() const { return static_cast<int>(r.cols()); }
  int height() const { return static_cast<int>(r.rows()); }
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
  bool inside(int width, int height) const {
    return w >= 1 && h >= 1 && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

std::string to_string(const Rect& r);

GrayImage to_grayscale(const RgbImage& img);

// Separable Gaussian, radius ceil(4 sigma), border replication.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

// Normalised 1-D kernel used by gaussian_blur (length 2*ceil(4 sigma)+1).
Eigen::VectorXd gaussian_kernel(double sigma);

enum class ResampleMode { Up2xLinear, Down2xDecimate };

// Up2x maps output index i to source coordinate i/2 (clamped at the far edge);
// Down2x keeps every second row and column, giving floor(n/2) samples.
GrayImage resample(const GrayImage& img, ResampleMode mode);

template <typename Scalar>
Plane<Scalar> crop(const Plane<Scalar>& img, const Rect& rect) {
  if (!rect.inside(static_cast<int>(img.cols()), static_cast<int>(img.rows())))
    throw ArgumentError("crop rect " + to_string(rect) + " outside " + std::to_string(img.cols()) +
                        "x" + std::to_string(img.rows()) + " image");
  return img.block(rect.y, rect.x, rect.h, rect.w);
}

RgbImage crop(const RgbImage& img, const Rect& rect);

// Counter-clockwise rotation by quarter_turns * 90 degrees (any integer).
template <typename Scalar>
Plane<Scalar> rotate90(const Plane<Scalar>& img, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  const Eigen::Index h = img.rows(), w = img.cols();
  switch (k) {
    case 0:
      return img;
    case 1: {
      // (x, y) -> (y, w-1-x)
      Plane<Scalar> out(w, h);
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) out(w - 1 - x, y) = img(y, x);
      return out;
    }
    case 2:
      return img.reverse();
    default: {
      Plane<Scalar> out(w, h);
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) out(x, h - 1 - y) = img(y, x);
      return out;
    }
  }
}

RgbImage rotate90(const RgbImage& img, int quarter_turns);

}  // namespace vinebud
