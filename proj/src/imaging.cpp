#include "vinebud/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vinebud {

std::string to_string(const Rect& r) {
  return "(" + std::to_string(r.x) + "," + std::to_string(r.y) + "," + std::to_string(r.w) + "," +
         std::to_string(r.h) + ")";
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out = (0.299 * img.r.cast<double>() + 0.587 * img.g.cast<double>() +
                   0.114 * img.b.cast<double>()) /
                  255.0;
  return out.min(1.0).max(0.0);
}

Eigen::VectorXd gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  Eigen::VectorXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  return k / k.sum();
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const Eigen::VectorXd kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const Eigen::Index h = img.rows(), w = img.cols();

  // Horizontal pass over a replicated-border row buffer.
  GrayImage tmp(h, w);
  std::vector<double> row(static_cast<std::size_t>(w + 2 * radius));
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w + 2 * radius; ++x) {
      const Eigen::Index sx = std::clamp<Eigen::Index>(x - radius, 0, w - 1);
      row[x] = img(y, sx);
    }
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      const double* src = row.data() + x;
      for (int k = 0; k < kernel.size(); ++k) acc += kernel[k] * src[k];
      tmp(y, x) = acc;
    }
  }

  // Vertical pass as weighted row sums.
  GrayImage out = GrayImage::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (int k = 0; k < kernel.size(); ++k) {
      const Eigen::Index sy = std::clamp<Eigen::Index>(y + k - radius, 0, h - 1);
      out.row(y) += kernel[k] * tmp.row(sy);
    }
  }
  return out;
}

GrayImage resample(const GrayImage& img, ResampleMode mode) {
  const Eigen::Index h = img.rows(), w = img.cols();
  if (mode == ResampleMode::Down2xDecimate) {
    if (w < 2 || h < 2) throw ArgumentError("down2x needs both dimensions >= 2");
    GrayImage out(h / 2, w / 2);
    for (Eigen::Index y = 0; y < h / 2; ++y)
      for (Eigen::Index x = 0; x < w / 2; ++x) out(y, x) = img(2 * y, 2 * x);
    return out;
  }

  GrayImage out(2 * h, 2 * w);
  for (Eigen::Index y = 0; y < 2 * h; ++y) {
    const Eigen::Index y0 = std::min(y / 2, h - 1);
    const Eigen::Index y1 = std::min(y0 + 1, h - 1);
    const double fy = (y % 2 == 1 && y0 + 1 < h) ? 0.5 : 0.0;
    for (Eigen::Index x = 0; x < 2 * w; ++x) {
      const Eigen::Index x0 = std::min(x / 2, w - 1);
      const Eigen::Index x1 = std::min(x0 + 1, w - 1);
      const double fx = (x % 2 == 1 && x0 + 1 < w) ? 0.5 : 0.0;
      const double top = (1.0 - fx) * img(y0, x0) + fx * img(y0, x1);
      const double bottom = (1.0 - fx) * img(y1, x0) + fx * img(y1, x1);
      out(y, x) = (1.0 - fy) * top + fy * bottom;
    }
  }
  return out;
}

RgbImage crop(const RgbImage& img, const Rect& rect) {
  RgbImage out;
  out.r = crop(img.r, rect);
  out.g = crop(img.g, rect);
  out.b = crop(img.b, rect);
  return out;
}

RgbImage rotate90(const RgbImage& img, int quarter_turns) {
  RgbImage out;
  out.r = rotate90(img.r, quarter_turns);
  out.g = rotate90(img.g, quarter_turns);
  out.b = rotate90(img.b, quarter_turns);
  return out;
}

}  // namespace vinebud
