#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "vinebud/imaging.hpp"
#include "vinebud/svm.hpp"

namespace vinebud::testing {

// Fresh directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("vinebud-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline GrayImage constant_image(int w, int h, double v) { return GrayImage::Constant(h, w, v); }

// Gaussian blob of std `sigma` and peak `amp` on a `base` background.
inline GrayImage blob_image(int w, int h, double cx, double cy, double sigma, double amp = 0.8, double base = 0.1) {
  GrayImage img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx, dy = y - cy;
      img(y, x) = base + amp * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
    }
  return img;
}

// Random smooth texture: a sum of Gaussian spots with mixed signs.
inline GrayImage texture_image(int w, int h, std::uint64_t seed, int spots = 60, double base = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0, w), uy(0, h), us(1.5, 4.0), ua(0.1, 0.3);
  GrayImage img = GrayImage::Constant(h, w, base);
  for (int s = 0; s < spots; ++s) {
    const double cx = ux(rng), cy = uy(rng), sig = us(rng), amp = (s % 2 ? 1 : -1) * ua(rng);
    const int r = static_cast<int>(std::ceil(4 * sig));
    for (int y = std::max(0, int(cy) - r); y <= std::min(h - 1, int(cy) + r); ++y)
      for (int x = std::max(0, int(cx) - r); x <= std::min(w - 1, int(cx) + r); ++x) {
        const double dx = x - cx, dy = y - cy;
        img(y, x) += amp * std::exp(-(dx * dx + dy * dy) / (2 * sig * sig));
      }
  }
  return img.max(0.0).min(1.0);
}

// Uniform [0, 1) from the top 53 bits; portable across standard libraries.
inline double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Disk of buds inside an annulus of non-buds. With this draw (trial 249) the
// 5-fold CV error (fold seed 3) is zero at gamma 2^-9, C 2^6 and positive elsewhere
// on the default grid; found by an offline sweep over trials.
inline void ring_fixture(RowMatrix<double>& x, std::vector<svm::Label>& y) {
  const int n = 20;
  std::mt19937_64 rng(249);
  const double scale = std::pow(2.0, -2 + 8 * unit(rng));
  const double r_in = 0.3 + 0.5 * unit(rng), gap = 0.05 + 0.5 * unit(rng);
  x.resize(2 * n, 2);
  y.clear();
  for (int i = 0; i < 2 * n; ++i) {
    const double t = 2 * M_PI * (i % n) / n + 0.1 * unit(rng);
    const double r = i < n ? r_in * std::sqrt(unit(rng)) : r_in + gap + 0.5 * unit(rng);
    x(i, 0) = scale * r * std::cos(t);
    x(i, 1) = scale * r * std::sin(t);
    y.push_back(i < n ? svm::Label::Bud : svm::Label::NonBud);
  }
}

}  // namespace vinebud::testing
