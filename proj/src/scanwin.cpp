#include "vinebud/scanwin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "vinebud/features.hpp"
#include "vinebud/image_io.hpp"

namespace vinebud::scanwin {
namespace {

std::vector<int> positions(int extent, int window, int stride) {
  std::vector<int> out;
  for (int p = 0; p + window <= extent; p += stride) out.push_back(p);
  if (out.back() + window < extent) out.push_back(extent - window);
  return out;
}

}  // namespace

void ScanConfig::validate() const {
  if (window_w < 1 || window_h < 1) throw ArgumentError("scan window must be at least 1x1");
  if (stride_x < 1 || stride_y < 1) throw ArgumentError("scan stride must be >= 1");
  if (scales.empty()) throw ArgumentError("scan needs at least one scale");
  for (double s : scales)
    if (!(s > 0)) throw ArgumentError("scan scales must be positive");
}

std::vector<Rect> propose_windows(int width, int height, const ScanConfig& cfg) {
  cfg.validate();
  std::vector<Rect> out;
  for (double s : cfg.scales) {
    const int w = static_cast<int>(std::lround(cfg.window_w * s));
    const int h = static_cast<int>(std::lround(cfg.window_h * s));
    if (w < 1 || h < 1 || w > width || h > height)
      throw ArgumentError("window " + std::to_string(w) + "x" + std::to_string(h) + " does not fit a " +
                          std::to_string(width) + "x" + std::to_string(height) + " image");
    const auto xs = positions(width, w, cfg.stride_x);
    const auto ys = positions(height, h, cfg.stride_y);
    for (int y : ys)
      for (int x : xs) out.push_back(Rect{x, y, w, h});
  }
  return out;
}

std::vector<ClassifiedWindow> scan_classify(const GrayImage& image, const bof::Vocabulary& vocab,
                                            const svm::SvmModel& model, const ScanConfig& cfg,
                                            const sift::SiftConfig& sift_cfg, int workers) {
  const auto rects = propose_windows(static_cast<int>(image.cols()), static_cast<int>(image.rows()), cfg);
  const auto all = sift::extract(image, sift_cfg);
  // Keypoints sorted by x so each window scans only its column band.
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return all[a].keypoint.x < all[b].keypoint.x; });
  std::vector<double> xs(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) xs[i] = all[order[i]].keypoint.x;

  std::vector<ClassifiedWindow> out(rects.size());
  features::parallel_for(rects.size(), workers, [&](std::size_t w) {
    const Rect& r = rects[w];
    const auto lo = std::lower_bound(xs.begin(), xs.end(), static_cast<double>(r.x)) - xs.begin();
    const auto hi = std::lower_bound(xs.begin(), xs.end(), static_cast<double>(r.x + r.w)) - xs.begin();
    // Preserve extraction order inside the window.
    std::vector<std::size_t> picked;
    for (auto i = lo; i < hi; ++i) {
      const auto& kp = all[order[static_cast<std::size_t>(i)]].keypoint;
      if (kp.y >= r.y && kp.y < r.y + r.h) picked.push_back(order[static_cast<std::size_t>(i)]);
    }
    std::sort(picked.begin(), picked.end());
    features::PatchDescriptors desc;
    desc.reserve(picked.size());
    for (std::size_t i : picked) desc.push_back(all[i]);
    const auto c = features::classify_descriptors(desc, vocab, model);
    out[w] = ClassifiedWindow{r, c.label, c.decision, c.keypoints};
  });
  return out;
}

void write_windows(std::ostream& os, const std::vector<ClassifiedWindow>& windows) {
  os << "# vinebud scan v1\n";
  os << "x\ty\tw\th\tlabel\tdecision\tkeypoints\n";
  char buf[32];
  for (const auto& w : windows) {
    std::snprintf(buf, sizeof buf, "%.6f", w.decision);
    os << w.rect.x << '\t' << w.rect.y << '\t' << w.rect.w << '\t' << w.rect.h << '\t'
       << (w.label == svm::Label::Bud ? "bud" : "non-bud") << '\t' << buf << '\t' << w.keypoint_count << '\n';
  }
}

RgbImage overlay(const GrayImage& image, const std::vector<ClassifiedWindow>& windows) {
  RgbImage out = to_rgb(image);
  auto paint = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= out.width() || y >= out.height()) return;
    out.r(y, x) = 255;
    out.g(y, x) = 0;
    out.b(y, x) = 0;
  };
  for (const auto& w : windows) {
    if (w.label != svm::Label::Bud) continue;
    const Rect& r = w.rect;
    for (int x = r.x; x < r.x + r.w; ++x) {
      paint(x, r.y);
      paint(x, r.y + r.h - 1);
    }
    for (int y = r.y; y < r.y + r.h; ++y) {
      paint(r.x, y);
      paint(r.x + r.w - 1, y);
    }
  }
  return out;
}

}  // namespace vinebud::scanwin
