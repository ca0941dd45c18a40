#pragma once

#include <iosfwd>
#include <vector>

#include "vinebud/bof.hpp"
#include "vinebud/imaging.hpp"
#include "vinebud/sift.hpp"
#include "vinebud/svm.hpp"

namespace vinebud::scanwin {

struct ScanConfig {
  int window_w = 128;
  int window_h = 128;
  int stride_x = 64;
  int stride_y = 64;
  // Window size multipliers; stride stays in pixels.
  std::vector<double> scales{1.0};

  void validate() const;
};

struct ClassifiedWindow {
  Rect rect;
  svm::Label label = svm::Label::NonBud;
  double decision = 0.0;
  std::size_t keypoint_count = 0;
};

// Row-major windows per scale; when the stride does not land on the far edge
// an extra column/row flush with it is appended.
std::vector<Rect> propose_windows(int width, int height, const ScanConfig& cfg);

// One SIFT pass over the whole image; each window is encoded from the
// descriptors whose keypoint center lies inside it.
std::vector<ClassifiedWindow> scan_classify(const GrayImage& image, const bof::Vocabulary& vocab,
                                            const svm::SvmModel& model, const ScanConfig& cfg,
                                            const sift::SiftConfig& sift_cfg = {}, int workers = 1);

// x, y, w, h, label, decision, keypoints.
void write_windows(std::ostream& os, const std::vector<ClassifiedWindow>& windows);

// Input image with bud-labelled windows outlined in red.
RgbImage overlay(const GrayImage& image, const std::vector<ClassifiedWindow>& windows);

}  // namespace vinebud::scanwin
