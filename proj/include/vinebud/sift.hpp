#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <vector>

#include "vinebud/imaging.hpp"

namespace vinebud::sift {

inline constexpr int kDescriptorSize = 128;
using Descriptor = Eigen::Matrix<double, kDescriptorSize, 1>;

struct SiftConfig {
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  // Compared against |DoG| / scales_per_octave, intensities in [0,1].
  double contrast_threshold = 0.04;
  double edge_ratio_threshold = 10.0;
  bool double_base_image = true;
  // Blur already present in the raw photograph.
  double assumed_input_sigma = 0.5;
  // 0 derives the count from the image size (top octave min dimension >= 16).
  int octaves = 0;

  void validate() const;
  double dog_threshold() const { return contrast_threshold / scales_per_octave; }
};

struct Octave {
  std::vector<GrayImage> levels;
  // Absolute sigma of each level in the octave-0 sampling frame:
  // base_sigma * 2^(o + l / scales_per_octave).
  std::vector<double> sigmas;
};

struct ScaleSpace {
  std::vector<Octave> octaves;
  int scales_per_octave = 3;
  // Input-image pixels per octave-0 pixel (0.5 when the base image is doubled).
  double base_pixel_size = 0.5;

  double pixel_size(int octave) const { return base_pixel_size * static_cast<double>(1 << octave); }
};

struct DogPyramid {
  // octaves[o][l] = levels[l+1] - levels[l]
  std::vector<std::vector<GrayImage>> octaves;
};

struct CandidateKeypoint {
  int octave = 0;
  int level = 0;  // DoG level, 1..scales_per_octave
  int x = 0;      // octave-frame pixel
  int y = 0;
  friend bool operator==(const CandidateKeypoint&, const CandidateKeypoint&) = default;
};

struct Keypoint {
  double x = 0.0;      // input-image frame
  double y = 0.0;
  int octave = 0;
  double scale = 0.0;  // sigma in the input-image frame
  double dog_value = 0.0;
  // Where the keypoint lives in the pyramid.
  int level = 0;               // nearest Gaussian level
  double octave_x = 0.0;       // octave-frame coordinates
  double octave_y = 0.0;
  double octave_sigma = 0.0;   // sigma in octave-frame pixels
};

struct KeypointDescriptor {
  Keypoint keypoint;
  double orientation = 0.0;  // radians in [0, 2pi)
  Descriptor vector = Descriptor::Zero();
};

int octave_count(int width, int height, const SiftConfig& cfg);

ScaleSpace build_scale_space(const GrayImage& img, const SiftConfig& cfg);
DogPyramid build_dog(const ScaleSpace& ss);

// Pixels strictly above (or below) all 26 neighbours, for DoG levels
// 1..n-2 and excluding a one-pixel image border.
std::vector<CandidateKeypoint> detect_extrema(const DogPyramid& dog);

std::vector<Keypoint> refine_keypoints(const std::vector<CandidateKeypoint>& candidates,
                                       const DogPyramid& dog, const ScaleSpace& ss,
                                       const SiftConfig& cfg);

struct OrientedKeypoint {
  Keypoint keypoint;
  double orientation = 0.0;
};

// Empty when the neighbourhood leaves the image or holds no gradient.
std::vector<OrientedKeypoint> assign_orientations(const Keypoint& kp, const ScaleSpace& ss);

// Raw 36-bin gradient histogram used by assign_orientations (before peak search).
std::vector<double> orientation_histogram(const Keypoint& kp, const ScaleSpace& ss);

// Empty when the rotated window leaves the image or holds no gradient.
std::optional<KeypointDescriptor> compute_descriptor(const Keypoint& kp, double orientation,
                                                     const ScaleSpace& ss);

std::vector<KeypointDescriptor> extract(const GrayImage& img, const SiftConfig& cfg = {});

// One row per descriptor: x,y,scale,orientation followed by the 128 values.
void write_csv(std::ostream& os, const std::vector<KeypointDescriptor>& descriptors);

}  // namespace vinebud::sift
