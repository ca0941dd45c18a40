#include "vinebud/sift.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <tuple>

namespace vinebud::sift {
namespace {

constexpr int kMaxInterpSteps = 5;
constexpr int kOrientationBins = 36;
constexpr double kOrientationPeakRatio = 0.8;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kOrientationRadiusFactor = 3.0 * kOrientationSigmaFactor;
constexpr int kDescriptorWidth = 4;
constexpr int kDescriptorBins = 8;
constexpr double kDescriptorScaleFactor = 3.0;
constexpr double kDescriptorClamp = 0.2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

// Central-difference gradient at an interior pixel, y axis pointing down.
inline void gradient(const GrayImage& img, int x, int y, double& dx, double& dy) {
  dx = img(y, x + 1) - img(y, x - 1);
  dy = img(y + 1, x) - img(y - 1, x);
}

}  // namespace

void SiftConfig::validate() const {
  if (scales_per_octave < 1) throw ArgumentError("scales_per_octave must be >= 1");
  if (!(base_sigma > 0) || !(contrast_threshold > 0) || !(edge_ratio_threshold > 0))
    throw ArgumentError("SIFT thresholds must be positive");
  if (assumed_input_sigma < 0) throw ArgumentError("assumed_input_sigma must be >= 0");
  if (octaves < 0) throw ArgumentError("octaves must be >= 0");
}

int octave_count(int width, int height, const SiftConfig& cfg) {
  const int factor = cfg.double_base_image ? 2 : 1;
  const int base = std::min(width, height) * factor;
  int n = 0;
  while ((base >> n) >= 16) ++n;
  if (cfg.octaves > 0) n = std::min(n, cfg.octaves);
  return n;
}

ScaleSpace build_scale_space(const GrayImage& img, const SiftConfig& cfg) {
  cfg.validate();
  if (std::min(img.rows(), img.cols()) < 16) throw ArgumentError("SIFT needs images of at least 16x16");

  const int s = cfg.scales_per_octave;
  const int levels = s + 3;
  const int n_oct = octave_count(static_cast<int>(img.cols()), static_cast<int>(img.rows()), cfg);

  GrayImage base;
  double input_sigma = cfg.assumed_input_sigma;
  if (cfg.double_base_image) {
    base = resample(img, ResampleMode::Up2xLinear);
    input_sigma *= 2.0;
  } else {
    base = img;
  }
  const double initial = std::sqrt(std::max(cfg.base_sigma * cfg.base_sigma - input_sigma * input_sigma, 0.01));
  base = gaussian_blur(base, initial);

  // Incremental blur taking level l-1 to level l, in octave pixels.
  std::vector<double> step(levels, 0.0);
  for (int l = 1; l < levels; ++l) {
    const double prev = cfg.base_sigma * std::pow(2.0, (l - 1) / static_cast<double>(s));
    const double total = cfg.base_sigma * std::pow(2.0, l / static_cast<double>(s));
    step[l] = std::sqrt(total * total - prev * prev);
  }

  ScaleSpace ss;
  ss.scales_per_octave = s;
  ss.base_pixel_size = cfg.double_base_image ? 0.5 : 1.0;
  ss.octaves.resize(n_oct);
  for (int o = 0; o < n_oct; ++o) {
    Octave& oct = ss.octaves[o];
    oct.levels.reserve(levels);
    oct.levels.push_back(o == 0 ? base : resample(ss.octaves[o - 1].levels[s], ResampleMode::Down2xDecimate));
    for (int l = 1; l < levels; ++l) oct.levels.push_back(gaussian_blur(oct.levels.back(), step[l]));
    for (int l = 0; l < levels; ++l)
      oct.sigmas.push_back(cfg.base_sigma * std::pow(2.0, o + l / static_cast<double>(s)));
  }
  return ss;
}

DogPyramid build_dog(const ScaleSpace& ss) {
  DogPyramid dog;
  dog.octaves.resize(ss.octaves.size());
  for (std::size_t o = 0; o < ss.octaves.size(); ++o) {
    const auto& lv = ss.octaves[o].levels;
    for (std::size_t l = 0; l + 1 < lv.size(); ++l) dog.octaves[o].push_back(lv[l + 1] - lv[l]);
  }
  return dog;
}

std::vector<CandidateKeypoint> detect_extrema(const DogPyramid& dog) {
  std::vector<CandidateKeypoint> out;
  for (std::size_t o = 0; o < dog.octaves.size(); ++o) {
    const auto& d = dog.octaves[o];
    if (d.size() < 3) continue;
    for (std::size_t l = 1; l + 1 < d.size(); ++l) {
      const GrayImage& prev = d[l - 1];
      const GrayImage& cur = d[l];
      const GrayImage& next = d[l + 1];
      const int h = static_cast<int>(cur.rows()), w = static_cast<int>(cur.cols());
      for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
          const double v = cur(y, x);
          bool is_max = true, is_min = true;
          for (int dz = 0; dz < 3 && (is_max || is_min); ++dz) {
            const GrayImage& img = dz == 0 ? prev : (dz == 1 ? cur : next);
            for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy) {
              for (int dx = -1; dx <= 1; ++dx) {
                if (dz == 1 && dx == 0 && dy == 0) continue;
                const double n = img(y + dy, x + dx);
                if (n >= v) is_max = false;
                if (n <= v) is_min = false;
              }
            }
          }
          if (is_max || is_min)
            out.push_back({static_cast<int>(o), static_cast<int>(l), x, y});
        }
      }
    }
  }
  return out;
}

std::vector<Keypoint> refine_keypoints(const std::vector<CandidateKeypoint>& candidates,
                                       const DogPyramid& dog, const ScaleSpace& ss,
                                       const SiftConfig& cfg) {
  const int s = cfg.scales_per_octave;
  const double threshold = cfg.dog_threshold();
  const double r = cfg.edge_ratio_threshold;
  std::vector<Keypoint> out;
  std::set<std::tuple<int, int, int, int>> seen;

  for (const CandidateKeypoint& c : candidates) {
    const auto& d = dog.octaves[c.octave];
    const int n_levels = static_cast<int>(d.size());
    const int h = static_cast<int>(d[0].rows()), w = static_cast<int>(d[0].cols());
    int x = c.x, y = c.y, l = c.level;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    Eigen::Vector3d grad;
    bool converged = false;
    bool lost = false;

    for (int step = 0; step < kMaxInterpSteps; ++step) {
      const GrayImage& img = d[l];
      const GrayImage& prev = d[l - 1];
      const GrayImage& next = d[l + 1];
      const double v2 = 2.0 * img(y, x);
      grad << 0.5 * (img(y, x + 1) - img(y, x - 1)), 0.5 * (img(y + 1, x) - img(y - 1, x)),
          0.5 * (next(y, x) - prev(y, x));
      const double dxx = img(y, x + 1) + img(y, x - 1) - v2;
      const double dyy = img(y + 1, x) + img(y - 1, x) - v2;
      const double dss = next(y, x) + prev(y, x) - v2;
      const double dxy = 0.25 * (img(y + 1, x + 1) - img(y + 1, x - 1) - img(y - 1, x + 1) + img(y - 1, x - 1));
      const double dxs = 0.25 * (next(y, x + 1) - next(y, x - 1) - prev(y, x + 1) + prev(y, x - 1));
      const double dys = 0.25 * (next(y + 1, x) - next(y - 1, x) - prev(y + 1, x) + prev(y - 1, x));
      Eigen::Matrix3d hess;
      hess << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
      const Eigen::FullPivLU<Eigen::Matrix3d> lu(hess);
      if (!lu.isInvertible()) {
        lost = true;
        break;
      }
      offset = -lu.solve(grad);
      if ((offset.array().abs() < 0.5).all()) {
        converged = true;
        break;
      }
      if ((offset.array().abs() > 1e6).any()) {
        lost = true;
        break;
      }
      x += static_cast<int>(std::lround(offset[0]));
      y += static_cast<int>(std::lround(offset[1]));
      l += static_cast<int>(std::lround(offset[2]));
      if (l < 1 || l > n_levels - 2 || x < 1 || x >= w - 1 || y < 1 || y >= h - 1) {
        lost = true;
        break;
      }
    }
    if (lost || !converged) continue;

    const GrayImage& img = d[l];
    const double contrast = img(y, x) + 0.5 * grad.dot(offset);
    if (std::abs(contrast) < threshold) continue;

    const double v2 = 2.0 * img(y, x);
    const double dxx = img(y, x + 1) + img(y, x - 1) - v2;
    const double dyy = img(y + 1, x) + img(y - 1, x) - v2;
    const double dxy = 0.25 * (img(y + 1, x + 1) - img(y + 1, x - 1) - img(y - 1, x + 1) + img(y - 1, x - 1));
    const double trace = dxx + dyy;
    const double det = dxx * dyy - dxy * dxy;
    if (det <= 0 || trace * trace * r >= (r + 1) * (r + 1) * det) continue;

    if (!seen.emplace(c.octave, l, x, y).second) continue;

    Keypoint kp;
    kp.octave = c.octave;
    kp.level = l;
    kp.octave_x = x + offset[0];
    kp.octave_y = y + offset[1];
    kp.octave_sigma = cfg.base_sigma * std::pow(2.0, (l + offset[2]) / s);
    const double px = ss.pixel_size(c.octave);
    kp.x = kp.octave_x * px;
    kp.y = kp.octave_y * px;
    kp.scale = kp.octave_sigma * px;
    kp.dog_value = contrast;
    out.push_back(kp);
  }
  return out;
}

std::vector<double> orientation_histogram(const Keypoint& kp, const ScaleSpace& ss) {
  std::vector<double> hist(kOrientationBins, 0.0);
  const GrayImage& img = ss.octaves[kp.octave].levels[kp.level];
  const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
  const double sigma = kOrientationSigmaFactor * kp.octave_sigma;
  const int radius = static_cast<int>(std::lround(kOrientationRadiusFactor * kp.octave_sigma));
  const int cx = static_cast<int>(std::lround(kp.octave_x));
  const int cy = static_cast<int>(std::lround(kp.octave_y));
  if (cx - radius < 1 || cy - radius < 1 || cx + radius > w - 2 || cy + radius > h - 2) return {};

  const double exp_scale = -1.0 / (2.0 * sigma * sigma);
  for (int j = -radius; j <= radius; ++j) {
    for (int i = -radius; i <= radius; ++i) {
      if (i * i + j * j > radius * radius) continue;
      double dx, dy;
      gradient(img, cx + i, cy + j, dx, dy);
      const double mag = std::sqrt(dx * dx + dy * dy);
      if (mag == 0.0) continue;
      const double angle = wrap_angle(std::atan2(dy, dx));
      int bin = static_cast<int>(std::lround(angle * kOrientationBins / kTwoPi));
      if (bin >= kOrientationBins) bin -= kOrientationBins;
      hist[bin] += mag * std::exp((i * i + j * j) * exp_scale);
    }
  }
  return hist;
}

std::vector<OrientedKeypoint> assign_orientations(const Keypoint& kp, const ScaleSpace& ss) {
  const std::vector<double> raw = orientation_histogram(kp, ss);
  if (raw.empty()) return {};
  const int n = kOrientationBins;
  auto at = [&](const std::vector<double>& v, int i) { return v[(i + n) % n]; };

  // Circular [1 4 6 4 1]/16 smoothing.
  std::vector<double> hist(n);
  for (int i = 0; i < n; ++i)
    hist[i] = (at(raw, i - 2) + at(raw, i + 2)) / 16.0 + (at(raw, i - 1) + at(raw, i + 1)) * 4.0 / 16.0 +
              raw[i] * 6.0 / 16.0;

  const double peak = *std::max_element(hist.begin(), hist.end());
  if (!(peak > 0.0)) return {};

  std::vector<OrientedKeypoint> out;
  for (int i = 0; i < n; ++i) {
    const double left = at(hist, i - 1), right = at(hist, i + 1), v = hist[i];
    if (v > left && v > right && v >= kOrientationPeakRatio * peak) {
      const double shift = 0.5 * (left - right) / (left - 2.0 * v + right);
      out.push_back({kp, wrap_angle((i + shift) * kTwoPi / n)});
    }
  }
  return out;
}

std::optional<KeypointDescriptor> compute_descriptor(const Keypoint& kp, double orientation,
                                                     const ScaleSpace& ss) {
  constexpr int d = kDescriptorWidth;
  constexpr int nb = kDescriptorBins;
  const GrayImage& img = ss.octaves[kp.octave].levels[kp.level];
  const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
  const double hist_width = kDescriptorScaleFactor * kp.octave_sigma;
  const int radius = static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5));
  const int cx = static_cast<int>(std::lround(kp.octave_x));
  const int cy = static_cast<int>(std::lround(kp.octave_y));
  if (cx - radius < 1 || cy - radius < 1 || cx + radius > w - 2 || cy + radius > h - 2) return std::nullopt;

  const double cos_t = std::cos(orientation) / hist_width;
  const double sin_t = std::sin(orientation) / hist_width;
  const double exp_scale = -1.0 / (d * d * 0.5);
  const double bins_per_rad = nb / kTwoPi;

  // Padded (d+2) x (d+2) x (nb+2) accumulator for trilinear splatting.
  std::vector<double> hist((d + 2) * (d + 2) * (nb + 2), 0.0);
  auto idx = [&](int r, int c, int o) { return (r * (d + 2) + c) * (nb + 2) + o; };

  for (int j = -radius; j <= radius; ++j) {
    for (int i = -radius; i <= radius; ++i) {
      // Rotate the sample offset into the keypoint frame.
      const double c_rot = i * cos_t + j * sin_t;
      const double r_rot = -i * sin_t + j * cos_t;
      const double rbin = r_rot + d / 2.0 - 0.5;
      const double cbin = c_rot + d / 2.0 - 0.5;
      if (rbin <= -1 || rbin >= d || cbin <= -1 || cbin >= d) continue;
      double dx, dy;
      gradient(img, cx + i, cy + j, dx, dy);
      const double mag = std::sqrt(dx * dx + dy * dy);
      if (mag == 0.0) continue;
      const double weight = std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);
      const double obin = wrap_angle(std::atan2(dy, dx) - orientation) * bins_per_rad;

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0, fc = cbin - c0, fo = obin - o0;
      if (o0 >= nb) o0 -= nb;
      const double v = mag * weight;
      for (int a = 0; a < 2; ++a) {
        const double va = v * (a ? fr : 1.0 - fr);
        for (int b = 0; b < 2; ++b) {
          const double vb = va * (b ? fc : 1.0 - fc);
          hist[idx(r0 + 1 + a, c0 + 1 + b, o0)] += vb * (1.0 - fo);
          hist[idx(r0 + 1 + a, c0 + 1 + b, o0 + 1)] += vb * fo;
        }
      }
    }
  }

  KeypointDescriptor out;
  out.keypoint = kp;
  out.orientation = wrap_angle(orientation);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const double* cell = &hist[idx(r + 1, c + 1, 0)];
      for (int o = 0; o < nb; ++o) {
        double v = cell[o];
        if (o == 0) v += cell[nb];
        out.vector[(r * d + c) * nb + o] = v;
      }
    }

  const double norm = out.vector.norm();
  if (!(norm > 0.0)) return std::nullopt;
  out.vector = (out.vector / norm).cwiseMin(kDescriptorClamp);
  out.vector.normalize();
  return out;
}

std::vector<KeypointDescriptor> extract(const GrayImage& img, const SiftConfig& cfg) {
  const ScaleSpace ss = build_scale_space(img, cfg);
  const DogPyramid dog = build_dog(ss);
  const std::vector<Keypoint> keypoints = refine_keypoints(detect_extrema(dog), dog, ss, cfg);
  std::vector<KeypointDescriptor> out;
  for (const Keypoint& kp : keypoints)
    for (const OrientedKeypoint& ok : assign_orientations(kp, ss))
      if (auto desc = compute_descriptor(ok.keypoint, ok.orientation, ss)) out.push_back(*desc);
  return out;
}

void write_csv(std::ostream& os, const std::vector<KeypointDescriptor>& descriptors) {
  os << "x,y,scale,orientation";
  for (int i = 0; i < kDescriptorSize; ++i) os << ",d" << i;
  os << '\n';
  const auto old = os.precision(17);
  for (const auto& d : descriptors) {
    os << d.keypoint.x << ',' << d.keypoint.y << ',' << d.keypoint.scale << ',' << d.orientation;
    for (int i = 0; i < kDescriptorSize; ++i) os << ',' << d.vector[i];
    os << '\n';
  }
  os.precision(old);
}

}  // namespace vinebud::sift
