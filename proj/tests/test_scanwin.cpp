#include <doctest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "vinebud/features.hpp"
#include "vinebud/scanwin.hpp"

using namespace vinebud;
using namespace vinebud::scanwin;

namespace {

// Truncated Gaussian spots within `radius` of (cx, cy); zero contribution
// beyond radius + 4 sigma.
void add_texture(GrayImage& img, double cx, double cy, double radius, std::uint64_t seed, int spots = 40) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI), rad(0, 1), sig(1.5, 3.5), amp(0.15, 0.35);
  for (int s = 0; s < spots; ++s) {
    const double a = ang(rng), r = radius * std::sqrt(rad(rng)), sg = sig(rng), am = (s % 2 ? 1 : -1) * amp(rng);
    const double sx = cx + r * std::cos(a), sy = cy + r * std::sin(a);
    const int reach = static_cast<int>(std::ceil(4 * sg));
    for (int y = int(sy) - reach; y <= int(sy) + reach; ++y)
      for (int x = int(sx) - reach; x <= int(sx) + reach; ++x) {
        if (x < 0 || y < 0 || x >= img.cols() || y >= img.rows()) continue;
        const double dx = x - sx, dy = y - sy;
        img(y, x) += am * std::exp(-(dx * dx + dy * dy) / (2 * sg * sg));
      }
  }
}

struct Classifier {
  bof::Vocabulary vocab;
  svm::SvmModel model;
};

// Vocabulary from a textured image; hand-built RBF model over two bins so the
// decision depends on the histogram and a zero histogram gives exactly the bias.
Classifier make_classifier() {
  Classifier c;
  const auto desc = sift::extract(testing::texture_image(160, 160, 4), {});
  KMeansConfig km;
  km.k = 6;
  km.seed = 2;
  c.vocab = bof::build_vocabulary(bof::stack(desc), km).vocabulary;
  c.model.support_vectors = RowMatrix<double>::Zero(2, 6);
  c.model.support_vectors(0, 0) = 1.0;
  c.model.support_vectors(1, 1) = 1.0;
  c.model.dual_coefs.resize(2);
  c.model.dual_coefs << 1.0, -1.0;
  c.model.gamma = 2.0;
  c.model.bias = -0.05;
  return c;
}

const Classifier& classifier() {
  static const Classifier c = make_classifier();
  return c;
}

// Support of the descriptor window around a keypoint, in input pixels.
double support_radius(const sift::Keypoint& kp) { return 3.0 * std::sqrt(2.0) * 2.5 * kp.scale + 3.0; }

}  // namespace

TEST_CASE("window proposal counts") {
  ScanConfig cfg;
  cfg.window_w = cfg.window_h = 100;
  cfg.stride_x = cfg.stride_y = 100;
  const auto nine = propose_windows(300, 300, cfg);
  CHECK(nine.size() == 9);
  CHECK(nine[1] == Rect{100, 0, 100, 100});
  CHECK(nine[3] == Rect{0, 100, 100, 100});

  const auto twelve = propose_windows(301, 300, cfg);
  REQUIRE(twelve.size() == 12);
  CHECK(twelve[3] == Rect{201, 0, 100, 100});

  // Stride past the image: top-left window plus clamped edge windows.
  cfg.stride_x = cfg.stride_y = 1000;
  const auto wide = propose_windows(250, 180, cfg);
  REQUIRE(wide.size() == 4);
  CHECK(wide[0] == Rect{0, 0, 100, 100});
  CHECK(wide[1] == Rect{150, 0, 100, 100});
  CHECK(wide[2] == Rect{0, 80, 100, 100});
  CHECK(wide[3] == Rect{150, 80, 100, 100});
  CHECK(propose_windows(100, 100, cfg).size() == 1);

  // Scales run one after another.
  cfg.stride_x = cfg.stride_y = 100;
  cfg.scales = {1.0, 1.5};
  const auto multi = propose_windows(300, 300, cfg);
  REQUIRE(multi.size() == 9 + 9);
  CHECK(multi[9] == Rect{0, 0, 150, 150});
  CHECK(multi[10] == Rect{100, 0, 150, 150});
  CHECK(multi[11] == Rect{150, 0, 150, 150});
  CHECK(multi[17] == Rect{150, 150, 150, 150});
}

TEST_CASE("window proposal errors") {
  ScanConfig cfg;
  CHECK_THROWS_AS(propose_windows(100, 300, cfg), ArgumentError);
  cfg.stride_x = 0;
  CHECK_THROWS_AS(propose_windows(300, 300, cfg), ArgumentError);
  cfg = {};
  cfg.scales = {};
  CHECK_THROWS_AS(propose_windows(300, 300, cfg), ArgumentError);
  cfg.scales = {-1.0};
  CHECK_THROWS_AS(propose_windows(300, 300, cfg), ArgumentError);
  cfg.scales = {3.0};
  CHECK_THROWS_AS(propose_windows(300, 300, cfg), ArgumentError);
}

TEST_CASE("windows cover every pixel when the stride does not exceed the window") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(20, 260), win(5, 60);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = dim(rng), h = dim(rng);
    ScanConfig cfg;
    cfg.window_w = std::min(win(rng), w);
    cfg.window_h = std::min(win(rng), h);
    cfg.stride_x = std::uniform_int_distribution<int>(1, cfg.window_w)(rng);
    cfg.stride_y = std::uniform_int_distribution<int>(1, cfg.window_h)(rng);
    const auto rects = propose_windows(w, h, cfg);
    Plane<int> hits = Plane<int>::Zero(h, w);
    for (const auto& r : rects) {
      REQUIRE(r.inside(w, h));
      REQUIRE(r.w == cfg.window_w);
      REQUIRE(r.h == cfg.window_h);
      hits.block(r.y, r.x, r.h, r.w) += 1;
    }
    REQUIRE(hits.minCoeff() >= 1);
    // Row-major order.
    for (std::size_t i = 1; i < rects.size(); ++i)
      REQUIRE((rects[i].y > rects[i - 1].y || (rects[i].y == rects[i - 1].y && rects[i].x > rects[i - 1].x)));
  }
}

TEST_CASE("blank image scans as non-bud everywhere") {
  const auto& c = classifier();
  const auto out = scan_classify(testing::constant_image(256, 192, 0.4), c.vocab, c.model, {});
  const auto rects = propose_windows(256, 192, {});
  REQUIRE(out.size() == rects.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].rect == rects[i]);
    CHECK(out[i].label == svm::Label::NonBud);
    CHECK(out[i].keypoint_count == 0);
    CHECK(out[i].decision == c.model.bias);
  }
}

TEST_CASE("one textured blob lights up one window") {
  const auto& c = classifier();
  GrayImage img = testing::constant_image(256, 256, 0.5);
  add_texture(img, 64, 64, 22, 9);
  ScanConfig cfg;
  cfg.stride_x = cfg.stride_y = 128;
  const auto out = scan_classify(img, c.vocab, c.model, cfg);
  REQUIRE(out.size() == 4);

  // Oracle: keypoints of the full image, assigned by center.
  const auto all = sift::extract(img, {});
  REQUIRE(!all.empty());
  for (const auto& w : out) {
    std::size_t inside = 0;
    for (const auto& d : all) inside += w.rect.contains(int(std::floor(d.keypoint.x)), int(std::floor(d.keypoint.y)));
    CHECK(w.keypoint_count == inside);
  }
  CHECK(out[0].keypoint_count == all.size());
  for (int i = 1; i < 4; ++i) {
    CHECK(out[i].keypoint_count == 0);
    CHECK(out[i].decision == c.model.bias);
  }
  CHECK(out[0].decision != c.model.bias);
}

TEST_CASE("shared extraction matches per-crop classification on interior windows") {
  const auto& c = classifier();
  GrayImage img = testing::constant_image(320, 320, 0.5);
  add_texture(img, 150, 165, 18, 31);
  add_texture(img, 60, 250, 12, 32, 20);

  // Fixed octave count and crop offsets on the coarsest sampling grid so the
  // crop's pyramid is a sub-grid of the full one.
  sift::SiftConfig sc;
  sc.octaves = 4;
  ScanConfig cfg;
  cfg.window_w = cfg.window_h = 160;
  cfg.stride_x = cfg.stride_y = 16;

  const auto out = scan_classify(img, c.vocab, c.model, cfg, sc);
  const auto all = sift::extract(img, sc);
  REQUIRE(all.size() > 10);
  int compared = 0;
  for (const auto& w : out) {
    REQUIRE(w.rect.x % 8 == 0);
    REQUIRE(w.rect.y % 8 == 0);
    // Interior: every keypoint in the window has its descriptor support inside it.
    bool interior = true;
    std::size_t count = 0;
    for (const auto& d : all) {
      const auto& kp = d.keypoint;
      if (!(kp.x >= w.rect.x && kp.x < w.rect.x + w.rect.w && kp.y >= w.rect.y && kp.y < w.rect.y + w.rect.h)) continue;
      ++count;
      const double r = support_radius(kp);
      interior = interior && kp.x - r >= w.rect.x && kp.x + r < w.rect.x + w.rect.w && kp.y - r >= w.rect.y &&
                 kp.y + r < w.rect.y + w.rect.h;
    }
    REQUIRE(w.keypoint_count == count);
    if (!interior || count == 0) continue;
    ++compared;
    const auto crop = features::classify_patch(vinebud::crop(img, w.rect), c.vocab, c.model, sc);
    CHECK(crop.keypoints == w.keypoint_count);
    CHECK(crop.label == w.label);
    CHECK(crop.decision == doctest::Approx(w.decision).epsilon(1e-9));
  }
  CHECK(compared >= 10);
}

TEST_CASE("scan results do not depend on the worker count") {
  const auto& c = classifier();
  const GrayImage img = testing::texture_image(300, 260, 12, 200);
  ScanConfig cfg;
  cfg.window_w = cfg.window_h = 96;
  cfg.stride_x = 40;
  cfg.stride_y = 50;
  cfg.scales = {1.0, 1.5};
  const auto one = scan_classify(img, c.vocab, c.model, cfg, {}, 1);
  const auto three = scan_classify(img, c.vocab, c.model, cfg, {}, 3);
  REQUIRE(one.size() == three.size());
  std::size_t with_points = 0;
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].rect == three[i].rect);
    CHECK(one[i].label == three[i].label);
    CHECK(one[i].decision == three[i].decision);
    CHECK(one[i].keypoint_count == three[i].keypoint_count);
    with_points += one[i].keypoint_count > 0;
  }
  CHECK(with_points == one.size());

  std::ostringstream a, b;
  write_windows(a, one);
  write_windows(b, three);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("# vinebud scan v1\nx\ty\tw\th\tlabel\tdecision\tkeypoints\n0\t0\t96\t96\t", 0) == 0);
}

TEST_CASE("overlay outlines bud windows") {
  const GrayImage img = testing::constant_image(50, 40, 0.5);
  std::vector<ClassifiedWindow> ws{{{10, 5, 20, 10}, svm::Label::Bud, 1.0, 3},
                                   {{0, 20, 10, 10}, svm::Label::NonBud, -1.0, 0}};
  const RgbImage out = overlay(img, ws);
  CHECK(out.width() == 50);
  CHECK(out.height() == 40);
  CHECK(out.r(5, 10) == 255);
  CHECK(out.g(5, 10) == 0);
  CHECK(out.r(14, 29) == 255);
  CHECK(out.r(10, 20) == out.g(10, 20));
  CHECK(out.r(20, 0) == out.g(20, 0));
}
