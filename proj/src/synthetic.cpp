#include "vinebud/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vinebud/image_io.hpp"

namespace vinebud::synthetic {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void clamp01(GrayImage& img) { img = img.max(0.0).min(1.0); }

void add_noise(GrayImage& img, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] += n(rng);
}

std::string padded(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04d", prefix, i);
  return buf;
}

corpus::Polygon rect_polygon(const Rect& r) {
  return {{double(r.x), double(r.y)},
          {double(r.x + r.w), double(r.y)},
          {double(r.x + r.w), double(r.y + r.h)},
          {double(r.x), double(r.y + r.h)}};
}

// Knots: a small dark spot cluster on bark, deliberately blob-like.
GrayImage knot_image(int size, std::mt19937_64& rng) {
  GrayImage img = bark(size, size, rng);
  const int clusters = uniform_int(rng, 3, 5);
  for (int c = 0; c < clusters; ++c) {
    const double cx = uniform(rng, 40, size - 40), cy = uniform(rng, 40, size - 40);
    add_spot(img, cx, cy, uniform(rng, 7, 12), -uniform(rng, 0.15, 0.3));
    for (int s = 0; s < 20; ++s)
      add_spot(img, cx + uniform(rng, -20, 20), cy + uniform(rng, -20, 20), uniform(rng, 1.2, 3.0),
               (s % 2 ? 1.0 : -1.0) * uniform(rng, 0.1, 0.3));
  }
  return img;
}

}  // namespace

corpus::Polygon bud_outline(double cx, double cy, double rx, double ry, std::mt19937_64& rng) {
  const double p1 = uniform(rng, 0, kTwoPi), p2 = uniform(rng, 0, kTwoPi), tilt = uniform(rng, 0, kTwoPi);
  const double a1 = uniform(rng, 0.03, 0.08), a2 = uniform(rng, 0.02, 0.05);
  corpus::Polygon poly;
  constexpr int kVertices = 64;
  for (int i = 0; i < kVertices; ++i) {
    const double t = kTwoPi * i / kVertices;
    const double m = 1.0 + a1 * std::sin(3 * t + p1) + a2 * std::sin(5 * t + p2);
    const double ex = rx * m * std::cos(t), ey = ry * m * std::sin(t);
    poly.push_back({cx + ex * std::cos(tilt) - ey * std::sin(tilt), cy + ex * std::sin(tilt) + ey * std::cos(tilt)});
  }
  return poly;
}

void add_spot(GrayImage& img, double cx, double cy, double sigma, double amplitude) {
  const int r = static_cast<int>(std::ceil(3 * sigma));
  const int x0 = std::max(0, static_cast<int>(cx) - r), x1 = std::min<int>(img.cols() - 1, static_cast<int>(cx) + r);
  const int y0 = std::max(0, static_cast<int>(cy) - r), y1 = std::min<int>(img.rows() - 1, static_cast<int>(cy) + r);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      img(y, x) += amplitude * std::exp(-d2 / (2 * sigma * sigma));
    }
}

GrayImage bark(int width, int height, std::mt19937_64& rng) {
  GrayImage img(height, width);
  const double level = uniform(rng, 0.45, 0.6), period = uniform(rng, 40, 80), phase = uniform(rng, 0, kTwoPi);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) img(y, x) = level + 0.04 * std::sin(kTwoPi * x / period + phase + 0.01 * y);
  GrayImage grain = GrayImage::Zero(height, width);
  add_noise(grain, 0.08, rng);
  img += gaussian_blur(grain, 4.0);
  return img;
}

void paint_bud(GrayImage& img, const corpus::Polygon& outline, std::mt19937_64& rng) {
  const Rect box = bounding_rect(outline);
  const Mask m = corpus::rasterize_polygon(outline, box);
  GrayImage tex(box.h, box.w);
  const double cx = box.w / 2.0, cy = box.h / 2.0;
  const double base = uniform(rng, 0.3, 0.45);
  for (int y = 0; y < box.h; ++y)
    for (int x = 0; x < box.w; ++x) {
      const double dx = (x + 0.5 - cx) / cx, dy = (y + 0.5 - cy) / cy;
      tex(y, x) = base + 0.18 * std::max(0.0, 1.0 - dx * dx - dy * dy);
    }
  const int spots = uniform_int(rng, 70, 110);
  const double contrast = uniform(rng, 0.35, 1.0);
  for (int s = 0; s < spots; ++s) {
    int sx, sy;
    do {
      sx = uniform_int(rng, 0, box.w - 1);
      sy = uniform_int(rng, 0, box.h - 1);
    } while (m(sy, sx) == 0);
    add_spot(tex, sx, sy, uniform(rng, 1.2, 3.0), (s % 2 ? contrast : -contrast) * uniform(rng, 0.12, 0.32));
  }
  for (int y = 0; y < box.h; ++y)
    for (int x = 0; x < box.w; ++x) {
      const int ix = box.x + x, iy = box.y + y;
      if (m(y, x) != 0 && ix >= 0 && iy >= 0 && ix < img.cols() && iy < img.rows()) img(iy, ix) = tex(y, x);
    }
}

GrayImage stripes(int width, int height, double period, double angle, double contrast) {
  GrayImage img(height, width);
  const double c = std::cos(angle), s = std::sin(angle);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) img(y, x) = 0.5 + contrast * std::sin(kTwoPi * (x * c + y * s) / period);
  return img;
}

GrayImage plaid(int width, int height, double period, double angle, double contrast) {
  GrayImage a = stripes(width, height, period, angle, contrast / 2);
  GrayImage b = stripes(width, height, period * 1.3, angle + std::numbers::pi / 2, contrast / 2);
  return a + b - 0.5;
}

GrayImage flat(int width, int height, double level, double gradient) {
  GrayImage img(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) img(y, x) = level + gradient * (x + y) / (width + height);
  return img;
}

corpus::Corpus generate_desk_corpus(const std::filesystem::path& root, const DeskCorpusConfig& cfg) {
  if (cfg.buds < 1 || cfg.non_buds < 1) throw ArgumentError("desk corpus needs at least one patch per class");
  if (cfg.image_size < 2 * cfg.non_bud_patch + 16 || cfg.image_size < 3 * corpus::kMinBudSide)
    throw ArgumentError("desk corpus image size too small for its patches");
  namespace fs = std::filesystem;
  fs::create_directories(root / "images");
  std::mt19937_64 rng(cfg.seed);
  corpus::Corpus c;
  c.root = root;
  const int n = cfg.image_size, pw = cfg.non_bud_patch;

  auto save = [&](const std::string& id, const GrayImage& img) {
    const std::string rel = "images/" + id + ".png";
    write_file_atomic(root / rel, encode_png(to_rgb(img).r));
    c.images.push_back({id, rel, static_cast<int>(img.cols()), static_cast<int>(img.rows())});
  };
  auto add_patch = [&](const std::string& image_id, const Rect& r, corpus::Subcategory tag) {
    corpus::Patch p;
    p.id = padded("nb", static_cast<int>(c.patches.size()));
    p.source_image = image_id;
    p.rect = r;
    p.label = corpus::Label::NonBud;
    p.subcategory = tag;
    c.patches.push_back(std::move(p));
  };
  // Picks `count` distinct grid-sampled rects from the region.
  auto sample = [&](const corpus::Polygon& region, int step, int count) {
    auto rects = corpus::sample_region_patches(region, step, pw, pw);
    std::shuffle(rects.begin(), rects.end(), rng);
    rects.resize(std::min<std::size_t>(rects.size(), static_cast<std::size_t>(count)));
    return rects;
  };

  // Bud images, each also feeding one bud-neighborhood patch beside the bud.
  std::vector<std::pair<std::string, Rect>> free_strips;
  for (int i = 0; i < cfg.buds; ++i) {
    GrayImage img = bark(n, n, rng);
    corpus::Polygon outline;
    Rect box;
    do {
      const double rx = uniform(rng, 52, 64), ry = uniform(rng, 52, 64);
      const double cx = uniform(rng, 70, n - 70), cy = uniform(rng, 70, n - 70);
      outline = bud_outline(cx, cy, rx, ry, rng);
      box = bounding_rect(outline);
    } while (box.w < corpus::kMinBudSide || box.h < corpus::kMinBudSide || !box.inside(n, n));
    paint_bud(img, outline, rng);
    add_noise(img, 0.01, rng);
    clamp01(img);
    const std::string image_id = padded("bud", i);
    save(image_id, img);
    corpus::Patch p;
    p.id = padded("b", i);
    p.source_image = image_id;
    p.rect = box;
    p.label = corpus::Label::Bud;
    p.mask = corpus::rasterize_polygon(outline, box);
    c.patches.push_back(std::move(p));
    // Widest bud-free strip to the left/right or above/below the bounding box.
    const std::array<Rect, 4> strips = {Rect{0, 0, box.x, n}, Rect{box.x + box.w, 0, n - box.x - box.w, n},
                                        Rect{0, 0, n, box.y}, Rect{0, box.y + box.h, n, n - box.y - box.h}};
    const Rect best = *std::max_element(strips.begin(), strips.end(),
                                        [](const Rect& a, const Rect& b) { return a.area() < b.area(); });
    free_strips.emplace_back(image_id, best);
  }

  // Non-bud mix: stripes, plaid, flat, knots, bud surroundings.
  const int n_neighborhood = std::min(cfg.non_buds / 8, cfg.buds);
  const int n_knot = cfg.non_buds / 4;
  const int n_flat = cfg.non_buds / 5;
  const int n_plaid = cfg.non_buds / 8;
  const int n_stripes = cfg.non_buds - n_neighborhood - n_knot - n_flat - n_plaid;
  const Rect full{0, 0, n, n};
  int image_counter = 0;
  auto fill = [&](int count, corpus::Subcategory tag, auto&& make) {
    int made = 0;
    while (made < count) {
      const GrayImage img = make();
      const std::string id = padded("nonbud", image_counter++);
      save(id, img);
      for (const Rect& r : sample(rect_polygon(full), 16, std::min(4, count - made))) {
        add_patch(id, r, tag);
        ++made;
      }
    }
  };
  fill(n_stripes, corpus::Subcategory::BranchEdge, [&] {
    GrayImage g = stripes(n, n, uniform(rng, 10, 32), uniform(rng, 0, std::numbers::pi), uniform(rng, 0.12, 0.3));
    add_noise(g, 0.01, rng);
    clamp01(g);
    return g;
  });
  fill(n_plaid, corpus::Subcategory::TrunkWithBark, [&] {
    GrayImage g = plaid(n, n, uniform(rng, 12, 30), uniform(rng, 0, std::numbers::pi), uniform(rng, 0.2, 0.4));
    add_noise(g, 0.01, rng);
    clamp01(g);
    return g;
  });
  fill(n_flat, corpus::Subcategory::OutOfFocus, [&] {
    GrayImage g = flat(n, n, uniform(rng, 0.3, 0.7), uniform(rng, -0.2, 0.2));
    add_noise(g, 0.01, rng);
    clamp01(g);
    return g;
  });
  fill(n_knot, corpus::Subcategory::Knot, [&] {
    GrayImage g = knot_image(n, rng);
    add_noise(g, 0.01, rng);
    clamp01(g);
    return g;
  });
  int neighborhood = 0;
  for (const auto& [image_id, strip] : free_strips) {
    if (neighborhood >= n_neighborhood) break;
    const auto rects = sample(rect_polygon(strip), 8, 1);
    if (rects.empty()) continue;
    add_patch(image_id, rects.front(), corpus::Subcategory::BudNeighborhood);
    ++neighborhood;
  }
  // Top up with extra knots if some strips were too narrow.
  fill(n_neighborhood - neighborhood, corpus::Subcategory::Knot, [&] {
    GrayImage g = knot_image(n, rng);
    clamp01(g);
    return g;
  });

  corpus::save_manifest(c, root / "manifest.jsonl");
  return corpus::load_manifest(root / "manifest.jsonl");
}

}  // namespace vinebud::synthetic
