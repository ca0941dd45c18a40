#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "vinebud/corpus.hpp"
#include "vinebud/imaging.hpp"

// Procedural two-class texture corpus used for desk-scale runs and tests.
// Buds are spot-textured domes with irregular outlines on low-contrast bark;
// non-bud patches are stripes, plaid, flat fields, isolated knots and bud
// surroundings.
namespace vinebud::synthetic {

struct DeskCorpusConfig {
  int buds = 80;
  int non_buds = 80;
  int image_size = 400;
  int non_bud_patch = 128;
  std::uint64_t seed = 1;
};

// Irregular closed outline around (cx, cy) with mean radii (rx, ry).
corpus::Polygon bud_outline(double cx, double cy, double rx, double ry, std::mt19937_64& rng);

// Low-contrast bark background.
GrayImage bark(int width, int height, std::mt19937_64& rng);

// Paints a textured bud inside `outline` onto `img`.
void paint_bud(GrayImage& img, const corpus::Polygon& outline, std::mt19937_64& rng);

// Adds a Gaussian spot of the given radius and signed amplitude.
void add_spot(GrayImage& img, double cx, double cy, double sigma, double amplitude);

GrayImage stripes(int width, int height, double period, double angle, double contrast);
GrayImage plaid(int width, int height, double period, double angle, double contrast);
GrayImage flat(int width, int height, double level, double gradient);

// Writes images/ and masks/ PNGs plus manifest.jsonl under `root`, and
// returns the corpus as loaded back from disk.
corpus::Corpus generate_desk_corpus(const std::filesystem::path& root, const DeskCorpusConfig& cfg = {});

}  // namespace vinebud::synthetic
