#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vinebud/imaging.hpp"
#include "vinebud/svm.hpp"

namespace vinebud::corpus {

using svm::Label;

std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view s);

// Non-bud scene categories.
enum class Subcategory {
  OutOfFocus,
  BranchEdge,
  BranchInternal,
  Wire,
  Tendril,
  TrunkWithBark,
  DryLeaves,
  DryBunches,
  BudNeighborhood,
  Knot,
};

inline constexpr std::array<Subcategory, 10> kAllSubcategories = {
    Subcategory::OutOfFocus,   Subcategory::BranchEdge, Subcategory::BranchInternal, Subcategory::Wire,
    Subcategory::Tendril,      Subcategory::TrunkWithBark, Subcategory::DryLeaves,   Subcategory::DryBunches,
    Subcategory::BudNeighborhood, Subcategory::Knot,
};

std::string_view to_string(Subcategory s);
std::optional<Subcategory> parse_subcategory(std::string_view s);

enum class Quality { Ok, Blurred, Overexposed, Underexposed };
std::string_view to_string(Quality q);
std::optional<Quality> parse_quality(std::string_view s);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};
using Polygon = std::vector<Point>;

// Bud patches in the field corpus span roughly 100x100 to 1600x1600 pixels.
inline constexpr int kMinBudSide = 100;
inline constexpr int kMaxBudSide = 1600;

struct Patch {
  std::string id;
  std::string source_image;  // ImageEntry id
  Rect rect;
  Label label = Label::NonBud;
  std::optional<Mask> mask;  // rect-sized, 1 = bud pixel
  std::optional<Subcategory> subcategory;
  Quality quality = Quality::Ok;
};

bool operator==(const Patch& a, const Patch& b);

struct ImageEntry {
  std::string id;
  std::string path;  // relative to the corpus root
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageEntry&, const ImageEntry&) = default;
};

struct CorpusStats {
  std::size_t bud = 0;
  std::size_t non_bud = 0;
  std::size_t flagged = 0;
  std::map<Subcategory, std::size_t> per_subcategory;
  // Mean share of non-bud pixels inside bud patches (0 when no masks).
  double mean_bud_background_fraction = 0.0;
  // Bud patches whose sides fall outside [kMinBudSide, kMaxBudSide].
  std::size_t bud_size_out_of_range = 0;
};

struct Corpus {
  std::filesystem::path root;
  std::vector<ImageEntry> images;
  std::vector<Patch> patches;

  const ImageEntry* find_image(std::string_view id) const;
  std::filesystem::path image_path(const ImageEntry& e) const { return root / e.path; }
  CorpusStats stats() const;
  // Throws LoadError on the first record violating an invariant.
  void validate() const;
  // Patches eligible for experiments: quality-flagged bud patches are left out.
  std::vector<std::size_t> usable() const;
  std::vector<Label> labels(std::span<const std::size_t> indices) const;
};

// Line-delimited JSON: a header record, then image and patch records. Masks are
// 1-bit PNG sidecars under masks/ next to the manifest.
Corpus load_manifest(const std::filesystem::path& manifest);
void save_manifest(const Corpus& corpus, const std::filesystem::path& manifest);

inline constexpr int kManifestVersion = 1;

// Tight integer box around the polygon (floor of minima, ceil of maxima).
Rect bounding_rect(const Polygon& polygon);

// Even-odd fill over `frame`; a pixel is set when its center is inside.
Mask rasterize_polygon(const Polygon& polygon, const Rect& frame);

// (bud pixels, non-bud pixels); their sum is the rect area.
std::pair<long long, long long> mask_pixel_counts(const Patch& patch);

// Grid scan of the region's bounding box at `step`; keeps rects whose every
// pixel lies inside the polygon.
std::vector<Rect> sample_region_patches(const Polygon& region, int step, int width, int height);

struct BalanceConfig {
  int R = 1;
  std::uint64_t seed = 0;
};

// Indices into `labels` forming a set with exactly R * (bud count) members per
// class: non-bud drawn without replacement, every bud kept once and the rest
// drawn with replacement. Buds come first.
std::vector<std::size_t> balance(std::span<const Label> labels, const BalanceConfig& cfg);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Uniform disjoint split of positions 0..labels.size()-1 with the requested
// number of test items per class.
Split split(std::span<const Label> labels, std::uint64_t seed, std::size_t test_bud, std::size_t test_non_bud);

}  // namespace vinebud::corpus
