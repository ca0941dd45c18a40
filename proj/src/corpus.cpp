#include "vinebud/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vinebud/image_io.hpp"

namespace vinebud::corpus {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 10> kSubcategoryNames = {
    "out-of-focus", "branch-edge", "branch-internal", "wire",           "tendril",
    "trunk-with-bark", "dry-leaves", "dry-bunches",  "bud-neighborhood", "knot",
};
constexpr std::array<std::string_view, 4> kQualityNames = {"ok", "blurred", "overexposed", "underexposed"};

std::string record_name(std::size_t line, const json& rec) {
  std::string s = "manifest line " + std::to_string(line);
  if (rec.is_object() && rec.contains("id") && rec["id"].is_string()) s += " (id " + rec["id"].get<std::string>() + ")";
  return s;
}

template <typename T>
T field(const json& rec, const char* key, const std::string& where) {
  if (!rec.contains(key)) throw LoadError(where + ": missing field '" + key + "'");
  try {
    return rec.at(key).get<T>();
  } catch (const json::exception&) {
    throw LoadError(where + ": field '" + key + "' has the wrong type");
  }
}

std::filesystem::path mask_relpath(const std::string& patch_id) { return std::filesystem::path("masks") / (patch_id + ".png"); }

}  // namespace

std::string_view to_string(Label l) { return l == Label::Bud ? "bud" : "non-bud"; }

std::optional<Label> parse_label(std::string_view s) {
  if (s == "bud") return Label::Bud;
  if (s == "non-bud") return Label::NonBud;
  return std::nullopt;
}

std::string_view to_string(Subcategory s) { return kSubcategoryNames[static_cast<std::size_t>(s)]; }

std::optional<Subcategory> parse_subcategory(std::string_view s) {
  for (std::size_t i = 0; i < kSubcategoryNames.size(); ++i)
    if (kSubcategoryNames[i] == s) return static_cast<Subcategory>(i);
  return std::nullopt;
}

std::string_view to_string(Quality q) { return kQualityNames[static_cast<std::size_t>(q)]; }

std::optional<Quality> parse_quality(std::string_view s) {
  for (std::size_t i = 0; i < kQualityNames.size(); ++i)
    if (kQualityNames[i] == s) return static_cast<Quality>(i);
  return std::nullopt;
}

bool operator==(const Patch& a, const Patch& b) {
  if (a.id != b.id || a.source_image != b.source_image || !(a.rect == b.rect) || a.label != b.label ||
      a.subcategory != b.subcategory || a.quality != b.quality || a.mask.has_value() != b.mask.has_value())
    return false;
  if (!a.mask) return true;
  const Mask& ma = *a.mask;
  const Mask& mb = *b.mask;
  if (ma.rows() != mb.rows() || ma.cols() != mb.cols()) return false;
  return ((ma != 0) == (mb != 0)).all();
}

const ImageEntry* Corpus::find_image(std::string_view id) const {
  for (const auto& e : images)
    if (e.id == id) return &e;
  return nullptr;
}

CorpusStats Corpus::stats() const {
  CorpusStats s;
  double bg_sum = 0.0;
  std::size_t masked = 0;
  for (const auto& p : patches) {
    if (p.quality != Quality::Ok) ++s.flagged;
    if (p.subcategory) ++s.per_subcategory[*p.subcategory];
    if (p.label == Label::Bud) {
      ++s.bud;
      if (p.rect.w < kMinBudSide || p.rect.h < kMinBudSide || p.rect.w > kMaxBudSide || p.rect.h > kMaxBudSide)
        ++s.bud_size_out_of_range;
      if (p.mask && p.rect.area() > 0) {
        const auto [bud, bg] = mask_pixel_counts(p);
        bg_sum += static_cast<double>(bg) / static_cast<double>(bud + bg);
        ++masked;
      }
    } else {
      ++s.non_bud;
    }
  }
  if (masked > 0) s.mean_bud_background_fraction = bg_sum / static_cast<double>(masked);
  return s;
}

void Corpus::validate() const {
  std::set<std::string> ids;
  for (const auto& e : images) {
    if (!ids.insert("image:" + e.id).second) throw LoadError("image " + e.id + ": duplicate id");
    if (e.width <= 0 || e.height <= 0) throw LoadError("image " + e.id + ": non-positive dimensions");
  }
  for (const auto& p : patches) {
    const std::string where = "patch " + p.id;
    if (p.id.empty()) throw LoadError("patch with empty id");
    if (!ids.insert("patch:" + p.id).second) throw LoadError(where + ": duplicate id");
    const ImageEntry* img = find_image(p.source_image);
    if (!img) throw LoadError(where + ": unknown source image '" + p.source_image + "'");
    if (!p.rect.inside(img->width, img->height))
      throw LoadError(where + ": rect " + to_string(p.rect) + " outside image " + img->id);
    if (p.label == Label::Bud && !p.mask) throw LoadError(where + ": bud patch without mask");
    if (p.mask && (p.mask->cols() != p.rect.w || p.mask->rows() != p.rect.h))
      throw LoadError(where + ": mask " + std::to_string(p.mask->cols()) + "x" + std::to_string(p.mask->rows()) +
                      " does not match rect " + to_string(p.rect));
  }
}

std::vector<std::size_t> Corpus::usable() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < patches.size(); ++i)
    if (patches[i].label == Label::NonBud || patches[i].quality == Quality::Ok) out.push_back(i);
  return out;
}

std::vector<Label> Corpus::labels(std::span<const std::size_t> indices) const {
  std::vector<Label> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(patches.at(i).label);
  return out;
}

Corpus load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw LoadError("cannot open manifest " + manifest.string());
  Corpus c;
  c.root = manifest.parent_path();
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw LoadError("manifest line " + std::to_string(lineno) + ": not valid JSON");
    }
    const std::string where = record_name(lineno, rec);
    if (!rec.is_object()) throw LoadError(where + ": record is not an object");
    if (!header) {
      if (!rec.contains("format") || rec["format"] != "vinebud-manifest")
        throw LoadError(where + ": expected the vinebud manifest header record first");
      const int version = field<int>(rec, "version", where);
      if (version != kManifestVersion) throw LoadError(where + ": unsupported manifest version " + std::to_string(version));
      header = true;
      continue;
    }
    const auto type = field<std::string>(rec, "type", where);
    if (type == "image") {
      ImageEntry e;
      e.id = field<std::string>(rec, "id", where);
      e.path = field<std::string>(rec, "path", where);
      e.width = field<int>(rec, "width", where);
      e.height = field<int>(rec, "height", where);
      c.images.push_back(std::move(e));
    } else if (type == "patch") {
      Patch p;
      p.id = field<std::string>(rec, "id", where);
      p.source_image = field<std::string>(rec, "image", where);
      const auto r = field<std::vector<int>>(rec, "rect", where);
      if (r.size() != 4) throw LoadError(where + ": rect must be [x, y, w, h]");
      p.rect = Rect{r[0], r[1], r[2], r[3]};
      const auto label = parse_label(field<std::string>(rec, "label", where));
      if (!label) throw LoadError(where + ": unknown label");
      p.label = *label;
      if (rec.contains("subcategory") && !rec["subcategory"].is_null()) {
        const auto sub = parse_subcategory(field<std::string>(rec, "subcategory", where));
        if (!sub) throw LoadError(where + ": unknown subcategory");
        p.subcategory = *sub;
      }
      if (rec.contains("quality")) {
        const auto q = parse_quality(field<std::string>(rec, "quality", where));
        if (!q) throw LoadError(where + ": unknown quality flag");
        p.quality = *q;
      }
      if (rec.contains("mask") && !rec["mask"].is_null()) {
        const auto rel = field<std::string>(rec, "mask", where);
        try {
          const Bytes bytes = read_file(c.root / rel);
          p.mask = decode_mask_png(bytes);
        } catch (const Error& e) {
          throw LoadError(where + ": cannot read mask " + rel + ": " + e.what());
        }
      }
      if (p.label == Label::Bud && !p.mask) throw LoadError(where + ": bud patch without mask");
      c.patches.push_back(std::move(p));
    } else {
      throw LoadError(where + ": unknown record type '" + type + "'");
    }
  }
  if (!header) throw LoadError("manifest " + manifest.string() + " has no header record");
  c.validate();
  return c;
}

void save_manifest(const Corpus& corpus, const std::filesystem::path& manifest) {
  corpus.validate();
  const auto dir = manifest.parent_path();
  std::filesystem::create_directories(dir / "masks");
  std::ostringstream out;
  out << json{{"format", "vinebud-manifest"}, {"version", kManifestVersion}}.dump() << '\n';
  for (const auto& e : corpus.images)
    out << json{{"type", "image"}, {"id", e.id}, {"path", e.path}, {"width", e.width}, {"height", e.height}}.dump()
        << '\n';
  for (const auto& p : corpus.patches) {
    json rec{{"type", "patch"},
             {"id", p.id},
             {"image", p.source_image},
             {"rect", {p.rect.x, p.rect.y, p.rect.w, p.rect.h}},
             {"label", to_string(p.label)},
             {"quality", to_string(p.quality)}};
    rec["subcategory"] = p.subcategory ? json(to_string(*p.subcategory)) : json(nullptr);
    if (const ImageEntry* img = corpus.find_image(p.source_image)) rec["image_path"] = img->path;
    if (p.mask) {
      const auto rel = mask_relpath(p.id);
      write_file_atomic(dir / rel, encode_mask_png(*p.mask));
      rec["mask"] = rel.generic_string();
    } else {
      rec["mask"] = nullptr;
    }
    out << rec.dump() << '\n';
  }
  const std::string text = out.str();
  write_file_atomic(manifest, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Rect bounding_rect(const Polygon& polygon) {
  if (polygon.empty()) throw ArgumentError("bounding_rect of an empty polygon");
  double x0 = polygon[0].x, x1 = x0, y0 = polygon[0].y, y1 = y0;
  for (const auto& p : polygon) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int ix = static_cast<int>(std::floor(x0)), iy = static_cast<int>(std::floor(y0));
  return Rect{ix, iy, static_cast<int>(std::ceil(x1)) - ix, static_cast<int>(std::ceil(y1)) - iy};
}

Mask rasterize_polygon(const Polygon& polygon, const Rect& frame) {
  if (polygon.size() < 3) throw ArgumentError("polygon needs at least 3 points, got " + std::to_string(polygon.size()));
  if (frame.w < 0 || frame.h < 0) throw ArgumentError("negative raster frame " + to_string(frame));
  Mask mask = Mask::Zero(frame.h, frame.w);
  std::vector<double> xs;
  const std::size_t n = polygon.size();
  for (int j = 0; j < frame.h; ++j) {
    const double yc = frame.y + j + 0.5;
    xs.clear();
    for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
      const Point& p = polygon[a];
      const Point& q = polygon[b];
      if ((p.y > yc) != (q.y > yc)) xs.push_back(p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y));
    }
    if (xs.empty()) continue;
    std::sort(xs.begin(), xs.end());
    // Pixel is inside when an odd number of crossings lie strictly to its right.
    std::size_t right = 0;  // crossings <= xc
    for (int i = 0; i < frame.w; ++i) {
      const double xc = frame.x + i + 0.5;
      while (right < xs.size() && xs[right] <= xc) ++right;
      if ((xs.size() - right) % 2 == 1) mask(j, i) = 1;
    }
  }
  return mask;
}

std::pair<long long, long long> mask_pixel_counts(const Patch& patch) {
  if (!patch.mask) throw ArgumentError("patch " + patch.id + " has no mask");
  const long long bud = (patch.mask->cast<int>() != 0).count();
  return {bud, static_cast<long long>(patch.mask->size()) - bud};
}

std::vector<Rect> sample_region_patches(const Polygon& region, int step, int width, int height) {
  if (step < 1) throw ArgumentError("sampling step must be >= 1");
  if (width < 1 || height < 1) throw ArgumentError("patch dimensions must be positive");
  const Rect box = bounding_rect(region);
  std::vector<Rect> out;
  if (box.w < width || box.h < height) return out;
  const Mask inside = rasterize_polygon(region, box);
  // Summed-area table with a zero border.
  Eigen::Array<long long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sat =
      Eigen::Array<long long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(box.h + 1, box.w + 1);
  for (int y = 0; y < box.h; ++y)
    for (int x = 0; x < box.w; ++x) sat(y + 1, x + 1) = inside(y, x) + sat(y, x + 1) + sat(y + 1, x) - sat(y, x);
  const long long full = static_cast<long long>(width) * height;
  for (int y = 0; y + height <= box.h; y += step)
    for (int x = 0; x + width <= box.w; x += step) {
      const long long s = sat(y + height, x + width) - sat(y, x + width) - sat(y + height, x) + sat(y, x);
      if (s == full) out.push_back(Rect{box.x + x, box.y + y, width, height});
    }
  return out;
}

std::vector<std::size_t> balance(std::span<const Label> labels, const BalanceConfig& cfg) {
  if (cfg.R < 1) throw ArgumentError("balance rate R must be >= 1");
  std::vector<std::size_t> bud, non_bud;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Label::Bud ? bud : non_bud).push_back(i);
  if (bud.empty()) throw ArgumentError("balance needs at least one bud element");
  const std::size_t target = static_cast<std::size_t>(cfg.R) * bud.size();
  if (non_bud.size() < target)
    throw ArgumentError("balance rate " + std::to_string(cfg.R) + " needs " + std::to_string(target) +
                        " non-bud elements, only " + std::to_string(non_bud.size()) + " available");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> out = bud;
  out.reserve(2 * target);
  std::uniform_int_distribution<std::size_t> pick(0, bud.size() - 1);
  while (out.size() < target) out.push_back(bud[pick(rng)]);
  // Partial Fisher-Yates: the first `target` slots are a uniform draw without replacement.
  for (std::size_t i = 0; i < target; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, non_bud.size() - 1);
    std::swap(non_bud[i], non_bud[d(rng)]);
    out.push_back(non_bud[i]);
  }
  return out;
}

Split split(std::span<const Label> labels, std::uint64_t seed, std::size_t test_bud, std::size_t test_non_bud) {
  std::vector<std::size_t> bud, non_bud;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Label::Bud ? bud : non_bud).push_back(i);
  if (bud.size() < test_bud || non_bud.size() < test_non_bud)
    throw ArgumentError("split requests " + std::to_string(test_bud) + " bud / " + std::to_string(test_non_bud) +
                        " non-bud test items but only " + std::to_string(bud.size()) + " / " +
                        std::to_string(non_bud.size()) + " exist");
  std::mt19937_64 rng(seed);
  Split s;
  auto take = [&](std::vector<std::size_t>& pool, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, pool.size() - 1);
      std::swap(pool[i], pool[d(rng)]);
    }
    s.test.insert(s.test.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    s.train.insert(s.train.end(), pool.begin() + static_cast<std::ptrdiff_t>(count), pool.end());
  };
  take(bud, test_bud);
  take(non_bud, test_non_bud);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace vinebud::corpus
