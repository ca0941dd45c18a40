#include "vinebud/annotation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vinebud::annotation {
namespace {

using nlohmann::json;

json rect_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

Rect rect_from(const json& j) {
  const auto v = j.get<std::vector<int>>();
  if (v.size() != 4) throw FormatError("rect must have 4 integers");
  return Rect{v[0], v[1], v[2], v[3]};
}

// Logged form: everything except derived state.
json log_json(const AnnotationRecord& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back({p.x, p.y});
  json j{{"id", r.id},
         {"image", r.image_id},
         {"kind", to_string(r.kind)},
         {"points", pts},
         {"quality", corpus::to_string(r.quality)},
         {"created_at", r.created_at},
         {"version", r.version}};
  j["subcategory"] = r.subcategory ? json(corpus::to_string(*r.subcategory)) : json(nullptr);
  j["sampling"] = r.sampling ? json{{"step", r.sampling->step}, {"width", r.sampling->width}, {"height", r.sampling->height}}
                             : json(nullptr);
  json samples = json::array();
  for (const auto& s : r.samples) samples.push_back(rect_json(s));
  j["samples"] = samples;
  return j;
}

AnnotationRecord from_log_json(const json& j) {
  AnnotationRecord r;
  r.id = j.at("id").get<std::string>();
  r.image_id = j.at("image").get<std::string>();
  const auto kind = parse_kind(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("unknown annotation kind");
  r.kind = *kind;
  for (const auto& p : j.at("points")) r.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  if (!j.at("subcategory").is_null()) r.subcategory = corpus::parse_subcategory(j["subcategory"].get<std::string>());
  r.quality = corpus::parse_quality(j.at("quality").get<std::string>()).value_or(corpus::Quality::Ok);
  if (!j.at("sampling").is_null())
    r.sampling = SamplingParams{j["sampling"].at("step").get<int>(), j["sampling"].at("width").get<int>(),
                                j["sampling"].at("height").get<int>()};
  r.created_at = j.at("created_at").get<std::string>();
  r.version = j.at("version").get<int>();
  for (const auto& s : j.at("samples")) r.samples.push_back(rect_from(s));
  return r;
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool is_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Box-filter downscale by an integer factor.
RgbImage shrink(const RgbImage& img, int max_side) {
  const int f = std::max(1, (std::max(img.width(), img.height()) + max_side - 1) / max_side);
  if (f == 1) return img;
  const int w = std::max(1, img.width() / f), h = std::max(1, img.height() / f);
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto avg = [&](const Plane<std::uint8_t>& p) {
        return static_cast<std::uint8_t>(p.block(y * f, x * f, f, f).cast<int>().sum() / (f * f));
      };
      out.r(y, x) = avg(img.r);
      out.g(y, x) = avg(img.g);
      out.b(y, x) = avg(img.b);
    }
  return out;
}

}  // namespace

std::string_view to_string(Kind k) { return k == Kind::BudPolygon ? "bud-polygon" : "nonbud-region"; }

std::optional<Kind> parse_kind(std::string_view s) {
  if (s == "bud-polygon") return Kind::BudPolygon;
  if (s == "nonbud-region") return Kind::NonBudRegion;
  return std::nullopt;
}

std::string record_json(const AnnotationRecord& r) {
  json j = log_json(r);
  j["bounds"] = rect_json(r.bounds);
  if (r.mask) j["mask_pixels"] = corpus::mask_pixel_counts(corpus::Patch{r.id, r.image_id, r.bounds, corpus::Label::Bud, r.mask, {}, {}}).first;
  j["sample_count"] = r.samples.size();
  return j.dump();
}

AnnotationService::AnnotationService(std::filesystem::path root)
    : root_(std::move(root)), log_path_(root_ / "annotations.jsonl") {
  std::error_code ec;
  if (!std::filesystem::is_directory(root_, ec)) throw Error("annotation root " + root_.string() + " is not a directory");
  replay();
}

std::vector<ImageInfo> AnnotationService::list_images(std::vector<std::string>* warnings) {
  std::vector<ImageInfo> out;
  const auto dir = root_ / "images";
  std::error_code ec;
  if (!std::filesystem::exists(dir, ec)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec))
    if (e.is_regular_file()) files.push_back(e.path());
  if (ec) throw Error("cannot read image directory " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    {
      std::lock_guard lock(cache_mu_);
      if (auto it = image_cache_.find(id); it != image_cache_.end() && it->second.file == f.filename().string()) {
        out.push_back(it->second);
        continue;
      }
    }
    if (!is_image_extension(f)) {
      if (warnings) warnings->push_back("skipped " + f.filename().string() + ": not an image file");
      continue;
    }
    try {
      const RgbImage img = read_image(f);
      ImageInfo info{id, f.filename().string(), img.width(), img.height()};
      std::lock_guard lock(cache_mu_);
      image_cache_[id] = info;
      out.push_back(info);
    } catch (const Error& e) {
      if (warnings) warnings->push_back("skipped " + f.filename().string() + ": " + e.what());
    }
  }
  return out;
}

ImageInfo AnnotationService::image(const std::string& id) {
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = image_cache_.find(id); it != image_cache_.end()) return it->second;
  }
  for (const auto& info : list_images())
    if (info.id == id) return info;
  throw NotFoundError("no image with id '" + id + "'");
}

std::filesystem::path AnnotationService::image_file(const std::string& id) { return root_ / "images" / image(id).file; }

Bytes AnnotationService::image_bytes(const std::string& id) { return read_file(image_file(id)); }

Bytes AnnotationService::thumbnail(const std::string& id, int max_side) {
  if (max_side < 1) throw ValidationError("thumbnail size must be positive");
  const std::string key = id + "@" + std::to_string(max_side);
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = thumbs_.find(key); it != thumbs_.end()) return it->second;
  }
  Bytes png = encode_png(shrink(read_image(image_file(id)), max_side));
  std::lock_guard lock(cache_mu_);
  return thumbs_.emplace(key, std::move(png)).first->second;
}

void AnnotationService::derive(AnnotationRecord& r, const ImageInfo& img) const {
  if (r.points.size() < 3)
    throw ValidationError("polygon needs at least 3 points, got " + std::to_string(r.points.size()));
  for (const auto& p : r.points)
    if (!(p.x >= 0 && p.y >= 0 && p.x <= img.width && p.y <= img.height))
      throw ValidationError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") outside image " +
                            img.id + " (" + std::to_string(img.width) + "x" + std::to_string(img.height) + ")");
  r.bounds = corpus::bounding_rect(r.points);
  if (r.bounds.w < 1 || r.bounds.h < 1) throw ValidationError("polygon has zero extent");
  if (r.kind == Kind::BudPolygon) {
    r.mask = corpus::rasterize_polygon(r.points, r.bounds);
    if ((r.mask->cast<int>() != 0).count() == 0) throw ValidationError("polygon covers no pixel centers");
  } else {
    r.mask.reset();
  }
}

void AnnotationService::replay() {
  std::ifstream in(log_path_, std::ios::binary);
  if (!in) return;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn trailing write
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    AnnotationRecord r;
    try {
      r = from_log_json(json::parse(line));
    } catch (const std::exception& e) {
      throw Error("annotation log " + log_path_.string() + " is corrupt: " + e.what());
    }
    ++log_entries_;
    const auto digits = std::find_if(r.id.begin(), r.id.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (digits != r.id.end())
      next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(std::string(digits, r.id.end())) + 1);
    records_[r.id] = std::move(r);
  }
  for (auto& [id, r] : records_) {
    try {
      derive(r, image(r.image_id));
    } catch (const Error&) {
      // Source image gone or changed: keep the record, without derived state.
    }
  }
}

void AnnotationService::append(const AnnotationRecord& r) {
  std::ofstream out(log_path_, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open annotation log " + log_path_.string());
  const std::string line = log_json(r).dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error("write to annotation log failed");
  ++log_entries_;
}

AnnotationRecord AnnotationService::post_annotation(AnnotationRecord draft) {
  const ImageInfo img = image(draft.image_id);
  if (draft.sampling && (draft.sampling->step < 1 || draft.sampling->width < 1 || draft.sampling->height < 1))
    throw ValidationError("sampling step and dimensions must be positive");
  derive(draft, img);
  draft.samples.clear();
  std::unique_lock lock(mu_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "a%06llu", static_cast<unsigned long long>(next_id_));
  draft.id = buf;
  draft.version = 1;
  draft.created_at = now_utc();
  append(draft);
  ++next_id_;
  records_[draft.id] = draft;
  return draft;
}

AnnotationRecord AnnotationService::get(const std::string& id) const {
  std::shared_lock lock(mu_);
  const auto it = records_.find(id);
  if (it == records_.end()) throw NotFoundError("no annotation with id '" + id + "'");
  return it->second;
}

std::vector<AnnotationRecord> AnnotationService::annotations(const std::optional<std::string>& image_id) const {
  std::shared_lock lock(mu_);
  std::vector<AnnotationRecord> out;
  for (const auto& [id, r] : records_)
    if (!image_id || r.image_id == *image_id) out.push_back(r);
  return out;
}

AnnotationRecord AnnotationService::update(const std::string& id, int expected_version,
                                           const std::optional<std::optional<corpus::Subcategory>>& subcategory,
                                           const std::optional<corpus::Quality>& quality) {
  std::unique_lock lock(mu_);
  const auto it = records_.find(id);
  if (it == records_.end()) throw NotFoundError("no annotation with id '" + id + "'");
  if (it->second.version != expected_version)
    throw ConflictError("annotation " + id + " is at version " + std::to_string(it->second.version) + ", not " +
                        std::to_string(expected_version));
  AnnotationRecord r = it->second;
  if (subcategory) r.subcategory = *subcategory;
  if (quality) r.quality = *quality;
  ++r.version;
  append(r);
  it->second = std::move(r);
  return it->second;
}

std::vector<Rect> AnnotationService::sample_region(const std::string& id, const SamplingParams& params, bool persist) {
  if (params.step < 1 || params.width < 1 || params.height < 1)
    throw ValidationError("sampling step and dimensions must be positive");
  AnnotationRecord r = get(id);
  if (r.kind != Kind::NonBudRegion) throw ValidationError("annotation " + id + " is not a non-bud region");
  const std::vector<Rect> rects = corpus::sample_region_patches(r.points, params.step, params.width, params.height);
  if (!persist) return rects;
  std::unique_lock lock(mu_);
  auto& live = records_.at(id);
  live.sampling = params;
  live.samples = rects;
  ++live.version;
  append(live);
  return rects;
}

ExportSummary AnnotationService::export_corpus(const std::filesystem::path& dir, bool include_flagged) {
  std::vector<AnnotationRecord> snapshot = annotations();
  std::filesystem::create_directories(dir);
  const auto abs_dir = std::filesystem::weakly_canonical(std::filesystem::absolute(dir));
  corpus::Corpus c;
  c.root = dir;
  ExportSummary s;
  std::set<std::string> used;
  for (const auto& r : snapshot) {
    if (r.kind == Kind::BudPolygon && r.quality != corpus::Quality::Ok && !include_flagged) {
      ++s.skipped_flagged;
      continue;
    }
    if (!r.mask && r.kind == Kind::BudPolygon) continue;  // image vanished since annotation
    if (r.kind == Kind::BudPolygon) {
      c.patches.push_back({r.id, r.image_id, r.bounds, corpus::Label::Bud, r.mask, r.subcategory, r.quality});
      ++s.bud;
    } else {
      for (std::size_t k = 0; k < r.samples.size(); ++k) {
        c.patches.push_back({r.id + "-" + std::to_string(k), r.image_id, r.samples[k], corpus::Label::NonBud,
                             std::nullopt, r.subcategory, r.quality});
        ++s.non_bud;
      }
      if (r.samples.empty()) continue;
    }
    used.insert(r.image_id);
  }
  for (const auto& id : used) {
    const ImageInfo info = image(id);
    const auto file = std::filesystem::weakly_canonical(std::filesystem::absolute(root_ / "images" / info.file));
    c.images.push_back({id, std::filesystem::relative(file, abs_dir).generic_string(), info.width, info.height});
  }
  s.manifest = dir / "manifest.jsonl";
  corpus::save_manifest(c, s.manifest);
  return s;
}

void AnnotationService::compact() {
  std::unique_lock lock(mu_);
  std::string text;
  for (const auto& [id, r] : records_) text += log_json(r).dump() + "\n";
  write_file_atomic(log_path_, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  log_entries_ = records_.size();
}

std::size_t AnnotationService::log_entries() const {
  std::shared_lock lock(mu_);
  return log_entries_;
}

}  // namespace vinebud::annotation
