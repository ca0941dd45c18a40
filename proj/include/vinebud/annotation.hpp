#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "vinebud/corpus.hpp"
#include "vinebud/errors.hpp"
#include "vinebud/image_io.hpp"

namespace httplib {
class Server;
}

namespace vinebud::annotation {

// Request rejected by record validation (bad polygon, wrong kind, ...).
struct ValidationError : Error {
  using Error::Error;
};
struct NotFoundError : Error {
  using Error::Error;
};
// Update carried a stale record version.
struct ConflictError : Error {
  using Error::Error;
};

enum class Kind { BudPolygon, NonBudRegion };
std::string_view to_string(Kind k);
std::optional<Kind> parse_kind(std::string_view s);

struct SamplingParams {
  int step = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const SamplingParams&, const SamplingParams&) = default;
};

struct AnnotationRecord {
  std::string id;
  std::string image_id;
  Kind kind = Kind::BudPolygon;
  corpus::Polygon points;  // image pixel coordinates
  std::optional<corpus::Subcategory> subcategory;
  corpus::Quality quality = corpus::Quality::Ok;
  std::optional<SamplingParams> sampling;
  std::string created_at;
  int version = 1;

  // Derived, never logged: bounding rect, and for buds the rasterized mask.
  Rect bounds;
  std::optional<Mask> mask;
  // Persisted result of the latest region sampling.
  std::vector<Rect> samples;
};

struct ImageInfo {
  std::string id;    // file stem
  std::string file;  // file name under images/
  int width = 0;
  int height = 0;
};

struct ExportSummary {
  std::filesystem::path manifest;
  std::size_t bud = 0;
  std::size_t non_bud = 0;
  std::size_t skipped_flagged = 0;
};

// Annotation store for one corpus root (images under root/images). State is
// an append-only JSON Lines log at root/annotations.jsonl replayed on start;
// a torn final line from an interrupted write is ignored.
class AnnotationService {
 public:
  explicit AnnotationService(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Decodable images only; undecodable files are reported in `warnings`.
  std::vector<ImageInfo> list_images(std::vector<std::string>* warnings = nullptr);
  ImageInfo image(const std::string& id);
  Bytes image_bytes(const std::string& id);
  // PNG no larger than max_side on either axis; generated on first request.
  Bytes thumbnail(const std::string& id, int max_side = 256);

  // Validates, assigns id/version/timestamp, derives bounds and mask, logs.
  AnnotationRecord post_annotation(AnnotationRecord draft);
  AnnotationRecord get(const std::string& id) const;
  std::vector<AnnotationRecord> annotations(const std::optional<std::string>& image_id = std::nullopt) const;
  // Tag/flag update guarded by the caller's view of the record version.
  AnnotationRecord update(const std::string& id, int expected_version,
                          const std::optional<std::optional<corpus::Subcategory>>& subcategory,
                          const std::optional<corpus::Quality>& quality);
  // Grid-samples a non-bud region; persist=false is a preview.
  std::vector<Rect> sample_region(const std::string& id, const SamplingParams& params, bool persist = true);

  // Writes manifest.jsonl (plus masks/) into `dir`. Quality-flagged bud
  // patches are left out unless include_flagged.
  ExportSummary export_corpus(const std::filesystem::path& dir, bool include_flagged = false);

  // Rewrites the log with one entry per live record.
  void compact();

  std::size_t log_entries() const;

 private:
  void replay();
  void append(const AnnotationRecord& r);
  void derive(AnnotationRecord& r, const ImageInfo& img) const;
  std::filesystem::path image_file(const std::string& id);

  std::filesystem::path root_;
  std::filesystem::path log_path_;
  mutable std::shared_mutex mu_;
  std::map<std::string, AnnotationRecord> records_;
  std::map<std::string, ImageInfo> image_cache_;
  std::map<std::string, Bytes> thumbs_;
  std::mutex cache_mu_;
  std::uint64_t next_id_ = 1;
  std::size_t log_entries_ = 0;
};

// JSON bodies used by the HTTP layer.
std::string record_json(const AnnotationRecord& r);

// Routes:
//   GET  /images                     {"images":[{id,width,height,url,thumb}],"warnings":[...]}
//   GET  /images/{id}                original bytes, immutable cache headers
//   GET  /images/{id}/thumb          PNG thumbnail
//   POST /annotations                {image,kind,points,subcategory?,quality?,sampling?} -> 201 record
//   GET  /annotations?image=         {"annotations":[record...]}
//   GET  /annotations/{id}           record
//   GET  /annotations/{id}/mask      8-bit PNG of the derived mask (255 = bud)
//   PATCH /annotations/{id}          {version,subcategory?,quality?} -> record, 409 on stale version
//   POST /annotations/{id}/sample    {step,width,height,preview?} -> {"rects":[[x,y,w,h]...],"count":n}
//   POST /export                     {dir?,include_flagged?} -> {manifest,bud,non_bud,skipped_flagged}
// Errors: status plus {"error":{"code":...,"message":...}}.
std::unique_ptr<httplib::Server> make_http_server(AnnotationService& service);

}  // namespace vinebud::annotation
