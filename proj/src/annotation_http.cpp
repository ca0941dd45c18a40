// Eigen must precede httplib, whose resolver headers define `_res`.
#include "vinebud/annotation.hpp"

#include <httplib.h>
#include <json.hpp>

namespace vinebud::annotation {
namespace {

using nlohmann::json;

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(), "application/json");
}

// Maps service exceptions onto HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F&& f) {
  return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", std::string("malformed request body: ") + e.what());
    } catch (const ValidationError& e) {
      send_error(res, 422, "validation_failed", e.what());
    } catch (const ArgumentError& e) {
      send_error(res, 422, "validation_failed", e.what());
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, "version_conflict", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

std::optional<corpus::Subcategory> subcategory_from(const json& v) {
  if (v.is_null()) return std::nullopt;
  const auto s = corpus::parse_subcategory(v.get<std::string>());
  if (!s) throw ValidationError("unknown subcategory '" + v.get<std::string>() + "'");
  return s;
}

corpus::Quality quality_from(const json& v) {
  const auto q = corpus::parse_quality(v.get<std::string>());
  if (!q) throw ValidationError("unknown quality flag '" + v.get<std::string>() + "'");
  return *q;
}

SamplingParams sampling_from(const json& j) {
  return SamplingParams{j.at("step").get<int>(), j.at("width").get<int>(), j.at("height").get<int>()};
}

AnnotationRecord draft_from(const json& j) {
  AnnotationRecord r;
  if (!j.contains("image")) throw ValidationError("missing field 'image'");
  if (!j.contains("kind")) throw ValidationError("missing field 'kind'");
  if (!j.contains("points") || !j["points"].is_array()) throw ValidationError("missing array field 'points'");
  r.image_id = j["image"].get<std::string>();
  const auto kind = parse_kind(j["kind"].get<std::string>());
  if (!kind) throw ValidationError("kind must be 'bud-polygon' or 'nonbud-region'");
  r.kind = *kind;
  for (const auto& p : j["points"]) {
    if (!p.is_array() || p.size() != 2) throw ValidationError("each point must be [x, y]");
    r.points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  if (j.contains("subcategory")) r.subcategory = subcategory_from(j["subcategory"]);
  if (j.contains("quality")) r.quality = quality_from(j["quality"]);
  if (j.contains("sampling") && !j["sampling"].is_null()) r.sampling = sampling_from(j["sampling"]);
  return r;
}

std::string content_type_for(const std::string& file) {
  const auto dot = file.rfind('.');
  std::string ext = dot == std::string::npos ? "" : file.substr(dot + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == "png" ? "image/png" : "image/jpeg";
}

void send_bytes(httplib::Response& res, const Bytes& bytes, const std::string& type) {
  res.set_header("Cache-Control", "public, max-age=31536000, immutable");
  res.set_content(std::string(bytes.begin(), bytes.end()), type);
}

}  // namespace

std::unique_ptr<httplib::Server> make_http_server(AnnotationService& svc) {
  auto server = std::make_unique<httplib::Server>();
  auto& s = *server;

  s.Get("/images", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    std::vector<std::string> warnings;
    json images = json::array();
    for (const auto& info : svc.list_images(&warnings))
      images.push_back({{"id", info.id},
                        {"width", info.width},
                        {"height", info.height},
                        {"url", "/images/" + info.id},
                        {"thumb", "/images/" + info.id + "/thumb"}});
    res.set_content(json{{"images", images}, {"warnings", warnings}}.dump(), "application/json");
  }));

  s.Get(R"(/images/([^/]+)/thumb)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_bytes(res, svc.thumbnail(req.matches[1]), "image/png");
  }));

  s.Get(R"(/images/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const ImageInfo info = svc.image(id);
    send_bytes(res, svc.image_bytes(id), content_type_for(info.file));
  }));

  s.Post("/annotations", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const AnnotationRecord r = svc.post_annotation(draft_from(parse_body(req)));
    res.status = 201;
    res.set_content(record_json(r), "application/json");
  }));

  s.Get("/annotations", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> image;
    if (req.has_param("image")) image = req.get_param_value("image");
    json list = json::array();
    for (const auto& r : svc.annotations(image)) list.push_back(json::parse(record_json(r)));
    res.set_content(json{{"annotations", list}}.dump(), "application/json");
  }));

  s.Get(R"(/annotations/([^/]+)/mask)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const AnnotationRecord r = svc.get(req.matches[1]);
    if (!r.mask) throw ValidationError("annotation " + r.id + " has no mask");
    const Plane<std::uint8_t> shown = (*r.mask != 0).cast<std::uint8_t>() * std::uint8_t{255};
    const Bytes png = encode_png(shown);
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }));

  s.Get(R"(/annotations/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    res.set_content(record_json(svc.get(req.matches[1])), "application/json");
  }));

  s.Patch(R"(/annotations/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.contains("version")) throw ValidationError("missing field 'version'");
    std::optional<std::optional<corpus::Subcategory>> sub;
    std::optional<corpus::Quality> quality;
    if (body.contains("subcategory")) sub = subcategory_from(body["subcategory"]);
    if (body.contains("quality")) quality = quality_from(body["quality"]);
    const AnnotationRecord r = svc.update(req.matches[1], body["version"].get<int>(), sub, quality);
    res.set_content(record_json(r), "application/json");
  }));

  s.Post(R"(/annotations/([^/]+)/sample)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const bool preview = body.value("preview", false);
    const auto rects = svc.sample_region(req.matches[1], sampling_from(body), !preview);
    json out = json::array();
    for (const auto& r : rects) out.push_back({r.x, r.y, r.w, r.h});
    res.set_content(json{{"rects", out}, {"count", rects.size()}, {"preview", preview}}.dump(), "application/json");
  }));

  s.Post("/export", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string dir = body.value("dir", std::string("export"));
    const std::filesystem::path rel(dir);
    if (rel.is_absolute() || rel.lexically_normal().string().starts_with(".."))
      throw ValidationError("export dir must be relative to the corpus root");
    const ExportSummary sum = svc.export_corpus(svc.root() / rel, body.value("include_flagged", false));
    res.set_content(json{{"manifest", std::filesystem::relative(sum.manifest, svc.root()).generic_string()},
                         {"bud", sum.bud},
                         {"non_bud", sum.non_bud},
                         {"skipped_flagged", sum.skipped_flagged}}
                        .dump(),
                    "application/json");
  }));

  return server;
}

}  // namespace vinebud::annotation
