#include "lesionkit/server.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "json.hpp"
#include "lesionkit/codec.hpp"
#include "lesionkit/report.hpp"
// After Eigen: the resolver header pulled in by httplib defines `_res`.
#include "httplib.h"

namespace lesion::serve {
namespace {

using nlohmann::json;

Response json_response(const json& j, int status = 200) { return {status, "application/json", j.dump(2) + "\n"}; }

Response error_response(int status, const std::string& msg) { return json_response({{"error", msg}}, status); }

Response png_response(std::vector<std::uint8_t> bytes) {
  return {200, "image/png", std::string(bytes.begin(), bytes.end())};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (const char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RasterImage overlay(const RasterImage& img, const BinaryMask& mask) {
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (!mask(x, y)) continue;
      bool edge = false;
      for (int d = 0; d < 4 && !edge; ++d) {
        const int qx = x + (d == 0) - (d == 1), qy = y + (d == 2) - (d == 3);
        edge = !mask.contains(qx, qy) || !mask(qx, qy);
      }
      const Rgb c = img.at(x, y);
      if (edge) {
        out.set(x, y, {255, 230, 0});
      } else {
        out.set(x, y, {static_cast<std::uint8_t>(0.55 * c[0] + 0.45 * 40), static_cast<std::uint8_t>(0.55 * c[1] + 0.45 * 200),
                       static_cast<std::uint8_t>(0.55 * c[2] + 0.45 * 255)});
      }
    }
  return out;
}

int parse_positive(const std::map<std::string, std::string>& q, const std::string& key, int fallback) {
  const auto it = q.find(key);
  if (it == q.end()) return fallback;
  try {
    const int v = std::stoi(it->second);
    return v > 0 ? v : fallback;
  } catch (const std::exception&) {
    return fallback;
  }
}

}  // namespace

ReviewService::ReviewService(DatasetManifest manifest, PipelineConfig cfg, std::optional<cluster::PrototypeStore> store,
                             std::filesystem::path selections_path)
    : manifest_(std::move(manifest)), cfg_(cfg), store_(std::move(store)), selections_path_(std::move(selections_path)) {
  std::error_code ec;
  if (std::filesystem::exists(selections_path_, ec)) {
    const auto bytes = read_file(selections_path_);
    try {
      const json j = json::parse(bytes.begin(), bytes.end());
      for (const auto& [id, v] : j.items())
        selections_[id] = {v.at("type").get<std::string>(), v.value("timestamp", ""), v.value("user", "")};
    } catch (const json::exception& e) {
      throw DataError("cannot read " + selections_path_.string() + ": " + e.what());
    }
  }
}

std::map<std::string, Selection> ReviewService::selections() const {
  std::lock_guard lock(mu_);
  return selections_;
}

std::shared_ptr<const ReviewService::Cached> ReviewService::cached(const DatasetEntry& e) {
  {
    std::lock_guard lock(mu_);
    if (const auto it = cache_.find(e.id); it != cache_.end()) return it->second;
  }
  auto c = std::make_shared<Cached>();
  c->loaded = pipeline::load_entry(e, cfg_.run.max_dim);
  c->seg = pipeline::segment(c->loaded.image, cfg_, store_ ? &*store_ : nullptr,
                             pipeline::image_seed(cfg_.run.seed, e.id));
  std::lock_guard lock(mu_);
  return cache_.emplace(e.id, std::move(c)).first->second;
}

const BinaryMask& ReviewService::card_mask(const Cached& c, int card) const {
  return card == ensemble::kEnsembleIndex ? c.seg.final_mask : c.seg.maps[static_cast<std::size_t>(card)].mask;
}

Response ReviewService::list_images(const std::map<std::string, std::string>& query) const {
  const int page = parse_positive(query, "page", 1), size = parse_positive(query, "page_size", 50);
  json items = json::array();
  const std::size_t begin = static_cast<std::size_t>(page - 1) * static_cast<std::size_t>(size);
  for (std::size_t i = begin; i < manifest_.entries.size() && i < begin + static_cast<std::size_t>(size); ++i) {
    const auto& e = manifest_.entries[i];
    json item = {{"id", e.id}, {"has_truth", e.truth.has_value()}, {"image", "/api/images/" + e.id + "/image.png"}};
    item["label"] = e.label ? json(manifest_.classes[static_cast<std::size_t>(*e.label)]) : json(nullptr);
    items.push_back(item);
  }
  return json_response({{"images", items}, {"total", manifest_.entries.size()}, {"page", page}, {"page_size", size}});
}

Response ReviewService::candidates(const DatasetEntry& e) {
  const auto c = cached(e);
  json cards = json::array();
  const auto names = pipeline::card_names();
  for (int card = 0; card <= ensemble::kEnsembleIndex; ++card) {
    const BinaryMask& m = card_mask(*c, card);
    const std::string& name = names[static_cast<std::size_t>(card)];
    json j = {{"type", name},
              {"available", count_set(m) > 0},
              {"mask", "/api/images/" + e.id + "/mask/" + name + ".png"},
              {"overlay", "/api/images/" + e.id + "/overlay/" + name + ".png"}};
    if (card == ensemble::kEnsembleIndex) {
      j["confidence"] = nullptr;
      j["vote_threshold"] = cfg_.ensemble.vote_threshold;
    } else {
      j["confidence"] = c->seg.maps[static_cast<std::size_t>(card)].confidence;
      j["selected_regions"] = c->seg.maps[static_cast<std::size_t>(card)].selected;
    }
    j["accuracy"] = nullptr;
    if (c->loaded.truth) {
      try {
        j["accuracy"] = ensemble::evaluate_mask(m, *c->loaded.truth);
      } catch (const UndefinedMetricError&) {
      }
    }
    cards.push_back(j);
  }
  json out = {{"id", e.id}, {"width", c->loaded.image.width()}, {"height", c->loaded.image.height()},
              {"image", "/api/images/" + e.id + "/image.png"}, {"candidates", cards}};
  std::lock_guard lock(mu_);
  if (const auto it = selections_.find(e.id); it != selections_.end())
    out["selection"] = {{"type", it->second.type}, {"timestamp", it->second.timestamp}, {"user", it->second.user}};
  else
    out["selection"] = nullptr;
  return json_response(out);
}

void ReviewService::save_selections() const {
  json j = json::object();
  for (const auto& [id, s] : selections_) j[id] = {{"type", s.type}, {"timestamp", s.timestamp}, {"user", s.user}};
  const auto tmp = selections_path_.string() + ".tmp";
  write_text(tmp, j.dump(2) + "\n");
  std::filesystem::rename(tmp, selections_path_);
}

Response ReviewService::select(const DatasetEntry& e, const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    return error_response(400, "request body is not JSON");
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) return error_response(400, "field 'type' is required");
  const std::string type = j["type"].get<std::string>();
  try {
    pipeline::card_index(type);
  } catch (const Error&) {
    return error_response(400, "unknown candidate type '" + type + "'");
  }
  Selection s{type, utc_now(), j.contains("user") && j["user"].is_string() ? j["user"].get<std::string>() : "reviewer"};
  std::lock_guard lock(mu_);
  selections_[e.id] = s;
  save_selections();
  return json_response({{"id", e.id}, {"type", s.type}, {"timestamp", s.timestamp}, {"user", s.user}});
}

Response ReviewService::report() {
  std::vector<ensemble::ImageScore> scores;
  for (const auto& e : manifest_.entries) {
    if (!e.truth) continue;
    try {
      const auto c = cached(e);
      scores.push_back(ensemble::score_image(e.id, c->seg.maps, c->seg.final_mask, *c->loaded.truth));
    } catch (const Error& err) {
      ensemble::ImageScore s;
      s.id = e.id;
      s.error = err.what();
      scores.push_back(s);
    }
  }
  ensemble::SegmentationReport r = ensemble::aggregate(std::move(scores));
  std::map<std::string, std::string> chosen;
  for (const auto& [id, s] : selections()) chosen[id] = s.type;
  pipeline::apply_selections(r, chosen);
  return {200, "application/json", report::segmentation_json(r)};
}

Response ReviewService::handle(const std::string& method, const std::string& path,
                               const std::map<std::string, std::string>& query, const std::string& body) {
  const auto parts = split_path(path);
  try {
    if (parts.size() < 2 || parts[0] != "api") return error_response(404, "not found");
    if (parts[1] == "report" && parts.size() == 2) {
      if (method != "GET") return error_response(405, "method not allowed");
      return report();
    }
    if (parts[1] != "images") return error_response(404, "not found");
    if (parts.size() == 2) {
      if (method != "GET") return error_response(405, "method not allowed");
      return list_images(query);
    }
    const DatasetEntry* e = manifest_.find(parts[2]);
    if (!e) return error_response(404, "unknown image '" + parts[2] + "'");
    if (parts.size() == 4 && parts[3] == "selection") {
      if (method != "POST") return error_response(405, "method not allowed");
      return select(*e, body);
    }
    if (method != "GET") return error_response(405, "method not allowed");
    if (parts.size() == 4 && parts[3] == "candidates") return candidates(*e);
    if (parts.size() == 4 && parts[3] == "image.png") return png_response(encode_png(cached(*e)->loaded.image));
    if (parts.size() == 5 && (parts[3] == "mask" || parts[3] == "overlay")) {
      const std::string file = parts[4];
      if (file.size() < 5 || file.substr(file.size() - 4) != ".png") return error_response(404, "not found");
      int card = 0;
      try {
        card = pipeline::card_index(file.substr(0, file.size() - 4));
      } catch (const Error&) {
        return error_response(404, "unknown candidate type");
      }
      const auto c = cached(*e);
      const BinaryMask& m = card_mask(*c, card);
      return png_response(parts[3] == "mask" ? encode_png(m) : encode_png(overlay(c->loaded.image, m)));
    }
    return error_response(404, "not found");
  } catch (const Error& err) {
    return error_response(422, err.what());
  }
}

HttpServer::HttpServer(ReviewService& svc) : impl_(std::make_unique<httplib::Server>()) {
  auto bridge = [&svc](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const Response r = svc.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  impl_->Get(R"(/api/.*)", bridge);
  impl_->Post(R"(/api/.*)", bridge);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->bind_to_any_port(host) : (impl_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw DataError("cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::serve() { impl_->listen_after_bind(); }

void HttpServer::stop() { impl_->stop(); }

void run_http(ReviewService& svc, const std::string& host, int port) {
  HttpServer server(svc);
  server.bind(host, port);
  server.serve();
}

}  // namespace lesion::serve
