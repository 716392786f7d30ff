#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "lesionkit/cluster.hpp"
#include "lesionkit/config.hpp"
#include "lesionkit/dataset.hpp"
#include "lesionkit/pipeline.hpp"

namespace httplib {
class Server;
}

namespace lesion::serve {

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct Selection {
  std::string type;
  std::string timestamp;
  std::string user;
};

/// Review API over one dataset. Reads images and masks, writes nothing but
/// the selections file.
///   GET  /api/images?page=&page_size=
///   GET  /api/images/{id}/candidates
///   GET  /api/images/{id}/image.png
///   GET  /api/images/{id}/mask/{card}.png
///   GET  /api/images/{id}/overlay/{card}.png
///   POST /api/images/{id}/selection   {"type": card, "user": optional}
///   GET  /api/report
class ReviewService {
 public:
  ReviewService(DatasetManifest manifest, PipelineConfig cfg, std::optional<cluster::PrototypeStore> store,
                std::filesystem::path selections_path);

  Response handle(const std::string& method, const std::string& path,
                  const std::map<std::string, std::string>& query, const std::string& body);

  std::map<std::string, Selection> selections() const;
  const std::filesystem::path& selections_path() const { return selections_path_; }

 private:
  struct Cached {
    pipeline::LoadedImage loaded;
    pipeline::Segmentation seg;
  };
  std::shared_ptr<const Cached> cached(const DatasetEntry& e);
  const BinaryMask& card_mask(const Cached& c, int card) const;
  Response list_images(const std::map<std::string, std::string>& query) const;
  Response candidates(const DatasetEntry& e);
  Response select(const DatasetEntry& e, const std::string& body);
  Response report();
  void save_selections() const;

  DatasetManifest manifest_;
  PipelineConfig cfg_;
  std::optional<cluster::PrototypeStore> store_;
  std::filesystem::path selections_path_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Cached>> cache_;
  std::map<std::string, Selection> selections_;
};

/// HTTP front end for a ReviewService.
class HttpServer {
 public:
  explicit HttpServer(ReviewService& svc);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called from another thread.
  void serve();
  void stop();

 private:
  std::unique_ptr<httplib::Server> impl_;
};

/// Blocks serving `svc` over HTTP until the process is stopped.
void run_http(ReviewService& svc, const std::string& host, int port);

}  // namespace lesion::serve
