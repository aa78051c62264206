#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "issuetag/classifier.hpp"
#include "issuetag/webhook.hpp"

namespace httplib {
class Server;
}

namespace issuetag {

// Bounded LRU set of delivery ids with atomic check-and-insert, so redelivered
// webhooks produce no second API call.
class DeliveryCache {
 public:
  explicit DeliveryCache(size_t capacity = 10000) : capacity_(capacity) {}

  // True when the id was absent (and is now recorded).
  bool insert_if_absent(const std::string& delivery_id);
  size_t size() const;

 private:
  size_t capacity_;
  mutable std::mutex mutex_;
  std::list<std::string> order_;  // most recent at front
  std::unordered_map<std::string, std::list<std::string>::iterator> index_;
};

struct ServiceConfig {
  std::string webhook_secret;
  double confidence_floor = 0.0;
  size_t dedup_capacity = 10000;
  std::string bind_address = "0.0.0.0";
};

struct ServiceStats {
  uint64_t received = 0;
  uint64_t applied = 0;
  uint64_t ignored = 0;
  uint64_t duplicates = 0;
  uint64_t rejected = 0;  // bad signature or malformed payload
};

// POST /webhook + GET /healthz. The model is immutable shared state; the
// dedup cache is the only mutable shared structure.
class WebhookService {
 public:
  WebhookService(Model model, std::shared_ptr<PlatformClient> api, ServiceConfig config);
  ~WebhookService();

  // Blocks until stop(); returns false when the port cannot be bound.
  bool listen(uint16_t port);
  // Binds an ephemeral port and serves from a background thread (tests).
  int listen_on_ephemeral_port();
  void stop();
  void wait_until_ready() const;

  const Model& model() const { return model_; }
  const std::string& model_fingerprint() const { return fingerprint_; }
  ServiceStats stats() const;

  // Log sink, defaults to stderr. Lines never contain secrets or tokens.
  std::function<void(const std::string&)> log = nullptr;

 private:
  void setup_routes();
  void write_log(const std::string& line) const;

  Model model_;
  std::string fingerprint_;
  std::shared_ptr<PlatformClient> api_;
  ServiceConfig config_;
  DeliveryCache dedup_;
  std::unique_ptr<httplib::Server> server_;
  std::chrono::steady_clock::time_point started_at_;
  mutable std::mutex stats_mutex_;
  ServiceStats stats_;
};

}  // namespace issuetag
