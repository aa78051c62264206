#include "issuetag/service.hpp"

#include <iostream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace issuetag {

bool DeliveryCache::insert_if_absent(const std::string& delivery_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = index_.find(delivery_id);
  if (it != index_.end()) {
    order_.splice(order_.begin(), order_, it->second);
    return false;
  }
  order_.push_front(delivery_id);
  index_.emplace(delivery_id, order_.begin());
  if (index_.size() > capacity_) {
    index_.erase(order_.back());
    order_.pop_back();
  }
  return true;
}

size_t DeliveryCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return index_.size();
}

WebhookService::WebhookService(Model model, std::shared_ptr<PlatformClient> api,
                               ServiceConfig config)
    : model_(std::move(model)),
      fingerprint_(model_.fingerprint()),
      api_(std::move(api)),
      config_(std::move(config)),
      dedup_(config_.dedup_capacity),
      server_(std::make_unique<httplib::Server>()),
      started_at_(std::chrono::steady_clock::now()) {
  setup_routes();
}

WebhookService::~WebhookService() { stop(); }

void WebhookService::write_log(const std::string& line) const {
  if (log) {
    log(line);
  } else {
    std::cerr << line << '\n';
  }
}

void WebhookService::setup_routes() {
  server_->Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::ordered_json body;
    body["status"] = "ok";
    body["model_fingerprint"] = fingerprint_;
    body["labels"] = model_.labels;
    body["uptime_seconds"] = std::chrono::duration_cast<std::chrono::seconds>(
                                 std::chrono::steady_clock::now() - started_at_)
                                 .count();
    res.set_content(body.dump(), "application/json");
  });

  server_->Post("/webhook", [this](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard<std::mutex> lock(stats_mutex_);
      ++stats_.received;
    }
    auto respond = [&res](int status, nlohmann::ordered_json body) {
      res.status = status;
      res.set_content(body.dump(), "application/json");
    };
    std::string delivery = req.get_header_value("X-GitHub-Delivery");
    std::string signature = req.get_header_value("X-Hub-Signature-256");
    if (!verify_signature(req.body, signature, config_.webhook_secret)) {
      std::lock_guard<std::mutex> lock(stats_mutex_);
      ++stats_.rejected;
      write_log("delivery " + delivery + ": invalid signature");
      respond(401, {{"error", "invalid signature"}});
      return;
    }
    if (!dedup_.insert_if_absent(delivery)) {
      std::lock_guard<std::mutex> lock(stats_mutex_);
      ++stats_.duplicates;
      write_log("delivery " + delivery + ": duplicate, ignored");
      respond(200, {{"status", "duplicate"}});
      return;
    }
    WebhookHeaders headers{req.get_header_value("X-GitHub-Event"), delivery};
    std::variant<WebhookEvent, IgnoredEvent> parsed;
    try {
      parsed = parse_event(req.body, headers);
    } catch (const MalformedPayload& e) {
      std::lock_guard<std::mutex> lock(stats_mutex_);
      ++stats_.rejected;
      write_log("delivery " + delivery + ": malformed payload: " + e.what());
      respond(400, {{"error", e.what()}});
      return;
    }
    if (std::holds_alternative<IgnoredEvent>(parsed)) {
      std::lock_guard<std::mutex> lock(stats_mutex_);
      ++stats_.ignored;
      respond(200, {{"status", "ignored"}, {"reason", std::get<IgnoredEvent>(parsed).reason}});
      return;
    }
    const WebhookEvent& event = std::get<WebhookEvent>(parsed);
    LabelAssignment assignment = handle(event, model_, *api_, config_.confidence_floor);
    nlohmann::ordered_json body;
    body["repo"] = assignment.repo_full_name;
    body["issue"] = assignment.issue_number;
    switch (assignment.outcome) {
      case AssignmentOutcome::Applied: {
        std::lock_guard<std::mutex> lock(stats_mutex_);
        ++stats_.applied;
        body["status"] = "applied";
        body["label"] = assignment.label;
        break;
      }
      case AssignmentOutcome::SkippedLowConfidence:
        body["status"] = "skipped_low_confidence";
        body["label"] = assignment.label;
        break;
      case AssignmentOutcome::ApiError:
        body["status"] = "api_error";
        body["error"] = assignment.error_message;
        body["retriable"] = assignment.retriable;
        break;
    }
    write_log("delivery " + delivery + ": " + body["status"].get<std::string>() + " " +
              assignment.repo_full_name + "#" + std::to_string(assignment.issue_number));
    // Platform retries are driven by the retriable flag in the body, not by
    // response codes; the delivery itself was accepted.
    respond(200, body);
  });
}

bool WebhookService::listen(uint16_t port) {
  write_log("listening on port " + std::to_string(port));
  return server_->listen(config_.bind_address, port);
}

int WebhookService::listen_on_ephemeral_port() {
  int port = server_->bind_to_any_port("127.0.0.1");
  if (port <= 0) return port;
  std::thread([this] { server_->listen_after_bind(); }).detach();
  server_->wait_until_ready();
  return port;
}

void WebhookService::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void WebhookService::wait_until_ready() const { server_->wait_until_ready(); }

ServiceStats WebhookService::stats() const {
  std::lock_guard<std::mutex> lock(stats_mutex_);
  return stats_;
}

}  // namespace issuetag
