#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "issuetag/classifier.hpp"

namespace issuetag {

struct WebhookEvent {
  std::string delivery_id;
  std::string event_kind;  // "issues"
  std::string action;      // "opened"
  std::string repo_full_name;
  int issue_number = 0;
  std::string title;
  std::string body;
  int64_t installation_id = 0;
};

// Short-lived credential for API writes. Never logged or serialized.
struct AccessToken {
  std::string token;
  std::chrono::system_clock::time_point expires_at;

  bool expired(std::chrono::system_clock::time_point now,
               std::chrono::seconds skew = std::chrono::seconds(60)) const {
    return now + skew >= expires_at;
  }
};

enum class AssignmentOutcome { Applied, SkippedLowConfidence, ApiError };

struct LabelAssignment {
  std::string repo_full_name;
  int issue_number = 0;
  std::string label;
  double score = 0.0;
  AssignmentOutcome outcome = AssignmentOutcome::Applied;
  std::string error_message;  // api_error only
  bool retriable = false;     // api_error only
};

// True iff `signature_header` equals "sha256=" + lowercase-hex
// HMAC-SHA256(secret, raw_body), compared in constant time.
bool verify_signature(std::string_view raw_body, std::string_view signature_header,
                      std::string_view secret);

struct IgnoredEvent {
  std::string reason;
};

class MalformedPayload : public std::runtime_error {
 public:
  explicit MalformedPayload(const std::string& message) : std::runtime_error(message) {}
};

struct WebhookHeaders {
  std::string event_kind;
  std::string delivery_id;
};

// Parses an issues/opened delivery. Other kinds and actions come back as an
// IgnoredEvent (acknowledged, no action); broken payloads throw
// MalformedPayload. Call only after the signature verified.
std::variant<WebhookEvent, IgnoredEvent> parse_event(std::string_view raw_body,
                                                     const WebhookHeaders& headers);

class ApiError : public std::runtime_error {
 public:
  ApiError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }
  // 5xx and transport failures (status 0) are worth retrying.
  bool retriable() const { return status_ == 0 || status_ >= 500; }

 private:
  int status_;
};

class PlatformClient {
 public:
  virtual ~PlatformClient() = default;
  virtual AccessToken installation_token(int64_t installation_id) = 0;
  virtual void add_labels(const std::string& repo_full_name, int issue_number,
                          const std::vector<std::string>& labels, const AccessToken& token) = 0;
};

// In-memory client recording every call; all service tests run against it.
class MockPlatformClient : public PlatformClient {
 public:
  struct Call {
    std::string repo_full_name;
    int issue_number;
    std::vector<std::string> labels;
  };

  AccessToken installation_token(int64_t installation_id) override;
  void add_labels(const std::string& repo_full_name, int issue_number,
                  const std::vector<std::string>& labels, const AccessToken& token) override;

  std::vector<Call> calls() const;
  size_t call_count() const;
  void fail_token_requests(bool fail) { fail_token_ = fail; }
  void fail_label_requests(int status) { fail_labels_status_ = status; }

 private:
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
  bool fail_token_ = false;
  int fail_labels_status_ = 0;
};

// Classifies the issue text and assigns the predicted label through `api`.
// Failures surface in the returned record, never as exceptions.
LabelAssignment handle(const WebhookEvent& event, const Model& model, PlatformClient& api,
                       double confidence_floor = 0.0);

}  // namespace issuetag
