#include "issuetag/webhook.hpp"

#include <nlohmann/json.hpp>

#include "issuetag/crypto.hpp"
#include "issuetag/text.hpp"

namespace issuetag {

bool verify_signature(std::string_view raw_body, std::string_view signature_header,
                      std::string_view secret) {
  std::string expected = "sha256=" + crypto::hmac_sha256_hex(secret, raw_body);
  return crypto::constant_time_equal(signature_header, expected);
}

std::variant<WebhookEvent, IgnoredEvent> parse_event(std::string_view raw_body,
                                                     const WebhookHeaders& headers) {
  if (headers.event_kind != "issues") {
    return IgnoredEvent{"event \"" + headers.event_kind + "\" is not issues"};
  }
  nlohmann::json payload = nlohmann::json::parse(raw_body, nullptr, false);
  if (payload.is_discarded() || !payload.is_object()) {
    throw MalformedPayload("request body is not a JSON object");
  }
  std::string action = payload.value("action", "");
  if (action != "opened") {
    return IgnoredEvent{"action \"" + action + "\" is not opened"};
  }
  WebhookEvent event;
  event.delivery_id = headers.delivery_id;
  event.event_kind = headers.event_kind;
  event.action = action;
  if (!payload.contains("repository") || !payload["repository"].contains("full_name")) {
    throw MalformedPayload("missing repository.full_name");
  }
  event.repo_full_name = payload["repository"]["full_name"].get<std::string>();
  size_t slash = event.repo_full_name.find('/');
  if (slash == std::string::npos || event.repo_full_name.find('/', slash + 1) != std::string::npos) {
    throw MalformedPayload("repository.full_name is not owner/name");
  }
  if (!payload.contains("issue") || !payload["issue"].is_object()) {
    throw MalformedPayload("missing issue object");
  }
  const auto& issue = payload["issue"];
  if (!issue.contains("number") || !issue["number"].is_number_integer()) {
    throw MalformedPayload("missing issue.number");
  }
  event.issue_number = issue["number"].get<int>();
  if (event.issue_number < 1) {
    throw MalformedPayload("issue.number must be >= 1");
  }
  if (!issue.contains("title") || issue["title"].is_null()) {
    throw MalformedPayload("missing issue.title");
  }
  event.title = issue["title"].get<std::string>();
  if (issue.contains("body") && issue["body"].is_string()) {
    event.body = issue["body"].get<std::string>();
  }
  if (payload.contains("installation") && payload["installation"].contains("id")) {
    event.installation_id = payload["installation"]["id"].get<int64_t>();
  }
  return event;
}

AccessToken MockPlatformClient::installation_token(int64_t installation_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (fail_token_) {
    throw ApiError(500, "token endpoint unavailable");
  }
  return AccessToken{"mock-token-" + std::to_string(installation_id),
                     std::chrono::system_clock::now() + std::chrono::hours(1)};
}

void MockPlatformClient::add_labels(const std::string& repo_full_name, int issue_number,
                                    const std::vector<std::string>& labels, const AccessToken&) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (fail_labels_status_ != 0) {
    throw ApiError(fail_labels_status_, "label endpoint returned " +
                                            std::to_string(fail_labels_status_));
  }
  calls_.push_back({repo_full_name, issue_number, labels});
}

std::vector<MockPlatformClient::Call> MockPlatformClient::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

size_t MockPlatformClient::call_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_.size();
}

LabelAssignment handle(const WebhookEvent& event, const Model& model, PlatformClient& api,
                       double confidence_floor) {
  RawIssue raw{event.title, event.body};
  Prediction pred = predict_text(concatenate(raw), model);

  LabelAssignment assignment;
  assignment.repo_full_name = event.repo_full_name;
  assignment.issue_number = event.issue_number;
  assignment.label = pred.argmax_label;
  assignment.score = pred.scores.empty() ? 0.0 : pred.scores[pred.argmax_index];

  if (assignment.score < confidence_floor) {
    assignment.outcome = AssignmentOutcome::SkippedLowConfidence;
    return assignment;
  }
  try {
    AccessToken token = api.installation_token(event.installation_id);
    api.add_labels(event.repo_full_name, event.issue_number, {assignment.label}, token);
    assignment.outcome = AssignmentOutcome::Applied;
  } catch (const ApiError& e) {
    assignment.outcome = AssignmentOutcome::ApiError;
    assignment.error_message = e.what();
    assignment.retriable = e.retriable();
  } catch (const std::exception& e) {
    assignment.outcome = AssignmentOutcome::ApiError;
    assignment.error_message = e.what();
    assignment.retriable = true;
  }
  return assignment;
}

}  // namespace issuetag
