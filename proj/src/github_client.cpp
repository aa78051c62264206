#include "issuetag/github_client.hpp"

#include <ctime>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "issuetag/crypto.hpp"

namespace issuetag {

namespace {

// "2026-01-02T15:04:05Z" -> time_point; falls back to now+50min when absent.
std::chrono::system_clock::time_point parse_expiry(const std::string& iso) {
  std::tm tm = {};
  if (sscanf(iso.c_str(), "%d-%d-%dT%d:%d:%d", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
             &tm.tm_min, &tm.tm_sec) == 6) {
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    time_t t = timegm(&tm);
    if (t != static_cast<time_t>(-1)) {
      return std::chrono::system_clock::from_time_t(t);
    }
  }
  return std::chrono::system_clock::now() + std::chrono::minutes(50);
}

}  // namespace

GithubClient::GithubClient(GithubClientConfig config) : config_(std::move(config)) {}

std::string GithubClient::app_jwt() const {
  int64_t now = std::chrono::duration_cast<std::chrono::seconds>(
                    std::chrono::system_clock::now().time_since_epoch())
                    .count();
  // 60s backdate tolerates clock skew; 9min lifetime stays under the cap.
  return crypto::make_rs256_jwt(config_.app_id, config_.private_key_pem, now - 60, now + 540);
}

AccessToken GithubClient::installation_token(int64_t installation_id) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = token_cache_.find(installation_id);
    if (it != token_cache_.end() && !it->second.expired(std::chrono::system_clock::now())) {
      return it->second;
    }
  }
  httplib::Client client(config_.api_base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(10);
  std::string path = "/app/installations/" + std::to_string(installation_id) + "/access_tokens";
  httplib::Headers headers = {
      {"Authorization", "Bearer " + app_jwt()},
      {"Accept", "application/vnd.github+json"},
  };
  auto response = client.Post(path, headers, "", "application/json");
  if (!response) {
    throw ApiError(0, "token exchange: transport error");
  }
  if (response->status < 200 || response->status >= 300) {
    throw ApiError(response->status,
                   "token exchange failed with status " + std::to_string(response->status));
  }
  nlohmann::json body = nlohmann::json::parse(response->body, nullptr, false);
  if (body.is_discarded() || !body.contains("token")) {
    throw ApiError(response->status, "token exchange: unexpected response body");
  }
  AccessToken token;
  token.token = body["token"].get<std::string>();
  token.expires_at = parse_expiry(body.value("expires_at", ""));
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    token_cache_[installation_id] = token;
  }
  return token;
}

void GithubClient::add_labels(const std::string& repo_full_name, int issue_number,
                              const std::vector<std::string>& labels, const AccessToken& token) {
  httplib::Client client(config_.api_base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(10);
  nlohmann::json body;
  body["labels"] = labels;
  std::string path = "/repos/" + repo_full_name + "/issues/" + std::to_string(issue_number) +
                     "/labels";
  httplib::Headers headers = {
      {"Authorization", "token " + token.token},
      {"Accept", "application/vnd.github+json"},
  };
  auto response = client.Post(path, headers, body.dump(), "application/json");
  if (!response) {
    throw ApiError(0, "add labels: transport error");
  }
  if (response->status < 200 || response->status >= 300) {
    throw ApiError(response->status,
                   "add labels failed with status " + std::to_string(response->status));
  }
}

}  // namespace issuetag
