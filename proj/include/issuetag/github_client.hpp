#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "issuetag/webhook.hpp"

namespace issuetag {

struct GithubClientConfig {
  std::string api_base_url = "https://api.github.com";
  std::string app_id;           // JWT issuer
  std::string private_key_pem;  // RSA key for app authentication
};

// HTTP client for the hosting platform's REST API: app JWT -> installation
// token exchange, then label assignment. The base URL is configuration so
// tests can point it at a local server.
class GithubClient : public PlatformClient {
 public:
  explicit GithubClient(GithubClientConfig config);

  AccessToken installation_token(int64_t installation_id) override;
  void add_labels(const std::string& repo_full_name, int issue_number,
                  const std::vector<std::string>& labels, const AccessToken& token) override;

 private:
  std::string app_jwt() const;

  GithubClientConfig config_;
  std::mutex cache_mutex_;
  std::unordered_map<int64_t, AccessToken> token_cache_;
};

}  // namespace issuetag
