#include <doctest.h>

#include <openssl/evp.h>
#include <openssl/pem.h>

#include <atomic>
#include <memory>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "issuetag/crypto.hpp"
#include "issuetag/github_client.hpp"
#include "issuetag/service.hpp"
#include "synthetic.hpp"

using namespace issuetag;

namespace {

const std::string kSecret = "super-secret-webhook-token";

Model small_model() {
  auto corpus = testsupport::separable_corpus(40, 71);
  TrainConfig config;
  config.dim = 12;
  config.epochs = 8;
  config.min_count = 1;
  config.seed = 3;
  return train(corpus, config);
}

std::string issue_payload(int number, const std::string& title, const std::string& body) {
  nlohmann::json payload;
  payload["action"] = "opened";
  payload["issue"]["number"] = number;
  payload["issue"]["title"] = title;
  payload["issue"]["body"] = body;
  payload["repository"]["full_name"] = "acme/widget";
  payload["installation"]["id"] = 42;
  return payload.dump();
}

httplib::Headers signed_headers(const std::string& body, const std::string& delivery,
                                const std::string& event = "issues") {
  return {
      {"X-GitHub-Event", event},
      {"X-GitHub-Delivery", delivery},
      {"X-Hub-Signature-256", "sha256=" + crypto::hmac_sha256_hex(kSecret, body)},
  };
}

struct RunningService {
  std::shared_ptr<MockPlatformClient> api;
  std::unique_ptr<WebhookService> service;
  std::unique_ptr<httplib::Client> client;
  int port = 0;
  std::vector<std::string> log_lines;
  std::mutex log_mutex;

  explicit RunningService(double floor = 0.0) {
    api = std::make_shared<MockPlatformClient>();
    ServiceConfig config;
    config.webhook_secret = kSecret;
    config.confidence_floor = floor;
    service = std::make_unique<WebhookService>(small_model(), api, config);
    service->log = [this](const std::string& line) {
      std::lock_guard<std::mutex> lock(log_mutex);
      log_lines.push_back(line);
    };
    port = service->listen_on_ephemeral_port();
    REQUIRE(port > 0);
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  ~RunningService() { service->stop(); }
};

}  // namespace

TEST_CASE("webhook end-to-end: signed delivery applies exactly one label") {
  RunningService running;
  std::string body = issue_payload(17, "crash segfault panic abort", "backtrace overflow");
  auto response = running.client->Post("/webhook", signed_headers(body, "delivery-1"), body,
                                       "application/json");
  REQUIRE(response);
  CHECK(response->status == 200);
  auto reply = nlohmann::json::parse(response->body);
  CHECK(reply["status"] == "applied");
  CHECK(reply["label"] == "bug");
  REQUIRE(running.api->call_count() == 1);
  CHECK(running.api->calls()[0].labels == std::vector<std::string>{"bug"});
  CHECK(running.api->calls()[0].issue_number == 17);
}

TEST_CASE("webhook end-to-end: invalid signature is rejected with zero calls") {
  RunningService running;
  std::string body = issue_payload(18, "crash", "fault");
  httplib::Headers headers = {
      {"X-GitHub-Event", "issues"},
      {"X-GitHub-Delivery", "delivery-2"},
      {"X-Hub-Signature-256", "sha256=" + std::string(64, '0')},
  };
  auto response = running.client->Post("/webhook", headers, body, "application/json");
  REQUIRE(response);
  CHECK(response->status == 401);
  CHECK(running.api->call_count() == 0);

  // missing header entirely
  auto bare = running.client->Post("/webhook",
                                   httplib::Headers{{"X-GitHub-Event", "issues"},
                                                    {"X-GitHub-Delivery", "delivery-3"}},
                                   body, "application/json");
  REQUIRE(bare);
  CHECK(bare->status == 401);
  CHECK(running.api->call_count() == 0);
}

TEST_CASE("webhook end-to-end: duplicate delivery ids produce no second call") {
  RunningService running;
  std::string body = issue_payload(19, "crash deadlock", "panic");
  auto first = running.client->Post("/webhook", signed_headers(body, "dup-1"), body,
                                    "application/json");
  REQUIRE(first);
  CHECK(first->status == 200);
  CHECK(running.api->call_count() == 1);

  auto second = running.client->Post("/webhook", signed_headers(body, "dup-1"), body,
                                     "application/json");
  REQUIRE(second);
  CHECK(second->status == 200);
  CHECK(nlohmann::json::parse(second->body)["status"] == "duplicate");
  CHECK(running.api->call_count() == 1);
}

TEST_CASE("webhook end-to-end: non-issue events are acknowledged and ignored") {
  RunningService running;
  std::string body = issue_payload(20, "crash", "fault");
  auto response = running.client->Post("/webhook", signed_headers(body, "star-1", "star"), body,
                                       "application/json");
  REQUIRE(response);
  CHECK(response->status == 200);
  CHECK(nlohmann::json::parse(response->body)["status"] == "ignored");
  CHECK(running.api->call_count() == 0);
}

TEST_CASE("webhook end-to-end: malformed payload is a 400") {
  RunningService running;
  std::string body = "{not json";
  auto response = running.client->Post("/webhook", signed_headers(body, "bad-1"), body,
                                       "application/json");
  REQUIRE(response);
  CHECK(response->status == 400);
  CHECK(running.api->call_count() == 0);
}

TEST_CASE("webhook end-to-end: api failure still acknowledges with api_error") {
  RunningService running;
  running.api->fail_label_requests(502);
  std::string body = issue_payload(21, "crash", "fault abort");
  auto response = running.client->Post("/webhook", signed_headers(body, "err-1"), body,
                                       "application/json");
  REQUIRE(response);
  CHECK(response->status == 200);
  auto reply = nlohmann::json::parse(response->body);
  CHECK(reply["status"] == "api_error");
  CHECK(reply["retriable"] == true);
}

TEST_CASE("webhook end-to-end: confidence floor short-circuits labeling") {
  RunningService running(1.1);
  std::string body = issue_payload(22, "crash", "fault");
  auto response = running.client->Post("/webhook", signed_headers(body, "floor-1"), body,
                                       "application/json");
  REQUIRE(response);
  CHECK(response->status == 200);
  CHECK(nlohmann::json::parse(response->body)["status"] == "skipped_low_confidence");
  CHECK(running.api->call_count() == 0);
}

TEST_CASE("healthz reports the loaded model fingerprint") {
  RunningService running;
  auto response = running.client->Get("/healthz");
  REQUIRE(response);
  CHECK(response->status == 200);
  auto reply = nlohmann::json::parse(response->body);
  CHECK(reply["model_fingerprint"] == running.service->model_fingerprint());
  CHECK(reply["labels"] ==
        nlohmann::json(std::vector<std::string>{"bug", "enhancement", "question"}));
  CHECK(reply.contains("uptime_seconds"));
}

TEST_CASE("secrets and tokens never appear in the service log") {
  RunningService running;
  std::string body = issue_payload(23, "crash segfault", "abort");
  running.client->Post("/webhook", signed_headers(body, "log-1"), body, "application/json");
  running.client->Post("/webhook",
                       httplib::Headers{{"X-GitHub-Event", "issues"},
                                        {"X-GitHub-Delivery", "log-2"},
                                        {"X-Hub-Signature-256", "sha256=deadbeef"}},
                       body, "application/json");
  std::lock_guard<std::mutex> lock(running.log_mutex);
  REQUIRE(!running.log_lines.empty());
  for (const auto& line : running.log_lines) {
    CHECK(line.find(kSecret) == std::string::npos);
    CHECK(line.find("mock-token") == std::string::npos);
  }
}

TEST_CASE("service latency for a small issue stays under 100ms") {
  RunningService running;
  std::string body = issue_payload(24, "crash segfault panic",
                                   std::string(900, 'x'));  // ~1 KB issue
  // warm up
  running.client->Post("/webhook", signed_headers(body, "warm-1"), body, "application/json");
  auto start = std::chrono::steady_clock::now();
  auto response = running.client->Post("/webhook", signed_headers(body, "lat-1"), body,
                                       "application/json");
  auto elapsed = std::chrono::steady_clock::now() - start;
  REQUIRE(response);
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 100);
}

TEST_CASE("delivery cache is a bounded lru with atomic check-and-insert") {
  DeliveryCache cache(3);
  CHECK(cache.insert_if_absent("a"));
  CHECK(cache.insert_if_absent("b"));
  CHECK(cache.insert_if_absent("c"));
  CHECK(!cache.insert_if_absent("a"));  // refreshes a
  CHECK(cache.insert_if_absent("d"));   // evicts b (least recent)
  CHECK(cache.size() == 3);
  CHECK(cache.insert_if_absent("b"));   // b was evicted
  CHECK(!cache.insert_if_absent("d"));
}

TEST_CASE("concurrent duplicate deliveries reach the api exactly once") {
  RunningService running;
  std::string body = issue_payload(25, "crash fault", "panic");
  auto headers = signed_headers(body, "race-1");
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      httplib::Client client("127.0.0.1", running.port);
      auto response = client.Post("/webhook", headers, body, "application/json");
      if (response && response->status == 200) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 8);
  CHECK(running.api->call_count() == 1);
}

// ---------------------------------------------------------------------------
// Real platform client against a local stand-in server.

namespace {

std::string generate_rsa_key_pem() {
  EVP_PKEY* raw = EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<size_t>(2048));
  REQUIRE(raw != nullptr);
  std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> key(raw, EVP_PKEY_free);
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new(BIO_s_mem()), BIO_free);
  REQUIRE(PEM_write_bio_PrivateKey(bio.get(), key.get(), nullptr, nullptr, 0, nullptr, nullptr) ==
          1);
  char* data = nullptr;
  long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<size_t>(len));
}

bool verify_jwt_signature(const std::string& jwt, const std::string& private_key_pem) {
  auto first_dot = jwt.find('.');
  auto second_dot = jwt.find('.', first_dot + 1);
  REQUIRE(second_dot != std::string::npos);
  std::string signing_input = jwt.substr(0, second_dot);
  std::string signature_b64 = jwt.substr(second_dot + 1);

  auto decode = [](const std::string& b64url) {
    auto value_of = [](char c) -> int {
      if (c >= 'A' && c <= 'Z') return c - 'A';
      if (c >= 'a' && c <= 'z') return c - 'a' + 26;
      if (c >= '0' && c <= '9') return c - '0' + 52;
      if (c == '-') return 62;
      if (c == '_') return 63;
      return -1;
    };
    std::string out;
    int buffer = 0, bits = 0;
    for (char c : b64url) {
      int v = value_of(c);
      if (v < 0) continue;
      buffer = (buffer << 6) | v;
      bits += 6;
      if (bits >= 8) {
        bits -= 8;
        out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
      }
    }
    return out;
  };
  std::string signature = decode(signature_b64);

  std::unique_ptr<BIO, decltype(&BIO_free)> bio(
      BIO_new_mem_buf(private_key_pem.data(), static_cast<int>(private_key_pem.size())), BIO_free);
  std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> key(
      PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr), EVP_PKEY_free);
  REQUIRE(key != nullptr);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  REQUIRE(EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key.get()) == 1);
  return EVP_DigestVerify(ctx.get(), reinterpret_cast<const unsigned char*>(signature.data()),
                          signature.size(),
                          reinterpret_cast<const unsigned char*>(signing_input.data()),
                          signing_input.size()) == 1;
}

}  // namespace

TEST_CASE("rs256 app jwt is well formed and verifiable") {
  std::string pem = generate_rsa_key_pem();
  std::string jwt = crypto::make_rs256_jwt("12345", pem, 1000, 1600);
  CHECK(verify_jwt_signature(jwt, pem));

  auto first_dot = jwt.find('.');
  std::string header = jwt.substr(0, first_dot);
  CHECK(header == crypto::base64url_encode(R"({"alg":"RS256","typ":"JWT"})"));
}

TEST_CASE("github client exchanges a jwt for a token and posts labels") {
  std::string pem = generate_rsa_key_pem();

  httplib::Server platform;
  std::atomic<int> token_requests{0};
  std::atomic<int> label_requests{0};
  std::string seen_auth_token;
  std::string seen_label_body;
  std::string seen_bearer;
  std::mutex seen_mutex;

  platform.Post("/app/installations/42/access_tokens",
                [&](const httplib::Request& req, httplib::Response& res) {
                  ++token_requests;
                  {
                    std::lock_guard<std::mutex> lock(seen_mutex);
                    seen_bearer = req.get_header_value("Authorization");
                  }
                  res.status = 201;
                  res.set_content(
                      R"({"token":"ghs_testtoken","expires_at":"2099-01-01T00:00:00Z"})",
                      "application/json");
                });
  platform.Post("/repos/acme/widget/issues/5/labels",
                [&](const httplib::Request& req, httplib::Response& res) {
                  ++label_requests;
                  {
                    std::lock_guard<std::mutex> lock(seen_mutex);
                    seen_auth_token = req.get_header_value("Authorization");
                    seen_label_body = req.body;
                  }
                  res.status = 200;
                  res.set_content("[]", "application/json");
                });
  int port = platform.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&platform] { platform.listen_after_bind(); });
  platform.wait_until_ready();

  GithubClientConfig config;
  config.api_base_url = "http://127.0.0.1:" + std::to_string(port);
  config.app_id = "12345";
  config.private_key_pem = pem;
  GithubClient client(config);

  AccessToken token = client.installation_token(42);
  CHECK(token.token == "ghs_testtoken");
  client.add_labels("acme/widget", 5, {"bug"}, token);

  {
    std::lock_guard<std::mutex> lock(seen_mutex);
    CHECK(seen_bearer.rfind("Bearer ", 0) == 0);
    CHECK(verify_jwt_signature(seen_bearer.substr(7), pem));
    CHECK(seen_auth_token == "token ghs_testtoken");
    CHECK(nlohmann::json::parse(seen_label_body)["labels"] ==
          nlohmann::json(std::vector<std::string>{"bug"}));
  }

  // token is cached until expiry
  AccessToken again = client.installation_token(42);
  CHECK(again.token == "ghs_testtoken");
  CHECK(token_requests == 1);
  CHECK(label_requests == 1);

  platform.stop();
  server_thread.join();
}
