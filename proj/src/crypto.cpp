#include "issuetag/crypto.hpp"

#include <openssl/bio.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/pem.h>

#include <memory>
#include <stdexcept>

namespace issuetag::crypto {

std::string hmac_sha256_hex(std::string_view secret, std::string_view message) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  if (!HMAC(EVP_sha256(), secret.data(), static_cast<int>(secret.size()),
            reinterpret_cast<const unsigned char*>(message.data()), message.size(), digest,
            &digest_len)) {
    throw std::runtime_error("HMAC-SHA256 failed");
  }
  static const char* hex_digits = "0123456789abcdef";
  std::string hex;
  hex.reserve(digest_len * 2);
  for (unsigned int i = 0; i < digest_len; ++i) {
    hex.push_back(hex_digits[digest[i] >> 4]);
    hex.push_back(hex_digits[digest[i] & 0x0F]);
  }
  return hex;
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  unsigned char acc = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    acc |= static_cast<unsigned char>(a[i]) ^ static_cast<unsigned char>(b[i]);
  }
  return acc == 0;
}

std::string base64url_encode(std::string_view bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= bytes.size()) {
    uint32_t chunk = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(alphabet[(chunk >> 18) & 0x3F]);
    out.push_back(alphabet[(chunk >> 12) & 0x3F]);
    out.push_back(alphabet[(chunk >> 6) & 0x3F]);
    out.push_back(alphabet[chunk & 0x3F]);
    i += 3;
  }
  size_t remaining = bytes.size() - i;
  if (remaining == 1) {
    uint32_t chunk = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(alphabet[(chunk >> 18) & 0x3F]);
    out.push_back(alphabet[(chunk >> 12) & 0x3F]);
  } else if (remaining == 2) {
    uint32_t chunk = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(alphabet[(chunk >> 18) & 0x3F]);
    out.push_back(alphabet[(chunk >> 12) & 0x3F]);
    out.push_back(alphabet[(chunk >> 6) & 0x3F]);
  }
  return out;
}

std::string make_rs256_jwt(const std::string& issuer, const std::string& private_key_pem,
                           int64_t issued_at, int64_t expires_at) {
  std::string header = R"({"alg":"RS256","typ":"JWT"})";
  std::string payload = "{\"iat\":" + std::to_string(issued_at) +
                        ",\"exp\":" + std::to_string(expires_at) + ",\"iss\":\"" + issuer + "\"}";
  std::string signing_input = base64url_encode(header) + "." + base64url_encode(payload);

  std::unique_ptr<BIO, decltype(&BIO_free)> bio(
      BIO_new_mem_buf(private_key_pem.data(), static_cast<int>(private_key_pem.size())),
      BIO_free);
  if (!bio) throw std::runtime_error("JWT: cannot create key buffer");
  std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> key(
      PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr), EVP_PKEY_free);
  if (!key) throw std::runtime_error("JWT: cannot parse RSA private key (PEM)");

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key.get()) != 1) {
    throw std::runtime_error("JWT: cannot initialize signer");
  }
  size_t sig_len = 0;
  if (EVP_DigestSign(ctx.get(), nullptr, &sig_len,
                     reinterpret_cast<const unsigned char*>(signing_input.data()),
                     signing_input.size()) != 1) {
    throw std::runtime_error("JWT: signing failed");
  }
  std::string signature(sig_len, '\0');
  if (EVP_DigestSign(ctx.get(), reinterpret_cast<unsigned char*>(signature.data()), &sig_len,
                     reinterpret_cast<const unsigned char*>(signing_input.data()),
                     signing_input.size()) != 1) {
    throw std::runtime_error("JWT: signing failed");
  }
  signature.resize(sig_len);
  return signing_input + "." + base64url_encode(signature);
}

}  // namespace issuetag::crypto
