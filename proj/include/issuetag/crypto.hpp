#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace issuetag::crypto {

std::string hmac_sha256_hex(std::string_view secret, std::string_view message);

// Constant-time equality; unequal lengths return false immediately (the
// length of the expected digest is not secret).
bool constant_time_equal(std::string_view a, std::string_view b);

std::string base64url_encode(std::string_view bytes);  // unpadded

// RS256-signed JWT for app-level authentication. `private_key_pem` is an RSA
// private key in PEM form; iat/exp are unix timestamps.
std::string make_rs256_jwt(const std::string& issuer, const std::string& private_key_pem,
                           int64_t issued_at, int64_t expires_at);

}  // namespace issuetag::crypto
