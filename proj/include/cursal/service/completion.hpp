#pragma once

#include <string>

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "cursal/error.hpp"

namespace cursal::service {

/// Completion code handed to the crowdsourcing platform: the first 10 bytes
/// of HMAC-SHA256(secret, session_id), upper-case hex. Deterministic, so a
/// repeated request or a restarted service returns the same code.
inline std::string completion_code(const std::string& secret, const std::string& session_id) {
    unsigned char mac[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), secret.data(), static_cast<int>(secret.size()),
              reinterpret_cast<const unsigned char*>(session_id.data()), session_id.size(), mac, &len)) {
        throw Error("crypto_error", "HMAC computation failed");
    }
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string code;
    for (unsigned int i = 0; i < 10 && i < len; ++i) {
        code.push_back(hex[mac[i] >> 4]);
        code.push_back(hex[mac[i] & 0xf]);
    }
    return code;
}

} // namespace cursal::service
