#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>
#include <openssl/sha.h>

#include "pwalk/io.hpp"

namespace pwalk {

/// Content hash in git blob form: sha1("blob <size>\0" + content).
inline std::string git_blob_sha1(const std::string& content) {
    std::string framed = "blob " + std::to_string(content.size());
    framed.push_back('\0');
    framed += content;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(framed.data()), framed.size(), digest);
    char hex[2 * SHA_DIGEST_LENGTH + 1];
    for (int i = 0; i < SHA_DIGEST_LENGTH; ++i)
        std::snprintf(hex + 2 * i, 3, "%02x", digest[i]);
    return std::string(hex, 2 * SHA_DIGEST_LENGTH);
}

/// Every command that writes outputs drops a manifest next to them: the full
/// effective configuration plus the content hash of the spec it ran on.
/// No timestamps, so reruns with the same inputs are bit-identical.
inline void write_manifest(const std::string& out_dir, const std::string& command,
                           const nlohmann::json& config, const std::string& spec_path,
                           const std::string& spec_content) {
    nlohmann::json manifest{{"command", command},
                            {"config", config},
                            {"spec_path", spec_path},
                            {"spec_sha1", git_blob_sha1(spec_content)}};
    write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

} // namespace pwalk
