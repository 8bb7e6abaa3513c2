#pragma once

#include <string>
#include <string_view>

namespace tdost {

/// Lower-case hex SHA-256 digests (OpenSSL EVP).
std::string sha256_hex(std::string_view data);
/// Throws DataError when the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace tdost
