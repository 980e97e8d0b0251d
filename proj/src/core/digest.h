#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace entailre {

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
std::string FileSha256Hex(const std::filesystem::path &path);

}  // namespace entailre
