#pragma once

#include <string>
#include <string_view>

namespace jamids {

std::string sha256_hex(std::string_view bytes);
// Throws IoError when the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace jamids
