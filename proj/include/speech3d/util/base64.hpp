#pragma once

#include <string>
#include <string_view>

namespace speech3d::util {

std::string base64_encode(std::string_view bytes);

// Throws InvalidArgument on characters outside the standard alphabet.
std::string base64_decode(std::string_view text);

}  // namespace speech3d::util
