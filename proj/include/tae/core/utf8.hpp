#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace tae::utf8 {

// Text offsets in the engine count Unicode code points, not bytes.
// Malformed sequences count one code point per byte.

std::size_t length(std::string_view text);

/// Byte offset of code point `index`; clamps to text.size().
std::size_t byte_offset(std::string_view text, std::size_t index);

std::string substr(std::string_view text, std::size_t begin, std::size_t count = std::string::npos);

}  // namespace tae::utf8
