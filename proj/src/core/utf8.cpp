#include "tae/core/utf8.hpp"

namespace tae::utf8 {

namespace {

std::size_t sequence_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead & 0xE0) == 0xC0) return 2;
    if ((lead & 0xF0) == 0xE0) return 3;
    if ((lead & 0xF8) == 0xF0) return 4;
    return 1;
}

std::size_t advance(std::string_view text, std::size_t pos) {
    std::size_t n = sequence_length(static_cast<unsigned char>(text[pos]));
    if (pos + n > text.size()) return pos + 1;
    for (std::size_t k = 1; k < n; ++k) {
        if ((static_cast<unsigned char>(text[pos + k]) & 0xC0) != 0x80) return pos + 1;
    }
    return pos + n;
}

}  // namespace

std::size_t length(std::string_view text) {
    std::size_t count = 0;
    for (std::size_t pos = 0; pos < text.size(); pos = advance(text, pos)) ++count;
    return count;
}

std::size_t byte_offset(std::string_view text, std::size_t index) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < index && pos < text.size(); ++i) pos = advance(text, pos);
    return pos;
}

std::string substr(std::string_view text, std::size_t begin, std::size_t count) {
    std::size_t from = byte_offset(text, begin);
    if (count == std::string::npos) return std::string(text.substr(from));
    std::size_t to = from + byte_offset(text.substr(from), count);
    return std::string(text.substr(from, to - from));
}

}  // namespace tae::utf8
