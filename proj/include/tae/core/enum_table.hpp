#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tae {

/// Bidirectional enum <-> wire-name table.
template <class E, std::size_t N>
struct EnumTable {
    std::array<std::pair<E, std::string_view>, N> entries;

    [[nodiscard]] constexpr std::string_view name(E value) const {
        for (const auto& [v, n] : entries) {
            if (v == value) return n;
        }
        return {};
    }

    [[nodiscard]] constexpr std::optional<E> parse(std::string_view text) const {
        for (const auto& [v, n] : entries) {
            if (n == text) return v;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(N);
        for (const auto& [v, n] : entries) out.emplace_back(n);
        return out;
    }
};

}  // namespace tae
