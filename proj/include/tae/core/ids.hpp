#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>

namespace tae {

/// Object kinds that may appear as an ObjectId prefix.
enum class IdKind { Asset, Track, Clip, Anim, Sugg, Sess, Step, Prompt };

std::string_view id_kind_prefix(IdKind kind);
std::optional<IdKind> id_kind_from_prefix(std::string_view prefix);

/**
 * @brief Engine-generated identifier of the form "<kind>_<8 base32 chars>".
 *
 * The suffix alphabet is lowercase Crockford base32 (no i, l, o, u).
 */
struct ObjectId {
    std::string value;

    ObjectId() = default;
    explicit ObjectId(std::string v) : value(std::move(v)) {}

    [[nodiscard]] bool empty() const { return value.empty(); }
    [[nodiscard]] std::optional<IdKind> kind() const;
    [[nodiscard]] const std::string& str() const { return value; }

    /// True when the value has a known prefix and an 8-char base32 suffix.
    [[nodiscard]] static bool well_formed(std::string_view v);
    [[nodiscard]] static bool well_formed(std::string_view v, IdKind kind);

    auto operator<=>(const ObjectId&) const = default;
    bool operator==(const ObjectId&) const = default;
};

inline constexpr std::string_view kBase32Alphabet = "0123456789abcdefghjkmnpqrstvwxyz";

/// Seedable id source. Remembers every id it issued or was told about so
/// it never hands out a duplicate.
class IdGenerator {
public:
    explicit IdGenerator(std::uint64_t seed = 0x7ae1d5eedULL) : rng_(seed) {}

    ObjectId next(IdKind kind);
    void reserve(const ObjectId& id) { issued_.insert(id.value); }
    void reseed(std::uint64_t seed) { rng_.seed(seed); }
    [[nodiscard]] bool issued(const ObjectId& id) const { return issued_.count(id.value) > 0; }

private:
    std::mt19937_64 rng_;
    std::set<std::string> issued_;
};

}  // namespace tae

template <>
struct std::hash<tae::ObjectId> {
    std::size_t operator()(const tae::ObjectId& id) const noexcept {
        return std::hash<std::string>{}(id.value);
    }
};
