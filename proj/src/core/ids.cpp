#include "tae/core/ids.hpp"

#include <array>

namespace tae {

namespace {

struct PrefixEntry {
    IdKind kind;
    std::string_view prefix;
};

constexpr std::array<PrefixEntry, 8> kPrefixes{{
    {IdKind::Asset, "asset"},
    {IdKind::Track, "track"},
    {IdKind::Clip, "clip"},
    {IdKind::Anim, "anim"},
    {IdKind::Sugg, "sugg"},
    {IdKind::Sess, "sess"},
    {IdKind::Step, "step"},
    {IdKind::Prompt, "prompt"},
}};

}  // namespace

std::string_view id_kind_prefix(IdKind kind) {
    for (const auto& e : kPrefixes) {
        if (e.kind == kind) return e.prefix;
    }
    return {};
}

std::optional<IdKind> id_kind_from_prefix(std::string_view prefix) {
    for (const auto& e : kPrefixes) {
        if (e.prefix == prefix) return e.kind;
    }
    return std::nullopt;
}

std::optional<IdKind> ObjectId::kind() const {
    auto pos = value.find('_');
    if (pos == std::string::npos) return std::nullopt;
    return id_kind_from_prefix(std::string_view(value).substr(0, pos));
}

bool ObjectId::well_formed(std::string_view v) {
    auto pos = v.find('_');
    if (pos == std::string_view::npos) return false;
    if (!id_kind_from_prefix(v.substr(0, pos))) return false;
    auto suffix = v.substr(pos + 1);
    if (suffix.size() != 8) return false;
    for (char c : suffix) {
        if (kBase32Alphabet.find(c) == std::string_view::npos) return false;
    }
    return true;
}

bool ObjectId::well_formed(std::string_view v, IdKind kind) {
    if (!well_formed(v)) return false;
    auto prefix = id_kind_prefix(kind);
    return v.substr(0, prefix.size()) == prefix && v[prefix.size()] == '_';
}

ObjectId IdGenerator::next(IdKind kind) {
    std::string prefix(id_kind_prefix(kind));
    while (true) {
        std::uint64_t bits = rng_();
        std::string value = prefix + "_";
        for (int i = 0; i < 8; ++i) {
            value.push_back(kBase32Alphabet[bits & 31U]);
            bits >>= 5;
        }
        if (issued_.insert(value).second) return ObjectId(std::move(value));
    }
}

}  // namespace tae
