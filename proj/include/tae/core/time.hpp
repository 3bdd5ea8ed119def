#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace tae {

/// Timeline time at 1 ms resolution. All timeline arithmetic is integral.
struct TimeMs {
    std::int64_t ms = 0;

    constexpr TimeMs() = default;
    constexpr explicit TimeMs(std::int64_t v) : ms(v) {}

    /// Rounds decimal seconds to the nearest millisecond.
    static TimeMs from_seconds(double seconds) { return TimeMs(std::llround(seconds * 1000.0)); }
    [[nodiscard]] constexpr double seconds() const { return static_cast<double>(ms) / 1000.0; }

    constexpr auto operator<=>(const TimeMs&) const = default;

    constexpr TimeMs operator+(TimeMs o) const { return TimeMs(ms + o.ms); }
    constexpr TimeMs operator-(TimeMs o) const { return TimeMs(ms - o.ms); }
    constexpr TimeMs& operator+=(TimeMs o) {
        ms += o.ms;
        return *this;
    }
};

}  // namespace tae
