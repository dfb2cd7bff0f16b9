#pragma once

#include <cstdint>

namespace campmon {

// Unix epoch seconds, UTC. All bucketing uses fixed 3600-second hours.
using Timestamp = std::int64_t;

constexpr Timestamp kSecondsPerHour = 3600;
constexpr Timestamp kSecondsPerDay = 86400;

// Largest multiple of 3600 that is <= t.
constexpr Timestamp hour_floor(Timestamp t) {
    return (t / kSecondsPerHour) * kSecondsPerHour;
}

constexpr Timestamp hours(std::int64_t n) { return n * kSecondsPerHour; }
constexpr Timestamp days(std::int64_t n) { return n * kSecondsPerDay; }

} // namespace campmon
