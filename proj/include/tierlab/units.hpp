#pragma once

/// @file units.hpp
/// @brief Simulated time and size units shared by every module.
///
/// Simulated time is an integer count of picoseconds. Every value that leaves
/// the simulator (metrics, CSV, JSON) is expressed in nanoseconds; three
/// decimal places represent a picosecond count exactly.

#include <cmath>
#include <cstdint>
#include <limits>

namespace tierlab {

using SimTime = std::int64_t;  ///< picoseconds
using Bytes = std::uint64_t;

inline constexpr SimTime kPsPerNs = 1000;
inline constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

constexpr SimTime ns_to_ps(double ns) {
    return static_cast<SimTime>(ns * 1000.0 + (ns >= 0 ? 0.5 : -0.5));
}

constexpr double ps_to_ns(SimTime ps) { return static_cast<double>(ps) / 1000.0; }

/// Time to move @p bytes at @p gbps (GB/s == bytes/ns), rounded to the nearest ps.
inline SimTime transfer_time(Bytes bytes, double gbps) {
    return static_cast<SimTime>(std::llround(static_cast<double>(bytes) * 1000.0 / gbps));
}

/// Bytes over a picosecond interval expressed in GB/s.
inline double gbps_over(Bytes bytes, SimTime interval_ps) {
    if (interval_ps <= 0) return 0.0;
    return static_cast<double>(bytes) * 1000.0 / static_cast<double>(interval_ps);
}

}  // namespace tierlab
