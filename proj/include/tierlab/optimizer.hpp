#pragma once

/// @file optimizer.hpp
/// @brief Thread-to-device assignment that maximizes aggregate analytic bandwidth.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tierlab/devices.hpp"
#include "tierlab/topology.hpp"

namespace tierlab {

/// Achievable bandwidth of one device (or path) as a function of thread count.
struct BandwidthCurve {
    std::string device_id;
    double unloaded_latency_ns = 0.0;  ///< tie-breaker: lower wins
    std::function<double(std::size_t)> bandwidth;
};

struct Assignment {
    std::vector<std::size_t> threads;  ///< per curve, in input order
    double total_gbps = 0.0;
};

/// min(n * cap, peak) with the given tie-break latency.
BandwidthCurve linear_curve(std::string device_id, double cap_gbps, double peak_gbps, double latency_ns);

/// Curve for @p spec reached at @p path_peak_gbps (the slowest stage of its path).
BandwidthCurve device_curve(const DeviceSpec& spec, IssueClass cls, double path_peak_gbps, double latency_ns);

/// One curve per node as seen from @p socket: the device's issue cap, capped
/// by the path bottleneck, tie-broken by unloaded path latency.
std::vector<BandwidthCurve> path_curves(const Topology& topology, std::size_t socket, IssueClass cls,
                                        const std::vector<std::size_t>& nodes = {});

/// Greedy marginal-gain assignment. Each thread goes to the curve with the
/// largest increment; ties go to the lowest unloaded latency, then the lowest
/// device id. Threads with no gain anywhere are parked on the lowest-latency
/// curve. Throws EmptyDeviceSet.
Assignment assign_threads(const std::vector<BandwidthCurve>& curves, std::size_t total_threads);

/// Best total over every composition of @p total_threads (reference for tests).
Assignment exhaustive_assign(const std::vector<BandwidthCurve>& curves, std::size_t total_threads);

}  // namespace tierlab
