#include "tierlab/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "tierlab/errors.hpp"

namespace tierlab {

namespace {

// Increments closer than this are treated as ties.
constexpr double kTieEpsilon = 1e-9;

bool preferred(const BandwidthCurve& a, const BandwidthCurve& b) {
    if (a.unloaded_latency_ns != b.unloaded_latency_ns) return a.unloaded_latency_ns < b.unloaded_latency_ns;
    return a.device_id < b.device_id;
}

double total_of(const std::vector<BandwidthCurve>& curves, const std::vector<std::size_t>& n) {
    double total = 0.0;
    for (std::size_t i = 0; i < curves.size(); ++i) total += curves[i].bandwidth(n[i]);
    return total;
}

}  // namespace

BandwidthCurve linear_curve(std::string device_id, double cap_gbps, double peak_gbps, double latency_ns) {
    return {std::move(device_id), latency_ns, [cap_gbps, peak_gbps](std::size_t n) {
                return std::min(static_cast<double>(n) * cap_gbps, peak_gbps);
            }};
}

BandwidthCurve device_curve(const DeviceSpec& spec, IssueClass cls, double path_peak_gbps, double latency_ns) {
    return {spec.device_id, latency_ns, [spec, cls, path_peak_gbps](std::size_t n) {
                return std::min(analytic_bandwidth(spec, cls, n), path_peak_gbps);
            }};
}

std::vector<BandwidthCurve> path_curves(const Topology& topology, std::size_t socket, IssueClass cls,
                                        const std::vector<std::size_t>& nodes) {
    std::vector<std::size_t> which = nodes;
    if (which.empty())
        for (std::size_t i = 0; i < topology.nodes().size(); ++i) which.push_back(i);
    std::vector<BandwidthCurve> curves;
    for (auto n : which) {
        const DataPath path = resolve_path(topology, Agent::socket(socket), n);
        curves.push_back(device_curve(topology.node(n).device, cls, path_bandwidth(path, topology),
                                      path_latency(path, topology)));
    }
    return curves;
}

Assignment assign_threads(const std::vector<BandwidthCurve>& curves, std::size_t total_threads) {
    if (curves.empty()) throw EmptyDeviceSet("assign_threads needs at least one device curve");
    Assignment a;
    a.threads.assign(curves.size(), 0);
    std::vector<double> current(curves.size(), 0.0);
    for (std::size_t i = 0; i < curves.size(); ++i) current[i] = curves[i].bandwidth(0);

    std::size_t fastest = 0;
    for (std::size_t i = 1; i < curves.size(); ++i)
        if (preferred(curves[i], curves[fastest])) fastest = i;

    for (std::size_t t = 0; t < total_threads; ++t) {
        std::size_t best = curves.size();
        double best_gain = 0.0;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const double gain = curves[i].bandwidth(a.threads[i] + 1) - current[i];
            if (gain <= kTieEpsilon) continue;
            if (best == curves.size() || gain > best_gain + kTieEpsilon ||
                (std::abs(gain - best_gain) <= kTieEpsilon && preferred(curves[i], curves[best]))) {
                best = i;
                best_gain = gain;
            }
        }
        if (best == curves.size()) best = fastest;  // everything saturated
        ++a.threads[best];
        current[best] = curves[best].bandwidth(a.threads[best]);
    }
    a.total_gbps = total_of(curves, a.threads);
    return a;
}

Assignment exhaustive_assign(const std::vector<BandwidthCurve>& curves, std::size_t total_threads) {
    if (curves.empty()) throw EmptyDeviceSet("exhaustive_assign needs at least one device curve");
    Assignment best;
    best.total_gbps = -1.0;
    std::vector<std::size_t> n(curves.size(), 0);
    // Enumerate compositions: the last curve takes the remainder.
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i + 1 == curves.size()) {
            n[i] = left;
            const double total = total_of(curves, n);
            if (total > best.total_gbps) best = {n, total};
            return;
        }
        for (std::size_t k = 0; k <= left; ++k) {
            n[i] = k;
            rec(i + 1, left - k);
        }
    };
    rec(0, total_threads);
    return best;
}

}  // namespace tierlab
