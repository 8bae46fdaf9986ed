#include "tierlab/devices.hpp"

#include <algorithm>

#include "tierlab/errors.hpp"

namespace tierlab {

const char* to_string(DeviceKind kind) {
    switch (kind) {
        case DeviceKind::LDRAM: return "LDRAM";
        case DeviceKind::RDRAM: return "RDRAM";
        case DeviceKind::CXL: return "CXL";
    }
    return "?";
}

const char* to_string(IssueClass cls) {
    return cls == IssueClass::Sequential ? "sequential" : "random";
}

std::optional<DeviceKind> parse_device_kind(const std::string& text) {
    if (text == "LDRAM" || text == "ldram") return DeviceKind::LDRAM;
    if (text == "RDRAM" || text == "rdram") return DeviceKind::RDRAM;
    if (text == "CXL" || text == "cxl") return DeviceKind::CXL;
    return std::nullopt;
}

std::optional<IssueClass> parse_issue_class(const std::string& text) {
    if (text == "sequential" || text == "seq") return IssueClass::Sequential;
    if (text == "random" || text == "rand") return IssueClass::Random;
    return std::nullopt;
}

void DeviceSpec::validate() const {
    const std::string at = "devices." + device_id;
    if (device_id.empty()) throw ConfigError("devices", "device_id must be non-empty");
    if (capacity_bytes == 0) throw ConfigError(at + ".capacity_bytes", "must be > 0");
    if (!(base_latency_ns > 0.0)) throw ConfigError(at + ".base_latency_ns", "must be > 0");
    if (!(peak_bandwidth_gbps > 0.0)) throw ConfigError(at + ".peak_bandwidth_gbps", "must be > 0");
    for (const auto& [cls, cap] : per_thread_issue_cap_gbps) {
        const std::string key = at + ".per_thread_issue_cap_gbps." + to_string(cls);
        if (!(cap > 0.0)) throw ConfigError(key, "must be > 0");
        if (cap > peak_bandwidth_gbps) throw ConfigError(key, "exceeds peak_bandwidth_gbps");
    }
}

std::optional<double> DeviceSpec::issue_cap(IssueClass cls) const {
    auto it = per_thread_issue_cap_gbps.find(cls);
    if (it == per_thread_issue_cap_gbps.end()) return std::nullopt;
    return it->second;
}

BandwidthWindow::BandwidthWindow(SimTime window)
    : window_(window), bucket_width_(std::max<SimTime>(1, window / static_cast<SimTime>(kBuckets))) {
    epoch_.fill(-1);
}

void BandwidthWindow::record(SimTime completion, Bytes bytes) {
    const std::int64_t epoch = completion / bucket_width_;
    const auto slot = static_cast<std::size_t>(epoch % static_cast<std::int64_t>(kBuckets));
    if (epoch_[slot] != epoch) {
        // Stale slots belong to an older lap of the ring. A record older than
        // the slot's lap is outside the window already.
        if (epoch_[slot] > epoch) return;
        epoch_[slot] = epoch;
        bytes_[slot] = 0;
    }
    bytes_[slot] += bytes;
}

Bytes BandwidthWindow::bytes_in_window(SimTime now) const {
    const std::int64_t newest = now / bucket_width_;
    const std::int64_t oldest = newest - static_cast<std::int64_t>(kBuckets) + 1;
    Bytes total = 0;
    for (std::size_t i = 0; i < kBuckets; ++i) {
        if (epoch_[i] >= oldest && epoch_[i] <= newest) total += bytes_[i];
    }
    return total;
}

double BandwidthWindow::gbps(SimTime now) const {
    return gbps_over(bytes_in_window(now), bucket_width_ * static_cast<SimTime>(kBuckets));
}

SimTime service(ServerState& state, double peak_gbps, const ServiceRequest& request) {
    // Back-to-back transfers carry the sub-picosecond rounding remainder, so a
    // saturated server sustains exactly its peak instead of the rounded rate.
    if (request.arrival > state.busy_until) state.carry_ps = 0.0;
    const SimTime start = std::max(request.arrival, state.busy_until);
    const double exact = static_cast<double>(request.bytes) * 1000.0 / peak_gbps + state.carry_ps;
    const SimTime transfer = std::llround(exact);
    state.carry_ps = exact - static_cast<double>(transfer);
    const SimTime done = start + transfer;
    state.busy_until = done;
    state.bytes_served += request.bytes;
    state.busy_time += transfer;
    ++state.requests;
    state.window.record(done, request.bytes);
    if (done >= state.measure_begin && done <= state.measure_end) state.measured_bytes += request.bytes;
    const SimTime lo = std::max(start, state.measure_begin);
    const SimTime hi = std::min(done, state.measure_end);
    if (hi > lo) state.measured_busy += hi - lo;
    return done;
}

double unloaded_latency(const DeviceSpec& spec) { return spec.base_latency_ns; }

double analytic_bandwidth(const DeviceSpec& spec, IssueClass cls, std::size_t thread_count) {
    if (thread_count == 0) return 0.0;
    const auto cap = spec.issue_cap(cls);
    if (!cap) return spec.peak_bandwidth_gbps;
    return std::min(static_cast<double>(thread_count) * *cap, spec.peak_bandwidth_gbps);
}

}  // namespace tierlab
