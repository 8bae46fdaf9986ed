#pragma once

/// @file devices.hpp
/// @brief Memory devices as a propagation stage behind a FIFO bandwidth server.
///
/// A device does not model banks or rows. Loaded latency and saturation come
/// from queueing at the FIFO server; the unloaded propagation latency
/// (`base_latency_ns`) is added by path traversal, not by `service()`.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tierlab/units.hpp"

namespace tierlab {

enum class DeviceKind { LDRAM, RDRAM, CXL };

/// Issue class used to look up a device's per-thread issue cap.
enum class IssueClass { Sequential, Random };

const char* to_string(DeviceKind kind);
const char* to_string(IssueClass cls);
std::optional<DeviceKind> parse_device_kind(const std::string& text);
std::optional<IssueClass> parse_issue_class(const std::string& text);

struct DeviceSpec {
    std::string device_id;
    DeviceKind kind = DeviceKind::LDRAM;
    Bytes capacity_bytes = 0;
    double base_latency_ns = 0.0;      ///< unloaded 64 B random read, device portion only
    double peak_bandwidth_gbps = 0.0;
    std::map<IssueClass, double> per_thread_issue_cap_gbps;  ///< calibration; absent = unlimited

    /// Throws ConfigError naming the violated field.
    void validate() const;

    /// Cap for @p cls, if configured.
    std::optional<double> issue_cap(IssueClass cls) const;
};

struct ServiceRequest {
    Bytes bytes = 0;
    SimTime arrival = 0;
};

/// Rolling bandwidth accounting: bytes bucketed by completion time over a
/// fixed trailing window.
class BandwidthWindow {
public:
    static constexpr std::size_t kBuckets = 64;

    explicit BandwidthWindow(SimTime window = 1'000'000'000 /* 1 ms */);

    void record(SimTime completion, Bytes bytes);
    /// Bytes completed in (now - window, now], at bucket granularity.
    Bytes bytes_in_window(SimTime now) const;
    double gbps(SimTime now) const;
    SimTime window() const { return window_; }

private:
    SimTime window_;
    SimTime bucket_width_;
    std::array<Bytes, kBuckets> bytes_{};
    std::array<std::int64_t, kBuckets> epoch_{};
};

/// FIFO server state. One instance per device and per link direction.
struct ServerState {
    SimTime busy_until = 0;
    double carry_ps = 0.0;  ///< rounding remainder of the last back-to-back transfer
    Bytes bytes_served = 0;
    SimTime busy_time = 0;
    std::uint64_t requests = 0;
    BandwidthWindow window;

    // Measurement interval; bytes whose service completes inside it are counted.
    SimTime measure_begin = 0;
    SimTime measure_end = kNever;
    Bytes measured_bytes = 0;
    SimTime measured_busy = 0;
};

using DeviceState = ServerState;

/// Serve @p request at @p peak_gbps. Returns the completion time of the transfer.
/// `busy_until` advances to start + bytes/peak.
SimTime service(ServerState& state, double peak_gbps, const ServiceRequest& request);

inline SimTime service(DeviceState& state, const DeviceSpec& spec, const ServiceRequest& request) {
    return service(state, spec.peak_bandwidth_gbps, request);
}

/// Device contribution to unloaded latency, in ns.
double unloaded_latency(const DeviceSpec& spec);

/// min(threads × cap[cls], peak). A missing cap means one thread saturates the device.
double analytic_bandwidth(const DeviceSpec& spec, IssueClass cls, std::size_t thread_count);

}  // namespace tierlab
