#pragma once

/// @file metrics.hpp
/// @brief Run measurements and their CSV / JSON export.
///
/// Every time value is exported in nanoseconds with three decimals, which is
/// an exact rendering of the internal picosecond clock, so export followed by
/// import is lossless for counters and times.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tierlab/units.hpp"
#include "tierlab/vmem.hpp"

namespace tierlab {

/// Latency distribution over log2 buckets. Bucket 0 holds samples below 1 ns,
/// bucket k holds [2^(k-1), 2^k) ns, the last bucket everything from 2^30 ns up.
class LatencyHistogram {
public:
    static constexpr std::size_t kBuckets = 32;

    void record(SimTime latency);
    void merge(const LatencyHistogram& other);

    std::uint64_t count() const { return count_; }
    SimTime sum() const { return sum_; }
    SimTime min() const { return count_ ? min_ : 0; }
    SimTime max() const { return count_ ? max_ : 0; }
    const std::array<std::uint64_t, kBuckets>& buckets() const { return buckets_; }

    double mean_ns() const;
    /// Quantile @p q in [0, 1], interpolated inside its bucket and clamped to the observed range.
    double percentile_ns(double q) const;

    static std::size_t bucket_of(SimTime latency);

    /// Rebuild from exported fields.
    static LatencyHistogram from_parts(std::uint64_t count, SimTime sum, SimTime min, SimTime max,
                                       const std::array<std::uint64_t, kBuckets>& buckets);

    friend bool operator==(const LatencyHistogram&, const LatencyHistogram&) = default;

private:
    std::array<std::uint64_t, kBuckets> buckets_{};
    std::uint64_t count_ = 0;
    SimTime sum_ = 0;
    SimTime min_ = 0;
    SimTime max_ = 0;
};

struct DeviceMetrics {
    std::string device_id;
    Bytes bytes_served = 0;     ///< whole run, requests and migrations
    Bytes measured_bytes = 0;   ///< inside the measurement window
    double achieved_gbps = 0.0;
    double utilization = 0.0;   ///< busy fraction of the measurement window
};

struct LinkMetrics {
    std::string link_id;
    bool a_to_b = true;
    Bytes bytes_served = 0;
    double achieved_gbps = 0.0;
    double utilization = 0.0;
};

struct ObjectMetrics {
    std::string name;
    std::uint64_t access_count = 0;
    Bytes bytes = 0;
};

struct TimelinePoint {
    SimTime time = 0;
    VmStat counters;
};

struct RunMetrics {
    std::string run_id;
    std::string policy;
    std::string workload;
    std::size_t threads = 0;
    std::uint64_t seed = 0;
    std::string config_digest;

    SimTime simulated_runtime = 0;
    SimTime measure_begin = 0;
    SimTime measure_end = 0;

    /// Every completed request. CSV latency columns use `measured_latency`
    /// (requests issued inside the measurement window).
    LatencyHistogram latency;
    LatencyHistogram measured_latency;
    std::vector<LatencyHistogram> per_thread;

    double total_gbps = 0.0;
    std::vector<DeviceMetrics> devices;
    std::vector<LinkMetrics> links;
    VmStat counters;
    std::vector<ObjectMetrics> objects;
    Bytes migration_bytes = 0;  ///< device bytes charged by page migrations (both ends)

    std::uint64_t issued = 0;
    std::uint64_t completed = 0;
    std::uint64_t outstanding = 0;

    std::vector<TimelinePoint> timeline;

    double mean_latency_ns() const { return measured_latency.mean_ns(); }
    double p50_latency_ns() const { return measured_latency.percentile_ns(0.50); }
    double p99_latency_ns() const { return measured_latency.percentile_ns(0.99); }
    const DeviceMetrics* device(const std::string& id) const;
};

enum class ExportFormat { Csv, Json };

/// Fixed-point decimal rendering, independent of the global locale.
std::string fixed(double value, int decimals);
/// Picoseconds as nanoseconds with three decimals.
std::string ns_text(SimTime ps);

/// Quote @p s for CSV when it holds a comma, quote or newline.
std::string csv_field(const std::string& s);

/// Header for rows of runs over @p device_ids.
std::string csv_header(const std::vector<std::string>& device_ids);
std::string csv_row(const RunMetrics& m);
/// Header plus one row per run. All runs must share the device list. An empty
/// list yields the header and one zeroed row.
std::string export_csv(const std::vector<RunMetrics>& runs, const std::vector<std::string>& device_ids = {});
std::string export_json(const RunMetrics& m);
std::string export_json(const std::vector<RunMetrics>& runs);

/// Parse output of `export_json` (single run object). Throws std::runtime_error.
RunMetrics import_json(const std::string& text);
std::vector<RunMetrics> import_json_array(const std::string& text);

/// Two-column "x,y" series.
std::string plot_series(const std::string& x_label, const std::string& y_label,
                        const std::vector<std::pair<double, double>>& points);

/// FNV-1a 64 over @p text, as 16 hex digits.
std::string digest(const std::string& text);

}  // namespace tierlab
