#include "tierlab/metrics.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace tierlab {

// ---------------------------------------------------------------- histogram

std::size_t LatencyHistogram::bucket_of(SimTime latency) {
    const SimTime ns = latency / kPsPerNs;
    if (ns < 1) return 0;
    const auto width = static_cast<std::size_t>(std::bit_width(static_cast<std::uint64_t>(ns)));
    return std::min(width, kBuckets - 1);
}

void LatencyHistogram::record(SimTime latency) {
    ++buckets_[bucket_of(latency)];
    if (count_ == 0 || latency < min_) min_ = latency;
    if (count_ == 0 || latency > max_) max_ = latency;
    ++count_;
    sum_ += latency;
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
    if (other.count_ == 0) return;
    for (std::size_t i = 0; i < kBuckets; ++i) buckets_[i] += other.buckets_[i];
    min_ = count_ ? std::min(min_, other.min_) : other.min_;
    max_ = count_ ? std::max(max_, other.max_) : other.max_;
    count_ += other.count_;
    sum_ += other.sum_;
}

double LatencyHistogram::mean_ns() const {
    return count_ ? static_cast<double>(sum_) / static_cast<double>(count_) / 1000.0 : 0.0;
}

double LatencyHistogram::percentile_ns(double q) const {
    if (count_ == 0) return 0.0;
    q = std::clamp(q, 0.0, 1.0);
    const double rank = q * static_cast<double>(count_);
    double seen = 0.0;
    for (std::size_t b = 0; b < kBuckets; ++b) {
        if (buckets_[b] == 0) continue;
        const double next = seen + static_cast<double>(buckets_[b]);
        if (rank <= next) {
            const double lo = b == 0 ? 0.0 : std::ldexp(1.0, static_cast<int>(b) - 1);
            const double hi = std::ldexp(1.0, static_cast<int>(b));
            const double frac = (rank - seen) / static_cast<double>(buckets_[b]);
            const double v = lo + frac * (hi - lo);
            return std::clamp(v, ps_to_ns(min_), ps_to_ns(max_));
        }
        seen = next;
    }
    return ps_to_ns(max_);
}

LatencyHistogram LatencyHistogram::from_parts(std::uint64_t count, SimTime sum, SimTime min, SimTime max,
                                              const std::array<std::uint64_t, kBuckets>& buckets) {
    LatencyHistogram h;
    h.count_ = count;
    h.sum_ = sum;
    h.min_ = count ? min : 0;
    h.max_ = count ? max : 0;
    h.buckets_ = buckets;
    return h;
}

const DeviceMetrics* RunMetrics::device(const std::string& id) const {
    for (const auto& d : devices)
        if (d.device_id == id) return &d;
    return nullptr;
}

// ---------------------------------------------------------------- text helpers

std::string fixed(double value, int decimals) {
    if (!std::isfinite(value)) value = 0.0;
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
    if (ec != std::errc{}) return "0";
    std::string s(buf, ptr);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);  // no "-0.000"
    return s;
}

std::string ns_text(SimTime ps) {
    const bool neg = ps < 0;
    const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-ps) : static_cast<std::uint64_t>(ps);
    std::string frac = std::to_string(mag % 1000);
    frac.insert(0, 3 - frac.size(), '0');
    return (neg ? "-" : "") + std::to_string(mag / 1000) + "." + frac;
}

namespace {

constexpr const char* kCounterNames[] = {"numa_hint_faults",  "numa_hint_faults_local", "pgpromote_success",
                                         "pgdemote_kswapd",   "pgmigrate_success",      "blocked_promotions"};

std::array<std::uint64_t, 6> counter_values(const VmStat& s) {
    return {s.numa_hint_faults, s.numa_hint_faults_local, s.pgpromote_success,
            s.pgdemote_kswapd,  s.pgmigrate_success,      s.blocked_promotions};
}

VmStat counters_from(const nlohmann::json& j) {
    VmStat s;
    s.numa_hint_faults = j.at("numa_hint_faults").get<std::uint64_t>();
    s.numa_hint_faults_local = j.at("numa_hint_faults_local").get<std::uint64_t>();
    s.pgpromote_success = j.at("pgpromote_success").get<std::uint64_t>();
    s.pgdemote_kswapd = j.at("pgdemote_kswapd").get<std::uint64_t>();
    s.pgmigrate_success = j.at("pgmigrate_success").get<std::uint64_t>();
    s.blocked_promotions = j.at("blocked_promotions").get<std::uint64_t>();
    return s;
}


std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

/// Minimal pretty JSON emitter that keeps numbers in the caller's exact text.
class JsonWriter {
public:
    JsonWriter& open(char bracket) {
        separator();
        out_ += bracket;
        first_.push_back(true);
        return *this;
    }
    JsonWriter& close(char bracket) {
        const bool empty = first_.back();
        first_.pop_back();
        if (!empty) newline();
        out_ += bracket;
        return *this;
    }
    JsonWriter& key(const std::string& k) {
        separator();
        out_ += json_string(k) + ": ";
        pending_key_ = true;
        return *this;
    }
    JsonWriter& raw(const std::string& v) {
        separator();
        out_ += v;
        return *this;
    }
    JsonWriter& str(const std::string& v) { return raw(json_string(v)); }
    JsonWriter& field(const std::string& k, const std::string& raw_value) { return key(k).raw(raw_value); }
    JsonWriter& field_str(const std::string& k, const std::string& v) { return key(k).str(v); }
    JsonWriter& field(const std::string& k, std::uint64_t v) { return key(k).raw(std::to_string(v)); }

    std::string take() { return std::move(out_); }

private:
    void separator() {
        if (pending_key_) {
            pending_key_ = false;
            return;
        }
        if (first_.empty()) return;
        if (!first_.back()) out_ += ',';
        first_.back() = false;
        newline();
    }
    void newline() {
        out_ += '\n';
        out_.append(2 * first_.size(), ' ');
    }

    std::string out_;
    std::vector<bool> first_;
    bool pending_key_ = false;
};

void write_histogram(JsonWriter& w, const std::string& name, const LatencyHistogram& h) {
    w.key(name).open('{');
    w.field("count", h.count());
    w.field("sum_ns", ns_text(h.sum()));
    w.field("min_ns", ns_text(h.min()));
    w.field("max_ns", ns_text(h.max()));
    w.field("mean_ns", fixed(h.mean_ns(), 3));
    w.field("p50_ns", fixed(h.percentile_ns(0.5), 3));
    w.field("p99_ns", fixed(h.percentile_ns(0.99), 3));
    std::string buckets = "[";
    for (std::size_t i = 0; i < LatencyHistogram::kBuckets; ++i) {
        if (i) buckets += ", ";
        buckets += std::to_string(h.buckets()[i]);
    }
    w.field("log2_buckets", buckets + "]");
    w.close('}');
}

void write_counters(JsonWriter& w, const VmStat& s) {
    const auto values = counter_values(s);
    w.open('{');
    for (std::size_t i = 0; i < values.size(); ++i) w.field(kCounterNames[i], values[i]);
    w.close('}');
}

SimTime ns_from_json(const nlohmann::json& j) { return ns_to_ps(j.get<double>()); }

LatencyHistogram histogram_from(const nlohmann::json& j) {
    std::array<std::uint64_t, LatencyHistogram::kBuckets> buckets{};
    const auto& arr = j.at("log2_buckets");
    for (std::size_t i = 0; i < buckets.size() && i < arr.size(); ++i) buckets[i] = arr[i].get<std::uint64_t>();
    return LatencyHistogram::from_parts(j.at("count").get<std::uint64_t>(), ns_from_json(j.at("sum_ns")),
                                        ns_from_json(j.at("min_ns")), ns_from_json(j.at("max_ns")), buckets);
}

void write_run(JsonWriter& w, const RunMetrics& m) {
    w.open('{');
    w.field_str("run_id", m.run_id);
    w.field_str("policy", m.policy);
    w.field_str("workload", m.workload);
    w.field("threads", static_cast<std::uint64_t>(m.threads));
    w.field("seed", m.seed);
    w.field_str("config_digest", m.config_digest);
    w.field("simulated_runtime_ns", ns_text(m.simulated_runtime));
    w.field("measure_begin_ns", ns_text(m.measure_begin));
    w.field("measure_end_ns", ns_text(m.measure_end));
    w.field("mean_latency_ns", fixed(m.mean_latency_ns(), 3));
    w.field("p50_latency_ns", fixed(m.p50_latency_ns(), 3));
    w.field("p99_latency_ns", fixed(m.p99_latency_ns(), 3));
    w.field("total_gbps", fixed(m.total_gbps, 3));
    w.field("issued", m.issued);
    w.field("completed", m.completed);
    w.field("outstanding", m.outstanding);
    w.field("migration_bytes", m.migration_bytes);
    w.key("counters");
    write_counters(w, m.counters);

    w.key("devices").open('[');
    for (const auto& d : m.devices) {
        w.open('{');
        w.field_str("device_id", d.device_id);
        w.field("bytes_served", d.bytes_served);
        w.field("measured_bytes", d.measured_bytes);
        w.field("achieved_gbps", fixed(d.achieved_gbps, 3));
        w.field("utilization", fixed(d.utilization, 6));
        w.close('}');
    }
    w.close(']');

    w.key("links").open('[');
    for (const auto& l : m.links) {
        w.open('{');
        w.field_str("link_id", l.link_id);
        w.field_str("direction", l.a_to_b ? "a_to_b" : "b_to_a");
        w.field("bytes_served", l.bytes_served);
        w.field("achieved_gbps", fixed(l.achieved_gbps, 3));
        w.field("utilization", fixed(l.utilization, 6));
        w.close('}');
    }
    w.close(']');

    w.key("objects").open('[');
    for (const auto& o : m.objects) {
        w.open('{');
        w.field_str("name", o.name);
        w.field("access_count", o.access_count);
        w.field("bytes", o.bytes);
        w.close('}');
    }
    w.close(']');

    write_histogram(w, "latency", m.latency);
    write_histogram(w, "measured_latency", m.measured_latency);
    w.key("per_thread").open('[');
    for (std::size_t i = 0; i < m.per_thread.size(); ++i) {
        w.open('{');
        w.field("thread", static_cast<std::uint64_t>(i));
        write_histogram(w, "latency", m.per_thread[i]);
        w.close('}');
    }
    w.close(']');

    w.key("timeline").open('[');
    for (const auto& p : m.timeline) {
        w.open('{');
        w.field("time_ns", ns_text(p.time));
        w.key("counters");
        write_counters(w, p.counters);
        w.close('}');
    }
    w.close(']');
    w.close('}');
}

RunMetrics run_from(const nlohmann::json& j) {
    RunMetrics m;
    m.run_id = j.at("run_id").get<std::string>();
    m.policy = j.at("policy").get<std::string>();
    m.workload = j.at("workload").get<std::string>();
    m.threads = j.at("threads").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.simulated_runtime = ns_from_json(j.at("simulated_runtime_ns"));
    m.measure_begin = ns_from_json(j.at("measure_begin_ns"));
    m.measure_end = ns_from_json(j.at("measure_end_ns"));
    m.total_gbps = j.at("total_gbps").get<double>();
    m.issued = j.at("issued").get<std::uint64_t>();
    m.completed = j.at("completed").get<std::uint64_t>();
    m.outstanding = j.at("outstanding").get<std::uint64_t>();
    m.migration_bytes = j.at("migration_bytes").get<std::uint64_t>();
    m.counters = counters_from(j.at("counters"));
    for (const auto& d : j.at("devices"))
        m.devices.push_back({d.at("device_id").get<std::string>(), d.at("bytes_served").get<Bytes>(),
                             d.at("measured_bytes").get<Bytes>(), d.at("achieved_gbps").get<double>(),
                             d.at("utilization").get<double>()});
    for (const auto& l : j.at("links"))
        m.links.push_back({l.at("link_id").get<std::string>(), l.at("direction").get<std::string>() == "a_to_b",
                           l.at("bytes_served").get<Bytes>(), l.at("achieved_gbps").get<double>(),
                           l.at("utilization").get<double>()});
    for (const auto& o : j.at("objects"))
        m.objects.push_back(
            {o.at("name").get<std::string>(), o.at("access_count").get<std::uint64_t>(), o.at("bytes").get<Bytes>()});
    m.latency = histogram_from(j.at("latency"));
    m.measured_latency = histogram_from(j.at("measured_latency"));
    for (const auto& t : j.at("per_thread")) m.per_thread.push_back(histogram_from(t.at("latency")));
    for (const auto& p : j.at("timeline")) m.timeline.push_back({ns_from_json(p.at("time_ns")), counters_from(p.at("counters"))});
    return m;
}

}  // namespace

// ---------------------------------------------------------------- CSV

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_header(const std::vector<std::string>& device_ids) {
    std::string h = "run_id,policy,workload,threads,simulated_runtime_ns,mean_latency_ns,p50_latency_ns,"
                    "p99_latency_ns,total_gbps";
    for (const auto& id : device_ids) h += "," + csv_field("bw_" + id + "_gbps");
    for (const char* c : kCounterNames) h += std::string(",") + c;
    return h + "\n";
}

std::string csv_row(const RunMetrics& m) {
    std::string r = csv_field(m.run_id) + "," + csv_field(m.policy) + "," + csv_field(m.workload) + "," +
                    std::to_string(m.threads) + "," + ns_text(m.simulated_runtime) + "," +
                    fixed(m.mean_latency_ns(), 3) + "," + fixed(m.p50_latency_ns(), 3) + "," +
                    fixed(m.p99_latency_ns(), 3) + "," + fixed(m.total_gbps, 3);
    for (const auto& d : m.devices) r += "," + fixed(d.achieved_gbps, 3);
    for (auto v : counter_values(m.counters)) r += "," + std::to_string(v);
    return r + "\n";
}

std::string export_csv(const std::vector<RunMetrics>& runs, const std::vector<std::string>& device_ids) {
    std::vector<std::string> ids = device_ids;
    if (ids.empty() && !runs.empty())
        for (const auto& d : runs.front().devices) ids.push_back(d.device_id);
    std::string out = csv_header(ids);
    if (runs.empty()) {
        RunMetrics zero;
        for (const auto& id : ids) zero.devices.push_back({id});
        return out + csv_row(zero);
    }
    for (const auto& m : runs) {
        if (m.devices.size() != ids.size()) throw std::invalid_argument("export_csv: runs disagree on device list");
        out += csv_row(m);
    }
    return out;
}

// ---------------------------------------------------------------- JSON

std::string export_json(const RunMetrics& m) {
    JsonWriter w;
    write_run(w, m);
    return w.take() + "\n";
}

std::string export_json(const std::vector<RunMetrics>& runs) {
    JsonWriter w;
    w.open('[');
    for (const auto& m : runs) write_run(w, m);
    w.close(']');
    return w.take() + "\n";
}

RunMetrics import_json(const std::string& text) {
    try {
        return run_from(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("metrics JSON: ") + e.what());
    }
}

std::vector<RunMetrics> import_json_array(const std::string& text) {
    try {
        std::vector<RunMetrics> runs;
        for (const auto& j : nlohmann::json::parse(text)) runs.push_back(run_from(j));
        return runs;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("metrics JSON: ") + e.what());
    }
}

std::string plot_series(const std::string& x_label, const std::string& y_label,
                        const std::vector<std::pair<double, double>>& points) {
    std::string out = x_label + "," + y_label + "\n";
    for (const auto& [x, y] : points) out += fixed(x, 3) + "," + fixed(y, 3) + "\n";
    return out;
}

std::string digest(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    return out;
}

}  // namespace tierlab
