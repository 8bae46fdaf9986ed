#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tierlab/devices.hpp"
#include "tierlab/errors.hpp"

using namespace tierlab;

namespace {

DeviceSpec spec(double peak, std::optional<double> cap = {}) {
    DeviceSpec d;
    d.device_id = "dev";
    d.capacity_bytes = 1 << 20;
    d.base_latency_ns = 100.0;
    d.peak_bandwidth_gbps = peak;
    if (cap) {
        d.per_thread_issue_cap_gbps[IssueClass::Sequential] = *cap;
        d.per_thread_issue_cap_gbps[IssueClass::Random] = *cap;
    }
    return d;
}

}  // namespace

TEST_CASE("service of one 64 B request on an idle server") {
    ServerState s;
    CHECK(service(s, 38.4, {64, 0}) == 1667);
}

TEST_CASE("two simultaneous requests serialize") {
    ServerState s;
    CHECK(service(s, 38.4, {64, 0}) == 1667);
    CHECK(service(s, 38.4, {64, 0}) == 3333);
    CHECK(s.bytes_served == 128);
    CHECK(s.requests == 2);
}

TEST_CASE("idle gaps reset the server") {
    ServerState s;
    service(s, 64.0, {64, 0});
    CHECK(service(s, 64.0, {64, 10'000}) == 11'000);
}

TEST_CASE("saturated server sustains exactly its peak") {
    ServerState s;
    SimTime done = 0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) done = service(s, 307.2, {64, 0});
    const double gbps = gbps_over(Bytes(n) * 64, done);
    CHECK(gbps == doctest::Approx(307.2).epsilon(1e-6));
}

TEST_CASE("FIFO monotonicity and work conservation under random arrivals") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<SimTime> gap(0, 3000);
    std::uniform_int_distribution<Bytes> size(1, 4096);
    ServerState s;
    SimTime arrival = 0, prev_done = 0, prev_busy = 0;
    Bytes total = 0;
    for (int i = 0; i < 20'000; ++i) {
        arrival += gap(rng);
        const Bytes b = size(rng);
        const SimTime done = service(s, 38.4, {b, arrival});
        CHECK(done >= prev_done);
        CHECK(s.busy_until >= prev_busy);
        CHECK(done >= arrival);
        prev_done = done;
        prev_busy = s.busy_until;
        total += b;
    }
    // Bytes completed by prev_done cannot exceed peak x elapsed plus one request.
    CHECK(static_cast<double>(total) <= 38.4 * ps_to_ns(prev_done) + 4096.0);
}

TEST_CASE("unloaded latency is the device base latency") {
    const auto b = load_document("system_b");
    const auto topo = build_topology(b);
    const auto& ldram = topo.node(*topo.find_node("ldram")).device;
    const auto& cxl = topo.node(*topo.find_node("cxl")).device;
    CHECK(unloaded_latency(ldram) == ldram.base_latency_ns);
    CHECK(unloaded_latency(cxl) == doctest::Approx(unloaded_latency(ldram) + 211.0));

    const auto a = build_topology(load_document("system_a"));
    CHECK(unloaded_latency(a.node(*a.find_node("cxl")).device) ==
          doctest::Approx(unloaded_latency(a.node(*a.find_node("ldram")).device) + 153.0));
}

TEST_CASE("analytic bandwidth") {
    CHECK(analytic_bandwidth(spec(64, 8), IssueClass::Sequential, 0) == 0.0);
    CHECK(analytic_bandwidth(spec(100, 10), IssueClass::Random, 4) == doctest::Approx(40.0));

    const auto topo = build_topology(load_document("system_b"));
    const auto& cxl = topo.node(*topo.find_node("cxl")).device;
    CHECK(analytic_bandwidth(cxl, IssueClass::Sequential, 8) == doctest::Approx(64.0));
    CHECK(analytic_bandwidth(cxl, IssueClass::Sequential, 9) == doctest::Approx(64.0));
    CHECK(analytic_bandwidth(spec(50), IssueClass::Random, 1) == 50.0);
}

TEST_CASE("analytic bandwidth is nondecreasing and concave") {
    const auto d = spec(100, 7.5);
    double prev = 0.0, prev_gain = 1e9;
    for (std::size_t n = 1; n <= 40; ++n) {
        const double bw = analytic_bandwidth(d, IssueClass::Random, n);
        const double gain = bw - prev;
        CHECK(gain >= 0.0);
        CHECK(gain <= prev_gain + 1e-12);
        prev = bw;
        prev_gain = gain;
    }
}

TEST_CASE("device validation names the field") {
    auto d = spec(64, 8);
    d.capacity_bytes = 0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    d = spec(64, 80);
    try {
        d.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key().find("per_thread_issue_cap_gbps") != std::string::npos);
    }
    d = spec(64, 8);
    d.base_latency_ns = 0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("bandwidth window counts recent bytes only") {
    BandwidthWindow w(1'000'000'000);
    w.record(100, 1000);
    w.record(500'000'000, 1000);
    CHECK(w.bytes_in_window(600'000'000) == 2000);
    CHECK(w.bytes_in_window(1'400'000'000) == 1000);
    CHECK(w.bytes_in_window(3'000'000'000) == 0);
}
