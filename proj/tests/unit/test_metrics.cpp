#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "tierlab/experiments.hpp"
#include "tierlab/metrics.hpp"

using namespace tierlab;

namespace {

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

}  // namespace

TEST_CASE("histogram buckets and statistics") {
    CHECK(LatencyHistogram::bucket_of(0) == 0);
    CHECK(LatencyHistogram::bucket_of(999) == 0);
    CHECK(LatencyHistogram::bucket_of(1000) == 1);
    CHECK(LatencyHistogram::bucket_of(2000) == 2);
    CHECK(LatencyHistogram::bucket_of(3999) == 2);
    CHECK(LatencyHistogram::bucket_of(SimTime{1} << 62) == LatencyHistogram::kBuckets - 1);

    LatencyHistogram h;
    CHECK(h.mean_ns() == 0.0);
    for (SimTime v : {100'000, 200'000, 300'000}) h.record(v);
    CHECK(h.count() == 3);
    CHECK(h.mean_ns() == doctest::Approx(200.0));
    CHECK(h.min() == 100'000);
    CHECK(h.max() == 300'000);
    CHECK(h.percentile_ns(0.0) >= 100.0);
    CHECK(h.percentile_ns(1.0) <= 300.0);
    CHECK(h.percentile_ns(0.5) <= h.percentile_ns(0.99));

    LatencyHistogram g;
    g.record(50'000);
    g.merge(h);
    CHECK(g.count() == 4);
    CHECK(g.min() == 50'000);
}

TEST_CASE("fixed decimal rendering") {
    CHECK(fixed(1.5, 3) == "1.500");
    CHECK(fixed(-0.0004, 3) == "0.000");
    CHECK(fixed(2.0 / 3.0, 2) == "0.67");
    CHECK(ns_text(1234567) == "1234.567");
    CHECK(ns_text(5) == "0.005");
    CHECK(ns_text(0) == "0.000");
}

TEST_CASE("empty run exports a header and a zero row") {
    const auto text = export_csv({}, {"ldram", "cxl"});
    const auto rows = lines(text);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] ==
          "run_id,policy,workload,threads,simulated_runtime_ns,mean_latency_ns,p50_latency_ns,p99_latency_ns,"
          "total_gbps,bw_ldram_gbps,bw_cxl_gbps,numa_hint_faults,numa_hint_faults_local,pgpromote_success,"
          "pgdemote_kswapd,pgmigrate_success,blocked_promotions");
    const auto fields = split(rows[1]);
    CHECK(fields.size() == split(rows[0]).size());
    CHECK(fields[4] == "0.000");
    CHECK(fields.back() == "0");
}

TEST_CASE("csv quotes fields with separators") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("json round trip keeps counters and times") {
    auto cfg = testutil::config_for("system_b", "interleave:ldram,cxl",
                                    {{"proxy", "mixed_two_object"}, {"agent", "socket1"}, {"ops", 4000}});
    cfg.run.seed = 3;
    const auto m = run(cfg);
    const auto back = import_json(export_json(m));
    CHECK(back.run_id == m.run_id);
    CHECK(back.seed == m.seed);
    CHECK(back.simulated_runtime == m.simulated_runtime);
    CHECK(back.latency == m.latency);
    CHECK(back.measured_latency == m.measured_latency);
    CHECK(back.per_thread == m.per_thread);
    CHECK(back.counters.pgmigrate_success == m.counters.pgmigrate_success);
    CHECK(back.issued == m.issued);
    CHECK(back.completed == m.completed);
    CHECK(back.migration_bytes == m.migration_bytes);
    REQUIRE(back.devices.size() == m.devices.size());
    for (std::size_t i = 0; i < m.devices.size(); ++i) CHECK(back.devices[i].bytes_served == m.devices[i].bytes_served);
    REQUIRE(back.objects.size() == m.objects.size());
    for (std::size_t i = 0; i < m.objects.size(); ++i) CHECK(back.objects[i].access_count == m.objects[i].access_count);
    CHECK(export_json(back) == export_json(m));

    const auto many = import_json_array(export_json(std::vector<RunMetrics>{m, m}));
    CHECK(many.size() == 2);
}

TEST_CASE("histogram total matches completed requests") {
    const auto m = run(testutil::config_for("system_b", "bind:ldram", testutil::chase_workload("socket1", 300)));
    CHECK(m.latency.count() == 300);
    CHECK(m.objects.at(0).bytes == 64 * 300);
    Bytes served = 0;
    for (const auto& d : m.devices) served += d.bytes_served;
    CHECK(served == 64 * 300);
}

TEST_CASE("loaded latency export has nondecreasing bandwidth") {
    auto cfg = testutil::config_for("system_b", "bind:ldram", testutil::chase_workload("socket1", 1));
    cfg.workload = loaded_latency_workload("socket1", 8, 64 << 20, 16);
    const std::vector<SimTime> delays = {ns_to_ps(10000), ns_to_ps(500), ns_to_ps(50), 0};
    const auto runs = run_batch(loaded_latency_configs(cfg, delays));
    const auto rows = lines(export_csv(runs));
    REQUIRE(rows.size() == delays.size() + 1);
    const auto header = split(rows[0]);
    const auto col = std::find(header.begin(), header.end(), "total_gbps") - header.begin();
    double prev = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double bw = std::stod(split(rows[i])[col]);
        CHECK(bw >= prev);
        prev = bw;
    }
}

TEST_CASE("plot series and digest") {
    CHECK(plot_series("threads", "gbps", {{1, 2.5}, {2, 5}}) == "threads,gbps\n1.000,2.500\n2.000,5.000\n");
    CHECK(digest("") == "cbf29ce484222325");
    CHECK(digest("a") != digest("b"));
}
