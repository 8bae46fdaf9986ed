#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tierlab/engine.hpp"
#include "tierlab/errors.hpp"
#include "tierlab/experiments.hpp"

using namespace tierlab;

namespace {

// One socket, one uncapped device.
Json flat_doc(double peak) {
    Json doc = Json::parse(R"({
      "topology": {"sockets": [{"name": "socket0"}]},
      "devices": [{"device_id": "mem", "kind": "LDRAM", "socket": "socket0", "capacity_bytes": "1GiB",
                   "base_latency_ns": 100, "peak_bandwidth_gbps": 1}],
      "links": [],
      "workload": {"proxy": "latency_bound", "agent": "socket0"}
    })");
    doc["devices"][0]["peak_bandwidth_gbps"] = peak;
    return doc;
}

Json streams(std::size_t threads, std::size_t window) {
    return {{"objects", Json::array({{{"name", "buf"}, {"size_bytes", "64MiB"}, {"pattern", "seq_stream"}}})},
            {"threads", Json::array({{{"agent", "socket0"},
                                      {"count", threads},
                                      {"targets", "buf"},
                                      {"access_bytes", 4096},
                                      {"max_outstanding", window}}})}};
}

SimConfig stream_config(std::size_t threads, SimTime duration_ns) {
    Json doc = flat_doc(38.4);
    doc["workload"] = streams(threads, 16);
    doc["run"] = {{"duration_ns", duration_ns}, {"warmup_ns", duration_ns / 10}};
    return build_sim_config(doc);
}

// Timed hot/cold run on system A with LDRAM shrunk to @p ldram.
SimConfig skew_config(const std::string& policy, SimTime duration_ns, const std::string& ldram = "1TiB") {
    Json doc = testutil::preset_with("system_a", policy, {{"proxy", "hot_cold_skew"}, {"agent", "socket1"}});
    apply_override(doc, "devices.ldram.capacity_bytes=" + ldram);
    apply_override(doc, "run.mems=[\"ldram\",\"cxl\"]");
    doc["run"]["duration_ns"] = duration_ns;
    return build_sim_config(doc);
}

}  // namespace

TEST_CASE("event queue orders by time then insertion") {
    EventQueue<int> q;
    q.push(5, 1);
    q.push(3, 2);
    q.push(5, 3);
    q.push(3, 4);
    std::vector<int> order;
    while (!q.empty()) order.push_back(q.pop().payload);
    CHECK(order == std::vector<int>{2, 4, 1, 3});
}

TEST_CASE("single dependent thread matches the closed form") {
    const auto cfg = testutil::config_for("system_b", "bind:ldram", testutil::chase_workload("socket1", 1000));
    const auto& t = cfg.topology;
    const auto path = resolve_path(t, *t.find_agent("socket1"), *t.find_node("ldram"));
    const double per = path_latency(path, t) + 64.0 / path_bandwidth(path, t);
    const auto m = run(cfg);
    CHECK(std::abs(ps_to_ns(m.simulated_runtime) - 1000 * per) <= 1.0);
    CHECK(m.completed == 1000);
    CHECK(m.outstanding == 0);
    // Window 1: every request sees an idle path.
    CHECK(m.latency.max() - m.latency.min() <= 1);
}

TEST_CASE("pointer chase on system C from a GPU pays the agent overhead") {
    const auto cpu = run(testutil::config_for("system_c", "bind:ldram", testutil::chase_workload("socket0", 50)));
    const auto gpu = run(testutil::config_for("system_c", "bind:ldram", testutil::chase_workload("gpu0", 50)));
    CHECK(gpu.mean_latency_ns() > cpu.mean_latency_ns() + 5000.0);
}

TEST_CASE("a saturating stream achieves the device peak") {
    const auto m = run(stream_config(1, 2'000'000));
    CHECK(m.device("mem")->achieved_gbps == doctest::Approx(38.4).epsilon(0.01));
    CHECK(m.total_gbps == doctest::Approx(38.4).epsilon(0.01));
    CHECK(m.device("mem")->utilization == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("two identical streams split the device evenly") {
    const auto m = run(stream_config(2, 2'000'000));
    REQUIRE(m.per_thread.size() == 2);
    const double a = static_cast<double>(m.per_thread[0].count()), b = static_cast<double>(m.per_thread[1].count());
    CHECK(a == doctest::Approx(b).epsilon(0.01));
    CHECK(m.total_gbps == doctest::Approx(38.4).epsilon(0.01));
}

TEST_CASE("same seed, same metrics") {
    auto cfg = skew_config("first_touch+tpp", 20'000'000, "8MiB");
    cfg.run.seed = 7;
    CHECK(export_json(run(cfg)) == export_json(run(cfg)));
    auto other = cfg;
    other.run.seed = 8;
    CHECK(export_json(run(cfg)) != export_json(run(other)));
}

TEST_CASE("conservation of requests and bytes") {
    const auto m = run(skew_config("first_touch+tpp", 50'000'000, "8MiB"));
    CHECK(m.issued == m.completed + m.outstanding);
    CHECK(m.counters.pgpromote_success > 0);

    Bytes devices = 0, objects = 0;
    for (const auto& d : m.devices) devices += d.bytes_served;
    for (const auto& o : m.objects) objects += o.bytes;
    CHECK(devices == objects + m.migration_bytes);
    CHECK(m.migration_bytes == 2 * 4096 * m.counters.pgmigrate_success);
}

TEST_CASE("snapshots are cumulative and monotone") {
    Engine e(skew_config("first_touch+tpp", 40'000'000, "8MiB"));
    const auto s0 = e.snapshot();
    CHECK(s0.completed == 0);
    CHECK(s0.latency.count() == 0);
    CHECK(s0.counters.numa_hint_faults == 0);
    RunMetrics prev = s0;
    for (SimTime t = 5'000'000'000; t <= 40'000'000'000; t += 5'000'000'000) {
        e.run_until(t);
        const auto s = e.snapshot();
        CHECK(s.completed >= prev.completed);
        CHECK(s.latency.count() == s.completed);
        CHECK(s.counters.numa_hint_faults >= prev.counters.numa_hint_faults);
        CHECK(s.counters.pgmigrate_success >= prev.counters.pgmigrate_success);
        Bytes bytes = 0;
        for (const auto& o : s.objects) bytes += o.bytes;
        // Attribution happens at issue.
        CHECK(bytes == 64 * s.issued);
        prev = s;
    }
}

TEST_CASE("causality: no latency below the unloaded path") {
    auto cfg = testutil::config_for("system_b", "interleave:ldram,rdram,cxl", {{"proxy", "mixed_two_object"}, {"agent", "socket1"}});
    const auto m = run(cfg);
    CHECK(ps_to_ns(m.latency.min()) >= 110.0);
    CHECK(m.outstanding == 0);
}

TEST_CASE("loaded latency rises with offered load") {
    auto cfg = testutil::config_for("system_b", "bind:cxl", testutil::chase_workload("socket1", 1));
    cfg.workload = loaded_latency_workload("socket1", 8, 64 << 20, 16);
    const std::vector<SimTime> delays = {ns_to_ps(20000), ns_to_ps(1000), ns_to_ps(100), ns_to_ps(20), 0};
    const auto runs = run_batch(loaded_latency_configs(cfg, delays));
    for (std::size_t i = 1; i < runs.size(); ++i) {
        CHECK(runs[i].total_gbps >= runs[i - 1].total_gbps - 1e-9);
        CHECK(runs[i].mean_latency_ns() >= runs[i - 1].mean_latency_ns() - 1e-9);
    }
}

TEST_CASE("strict binding larger than the node is out of memory") {
    Json doc = testutil::preset_with("system_b", "bind:cxl", testutil::chase_workload("socket1", 10));
    apply_override(doc, "devices.cxl.capacity_bytes=1MiB");
    CHECK_THROWS_AS(run(build_sim_config(doc)), OutOfMemory);
}

TEST_CASE("validation rejects missing duration and unknown agents") {
    Json doc = testutil::preset_with("system_b", "first_touch", {{"proxy", "bandwidth_bound"}, {"agent", "socket1"}});
    CHECK_THROWS_AS(build_sim_config(doc), ConfigError);
    doc["run"]["duration_ns"] = 1000;
    doc["workload"]["agent"] = "socket7";
    CHECK_THROWS_AS(build_sim_config(doc), ConfigError);
}

TEST_CASE("OLI profiles itself when profiles are absent") {
    auto cfg = testutil::config_for("system_a", "oli:ldram,cxl", {{"proxy", "mixed_two_object"}, {"agent", "socket1"}});
    const auto profiles = profile_objects(cfg);
    REQUIRE(profiles.size() == 2);
    std::uint64_t total = 0;
    for (const auto& p : profiles) total += p.access_count;
    CHECK(total == 100000);
    const auto selected = oli_select(profiles, 0.10, 0.10);
    CHECK(selected == std::set<std::string>{"stream"});

    auto given = cfg;
    given.profiles = profiles;
    CHECK(export_json(run(cfg)) == export_json(run(given)));
}
