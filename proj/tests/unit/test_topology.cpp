#include <doctest.h>

#include "helpers.hpp"
#include "tierlab/errors.hpp"
#include "tierlab/topology.hpp"

using namespace tierlab;

namespace {

// socket0 -(50 ns)- socket1 -(120 ns)- cxl, plus a GPU on socket1.
Json small_doc() {
    return Json::parse(R"({
      "topology": {"sockets": [{"name": "socket0"}, {"name": "socket1", "pcie_forwarding_latency_ns": 30}],
                   "gpus": [{"name": "gpu0", "host_socket": "socket1"}]},
      "devices": [
        {"device_id": "ldram", "kind": "LDRAM", "socket": "socket1", "capacity_bytes": "1GiB",
         "base_latency_ns": 100, "peak_bandwidth_gbps": 200},
        {"device_id": "cxl", "kind": "CXL", "socket": "socket1", "capacity_bytes": "1GiB",
         "base_latency_ns": 100, "peak_bandwidth_gbps": 38.4}],
      "links": [
        {"link_id": "upi", "kind": "INTER_SOCKET", "latency_ns": 50, "peak_bandwidth_gbps": 100, "a": "socket0", "b": "socket1"},
        {"link_id": "pcie_cxl", "kind": "PCIE_CXL", "latency_ns": 120, "peak_bandwidth_gbps": 38.4, "a": "socket1", "b": "cxl"},
        {"link_id": "pcie_gpu", "kind": "PCIE_GPU", "latency_ns": 10, "peak_bandwidth_gbps": 32, "a": "gpu0", "b": "socket1"}],
      "workload": {"proxy": "latency_bound"}
    })");
}

std::vector<std::string> link_ids(const Topology& t, const DataPath& p) {
    std::vector<std::string> ids;
    for (const auto& s : p.segments) ids.push_back(t.links()[s.link].link_id);
    return ids;
}

}  // namespace

TEST_CASE("resolve_path on system A") {
    const auto t = build_topology(load_document("system_a"));
    const auto cxl = *t.find_node("cxl");
    CHECK(link_ids(t, resolve_path(t, *t.find_agent("socket1"), cxl)) == std::vector<std::string>{"pcie_cxl"});
    CHECK(link_ids(t, resolve_path(t, *t.find_agent("socket0"), cxl)) ==
          std::vector<std::string>{"xgmi", "pcie_cxl"});
    CHECK(link_ids(t, resolve_path(t, *t.find_agent("gpu0"), *t.find_node("ldram"))) ==
          std::vector<std::string>{"pcie_gpu"});
}

TEST_CASE("path latency is additive") {
    const auto t = build_topology(small_doc());
    const auto cxl = *t.find_node("cxl");
    const auto ldram = *t.find_node("ldram");
    CHECK(path_latency(resolve_path(t, Agent::socket(1), ldram), t) == doctest::Approx(100.0));
    CHECK(path_latency(resolve_path(t, Agent::socket(0), cxl), t) == doctest::Approx(270.0));
    // GPU to CXL bounces through socket1: both PCIe links plus forwarding.
    const auto g = resolve_path(t, Agent::gpu(0), cxl);
    CHECK(g.forwarding_latency_ns == doctest::Approx(30.0));
    CHECK(path_latency(g, t) == doctest::Approx(10.0 + 120.0 + 30.0 + 100.0));
}

TEST_CASE("path bandwidth is the bottleneck") {
    const auto t = build_topology(small_doc());
    CHECK(path_bandwidth(resolve_path(t, Agent::gpu(0), *t.find_node("cxl")), t) == doctest::Approx(32.0));
    CHECK(path_bandwidth(resolve_path(t, Agent::socket(1), *t.find_node("cxl")), t) == doctest::Approx(38.4));
    const auto b = build_topology(load_document("system_b"));
    CHECK(path_bandwidth(resolve_path(b, Agent::socket(1), *b.find_node("cxl")), b) == doctest::Approx(64.0));
}

TEST_CASE("GPU latency delta is at least the CPU delta on every preset") {
    for (const char* preset : {"system_a", "system_c"}) {
        const auto t = build_topology(load_document(preset));
        const auto host = t.gpus().front().host_socket;
        const auto cxl = *t.find_node("cxl"), ldram = *t.find_node("ldram");
        auto lat = [&](const Agent& a, std::size_t n) { return path_latency(resolve_path(t, a, n), t); };
        const double cpu = lat(Agent::socket(host), cxl) - lat(Agent::socket(host), ldram);
        const double gpu = lat(Agent::gpu(0), cxl) - lat(Agent::gpu(0), ldram);
        CHECK(gpu >= cpu);
    }
    const auto c = build_topology(load_document("system_c"));
    const double cpu = path_latency(resolve_path(c, Agent::socket(0), *c.find_node("cxl")), c) -
                       path_latency(resolve_path(c, Agent::socket(0), *c.find_node("ldram")), c);
    CHECK(cpu == doctest::Approx(120.0));
}

TEST_CASE("tier order follows unloaded latency") {
    const auto t = build_topology(load_document("system_b"));
    const auto order = t.tier_order(1);
    REQUIRE(order.size() == 3);
    CHECK(t.node(order[0]).node_id() == "ldram");
    CHECK(t.node(order[1]).node_id() == "rdram");
    CHECK(t.node(order[2]).node_id() == "cxl");
    CHECK(t.local_dram(1) == t.find_node("ldram"));
}

TEST_CASE("idle cut-through transfer costs latency plus size over the bottleneck") {
    const auto t = build_topology(small_doc());
    Fabric f(t);
    const auto plan = read_plan(resolve_path(t, Agent::socket(0), *t.find_node("cxl")), t);
    CHECK(plan.total_latency() == ns_to_ps(270.0));
    CHECK(plan.bottleneck_gbps() == doctest::Approx(38.4));
    const SimTime done = traverse(f, plan, 1 << 20, 0);
    CHECK(done == ns_to_ps(270.0) + transfer_time(1 << 20, 38.4));
}

TEST_CASE("links are full duplex") {
    const auto t = build_topology(small_doc());
    Fabric f(t);
    const auto cxl = *t.find_node("cxl"), ldram = *t.find_node("ldram");
    const auto up = migration_plan(resolve_transfer(t, cxl, ldram), t);
    const auto down = migration_plan(resolve_transfer(t, ldram, cxl), t);
    const SimTime a = traverse(f, up, 4096, 0);
    Fabric g(t);
    traverse(g, up, 4096, 0);
    // Opposite direction traffic only shares the device servers, not the link.
    const SimTime b = traverse(f, down, 4096, 0);
    CHECK(a > 0);
    CHECK(b > 0);
    CHECK(f.link(*t.find_link("pcie_cxl"), true).bytes_served + f.link(*t.find_link("pcie_cxl"), false).bytes_served ==
          8192);
    CHECK(f.link(*t.find_link("pcie_cxl"), true).bytes_served == 4096);
}

TEST_CASE("unreachable nodes are reported") {
    Json doc = small_doc();
    doc["links"].erase(2);  // the GPU loses its only link
    const auto t = build_topology(doc);
    CHECK_THROWS_AS(resolve_path(t, Agent::gpu(0), *t.find_node("cxl")), UnreachableNode);

    Json split = small_doc();
    split["links"].erase(0);  // socket0 can no longer reach anything
    CHECK_THROWS_AS(build_topology(split), ConfigError);
}

TEST_CASE("topology validation") {
    Json doc = small_doc();
    doc["links"][0]["b"] = "socket9";
    CHECK_THROWS_AS(build_topology(doc), ConfigError);
}
