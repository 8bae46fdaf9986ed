#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tierlab/engine.hpp"
#include "tierlab/errors.hpp"
#include "tierlab/placement.hpp"

using namespace tierlab;

namespace {

PageTable table_with(std::vector<std::size_t> capacities) {
    std::vector<NodeResidency> nodes;
    for (auto c : capacities) nodes.push_back({c, 0, 0, 0});
    return PageTable(nodes, 4096, 10'000'000'000);
}

ObjectProfile profile(const std::string& id, Bytes footprint, std::uint64_t accesses) {
    return {id, footprint, accesses, AccessPattern::RandStream};
}

std::vector<std::uint32_t> node_map(const SimConfig& cfg) {
    Engine e(cfg);
    std::vector<std::uint32_t> nodes;
    for (std::size_t i = 0; i < e.pages().page_count(); ++i) nodes.push_back(e.pages().page(static_cast<PageId>(i)).node);
    return nodes;
}

SimConfig mixed_on_system_a(const std::string& policy) {
    Json doc = load_document("system_a");
    doc["workload"] = {{"proxy", "mixed_two_object"}, {"agent", "socket1"}, {"footprint_bytes", "8MiB"}};
    apply_policy(doc, parse_policy_spec(policy));
    apply_override(doc, "run.mems=[\"ldram\",\"cxl\"]");
    return build_sim_config(doc);
}

}  // namespace

TEST_CASE("decide_placement rules") {
    auto t = table_with({10, 10, 10});
    const PlacementContext ctx{1, {1, 0, 2}};
    const auto il = PlacementPolicy::interleave({0, 1, 2});
    CHECK(decide_placement(il, 0, ctx, t) == 0);
    CHECK(decide_placement(il, 1, ctx, t) == 1);
    CHECK(decide_placement(il, 2, ctx, t) == 2);
    CHECK(decide_placement(il, 3, ctx, t) == 0);

    CHECK(decide_placement(PlacementPolicy::first_touch(), 7, ctx, t) == 1);

    auto full = table_with({10, 10, 0});
    CHECK(decide_placement(PlacementPolicy::preferred({2, 0}), 0, ctx, full) == 0);
    CHECK(decide_placement(PlacementPolicy::preferred({2, 0}), 0, ctx, t) == 2);
}

TEST_CASE("first touch from socket1 lands on its local DRAM") {
    const auto cfg = testutil::config_for("system_b", "first_touch", testutil::chase_workload("socket1", 1, "64KiB"));
    Engine e(cfg);
    const auto ldram = *cfg.topology.find_node("ldram");
    for (std::size_t i = 0; i < e.pages().page_count(); ++i) CHECK(e.pages().page(static_cast<PageId>(i)).node == ldram);
}

TEST_CASE("oli_select examples") {
    const Bytes total = 1000;
    const std::uint64_t acc = 1000;
    std::vector<ObjectProfile> p = {profile("O1", total * 40 / 100, acc * 70 / 100),
                                    profile("O2", total * 15 / 100, acc * 5 / 100),
                                    profile("O3", total * 8 / 100, acc * 20 / 100),
                                    profile("rest", total * 37 / 100, acc * 5 / 100)};
    CHECK(oli_select(p, 0.10, 0.10) == std::set<std::string>{"O1"});

    std::vector<ObjectProfile> small;
    for (int i = 0; i < 20; ++i) small.push_back(profile("s" + std::to_string(i), 50, 50));
    CHECK(oli_select(small, 0.10, 0.10).empty());

    std::vector<ObjectProfile> two = {profile("O1", 30, 40), profile("O2", 30, 35), profile("O3", 40, 25)};
    const auto sel = oli_select(two, 0.10, 0.10);
    CHECK(sel.count("O1") == 1);
    CHECK(sel.count("O2") == 1);
}

TEST_CASE("raising a threshold never adds an object") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<Bytes> f(1, 1000);
    std::uniform_int_distribution<std::uint64_t> a(0, 1000);
    std::uniform_real_distribution<double> th(0.0, 0.5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ObjectProfile> p;
        for (int i = 0; i < 6; ++i) p.push_back(profile("o" + std::to_string(i), f(rng), a(rng)));
        const double fp = th(rng), ac = th(rng);
        const auto base = oli_select(p, fp, ac);
        for (const auto& s : oli_select(p, fp + th(rng), ac)) CHECK(base.count(s) == 1);
        for (const auto& s : oli_select(p, fp, ac + th(rng))) CHECK(base.count(s) == 1);
    }
}

TEST_CASE("oli_place interleaves the selection and prefers the fast node for the rest") {
    const auto oli = PlacementPolicy::object_level({0, 2});
    std::vector<ObjectProfile> objs = {profile("a", 100, 100), profile("b", 10, 10)};
    const auto per = oli_place({"a"}, oli, objs, {0, 2});
    REQUIRE(per.size() == 2);
    CHECK(per[0].kind == PlacementKind::UniformInterleave);
    CHECK(per[0].node_set == std::vector<std::size_t>{0, 2});
    CHECK(per[0].explicit_binding);
    CHECK(per[1].kind == PlacementKind::Preferred);
    CHECK(per[1].node_order.front() == 0);
    CHECK_FALSE(per[1].explicit_binding);
    CHECK(oli_allocation_order(per) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("oli with nothing selected equals preferred") {
    auto oli = mixed_on_system_a("oli:ldram,cxl");
    oli.placement.footprint_share_min = 0.99;  // the largest object holds 95%
    CHECK(node_map(oli) == node_map(mixed_on_system_a("preferred:ldram,cxl")));
}

TEST_CASE("oli with everything selected equals uniform interleave") {
    auto oli = mixed_on_system_a("oli:ldram,cxl");
    oli.placement.footprint_share_min = 0.01;  // the smallest object holds 5% of the bytes, 20% of accesses
    oli.placement.access_share_min = 0.01;
    CHECK(node_map(oli) == node_map(mixed_on_system_a("interleave:ldram,cxl")));
}

TEST_CASE("placement validation") {
    CHECK_THROWS_AS(PlacementPolicy::interleave({}).validate(), ConfigError);
    auto p = PlacementPolicy::object_level({0, 1});
    p.access_share_min = -0.1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
