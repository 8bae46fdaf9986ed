#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "tierlab/errors.hpp"

using namespace tierlab;

namespace {

std::string key_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("shipped presets load and build") {
    for (const char* name : {"system_a", "system_b", "system_c"}) {
        CAPTURE(name);
        Json doc = load_document(name);
        doc["run"]["duration_ns"] = 1000;
        const auto cfg = build_sim_config(doc);
        CHECK(!cfg.topology.nodes().empty());
        CHECK(!cfg.config_digest.empty());
    }
    CHECK(load_document("system_b.json") == load_document("system_b"));
}

TEST_CASE("errors name the offending key") {
    Json doc = load_document("system_b");
    doc["run"]["duration_ns"] = 1000;
    auto with = [&](const std::string& set) {
        return key_of([&] {
            Json d = doc;
            apply_override(d, set);
            build_sim_config(d);
        });
    };
    CHECK(with("devices.cxl.bogus=1") == "devices.cxl.bogus");
    CHECK(with("devices.cxl.kind=\"SSD\"") == "devices.cxl.kind");
    CHECK(with("devices.cxl.capacity_bytes=\"12 parsecs\"") == "devices.cxl.capacity_bytes");
    CHECK(with("topology.extra=1") == "topology.extra");
    CHECK(with("placement.policy=\"random\"") == "placement.policy");
    CHECK(with("tiering.policy=\"lru\"") == "tiering.policy");
    CHECK(key_of([] { load_document("no_such_preset"); }) == "config");
    CHECK(key_of([] { parse_document("{\"devices\": ["); }) == "config");
    CHECK(key_of([] { parse_policy_spec("interleave"); }) == "policy");
    CHECK(key_of([] { parse_policy_spec("first_touch+lru"); }) == "policy");
}

TEST_CASE("sizes") {
    CHECK(parse_bytes(4096, "k") == 4096);
    CHECK(parse_bytes("64MiB", "k") == 64ULL << 20);
    CHECK(parse_bytes("1 GiB", "k") == 1ULL << 30);
    CHECK(parse_bytes("2KB", "k") == 2000);
    CHECK(parse_bytes("1.5KiB", "k") == 1536);
    CHECK_THROWS_AS(parse_bytes(-1, "k"), ConfigError);
    CHECK_THROWS_AS(parse_bytes("7 furlongs", "k"), ConfigError);
    CHECK_THROWS_AS(parse_bytes(true, "k"), ConfigError);
}

TEST_CASE("overrides address arrays by id or index") {
    Json doc = load_document("system_b");
    apply_override(doc, "devices.cxl.peak_bandwidth_gbps=32");
    apply_override(doc, "links.0.latency_ns=75");
    apply_override(doc, "run.mems=[\"ldram\",\"cxl\"]");
    apply_override(doc, "workload.agent=socket0");
    CHECK(doc["devices"][2]["peak_bandwidth_gbps"] == 32);
    CHECK(doc["links"][0]["latency_ns"] == 75);
    CHECK(doc["run"]["mems"] == Json::array({"ldram", "cxl"}));
    CHECK(doc["workload"]["agent"] == "socket0");
    CHECK_THROWS_AS(apply_override(doc, "devices.nvme.capacity_bytes=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
}

TEST_CASE("policy specs") {
    auto s = parse_policy_spec("interleave:ldram,cxl+tpp");
    REQUIRE(s.placement);
    CHECK((*s.placement)["policy"] == "interleave");
    CHECK((*s.placement)["nodes"] == Json::array({"ldram", "cxl"}));
    CHECK(s.tiering == "tpp");

    s = parse_policy_spec("tiering08");
    CHECK(!s.placement);
    CHECK(s.tiering == "tiering08");

    s = parse_policy_spec("uniform:ldram,cxl");
    CHECK((*s.placement)["policy"] == "interleave");

    Json doc = load_document("system_a");
    doc["placement"]["footprint_share_min"] = 0.2;
    apply_policy(doc, parse_policy_spec("oli:ldram,cxl+autonuma"));
    CHECK(doc["placement"]["policy"] == "oli");
    CHECK(doc["placement"]["footprint_share_min"] == 0.2);
    CHECK(doc["tiering"]["policy"] == "autonuma");
}

TEST_CASE("a document can extend a preset") {
    const auto doc = parse_document(R"({"preset": "system_b", "devices": [], "run": {"seed": 9}})");
    CHECK(doc["devices"].empty());
    CHECK(doc["run"]["seed"] == 9);
    CHECK(doc["run"]["home_socket"] == "socket1");
    CHECK(doc["links"].size() == 2);
}

TEST_CASE("digest follows the canonical document") {
    Json a = load_document("system_b");
    a["run"]["duration_ns"] = 1000;
    Json b = a;
    CHECK(build_sim_config(a).config_digest == build_sim_config(b).config_digest);
    b["run"]["seed"] = 2;
    CHECK(build_sim_config(a).config_digest != build_sim_config(b).config_digest);
}

TEST_CASE("TIERLAB_PRESETS points at another preset directory") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "tierlab_presets_test";
    fs::create_directories(dir);
    Json doc = load_document("system_b");
    doc["name"] = "mine";
    std::ofstream(dir / "mine.json") << doc.dump();

    ::setenv("TIERLAB_PRESETS", dir.c_str(), 1);
    CHECK(preset_dir() == dir);
    CHECK(load_document("mine")["name"] == "mine");
    CHECK_THROWS_AS(load_document("system_a"), ConfigError);
    ::unsetenv("TIERLAB_PRESETS");
    CHECK(load_document("system_a")["name"] == "system_a");
    fs::remove_all(dir);
}

TEST_CASE("object profiles round trip") {
    const std::vector<ObjectProfile> in = {{"stream", 60 << 20, 80000, AccessPattern::SeqStream},
                                           {"chase", 4 << 20, 20000, AccessPattern::PointerChase}};
    const auto out = profiles_from_json(profiles_to_json(in));
    REQUIRE(out.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(out[i].object_id == in[i].object_id);
        CHECK(out[i].footprint_bytes == in[i].footprint_bytes);
        CHECK(out[i].access_count == in[i].access_count);
        CHECK(out[i].pattern == in[i].pattern);
    }
}
