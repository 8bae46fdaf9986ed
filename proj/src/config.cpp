#include "tierlab/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "tierlab/errors.hpp"

#ifndef TIERLAB_DEFAULT_PRESET_DIR
#define TIERLAB_DEFAULT_PRESET_DIR "presets"
#endif

namespace tierlab {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            throw ConfigError(join(path, k), "unknown key");
    }
}

const Json* find(const Json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const Json& obj, const char* key, const std::string& path, std::optional<double> fallback = {}) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError(join(path, key), "required");
    }
    if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
    return v->get<double>();
}

std::uint64_t count(const Json& obj, const char* key, const std::string& path,
                    std::optional<std::uint64_t> fallback = {}) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError(join(path, key), "required");
    }
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0)
        throw ConfigError(join(path, key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
}

std::string text(const Json& obj, const char* key, const std::string& path,
                 std::optional<std::string> fallback = {}) {
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError(join(path, key), "required");
    }
    if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
    return v->get<std::string>();
}

bool flag(const Json& obj, const char* key, const std::string& path, bool fallback) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(join(path, key), "expected true or false");
    return v->get<bool>();
}

SimTime time_ns(const Json& obj, const char* key, const std::string& path, SimTime fallback_ps) {
    const Json* v = find(obj, key);
    if (!v) return fallback_ps;
    if (!v->is_number()) throw ConfigError(join(path, key), "expected a number of nanoseconds");
    return ns_to_ps(v->get<double>());
}

std::vector<std::string> names(const Json& obj, const char* key, const std::string& path) {
    const Json* v = find(obj, key);
    if (!v) return {};
    if (v->is_string()) return {v->get<std::string>()};
    if (!v->is_array()) throw ConfigError(join(path, key), "expected a list of names");
    std::vector<std::string> out;
    for (const auto& e : *v) {
        if (!e.is_string()) throw ConfigError(join(path, key), "expected a list of names");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::vector<std::size_t> node_indices(const Topology& t, const std::vector<std::string>& ids, const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& id : ids) {
        auto n = t.find_node(id);
        if (!n) throw ConfigError(key, "unknown memory node '" + id + "'");
        out.push_back(*n);
    }
    return out;
}

std::size_t socket_index(const Topology& t, const std::string& name, const std::string& key) {
    auto e = t.find_endpoint(name);
    if (!e || e->type != Endpoint::Type::Socket) throw ConfigError(key, "unknown socket '" + name + "'");
    return e->index;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path locate(const std::string& path_or_name, const fs::path& base_dir) {
    const fs::path direct(path_or_name);
    if (fs::is_regular_file(direct)) return direct;
    std::vector<fs::path> dirs;
    if (!base_dir.empty()) dirs.push_back(base_dir);
    dirs.push_back(preset_dir());
    for (const auto& d : dirs) {
        if (fs::is_regular_file(d / path_or_name)) return d / path_or_name;
        if (fs::is_regular_file(d / (path_or_name + ".json"))) return d / (path_or_name + ".json");
    }
    throw ConfigError("config", "cannot find config or preset '" + path_or_name + "'");
}

Json resolve_preset(Json doc, const fs::path& base_dir, int depth) {
    if (!doc.is_object()) throw ConfigError("config", "top level must be a JSON object");
    auto it = doc.find("preset");
    if (it == doc.end()) return doc;
    if (!it->is_string()) throw ConfigError("preset", "expected a preset name");
    if (depth > 8) throw ConfigError("preset", "preset chain too deep");
    const fs::path p = locate(it->get<std::string>(), base_dir);
    Json base;
    try {
        base = Json::parse(read_file(p));
    } catch (const Json::parse_error& e) {
        throw ConfigError("preset", "malformed JSON in '" + p.string() + "': " + e.what());
    }
    base = resolve_preset(std::move(base), p.parent_path(), depth + 1);
    doc.erase("preset");
    base.merge_patch(doc);
    return base;
}

}  // namespace

fs::path preset_dir() {
    if (const char* env = std::getenv("TIERLAB_PRESETS"); env && *env) return fs::path(env);
    return fs::path(TIERLAB_DEFAULT_PRESET_DIR);
}

Json parse_document(const std::string& text, const fs::path& base_dir) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    return resolve_preset(std::move(doc), base_dir, 0);
}

Json load_document(const std::string& path_or_name) {
    const fs::path p = locate(path_or_name, {});
    Json doc;
    try {
        doc = Json::parse(read_file(p));
    } catch (const Json::parse_error& e) {
        throw ConfigError("config", "malformed JSON in '" + p.string() + "': " + e.what());
    }
    return resolve_preset(std::move(doc), p.parent_path(), 0);
}

void apply_override(Json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(raw);
    } catch (const Json::parse_error&) {
        value = raw;
    }

    std::vector<std::string> parts;
    std::string part;
    std::istringstream ss(key);
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError(key, "empty path component");
        parts.push_back(part);
    }

    Json* cur = &doc;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        const bool last = i + 1 == parts.size();
        if (cur->is_array()) {
            Json* next = nullptr;
            for (auto& e : *cur) {
                if (!e.is_object()) continue;
                for (const char* id : {"device_id", "link_id", "name", "object"}) {
                    auto it = e.find(id);
                    if (it != e.end() && it->is_string() && it->get<std::string>() == p) next = &e;
                }
                if (next) break;
            }
            if (!next && std::all_of(p.begin(), p.end(), ::isdigit)) {
                const auto idx = std::stoul(p);
                if (idx < cur->size()) next = &(*cur)[idx];
            }
            if (!next) throw ConfigError(key, "no element '" + p + "'");
            if (last) {
                *next = value;
                return;
            }
            cur = next;
        } else {
            if (cur->is_null()) *cur = Json::object();
            if (!cur->is_object()) throw ConfigError(key, "'" + p + "' is inside a scalar");
            if (last) {
                (*cur)[p] = value;
                return;
            }
            cur = &(*cur)[p];
        }
    }
}

Bytes parse_bytes(const Json& value, const std::string& key) {
    if (value.is_number_integer()) {
        if (value.get<std::int64_t>() < 0) throw ConfigError(key, "must be >= 0");
        return value.get<Bytes>();
    }
    if (value.is_number_float()) {
        const double d = value.get<double>();
        if (d < 0) throw ConfigError(key, "must be >= 0");
        return static_cast<Bytes>(d);
    }
    if (!value.is_string()) throw ConfigError(key, "expected a byte count");
    const std::string s = value.get<std::string>();
    std::size_t pos = 0;
    double n = 0;
    try {
        n = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "cannot parse size '" + s + "'");
    }
    std::string unit = s.substr(pos);
    unit.erase(std::remove(unit.begin(), unit.end(), ' '), unit.end());
    static const std::pair<const char*, double> kUnits[] = {
        {"", 1.0},        {"B", 1.0},        {"KiB", 1024.0}, {"MiB", 1048576.0}, {"GiB", 1073741824.0},
        {"TiB", 1099511627776.0}, {"KB", 1e3}, {"MB", 1e6},   {"GB", 1e9},         {"TB", 1e12}};
    for (const auto& [name, mult] : kUnits)
        if (unit == name) {
            if (n < 0) throw ConfigError(key, "must be >= 0");
            return static_cast<Bytes>(n * mult + 0.5);
        }
    throw ConfigError(key, "unknown size unit '" + unit + "'");
}

// ---------------------------------------------------------------- topology

Topology build_topology(const Json& doc) {
    const Json empty = Json::object();
    const Json& topo = doc.contains("topology") ? doc["topology"] : empty;
    check_keys(topo, "topology", {"sockets", "gpus"});

    std::vector<Socket> sockets;
    if (const Json* s = find(topo, "sockets")) {
        if (!s->is_array()) throw ConfigError("topology.sockets", "expected a list");
        for (std::size_t i = 0; i < s->size(); ++i) {
            const Json& e = (*s)[i];
            const std::string at = "topology.sockets." + std::to_string(i);
            check_keys(e, at, {"name", "cores", "pcie_forwarding_latency_ns"});
            sockets.push_back({text(e, "name", at), static_cast<unsigned>(count(e, "cores", at, 0)),
                               number(e, "pcie_forwarding_latency_ns", at, 0.0)});
        }
    }
    auto socket_by_name = [&](const std::string& name, const std::string& key) {
        for (std::size_t i = 0; i < sockets.size(); ++i)
            if (sockets[i].name == name) return i;
        throw ConfigError(key, "unknown socket '" + name + "'");
    };

    std::vector<Gpu> gpus;
    if (const Json* g = find(topo, "gpus")) {
        if (!g->is_array()) throw ConfigError("topology.gpus", "expected a list");
        for (std::size_t i = 0; i < g->size(); ++i) {
            const Json& e = (*g)[i];
            const std::string at = "topology.gpus." + std::to_string(i);
            check_keys(e, at, {"name", "host_socket", "agent_overhead_ns"});
            gpus.push_back({text(e, "name", at), socket_by_name(text(e, "host_socket", at), at + ".host_socket"),
                            number(e, "agent_overhead_ns", at, 0.0)});
        }
    }

    std::vector<MemoryNode> nodes;
    const Json* devs = find(doc, "devices");
    if (!devs || !devs->is_array()) throw ConfigError("devices", "expected a list of devices");
    for (std::size_t i = 0; i < devs->size(); ++i) {
        const Json& e = (*devs)[i];
        const std::string id = e.is_object() && e.contains("device_id") && e["device_id"].is_string()
                                   ? e["device_id"].get<std::string>()
                                   : std::to_string(i);
        const std::string at = "devices." + id;
        check_keys(e, at,
                   {"device_id", "kind", "socket", "capacity_bytes", "base_latency_ns", "peak_bandwidth_gbps",
                    "per_thread_issue_cap_gbps"});
        DeviceSpec d;
        d.device_id = text(e, "device_id", at);
        const auto kind = parse_device_kind(text(e, "kind", at));
        if (!kind) throw ConfigError(at + ".kind", "expected LDRAM, RDRAM or CXL");
        d.kind = *kind;
        const Json* cap = find(e, "capacity_bytes");
        if (!cap) throw ConfigError(at + ".capacity_bytes", "required");
        d.capacity_bytes = parse_bytes(*cap, at + ".capacity_bytes");
        d.base_latency_ns = number(e, "base_latency_ns", at);
        d.peak_bandwidth_gbps = number(e, "peak_bandwidth_gbps", at);
        if (const Json* caps = find(e, "per_thread_issue_cap_gbps")) {
            if (!caps->is_object()) throw ConfigError(at + ".per_thread_issue_cap_gbps", "expected an object");
            for (const auto& [k, v] : caps->items()) {
                const auto cls = parse_issue_class(k);
                if (!cls) throw ConfigError(at + ".per_thread_issue_cap_gbps." + k, "expected sequential or random");
                if (!v.is_number()) throw ConfigError(at + ".per_thread_issue_cap_gbps." + k, "expected a number");
                d.per_thread_issue_cap_gbps[*cls] = v.get<double>();
            }
        }
        d.validate();
        nodes.push_back({d, socket_by_name(text(e, "socket", at), at + ".socket")});
    }

    auto endpoint = [&](const std::string& name, const std::string& key) -> Endpoint {
        for (std::size_t i = 0; i < sockets.size(); ++i)
            if (sockets[i].name == name) return {Endpoint::Type::Socket, i};
        for (std::size_t i = 0; i < gpus.size(); ++i)
            if (gpus[i].name == name) return {Endpoint::Type::Gpu, i};
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].device.device_id == name) return {Endpoint::Type::Node, i};
        throw ConfigError(key, "unknown endpoint '" + name + "'");
    };

    std::vector<Link> links;
    if (const Json* ls = find(doc, "links")) {
        if (!ls->is_array()) throw ConfigError("links", "expected a list");
        for (std::size_t i = 0; i < ls->size(); ++i) {
            const Json& e = (*ls)[i];
            const std::string at = "links." + (e.is_object() && e.contains("link_id") && e["link_id"].is_string()
                                                   ? e["link_id"].get<std::string>()
                                                   : std::to_string(i));
            check_keys(e, at, {"link_id", "kind", "latency_ns", "peak_bandwidth_gbps", "a", "b"});
            Link l;
            l.link_id = text(e, "link_id", at);
            const auto kind = parse_link_kind(text(e, "kind", at));
            if (!kind) throw ConfigError(at + ".kind", "expected INTER_SOCKET, PCIE_CXL or PCIE_GPU");
            l.kind = *kind;
            l.latency_ns = number(e, "latency_ns", at);
            l.peak_bandwidth_gbps = number(e, "peak_bandwidth_gbps", at);
            l.a = endpoint(text(e, "a", at), at + ".a");
            l.b = endpoint(text(e, "b", at), at + ".b");
            links.push_back(l);
        }
    }
    return Topology(std::move(sockets), std::move(nodes), std::move(gpus), std::move(links));
}

// ---------------------------------------------------------------- workload

Workload build_workload(const Json& wj, const Topology& topology) {
    (void)topology;
    const std::string path = "workload";
    if (!wj.is_object()) throw ConfigError(path, "expected an object");

    if (wj.contains("proxy")) {
        check_keys(wj, path,
                   {"proxy", "agent", "footprint_bytes", "threads", "ops", "max_outstanding", "injection_delay_ns",
                    "access_bytes", "compute_gap_ns", "zipf_theta", "hot_fraction", "name"});
        const auto kind = parse_proxy_kind(text(wj, "proxy", path));
        if (!kind)
            throw ConfigError("workload.proxy",
                              "expected bandwidth_bound, latency_bound, mixed_two_object or hot_cold_skew");
        ProxyParams params;
        params.agent = text(wj, "agent", path, std::string("socket0"));
        if (const Json* f = find(wj, "footprint_bytes")) params.footprint_bytes = parse_bytes(*f, "workload.footprint_bytes");
        if (wj.contains("threads")) params.threads = count(wj, "threads", path);
        if (wj.contains("ops")) params.ops = count(wj, "ops", path);
        Workload w = build_proxy(*kind, params);
        if (wj.contains("name")) w.name = text(wj, "name", path);
        for (auto& g : w.groups) {
            if (wj.contains("max_outstanding") && g.generator.pattern != AccessPattern::PointerChase)
                g.max_outstanding = count(wj, "max_outstanding", path);
            g.injection_delay = time_ns(wj, "injection_delay_ns", path, g.injection_delay);
            if (const Json* a = find(wj, "access_bytes")) g.generator.access_bytes = parse_bytes(*a, "workload.access_bytes");
            g.generator.compute_gap = time_ns(wj, "compute_gap_ns", path, g.generator.compute_gap);
            g.generator.zipf_theta = number(wj, "zipf_theta", path, g.generator.zipf_theta);
            g.generator.hot_fraction = number(wj, "hot_fraction", path, g.generator.hot_fraction);
        }
        return w;
    }

    check_keys(wj, path, {"name", "objects", "threads"});
    Workload w;
    w.name = text(wj, "name", path, std::string("custom"));
    const Json* objs = find(wj, "objects");
    if (!objs || !objs->is_array()) throw ConfigError("workload.objects", "expected a list of objects");
    for (std::size_t i = 0; i < objs->size(); ++i) {
        const Json& o = (*objs)[i];
        const std::string at = "workload.objects." + std::to_string(i);
        check_keys(o, at, {"name", "size_bytes", "pattern", "access_share", "compute_gap_ns"});
        ObjectSpec spec;
        spec.name = text(o, "name", at);
        const Json* size = find(o, "size_bytes");
        if (!size) throw ConfigError(at + ".size_bytes", "required");
        spec.size_bytes = parse_bytes(*size, at + ".size_bytes");
        const auto pat = parse_access_pattern(text(o, "pattern", at, std::string("rand_stream")));
        if (!pat) throw ConfigError(at + ".pattern", "unknown access pattern");
        spec.pattern = *pat;
        spec.access_share = number(o, "access_share", at, objs->size() == 1 ? 1.0 : 0.0);
        spec.compute_gap = time_ns(o, "compute_gap_ns", at, 0);
        w.objects.push_back(spec);
    }
    const Json* groups = find(wj, "threads");
    if (!groups || !groups->is_array()) throw ConfigError("workload.threads", "expected a list of thread groups");
    for (std::size_t i = 0; i < groups->size(); ++i) {
        const Json& g = (*groups)[i];
        const std::string at = "workload.threads." + std::to_string(i);
        check_keys(g, at,
                   {"agent", "count", "pattern", "targets", "op_count", "access_bytes", "compute_gap_ns", "zipf_theta",
                    "hot_fraction", "max_outstanding", "injection_delay_ns"});
        ThreadGroup tg;
        tg.agent = text(g, "agent", at, std::string("socket0"));
        tg.count = count(g, "count", at, 1);
        tg.max_outstanding = count(g, "max_outstanding", at, 10);
        tg.injection_delay = time_ns(g, "injection_delay_ns", at, 0);
        auto& gen = tg.generator;
        const Json* targets = find(g, "targets");
        if (!targets) throw ConfigError(at + ".targets", "required");
        auto add_target = [&](const std::string& name, double weight) {
            auto idx = w.find_object(name);
            if (!idx) throw ConfigError(at + ".targets", "unknown object '" + name + "'");
            gen.targets.push_back({*idx, weight});
        };
        if (targets->is_string()) {
            add_target(targets->get<std::string>(), 1.0);
        } else if (targets->is_array()) {
            for (const auto& t : *targets) {
                if (t.is_string())
                    add_target(t.get<std::string>(), 1.0 / static_cast<double>(targets->size()));
                else if (t.is_object())
                    add_target(text(t, "object", at + ".targets"), number(t, "weight", at + ".targets", 1.0));
                else
                    throw ConfigError(at + ".targets", "expected object names or {object, weight}");
            }
        } else {
            throw ConfigError(at + ".targets", "expected object names or {object, weight}");
        }
        const std::string default_pattern = to_string(w.objects[gen.targets.front().object].pattern);
        const auto pat = parse_access_pattern(text(g, "pattern", at, default_pattern));
        if (!pat) throw ConfigError(at + ".pattern", "unknown access pattern");
        gen.pattern = *pat;
        gen.op_count = count(g, "op_count", at, 0);
        if (const Json* a = find(g, "access_bytes")) gen.access_bytes = parse_bytes(*a, at + ".access_bytes");
        gen.compute_gap = time_ns(g, "compute_gap_ns", at, w.objects[gen.targets.front().object].compute_gap);
        gen.zipf_theta = number(g, "zipf_theta", at, gen.zipf_theta);
        gen.hot_fraction = number(g, "hot_fraction", at, gen.hot_fraction);
        w.groups.push_back(tg);
    }
    return w;
}

// ---------------------------------------------------------------- placement / tiering / run

PlacementPolicy build_placement(const Json& pj, const Topology& topology) {
    const std::string path = "placement";
    check_keys(pj, path, {"policy", "nodes", "footprint_share_min", "access_share_min", "objects", "profiles"});
    const std::string policy = text(pj, "policy", path, std::string("first_touch"));
    const auto nodes = node_indices(topology, names(pj, "nodes", path), "placement.nodes");
    PlacementPolicy p;
    if (policy == "first_touch") {
        p = PlacementPolicy::first_touch();
    } else if (policy == "preferred") {
        p = PlacementPolicy::preferred(nodes);
    } else if (policy == "interleave" || policy == "uniform") {
        p = PlacementPolicy::interleave(nodes);
    } else if (policy == "bind") {
        p = PlacementPolicy::bind(nodes);
    } else if (policy == "oli") {
        p = PlacementPolicy::object_level(nodes, number(pj, "footprint_share_min", path, 0.10),
                                          number(pj, "access_share_min", path, 0.10));
    } else {
        throw ConfigError("placement.policy", "expected first_touch, preferred, interleave, bind or oli");
    }
    p.validate();
    return p;
}

namespace {

TieringPolicy build_tiering(const Json& tj) {
    const std::string path = "tiering";
    check_keys(tj, path,
               {"policy", "scanner_enabled", "scan_period_ns", "pages_per_scan", "tiering08", "tpp_require_active_lru",
                "demotion", "fault_delay_ns"});
    const auto kind = parse_tiering_kind(text(tj, "policy", path, std::string("no_balance")));
    if (!kind) throw ConfigError("tiering.policy", "expected no_balance, autonuma, tiering08 or tpp");
    TieringPolicy t = TieringPolicy::defaults(*kind);
    t.scanner.enabled = flag(tj, "scanner_enabled", path, t.scanner.enabled);
    t.scanner.scan_period = time_ns(tj, "scan_period_ns", path, t.scanner.scan_period);
    t.scanner.pages_per_scan = count(tj, "pages_per_scan", path, t.scanner.pages_per_scan);
    t.tpp_require_active_lru = flag(tj, "tpp_require_active_lru", path, t.tpp_require_active_lru);
    t.fault_delay = time_ns(tj, "fault_delay_ns", path, t.fault_delay);
    if (const Json* e = find(tj, "tiering08")) {
        const std::string at = "tiering.tiering08";
        check_keys(*e, at,
                   {"hot_threshold_ns", "min_threshold_ns", "max_threshold_ns", "promotion_budget_bytes_per_s",
                    "adjust_interval_ns", "rate_limit"});
        auto& c = t.tiering08;
        c.hot_threshold = time_ns(*e, "hot_threshold_ns", at, c.hot_threshold);
        c.min_threshold = time_ns(*e, "min_threshold_ns", at, c.min_threshold);
        c.max_threshold = time_ns(*e, "max_threshold_ns", at, c.max_threshold);
        if (const Json* b = find(*e, "promotion_budget_bytes_per_s"))
            c.promotion_budget_bytes_per_s = static_cast<double>(parse_bytes(*b, at + ".promotion_budget_bytes_per_s"));
        c.adjust_interval = time_ns(*e, "adjust_interval_ns", at, c.adjust_interval);
        c.rate_limit = flag(*e, "rate_limit", at, c.rate_limit);
    }
    if (const Json* e = find(tj, "demotion")) {
        const std::string at = "tiering.demotion";
        check_keys(*e, at, {"headroom_pages", "batch_pages", "period_ns"});
        t.demotion.headroom_pages = count(*e, "headroom_pages", at, t.demotion.headroom_pages);
        t.demotion.batch_pages = count(*e, "batch_pages", at, t.demotion.batch_pages);
        t.demotion.period = time_ns(*e, "period_ns", at, t.demotion.period);
    }
    t.validate();
    return t;
}

}  // namespace

Json profiles_to_json(const std::vector<ObjectProfile>& profiles) {
    Json arr = Json::array();
    for (const auto& p : profiles)
        arr.push_back({{"object", p.object_id},
                       {"footprint_bytes", p.footprint_bytes},
                       {"access_count", p.access_count},
                       {"pattern", to_string(p.pattern)}});
    return arr;
}

std::vector<ObjectProfile> profiles_from_json(const Json& j) {
    if (!j.is_array()) throw ConfigError("placement.profiles", "expected a list");
    std::vector<ObjectProfile> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = "placement.profiles." + std::to_string(i);
        const Json& e = j[i];
        check_keys(e, at, {"object", "footprint_bytes", "access_count", "pattern"});
        ObjectProfile p;
        p.object_id = text(e, "object", at);
        const Json* f = find(e, "footprint_bytes");
        if (!f) throw ConfigError(at + ".footprint_bytes", "required");
        p.footprint_bytes = parse_bytes(*f, at + ".footprint_bytes");
        p.access_count = count(e, "access_count", at);
        const auto pat = parse_access_pattern(text(e, "pattern", at, std::string("rand_stream")));
        if (!pat) throw ConfigError(at + ".pattern", "unknown access pattern");
        p.pattern = *pat;
        out.push_back(p);
    }
    return out;
}

SimConfig build_sim_config(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("config", "top level must be a JSON object");
    check_keys(doc, "",
               {"name", "description", "calibration_notes", "topology", "devices", "links", "workload", "placement",
                "tiering", "run"});
    SimConfig c;
    c.topology = build_topology(doc);

    const Json* wj = find(doc, "workload");
    if (!wj) throw ConfigError("workload", "required");
    c.workload = build_workload(*wj, c.topology);

    const Json empty = Json::object();
    const Json& pj = doc.contains("placement") ? doc["placement"] : empty;
    c.placement = build_placement(pj, c.topology);
    if (const Json* objs = find(pj, "objects")) {
        if (!objs->is_object()) throw ConfigError("placement.objects", "expected an object keyed by object name");
        c.object_placement.assign(c.workload.objects.size(), c.placement);
        for (const auto& [name, spec] : objs->items()) {
            auto idx = c.workload.find_object(name);
            if (!idx) throw ConfigError("placement.objects." + name, "unknown workload object");
            Json sub = spec;
            if (sub.contains("objects") || sub.contains("profiles"))
                throw ConfigError("placement.objects." + name, "nested objects/profiles are not allowed");
            c.object_placement[*idx] = build_placement(sub, c.topology);
            if (c.object_placement[*idx].kind == PlacementKind::ObjectLevel)
                throw ConfigError("placement.objects." + name + ".policy", "oli applies to the whole workload");
        }
    }
    if (const Json* prof = find(pj, "profiles")) c.profiles = profiles_from_json(*prof);

    c.tiering = build_tiering(doc.contains("tiering") ? doc["tiering"] : empty);

    const Json& rj = doc.contains("run") ? doc["run"] : empty;
    const std::string rp = "run";
    check_keys(rj, rp,
               {"seed", "duration_ns", "warmup_ns", "page_size", "aging_window_ns", "sample_period_ns", "home_socket",
                "mems", "run_id", "policy_label"});
    auto& r = c.run;
    r.seed = count(rj, "seed", rp, r.seed);
    r.duration = time_ns(rj, "duration_ns", rp, r.duration);
    r.warmup = time_ns(rj, "warmup_ns", rp, r.warmup);
    if (const Json* ps = find(rj, "page_size")) r.page_size = parse_bytes(*ps, "run.page_size");
    r.aging_window = time_ns(rj, "aging_window_ns", rp, r.aging_window);
    r.sample_period = time_ns(rj, "sample_period_ns", rp, r.sample_period);
    if (rj.contains("home_socket")) r.home_socket = socket_index(c.topology, text(rj, "home_socket", rp), "run.home_socket");
    r.mems = node_indices(c.topology, names(rj, "mems", rp), "run.mems");
    c.run_id = text(rj, "run_id", rp, std::string("run"));
    c.policy_label = text(rj, "policy_label", rp, std::string());

    c.config_digest = digest(doc.dump());
    c.validate();
    return c;
}

// ---------------------------------------------------------------- policy shorthands

PolicySpec parse_policy_spec(const std::string& spec_text) {
    PolicySpec spec;
    spec.text = spec_text;
    std::string placement = spec_text;
    const auto plus = spec_text.find('+');
    if (plus != std::string::npos) {
        placement = spec_text.substr(0, plus);
        spec.tiering = spec_text.substr(plus + 1);
    } else if (parse_tiering_kind(spec_text)) {
        spec.tiering = spec_text;
        placement.clear();
    }
    if (spec.tiering && !parse_tiering_kind(*spec.tiering))
        throw ConfigError("policy", "unknown tiering policy '" + *spec.tiering + "'");
    if (placement.empty()) return spec;

    const auto colon = placement.find(':');
    const std::string kind = placement.substr(0, colon);
    Json nodes = Json::array();
    if (colon != std::string::npos) {
        std::istringstream ss(placement.substr(colon + 1));
        std::string n;
        while (std::getline(ss, n, ','))
            if (!n.empty()) nodes.push_back(n);
    }
    static const std::set<std::string> kKinds = {"first_touch", "preferred", "interleave", "uniform", "bind", "oli"};
    if (!kKinds.count(kind)) throw ConfigError("policy", "unknown placement policy '" + kind + "'");
    if (kind != "first_touch" && nodes.empty())
        throw ConfigError("policy", "'" + kind + "' needs a node list, e.g. " + kind + ":ldram,cxl");
    Json p = {{"policy", kind == "uniform" ? "interleave" : kind}};
    if (!nodes.empty()) p["nodes"] = nodes;
    spec.placement = p;
    return spec;
}

void apply_policy(Json& doc, const PolicySpec& spec) {
    if (spec.placement) {
        Json keep = Json::object();
        if (doc.contains("placement") && doc["placement"].is_object()) {
            for (const char* k : {"footprint_share_min", "access_share_min", "profiles"})
                if (doc["placement"].contains(k)) keep[k] = doc["placement"][k];
        }
        doc["placement"] = *spec.placement;
        for (auto& [k, v] : keep.items()) doc["placement"][k] = v;
    }
    if (spec.tiering) {
        if (!doc.contains("tiering") || !doc["tiering"].is_object()) doc["tiering"] = Json::object();
        doc["tiering"]["policy"] = *spec.tiering;
    }
    if (!doc.contains("run") || !doc["run"].is_object()) doc["run"] = Json::object();
    doc["run"]["policy_label"] = spec.text;
}

}  // namespace tierlab
