// tierlab: command-line front end for the tiered-memory simulator.
//
//   tierlab run --config system_b --policy bind:cxl --out out/
//   tierlab sweep-threads --config system_b --device ldram --device cxl
//   tierlab loaded-latency --config system_b --device cxl
//   tierlab compare-policies --config system_a --workload mixed_two_object
//       --policy interleave:ldram,cxl --policy oli:ldram,cxl
//   tierlab assign-threads --config system_b --threads 52
//   tierlab recipe fig2_sweep --out out/fig2
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tierlab/config.hpp"
#include "tierlab/engine.hpp"
#include "tierlab/errors.hpp"
#include "tierlab/experiments.hpp"
#include "tierlab/metrics.hpp"
#include "tierlab/optimizer.hpp"

namespace fs = std::filesystem;
using namespace tierlab;

namespace {

struct Options {
    std::string config = "system_b";
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    bool plot_data = false;
    std::string format;  // empty: both csv and json

    std::string workload;
    std::vector<std::string> policies;
    std::string tiering;
    std::optional<std::size_t> threads;
    std::vector<std::string> devices;
    std::size_t t_min = 1;
    std::size_t t_max = 32;
    std::vector<double> delays_ns;
    std::optional<double> duration_ns;
    std::optional<double> warmup_ns;
    std::string pattern = "sequential";
    std::string socket;
    unsigned jobs = 0;
};

fs::path recipe_dir() {
    if (const char* env = std::getenv("TIERLAB_RECIPES"); env && *env) return env;
    return TIERLAB_DEFAULT_RECIPE_DIR;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot write " + path.string());
    f << text;
    if (!f) throw RuntimeError("cannot write " + path.string());
}

bool want(const Options& o, const char* fmt) { return o.format.empty() || o.format == fmt; }

void write_runs(const Options& o, const std::string& stem, const std::vector<RunMetrics>& runs,
                const std::vector<std::string>& ids) {
    const fs::path dir(o.out);
    if (want(o, "csv")) write_file(dir / (stem + ".csv"), export_csv(runs, ids));
    if (want(o, "json")) {
        if (runs.size() == 1)
            write_file(dir / (stem + ".json"), export_json(runs.front()));
        else
            write_file(dir / (stem + ".json"), export_json(runs));
    }
}

std::vector<std::string> node_ids(const Topology& t) {
    std::vector<std::string> ids;
    for (const auto& n : t.nodes()) ids.push_back(n.node_id());
    return ids;
}

Json& section(Json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_object()) doc[key] = Json::object();
    return doc[key];
}

// Agent that issues the workload: the document's proxy agent, else the home socket.
std::string default_agent(const Json& doc) {
    if (doc.contains("workload") && doc["workload"].is_object() && doc["workload"].contains("agent"))
        return doc["workload"]["agent"].get<std::string>();
    if (doc.contains("run") && doc["run"].contains("home_socket")) return doc["run"]["home_socket"].get<std::string>();
    return "socket0";
}

// Base document for every command: config, command-specific edits, then --set and --seed.
Json base_document(const Options& o) {
    Json doc = load_document(o.config);
    if (!o.workload.empty()) {
        Json w = {{"proxy", o.workload}, {"agent", default_agent(doc)}};
        doc["workload"] = w;
    }
    if (o.threads && doc["workload"].contains("proxy")) doc["workload"]["threads"] = *o.threads;
    if (o.duration_ns) section(doc, "run")["duration_ns"] = *o.duration_ns;
    if (o.warmup_ns) section(doc, "run")["warmup_ns"] = *o.warmup_ns;
    if (!o.tiering.empty()) section(doc, "tiering")["policy"] = o.tiering;
    return doc;
}

void finish_document(const Options& o, Json& doc) {
    for (const auto& s : o.sets) apply_override(doc, s);
    if (o.seed) section(doc, "run")["seed"] = *o.seed;
}

void print_summary(const std::vector<RunMetrics>& runs) {
    for (const auto& m : runs)
        std::cout << m.run_id << "  runtime " << ns_text(m.simulated_runtime) << " ns  mean "
                  << fixed(m.mean_latency_ns(), 1) << " ns  " << fixed(m.total_gbps, 2) << " GB/s\n";
}

// ---------------------------------------------------------------- commands

int cmd_run(const Options& o) {
    Json doc = base_document(o);
    if (!o.policies.empty()) apply_policy(doc, parse_policy_spec(o.policies.front()));
    finish_document(o, doc);
    SimConfig c = build_sim_config(doc);
    RunMetrics m = run(c);
    write_runs(o, "metrics", {m}, node_ids(c.topology));
    print_summary({m});
    return 0;
}

// A per-device sweep pins the workload to the device; --policy replaces that binding.
Json device_document(const Options& o, const std::string& device) {
    Json doc = base_document(o);
    if (o.workload.empty()) doc["workload"] = {{"proxy", "bandwidth_bound"}, {"agent", default_agent(doc)}};
    apply_policy(doc, parse_policy_spec(o.policies.empty() ? "bind:" + device : o.policies.front()));
    return doc;
}

std::vector<std::string> requested_devices(const Options& o) {
    if (!o.devices.empty()) return o.devices;
    return node_ids(build_topology(load_document(o.config)));
}

int cmd_sweep_threads(const Options& o) {
    if (o.t_min == 0 || o.t_min > o.t_max) throw ConfigError("t_min", "need 1 <= t_min <= t_max");
    std::vector<SimConfig> configs;
    std::vector<std::string> ids;
    for (const auto& dev : requested_devices(o)) {
        Json doc = device_document(o, dev);
        auto& r = section(doc, "run");
        if (!r.contains("duration_ns")) r["duration_ns"] = 200000;
        if (!r.contains("warmup_ns")) r["warmup_ns"] = r["duration_ns"].get<double>() / 10.0;
        finish_document(o, doc);
        SimConfig base = build_sim_config(doc);
        if (ids.empty()) ids = node_ids(base.topology);
        base.run_id = dev;
        for (auto& c : thread_sweep_configs(base, o.t_min, o.t_max)) configs.push_back(std::move(c));
    }
    auto runs = run_batch(configs, o.jobs);
    write_runs(o, "sweep_threads", runs, ids);
    if (o.plot_data) {
        std::size_t i = 0;
        for (const auto& dev : requested_devices(o)) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t t = o.t_min; t <= o.t_max; ++t, ++i) pts.emplace_back(double(t), runs[i].total_gbps);
            write_file(fs::path(o.out) / ("plot_bw_vs_threads_" + dev + ".csv"),
                       plot_series("threads", "bandwidth_gbps", pts));
        }
    }
    print_summary(runs);
    return 0;
}

int cmd_loaded_latency(const Options& o) {
    std::vector<SimTime> delays;
    for (double d : o.delays_ns) {
        if (d < 0) throw ConfigError("delays_ns", "delays must be non-negative");
        delays.push_back(ns_to_ps(d));
    }
    if (delays.empty()) delays = default_injection_delays();

    std::vector<SimConfig> configs;
    std::vector<std::string> ids;
    const auto devices = requested_devices(o);
    for (const auto& dev : devices) {
        Json doc = device_document(o, dev);
        if (o.workload.empty()) {
            const std::string agent = default_agent(doc);
            doc["workload"] = {
                {"name", "loaded_latency"},
                {"objects", Json::array({{{"name", "buffer"}, {"size_bytes", "1GiB"}, {"pattern", "rand_stream"}}})},
                {"threads", Json::array({{{"agent", agent},
                                          {"count", o.threads.value_or(32)},
                                          {"targets", "buffer"},
                                          {"access_bytes", 64},
                                          {"max_outstanding", 80}}})}};
        }
        auto& r = section(doc, "run");
        if (!r.contains("duration_ns")) r["duration_ns"] = 200000;
        finish_document(o, doc);
        SimConfig base = build_sim_config(doc);
        if (ids.empty()) ids = node_ids(base.topology);
        base.run_id = dev;
        for (auto& c : loaded_latency_configs(base, delays)) configs.push_back(std::move(c));
    }
    auto runs = run_batch(configs, o.jobs);
    write_runs(o, "loaded_latency", runs, ids);
    if (o.plot_data) {
        std::size_t i = 0;
        for (const auto& dev : devices) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t k = 0; k < delays.size(); ++k, ++i) pts.emplace_back(runs[i].total_gbps, runs[i].mean_latency_ns());
            write_file(fs::path(o.out) / ("plot_latency_vs_bw_" + dev + ".csv"),
                       plot_series("bandwidth_gbps", "mean_latency_ns", pts));
        }
    }
    print_summary(runs);
    return 0;
}

std::string ranking_csv(const PolicyRanking& r) {
    std::ostringstream s;
    s << "rank,policy,simulated_runtime_ns,speedup,numa_hint_faults,pgpromote_success,pgdemote_kswapd,"
         "pgmigrate_success\n";
    for (std::size_t k = 0; k < r.order.size(); ++k) {
        const auto& m = r.runs[r.order[k]];
        s << k + 1 << ',' << csv_field(m.policy) << ',' << ns_text(m.simulated_runtime) << ',' << fixed(r.speedup[r.order[k]], 4)
          << ',' << m.counters.numa_hint_faults << ',' << m.counters.pgpromote_success << ','
          << m.counters.pgdemote_kswapd << ',' << m.counters.pgmigrate_success << '\n';
    }
    return s.str();
}

int cmd_compare_policies(const Options& o) {
    if (o.policies.empty()) throw ConfigError("policy", "give at least one --policy");
    std::vector<SimConfig> configs;
    std::vector<std::string> ids;
    for (const auto& p : o.policies) {
        Json doc = base_document(o);
        apply_policy(doc, parse_policy_spec(p));
        finish_document(o, doc);
        SimConfig c = build_sim_config(doc);
        c.run_id = p;
        if (ids.empty()) ids = node_ids(c.topology);
        configs.push_back(std::move(c));
    }
    auto ranking = rank_policies(run_batch(configs, o.jobs));
    write_runs(o, "compare", ranking.runs, ids);
    write_file(fs::path(o.out) / "ranking.csv", ranking_csv(ranking));
    std::cout << ranking_csv(ranking);
    return 0;
}

int cmd_assign_threads(const Options& o) {
    Json doc = base_document(o);
    finish_document(o, doc);
    const Topology topo = build_topology(doc);
    std::string socket = o.socket;
    if (socket.empty()) socket = doc.contains("run") && doc["run"].contains("home_socket")
                                     ? doc["run"]["home_socket"].get<std::string>()
                                     : topo.sockets().front().name;
    const auto agent = topo.find_agent(socket);
    if (!agent || agent->type != Agent::Type::Socket) throw ConfigError("socket", "unknown socket '" + socket + "'");
    const auto cls = parse_issue_class(o.pattern);
    if (!cls) throw ConfigError("pattern", "expected sequential or random");

    std::vector<std::string> wanted = o.devices;
    if (wanted.empty() && doc.contains("run") && doc["run"].contains("mems"))
        wanted = doc["run"]["mems"].get<std::vector<std::string>>();
    std::vector<std::size_t> nodes;
    for (const auto& id : wanted) {
        auto n = topo.find_node(id);
        if (!n) throw ConfigError("devices", "unknown device '" + id + "'");
        nodes.push_back(*n);
    }
    const std::size_t total = o.threads.value_or(topo.sockets()[agent->index].cores);
    const auto curves = path_curves(topo, agent->index, *cls, nodes);
    const Assignment a = assign_threads(curves, total);

    std::ostringstream csv;
    csv << "device_id,threads,bandwidth_gbps,unloaded_latency_ns\n";
    Json j = {{"socket", socket}, {"threads", total}, {"pattern", to_string(*cls)}, {"devices", Json::array()}};
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const double bw = curves[i].bandwidth(a.threads[i]);
        csv << curves[i].device_id << ',' << a.threads[i] << ',' << fixed(bw, 3) << ','
            << fixed(curves[i].unloaded_latency_ns, 3) << '\n';
        j["devices"].push_back({{"device_id", curves[i].device_id},
                                {"threads", a.threads[i]},
                                {"bandwidth_gbps", bw},
                                {"unloaded_latency_ns", curves[i].unloaded_latency_ns}});
    }
    csv << "total," << total << ',' << fixed(a.total_gbps, 3) << ",\n";
    j["total_gbps"] = a.total_gbps;
    if (want(o, "csv")) write_file(fs::path(o.out) / "assignment.csv", csv.str());
    if (want(o, "json")) write_file(fs::path(o.out) / "assignment.json", j.dump(2) + "\n");
    std::cout << csv.str();
    return 0;
}

int cmd_profile(const Options& o) {
    Json doc = base_document(o);
    finish_document(o, doc);
    const auto profiles = profile_objects(build_sim_config(doc));
    const std::string text = profiles_to_json(profiles).dump(2) + "\n";
    write_file(fs::path(o.out) / "profiles.json", text);
    std::cout << text;
    return 0;
}

int dispatch(const std::string& command, const Options& o) {
    if (command == "run") return cmd_run(o);
    if (command == "sweep-threads") return cmd_sweep_threads(o);
    if (command == "loaded-latency") return cmd_loaded_latency(o);
    if (command == "compare-policies") return cmd_compare_policies(o);
    if (command == "assign-threads") return cmd_assign_threads(o);
    if (command == "profile") return cmd_profile(o);
    throw ConfigError("command", "unknown command '" + command + "'");
}

// ---------------------------------------------------------------- recipes

fs::path locate_recipe(const std::string& name) {
    fs::path p(name);
    if (fs::exists(p) && fs::is_regular_file(p)) return p;
    p = recipe_dir() / name;
    if (!p.has_extension()) p += ".json";
    if (!fs::exists(p)) throw ConfigError("recipe", "no recipe '" + name + "' in " + recipe_dir().string());
    return p;
}

// Recipe arguments first, then whatever the command line gave explicitly.
std::pair<std::string, Options> load_recipe(const std::string& name) {
    const fs::path path = locate_recipe(name);
    std::ifstream f(path, std::ios::binary);
    Json r;
    try {
        r = Json::parse(f);
    } catch (const Json::parse_error& e) {
        throw ConfigError("recipe", path.string() + ": " + e.what());
    }
    if (!r.is_object() || !r.contains("command")) throw ConfigError("recipe.command", "required");
    Options o;
    std::string command;
    try {
        for (const auto& [k, v] : r.items()) {
            if (k == "command") command = v.get<std::string>();
            else if (k == "description") continue;
            else if (k == "config") o.config = v.get<std::string>();
            else if (k == "workload") o.workload = v.get<std::string>();
            else if (k == "policy") o.policies = {v.get<std::string>()};
            else if (k == "policies") o.policies = v.get<std::vector<std::string>>();
            else if (k == "tiering") o.tiering = v.get<std::string>();
            else if (k == "threads") o.threads = v.get<std::size_t>();
            else if (k == "devices") o.devices = v.get<std::vector<std::string>>();
            else if (k == "t_min") o.t_min = v.get<std::size_t>();
            else if (k == "t_max") o.t_max = v.get<std::size_t>();
            else if (k == "delays_ns") o.delays_ns = v.get<std::vector<double>>();
            else if (k == "duration_ns") o.duration_ns = v.get<double>();
            else if (k == "warmup_ns") o.warmup_ns = v.get<double>();
            else if (k == "pattern") o.pattern = v.get<std::string>();
            else if (k == "socket") o.socket = v.get<std::string>();
            else if (k == "set") o.sets = v.get<std::vector<std::string>>();
            else if (k == "seed") o.seed = v.get<std::uint64_t>();
            else if (k == "plot_data") o.plot_data = v.get<bool>();
            else if (k == "format") o.format = v.get<std::string>();
            else throw ConfigError("recipe." + k, "unknown recipe key");
        }
    } catch (const Json::exception& e) {
        throw ConfigError("recipe", path.string() + ": " + e.what());
    }
    return {command, o};
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "Config file or preset name")->capture_default_str();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--set", o.sets, "Override a config value: dotted.key=value (repeatable)");
    sub->add_flag("--plot-data", o.plot_data, "Also write two-column plot series");
    sub->add_option("--format", o.format, "Output format (default: both)")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", o.jobs, "Concurrent simulations (0: one per core)");
}

void add_workload(CLI::App* sub, Options& o) {
    sub->add_option("--workload", o.workload, "Proxy workload name");
    sub->add_option("--threads", o.threads, "Thread count");
    sub->add_option("--duration-ns", o.duration_ns, "Simulated duration");
    sub->add_option("--warmup-ns", o.warmup_ns, "Start of the measurement window");
    sub->add_option("--tiering", o.tiering, "Tiering policy");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tierlab: tiered-memory simulator and placement policy engine"};
    app.require_subcommand(1);
    Options o;

    auto* run_cmd = app.add_subcommand("run", "Run one simulation");
    add_common(run_cmd, o);
    add_workload(run_cmd, o);
    run_cmd->add_option("--policy", o.policies, "Placement[+tiering] policy")->expected(1);

    auto* sweep = app.add_subcommand("sweep-threads", "Bandwidth against thread count per device");
    add_common(sweep, o);
    add_workload(sweep, o);
    sweep->add_option("--device", o.devices, "Device to sweep (repeatable; default all)");
    sweep->add_option("--policy", o.policies, "Placement instead of binding to each device")->expected(1);
    sweep->add_option("--t-min", o.t_min)->capture_default_str();
    sweep->add_option("--t-max", o.t_max)->capture_default_str();

    auto* loaded = app.add_subcommand("loaded-latency", "Latency against bandwidth under rising load");
    add_common(loaded, o);
    add_workload(loaded, o);
    loaded->add_option("--device", o.devices, "Device to load (repeatable; default all)");
    loaded->add_option("--delays-ns", o.delays_ns, "Injection delays (default 80 us down to 0)");

    auto* compare = app.add_subcommand("compare-policies", "Run one workload under several policies and rank them");
    add_common(compare, o);
    add_workload(compare, o);
    compare->add_option("--policy", o.policies, "Placement[+tiering] policy (repeatable)")->required();

    auto* assign = app.add_subcommand("assign-threads", "Bandwidth-maximizing thread split across devices");
    add_common(assign, o);
    assign->add_option("--threads", o.threads, "Total threads (default: cores of the socket)");
    assign->add_option("--device", o.devices, "Candidate device (repeatable; default run.mems or all)");
    assign->add_option("--socket", o.socket, "Issuing socket (default run.home_socket)");
    assign->add_option("--pattern", o.pattern, "sequential or random")->capture_default_str();

    auto* profile = app.add_subcommand("profile", "Profile workload objects for object-level placement");
    add_common(profile, o);
    add_workload(profile, o);

    std::string recipe_name;
    auto* recipe = app.add_subcommand("recipe", "Run a named experiment recipe");
    recipe->add_option("name", recipe_name, "Recipe name or file")->required();
    add_common(recipe, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (recipe->parsed()) {
            auto [command, ro] = load_recipe(recipe_name);
            if (recipe->count("--config")) ro.config = o.config;
            ro.out = o.out;
            if (o.seed) ro.seed = o.seed;
            ro.sets.insert(ro.sets.end(), o.sets.begin(), o.sets.end());
            if (o.plot_data) ro.plot_data = true;
            if (!o.format.empty()) ro.format = o.format;
            ro.jobs = o.jobs;
            return dispatch(command, ro);
        }
        for (auto* sub : app.get_subcommands()) return dispatch(sub->get_name(), o);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const RuntimeError& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 3;
    } catch (const EmptyDeviceSet& e) {
        std::cerr << "config error: devices: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 3;
    }
}
