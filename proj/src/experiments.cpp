#include "tierlab/experiments.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <thread>

namespace tierlab {

std::vector<RunMetrics> run_batch(const std::vector<SimConfig>& configs, unsigned jobs) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<RunMetrics> out(configs.size());
    for (std::size_t begin = 0; begin < configs.size(); begin += jobs) {
        const std::size_t end = std::min(configs.size(), begin + jobs);
        std::vector<std::future<RunMetrics>> wave;
        for (std::size_t i = begin; i < end; ++i)
            wave.push_back(std::async(std::launch::async, [&configs, i] { return run(configs[i]); }));
        for (std::size_t i = begin; i < end; ++i) out[i] = wave[i - begin].get();
    }
    return out;
}

std::vector<SimConfig> thread_sweep_configs(const SimConfig& base, std::size_t t_min, std::size_t t_max) {
    std::vector<SimConfig> configs;
    for (std::size_t t = t_min; t <= t_max; ++t) {
        SimConfig c = base;
        for (auto& g : c.workload.groups) g.count = t;
        c.run_id = base.run_id + "-t" + std::to_string(t);
        configs.push_back(std::move(c));
    }
    return configs;
}

Workload loaded_latency_workload(const std::string& agent, std::size_t threads, Bytes footprint, std::size_t window) {
    Workload w;
    w.name = "loaded_latency";
    w.objects.push_back({"buffer", footprint, AccessPattern::RandStream, 1.0, 0});
    ThreadGroup g;
    g.agent = agent;
    g.count = threads;
    g.max_outstanding = window;
    g.generator.pattern = AccessPattern::RandStream;
    g.generator.targets = {{0, 1.0}};
    g.generator.access_bytes = 64;
    w.groups.push_back(g);
    return w;
}

std::vector<SimTime> default_injection_delays() {
    std::vector<SimTime> delays;
    for (double us : {80.0, 40.0, 20.0, 10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.0}) delays.push_back(ns_to_ps(us * 1000.0));
    return delays;
}

std::vector<SimConfig> loaded_latency_configs(const SimConfig& base, const std::vector<SimTime>& delays) {
    std::vector<SimConfig> configs;
    const SimTime floor = base.run.duration > 0 ? base.run.duration : ns_to_ps(200'000.0);
    for (SimTime d : delays) {
        SimConfig c = base;
        for (auto& g : c.workload.groups) g.injection_delay = d;
        c.run.duration = std::max(floor, 20 * d);
        c.run.warmup = c.run.duration / 10;
        c.run_id = base.run_id + "-delay" + ns_text(d);
        configs.push_back(std::move(c));
    }
    return configs;
}

Workload gpu_transfer_workload(const std::string& gpu, Bytes chunk, std::uint64_t chunks, std::size_t window) {
    Workload w;
    w.name = "gpu_transfer";
    w.objects.push_back({"tensors", chunk * chunks, AccessPattern::SeqStream, 1.0, 0});
    ThreadGroup g;
    g.agent = gpu;
    g.count = 1;
    g.max_outstanding = window;
    g.generator.pattern = AccessPattern::SeqStream;
    g.generator.targets = {{0, 1.0}};
    g.generator.access_bytes = chunk;
    g.generator.op_count = chunks;
    w.groups.push_back(g);
    return w;
}

double throughput(const RunMetrics& m) {
    if (m.simulated_runtime <= 0) return 0.0;
    return static_cast<double>(m.completed) * 1e12 / static_cast<double>(m.simulated_runtime);
}

PolicyRanking rank_policies(std::vector<RunMetrics> runs) {
    PolicyRanking r;
    r.runs = std::move(runs);
    const double first = r.runs.empty() ? 0.0 : throughput(r.runs.front());
    for (const auto& m : r.runs) r.speedup.push_back(first > 0.0 ? throughput(m) / first : 0.0);
    r.order.resize(r.runs.size());
    std::iota(r.order.begin(), r.order.end(), std::size_t{0});
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&](std::size_t a, std::size_t b) { return r.speedup[a] > r.speedup[b]; });
    return r;
}

}  // namespace tierlab
