#pragma once

/// @file experiments.hpp
/// @brief Batches of independent simulations: thread sweeps, loaded-latency
/// sweeps and policy comparisons.
///
/// Every simulation in a batch owns its whole state, so batches run
/// concurrently and are merged back in input order.

#include <cstddef>
#include <string>
#include <vector>

#include "tierlab/engine.hpp"
#include "tierlab/metrics.hpp"

namespace tierlab {

/// Run @p configs with up to @p jobs simulations in flight (0: hardware concurrency).
/// Results are in input order. The first exception thrown by any run is rethrown.
std::vector<RunMetrics> run_batch(const std::vector<SimConfig>& configs, unsigned jobs = 0);

/// One config per thread count in [t_min, t_max]; every thread group gets t threads.
std::vector<SimConfig> thread_sweep_configs(const SimConfig& base, std::size_t t_min, std::size_t t_max);

/// Homogeneous loaded-latency harness: @p threads threads issuing independent
/// 64 B random reads over one object, @p window requests in flight each.
Workload loaded_latency_workload(const std::string& agent, std::size_t threads = 32, Bytes footprint = 1ULL << 30,
                                 std::size_t window = 80);

/// 80, 40, 20, 10, 5, 2, 1, 0.5, 0.2, 0.1 and 0 us.
std::vector<SimTime> default_injection_delays();

/// One config per delay. Each run lasts max(base duration or 200 us, 20 x delay)
/// and measures after a warmup of a tenth of that.
std::vector<SimConfig> loaded_latency_configs(const SimConfig& base, const std::vector<SimTime>& delays);

/// One GPU thread streaming @p chunks transfers of @p chunk bytes over one object.
Workload gpu_transfer_workload(const std::string& gpu, Bytes chunk = 1ULL << 20, std::uint64_t chunks = 64,
                               std::size_t window = 10);

struct PolicyRanking {
    std::vector<RunMetrics> runs;
    std::vector<double> speedup;       ///< throughput relative to the first run
    std::vector<std::size_t> order;    ///< run indices, best first (stable)
};

/// Completed requests per simulated second; for op-count runs this orders runs by runtime.
double throughput(const RunMetrics& m);

PolicyRanking rank_policies(std::vector<RunMetrics> runs);

}  // namespace tierlab
