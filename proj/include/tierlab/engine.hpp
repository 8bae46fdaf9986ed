#pragma once

/// @file engine.hpp
/// @brief Deterministic discrete-event core.
///
/// Simulated threads issue requests from their generators through resolved
/// data paths. A min-heap ordered by (time, sequence) drives the clock, so the
/// same configuration and seed always replay the same event order.

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "tierlab/metrics.hpp"
#include "tierlab/placement.hpp"
#include "tierlab/tiering.hpp"
#include "tierlab/topology.hpp"
#include "tierlab/vmem.hpp"
#include "tierlab/workloads.hpp"

namespace tierlab {

struct RunParams {
    std::uint64_t seed = 1;
    SimTime duration = 0;  ///< 0: run until every op-count thread finishes
    SimTime warmup = 0;    ///< measurement window starts here
    Bytes page_size = 4096;
    SimTime aging_window = 10'000'000'000LL;    // 10 ms
    SimTime sample_period = 10'000'000'000LL;   // counter timeline, 10 ms
    std::optional<std::size_t> home_socket;     ///< allocating socket; default: first group's socket
    std::vector<std::size_t> mems;              ///< nodes usable for memory; empty = all
};

struct SimConfig {
    Topology topology;
    Workload workload;
    PlacementPolicy placement;
    /// Per-object placement, overriding `placement` when non-empty (one per object).
    std::vector<PlacementPolicy> object_placement;
    /// Object profiles for OBJECT_LEVEL placement; profiled with a preferred run when absent.
    std::optional<std::vector<ObjectProfile>> profiles;
    TieringPolicy tiering;
    RunParams run;
    std::string run_id = "run";
    std::string policy_label;  ///< defaults to the placement/tiering names
    std::string config_digest;

    /// Throws ConfigError.
    void validate() const;
};

/// Min-heap of timed events; ties dequeue in insertion order.
template <typename Payload>
class EventQueue {
public:
    struct Entry {
        SimTime time;
        std::uint64_t seq;
        Payload payload;
    };

    void push(SimTime time, Payload payload) { heap_.push({time, next_seq_++, std::move(payload)}); }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    const Entry& top() const { return heap_.top(); }
    Entry pop() {
        Entry e = heap_.top();
        heap_.pop();
        return e;
    }

private:
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

class Engine {
public:
    /// Builds the page table and threads. Throws ConfigError, OutOfMemory, UnreachableNode.
    explicit Engine(SimConfig config);
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Process every event with time <= @p t (bounded by the run's end).
    void run_until(SimTime t);
    /// Run to completion and return the final metrics.
    RunMetrics run();

    SimTime now() const;
    bool finished() const;
    /// Cumulative metrics at the current clock.
    RunMetrics snapshot() const;

    const PageTable& pages() const;
    const SimConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Run one simulation.
RunMetrics run(const SimConfig& config);

/// Profile objects by running @p config with preferred placement over its
/// allowed nodes and no tiering.
std::vector<ObjectProfile> profile_objects(const SimConfig& config);

/// Allowed nodes for @p config ordered by unloaded latency from @p socket.
std::vector<std::size_t> allowed_tier_order(const SimConfig& config, std::size_t socket);

/// Socket that allocates memory for @p config.
std::size_t home_socket(const SimConfig& config);

}  // namespace tierlab
