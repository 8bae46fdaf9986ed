#pragma once

/// @file topology.hpp
/// @brief Sockets, CPU-less memory nodes, GPU endpoints and the links between them.
///
/// `Topology` is an immutable description. Mutable queueing state lives in a
/// `Fabric`, owned by exactly one simulation. Transfers are cut-through: a
/// transfer of B bytes along a path completes after the sum of stage latencies
/// plus B divided by the slowest stage, when nothing else is queued.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tierlab/devices.hpp"
#include "tierlab/units.hpp"

namespace tierlab {

enum class LinkKind { InterSocket, PcieCxl, PcieGpu };

const char* to_string(LinkKind kind);
std::optional<LinkKind> parse_link_kind(const std::string& text);

struct Endpoint {
    enum class Type { Socket, Node, Gpu };
    Type type = Type::Socket;
    std::size_t index = 0;

    friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct Link {
    std::string link_id;
    LinkKind kind = LinkKind::InterSocket;
    double latency_ns = 0.0;  ///< one-way
    double peak_bandwidth_gbps = 0.0;
    Endpoint a;
    Endpoint b;
};

struct Socket {
    std::string name;  ///< "socket0", ...
    unsigned cores = 0;
    /// Extra latency when a path enters and leaves this socket over PCIe
    /// (device-to-device traffic bounced through the host).
    double pcie_forwarding_latency_ns = 0.0;
};

struct MemoryNode {
    DeviceSpec device;
    std::size_t socket = 0;  ///< socket whose memory controller or root port hosts the node
    std::string node_id() const { return device.device_id; }
};

struct Gpu {
    std::string name;  ///< "gpu0", ...
    std::size_t host_socket = 0;
    double agent_overhead_ns = 0.0;  ///< fixed per-transfer runtime overhead
};

/// An agent that issues memory requests: a CPU socket or a GPU.
struct Agent {
    enum class Type { Socket, Gpu };
    Type type = Type::Socket;
    std::size_t index = 0;

    static Agent socket(std::size_t i) { return {Type::Socket, i}; }
    static Agent gpu(std::size_t i) { return {Type::Gpu, i}; }
    friend bool operator==(const Agent&, const Agent&) = default;
};

struct PathSegment {
    std::size_t link = 0;
    bool a_to_b = true;  ///< direction of traversal from the agent toward the target
};

/// Ordered links from an agent (or source node) to a terminal memory node.
struct DataPath {
    std::optional<std::size_t> source_node;  ///< set for node-to-node (migration) paths
    std::vector<PathSegment> segments;
    std::size_t terminal = 0;
    double forwarding_latency_ns = 0.0;  ///< Σ PCIe-to-PCIe forwarding through sockets
};

class Topology {
public:
    Topology() = default;
    Topology(std::vector<Socket> sockets, std::vector<MemoryNode> nodes, std::vector<Gpu> gpus,
             std::vector<Link> links);

    const std::vector<Socket>& sockets() const { return sockets_; }
    const std::vector<MemoryNode>& nodes() const { return nodes_; }
    const std::vector<Gpu>& gpus() const { return gpus_; }
    const std::vector<Link>& links() const { return links_; }

    const MemoryNode& node(std::size_t i) const { return nodes_.at(i); }
    std::optional<std::size_t> find_node(const std::string& id) const;
    std::optional<std::size_t> find_link(const std::string& id) const;
    std::optional<Endpoint> find_endpoint(const std::string& name) const;
    std::optional<Agent> find_agent(const std::string& name) const;
    std::string endpoint_name(const Endpoint& e) const;
    std::string agent_name(const Agent& a) const;

    /// Hop counts from each socket to each node (links and direct attachment are one hop each).
    const std::vector<std::vector<unsigned>>& numa_distance() const { return numa_distance_; }

    /// Node indices ordered by ascending unloaded latency from @p socket (ties by index).
    std::vector<std::size_t> tier_order(std::size_t socket) const;

    /// The DRAM node directly attached to @p socket, if any.
    std::optional<std::size_t> local_dram(std::size_t socket) const;

    /// Throws ConfigError on a structural problem.
    void validate() const;

private:
    std::vector<std::size_t> neighbors_links(const Endpoint& e) const;
    std::optional<DataPath> bfs(const Endpoint& from, std::size_t target_node) const;
    void compute_distances();

    friend DataPath resolve_path(const Topology&, const Agent&, std::size_t);
    friend DataPath resolve_transfer(const Topology&, std::size_t, std::size_t);

    std::vector<Socket> sockets_;
    std::vector<MemoryNode> nodes_;
    std::vector<Gpu> gpus_;
    std::vector<Link> links_;
    std::vector<std::vector<unsigned>> numa_distance_;
};

/// Shortest-hop path from @p agent to @p target_node. Throws UnreachableNode.
DataPath resolve_path(const Topology& topology, const Agent& agent, std::size_t target_node);

/// Shortest-hop path carrying data from @p src_node to @p dst_node (page migration).
DataPath resolve_transfer(const Topology& topology, std::size_t src_node, std::size_t dst_node);

/// Σ segment latencies + forwarding + terminal device base latency (+ source
/// device base latency for node-to-node paths), in ns.
double path_latency(const DataPath& path, const Topology& topology);

/// min over segment peaks and device peaks, in GB/s.
double path_bandwidth(const DataPath& path, const Topology& topology);

/// Mutable queueing state for one simulation: one FIFO server per device and
/// per link direction.
class Fabric {
public:
    explicit Fabric(const Topology& topology);

    ServerState& device(std::size_t node) { return devices_.at(node); }
    const ServerState& device(std::size_t node) const { return devices_.at(node); }
    ServerState& link(std::size_t link, bool a_to_b) { return links_.at(2 * link + (a_to_b ? 0 : 1)); }
    const ServerState& link(std::size_t link, bool a_to_b) const {
        return links_.at(2 * link + (a_to_b ? 0 : 1));
    }

    void set_measure_window(SimTime begin, SimTime end);

private:
    std::vector<ServerState> devices_;
    std::vector<ServerState> links_;
};

/// One queueing stage of a transfer in data-flow order.
struct Stage {
    enum class Kind { Device, Link };
    Kind kind = Kind::Device;
    std::size_t index = 0;  ///< node index or link index
    bool a_to_b = true;     ///< link direction of data flow
    double peak_gbps = 0.0;
    SimTime latency = 0;    ///< propagation after this stage
};

/// Stages a transfer passes through, in the order data flows.
struct TransferPlan {
    std::vector<Stage> stages;

    SimTime total_latency() const;
    double bottleneck_gbps() const;
};

/// Data flowing from the terminal device back to the agent (a read).
TransferPlan read_plan(const DataPath& path, const Topology& topology);

/// Data flowing from the source node to the terminal node (a migration).
TransferPlan migration_plan(const DataPath& path, const Topology& topology);

/// Push @p bytes through @p plan starting at @p start; returns the completion time.
SimTime traverse(Fabric& fabric, const TransferPlan& plan, Bytes bytes, SimTime start);

}  // namespace tierlab
