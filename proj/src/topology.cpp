#include "tierlab/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include "tierlab/errors.hpp"

namespace tierlab {

namespace {

bool is_pcie(LinkKind kind) { return kind == LinkKind::PcieCxl || kind == LinkKind::PcieGpu; }

struct Edge {
    std::size_t to = 0;
    std::optional<std::size_t> link;  ///< empty = direct memory-controller attachment
    bool a_to_b = true;
};

}  // namespace

const char* to_string(LinkKind kind) {
    switch (kind) {
        case LinkKind::InterSocket: return "INTER_SOCKET";
        case LinkKind::PcieCxl: return "PCIE_CXL";
        case LinkKind::PcieGpu: return "PCIE_GPU";
    }
    return "?";
}

std::optional<LinkKind> parse_link_kind(const std::string& text) {
    if (text == "INTER_SOCKET" || text == "inter_socket") return LinkKind::InterSocket;
    if (text == "PCIE_CXL" || text == "pcie_cxl") return LinkKind::PcieCxl;
    if (text == "PCIE_GPU" || text == "pcie_gpu") return LinkKind::PcieGpu;
    return std::nullopt;
}

Topology::Topology(std::vector<Socket> sockets, std::vector<MemoryNode> nodes, std::vector<Gpu> gpus,
                   std::vector<Link> links)
    : sockets_(std::move(sockets)), nodes_(std::move(nodes)), gpus_(std::move(gpus)), links_(std::move(links)) {
    validate();
    compute_distances();
}

std::optional<std::size_t> Topology::find_node(const std::string& id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].device.device_id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> Topology::find_link(const std::string& id) const {
    for (std::size_t i = 0; i < links_.size(); ++i)
        if (links_[i].link_id == id) return i;
    return std::nullopt;
}

std::optional<Endpoint> Topology::find_endpoint(const std::string& name) const {
    for (std::size_t i = 0; i < sockets_.size(); ++i)
        if (sockets_[i].name == name) return Endpoint{Endpoint::Type::Socket, i};
    for (std::size_t i = 0; i < gpus_.size(); ++i)
        if (gpus_[i].name == name) return Endpoint{Endpoint::Type::Gpu, i};
    if (auto n = find_node(name)) return Endpoint{Endpoint::Type::Node, *n};
    return std::nullopt;
}

std::optional<Agent> Topology::find_agent(const std::string& name) const {
    auto e = find_endpoint(name);
    if (!e || e->type == Endpoint::Type::Node) return std::nullopt;
    return e->type == Endpoint::Type::Socket ? Agent::socket(e->index) : Agent::gpu(e->index);
}

std::string Topology::endpoint_name(const Endpoint& e) const {
    switch (e.type) {
        case Endpoint::Type::Socket: return sockets_.at(e.index).name;
        case Endpoint::Type::Node: return nodes_.at(e.index).device.device_id;
        case Endpoint::Type::Gpu: return gpus_.at(e.index).name;
    }
    return "?";
}

std::string Topology::agent_name(const Agent& a) const {
    return a.type == Agent::Type::Socket ? sockets_.at(a.index).name : gpus_.at(a.index).name;
}

namespace {

std::size_t vertex_of(const Endpoint& e, std::size_t n_sockets, std::size_t n_nodes) {
    switch (e.type) {
        case Endpoint::Type::Socket: return e.index;
        case Endpoint::Type::Node: return n_sockets + e.index;
        case Endpoint::Type::Gpu: return n_sockets + n_nodes + e.index;
    }
    return 0;
}

std::vector<std::vector<Edge>> build_graph(const std::vector<Socket>& sockets, const std::vector<MemoryNode>& nodes,
                                           const std::vector<Gpu>& gpus, const std::vector<Link>& links) {
    const std::size_t s = sockets.size(), n = nodes.size();
    std::vector<std::vector<Edge>> adj(s + n + gpus.size());
    std::set<std::size_t> linked_nodes;
    for (std::size_t i = 0; i < links.size(); ++i) {
        const auto va = vertex_of(links[i].a, s, n);
        const auto vb = vertex_of(links[i].b, s, n);
        adj[va].push_back({vb, i, true});
        adj[vb].push_back({va, i, false});
        if (links[i].a.type == Endpoint::Type::Node) linked_nodes.insert(links[i].a.index);
        if (links[i].b.type == Endpoint::Type::Node) linked_nodes.insert(links[i].b.index);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (linked_nodes.count(j)) continue;
        adj[nodes[j].socket].push_back({s + j, std::nullopt, true});
        adj[s + j].push_back({nodes[j].socket, std::nullopt, false});
    }
    return adj;
}

}  // namespace

std::optional<DataPath> Topology::bfs(const Endpoint& from, std::size_t target_node) const {
    const std::size_t s = sockets_.size(), n = nodes_.size();
    const auto adj = build_graph(sockets_, nodes_, gpus_, links_);
    const std::size_t start = vertex_of(from, s, n);
    const std::size_t goal = s + target_node;

    constexpr auto kUnseen = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent(adj.size(), kUnseen);
    std::vector<const Edge*> via(adj.size(), nullptr);
    std::deque<std::size_t> frontier{start};
    parent[start] = start;
    while (!frontier.empty()) {
        const auto v = frontier.front();
        frontier.pop_front();
        if (v == goal) break;
        // Only sockets route traffic; nodes and GPUs are endpoints.
        if (v != start && v >= s) continue;
        for (const auto& e : adj[v]) {
            if (parent[e.to] != kUnseen) continue;
            parent[e.to] = v;
            via[e.to] = &e;
            frontier.push_back(e.to);
        }
    }
    if (parent[goal] == kUnseen) return std::nullopt;

    std::vector<const Edge*> hops;
    for (auto v = goal; v != start; v = parent[v]) hops.push_back(via[v]);
    std::reverse(hops.begin(), hops.end());

    DataPath path;
    path.terminal = target_node;
    if (from.type == Endpoint::Type::Node) path.source_node = from.index;
    for (std::size_t i = 0; i < hops.size(); ++i) {
        if (hops[i]->link) path.segments.push_back({*hops[i]->link, hops[i]->a_to_b});
        // A socket entered over PCIe and left over PCIe forwards between devices.
        if (i + 1 < hops.size() && hops[i]->link && hops[i + 1]->link &&
            is_pcie(links_[*hops[i]->link].kind) && is_pcie(links_[*hops[i + 1]->link].kind)) {
            const auto via_socket = hops[i]->to;
            if (via_socket < s) path.forwarding_latency_ns += sockets_[via_socket].pcie_forwarding_latency_ns;
        }
    }
    return path;
}

DataPath resolve_path(const Topology& topology, const Agent& agent, std::size_t target_node) {
    if (target_node >= topology.nodes().size()) throw UnreachableNode("unknown target node");
    const bool is_socket = agent.type == Agent::Type::Socket;
    if (agent.index >= (is_socket ? topology.sockets().size() : topology.gpus().size()))
        throw UnreachableNode("unknown agent");
    const Endpoint from{is_socket ? Endpoint::Type::Socket : Endpoint::Type::Gpu, agent.index};
    auto path = topology.bfs(from, target_node);
    if (!path)
        throw UnreachableNode("no path from " + topology.agent_name(agent) + " to " +
                              topology.node(target_node).node_id());
    return *path;
}

DataPath resolve_transfer(const Topology& topology, std::size_t src_node, std::size_t dst_node) {
    if (src_node >= topology.nodes().size() || dst_node >= topology.nodes().size())
        throw UnreachableNode("unknown node");
    auto path = topology.bfs({Endpoint::Type::Node, src_node}, dst_node);
    if (!path)
        throw UnreachableNode("no path from " + topology.node(src_node).node_id() + " to " +
                              topology.node(dst_node).node_id());
    return *path;
}

double path_latency(const DataPath& path, const Topology& topology) {
    double total = topology.node(path.terminal).device.base_latency_ns + path.forwarding_latency_ns;
    if (path.source_node) total += topology.node(*path.source_node).device.base_latency_ns;
    for (const auto& seg : path.segments) total += topology.links()[seg.link].latency_ns;
    return total;
}

double path_bandwidth(const DataPath& path, const Topology& topology) {
    double bw = topology.node(path.terminal).device.peak_bandwidth_gbps;
    if (path.source_node) bw = std::min(bw, topology.node(*path.source_node).device.peak_bandwidth_gbps);
    for (const auto& seg : path.segments) bw = std::min(bw, topology.links()[seg.link].peak_bandwidth_gbps);
    return bw;
}

void Topology::compute_distances() {
    numa_distance_.assign(sockets_.size(), std::vector<unsigned>(nodes_.size(), 0));
    const std::size_t s = sockets_.size();
    const auto adj = build_graph(sockets_, nodes_, gpus_, links_);
    for (std::size_t i = 0; i < s; ++i) {
        std::vector<unsigned> dist(adj.size(), std::numeric_limits<unsigned>::max());
        std::deque<std::size_t> frontier{i};
        dist[i] = 0;
        while (!frontier.empty()) {
            const auto v = frontier.front();
            frontier.pop_front();
            if (v != i && v >= s) continue;
            for (const auto& e : adj[v]) {
                if (dist[e.to] != std::numeric_limits<unsigned>::max()) continue;
                dist[e.to] = dist[v] + 1;
                frontier.push_back(e.to);
            }
        }
        for (std::size_t j = 0; j < nodes_.size(); ++j) numa_distance_[i][j] = dist[s + j];
    }
}

std::vector<std::size_t> Topology::tier_order(std::size_t socket) const {
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t j = 0; j < nodes_.size(); ++j)
        keyed.emplace_back(path_latency(resolve_path(*this, Agent::socket(socket), j), *this), j);
    std::stable_sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> order;
    for (const auto& [lat, j] : keyed) order.push_back(j);
    return order;
}

std::optional<std::size_t> Topology::local_dram(std::size_t socket) const {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        if (nodes_[j].socket != socket || nodes_[j].device.kind == DeviceKind::CXL) continue;
        if (numa_distance_.empty() || numa_distance_[socket][j] != 1) continue;
        if (!best) best = j;
    }
    return best;
}

void Topology::validate() const {
    if (sockets_.empty()) throw ConfigError("topology.sockets", "at least one socket is required");
    if (nodes_.empty()) throw ConfigError("devices", "at least one memory node is required");
    std::set<std::string> names;
    auto unique = [&](const std::string& name, const std::string& key) {
        if (!names.insert(name).second) throw ConfigError(key, "duplicate name '" + name + "'");
    };
    for (const auto& sock : sockets_) unique(sock.name, "topology.sockets");
    for (const auto& node : nodes_) {
        node.device.validate();
        unique(node.device.device_id, "devices");
        if (node.socket >= sockets_.size())
            throw ConfigError("devices." + node.device.device_id + ".socket", "unknown socket");
    }
    for (const auto& gpu : gpus_) {
        unique(gpu.name, "topology.gpus");
        if (gpu.host_socket >= sockets_.size())
            throw ConfigError("topology.gpus." + gpu.name + ".host_socket", "unknown socket");
    }
    auto endpoint_ok = [&](const Endpoint& e) {
        switch (e.type) {
            case Endpoint::Type::Socket: return e.index < sockets_.size();
            case Endpoint::Type::Node: return e.index < nodes_.size();
            case Endpoint::Type::Gpu: return e.index < gpus_.size();
        }
        return false;
    };
    for (const auto& link : links_) {
        const std::string at = "links." + link.link_id;
        if (!(link.latency_ns >= 0.0)) throw ConfigError(at + ".latency_ns", "must be >= 0");
        if (!(link.peak_bandwidth_gbps > 0.0)) throw ConfigError(at + ".peak_bandwidth_gbps", "must be > 0");
        if (!endpoint_ok(link.a) || !endpoint_ok(link.b)) throw ConfigError(at, "unknown endpoint");
        if (link.a == link.b) throw ConfigError(at, "link endpoints must differ");
    }
    for (const auto& node : nodes_) {
        if (node.device.kind != DeviceKind::CXL) continue;
        bool linked = false;
        for (const auto& link : links_)
            for (const auto& e : {link.a, link.b})
                if (e.type == Endpoint::Type::Node && nodes_[e.index].device.device_id == node.device.device_id)
                    linked = true;
        if (!linked)
            throw ConfigError("devices." + node.device.device_id, "CXL node must be attached through a PCIE_CXL link");
    }
    for (std::size_t i = 0; i < sockets_.size(); ++i)
        for (std::size_t j = 0; j < nodes_.size(); ++j)
            if (!bfs({Endpoint::Type::Socket, i}, j))
                throw ConfigError("topology", "node " + nodes_[j].device.device_id + " unreachable from " +
                                                  sockets_[i].name);
}

Fabric::Fabric(const Topology& topology)
    : devices_(topology.nodes().size()), links_(2 * topology.links().size()) {}

void Fabric::set_measure_window(SimTime begin, SimTime end) {
    for (auto* group : {&devices_, &links_})
        for (auto& s : *group) {
            s.measure_begin = begin;
            s.measure_end = end;
        }
}

SimTime TransferPlan::total_latency() const {
    SimTime total = 0;
    for (const auto& s : stages) total += s.latency;
    return total;
}

double TransferPlan::bottleneck_gbps() const {
    double bw = std::numeric_limits<double>::infinity();
    for (const auto& s : stages) bw = std::min(bw, s.peak_gbps);
    return bw;
}

namespace {

Stage device_stage(const Topology& topology, std::size_t node) {
    const auto& dev = topology.node(node).device;
    return {Stage::Kind::Device, node, true, dev.peak_bandwidth_gbps, ns_to_ps(dev.base_latency_ns)};
}

Stage link_stage(const Topology& topology, std::size_t link, bool a_to_b) {
    const auto& l = topology.links()[link];
    return {Stage::Kind::Link, link, a_to_b, l.peak_bandwidth_gbps, ns_to_ps(l.latency_ns)};
}

}  // namespace

TransferPlan read_plan(const DataPath& path, const Topology& topology) {
    TransferPlan plan;
    plan.stages.push_back(device_stage(topology, path.terminal));
    for (auto it = path.segments.rbegin(); it != path.segments.rend(); ++it)
        plan.stages.push_back(link_stage(topology, it->link, !it->a_to_b));
    plan.stages.back().latency += ns_to_ps(path.forwarding_latency_ns);
    return plan;
}

TransferPlan migration_plan(const DataPath& path, const Topology& topology) {
    TransferPlan plan;
    if (path.source_node) plan.stages.push_back(device_stage(topology, *path.source_node));
    for (const auto& seg : path.segments) plan.stages.push_back(link_stage(topology, seg.link, seg.a_to_b));
    plan.stages.push_back(device_stage(topology, path.terminal));
    plan.stages.back().latency += ns_to_ps(path.forwarding_latency_ns);
    return plan;
}

SimTime traverse(Fabric& fabric, const TransferPlan& plan, Bytes bytes, SimTime start) {
    SimTime head = start;
    SimTime tail = start;
    for (const auto& stage : plan.stages) {
        ServerState& server =
            stage.kind == Stage::Kind::Device ? fabric.device(stage.index) : fabric.link(stage.index, stage.a_to_b);
        const SimTime done = service(server, stage.peak_gbps, {bytes, head});
        const SimTime began = done - transfer_time(bytes, stage.peak_gbps);
        // Cut-through: the tail cannot leave a stage before it left the previous one.
        tail = std::max(done, tail) + stage.latency;
        head = began + stage.latency;
    }
    return tail;
}

}  // namespace tierlab
