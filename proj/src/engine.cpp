#include "tierlab/engine.hpp"

#include <algorithm>
#include <map>

#include "tierlab/errors.hpp"

namespace tierlab {

namespace {

struct Event {
    enum class Kind : std::uint8_t { Issue, Complete, MigrationDone, Scan, Adjust, Demote, Sample };
    Kind kind = Kind::Issue;
    std::uint32_t a = 0;  // thread or page
    std::uint32_t b = 0;  // migration destination
    SimTime issued = 0;
};

struct SimThread {
    SimThread(std::size_t id_, std::size_t slot, std::uint32_t node, Generator gen, Rng r)
        : id(id_), agent_slot(slot), accessor_node(node), generator(std::move(gen)), rng(r) {}

    std::size_t id = 0;
    std::size_t agent_slot = 0;
    std::uint32_t accessor_node = 0;
    Generator generator;
    Rng rng;
    std::size_t window = 1;
    bool dependent = false;
    SimTime delay = 0;
    SimTime compute_gap = 0;
    SimTime overhead = 0;
    Bytes request_bytes = 64;
    std::vector<SimTime> pacing;  // per node
    std::uint64_t op_limit = 0;   // 0: until the run ends

    std::uint64_t issued = 0;
    std::uint64_t completed = 0;
    std::size_t outstanding = 0;
    SimTime next_issue = 0;
    bool issue_scheduled = false;
    bool blocked = false;
    LatencyHistogram latency;

    bool done_issuing() const { return op_limit != 0 && issued >= op_limit; }
    bool finished() const { return done_issuing() && outstanding == 0; }
};

std::vector<std::size_t> allowed_nodes(const SimConfig& c) {
    if (!c.run.mems.empty()) return c.run.mems;
    std::vector<std::size_t> all(c.topology.nodes().size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

std::string node_list(const Topology& t, const std::vector<std::size_t>& nodes) {
    std::string s;
    for (auto n : nodes) s += (s.empty() ? "" : ",") + t.node(n).node_id();
    return s;
}

std::string describe(const PlacementPolicy& p, const Topology& t) {
    switch (p.kind) {
        case PlacementKind::FirstTouch: return "first_touch";
        case PlacementKind::Preferred:
            return (p.explicit_binding ? "bind:" : "preferred:") + node_list(t, p.node_order);
        case PlacementKind::UniformInterleave: return "interleave:" + node_list(t, p.node_set);
        case PlacementKind::ObjectLevel: return "oli:" + node_list(t, p.node_set);
    }
    return "?";
}

std::size_t socket_of(const Topology& t, const Agent& a) {
    return a.type == Agent::Type::Socket ? a.index : t.gpus().at(a.index).host_socket;
}

}  // namespace

void SimConfig::validate() const {
    topology.validate();
    workload.validate();
    tiering.validate();
    const std::size_t n_nodes = topology.nodes().size();
    auto check_nodes = [&](const std::vector<std::size_t>& nodes, const std::string& key) {
        for (auto n : nodes)
            if (n >= n_nodes) throw ConfigError(key, "unknown node index " + std::to_string(n));
    };
    if (!object_placement.empty()) {
        if (object_placement.size() != workload.objects.size())
            throw ConfigError("placement.objects", "needs one policy per workload object");
        for (const auto& p : object_placement) {
            p.validate();
            check_nodes(p.node_order, "placement.objects");
            check_nodes(p.node_set, "placement.objects");
        }
    } else {
        placement.validate();
        check_nodes(placement.node_order, "placement.nodes");
        check_nodes(placement.node_set, "placement.nodes");
    }
    check_nodes(run.mems, "run.mems");
    if (!run.mems.empty()) {
        auto allowed = [&](std::size_t n) { return std::find(run.mems.begin(), run.mems.end(), n) != run.mems.end(); };
        auto check_allowed = [&](const PlacementPolicy& p) {
            for (auto n : p.node_order)
                if (!allowed(n)) throw ConfigError("placement.nodes", topology.node(n).node_id() + " is outside run.mems");
            for (auto n : p.node_set)
                if (!allowed(n)) throw ConfigError("placement.nodes", topology.node(n).node_id() + " is outside run.mems");
        };
        if (object_placement.empty())
            check_allowed(placement);
        else
            for (const auto& p : object_placement) check_allowed(p);
    }
    if (run.page_size == 0) throw ConfigError("run.page_size", "must be > 0");
    if (run.duration < 0) throw ConfigError("run.duration_ns", "must be >= 0");
    if (run.warmup < 0) throw ConfigError("run.warmup_ns", "must be >= 0");
    if (run.duration > 0 && run.warmup >= run.duration) throw ConfigError("run.warmup_ns", "must be < duration");
    if (run.sample_period <= 0) throw ConfigError("run.sample_period_ns", "must be > 0");
    if (run.aging_window <= 0) throw ConfigError("run.aging_window_ns", "must be > 0");
    if (run.duration == 0)
        for (std::size_t i = 0; i < workload.groups.size(); ++i)
            if (workload.groups[i].generator.op_count == 0)
                throw ConfigError("run.duration_ns", "required when thread group " + std::to_string(i) +
                                                         " has no op_count");
    for (std::size_t i = 0; i < workload.groups.size(); ++i)
        if (!topology.find_agent(workload.groups[i].agent))
            throw ConfigError("workload.threads." + std::to_string(i) + ".agent",
                              "unknown agent '" + workload.groups[i].agent + "'");
    if (run.home_socket && *run.home_socket >= topology.sockets().size())
        throw ConfigError("run.home_socket", "unknown socket");
}

std::size_t home_socket(const SimConfig& config) {
    if (config.run.home_socket) return *config.run.home_socket;
    if (!config.workload.groups.empty())
        if (auto a = config.topology.find_agent(config.workload.groups.front().agent))
            return socket_of(config.topology, *a);
    return 0;
}

std::vector<std::size_t> allowed_tier_order(const SimConfig& config, std::size_t socket) {
    const auto allowed = allowed_nodes(config);
    std::vector<std::size_t> order;
    for (auto n : config.topology.tier_order(socket))
        if (std::find(allowed.begin(), allowed.end(), n) != allowed.end()) order.push_back(n);
    return order;
}

// ---------------------------------------------------------------- engine state

struct Engine::Impl {
    SimConfig cfg;
    Fabric fabric;
    PageTable table;
    TierView tiers;
    std::vector<SimThread> threads;
    std::vector<Agent> agents;
    std::vector<std::vector<std::optional<TransferPlan>>> plans;  // [agent slot][node]
    std::vector<PageId> first_page;
    EventQueue<Event> queue;
    Scanner scanner;
    Tiering08State t08;
    VmStat stat;

    SimTime clock = 0;
    SimTime end = kNever;  // duration runs stop here
    SimTime last_completion = 0;
    std::size_t active_threads = 0;
    bool stopped = false;

    std::uint64_t issued = 0;
    std::uint64_t completed = 0;
    Bytes measured_request_bytes = 0;
    Bytes migration_bytes = 0;
    LatencyHistogram latency;
    LatencyHistogram measured_latency;
    std::vector<ObjectMetrics> objects;
    std::vector<TimelinePoint> timeline;

    explicit Impl(SimConfig c);

    static std::vector<NodeResidency> residency(const SimConfig& c) {
        std::vector<NodeResidency> nodes;
        for (const auto& n : c.topology.nodes()) {
            NodeResidency r;
            r.capacity_pages = static_cast<std::size_t>(n.device.capacity_bytes / c.run.page_size);
            r.promote_watermark_pages = c.tiering.demotion.headroom_pages;
            nodes.push_back(r);
        }
        return nodes;
    }

    void allocate();
    void build_threads();
    const TransferPlan& plan_for(std::size_t slot, std::size_t node);

    void issue(SimThread& th);
    void schedule_issue(SimThread& th);
    void complete(SimThread& th, SimTime issued_at);
    void start_migration(PageId page, std::uint32_t dst, MigrationKind kind);
    bool periodic_active() const { return !stopped && (end != kNever || active_threads > 0); }
    void step(const EventQueue<Event>::Entry& e);
    void run_until(SimTime t);
    RunMetrics snapshot() const;
};

namespace {
SimConfig validated(SimConfig c) {
    c.validate();
    return c;
}
}  // namespace

Engine::Impl::Impl(SimConfig c)
    : cfg(validated(std::move(c))),
      fabric(cfg.topology),
      table(residency(cfg), cfg.run.page_size, cfg.run.aging_window) {
    if (cfg.run.duration > 0) end = cfg.run.duration;
    fabric.set_measure_window(cfg.run.warmup, end);
    tiers.order = allowed_tier_order(cfg, home_socket(cfg));
    if (tiers.order.empty()) throw ConfigError("run.mems", "no usable memory node");
    t08.hot_threshold = cfg.tiering.tiering08.hot_threshold;

    allocate();
    build_threads();

    for (auto& th : threads) {
        ++active_threads;
        schedule_issue(th);
    }
    if (cfg.tiering.scans()) queue.push(cfg.tiering.scanner.scan_period, {Event::Kind::Scan});
    if (cfg.tiering.kind == TieringKind::Tiering08)
        queue.push(cfg.tiering.tiering08.adjust_interval, {Event::Kind::Adjust});
    if (cfg.tiering.demotes() && tiers.order.size() > 1)
        queue.push(cfg.tiering.demotion.period, {Event::Kind::Demote});
    queue.push(cfg.run.sample_period, {Event::Kind::Sample});
}

void Engine::Impl::allocate() {
    const auto& objs = cfg.workload.objects;
    const std::size_t home = home_socket(cfg);
    PlacementContext ctx;
    ctx.distance_order = tiers.order;
    const auto local = cfg.topology.local_dram(home);
    ctx.local_node = local && std::find(tiers.order.begin(), tiers.order.end(), *local) != tiers.order.end()
                         ? *local
                         : tiers.order.front();

    std::vector<PlacementPolicy> per_object = cfg.object_placement;
    if (per_object.empty()) {
        if (cfg.placement.kind == PlacementKind::ObjectLevel) {
            std::vector<ObjectProfile> profiles = cfg.profiles ? *cfg.profiles : profile_objects(cfg);
            std::vector<ObjectProfile> ordered;
            for (const auto& o : objs) {
                auto it = std::find_if(profiles.begin(), profiles.end(),
                                       [&](const ObjectProfile& p) { return p.object_id == o.name; });
                ordered.push_back(it != profiles.end() ? *it : ObjectProfile{o.name, o.size_bytes, 0, o.pattern});
            }
            const auto selected =
                oli_select(ordered, cfg.placement.footprint_share_min, cfg.placement.access_share_min);
            per_object = oli_place(selected, cfg.placement, ordered, tiers.order);
        } else {
            per_object.assign(objs.size(), cfg.placement);
        }
    }

    first_page.assign(objs.size(), 0);
    for (auto i : oli_allocation_order(per_object)) {
        const Bytes pages = (objs[i].size_bytes + cfg.run.page_size - 1) / cfg.run.page_size;
        const auto ids = allocate_object(table, static_cast<ObjectId>(i), static_cast<std::size_t>(pages),
                                         per_object[i], ctx);
        first_page[i] = ids.front();
    }
    for (const auto& o : objs) objects.push_back({o.name, 0, 0});
}

void Engine::Impl::build_threads() {
    const auto& wl = cfg.workload;
    const auto& topo = cfg.topology;
    std::vector<std::shared_ptr<const ZipfTable>> zipf(wl.objects.size());
    for (const auto& g : wl.groups) {
        if (g.generator.pattern != AccessPattern::Zipf) continue;
        for (const auto& t : g.generator.targets) {
            if (zipf[t.object]) continue;
            const Bytes pages = (wl.objects[t.object].size_bytes + cfg.run.page_size - 1) / cfg.run.page_size;
            zipf[t.object] = std::make_shared<ZipfTable>(static_cast<std::size_t>(pages), g.generator.zipf_theta,
                                                         stream_seed(cfg.run.seed, 1'000'000 + t.object),
                                                         g.generator.hot_fraction);
        }
    }

    for (const auto& g : wl.groups) {
        const Agent agent = *topo.find_agent(g.agent);
        auto slot_it = std::find(agents.begin(), agents.end(), agent);
        const std::size_t slot = static_cast<std::size_t>(slot_it - agents.begin());
        if (slot_it == agents.end()) {
            agents.push_back(agent);
            plans.emplace_back(topo.nodes().size());
        }
        const std::size_t socket = socket_of(topo, agent);
        const auto local = topo.local_dram(socket);
        const bool is_gpu = agent.type == Agent::Type::Gpu;

        for (std::size_t i = 0; i < g.count; ++i) {
            const std::size_t id = threads.size();
            Generator gen(g.generator, wl.objects, cfg.run.page_size, i, g.count, zipf);
            SimThread th(id, slot, static_cast<std::uint32_t>(local ? *local : tiers.order.front()), std::move(gen),
                         Rng(stream_seed(cfg.run.seed, id)));
            th.dependent = g.generator.pattern == AccessPattern::PointerChase;
            th.window = th.dependent ? 1 : g.max_outstanding;
            th.delay = g.injection_delay;
            th.compute_gap = g.generator.compute_gap;
            th.overhead = is_gpu ? ns_to_ps(topo.gpus()[agent.index].agent_overhead_ns) : 0;
            th.request_bytes = th.generator.request_bytes();
            th.op_limit = g.generator.op_count;
            const IssueClass cls = issue_class(g.generator.pattern);
            for (const auto& node : topo.nodes()) {
                const auto cap = node.device.issue_cap(cls);
                th.pacing.push_back(!is_gpu && cap ? transfer_time(th.request_bytes, *cap) : 0);
            }
            // Spread independent threads of a group evenly over one issue gap.
            if (!th.dependent && g.count > 1)
                th.next_issue = g.injection_delay * static_cast<SimTime>(i) / static_cast<SimTime>(g.count);
            threads.push_back(std::move(th));
        }
    }
}

const TransferPlan& Engine::Impl::plan_for(std::size_t slot, std::size_t node) {
    auto& p = plans[slot][node];
    if (!p) p = read_plan(resolve_path(cfg.topology, agents[slot], node), cfg.topology);
    return *p;
}

void Engine::Impl::schedule_issue(SimThread& th) {
    if (th.issue_scheduled || th.done_issuing() || stopped) return;
    if (th.outstanding >= th.window) {
        th.blocked = true;
        return;
    }
    th.issue_scheduled = true;
    queue.push(std::max(th.next_issue, clock), {Event::Kind::Issue, static_cast<std::uint32_t>(th.id)});
}

void Engine::Impl::start_migration(PageId page, std::uint32_t dst, MigrationKind kind) {
    const SimTime done = migrate(table, fabric, cfg.topology, page, dst, clock, kind, stat);
    migration_bytes += 2 * table.page_size();
    queue.push(done, {Event::Kind::MigrationDone, page, dst});
}

void Engine::Impl::issue(SimThread& th) {
    const Access access = th.generator.next(th.rng);
    const PageId page = first_page[access.object] + static_cast<PageId>(access.offset / cfg.run.page_size);
    SimTime start = clock;

    if (auto fault = table.touch(page, th.accessor_node, clock)) {
        ++stat.numa_hint_faults;
        if (table.page(page).node == th.accessor_node) ++stat.numa_hint_faults_local;
        start += cfg.tiering.fault_delay;
        const FaultAction action = on_fault(cfg.tiering, *fault, table, tiers, t08, stat);
        if (action.type != FaultAction::Type::None) {
            const auto src = table.page(page).node;
            const bool faster = tiers.rank(action.dst) < tiers.rank(src);
            start_migration(page, action.dst,
                            action.type == FaultAction::Type::Promote || faster ? MigrationKind::Promotion
                                                                                : MigrationKind::Balance);
        }
    }

    const std::size_t node = table.page(page).node;
    const SimTime done = traverse(fabric, plan_for(th.agent_slot, node), th.request_bytes, start) + th.overhead;
    ++objects[access.object].access_count;
    objects[access.object].bytes += th.request_bytes;
    ++issued;
    ++th.issued;
    ++th.outstanding;
    queue.push(done, {Event::Kind::Complete, static_cast<std::uint32_t>(th.id), 0, clock});

    if (!th.dependent) {
        th.next_issue = start + std::max(th.delay, th.pacing[node]) + th.compute_gap;
        schedule_issue(th);
    } else {
        th.next_issue = start + th.pacing[node];
    }
}

void Engine::Impl::complete(SimThread& th, SimTime issued_at) {
    --th.outstanding;
    ++th.completed;
    ++completed;
    const SimTime lat = clock - issued_at;
    th.latency.record(lat);
    latency.record(lat);
    if (issued_at >= cfg.run.warmup) measured_latency.record(lat);
    if (clock >= cfg.run.warmup && clock <= end) measured_request_bytes += th.request_bytes;
    last_completion = std::max(last_completion, clock);

    if (th.dependent) {
        th.next_issue = std::max(clock + th.delay, th.next_issue) + th.compute_gap;
        schedule_issue(th);
    } else if (th.blocked) {
        th.blocked = false;
        schedule_issue(th);
    }
    if (th.finished()) --active_threads;
}

void Engine::Impl::step(const EventQueue<Event>::Entry& e) {
    clock = e.time;
    const Event& ev = e.payload;
    switch (ev.kind) {
        case Event::Kind::Issue: {
            SimThread& th = threads[ev.a];
            th.issue_scheduled = false;
            if (th.done_issuing()) return;
            if (th.outstanding >= th.window) {
                th.blocked = true;
                return;
            }
            issue(th);
            return;
        }
        case Event::Kind::Complete: complete(threads[ev.a], ev.issued); return;
        case Event::Kind::MigrationDone: table.finish_migration(ev.a, ev.b); return;
        case Event::Kind::Scan: {
            if (!periodic_active()) return;
            const bool slow_only = cfg.tiering.kind == TieringKind::Tiering08;
            const std::size_t top = tiers.top();
            scanner.scan(table, cfg.tiering.scanner.pages_per_scan,
                         slow_only ? std::function<bool(const Page&)>([top](const Page& p) { return p.node != top; })
                                   : std::function<bool(const Page&)>());
            queue.push(clock + cfg.tiering.scanner.scan_period, {Event::Kind::Scan});
            return;
        }
        case Event::Kind::Adjust:
            if (!periodic_active()) return;
            adjust_threshold(cfg.tiering.tiering08, t08, clock);
            queue.push(clock + cfg.tiering.tiering08.adjust_interval, {Event::Kind::Adjust});
            return;
        case Event::Kind::Demote: {
            if (!periodic_active()) return;
            const std::size_t top = tiers.top();
            for (PageId id : select_demotions(table, top, cfg.tiering.demotion)) {
                for (std::size_t r = 1; r < tiers.order.size(); ++r) {
                    const std::size_t dst = tiers.order[r];
                    if (table.node(dst).free_pages() == 0) continue;
                    start_migration(id, static_cast<std::uint32_t>(dst), MigrationKind::Demotion);
                    break;
                }
            }
            queue.push(clock + cfg.tiering.demotion.period, {Event::Kind::Demote});
            return;
        }
        case Event::Kind::Sample:
            if (!periodic_active()) return;
            timeline.push_back({clock, stat});
            queue.push(clock + cfg.run.sample_period, {Event::Kind::Sample});
            return;
    }
}

void Engine::Impl::run_until(SimTime t) {
    const SimTime limit = std::min(t, end);
    while (!queue.empty() && queue.top().time <= limit) step(queue.pop());
    if (end != kNever && t >= end) {
        clock = end;
        stopped = true;
    } else if (queue.empty()) {
        stopped = true;
    } else {
        clock = std::max(clock, std::min(t, queue.top().time));
    }
}

RunMetrics Engine::Impl::snapshot() const {
    RunMetrics m;
    m.run_id = cfg.run_id;
    m.policy = cfg.policy_label.empty()
                   ? describe(cfg.placement, cfg.topology) +
                         (cfg.tiering.kind == TieringKind::NoBalance ? "" : std::string("+") + to_string(cfg.tiering.kind))
                   : cfg.policy_label;
    m.workload = cfg.workload.name;
    m.threads = threads.size();
    m.seed = cfg.run.seed;
    m.config_digest = cfg.config_digest;

    const bool by_duration = end != kNever;
    m.simulated_runtime = by_duration ? std::min(clock, end) : (stopped ? last_completion : clock);
    m.measure_begin = std::min(cfg.run.warmup, m.simulated_runtime);
    m.measure_end = m.simulated_runtime;
    const SimTime interval = m.measure_end - m.measure_begin;

    m.latency = latency;
    m.measured_latency = measured_latency;
    for (const auto& th : threads) m.per_thread.push_back(th.latency);
    m.total_gbps = gbps_over(measured_request_bytes, interval);

    const auto& topo = cfg.topology;
    for (std::size_t i = 0; i < topo.nodes().size(); ++i) {
        const auto& s = fabric.device(i);
        m.devices.push_back({topo.node(i).node_id(), s.bytes_served, s.measured_bytes,
                             gbps_over(s.measured_bytes, interval),
                             interval > 0 ? static_cast<double>(s.measured_busy) / static_cast<double>(interval) : 0.0});
    }
    for (std::size_t i = 0; i < topo.links().size(); ++i)
        for (bool dir : {true, false}) {
            const auto& s = fabric.link(i, dir);
            m.links.push_back({topo.links()[i].link_id, dir, s.bytes_served, gbps_over(s.measured_bytes, interval),
                               interval > 0 ? static_cast<double>(s.measured_busy) / static_cast<double>(interval)
                                            : 0.0});
        }
    m.counters = stat;
    m.objects = objects;
    m.migration_bytes = migration_bytes;
    m.issued = issued;
    m.completed = completed;
    m.outstanding = issued - completed;
    m.timeline = timeline;
    return m;
}

// ---------------------------------------------------------------- public API

Engine::Engine(SimConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Engine::~Engine() = default;

void Engine::run_until(SimTime t) { impl_->run_until(t); }

RunMetrics Engine::run() {
    impl_->run_until(kNever);
    return impl_->snapshot();
}

SimTime Engine::now() const { return impl_->clock; }
bool Engine::finished() const { return impl_->stopped; }
RunMetrics Engine::snapshot() const { return impl_->snapshot(); }
const PageTable& Engine::pages() const { return impl_->table; }
const SimConfig& Engine::config() const { return impl_->cfg; }

RunMetrics run(const SimConfig& config) { return Engine(config).run(); }

std::vector<ObjectProfile> profile_objects(const SimConfig& config) {
    SimConfig p = config;
    p.placement = PlacementPolicy::preferred(allowed_tier_order(config, home_socket(config)));
    p.object_placement.clear();
    p.profiles.reset();
    p.tiering = TieringPolicy::defaults(TieringKind::NoBalance);
    const RunMetrics m = run(p);
    std::vector<ObjectProfile> out;
    for (std::size_t i = 0; i < config.workload.objects.size(); ++i) {
        const auto& o = config.workload.objects[i];
        out.push_back({o.name, o.size_bytes, m.objects[i].access_count, o.pattern});
    }
    return out;
}

}  // namespace tierlab
