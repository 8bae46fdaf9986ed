#include "tierlab/placement.hpp"

#include <algorithm>

#include "tierlab/errors.hpp"

namespace tierlab {

const char* to_string(AccessPattern p) {
    switch (p) {
        case AccessPattern::PointerChase: return "pointer_chase";
        case AccessPattern::SeqStream: return "seq_stream";
        case AccessPattern::RandStream: return "rand_stream";
        case AccessPattern::Gups: return "gups";
        case AccessPattern::Zipf: return "zipf";
    }
    return "?";
}

std::optional<AccessPattern> parse_access_pattern(const std::string& text) {
    if (text == "pointer_chase" || text == "POINTER_CHASE") return AccessPattern::PointerChase;
    if (text == "seq_stream" || text == "SEQ_STREAM") return AccessPattern::SeqStream;
    if (text == "rand_stream" || text == "RAND_STREAM" || text == "rand" || text == "RAND")
        return AccessPattern::RandStream;
    if (text == "gups" || text == "GUPS") return AccessPattern::Gups;
    if (text == "zipf" || text == "ZIPF") return AccessPattern::Zipf;
    return std::nullopt;
}

const char* to_string(PlacementKind kind) {
    switch (kind) {
        case PlacementKind::FirstTouch: return "first_touch";
        case PlacementKind::Preferred: return "preferred";
        case PlacementKind::UniformInterleave: return "interleave";
        case PlacementKind::ObjectLevel: return "oli";
    }
    return "?";
}

PlacementPolicy PlacementPolicy::first_touch() { return {}; }

PlacementPolicy PlacementPolicy::preferred(std::vector<std::size_t> order) {
    PlacementPolicy p;
    p.kind = PlacementKind::Preferred;
    p.node_order = std::move(order);
    return p;
}

PlacementPolicy PlacementPolicy::interleave(std::vector<std::size_t> nodes) {
    PlacementPolicy p;
    p.kind = PlacementKind::UniformInterleave;
    p.node_set = std::move(nodes);
    p.explicit_binding = true;
    return p;
}

PlacementPolicy PlacementPolicy::bind(std::vector<std::size_t> nodes) {
    PlacementPolicy p;
    p.kind = PlacementKind::Preferred;
    p.node_order = nodes;
    p.node_set = std::move(nodes);
    p.explicit_binding = true;
    return p;
}

PlacementPolicy PlacementPolicy::object_level(std::vector<std::size_t> nodes, double footprint_share_min,
                                              double access_share_min) {
    PlacementPolicy p;
    p.kind = PlacementKind::ObjectLevel;
    p.node_set = std::move(nodes);
    p.footprint_share_min = footprint_share_min;
    p.access_share_min = access_share_min;
    p.explicit_binding = true;
    return p;
}

void PlacementPolicy::validate() const {
    switch (kind) {
        case PlacementKind::FirstTouch: break;
        case PlacementKind::Preferred:
            if (node_order.empty()) throw ConfigError("placement.nodes", "preferred policy needs a node order");
            break;
        case PlacementKind::UniformInterleave:
            if (node_set.empty()) throw ConfigError("placement.nodes", "interleave policy needs a node set");
            break;
        case PlacementKind::ObjectLevel:
            if (node_set.empty()) throw ConfigError("placement.nodes", "object-level policy needs a node set");
            if (!(footprint_share_min > 0.0 && footprint_share_min < 1.0))
                throw ConfigError("placement.footprint_share_min", "must be in (0, 1)");
            if (!(access_share_min > 0.0 && access_share_min < 1.0))
                throw ConfigError("placement.access_share_min", "must be in (0, 1)");
            break;
    }
}

std::size_t decide_placement(const PlacementPolicy& policy, std::size_t page_index, const PlacementContext& ctx,
                             const PageTable& table) {
    switch (policy.kind) {
        case PlacementKind::FirstTouch: return ctx.local_node;
        case PlacementKind::Preferred:
            for (auto n : policy.node_order)
                if (table.node(n).free_pages() > 0) return n;
            return policy.node_order.front();
        case PlacementKind::UniformInterleave:
        case PlacementKind::ObjectLevel:
            return policy.node_set[page_index % policy.node_set.size()];
    }
    return ctx.local_node;
}

std::set<std::string> oli_select(const std::vector<ObjectProfile>& profiles, double footprint_share_min,
                                 double access_share_min) {
    double footprint = 0.0, accesses = 0.0;
    for (const auto& p : profiles) {
        footprint += static_cast<double>(p.footprint_bytes);
        accesses += static_cast<double>(p.access_count);
    }
    std::set<std::string> selected;
    if (footprint <= 0.0 || accesses <= 0.0) return selected;
    for (const auto& p : profiles) {
        if (static_cast<double>(p.footprint_bytes) / footprint >= footprint_share_min &&
            static_cast<double>(p.access_count) / accesses >= access_share_min)
            selected.insert(p.object_id);
    }
    return selected;
}

std::vector<PlacementPolicy> oli_place(const std::set<std::string>& selected, const PlacementPolicy& oli,
                                       const std::vector<ObjectProfile>& objects,
                                       const std::vector<std::size_t>& preferred_order) {
    std::vector<PlacementPolicy> out;
    out.reserve(objects.size());
    for (const auto& obj : objects) {
        if (selected.count(obj.object_id))
            out.push_back(PlacementPolicy::interleave(oli.node_set));
        else
            out.push_back(PlacementPolicy::preferred(preferred_order));
    }
    return out;
}

std::vector<std::size_t> oli_allocation_order(const std::vector<PlacementPolicy>& per_object) {
    std::vector<std::size_t> order(per_object.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_partition(order.begin(), order.end(),
                          [&](std::size_t i) { return !per_object[i].explicit_binding; });
    return order;
}

std::vector<PageId> allocate_object(PageTable& table, ObjectId object, std::size_t n_pages,
                                    const PlacementPolicy& policy, const PlacementContext& ctx) {
    std::vector<std::size_t> overflow;
    if (policy.explicit_binding) {
        for (auto n : ctx.distance_order)
            if (std::find(policy.node_set.begin(), policy.node_set.end(), n) != policy.node_set.end())
                overflow.push_back(n);
        for (auto n : policy.node_set)
            if (std::find(overflow.begin(), overflow.end(), n) == overflow.end()) overflow.push_back(n);
    } else {
        overflow = policy.node_order;
        for (auto n : ctx.distance_order)
            if (std::find(overflow.begin(), overflow.end(), n) == overflow.end()) overflow.push_back(n);
    }
    const bool migratable = !policy.explicit_binding;
    return table.allocate_with_overflow(
        object, n_pages,
        [&](std::size_t i) {
            return PageDecision{static_cast<std::uint32_t>(decide_placement(policy, i, ctx, table)), migratable};
        },
        overflow);
}

}  // namespace tierlab
