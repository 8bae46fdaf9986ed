#pragma once

/// @file placement.hpp
/// @brief Static page placement: first-touch, preferred, uniform interleave
/// and data object-level interleaving (OLI).
///
/// OLI interleaves only objects that are both large (footprint share) and
/// access-intensive (access share); every other object is allocated with the
/// preferred policy, fast node first.

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "tierlab/pattern.hpp"
#include "tierlab/units.hpp"
#include "tierlab/vmem.hpp"

namespace tierlab {

struct ObjectProfile {
    std::string object_id;
    Bytes footprint_bytes = 0;
    std::uint64_t access_count = 0;
    AccessPattern pattern = AccessPattern::RandStream;
};

enum class PlacementKind { FirstTouch, Preferred, UniformInterleave, ObjectLevel };

const char* to_string(PlacementKind kind);

struct PlacementPolicy {
    PlacementKind kind = PlacementKind::FirstTouch;
    std::vector<std::size_t> node_order;  ///< PREFERRED
    std::vector<std::size_t> node_set;    ///< UNIFORM_INTERLEAVE / OBJECT_LEVEL
    double footprint_share_min = 0.10;
    double access_share_min = 0.10;
    bool explicit_binding = false;

    static PlacementPolicy first_touch();
    static PlacementPolicy preferred(std::vector<std::size_t> order);
    static PlacementPolicy interleave(std::vector<std::size_t> nodes);
    /// Fill @p nodes in order and never leave them (membind).
    static PlacementPolicy bind(std::vector<std::size_t> nodes);
    static PlacementPolicy object_level(std::vector<std::size_t> nodes, double footprint_share_min = 0.10,
                                        double access_share_min = 0.10);

    /// Throws ConfigError.
    void validate() const;
};

/// Where the allocating thread runs.
struct PlacementContext {
    std::size_t local_node = 0;                 ///< accessor socket's local DRAM
    std::vector<std::size_t> distance_order;    ///< allowed nodes, nearest first
};

/// Node for page @p page_index of an object under @p policy. Deterministic.
/// PREFERRED skips full nodes; other kinds ignore occupancy (overflow is
/// applied by `allocate_object`).
std::size_t decide_placement(const PlacementPolicy& policy, std::size_t page_index, const PlacementContext& ctx,
                             const PageTable& table);

/// Objects whose footprint share and access share both meet the thresholds.
std::set<std::string> oli_select(const std::vector<ObjectProfile>& profiles, double footprint_share_min,
                                 double access_share_min);

/// Per-object policies: selected objects are interleaved over the OLI node
/// set with explicit binding; the rest are PREFERRED with @p preferred_order.
std::vector<PlacementPolicy> oli_place(const std::set<std::string>& selected, const PlacementPolicy& oli,
                                       const std::vector<ObjectProfile>& objects,
                                       const std::vector<std::size_t>& preferred_order);

/// Allocation order for per-object policies: objects without explicit binding
/// first, interleaved ones after, each group in declaration order.
std::vector<std::size_t> oli_allocation_order(const std::vector<PlacementPolicy>& per_object);

/// Allocate @p n_pages for @p object under a non-OLI @p policy. Explicitly
/// bound policies overflow only within their node set; others overflow in
/// distance order. Throws OutOfMemory.
std::vector<PageId> allocate_object(PageTable& table, ObjectId object, std::size_t n_pages,
                                    const PlacementPolicy& policy, const PlacementContext& ctx);

}  // namespace tierlab
