#pragma once

/// @file vmem.hpp
/// @brief Page-granular memory state: residency, capacity, migratability,
/// scan protection, hint-fault history and two-list LRU state.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tierlab/topology.hpp"
#include "tierlab/units.hpp"

namespace tierlab {

using PageId = std::uint32_t;
using ObjectId = std::uint32_t;

enum class LruList : std::uint8_t { Inactive, Active };

struct Page {
    PageId page_id = 0;
    ObjectId object_id = 0;
    std::uint32_t node = 0;
    bool migratable = true;
    bool protected_ = false;  ///< scanner-armed: next touch raises a hint fault
    bool migrating = false;   ///< a migration is in flight; accesses still go to `node`
    LruList lru = LruList::Inactive;
    std::optional<SimTime> last_fault;
    std::optional<SimTime> prev_fault;
    std::uint32_t fault_count = 0;
    std::optional<SimTime> last_touch;
};

struct NodeResidency {
    std::size_t capacity_pages = 0;
    std::size_t used_pages = 0;
    /// Free-page headroom the demotion daemon restores.
    std::size_t promote_watermark_pages = 0;
    /// Free pages that must remain after a promotion or migration into the node.
    std::size_t demote_watermark_pages = 0;

    std::size_t free_pages() const { return capacity_pages - used_pages; }
};

struct HintFault {
    PageId page = 0;
    std::uint32_t accessor_node = 0;
    SimTime now = 0;
};

/// Node chosen for one page; `migratable` is false for explicit bindings.
struct PageDecision {
    std::uint32_t node = 0;
    bool migratable = true;
};

class PageTable {
public:
    PageTable(std::vector<NodeResidency> nodes, Bytes page_size, SimTime aging_window);

    Bytes page_size() const { return page_size_; }
    SimTime aging_window() const { return aging_window_; }
    std::size_t page_count() const { return pages_.size(); }
    std::size_t node_count() const { return nodes_.size(); }

    const Page& page(PageId id) const { return pages_.at(id); }
    Page& page_mut(PageId id) { return pages_.at(id); }
    const NodeResidency& node(std::size_t i) const { return nodes_.at(i); }
    NodeResidency& node_mut(std::size_t i) { return nodes_.at(i); }

    /// Allocate one page per decision, in order. Each decision's node must have
    /// a free page; use `allocate_with_overflow` for fallback semantics.
    /// Throws OutOfMemory.
    std::vector<PageId> allocate(ObjectId object, const std::vector<PageDecision>& decisions);

    /// Allocate @p n_pages: page i goes to decide(i) if it has room, otherwise
    /// to the first node in @p overflow_order with room. Throws OutOfMemory.
    template <typename Decide>
    std::vector<PageId> allocate_with_overflow(ObjectId object, std::size_t n_pages, Decide&& decide,
                                               const std::vector<std::size_t>& overflow_order);

    /// Record an access. Returns a hint fault if the page was armed.
    std::optional<HintFault> touch(PageId id, std::uint32_t accessor_node, SimTime now);

    /// Arm a page for hint-fault sampling. Non-migratable pages are never armed.
    bool protect(PageId id);

    /// Move capacity to @p dst and mark the page in flight. Throws NotMigratable / DestinationFull.
    void begin_migration(PageId id, std::uint32_t dst);
    /// Switch residency to @p dst once the transfer lands.
    void finish_migration(PageId id, std::uint32_t dst);

    /// Σ used_pages over nodes.
    std::size_t total_used() const;

private:
    PageId create(ObjectId object, const PageDecision& d);

    std::vector<Page> pages_;
    std::vector<NodeResidency> nodes_;
    Bytes page_size_;
    SimTime aging_window_;
};

/// vmstat-style counters.
struct VmStat {
    std::uint64_t numa_hint_faults = 0;
    std::uint64_t numa_hint_faults_local = 0;
    std::uint64_t pgpromote_success = 0;
    std::uint64_t pgdemote_kswapd = 0;
    std::uint64_t pgmigrate_success = 0;
    std::uint64_t blocked_promotions = 0;
};

enum class MigrationKind { Promotion, Demotion, Balance };

/// Start moving @p id to @p dst at @p now: capacity moves immediately, the
/// page_size transfer is charged to the source device, connecting links and
/// destination device. Returns the completion time; call
/// `PageTable::finish_migration` then. Throws NotMigratable / DestinationFull.
SimTime migrate(PageTable& table, Fabric& fabric, const Topology& topology, PageId id, std::uint32_t dst,
                SimTime now, MigrationKind kind, VmStat& stat);

[[noreturn]] void throw_out_of_memory(ObjectId object, std::size_t page_index);

template <typename Decide>
std::vector<PageId> PageTable::allocate_with_overflow(ObjectId object, std::size_t n_pages, Decide&& decide,
                                                      const std::vector<std::size_t>& overflow_order) {
    std::vector<PageId> ids;
    ids.reserve(n_pages);
    for (std::size_t i = 0; i < n_pages; ++i) {
        PageDecision d = decide(i);
        if (nodes_.at(d.node).free_pages() == 0) {
            bool placed = false;
            for (auto n : overflow_order) {
                if (nodes_.at(n).free_pages() > 0) {
                    d.node = static_cast<std::uint32_t>(n);
                    placed = true;
                    break;
                }
            }
            if (!placed) throw_out_of_memory(object, i);
        }
        ids.push_back(create(object, d));
    }
    return ids;
}

}  // namespace tierlab
