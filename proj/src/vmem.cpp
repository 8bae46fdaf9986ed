#include "tierlab/vmem.hpp"

#include <numeric>
#include <string>

#include "tierlab/errors.hpp"

namespace tierlab {

void throw_out_of_memory(ObjectId object, std::size_t page_index) {
    throw OutOfMemory("out of memory allocating page " + std::to_string(page_index) + " of object " +
                      std::to_string(object) + ": all allowed nodes are full");
}

PageTable::PageTable(std::vector<NodeResidency> nodes, Bytes page_size, SimTime aging_window)
    : nodes_(std::move(nodes)), page_size_(page_size), aging_window_(aging_window) {}

PageId PageTable::create(ObjectId object, const PageDecision& d) {
    auto& node = nodes_.at(d.node);
    if (node.free_pages() == 0) throw_out_of_memory(object, pages_.size());
    ++node.used_pages;
    Page p;
    p.page_id = static_cast<PageId>(pages_.size());
    p.object_id = object;
    p.node = d.node;
    p.migratable = d.migratable;
    pages_.push_back(p);
    return p.page_id;
}

std::vector<PageId> PageTable::allocate(ObjectId object, const std::vector<PageDecision>& decisions) {
    std::vector<PageId> ids;
    ids.reserve(decisions.size());
    for (const auto& d : decisions) ids.push_back(create(object, d));
    return ids;
}

std::optional<HintFault> PageTable::touch(PageId id, std::uint32_t accessor_node, SimTime now) {
    Page& p = pages_.at(id);
    p.lru = (p.last_touch && now - *p.last_touch <= aging_window_) ? LruList::Active : LruList::Inactive;
    p.last_touch = now;
    if (!p.protected_) return std::nullopt;
    p.protected_ = false;
    p.prev_fault = p.last_fault;
    p.last_fault = now;
    ++p.fault_count;
    return HintFault{id, accessor_node, now};
}

bool PageTable::protect(PageId id) {
    Page& p = pages_.at(id);
    if (!p.migratable) return false;
    p.protected_ = true;
    return true;
}

void PageTable::begin_migration(PageId id, std::uint32_t dst) {
    Page& p = pages_.at(id);
    if (!p.migratable) throw NotMigratable("page " + std::to_string(id) + " is bound to its node");
    if (p.migrating) throw NotMigratable("page " + std::to_string(id) + " is already migrating");
    if (p.node == dst) throw DestinationFull("page " + std::to_string(id) + " already resides on the destination");
    auto& to = nodes_.at(dst);
    if (to.free_pages() == 0) throw DestinationFull("node " + std::to_string(dst) + " has no free page");
    ++to.used_pages;
    --nodes_.at(p.node).used_pages;
    p.migrating = true;
}

void PageTable::finish_migration(PageId id, std::uint32_t dst) {
    Page& p = pages_.at(id);
    p.node = dst;
    p.migrating = false;
}

std::size_t PageTable::total_used() const {
    return std::accumulate(nodes_.begin(), nodes_.end(), std::size_t{0},
                           [](std::size_t acc, const NodeResidency& n) { return acc + n.used_pages; });
}

SimTime migrate(PageTable& table, Fabric& fabric, const Topology& topology, PageId id, std::uint32_t dst,
                SimTime now, MigrationKind kind, VmStat& stat) {
    const std::uint32_t src = table.page(id).node;
    table.begin_migration(id, dst);
    const auto plan = migration_plan(resolve_transfer(topology, src, dst), topology);
    const SimTime done = traverse(fabric, plan, table.page_size(), now);
    ++stat.pgmigrate_success;
    if (kind == MigrationKind::Promotion) ++stat.pgpromote_success;
    if (kind == MigrationKind::Demotion) ++stat.pgdemote_kswapd;
    return done;
}

}  // namespace tierlab
