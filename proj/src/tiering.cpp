#include "tierlab/tiering.hpp"

#include <algorithm>

#include "tierlab/errors.hpp"

namespace tierlab {

const char* to_string(TieringKind kind) {
    switch (kind) {
        case TieringKind::NoBalance: return "no_balance";
        case TieringKind::AutoNuma: return "autonuma";
        case TieringKind::Tiering08: return "tiering08";
        case TieringKind::Tpp: return "tpp";
    }
    return "?";
}

std::optional<TieringKind> parse_tiering_kind(const std::string& text) {
    if (text == "no_balance" || text == "NO_BALANCE" || text == "none") return TieringKind::NoBalance;
    if (text == "autonuma" || text == "AUTONUMA") return TieringKind::AutoNuma;
    if (text == "tiering08" || text == "TIERING_08" || text == "tiering-0.8") return TieringKind::Tiering08;
    if (text == "tpp" || text == "TPP") return TieringKind::Tpp;
    return std::nullopt;
}

TieringPolicy TieringPolicy::defaults(TieringKind kind) {
    TieringPolicy p;
    p.kind = kind;
    if (kind == TieringKind::Tpp) p.scanner.pages_per_scan = 4096;
    return p;
}

void TieringPolicy::validate() const {
    if (scanner.scan_period <= 0) throw ConfigError("tiering.scan_period_ns", "must be > 0");
    if (scanner.pages_per_scan < 1) throw ConfigError("tiering.pages_per_scan", "must be >= 1");
    if (kind == TieringKind::Tiering08) {
        if (!(tiering08.promotion_budget_bytes_per_s > 0.0))
            throw ConfigError("tiering.tiering08.promotion_budget_bytes_per_s", "must be > 0");
        if (tiering08.adjust_interval <= 0)
            throw ConfigError("tiering.tiering08.adjust_interval_ns", "must be > 0");
        if (tiering08.min_threshold <= 0 || tiering08.min_threshold > tiering08.max_threshold)
            throw ConfigError("tiering.tiering08.min_threshold_ns", "must be in (0, max_threshold_ns]");
    }
    if (demotion.period <= 0) throw ConfigError("tiering.demotion.period_ns", "must be > 0");
    if (fault_delay < 0) throw ConfigError("tiering.fault_delay_ns", "must be >= 0");
}

std::size_t Scanner::scan(PageTable& table, std::size_t pages_per_scan,
                          const std::function<bool(const Page&)>& eligible) {
    const std::size_t n = table.page_count();
    if (n == 0) return 0;
    std::size_t armed = 0;
    for (std::size_t visited = 0; visited < n && armed < pages_per_scan; ++visited) {
        const auto id = static_cast<PageId>(cursor_);
        cursor_ = (cursor_ + 1) % n;
        const Page& p = table.page(id);
        if (!p.migratable || p.migrating) continue;
        if (eligible && !eligible(p)) continue;
        if (table.protect(id)) ++armed;
    }
    return armed;
}

std::size_t scan(Scanner& scanner, PageTable& table, const ScannerConfig& config,
                 const std::function<bool(const Page&)>& eligible) {
    return scanner.scan(table, config.pages_per_scan, eligible);
}

std::size_t TierView::rank(std::size_t node) const {
    auto it = std::find(order.begin(), order.end(), node);
    return it == order.end() ? order.size() : static_cast<std::size_t>(it - order.begin());
}

namespace {

bool has_room(const PageTable& table, std::size_t node) {
    const auto& n = table.node(node);
    return n.free_pages() > n.demote_watermark_pages;
}

FaultAction promote_if_room(const PageTable& table, std::size_t dst, VmStat& stat, FaultAction::Type type) {
    if (!has_room(table, dst)) {
        ++stat.blocked_promotions;
        return FaultAction::none();
    }
    return {type, static_cast<std::uint32_t>(dst)};
}

}  // namespace

FaultAction on_fault(const TieringPolicy& policy, const HintFault& fault, const PageTable& table,
                     const TierView& tiers, Tiering08State& t08, VmStat& stat) {
    const Page& page = table.page(fault.page);
    if (page.migrating || !page.migratable || tiers.order.empty()) return FaultAction::none();
    const std::size_t top = tiers.top();

    switch (policy.kind) {
        case TieringKind::NoBalance: return FaultAction::none();

        case TieringKind::AutoNuma:
            if (page.node == top) return FaultAction::none();
            return promote_if_room(table, top, stat, FaultAction::Type::Migrate);

        case TieringKind::Tiering08: {
            if (page.node == top || !page.prev_fault || !page.last_fault) return FaultAction::none();
            const SimTime refault = *page.last_fault - *page.prev_fault;
            if (refault >= t08.hot_threshold) return FaultAction::none();
            const auto& cfg = policy.tiering08;
            const double window_budget =
                cfg.promotion_budget_bytes_per_s * static_cast<double>(cfg.adjust_interval) / 1e12;
            if (cfg.rate_limit &&
                static_cast<double>(t08.window_promoted_bytes + table.page_size()) > window_budget) {
                ++stat.blocked_promotions;
                return FaultAction::none();
            }
            auto action = promote_if_room(table, top, stat, FaultAction::Type::Promote);
            if (action.type == FaultAction::Type::Promote) t08.window_promoted_bytes += table.page_size();
            return action;
        }

        case TieringKind::Tpp:
            if (page.node == top) return FaultAction::none();
            if (policy.tpp_require_active_lru && page.lru != LruList::Active) return FaultAction::none();
            return promote_if_room(table, top, stat, FaultAction::Type::Promote);
    }
    return FaultAction::none();
}

SimTime adjust_threshold(const Tiering08Config& config, SimTime current, Bytes window_promoted_bytes,
                         SimTime window_length) {
    if (window_length <= 0) return current;
    const double rate = static_cast<double>(window_promoted_bytes) * 1e12 / static_cast<double>(window_length);
    const double budget = config.promotion_budget_bytes_per_s;
    if (rate > budget) return std::max(current / 2, config.min_threshold);
    if (rate < budget / 2) return std::min(current * 2, config.max_threshold);
    return current;
}

SimTime adjust_threshold(const Tiering08Config& config, Tiering08State& state, SimTime now) {
    state.hot_threshold =
        adjust_threshold(config, state.hot_threshold, state.window_promoted_bytes, now - state.window_start);
    state.window_start = now;
    state.window_promoted_bytes = 0;
    return state.hot_threshold;
}

std::vector<PageId> select_demotions(const PageTable& table, std::size_t top, const DemotionConfig& config) {
    const auto free = table.node(top).free_pages();
    if (free >= config.headroom_pages) return {};
    const std::size_t want = std::min(config.batch_pages, config.headroom_pages - free);

    std::vector<PageId> candidates;
    for (std::size_t i = 0; i < table.page_count(); ++i) {
        const Page& p = table.page(static_cast<PageId>(i));
        if (p.node == top && p.migratable && !p.migrating) candidates.push_back(p.page_id);
    }
    auto key = [&](PageId id) {
        const auto& t = table.page(id).last_touch;
        return std::pair<SimTime, PageId>{t ? *t : -1, id};
    };
    const std::size_t n = std::min(want, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(),
                      [&](PageId a, PageId b) { return key(a) < key(b); });
    candidates.resize(n);
    return candidates;
}

}  // namespace tierlab
