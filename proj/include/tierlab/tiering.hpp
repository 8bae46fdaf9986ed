#pragma once

/// @file tiering.hpp
/// @brief Hint-fault driven page migration policies.
///
/// A scanner periodically arms migratable pages; the next touch of an armed
/// page raises a hint fault which the policy turns into an action:
///
/// | policy     | promotes when                                          |
/// |------------|--------------------------------------------------------|
/// | AUTONUMA   | page is not on the accessor's nearest node              |
/// | TIERING_08 | page is on a slow tier and its re-fault interval is     |
/// |            | below an adaptive hot threshold                         |
/// | TPP        | page is on a slow tier and on the active LRU list       |
/// | NO_BALANCE | never (and nothing is scanned)                          |
///
/// TIERING_08 and TPP also run a demotion daemon that keeps free headroom on
/// the top tier by demoting the least recently touched pages.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tierlab/units.hpp"
#include "tierlab/vmem.hpp"

namespace tierlab {

enum class TieringKind { NoBalance, AutoNuma, Tiering08, Tpp };

const char* to_string(TieringKind kind);
std::optional<TieringKind> parse_tiering_kind(const std::string& text);

struct ScannerConfig {
    bool enabled = true;
    SimTime scan_period = 10 * 1'000'000'000LL;  // 10 ms
    std::size_t pages_per_scan = 1024;
};

struct Tiering08Config {
    SimTime hot_threshold = 1'000'000'000'000LL;  // initial, 1 s
    SimTime min_threshold = 1'000'000'000LL;      // 1 ms
    SimTime max_threshold = 1'000'000'000'000LL;  // 1 s
    double promotion_budget_bytes_per_s = 64.0 * 1024 * 1024;
    SimTime adjust_interval = 20 * 1'000'000'000LL;  // 20 ms
    bool rate_limit = true;
};

struct DemotionConfig {
    std::size_t headroom_pages = 64;
    std::size_t batch_pages = 32;
    SimTime period = 1'000'000'000LL;  // 1 ms
};

struct TieringPolicy {
    TieringKind kind = TieringKind::NoBalance;
    ScannerConfig scanner;
    Tiering08Config tiering08;
    bool tpp_require_active_lru = true;
    DemotionConfig demotion;
    SimTime fault_delay = 1'000'000;  // 1 µs charged to the faulting thread

    /// Defaults for @p kind. TPP scans four times as many pages per pass.
    static TieringPolicy defaults(TieringKind kind);

    bool scans() const { return kind != TieringKind::NoBalance && scanner.enabled; }
    bool demotes() const { return kind == TieringKind::Tiering08 || kind == TieringKind::Tpp; }

    /// Throws ConfigError.
    void validate() const;
};

/// Round-robin arming cursor over the page id space.
class Scanner {
public:
    /// Arm up to @p pages_per_scan migratable pages that pass @p eligible.
    /// Stops after one full lap. Returns the number armed.
    std::size_t scan(PageTable& table, std::size_t pages_per_scan,
                     const std::function<bool(const Page&)>& eligible = {});
    std::size_t cursor() const { return cursor_; }

private:
    std::size_t cursor_ = 0;
};

/// scan() with the policy's chunk size.
std::size_t scan(Scanner& scanner, PageTable& table, const ScannerConfig& config,
                 const std::function<bool(const Page&)>& eligible = {});

/// Memory tiers as seen by one socket.
struct TierView {
    std::vector<std::size_t> order;  ///< allowed nodes, fastest first
    std::size_t top() const { return order.front(); }
    /// Position of @p node in `order`; nodes outside the view rank last.
    std::size_t rank(std::size_t node) const;
};

struct FaultAction {
    enum class Type { None, Promote, Migrate };
    Type type = Type::None;
    std::uint32_t dst = 0;

    static FaultAction none() { return {}; }
    friend bool operator==(const FaultAction&, const FaultAction&) = default;
};

struct Tiering08State {
    SimTime hot_threshold = 0;
    SimTime window_start = 0;
    Bytes window_promoted_bytes = 0;
};

/// Decide what to do with @p fault. Blocked promotions (destination at its
/// watermark, or over the Tiering-0.8 budget) return None and bump
/// `stat.blocked_promotions`.
FaultAction on_fault(const TieringPolicy& policy, const HintFault& fault, const PageTable& table,
                     const TierView& tiers, Tiering08State& t08, VmStat& stat);

/// Multiplicative threshold rule over one window: halve (down to the minimum)
/// when promotion traffic exceeds the budget, double (up to the maximum) when
/// it is under half the budget, otherwise keep.
SimTime adjust_threshold(const Tiering08Config& config, SimTime current, Bytes window_promoted_bytes,
                         SimTime window_length);

/// Apply `adjust_threshold` for the window ending at @p now and open a new window.
SimTime adjust_threshold(const Tiering08Config& config, Tiering08State& state, SimTime now);

/// Pages to demote from @p top so its free pages reach `headroom_pages`:
/// up to `batch_pages` of its least recently touched migratable pages
/// (never-touched first, ties by page id).
std::vector<PageId> select_demotions(const PageTable& table, std::size_t top, const DemotionConfig& config);

}  // namespace tierlab
