#pragma once

/// @file workloads.hpp
/// @brief Access-pattern generators and canonical multi-object proxy workloads.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tierlab/pattern.hpp"
#include "tierlab/units.hpp"

namespace tierlab {

using Rng = std::mt19937_64;

/// Independent, reproducible seed for stream @p stream of run @p seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

struct ObjectSpec {
    std::string name;
    Bytes size_bytes = 0;
    AccessPattern pattern = AccessPattern::RandStream;
    double access_share = 1.0;
    SimTime compute_gap = 0;
};

struct TargetWeight {
    std::size_t object = 0;
    double weight = 1.0;
};

struct GeneratorSpec {
    AccessPattern pattern = AccessPattern::SeqStream;
    std::vector<TargetWeight> targets;
    std::uint64_t op_count = 0;  ///< 0: issue until the run's duration ends
    Bytes access_bytes = 64;
    SimTime compute_gap = 0;
    double zipf_theta = 0.99;
    double hot_fraction = 0.1;
};

struct ThreadGroup {
    std::string agent = "socket0";
    std::size_t count = 1;
    GeneratorSpec generator;
    std::size_t max_outstanding = 10;
    SimTime injection_delay = 0;
};

struct Workload {
    std::string name = "custom";
    std::vector<ObjectSpec> objects;
    std::vector<ThreadGroup> groups;

    Bytes footprint() const;
    std::size_t thread_count() const;
    std::optional<std::size_t> find_object(const std::string& name) const;
    /// Throws ConfigError.
    void validate() const;
};

struct Access {
    std::size_t object = 0;
    Bytes offset = 0;  ///< byte offset inside the object
    bool dependent = false;
};

/// Rank-Zipf law over the pages of one object. Ranks map to pages through a
/// seeded permutation so hot pages are scattered across the object.
///
/// The hot set is the top `hot_fraction` of ranks; those keep their Zipf
/// probabilities and the remaining mass is spread evenly over the cold
/// pages. `hot_fraction` 1 is the plain Zipf law.
class ZipfTable {
public:
    ZipfTable(std::size_t pages, double theta, std::uint64_t seed, double hot_fraction = 1.0);

    std::size_t pages() const { return cdf_.size(); }
    /// Page holding rank @p rank (rank 0 is the hottest).
    std::size_t page_of_rank(std::size_t rank) const { return permutation_[rank]; }
    std::size_t sample_rank(Rng& rng) const;
    std::size_t hot_pages() const { return hot_; }
    /// Probability mass of ranks [0, k).
    double mass_of_top(std::size_t k) const;

private:
    std::vector<double> cdf_;
    std::vector<std::size_t> permutation_;
    std::size_t hot_ = 1;
};

/// Per-thread access generator. A pure function of its state and the RNG
/// passed to `next`: replaying with the same seed reproduces the sequence.
class Generator {
public:
    /// @p zipf holds one table per object (null for non-Zipf objects).
    Generator(const GeneratorSpec& spec, const std::vector<ObjectSpec>& objects, Bytes page_size,
              std::size_t index_in_group, std::size_t group_size,
              std::vector<std::shared_ptr<const ZipfTable>> zipf = {});

    Access next(Rng& rng);
    const GeneratorSpec& spec() const { return spec_; }

    /// Bytes a request of this generator moves (GUPS reads and writes back).
    Bytes request_bytes() const {
        return spec_.pattern == AccessPattern::Gups ? 2 * spec_.access_bytes : spec_.access_bytes;
    }

private:
    struct Cursor {
        Bytes begin = 0;
        Bytes length = 0;
        Bytes pos = 0;
    };

    std::size_t pick_target(Rng& rng) const;

    GeneratorSpec spec_;
    std::vector<Bytes> sizes_;
    Bytes page_size_;
    std::vector<Cursor> cursors_;
    std::vector<double> cumulative_weights_;
    std::vector<std::shared_ptr<const ZipfTable>> zipf_;
};

enum class ProxyKind { BandwidthBound, LatencyBound, MixedTwoObject, HotColdSkew };

const char* to_string(ProxyKind kind);
std::optional<ProxyKind> parse_proxy_kind(const std::string& text);

struct ProxyParams {
    std::string agent = "socket0";
    std::optional<Bytes> footprint_bytes;  ///< default per kind
    std::optional<std::size_t> threads;    ///< default per kind
    std::optional<std::uint64_t> ops;      ///< default per kind
};

/// Canonical proxy configurations:
///
/// - BANDWIDTH_BOUND: 256 MiB sequential stream, 16 threads, 4 KiB chunks, run by duration.
/// - LATENCY_BOUND: 64 MiB pointer chase, 1 thread, 20000 dependent 64 B loads.
/// - MIXED_TWO_OBJECT: a streaming object (95% of footprint, 80% of accesses,
///   4 threads) and a pointer-chase object (5%, 20%, 1 thread); 64 MiB, 100000 accesses.
/// - HOT_COLD_SKEW: 32 MiB Zipf(0.99, 0.1) object, 4 threads, 1 µs compute gap, run by duration.
Workload build_proxy(ProxyKind kind, const ProxyParams& params = {});

}  // namespace tierlab
