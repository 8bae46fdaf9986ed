#include "tierlab/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tierlab/errors.hpp"

namespace tierlab {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Bytes Workload::footprint() const {
    return std::accumulate(objects.begin(), objects.end(), Bytes{0},
                           [](Bytes acc, const ObjectSpec& o) { return acc + o.size_bytes; });
}

std::size_t Workload::thread_count() const {
    return std::accumulate(groups.begin(), groups.end(), std::size_t{0},
                           [](std::size_t acc, const ThreadGroup& g) { return acc + g.count; });
}

std::optional<std::size_t> Workload::find_object(const std::string& object_name) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
        if (objects[i].name == object_name) return i;
    return std::nullopt;
}

void Workload::validate() const {
    if (objects.empty()) throw ConfigError("workload.objects", "at least one object is required");
    double share = 0.0;
    for (const auto& o : objects) {
        const std::string at = "workload.objects." + o.name;
        if (o.name.empty()) throw ConfigError("workload.objects", "object name must be non-empty");
        if (o.size_bytes == 0) throw ConfigError(at + ".size_bytes", "must be > 0");
        if (o.access_share < 0.0) throw ConfigError(at + ".access_share", "must be >= 0");
        share += o.access_share;
    }
    if (std::abs(share - 1.0) > 1e-6) throw ConfigError("workload.objects", "access_share values must sum to 1");
    if (groups.empty()) throw ConfigError("workload.threads", "at least one thread group is required");
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        const std::string at = "workload.threads." + std::to_string(gi);
        if (g.count == 0) throw ConfigError(at + ".count", "must be >= 1");
        if (g.max_outstanding < 1) throw ConfigError(at + ".max_outstanding", "must be >= 1");
        if (g.injection_delay < 0) throw ConfigError(at + ".injection_delay_ns", "must be >= 0");
        const auto& gen = g.generator;
        if (gen.targets.empty()) throw ConfigError(at + ".targets", "at least one target object is required");
        if (gen.access_bytes == 0) throw ConfigError(at + ".access_bytes", "must be > 0");
        double w = 0.0;
        for (const auto& t : gen.targets) {
            if (t.object >= objects.size()) throw ConfigError(at + ".targets", "unknown object");
            if (t.weight <= 0.0) throw ConfigError(at + ".targets", "weights must be > 0");
            if (objects[t.object].size_bytes < gen.access_bytes)
                throw ConfigError(at + ".access_bytes", "larger than target object");
            w += t.weight;
        }
        if (std::abs(w - 1.0) > 1e-6) throw ConfigError(at + ".targets", "weights must sum to 1");
        if (gen.pattern == AccessPattern::Zipf) {
            if (!(gen.zipf_theta > 0.0)) throw ConfigError(at + ".zipf_theta", "must be > 0");
            if (!(gen.hot_fraction > 0.0 && gen.hot_fraction <= 1.0))
                throw ConfigError(at + ".hot_fraction", "must be in (0, 1]");
        }
    }
}

ZipfTable::ZipfTable(std::size_t pages, double theta, std::uint64_t seed, double hot_fraction)
    : cdf_(pages), permutation_(pages) {
    double total = 0.0;
    for (std::size_t k = 0; k < pages; ++k) {
        total += 1.0 / std::pow(static_cast<double>(k + 1), theta);
        cdf_[k] = total;
    }
    for (auto& c : cdf_) c /= total;
    if (!cdf_.empty()) cdf_.back() = 1.0;
    hot_ = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(hot_fraction * static_cast<double>(pages))), 1,
                                   std::max<std::size_t>(pages, 1));
    std::iota(permutation_.begin(), permutation_.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(permutation_.begin(), permutation_.end(), rng);
}

std::size_t ZipfTable::sample_rank(Rng& rng) const {
    const double u = std::generate_canonical<double, 53>(rng);
    const double hot_mass = cdf_[hot_ - 1];
    if (u < hot_mass || hot_ == cdf_.size()) {
        const auto it = std::upper_bound(cdf_.begin(), cdf_.begin() + static_cast<std::ptrdiff_t>(hot_), u);
        return std::min(static_cast<std::size_t>(it - cdf_.begin()), hot_ - 1);
    }
    // Cold ranks share the remaining mass uniformly.
    const std::size_t cold = cdf_.size() - hot_;
    const auto k = static_cast<std::size_t>((u - hot_mass) / (1.0 - hot_mass) * static_cast<double>(cold));
    return hot_ + std::min(k, cold - 1);
}

double ZipfTable::mass_of_top(std::size_t k) const {
    if (k == 0 || cdf_.empty()) return 0.0;
    k = std::min(k, cdf_.size());
    if (k <= hot_) return cdf_[k - 1];
    const double hot_mass = cdf_[hot_ - 1];
    return hot_mass + (1.0 - hot_mass) * static_cast<double>(k - hot_) / static_cast<double>(cdf_.size() - hot_);
}

Generator::Generator(const GeneratorSpec& spec, const std::vector<ObjectSpec>& objects, Bytes page_size,
                     std::size_t index_in_group, std::size_t group_size,
                     std::vector<std::shared_ptr<const ZipfTable>> zipf)
    : spec_(spec), page_size_(page_size), zipf_(std::move(zipf)) {
    for (const auto& o : objects) sizes_.push_back(o.size_bytes);
    zipf_.resize(objects.size());
    double acc = 0.0;
    for (const auto& t : spec_.targets) {
        acc += t.weight;
        cumulative_weights_.push_back(acc);
        // Each thread of a group streams its own contiguous slice of the object.
        const Bytes size = sizes_.at(t.object);
        const Bytes lines = size / spec_.access_bytes;
        const Bytes first = lines * index_in_group / group_size;
        const Bytes last = std::max(first + 1, lines * (index_in_group + 1) / group_size);
        cursors_.push_back({first * spec_.access_bytes, (last - first) * spec_.access_bytes, 0});
    }
}

std::size_t Generator::pick_target(Rng& rng) const {
    if (cumulative_weights_.size() == 1) return 0;
    const double u = std::generate_canonical<double, 53>(rng) * cumulative_weights_.back();
    const auto it = std::upper_bound(cumulative_weights_.begin(), cumulative_weights_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_weights_.begin()), cumulative_weights_.size() - 1);
}

Access Generator::next(Rng& rng) {
    const std::size_t t = pick_target(rng);
    const std::size_t object = spec_.targets[t].object;
    const Bytes size = sizes_[object];
    const Bytes lines = size / spec_.access_bytes;
    auto random_line = [&](Bytes n) { return std::uniform_int_distribution<Bytes>(0, n - 1)(rng); };

    switch (spec_.pattern) {
        case AccessPattern::SeqStream: {
            Cursor& c = cursors_[t];
            const Bytes offset = c.begin + c.pos;
            c.pos += spec_.access_bytes;
            if (c.pos >= c.length) c.pos = 0;
            return {object, offset, false};
        }
        case AccessPattern::PointerChase:
            return {object, random_line(lines) * spec_.access_bytes, true};
        case AccessPattern::RandStream:
        case AccessPattern::Gups:
            return {object, random_line(lines) * spec_.access_bytes, false};
        case AccessPattern::Zipf: {
            const auto& table = zipf_[object];
            if (!table) return {object, random_line(lines) * spec_.access_bytes, false};
            const std::size_t page = table->page_of_rank(table->sample_rank(rng));
            const Bytes lines_per_page = std::max<Bytes>(1, page_size_ / spec_.access_bytes);
            Bytes offset = page * page_size_ + random_line(lines_per_page) * spec_.access_bytes;
            if (offset + spec_.access_bytes > size) offset = (lines - 1) * spec_.access_bytes;
            return {object, offset, false};
        }
    }
    return {object, 0, false};
}

const char* to_string(ProxyKind kind) {
    switch (kind) {
        case ProxyKind::BandwidthBound: return "bandwidth_bound";
        case ProxyKind::LatencyBound: return "latency_bound";
        case ProxyKind::MixedTwoObject: return "mixed_two_object";
        case ProxyKind::HotColdSkew: return "hot_cold_skew";
    }
    return "?";
}

std::optional<ProxyKind> parse_proxy_kind(const std::string& text) {
    for (auto k : {ProxyKind::BandwidthBound, ProxyKind::LatencyBound, ProxyKind::MixedTwoObject,
                   ProxyKind::HotColdSkew}) {
        std::string upper = to_string(k);
        std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
        if (text == to_string(k) || text == upper) return k;
    }
    return std::nullopt;
}

namespace {

constexpr Bytes kMiB = 1024 * 1024;

Bytes page_align(double bytes) {
    const auto b = static_cast<Bytes>(bytes);
    return std::max<Bytes>(4096, b / 4096 * 4096);
}

}  // namespace

Workload build_proxy(ProxyKind kind, const ProxyParams& params) {
    Workload w;
    w.name = to_string(kind);
    switch (kind) {
        case ProxyKind::BandwidthBound: {
            w.objects.push_back({"stream", params.footprint_bytes.value_or(256 * kMiB), AccessPattern::SeqStream, 1.0, 0});
            ThreadGroup g;
            g.agent = params.agent;
            g.count = params.threads.value_or(16);
            g.generator.pattern = AccessPattern::SeqStream;
            g.generator.targets = {{0, 1.0}};
            g.generator.access_bytes = 4096;
            g.generator.op_count = params.ops.value_or(0);
            w.groups.push_back(g);
            break;
        }
        case ProxyKind::LatencyBound: {
            w.objects.push_back(
                {"chase", params.footprint_bytes.value_or(64 * kMiB), AccessPattern::PointerChase, 1.0, 0});
            ThreadGroup g;
            g.agent = params.agent;
            g.count = params.threads.value_or(1);
            g.max_outstanding = 1;
            g.generator.pattern = AccessPattern::PointerChase;
            g.generator.targets = {{0, 1.0}};
            g.generator.op_count = params.ops.value_or(20000);
            w.groups.push_back(g);
            break;
        }
        case ProxyKind::MixedTwoObject: {
            const double footprint = static_cast<double>(params.footprint_bytes.value_or(64 * kMiB));
            const std::uint64_t ops = params.ops.value_or(100000);
            const std::size_t stream_threads = params.threads.value_or(4);
            w.objects.push_back({"stream", page_align(footprint * 0.95), AccessPattern::SeqStream, 0.8, 0});
            w.objects.push_back({"chase", page_align(footprint * 0.05), AccessPattern::PointerChase, 0.2, 0});
            ThreadGroup stream;
            stream.agent = params.agent;
            stream.count = stream_threads;
            stream.generator.pattern = AccessPattern::SeqStream;
            stream.generator.targets = {{0, 1.0}};
            stream.generator.op_count = ops * 8 / 10 / stream_threads;
            w.groups.push_back(stream);
            ThreadGroup chase;
            chase.agent = params.agent;
            chase.count = 1;
            chase.max_outstanding = 1;
            chase.generator.pattern = AccessPattern::PointerChase;
            chase.generator.targets = {{1, 1.0}};
            chase.generator.op_count = ops * 2 / 10;
            w.groups.push_back(chase);
            break;
        }
        case ProxyKind::HotColdSkew: {
            w.objects.push_back({"skewed", params.footprint_bytes.value_or(32 * kMiB), AccessPattern::Zipf, 1.0, 0});
            ThreadGroup g;
            g.agent = params.agent;
            g.count = params.threads.value_or(4);
            g.generator.pattern = AccessPattern::Zipf;
            g.generator.targets = {{0, 1.0}};
            g.generator.compute_gap = 1'000'000;  // 1 µs
            g.generator.op_count = params.ops.value_or(0);
            w.groups.push_back(g);
            break;
        }
    }
    return w;
}

}  // namespace tierlab
