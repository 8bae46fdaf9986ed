#pragma once

#include <optional>
#include <string>

#include "tierlab/devices.hpp"

namespace tierlab {

enum class AccessPattern { PointerChase, SeqStream, RandStream, Gups, Zipf };

const char* to_string(AccessPattern p);
/// Accepts "pointer_chase", "seq_stream", "rand_stream" (or "rand"), "gups", "zipf".
std::optional<AccessPattern> parse_access_pattern(const std::string& text);

/// Which per-thread issue cap governs the pattern.
inline IssueClass issue_class(AccessPattern p) {
    return p == AccessPattern::SeqStream ? IssueClass::Sequential : IssueClass::Random;
}

}  // namespace tierlab
