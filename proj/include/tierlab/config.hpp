#pragma once

/// @file config.hpp
/// @brief JSON experiment documents: presets, dotted-path overrides and
/// conversion into a `SimConfig`.
///
/// A document has the sections `topology`, `devices`, `links`, `workload`,
/// `placement`, `tiering` and `run`. A `"preset": "system_b"` key pulls in a
/// preset first and merges the rest of the document over it (objects merge
/// key by key, arrays are replaced). Times are in ns, bandwidths in GB/s,
/// sizes in bytes or strings such as "64MiB".

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tierlab/engine.hpp"

namespace tierlab {

using Json = nlohmann::json;

/// TIERLAB_PRESETS if set, otherwise the presets directory shipped with the build.
std::filesystem::path preset_dir();

/// Load a document from a path, or by name from the preset directory
/// ("system_b" or "system_b.json"). Resolves `preset` keys. Throws ConfigError.
Json load_document(const std::string& path_or_name);

/// Parse document text (resolving a `preset` key). Throws ConfigError.
Json parse_document(const std::string& text, const std::filesystem::path& base_dir = {});

/// Apply "dotted.path=value". Array elements are matched by device_id,
/// link_id, name or object, or by numeric index. The value is parsed as JSON
/// and falls back to a plain string. Throws ConfigError.
void apply_override(Json& doc, const std::string& assignment);

Topology build_topology(const Json& doc);
Workload build_workload(const Json& workload, const Topology& topology);

/// Full conversion. The config digest is computed over the canonical document. Throws ConfigError.
SimConfig build_sim_config(const Json& doc);

/// Parse a size: a non-negative integer or a string with a KiB/MiB/GiB/TiB or KB/MB/GB/TB suffix.
Bytes parse_bytes(const Json& value, const std::string& key);

/// A placement and/or tiering choice written on the command line:
/// `first_touch`, `preferred:ldram,cxl`, `interleave:ldram,cxl`, `bind:cxl`,
/// `oli:ldram,cxl`, a tiering name (`no_balance`, `autonuma`, `tiering08`,
/// `tpp`), or `<placement>+<tiering>`.
struct PolicySpec {
    std::string text;
    std::optional<Json> placement;  ///< placement section
    std::optional<std::string> tiering;
};

PolicySpec parse_policy_spec(const std::string& text);

/// Apply @p spec to a document's placement and tiering sections.
void apply_policy(Json& doc, const PolicySpec& spec);

/// Placement policy for an already-built topology.
PlacementPolicy build_placement(const Json& placement, const Topology& topology);

Json profiles_to_json(const std::vector<ObjectProfile>& profiles);
std::vector<ObjectProfile> profiles_from_json(const Json& j);

}  // namespace tierlab
