#pragma once

#include <string>

#include <json.hpp>

#include "tierlab/config.hpp"

namespace testutil {

using tierlab::Json;

// One pointer-chase object read by a single thread.
inline Json chase_workload(const std::string& agent, std::uint64_t ops, const std::string& size = "64MiB") {
    return {{"name", "chase"},
            {"objects", Json::array({{{"name", "chain"}, {"size_bytes", size}, {"pattern", "pointer_chase"}}})},
            {"threads", Json::array({{{"agent", agent}, {"count", 1}, {"targets", "chain"}, {"op_count", ops}}})}};
}

inline Json preset_with(const std::string& preset, const std::string& policy, const Json& workload) {
    Json doc = tierlab::load_document(preset);
    doc["workload"] = workload;
    tierlab::apply_policy(doc, tierlab::parse_policy_spec(policy));
    return doc;
}

inline tierlab::SimConfig config_for(const std::string& preset, const std::string& policy, const Json& workload) {
    return tierlab::build_sim_config(preset_with(preset, policy, workload));
}

}  // namespace testutil
