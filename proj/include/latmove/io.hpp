#pragma once

// JSON and CSV encodings of networks, policies, costs and results.
// Doubles are written in shortest round-trip form; CSV uses LF line endings and a header row.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "latmove/heuristic_analysis.hpp"
#include "latmove/ltv_core.hpp"
#include "latmove/mc_sim.hpp"
#include "latmove/metrics.hpp"
#include "latmove/net_model.hpp"
#include "latmove/policy_opt.hpp"

namespace latmove {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
/// Writes bytes as-is (no newline translation). Creates parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);
Json parse_json(const std::string& text, const std::string& source);

// Networks. Node references in dmz, reconfigurable and target may be ids or indices.
RawNetwork network_from_json(const Json& j);
Json network_to_json(const NetworkSpec& spec);
NetworkSpec load_network(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Resolves a node id (or a decimal index) to its index. Throws UnknownNode.
NodeIndex resolve_node(const NetworkSpec& spec, const std::string& ref);

// Policies: {"gamma": [[...]]}; validated against the network.
PolicyMatrix policy_from_json(const Json& j, const NetworkSpec& spec);
Json policy_to_json(const PolicyMatrix& policy);
PolicyMatrix load_policy(const std::filesystem::path& path, const NetworkSpec& spec);

// Costs: {"type": "location", "D": [[...]]} or {"type": "zero"}.
CostTable cost_table_from_json(const Json& j, const NetworkSpec& spec);
Json cost_table_to_json(const CostTable& costs);

Json report_to_json(const VulnerabilityReport& report, const NetworkSpec& spec);
/// delta_k,initial_node,exact,lower,upper; aggregate rows use initial_node "aggregate".
std::string report_to_csv(const VulnerabilityReport& report, const NetworkSpec& spec);

Json trace_to_json(const OptimizationTrace& trace);
/// iter,objective,step_norm; step_norm is empty on the first row.
std::string trace_to_csv(const OptimizationTrace& trace);

Json estimate_to_json(const LtvEstimate& estimate, const NetworkSpec& spec);
/// scope,delta_k,trials,successes,estimate,ci_lower,ci_upper
std::string estimate_to_csv(const LtvEstimate& estimate, const NetworkSpec& spec);

/// stage,links,honey_link,new_compromises,detected
std::string episode_trace_to_csv(const EpisodeTrace& trace, const NetworkSpec& spec);

/// delta_k,exact,eq9_bound,t2_lower1,t2_upper,t2_lower2
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
Json sweep_to_json(const std::vector<SweepRow>& rows);

Json direct_analysis_to_json(const DirectAnalysis& a, const NetworkSpec& spec);

}  // namespace latmove
