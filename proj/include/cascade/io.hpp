#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cascade/evaluation.hpp"
#include "cascade/learner.hpp"
#include "cascade/partition.hpp"
#include "cascade/synthgen.hpp"

namespace cascade {

using Json = nlohmann::ordered_json;

inline constexpr const char* kFormatVersion = "1";

// Throws InputError naming the path when it cannot be read or parsed, or
// when the document carries a different "version".
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

// Timing keys ("ms*") removed at any depth; what determinism is judged on.
Json without_timing(Json doc);

Json agony_to_json(const AgonyResult& result, const Interner& nodes);

Json params_to_json(const PartitionParams& params, PartitionAlgorithm algorithm,
                    std::uint64_t seed);

Json partition_to_json(const GroupPartition& partition, const SocialGraph& graph,
                       const PropagationDb& db, std::uint64_t seed);

// Rebuilds groups against `db`; unknown entities or nodes, or a ranking that
// misses a union node, throw InputError.
GroupPartition partition_from_json(const Json& doc, const SocialGraph& graph,
                                   const PropagationDb& db);

Json topologies_to_json(const std::vector<CausalTopology>& topologies, const SocialGraph& graph,
                        const LearnOptions& options);

using NamedArc = std::pair<std::string, std::string>;

// Union of "arcs" over every group of a learn document.
std::vector<NamedArc> learned_arcs_from_json(const Json& doc);

Json ground_truth_to_json(const GroundTruth& truth);

struct TruthRecord {
  std::uint64_t seed = 0;
  std::string graph_model;
  double delta = 0.0;
  double noise = 0.0;
  std::vector<std::vector<std::string>> groups;
  std::vector<NamedArc> causal;  // union over groups
  std::vector<std::pair<std::string, std::size_t>> labels;  // entity, planted group
};

TruthRecord truth_from_json(const Json& doc);

// Entity -> group id, from a partition document.
std::vector<std::pair<std::string, std::size_t>> partition_assignment(const Json& doc);

// Scores named arcs over the chosen universe; group-social needs `social`.
ConfusionCounts score_arcs(const TruthRecord& truth, const std::vector<NamedArc>& learned,
                           Universe universe, const SocialGraph* social);

// NMI between planted labels and a partition assignment over the same entities.
double score_nmi(const TruthRecord& truth,
                 const std::vector<std::pair<std::string, std::size_t>>& assignment);

Json confusion_to_json(const ConfusionCounts& c);

}  // namespace cascade
