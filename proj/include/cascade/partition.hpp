#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cascade/agony.hpp"
#include "cascade/propagation.hpp"

namespace cascade {

// Speed-ups for the sampling algorithm. Each can be switched off.
struct Expedients {
  // Emit dags that share no node with any other dag as singletons up front.
  bool drop_isolated = true;
  // Reuse the current agony when the added dag touches no node of the union.
  bool skip_disjoint_agony = true;
  // Per agony computation; an upper bound is used when it runs out.
  std::optional<std::chrono::steady_clock::duration> agony_budget;
  // Beam of factor * ceil(log2(|uncovered| + 1)) dags per sampling round;
  // 0 disables.
  std::size_t beam_factor = 0;
  // After max_retries failed rounds emit a random singleton.
  bool retry_fallback = true;
  std::optional<std::size_t> max_retries;  // default 10 * ceil(1 / alpha)
  // Flush the remaining dags as singletons once at most this many are left.
  std::size_t flush_threshold = 0;
};

struct PartitionParams {
  std::int64_t eta = 0;
  std::size_t max_size = 100;  // K
  double alpha = 0.1;
  std::uint64_t seed = 0;
  Expedients expedients;
  // Level-wise mining refuses larger databases unless raised.
  std::size_t mine_guard = 20;

  // Throws InputError on alpha outside (0,1], K == 0 or negative eta.
  void validate() const;
  std::size_t retry_cap() const;
};

enum class PartitionAlgorithm { kTwoStep, kSampling };

struct Group {
  std::vector<EntityIndex> members;  // sorted
  std::vector<NodeIndex> nodes;      // union-graph nodes, aligned with ranking
  std::int64_t agony = 0;
  bool exact = true;
  Ranking ranking;
  bool connected = true;
  // Emitted by a fallback expedient instead of the acceptance test.
  bool fallback = false;
  // ceil(alpha * min(K, |uncovered|)) when the group was accepted (sampling).
  std::size_t acceptance_threshold = 0;
};

struct GroupPartition {
  PartitionAlgorithm algorithm = PartitionAlgorithm::kSampling;
  PartitionParams params;
  std::vector<Group> groups;
};

// agony(union) <= eta, |group| <= K, union weakly connected. A singleton is
// always connected: every trace hangs off its implicit source.
bool is_valid_group(const PropagationDb& db, std::span<const EntityIndex> group,
                    const PartitionParams& params);

// Every valid dag set, found level-wise: agony is monotone in the set, so a
// candidate of size l+1 is only scored when all its l-subsets passed.
// Disconnected sets are filtered at the end. Sorted by (size desc, members).
// Throws InfeasibleError when |db| exceeds params.mine_guard.
std::vector<std::vector<EntityIndex>> mine_valid_dag_sets(const PropagationDb& db,
                                                          const PartitionParams& params);

// Mining followed by greedy set cover restricted to sets disjoint from what
// is already covered, which makes the cover a partition.
GroupPartition two_step_partition(const PropagationDb& db, const PartitionParams& params);

// Grows one maximal admissible dag set from `uncovered` by uniform sampling
// among the dags that keep the union connected and within the agony bound.
// Dags that break the agony bound are dropped for the rest of the call.
std::vector<EntityIndex> sample_maximal_dag_set(const PropagationDb& db,
                                                std::span<const EntityIndex> uncovered,
                                                const PartitionParams& params,
                                                std::mt19937_64& rng);

// Greedy cover by sampled maximal sets, each covering at least
// ceil(alpha * min(K, |uncovered|)) still uncovered dags.
GroupPartition sampling_partition(const PropagationDb& db, const PartitionParams& params);

// Builds the per-group record (union, minimum agony, ranking, connectivity).
Group make_group(const PropagationDb& db, std::vector<EntityIndex> members,
                 const PartitionParams& params);

// Empty when the groups are disjoint, cover db and are all valid; otherwise
// one message per violation.
std::vector<std::string> partition_violations(const PropagationDb& db,
                                              const GroupPartition& partition);

std::string to_string(PartitionAlgorithm algorithm);
PartitionAlgorithm parse_algorithm(const std::string& name);

}  // namespace cascade
