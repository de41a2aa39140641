#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cascade/evaluation.hpp"
#include "cascade/learner.hpp"
#include "cascade/partition.hpp"
#include "cascade/synthgen.hpp"

namespace cascade {

struct ExperimentConfig {
  GeneratorConfig gen;
  PartitionParams partition;  // seed is derived from gen.seed
  PartitionAlgorithm algorithm = PartitionAlgorithm::kSampling;
  Criterion criterion = Criterion::kBic;
  Universe universe = Universe::kGroupPairs;
};

struct ExperimentResult {
  std::uint64_t seed = 0;
  std::string graph_model;
  double delta = 0.0;
  double noise = 0.0;
  double alpha = 0.0;
  std::int64_t eta = 0;
  std::size_t max_size = 0;
  std::string criterion;
  double accuracy_psc = 0.0;
  double accuracy_baseline = 0.0;
  double nmi = 0.0;
  double ms_partition = 0.0;
  double ms_learn = 0.0;
  ConfusionCounts psc;
  ConfusionCounts baseline;
  std::size_t groups = 0;
  double p_min = 0.0;
  double p_max = 0.0;
};

// Seed for the partition stage of a run.
std::uint64_t partition_seed(std::uint64_t run_seed);

// Group index per entity.
std::vector<std::size_t> partition_labels(const GroupPartition& partition, std::size_t entities);

// Union of the selected arcs of every topology.
std::vector<Arc> learned_arcs(const std::vector<CausalTopology>& topologies);

std::vector<Arc> arc_universe(const GroundTruth& truth, Universe universe);

// Generate, partition, learn with and without hill climbing, score.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Runs seeds seed..seed+repeat-1 on up to `jobs` threads; results in seed order.
std::vector<ExperimentResult> run_batch(const ExperimentConfig& config, std::size_t repeat,
                                        unsigned jobs);

inline constexpr const char* kResultsHeader =
    "seed,graph_model,delta,noise,alpha,eta,K,criterion,accuracy_psc,accuracy_baseline,nmi,"
    "ms_partition,ms_learn";

void write_result_row(std::ostream& out, const ExperimentResult& r);

}  // namespace cascade
