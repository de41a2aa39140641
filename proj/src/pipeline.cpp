#include "cascade/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "cascade/random.hpp"

namespace cascade {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

std::uint64_t partition_seed(std::uint64_t run_seed) { return splitmix64(run_seed ^ 0x5041525449ULL); }

std::vector<std::size_t> partition_labels(const GroupPartition& partition, std::size_t entities) {
  std::vector<std::size_t> labels(entities, 0);
  for (std::size_t g = 0; g < partition.groups.size(); ++g) {
    for (EntityIndex e : partition.groups[g].members) labels.at(e) = g;
  }
  return labels;
}

std::vector<Arc> learned_arcs(const std::vector<CausalTopology>& topologies) {
  std::vector<Arc> out;
  for (const auto& t : topologies) out.insert(out.end(), t.selected.begin(), t.selected.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Arc> arc_universe(const GroundTruth& truth, Universe universe) {
  return universe == Universe::kGroupPairs ? group_pair_universe(truth.groups)
                                           : group_social_universe(truth.groups, truth.graph.arcs);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  using Clock = std::chrono::steady_clock;
  GroundTruth truth = generate(config.gen);

  PartitionParams params = config.partition;
  params.seed = partition_seed(config.gen.seed);
  auto start = Clock::now();
  GroupPartition partition = config.algorithm == PartitionAlgorithm::kSampling
                                 ? sampling_partition(truth.db, params)
                                 : two_step_partition(truth.db, params);
  double ms_partition = elapsed_ms(start);

  LearnOptions learn;
  learn.criterion = config.criterion;
  start = Clock::now();
  auto psc = learn_all(partition, truth.db, learn);
  double ms_learn = elapsed_ms(start);
  learn.baseline = true;
  auto base = learn_all(partition, truth.db, learn);

  auto universe = arc_universe(truth, config.universe);
  auto true_arcs = truth.true_arcs();

  ExperimentResult r;
  r.seed = config.gen.seed;
  r.graph_model = to_string(config.gen.model);
  r.delta = truth.delta;
  r.noise = config.gen.noise;
  r.alpha = params.alpha;
  r.eta = params.eta;
  r.max_size = params.max_size;
  r.criterion = to_string(config.criterion);
  r.psc = arc_accuracy(true_arcs, learned_arcs(psc), universe);
  r.baseline = arc_accuracy(true_arcs, learned_arcs(base), universe);
  r.accuracy_psc = r.psc.accuracy();
  r.accuracy_baseline = r.baseline.accuracy();
  r.nmi = nmi(truth.labels, partition_labels(partition, truth.db.size()));
  r.ms_partition = ms_partition;
  r.ms_learn = ms_learn;
  r.groups = partition.groups.size();
  r.p_min = truth.p_min;
  r.p_max = truth.p_max;
  return r;
}

std::vector<ExperimentResult> run_batch(const ExperimentConfig& config, std::size_t repeat,
                                        unsigned jobs) {
  std::vector<ExperimentResult> out(repeat);
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < repeat; i = next++) {
      try {
        ExperimentConfig c = config;
        c.gen.seed = config.gen.seed + i;
        out[i] = run_experiment(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = repeat;
      }
    }
  };
  unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(repeat)));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

void write_result_row(std::ostream& out, const ExperimentResult& r) {
  out << r.seed << ',' << r.graph_model << ',' << r.delta << ',' << r.noise << ',' << r.alpha
      << ',' << r.eta << ',' << r.max_size << ',' << r.criterion << ',' << r.accuracy_psc << ','
      << r.accuracy_baseline << ',' << r.nmi << ',' << r.ms_partition << ',' << r.ms_learn
      << '\n';
}

}  // namespace cascade
