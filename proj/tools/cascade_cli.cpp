#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "cascade/errors.hpp"
#include "cascade/io.hpp"
#include "cascade/pipeline.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSeedEnv = "CAUSAL_CASCADE_SEED";

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void emit(const Json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json_file(path, doc);
  }
}

struct GenFlags {
  GeneratorConfig config;
  std::optional<double> delta, p_min, p_max;
  std::string model = "erdos-renyi";
  bool asymmetric = false;

  void add(CLI::App& app) {
    app.add_option("--n", config.n, "Node count")->capture_default_str();
    app.add_option("--graph-model", model, "erdos-renyi | power-law")->capture_default_str();
    app.add_option("--delta", delta, "Pair density; default uniform in [delta-min, delta-max]");
    app.add_option("--delta-min", config.delta_min)->capture_default_str();
    app.add_option("--delta-max", config.delta_max)->capture_default_str();
    app.add_flag("--asymmetric", asymmetric, "One arc per selected pair instead of both");
    app.add_option("--k", config.k, "Group count")->capture_default_str();
    app.add_option("--card-min", config.card_min)->capture_default_str();
    app.add_option("--card-max", config.card_max)->capture_default_str();
    app.add_option("--card-overlap", config.card_overlap)->capture_default_str();
    app.add_option("--cause-min", config.cause_min)->capture_default_str();
    app.add_option("--cause-max", config.cause_max)->capture_default_str();
    app.add_option("--p-min", p_min, "Arc probability lower bound; default drawn");
    app.add_option("--p-max", p_max, "Arc probability upper bound; default drawn");
    app.add_option("--observations", config.observations, "Trace count")->capture_default_str();
    app.add_option("--noise", config.noise)->capture_default_str();
    app.add_option("--root-activation", config.root_activation)->capture_default_str();
  }

  GeneratorConfig resolve(std::uint64_t seed) const {
    GeneratorConfig c = config;
    c.model = parse_graph_model(model);
    c.delta = delta;
    c.p_min = p_min;
    c.p_max = p_max;
    c.symmetric = !asymmetric;
    c.seed = seed;
    return c;
  }
};

struct PartitionFlags {
  PartitionParams params;
  std::string algorithm = "sampling";
  std::optional<double> agony_budget_ms;
  std::optional<std::size_t> max_retries;
  bool keep_isolated = false;
  bool no_skip_disjoint = false;
  bool no_retry_fallback = false;

  void add(CLI::App& app) {
    app.add_option("--eta", params.eta, "Agony bound")->capture_default_str();
    app.add_option("--max-size", params.max_size, "Group size bound K")->capture_default_str();
    app.add_option("--alpha", params.alpha, "Acceptance fraction")->capture_default_str();
    app.add_option("--algorithm", algorithm, "two-step | sampling")->capture_default_str();
    app.add_option("--mine-guard", params.mine_guard, "Largest db two-step will mine")
        ->capture_default_str();
    app.add_flag("--no-drop-isolated", keep_isolated);
    app.add_flag("--no-skip-disjoint", no_skip_disjoint);
    app.add_option("--agony-budget-ms", agony_budget_ms, "Time budget per agony computation");
    app.add_option("--beam-factor", params.expedients.beam_factor)->capture_default_str();
    app.add_flag("--no-retry-fallback", no_retry_fallback);
    app.add_option("--max-retries", max_retries, "Failed rounds before a fallback singleton");
    app.add_option("--flush-threshold", params.expedients.flush_threshold)->capture_default_str();
  }

  PartitionParams resolve(std::uint64_t seed) const {
    PartitionParams p = params;
    p.seed = partition_seed(seed);
    p.expedients.drop_isolated = !keep_isolated;
    p.expedients.skip_disjoint_agony = !no_skip_disjoint;
    p.expedients.retry_fallback = !no_retry_fallback;
    p.expedients.max_retries = max_retries;
    if (agony_budget_ms) {
      p.expedients.agony_budget = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double, std::milli>(*agony_budget_ms));
    }
    p.validate();
    return p;
  }
};

struct Paths {
  fs::path graph, observations, truth, partition, learned, baseline;
};

void run_gen(const GeneratorConfig& config, const fs::path& dir) {
  GroundTruth truth = generate(config);
  print_warnings(truth.warnings);
  fs::create_directories(dir);
  std::ofstream graph(dir / "graph.txt");
  if (!graph) throw InputError("cannot write '" + (dir / "graph.txt").string() + "'");
  write_graph(graph, truth.graph);
  std::ofstream obs(dir / "observations.csv");
  if (!obs) throw InputError("cannot write '" + (dir / "observations.csv").string() + "'");
  write_observations(obs, truth.graph, truth.db);
  write_json_file(dir / "ground_truth.json", ground_truth_to_json(truth));
}

Json run_partition(const Dataset& ds, const PartitionFlags& flags, std::uint64_t seed) {
  PartitionParams params = flags.resolve(seed);
  auto algorithm = parse_algorithm(flags.algorithm);
  auto start = std::chrono::steady_clock::now();
  GroupPartition partition = algorithm == PartitionAlgorithm::kSampling
                                 ? sampling_partition(ds.db, params)
                                 : two_step_partition(ds.db, params);
  double ms = elapsed_ms(start);
  Json doc = partition_to_json(partition, ds.graph, ds.db, seed);
  doc["ms"] = ms;
  return doc;
}

Json run_learn(const Dataset& ds, const Json& partition_doc, const LearnOptions& options) {
  GroupPartition partition = partition_from_json(partition_doc, ds.graph, ds.db);
  auto start = std::chrono::steady_clock::now();
  auto topologies = learn_all(partition, ds.db, options);
  double ms = elapsed_ms(start);
  Json doc = topologies_to_json(topologies, ds.graph, options);
  doc["ms"] = ms;
  return doc;
}

struct EvalResult {
  Json metrics;
  ExperimentResult row;
};

EvalResult run_eval(const Json& truth_doc, const Json& partition_doc, const Json* learned_doc,
                    const Json* baseline_doc, Universe universe, const SocialGraph* social,
                    const std::string& criterion) {
  TruthRecord truth = truth_from_json(truth_doc);
  const Json& params = partition_doc.at("params");
  ExperimentResult r;
  r.seed = truth.seed;
  r.graph_model = truth.graph_model;
  r.delta = truth.delta;
  r.noise = truth.noise;
  r.alpha = params.at("alpha").get<double>();
  r.eta = params.at("eta").get<std::int64_t>();
  r.max_size = params.at("max_size").get<std::size_t>();
  r.criterion = criterion;
  r.nmi = score_nmi(truth, partition_assignment(partition_doc));
  r.ms_partition = partition_doc.value("ms", 0.0);
  r.groups = partition_doc.at("groups").size();

  Json m = {{"version", kFormatVersion},
            {"seed", r.seed},
            {"graph_model", r.graph_model},
            {"delta", r.delta},
            {"noise", r.noise},
            {"alpha", r.alpha},
            {"eta", r.eta},
            {"K", r.max_size},
            {"criterion", criterion},
            {"universe", to_string(universe)},
            {"groups", r.groups},
            {"nmi", r.nmi},
            {"accuracy_psc", nullptr},
            {"accuracy_baseline", nullptr}};
  if (learned_doc) {
    r.psc = score_arcs(truth, learned_arcs_from_json(*learned_doc), universe, social);
    r.accuracy_psc = r.psc.accuracy();
    r.ms_learn = learned_doc->value("ms", 0.0);
    m["accuracy_psc"] = r.accuracy_psc;
    m["confusion_psc"] = confusion_to_json(r.psc);
  }
  if (baseline_doc) {
    r.baseline = score_arcs(truth, learned_arcs_from_json(*baseline_doc), universe, social);
    r.accuracy_baseline = r.baseline.accuracy();
    if (!learned_doc) r.ms_learn = baseline_doc->value("ms", 0.0);
    m["accuracy_baseline"] = r.accuracy_baseline;
    m["confusion_baseline"] = confusion_to_json(r.baseline);
  }
  m["ms_partition"] = r.ms_partition;
  m["ms_learn"] = r.ms_learn;
  return {m, r};
}

void append_rows(const fs::path& csv, const std::vector<EvalResult>& results, bool psc,
                 bool baseline) {
  bool fresh = !fs::exists(csv) || fs::file_size(csv) == 0;
  std::ofstream out(csv, std::ios::app);
  if (!out) throw InputError("cannot append to '" + csv.string() + "'");
  if (fresh) out << kResultsHeader << '\n';
  for (const auto& e : results) {
    const ExperimentResult& r = e.row;
    out << r.seed << ',' << r.graph_model << ',' << r.delta << ',' << r.noise << ',' << r.alpha
        << ',' << r.eta << ',' << r.max_size << ',' << r.criterion << ',';
    if (psc) out << r.accuracy_psc;
    out << ',';
    if (baseline) out << r.accuracy_baseline;
    out << ',' << r.nmi << ',' << r.ms_partition << ',' << r.ms_learn << '\n';
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      std::size_t used = 0;
      auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError(std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
  }
  return 0;
}

// One generated run through the same file hand-offs as the subcommands.
EvalResult pipeline_run(const GeneratorConfig& gen, const PartitionFlags& pflags,
                        const LearnOptions& learn, bool baseline_only, Universe universe,
                        const fs::path& dir) {
  run_gen(gen, dir);
  Dataset ds = ingest_files(dir / "observations.csv", dir / "graph.txt");
  Json partition = run_partition(ds, pflags, gen.seed);
  write_json_file(dir / "partition.json", partition);

  std::optional<Json> psc;
  if (!baseline_only) {
    psc = run_learn(ds, partition, learn);
    write_json_file(dir / "learn.json", *psc);
  }
  LearnOptions base = learn;
  base.baseline = true;
  Json baseline = run_learn(ds, partition, base);
  write_json_file(dir / "baseline.json", baseline);

  Json truth = read_json_file(dir / "ground_truth.json");
  auto result = run_eval(truth, partition, psc ? &*psc : nullptr, &baseline, universe, &ds.graph,
                         to_string(learn.criterion));
  write_json_file(dir / "metrics.json", result.metrics);
  return result;
}

Json aggregate(const std::vector<EvalResult>& results, bool psc) {
  auto column = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : results) v.push_back(get(r.row));
    auto s = summarize(v);
    return Json{{"mean", s.mean}, {"stdev", s.stdev}};
  };
  Json doc = {{"version", kFormatVersion}, {"runs", results.size()}};
  if (psc) doc["accuracy_psc"] = column([](const ExperimentResult& r) { return r.accuracy_psc; });
  doc["accuracy_baseline"] = column([](const ExperimentResult& r) { return r.accuracy_baseline; });
  doc["nmi"] = column([](const ExperimentResult& r) { return r.nmi; });
  doc["groups"] = column([](const ExperimentResult& r) { return static_cast<double>(r.groups); });
  doc["ms_partition"] = column([](const ExperimentResult& r) { return r.ms_partition; });
  doc["ms_learn"] = column([](const ExperimentResult& r) { return r.ms_learn; });
  if (psc) {
    doc["psc_beats_baseline"] =
        doc["accuracy_psc"]["mean"].get<double>() > doc["accuracy_baseline"]["mean"].get<double>();
  }
  return doc;
}

int run(int argc, char** argv) {
  CLI::App app{"Causal propagation analysis: agony partitioning and causal topology learning"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_flag;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_flag, std::string("Run seed; default $") + kSeedEnv + " or 0");
  };

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic social graph, ground truth and traces");
  GenFlags gen_flags;
  std::string gen_out;
  gen_flags.add(*gen);
  gen->add_option("--out", gen_out, "Output directory")->required();
  add_seed(gen);

  // agony
  auto* agony = app.add_subcommand("agony", "Minimum agony of a graph file");
  std::string agony_graph;
  std::optional<double> agony_budget;
  agony->add_option("graph", agony_graph, "Edge list")->required();
  agony->add_option("--time-budget-ms", agony_budget, "Stop early with an upper bound");

  // partition
  auto* part = app.add_subcommand("partition", "Partition traces into low-agony groups");
  PartitionFlags part_flags;
  Paths part_paths;
  std::string part_out;
  part->add_option("--graph", part_paths.graph)->required();
  part->add_option("--observations", part_paths.observations)->required();
  part->add_option("--out", part_out, "Partition JSON; stdout when omitted");
  part_flags.add(*part);
  add_seed(part);

  // learn
  auto* learn = app.add_subcommand("learn", "Learn one causal topology per group");
  Paths learn_paths;
  std::string learn_out, criterion = "bic";
  LearnOptions learn_options;
  learn->add_option("--graph", learn_paths.graph)->required();
  learn->add_option("--observations", learn_paths.observations)->required();
  learn->add_option("--partition", learn_paths.partition)->required();
  learn->add_option("--out", learn_out, "Topology JSON; stdout when omitted");
  learn->add_option("--criterion", criterion, "bic | aic")->capture_default_str();
  learn->add_flag("--baseline", learn_options.baseline, "Keep every reconstructed arc");
  learn->add_option("--jobs", learn_options.jobs, "Groups learned in parallel")
      ->capture_default_str();
  add_seed(learn);

  // eval
  auto* eval = app.add_subcommand("eval", "Score learned topologies and a partition");
  Paths eval_paths;
  std::string eval_out, eval_csv, universe_name = "group-pairs", eval_criterion = "bic";
  eval->add_option("--truth", eval_paths.truth, "ground_truth.json")->required();
  eval->add_option("--partition", eval_paths.partition)->required();
  eval->add_option("--learned", eval_paths.learned, "Topology JSON of the full method");
  eval->add_option("--baseline-learned", eval_paths.baseline, "Topology JSON of the baseline");
  eval->add_option("--graph", eval_paths.graph, "Social graph, for the group-social universe");
  eval->add_option("--universe", universe_name, "group-pairs | group-social")
      ->capture_default_str();
  eval->add_option("--out", eval_out, "Metrics JSON; stdout when omitted");
  eval->add_option("--results", eval_csv, "Results CSV to append a row to");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Generate, partition, learn and score");
  GenFlags pipe_gen;
  PartitionFlags pipe_part;
  std::string pipe_out, pipe_criterion = "bic", pipe_universe = "group-pairs";
  std::size_t repeat = 1;
  unsigned jobs = 1;
  bool gen_defaults = false, pipe_baseline = false;
  pipe->add_flag("--gen-defaults", gen_defaults,
                 "Generator defaults (n=100, k=10, 1000 traces, 5% noise); flags still override");
  pipe_gen.add(*pipe);
  pipe_part.add(*pipe);
  pipe->add_option("--criterion", pipe_criterion, "bic | aic")->capture_default_str();
  pipe->add_flag("--baseline", pipe_baseline, "Skip hill climbing entirely");
  pipe->add_option("--universe", pipe_universe, "group-pairs | group-social")
      ->capture_default_str();
  pipe->add_option("--repeat", repeat, "Seeds seed..seed+repeat-1")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  pipe->add_option("--jobs", jobs, "Runs in parallel")->capture_default_str();
  pipe->add_option("--out", pipe_out, "Output directory")->required();
  add_seed(pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*gen) {
    run_gen(gen_flags.resolve(resolve_seed(seed_flag)), gen_out);
    return 0;
  }
  if (*agony) {
    std::vector<std::string> warnings;
    SocialGraph g = read_graph_file(agony_graph, &warnings);
    print_warnings(warnings);
    AgonyOptions options;
    if (agony_budget) {
      options.time_budget = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double, std::milli>(*agony_budget));
    }
    std::cout << agony_to_json(min_agony(g.arcs, options), g.nodes).dump(2) << '\n';
    return 0;
  }
  if (*part) {
    Dataset ds = ingest_files(part_paths.observations, part_paths.graph);
    print_warnings(ds.warnings);
    emit(run_partition(ds, part_flags, resolve_seed(seed_flag)), part_out);
    return 0;
  }
  if (*learn) {
    Dataset ds = ingest_files(learn_paths.observations, learn_paths.graph);
    print_warnings(ds.warnings);
    learn_options.criterion = parse_criterion(criterion);
    emit(run_learn(ds, read_json_file(learn_paths.partition), learn_options), learn_out);
    return 0;
  }
  if (*eval) {
    Universe universe = parse_universe(universe_name);
    if (eval_paths.learned.empty() && eval_paths.baseline.empty()) {
      throw InputError("eval needs --learned and/or --baseline-learned");
    }
    std::optional<SocialGraph> social;
    if (!eval_paths.graph.empty()) social = read_graph_file(eval_paths.graph);
    Json truth = read_json_file(eval_paths.truth);
    Json partition = read_json_file(eval_paths.partition);
    std::optional<Json> learned, baseline;
    if (!eval_paths.learned.empty()) learned = read_json_file(eval_paths.learned);
    if (!eval_paths.baseline.empty()) baseline = read_json_file(eval_paths.baseline);
    std::string crit = learned ? learned->value("criterion", "bic") : baseline->value("criterion", "bic");
    auto result = run_eval(truth, partition, learned ? &*learned : nullptr,
                           baseline ? &*baseline : nullptr, universe, social ? &*social : nullptr,
                           crit);
    emit(result.metrics, eval_out);
    if (!eval_csv.empty()) append_rows(eval_csv, {result}, learned.has_value(), baseline.has_value());
    return 0;
  }

  // pipeline
  (void)gen_defaults;  // the generator flags already default to the paper regime
  const std::uint64_t base_seed = resolve_seed(seed_flag);
  Universe universe = parse_universe(pipe_universe);
  LearnOptions options;
  options.criterion = parse_criterion(pipe_criterion);
  pipe_part.resolve(base_seed);  // validate before spawning work
  gen_flags = pipe_gen;
  gen_flags.resolve(base_seed).validate();

  std::vector<EvalResult> results(repeat);
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < repeat; i = next++) {
      try {
        std::uint64_t seed = base_seed + i;
        results[i] = pipeline_run(pipe_gen.resolve(seed), pipe_part, options, pipe_baseline,
                                  universe, fs::path(pipe_out) / ("seed-" + std::to_string(seed)));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = repeat;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(repeat)));
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  append_rows(fs::path(pipe_out) / "results.csv", results, !pipe_baseline, true);
  Json summary = aggregate(results, !pipe_baseline);
  write_json_file(fs::path(pipe_out) / "aggregate.json", summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
