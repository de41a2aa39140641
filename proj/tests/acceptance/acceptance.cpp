// Acceptance suite: one verdict line per criterion.
//
//   acceptance [--report-only] [--only N] [--jobs N] [--report FILE]
//
// Exits 1 when a criterion fails, unless --report-only is given. --report
// also writes the verdict lines to FILE.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "cascade/io.hpp"
#include "cascade/pipeline.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cascade;
using namespace cascade::testing;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

unsigned g_jobs = 1;
constexpr std::uint64_t kSeedBase = 1000;
constexpr std::size_t kSeeds = 30;

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

// 1: exact solver against exhaustive rank maps.
Verdict agony_oracle() {
  std::mt19937_64 rng(1);
  auto start = std::chrono::steady_clock::now();
  std::size_t graphs = 0, mismatches = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (double p : {0.15, 0.3, 0.5, 0.8}) {
      for (int i = 0; i < 25; ++i, ++graphs) {
        Digraph g = random_digraph(rng, n, p);
        if (min_agony(g).agony != min_agony_bruteforce(g).agony) ++mismatches;
      }
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mismatches == 0 && graphs >= 500 && secs < 60.0,
          std::to_string(graphs) + " graphs, " + std::to_string(mismatches) + " mismatches, " +
              fmt(secs, 1) + " s"};
}

// 2: worked example, dags, disjoint cycles.
Verdict paper_fixtures() {
  auto ds = toy_dataset();
  std::vector<EntityIndex> pair{*ds.db.entities.find("phi1"), *ds.db.entities.find("phi2")};
  std::int64_t toy = min_agony(union_graph(ds.db, pair).graph).agony;
  bool dags_zero = true;
  for (const auto& d : ds.db.dags) {
    dags_zero = dags_zero && min_agony(Digraph(ds.graph.nodes.size(), d.arcs)).agony == 0;
  }
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    // Random dag: arcs only from lower to higher index.
    std::size_t n = 2 + rng() % 30;
    std::vector<Arc> arcs;
    for (NodeIndex u = 0; u < n; ++u) {
      for (NodeIndex v = u + 1; v < n; ++v) {
        if (rng() % 4 == 0) arcs.push_back({u, v});
      }
    }
    dags_zero = dags_zero && min_agony(Digraph(n, arcs)).agony == 0;
  }
  bool cycles = true;
  std::string cycle_values;
  for (std::size_t k = 2; k <= 8; ++k) {
    auto a = min_agony(cycle_graph(k, 3, k + 6)).agony;
    cycles = cycles && a == static_cast<std::int64_t>(k);
    cycle_values += (k > 2 ? "," : "") + std::to_string(a);
  }
  return {toy == 5 && dags_zero && cycles, "phi1+phi2 agony " + std::to_string(toy) +
                                               ", dags all zero: " + (dags_zero ? "yes" : "no") +
                                               ", k-cycles " + cycle_values};
}

// Independent check: disjoint exact cover, every group valid by the oracle.
bool oracle_partition_ok(const PropagationDb& db, const GroupPartition& part,
                         const PartitionParams& params) {
  std::vector<int> seen(db.size(), 0);
  for (const auto& g : part.groups) {
    for (EntityIndex e : g.members) ++seen[e];
    if (!oracle_valid(db, g.members, params)) return false;
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

// 3: 200 random configurations, both algorithms.
Verdict partition_validity() {
  std::mt19937_64 rng(3);
  std::size_t violations = 0, configs = 0;
  for (; configs < 200; ++configs) {
    std::size_t n = 5 + rng() % 5;
    std::size_t count = 2 + rng() % 11;
    auto db = random_db(rng, n, count, 0.3 + 0.1 * static_cast<double>(rng() % 5));
    PartitionParams p;
    p.eta = static_cast<std::int64_t>(rng() % 5);
    p.max_size = 1 + rng() % 8;
    p.alpha = 0.05 + 0.95 * std::uniform_real_distribution<double>(0, 1)(rng);
    p.seed = rng();
    for (auto algorithm : {PartitionAlgorithm::kTwoStep, PartitionAlgorithm::kSampling}) {
      auto part = algorithm == PartitionAlgorithm::kTwoStep ? two_step_partition(db, p)
                                                            : sampling_partition(db, p);
      violations += !oracle_partition_ok(db, part, p);
    }
  }
  return {violations == 0, std::to_string(configs) + " configs x 2 algorithms, " +
                               std::to_string(violations) + " violating partitions"};
}

// 4: miner against subset enumeration; log K approximation bound.
Verdict miner_and_bound() {
  std::mt19937_64 rng(4);
  std::size_t miner_trials = 0, miner_bad = 0, bound_trials = 0, bound_bad = 0;
  for (int i = 0; i < 150; ++i, ++miner_trials) {
    auto db = random_db(rng, 6, 1 + rng() % 8, 0.45);
    PartitionParams p;
    p.eta = static_cast<std::int64_t>(rng() % 4);
    p.max_size = 1 + rng() % 8;
    miner_bad += mine_valid_dag_sets(db, p) != oracle_valid_sets(db, p);
  }
  for (int i = 0; i < 150; ++i, ++bound_trials) {
    auto db = random_db(rng, 6, 1 + rng() % 6, 0.5);
    PartitionParams p;
    p.eta = static_cast<std::int64_t>(rng() % 3);
    p.max_size = 1 + rng() % 6;
    std::size_t bound = static_cast<std::size_t>(std::floor(std::log2(p.max_size))) + 1;
    bound_bad += two_step_partition(db, p).groups.size() > bound * optimal_partition_size(db, p);
  }
  return {miner_bad == 0 && bound_bad == 0,
          "miner " + std::to_string(miner_bad) + "/" + std::to_string(miner_trials) +
              " mismatches, bound " + std::to_string(bound_bad) + "/" +
              std::to_string(bound_trials) + " exceeded"};
}

// 5: hill climbing against exhaustive subsets; local optimality always.
Verdict hill_climb_oracle() {
  std::mt19937_64 rng(5);
  std::size_t fixtures = 0, optimal = 0, not_local = 0;
  for (; fixtures < 200; ++fixtures) {
    auto f = random_fixture(rng);
    auto c = fixtures % 2 ? Criterion::kAic : Criterion::kBic;
    auto t = hill_climb(f.candidates, f.m, c);
    double score = oracle_score(t.selected, f.m, c);
    double best = -1e300;
    for (const auto& s : subsets(f.candidates)) best = std::max(best, oracle_score(s, f.m, c));
    if (score >= best - 1e-9) ++optimal;
    bool local = true;
    for (const Arc& a : f.candidates) {
      auto s = t.selected;
      auto it = std::find(s.begin(), s.end(), a);
      if (it == s.end()) {
        s.push_back(a);
      } else {
        s.erase(it);
      }
      local = local && oracle_score(s, f.m, c) <= score + 1e-9;
    }
    not_local += !local;
  }
  return {not_local == 0, std::to_string(fixtures) + " fixtures, " + std::to_string(optimal) +
                              " at the exhaustive optimum, " + std::to_string(not_local) +
                              " not locally optimal"};
}

struct Cell {
  Summary psc, base, nmi;
  double max_ms = 0.0;
};

Cell run_cell(ExperimentConfig config) {
  config.gen.seed = kSeedBase;
  auto runs = run_batch(config, kSeeds, g_jobs);
  std::vector<double> psc, base, nmi_values;
  Cell cell;
  for (const auto& r : runs) {
    psc.push_back(r.accuracy_psc);
    base.push_back(r.accuracy_baseline);
    nmi_values.push_back(r.nmi);
    cell.max_ms = std::max(cell.max_ms, r.ms_partition + r.ms_learn);
  }
  cell.psc = summarize(psc);
  cell.base = summarize(base);
  cell.nmi = summarize(nmi_values);
  return cell;
}

ExperimentConfig paper_regime(GraphModel model) {
  ExperimentConfig c;
  c.gen.model = model;
  if (model == GraphModel::kPowerLaw) c.gen.delta = 0.05;
  c.partition.alpha = 0.1;
  c.partition.max_size = 100;
  c.criterion = Criterion::kBic;
  return c;
}

// 6: synthetic reproduction over both graph models and four agony bounds.
Verdict synthetic_reproduction() {
  bool pass = true;
  std::ostringstream detail;
  for (auto model : {GraphModel::kErdosRenyi, GraphModel::kPowerLaw}) {
    const double target = model == GraphModel::kErdosRenyi ? 0.93 : 0.98;
    for (std::int64_t eta : {0, 1, 3, 5}) {
      auto config = paper_regime(model);
      config.partition.eta = eta;
      Cell c = run_cell(config);
      bool acc = std::abs(c.psc.mean - target) <= 0.05;
      bool gap = c.psc.mean - c.base.mean >= 0.03;
      bool nmi_ok = c.nmi.mean >= 0.55 && c.nmi.mean <= 0.75;
      bool time_ok = c.max_ms <= 5000.0;
      pass = pass && acc && gap && nmi_ok && time_ok;
      detail << "\n      " << to_string(model) << " eta=" << eta << ": psc " << fmt(c.psc.mean)
             << "+-" << fmt(c.psc.stdev) << (acc ? "" : " [acc]") << ", baseline "
             << fmt(c.base.mean) << ", gap " << fmt(c.psc.mean - c.base.mean)
             << (gap ? "" : " [gap]") << ", nmi " << fmt(c.nmi.mean) << (nmi_ok ? "" : " [nmi]")
             << ", max " << fmt(c.max_ms, 0) << " ms" << (time_ok ? "" : " [time]");
    }
  }
  return {pass, std::to_string(kSeeds) + " seeds per cell" + detail.str()};
}

// 7: the gap grows with the number of traces.
Verdict observation_trend() {
  std::vector<double> gaps;
  std::ostringstream detail;
  for (std::size_t o : {500, 1000, 5000}) {
    auto config = paper_regime(GraphModel::kErdosRenyi);
    config.gen.observations = o;
    Cell c = run_cell(config);
    gaps.push_back(c.psc.mean - c.base.mean);
    detail << (o == 500 ? "" : " -> ") << "|O|=" << o << " gap " << fmt(gaps.back());
  }
  bool pass = gaps[0] <= gaps[1] && gaps[1] <= gaps[2];
  return {pass, detail.str()};
}

// 8: accuracy holds up under 10% noise.
Verdict noise_robustness() {
  auto clean = paper_regime(GraphModel::kErdosRenyi);
  clean.gen.noise = 0.0;
  auto noisy = clean;
  noisy.gen.noise = 0.1;
  double a = run_cell(clean).psc.mean, b = run_cell(noisy).psc.mean;
  return {a - b <= 0.03, "psc " + fmt(a) + " at 0% -> " + fmt(b) + " at 10%, drop " + fmt(a - b)};
}

// 9: every subcommand twice through the real binary.
Verdict determinism() {
  fs::path dir = fs::temp_directory_path() / ("cascade_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto cli = [&](const std::string& args, const std::string& out = "/dev/null") {
    std::string cmd =
        "cd '" + dir.string() + "' && '" CASCADE_CLI "' " + args + " >" + out + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  auto stable = [&](const fs::path& p) {
    return without_timing(read_json_file(dir / p)).dump();
  };
  std::vector<std::string> differing;
  bool ran = true;
  for (const char* run : {"a", "b"}) {
    std::string r = run;
    std::string data = "--graph " + r + "/graph.txt --observations " + r + "/observations.csv";
    ran = ran && cli("gen --seed 7 --out " + r);
    ran = ran && cli("agony " + r + "/graph.txt", r + "/agony.json");
    ran = ran && cli("partition " + data + " --seed 7 --out " + r + "/partition.json");
    ran = ran && cli("learn " + data + " --partition " + r + "/partition.json --out " + r +
                     "/learn.json");
    ran = ran && cli("eval --truth " + r + "/ground_truth.json --partition " + r +
                     "/partition.json --learned " + r + "/learn.json --out " + r + "/metrics.json");
    ran = ran && cli("pipeline --gen-defaults --seed 7 --out " + r + "/pipe");
  }
  if (ran) {
    for (const char* f : {"ground_truth.json", "agony.json", "partition.json", "learn.json",
                          "metrics.json", "pipe/aggregate.json", "pipe/seed-7/partition.json",
                          "pipe/seed-7/learn.json", "pipe/seed-7/baseline.json",
                          "pipe/seed-7/metrics.json"}) {
      if (stable(fs::path("a") / f) != stable(fs::path("b") / f)) differing.push_back(f);
    }
  }
  fs::remove_all(dir);
  std::string detail = ran ? std::to_string(differing.size()) + " of 10 JSON outputs differ"
                           : std::string("a subcommand failed");
  for (const auto& f : differing) detail += " " + f;
  return {ran && differing.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  bool report_only = false;
  int only = 0;
  std::string report_path;
  g_jobs = std::max(1u, std::thread::hardware_concurrency());
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--report-only") {
      report_only = true;
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else if (arg == "--jobs" && i + 1 < argc) {
      g_jobs = static_cast<unsigned>(std::max(1, std::atoi(argv[++i])));
    } else {
      std::cerr << "usage: acceptance [--report-only] [--only N] [--jobs N] [--report FILE]\n";
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"agony oracle equivalence", agony_oracle},
      {"worked-example fixtures", paper_fixtures},
      {"partition validity", partition_validity},
      {"miner equivalence and log K bound", miner_and_bound},
      {"hill-climb oracle", hill_climb_oracle},
      {"synthetic reproduction", synthetic_reproduction},
      {"observation-size trend", observation_trend},
      {"noise robustness", noise_robustness},
      {"determinism", determinism},
  };
  std::ostringstream report;
  int passed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    ++ran;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    passed += v.pass;
    std::ostringstream line;
    line << (v.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": "
         << v.detail << '\n';
    std::cout << line.str() << std::flush;
    report << line.str();
  }
  report << passed << "/" << ran << " criteria passed\n";
  std::cout << passed << "/" << ran << " criteria passed" << std::endl;
  if (!report_path.empty()) std::ofstream(report_path) << report.str();
  return passed == ran || report_only ? 0 : 1;
}
