#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "cascade/errors.hpp"
#include "cascade/io.hpp"
#include "fixtures.hpp"

using namespace cascade;
using namespace cascade::testing;

TEST_CASE("partition json round trip") {
  auto ds = toy_dataset();
  PartitionParams p;
  p.eta = 5;
  auto part = sampling_partition(ds.db, p);
  Json doc = partition_to_json(part, ds.graph, ds.db, 9);
  CHECK(doc["version"] == kFormatVersion);
  CHECK(doc["params"]["seed"] == 9);
  auto back = partition_from_json(Json::parse(doc.dump()), ds.graph, ds.db);
  REQUIRE(back.groups.size() == part.groups.size());
  for (std::size_t i = 0; i < part.groups.size(); ++i) {
    CHECK(back.groups[i].members == part.groups[i].members);
    CHECK(back.groups[i].nodes == part.groups[i].nodes);
    CHECK(back.groups[i].ranking == part.groups[i].ranking);
    CHECK(back.groups[i].agony == part.groups[i].agony);
  }
  CHECK(partition_violations(ds.db, back).empty());
  CHECK(partition_to_json(back, ds.graph, ds.db, 9)["groups"] == doc["groups"]);
}

TEST_CASE("malformed partition documents") {
  auto ds = toy_dataset();
  auto part = sampling_partition(ds.db, PartitionParams{});
  Json doc = partition_to_json(part, ds.graph, ds.db, 0);
  Json bad = doc;
  bad["groups"][0]["entities"][0] = "nobody";
  CHECK_THROWS_AS(partition_from_json(bad, ds.graph, ds.db), InputError);
  bad = doc;
  bad["groups"][0]["ranking"] = Json::object();
  CHECK_THROWS_AS(partition_from_json(bad, ds.graph, ds.db), InputError);
  bad = doc;
  bad.erase("params");
  CHECK_THROWS_AS(partition_from_json(bad, ds.graph, ds.db), InputError);
}

TEST_CASE("json files carry a version") {
  auto dir = std::filesystem::temp_directory_path();
  auto path = dir / "cascade_io_version.json";
  write_json_file(path, Json{{"version", "0"}});
  CHECK_THROWS_AS(read_json_file(path), InputError);
  write_json_file(path, Json{{"version", kFormatVersion}, {"x", 1}});
  CHECK(read_json_file(path)["x"] == 1);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_json_file(dir / "cascade_io_absent.json"), InputError);
}

TEST_CASE("timing fields are stripped at any depth") {
  Json doc = {{"ms", 1.5}, {"a", {{"ms_learn", 2}, {"b", 3}}}, {"c", Json::array({{{"ms", 4}}})}};
  CHECK(without_timing(doc).dump() == R"({"a":{"b":3},"c":[{}]})");
}

TEST_CASE("ground truth json scores like the in-memory truth") {
  GeneratorConfig c;
  c.n = 60;
  c.delta = 0.1;
  c.k = 4;
  c.card_min = 6;
  c.card_max = 9;
  c.card_overlap = 4;
  c.observations = 200;
  c.seed = 3;
  auto truth = generate(c);
  TruthRecord rec = truth_from_json(Json::parse(ground_truth_to_json(truth).dump()));
  CHECK(rec.seed == 3);
  CHECK(rec.labels.size() == truth.db.size());
  CHECK(rec.causal.size() == truth.true_arcs().size());

  PartitionParams p;
  p.seed = 1;
  auto part = sampling_partition(truth.db, p);
  auto topo = learn_all(part, truth.db, {});
  Json learned = topologies_to_json(topo, truth.graph, {});
  for (Universe u : {Universe::kGroupPairs, Universe::kGroupSocial}) {
    auto named = score_arcs(rec, learned_arcs_from_json(learned), u, &truth.graph);
    std::vector<Arc> arcs;
    for (const auto& t : topo) arcs.insert(arcs.end(), t.selected.begin(), t.selected.end());
    auto direct = arc_accuracy(truth.true_arcs(), arcs,
                               u == Universe::kGroupPairs
                                   ? group_pair_universe(truth.groups)
                                   : group_social_universe(truth.groups, truth.graph.arcs));
    CHECK(named.tp == direct.tp);
    CHECK(named.tn == direct.tn);
    CHECK(named.fp == direct.fp);
    CHECK(named.fn == direct.fn);
  }
  auto assignment = partition_assignment(partition_to_json(part, truth.graph, truth.db, 1));
  std::vector<std::size_t> labels(truth.db.size());
  for (std::size_t g = 0; g < part.groups.size(); ++g) {
    for (EntityIndex e : part.groups[g].members) labels[e] = g;
  }
  CHECK(score_nmi(rec, assignment) == doctest::Approx(nmi(truth.labels, labels)));
  assignment.pop_back();
  CHECK_THROWS_AS(score_nmi(rec, assignment), InputError);
}
