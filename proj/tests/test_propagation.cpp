#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "cascade/errors.hpp"
#include "cascade/propagation.hpp"
#include "fixtures.hpp"

using namespace cascade;

namespace {

SocialGraph graph_from(const char* text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return read_graph(in, warnings);
}

Dataset ingest_text(const char* graph, const std::string& observations) {
  std::istringstream in(observations);
  return ingest(in, graph_from(graph));
}

std::vector<std::pair<std::string, std::string>> named_arcs(const SocialGraph& g,
                                                            const std::vector<Arc>& arcs) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Arc& a : arcs) out.emplace_back(g.nodes.name(a.from), g.nodes.name(a.to));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("graph reader collapses duplicates and drops self-loops") {
  std::vector<std::string> warnings;
  auto g = graph_from("# c\na b\na b\nb b\n\nb c\n", &warnings);
  CHECK(g.nodes.size() == 3);
  CHECK(g.arcs.num_arcs() == 2);
  CHECK(warnings.size() == 2);
  std::istringstream bad("a\n");
  CHECK_THROWS_AS(read_graph(bad), InputError);
}

TEST_CASE("toy dag of phi1") {
  auto ds = cascade::testing::toy_dataset();
  REQUIRE(ds.db.size() == 3);
  const auto& g = ds.graph;
  using P = std::vector<std::pair<std::string, std::string>>;
  CHECK(named_arcs(g, ds.db.dags[0].arcs) == P{{"v2", "v3"}, {"v2", "v4"}, {"v3", "v4"}, {"v4", "v5"}});
  for (const auto& dag : ds.db.dags) {
    CHECK(is_acyclic(Digraph(g.nodes.size(), dag.arcs)));
    for (const Arc& a : dag.arcs) {
      CHECK(g.arcs.has_arc(a.from, a.to));
    }
  }
}

TEST_CASE("duplicate observations keep the earliest time") {
  auto ds = ingest_text("v w\n", "node,entity,time\nv,phi,9\nv,phi,3\nw,phi,5\n");
  const auto& acts = ds.db.dags[0].activations;
  REQUIRE(acts.size() == 2);
  CHECK(acts[0].time == 3);
  CHECK(ds.db.dags[0].arcs.size() == 1);
  CHECK(ds.warnings.size() == 1);
}

TEST_CASE("single observation gives an isolated node") {
  auto ds = ingest_text("v w\n", "node,entity,time\nw,phi,4\n");
  CHECK(ds.db.dags[0].activations.size() == 1);
  CHECK(ds.db.dags[0].arcs.empty());
}

TEST_CASE("ingest errors name the line") {
  const char* g = "v w\n";
  auto message = [&](const std::string& obs) {
    try {
      ingest_text(g, obs);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("node,entity,time\nv,a,1\nx,a,2\n").find("line 3") != std::string::npos);
  CHECK(message("node,entity,time\nv,a,1.5\n").find("line 2") != std::string::npos);
  CHECK(message("node,entity,time\nv,a,-1\n").find("line 2") != std::string::npos);
  CHECK_FALSE(message("node,entity,time\n").empty());
  CHECK_FALSE(message("").empty());
  CHECK_FALSE(message("a,b,c\nv,a,1\n").empty());
  CHECK(message("node,entity,time\nv,a,0\nw,a,1\n").empty());
}

TEST_CASE("derive_dag uses strict time order") {
  // u->v, v->w, u->w, w->u
  Digraph g(3, {{0, 1}, {1, 2}, {0, 2}, {2, 0}});
  auto chain = derive_dag(0, {{0, 1}, {1, 2}, {2, 3}}, g);
  CHECK(chain.arcs == std::vector<Arc>{{0, 1}, {0, 2}, {1, 2}});
  auto tie = derive_dag(0, {{0, 5}, {1, 5}}, g);
  CHECK(tie.arcs.empty());
  auto reversed = derive_dag(0, {{1, 1}, {0, 2}}, g);
  CHECK(reversed.arcs.empty());
}

TEST_CASE("union graph examples") {
  auto ds = cascade::testing::toy_dataset();
  auto both = union_graph(ds.db, std::vector<EntityIndex>{0, 1});
  CHECK_FALSE(is_acyclic(both.graph));
  CHECK(is_weakly_connected(both));
  auto v3 = *ds.graph.nodes.find("v3");
  auto v4 = *ds.graph.nodes.find("v4");
  auto arcs = both.global_arcs();
  CHECK(std::count(arcs.begin(), arcs.end(), Arc{v3, v4}) == 1);
  auto single = union_graph(ds.db, std::vector<EntityIndex>{2});
  CHECK(is_acyclic(single.graph));
  CHECK_THROWS_AS(union_graph(ds.db, std::vector<EntityIndex>{}), std::invalid_argument);

  auto disjoint = ingest_text("a b\nc d\n", "node,entity,time\na,x,1\nb,x,2\nc,y,1\nd,y,2\n");
  auto u = union_graph(disjoint.db, std::vector<EntityIndex>{0, 1});
  auto label = weak_components(u.graph);
  CHECK(*std::max_element(label.begin(), label.end()) == 1);
  CHECK_FALSE(is_weakly_connected(u));
}

TEST_CASE("weak connectivity examples") {
  CHECK(is_weakly_connected(Digraph(2, {{0, 1}, {1, 0}})));
  CHECK_FALSE(is_weakly_connected(Digraph(4, {{0, 1}, {2, 3}})));
  CHECK(is_weakly_connected(Digraph(1)));
}

TEST_CASE("union is monotone in the group") {
  auto ds = cascade::testing::toy_dataset();
  std::vector<std::vector<EntityIndex>> subsets{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  for (const auto& small : subsets) {
    for (const auto& big : subsets) {
      if (!std::includes(big.begin(), big.end(), small.begin(), small.end())) continue;
      auto a = union_graph(ds.db, small);
      auto b = union_graph(ds.db, big);
      CHECK(std::includes(b.nodes.begin(), b.nodes.end(), a.nodes.begin(), a.nodes.end()));
      auto aa = a.global_arcs(), ba = b.global_arcs();
      CHECK(std::includes(ba.begin(), ba.end(), aa.begin(), aa.end()));
    }
  }
}

TEST_CASE("serialization round trip") {
  auto ds = cascade::testing::toy_dataset();
  std::ostringstream g, o;
  write_graph(g, ds.graph);
  write_observations(o, ds.graph, ds.db);
  std::istringstream gi(g.str()), oi(o.str());
  auto back = ingest(oi, read_graph(gi));
  REQUIRE(back.db.size() == ds.db.size());
  CHECK(back.graph.nodes.size() == ds.graph.nodes.size());
  CHECK(named_arcs(back.graph, back.graph.arcs.arcs()) == named_arcs(ds.graph, ds.graph.arcs.arcs()));
  for (EntityIndex e = 0; e < ds.db.size(); ++e) {
    CHECK(back.db.entities.name(e) == ds.db.entities.name(e));
    CHECK(named_arcs(back.graph, back.db.dags[e].arcs) == named_arcs(ds.graph, ds.db.dags[e].arcs));
    CHECK(back.db.dags[e].activations.size() == ds.db.dags[e].activations.size());
  }
}
