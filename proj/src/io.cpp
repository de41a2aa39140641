#include "cascade/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

std::uint32_t lookup(const Interner& names, const std::string& name, const char* what) {
  auto index = names.find(name);
  if (!index) throw InputError(std::string("unknown ") + what + " '" + name + "'");
  return *index;
}

const Json& member(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return doc[key];
}

template <typename T>
T field(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

Json named_arc(const Interner& nodes, const Arc& a) {
  return Json::array({nodes.name(a.from), nodes.name(a.to)});
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || doc["version"] != kFormatVersion) {
    throw InputError("'" + path.string() + "' lacks format version " + kFormatVersion);
  }
  return doc;
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

Json without_timing(Json doc) {
  if (doc.is_object()) {
    Json out = Json::object();
    for (auto& [key, value] : doc.items()) {
      if (key.rfind("ms", 0) == 0) continue;
      out[key] = without_timing(value);
    }
    return out;
  }
  if (doc.is_array()) {
    for (auto& item : doc) item = without_timing(item);
  }
  return doc;
}

Json agony_to_json(const AgonyResult& result, const Interner& nodes) {
  Json ranking = Json::object();
  for (std::size_t v = 0; v < result.ranking.size(); ++v) {
    ranking[nodes.name(static_cast<std::uint32_t>(v))] = result.ranking[v];
  }
  return {{"version", kFormatVersion},
          {"agony", result.agony},
          {"exact", result.exact},
          {"ranking", ranking}};
}

Json params_to_json(const PartitionParams& p, PartitionAlgorithm algorithm, std::uint64_t seed) {
  const Expedients& x = p.expedients;
  Json budget = nullptr;
  if (x.agony_budget) {
    budget = std::chrono::duration<double, std::milli>(*x.agony_budget).count();
  }
  Json retries = nullptr;
  if (x.max_retries) retries = *x.max_retries;
  return {{"algorithm", to_string(algorithm)},
          {"eta", p.eta},
          {"max_size", p.max_size},
          {"alpha", p.alpha},
          {"seed", seed},
          {"expedients",
           {{"drop_isolated", x.drop_isolated},
            {"skip_disjoint_agony", x.skip_disjoint_agony},
            {"agony_budget", budget},
            {"beam_factor", x.beam_factor},
            {"retry_fallback", x.retry_fallback},
            {"max_retries", retries},
            {"flush_threshold", x.flush_threshold}}}};
}

Json partition_to_json(const GroupPartition& partition, const SocialGraph& graph,
                       const PropagationDb& db, std::uint64_t seed) {
  Json groups = Json::array();
  for (std::size_t i = 0; i < partition.groups.size(); ++i) {
    const Group& g = partition.groups[i];
    Json entities = Json::array();
    for (EntityIndex e : g.members) entities.push_back(db.entities.name(e));
    Json ranking = Json::object();
    for (std::size_t j = 0; j < g.nodes.size(); ++j) ranking[graph.nodes.name(g.nodes[j])] = g.ranking[j];
    groups.push_back({{"id", i},
                      {"entities", entities},
                      {"agony", g.agony},
                      {"exact", g.exact},
                      {"ranking", ranking},
                      {"connected", g.connected},
                      {"fallback", g.fallback}});
  }
  return {{"version", kFormatVersion},
          {"groups", groups},
          {"params", params_to_json(partition.params, partition.algorithm, seed)}};
}

GroupPartition partition_from_json(const Json& doc, const SocialGraph& graph,
                                   const PropagationDb& db) {
  GroupPartition out;
  const Json& params = member(doc, "params");
  out.algorithm = parse_algorithm(field<std::string>(params, "algorithm"));
  out.params.eta = field<std::int64_t>(params, "eta");
  out.params.max_size = field<std::size_t>(params, "max_size");
  out.params.alpha = field<double>(params, "alpha");
  for (const Json& item : member(doc, "groups")) {
    Group g;
    for (const auto& name : field<std::vector<std::string>>(item, "entities")) {
      g.members.push_back(lookup(db.entities, name, "entity"));
    }
    std::sort(g.members.begin(), g.members.end());
    auto u = union_graph(db, g.members);
    auto ranks = field<std::map<std::string, std::int64_t>>(item, "ranking");
    for (NodeIndex v : u.nodes) {
      auto it = ranks.find(graph.nodes.name(v));
      if (it == ranks.end()) {
        throw InputError("group " + std::to_string(out.groups.size()) + ": ranking misses node '" +
                         graph.nodes.name(v) + "'");
      }
      g.ranking.push_back(it->second);
    }
    if (ranks.size() != u.nodes.size()) {
      throw InputError("group " + std::to_string(out.groups.size()) +
                       ": ranking names nodes outside the group");
    }
    g.nodes = u.nodes;
    g.agony = field<std::int64_t>(item, "agony");
    g.exact = field<bool>(item, "exact");
    g.connected = item.value("connected", true);
    g.fallback = item.value("fallback", false);
    out.groups.push_back(std::move(g));
  }
  return out;
}

Json topologies_to_json(const std::vector<CausalTopology>& topologies, const SocialGraph& graph,
                        const LearnOptions& options) {
  const Interner& nodes = graph.nodes;
  Json groups = Json::array();
  for (const auto& t : topologies) {
    Json arcs = Json::array(), candidates = Json::array();
    for (const Arc& a : t.selected) arcs.push_back(named_arc(nodes, a));
    for (const Arc& a : t.candidates) candidates.push_back(named_arc(nodes, a));
    Json theta = Json::object();
    for (const auto& cpt : t.theta) {
      Json parents = Json::array();
      for (NodeIndex p : cpt.parents) parents.push_back(nodes.name(p));
      Json table = Json::object();
      for (const auto& [config, p] : cpt.p_active) table[config] = p;
      theta[nodes.name(cpt.node)] = {{"parents", parents}, {"p_active", table}, {"unseen", cpt.unseen}};
    }
    groups.push_back({{"id", t.group},
                      {"arcs", arcs},
                      {"candidates", candidates},
                      {"theta", theta},
                      {"ll", t.ll},
                      {"reg", t.reg},
                      {"score", t.score}});
  }
  return {{"version", kFormatVersion},
          {"criterion", to_string(options.criterion)},
          {"baseline", options.baseline},
          {"groups", groups}};
}

std::vector<NamedArc> learned_arcs_from_json(const Json& doc) {
  std::vector<NamedArc> out;
  for (const Json& g : member(doc, "groups")) {
    for (const auto& arc : field<std::vector<std::vector<std::string>>>(g, "arcs")) {
      if (arc.size() != 2) throw InputError("learned arc must name two nodes");
      out.emplace_back(arc[0], arc[1]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Json ground_truth_to_json(const GroundTruth& truth) {
  const GeneratorConfig& c = truth.config;
  const Interner& nodes = truth.graph.nodes;
  Json groups = Json::array(), causal = Json::array();
  for (std::size_t i = 0; i < truth.groups.size(); ++i) {
    Json members = Json::array();
    for (NodeIndex v : truth.groups[i]) members.push_back(nodes.name(v));
    groups.push_back(members);
    Json arcs = Json::array();
    for (const auto& a : truth.causal[i]) {
      arcs.push_back({{"from", nodes.name(a.from)}, {"to", nodes.name(a.to)}, {"p", a.p}});
    }
    causal.push_back({{"group", i}, {"density", truth.cause_density[i]}, {"arcs", arcs}});
  }
  Json labels = Json::object();
  for (std::size_t e = 0; e < truth.labels.size(); ++e) {
    labels[truth.db.entities.name(static_cast<EntityIndex>(e))] = truth.labels[e];
  }
  Json config = {{"n", c.n},
                 {"graph_model", to_string(c.model)},
                 {"symmetric", c.symmetric},
                 {"k", c.k},
                 {"card_min", c.card_min},
                 {"card_max", c.card_max},
                 {"card_overlap", c.card_overlap},
                 {"cause_min", c.cause_min},
                 {"cause_max", c.cause_max},
                 {"observations", c.observations},
                 {"noise", c.noise},
                 {"root_activation", c.root_activation}};
  return {{"version", kFormatVersion},
          {"seed", c.seed},
          {"config", config},
          {"delta", truth.delta},
          {"p_min", truth.p_min},
          {"p_max", truth.p_max},
          {"groups", groups},
          {"causal", causal},
          {"labels", labels},
          {"corrupted", truth.corrupted},
          {"warnings", truth.warnings}};
}

TruthRecord truth_from_json(const Json& doc) {
  TruthRecord t;
  t.seed = field<std::uint64_t>(doc, "seed");
  const Json& config = member(doc, "config");
  t.graph_model = field<std::string>(config, "graph_model");
  t.noise = field<double>(config, "noise");
  t.delta = field<double>(doc, "delta");
  t.groups = field<std::vector<std::vector<std::string>>>(doc, "groups");
  for (const Json& g : member(doc, "causal")) {
    for (const Json& a : member(g, "arcs")) {
      t.causal.emplace_back(field<std::string>(a, "from"), field<std::string>(a, "to"));
    }
  }
  std::sort(t.causal.begin(), t.causal.end());
  t.causal.erase(std::unique(t.causal.begin(), t.causal.end()), t.causal.end());
  for (auto& [entity, label] : member(doc, "labels").items()) {
    t.labels.emplace_back(entity, label.get<std::size_t>());
  }
  return t;
}

std::vector<std::pair<std::string, std::size_t>> partition_assignment(const Json& doc) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const Json& g : member(doc, "groups")) {
    auto id = field<std::size_t>(g, "id");
    for (const auto& e : field<std::vector<std::string>>(g, "entities")) out.emplace_back(e, id);
  }
  return out;
}

ConfusionCounts score_arcs(const TruthRecord& truth, const std::vector<NamedArc>& learned,
                           Universe universe, const SocialGraph* social) {
  Interner names;
  std::vector<std::vector<NodeIndex>> groups;
  for (const auto& g : truth.groups) {
    std::vector<NodeIndex> members;
    for (const auto& v : g) members.push_back(names.intern(v));
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }
  auto to_arcs = [&](const std::vector<NamedArc>& named, const char* what) {
    std::vector<Arc> out;
    for (const auto& [u, v] : named) out.push_back({lookup(names, u, what), lookup(names, v, what)});
    return out;
  };
  std::vector<Arc> universe_arcs;
  if (universe == Universe::kGroupPairs) {
    universe_arcs = group_pair_universe(groups);
  } else {
    if (!social) throw InputError("the group-social universe needs the social graph");
    std::vector<Arc> arcs;
    for (const Arc& a : social->arcs.arcs()) {
      auto u = names.find(social->nodes.name(a.from));
      auto v = names.find(social->nodes.name(a.to));
      if (u && v) arcs.push_back({*u, *v});
    }
    universe_arcs = group_social_universe(groups, Digraph(names.size(), arcs));
  }
  try {
    return arc_accuracy(to_arcs(truth.causal, "causal node"), to_arcs(learned, "learned node"),
                        universe_arcs);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

double score_nmi(const TruthRecord& truth,
                 const std::vector<std::pair<std::string, std::size_t>>& assignment) {
  std::map<std::string, std::size_t> assigned(assignment.begin(), assignment.end());
  if (assigned.size() != truth.labels.size()) {
    throw InputError("partition covers " + std::to_string(assigned.size()) + " entities, truth has " +
                     std::to_string(truth.labels.size()));
  }
  std::vector<std::size_t> a, b;
  for (const auto& [entity, label] : truth.labels) {
    auto it = assigned.find(entity);
    if (it == assigned.end()) throw InputError("partition misses entity '" + entity + "'");
    a.push_back(label);
    b.push_back(it->second);
  }
  return nmi(a, b);
}

Json confusion_to_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}, {"accuracy", c.accuracy()}};
}

}  // namespace cascade
