#include "cascade/propagation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::uint32_t Interner::intern(std::string_view id) {
  std::string key(id);
  auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(names_.size()));
  if (inserted) names_.push_back(std::move(key));
  return it->second;
}

std::optional<std::uint32_t> Interner::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeIndex> PropagationDag::nodes() const {
  std::vector<NodeIndex> out;
  out.reserve(activations.size());
  for (const auto& a : activations) out.push_back(a.node);
  std::sort(out.begin(), out.end());
  return out;
}

SocialGraph read_graph(std::istream& in, std::vector<std::string>* warnings) {
  SocialGraph g;
  std::vector<Arc> arcs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::istringstream fields{std::string(view)};
    std::string u, v, extra;
    if (!(fields >> u >> v) || (fields >> extra)) {
      throw InputError("graph line " + std::to_string(line_no) +
                       ": expected exactly two node ids");
    }
    NodeIndex a = g.nodes.intern(u);
    NodeIndex b = g.nodes.intern(v);
    if (a == b) {
      if (warnings) {
        warnings->push_back("graph line " + std::to_string(line_no) +
                            ": self-loop on '" + u + "' dropped");
      }
      continue;
    }
    arcs.push_back({a, b});
  }
  std::size_t before = arcs.size();
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  if (warnings && arcs.size() != before) {
    warnings->push_back(std::to_string(before - arcs.size()) +
                        " duplicate graph arc(s) collapsed");
  }
  g.arcs = Digraph(g.nodes.size(), std::move(arcs));
  return g;
}

SocialGraph read_graph_file(const std::filesystem::path& path,
                            std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file: " + path.string());
  return read_graph(in, warnings);
}

PropagationDag derive_dag(EntityIndex entity, std::vector<Activation> activations,
                          const Digraph& graph) {
  PropagationDag dag;
  dag.entity = entity;
  std::sort(activations.begin(), activations.end(),
            [](const Activation& a, const Activation& b) {
              return std::tie(a.time, a.node) < std::tie(b.time, b.node);
            });
  std::unordered_map<NodeIndex, Timestamp> time_of;
  time_of.reserve(activations.size());
  for (const auto& a : activations) time_of.emplace(a.node, a.time);
  for (const auto& a : activations) {
    for (NodeIndex w : graph.out(a.node)) {
      auto it = time_of.find(w);
      if (it != time_of.end() && a.time < it->second) dag.arcs.push_back({a.node, w});
    }
  }
  std::sort(dag.arcs.begin(), dag.arcs.end());
  dag.activations = std::move(activations);
  return dag;
}

PropagationDb build_db(const Digraph& graph, Interner entities,
                       const std::vector<std::vector<Activation>>& traces) {
  PropagationDb db;
  db.entities = std::move(entities);
  db.dags.reserve(traces.size());
  for (std::size_t e = 0; e < traces.size(); ++e) {
    db.dags.push_back(derive_dag(static_cast<EntityIndex>(e), traces[e], graph));
  }
  return db;
}

Dataset ingest(std::istream& observations, SocialGraph graph) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  Interner entities;
  // per entity: node -> (earliest time)
  std::vector<std::map<NodeIndex, Timestamp>> traces;

  while (std::getline(observations, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    auto fields = split_csv(view);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "node" || fields[1] != "entity" ||
          fields[2] != "time") {
        throw InputError("observations line " + std::to_string(line_no) +
                         ": expected header 'node,entity,time'");
      }
      header_seen = true;
      continue;
    }
    auto where = [&] { return "observations line " + std::to_string(line_no) + ": "; };
    if (fields.size() != 3) throw InputError(where() + "expected 3 fields");
    auto node = graph.nodes.find(fields[0]);
    if (!node) {
      throw InputError(where() + "unknown node '" + std::string(fields[0]) + "'");
    }
    Timestamp time = 0;
    auto tf = fields[2];
    auto [ptr, ec] = std::from_chars(tf.data(), tf.data() + tf.size(), time);
    if (tf.empty() || ec != std::errc() || ptr != tf.data() + tf.size()) {
      throw InputError(where() + "time '" + std::string(tf) +
                       "' is not a non-negative integer");
    }
    if (fields[1].empty()) throw InputError(where() + "empty entity id");
    EntityIndex e = entities.intern(fields[1]);
    if (e >= traces.size()) traces.resize(e + 1);
    auto [it, inserted] = traces[e].try_emplace(*node, time);
    if (!inserted) {
      ds.warnings.push_back(where() + "duplicate observation of '" +
                            std::string(fields[1]) + "' at '" + std::string(fields[0]) +
                            "', keeping the earliest");
      it->second = std::min(it->second, time);
    }
  }
  if (!header_seen || traces.empty()) {
    throw InputError("observations: empty propagation database");
  }

  std::vector<std::vector<Activation>> acts(traces.size());
  for (std::size_t e = 0; e < traces.size(); ++e) {
    for (auto [node, time] : traces[e]) acts[e].push_back({node, time});
  }
  ds.db = build_db(graph.arcs, std::move(entities), acts);
  ds.graph = std::move(graph);
  return ds;
}

Dataset ingest_files(const std::filesystem::path& observations,
                     const std::filesystem::path& graph) {
  std::vector<std::string> warnings;
  SocialGraph g = read_graph_file(graph, &warnings);
  std::ifstream in(observations);
  if (!in) throw InputError("cannot open observations file: " + observations.string());
  Dataset ds = ingest(in, std::move(g));
  ds.warnings.insert(ds.warnings.begin(), warnings.begin(), warnings.end());
  return ds;
}

void write_graph(std::ostream& out, const SocialGraph& graph) {
  for (const Arc& a : graph.arcs.arcs()) {
    out << graph.nodes.name(a.from) << ' ' << graph.nodes.name(a.to) << '\n';
  }
}

void write_observations(std::ostream& out, const SocialGraph& graph,
                        const PropagationDb& db) {
  out << "node,entity,time\n";
  for (const auto& dag : db.dags) {
    for (const auto& a : dag.activations) {
      out << graph.nodes.name(a.node) << ',' << db.entities.name(dag.entity) << ','
          << a.time << '\n';
    }
  }
}

std::optional<NodeIndex> UnionGraph::local(NodeIndex global) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), global);
  if (it == nodes.end() || *it != global) return std::nullopt;
  return static_cast<NodeIndex>(it - nodes.begin());
}

std::vector<Arc> UnionGraph::global_arcs() const {
  std::vector<Arc> out;
  out.reserve(graph.num_arcs());
  for (const Arc& a : graph.arcs()) out.push_back({nodes[a.from], nodes[a.to]});
  return out;
}

UnionGraph union_graph(const PropagationDb& db, std::span<const EntityIndex> group) {
  if (group.empty()) throw std::invalid_argument("union_graph: empty group");
  UnionGraph u;
  u.members.assign(group.begin(), group.end());
  std::sort(u.members.begin(), u.members.end());
  for (EntityIndex e : u.members) {
    for (const auto& a : db.dags.at(e).activations) u.nodes.push_back(a.node);
  }
  std::sort(u.nodes.begin(), u.nodes.end());
  u.nodes.erase(std::unique(u.nodes.begin(), u.nodes.end()), u.nodes.end());
  std::vector<Arc> arcs;
  for (EntityIndex e : u.members) {
    for (const Arc& a : db.dags[e].arcs) arcs.push_back({*u.local(a.from), *u.local(a.to)});
  }
  u.graph = Digraph(u.nodes.size(), std::move(arcs));
  return u;
}

}  // namespace cascade
