#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cascade/graph.hpp"

namespace cascade {

using EntityIndex = std::uint32_t;
using Timestamp = std::uint64_t;

// Bijection between external string ids and dense indices 0..size()-1,
// assigned in order of first appearance.
class Interner {
 public:
  std::uint32_t intern(std::string_view id);
  std::optional<std::uint32_t> find(std::string_view id) const;
  const std::string& name(std::uint32_t index) const { return names_.at(index); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct SocialGraph {
  Interner nodes;
  Digraph arcs;
};

struct Observation {
  NodeIndex node = 0;
  EntityIndex entity = 0;
  Timestamp time = 0;
};

struct Activation {
  NodeIndex node = 0;
  Timestamp time = 0;

  friend auto operator<=>(const Activation&, const Activation&) = default;
};

// The DAG one entity's trace induces on the social graph. The dummy source
// (time 0) is implicit: first activations simply have no incoming arc.
struct PropagationDag {
  EntityIndex entity = 0;
  std::vector<Activation> activations;  // sorted by (time, node)
  std::vector<Arc> arcs;                // global node indices, sorted

  std::vector<NodeIndex> nodes() const;  // sorted
};

// One dag per entity, dags[e].entity == e.
struct PropagationDb {
  Interner entities;
  std::vector<PropagationDag> dags;

  std::size_t size() const { return dags.size(); }
};

struct Dataset {
  SocialGraph graph;
  PropagationDb db;
  std::vector<std::string> warnings;
};

// Edge list `u v` per line, '#' comments. Duplicate arcs collapse and
// self-loops are dropped, both with a warning.
SocialGraph read_graph(std::istream& in, std::vector<std::string>* warnings = nullptr);
SocialGraph read_graph_file(const std::filesystem::path& path,
                            std::vector<std::string>* warnings = nullptr);

// CSV with header `node,entity,time`. Throws InputError on unknown nodes,
// malformed times, or an empty result.
Dataset ingest(std::istream& observations, SocialGraph graph);
Dataset ingest_files(const std::filesystem::path& observations,
                     const std::filesystem::path& graph);

// Arcs of `graph` between activated nodes with strictly increasing times.
PropagationDag derive_dag(EntityIndex entity, std::vector<Activation> activations,
                          const Digraph& graph);

PropagationDb build_db(const Digraph& graph, Interner entities,
                       const std::vector<std::vector<Activation>>& traces);

void write_graph(std::ostream& out, const SocialGraph& graph);
void write_observations(std::ostream& out, const SocialGraph& graph,
                        const PropagationDb& db);

// Union of member dags over the nodes they touch. Local index i of `graph`
// corresponds to global node `nodes[i]`.
struct UnionGraph {
  std::vector<NodeIndex> nodes;  // sorted global indices
  Digraph graph;
  std::vector<EntityIndex> members;

  std::optional<NodeIndex> local(NodeIndex global) const;
  std::vector<Arc> global_arcs() const;
};

UnionGraph union_graph(const PropagationDb& db, std::span<const EntityIndex> group);

inline bool is_weakly_connected(const UnionGraph& g) {
  return is_weakly_connected(g.graph);
}

}  // namespace cascade
