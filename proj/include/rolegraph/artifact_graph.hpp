#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rolegraph/ingest.hpp"

namespace rolegraph {

/// A vertex is identified by its layer and its field value.
struct VertexKey {
  std::string layer;
  std::string value;

  auto operator<=>(const VertexKey&) const = default;
  bool operator==(const VertexKey&) const = default;
};

std::string to_string(const VertexKey& key);  // "layer:value"

struct Edge {
  std::size_t u = 0;  // u < v
  std::size_t v = 0;
  std::int64_t weight = 0;

  bool operator==(const Edge&) const = default;
};

/// Undirected multilayer weighted graph of alert field values. Vertices are
/// stored sorted by (layer, value) and edges sorted by (u, v), so two builds
/// over the same records compare equal regardless of record order.
class ArtifactGraph {
 public:
  ArtifactGraph() = default;

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<VertexKey>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<std::string> layers() const;

  std::optional<std::size_t> find(const VertexKey& key) const;
  // Order-insensitive; 0 when the pair is not adjacent.
  std::int64_t weight(std::size_t a, std::size_t b) const;

  // Adjacency: neighbor index and edge weight, sorted by neighbor.
  std::span<const std::pair<std::size_t, std::int64_t>> neighbors(std::size_t v) const {
    return adjacency_[v];
  }
  std::size_t degree(std::size_t v) const { return adjacency_[v].size(); }

  bool operator==(const ArtifactGraph& other) const {
    return vertices_ == other.vertices_ && edges_ == other.edges_;
  }

  // Explicit construction, mainly for tests. Parallel entries are summed.
  static ArtifactGraph from_edges(
      const std::vector<std::tuple<VertexKey, VertexKey, std::int64_t>>& edges,
      std::vector<VertexKey> extra_vertices = {});

 private:
  // `vertices` sorted and unique, edge endpoints index into it with u < v.
  static ArtifactGraph from_sorted(std::vector<VertexKey> vertices, std::vector<Edge> edges);

  friend ArtifactGraph build_graph(std::span<const AlertRecord> records);

  std::vector<VertexKey> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> adjacency_;
};

/// Builds the co-occurrence graph of a record set. Each unordered pair of
/// fields with distinct keys adds one to the weight between their vertices;
/// pairs that resolve to the same vertex are skipped.
ArtifactGraph build_graph(std::span<const AlertRecord> records);

struct GraphSummary {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::int64_t total_weight = 0;
  std::map<std::string, std::size_t> per_layer;

  bool operator==(const GraphSummary&) const = default;
};

GraphSummary graph_summary(const ArtifactGraph& g);

void write_dot(const ArtifactGraph& g, std::ostream& out);
// "layer_u\tvalue_u\tlayer_v\tvalue_v\tweight" per edge.
void write_edge_list(const ArtifactGraph& g, std::ostream& out);

}  // namespace rolegraph
