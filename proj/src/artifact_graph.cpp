#include "rolegraph/artifact_graph.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "rolegraph/error.hpp"

namespace rolegraph {

std::string to_string(const VertexKey& key) { return key.layer + ":" + key.value; }

std::vector<std::string> ArtifactGraph::layers() const {
  std::set<std::string> names;
  for (const auto& v : vertices_) names.insert(v.layer);
  return {names.begin(), names.end()};
}

std::optional<std::size_t> ArtifactGraph::find(const VertexKey& key) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), key);
  if (it == vertices_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - vertices_.begin());
}

std::int64_t ArtifactGraph::weight(std::size_t a, std::size_t b) const {
  const auto& adj = adjacency_[a];
  auto it = std::lower_bound(adj.begin(), adj.end(), b,
                             [](const auto& entry, std::size_t target) { return entry.first < target; });
  return (it != adj.end() && it->first == b) ? it->second : 0;
}

ArtifactGraph ArtifactGraph::from_sorted(std::vector<VertexKey> vertices, std::vector<Edge> edges) {
  ArtifactGraph g;
  g.vertices_ = std::move(vertices);
  g.adjacency_.resize(g.vertices_.size());
  g.edges_ = std::move(edges);
  std::sort(g.edges_.begin(), g.edges_.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
  for (const auto& e : g.edges_) {
    g.adjacency_[e.u].emplace_back(e.v, e.weight);
    g.adjacency_[e.v].emplace_back(e.u, e.weight);
  }
  for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());
  return g;
}

ArtifactGraph ArtifactGraph::from_edges(
    const std::vector<std::tuple<VertexKey, VertexKey, std::int64_t>>& edges,
    std::vector<VertexKey> extra_vertices) {
  for (const auto& [a, b, w] : edges) {
    extra_vertices.push_back(a);
    extra_vertices.push_back(b);
  }
  std::sort(extra_vertices.begin(), extra_vertices.end());
  extra_vertices.erase(std::unique(extra_vertices.begin(), extra_vertices.end()),
                       extra_vertices.end());
  auto index = [&](const VertexKey& k) {
    return static_cast<std::size_t>(
        std::lower_bound(extra_vertices.begin(), extra_vertices.end(), k) - extra_vertices.begin());
  };
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> merged;
  for (const auto& [a, b, w] : edges) {
    auto u = index(a);
    auto v = index(b);
    if (u == v) throw Error(ErrorCode::InvalidArgument, "self-loop in edge list");
    if (w <= 0) throw Error(ErrorCode::InvalidArgument, "edge weight must be positive");
    if (u > v) std::swap(u, v);
    merged[{u, v}] += w;
  }
  std::vector<Edge> out;
  for (const auto& [uv, w] : merged) out.push_back({uv.first, uv.second, w});
  return from_sorted(std::move(extra_vertices), std::move(out));
}

ArtifactGraph build_graph(std::span<const AlertRecord> records) {
  // Intern vertices first, then remap to the canonical sorted order.
  std::map<VertexKey, std::size_t> ids;
  std::unordered_map<std::uint64_t, std::int64_t> weights;

  std::vector<std::pair<const std::string*, std::size_t>> fields;
  for (const auto& record : records) {
    fields.clear();
    for (const auto& [key, value] : record.fields) {
      auto [it, inserted] = ids.try_emplace(VertexKey{layer_of(key), value}, ids.size());
      fields.emplace_back(&key, it->second);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      for (std::size_t j = i + 1; j < fields.size(); ++j) {
        if (*fields[i].first == *fields[j].first) continue;
        auto a = fields[i].second;
        auto b = fields[j].second;
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        ++weights[(static_cast<std::uint64_t>(a) << 32) | b];
      }
    }
  }

  std::vector<std::size_t> rank(ids.size());
  std::vector<VertexKey> vertices;
  vertices.reserve(ids.size());
  for (const auto& [key, id] : ids) {
    rank[id] = vertices.size();
    vertices.push_back(key);
  }
  std::vector<Edge> edges;
  edges.reserve(weights.size());
  for (const auto& [packed, w] : weights) {
    auto a = rank[packed >> 32];
    auto b = rank[packed & 0xffffffffu];
    if (a > b) std::swap(a, b);
    edges.push_back({a, b, w});
  }
  return ArtifactGraph::from_sorted(std::move(vertices), std::move(edges));
}

GraphSummary graph_summary(const ArtifactGraph& g) {
  GraphSummary s;
  s.node_count = g.vertex_count();
  s.edge_count = g.edge_count();
  for (const auto& e : g.edges()) s.total_weight += e.weight;
  for (const auto& v : g.vertices()) ++s.per_layer[v.layer];
  return s;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

void write_dot(const ArtifactGraph& g, std::ostream& out) {
  out << "graph artifacts {\n";
  for (std::size_t i = 0; i < g.vertex_count(); ++i) {
    const auto& v = g.vertices()[i];
    out << "  n" << i << " [label=\"" << dot_escape(v.value) << "\", layer=\""
        << dot_escape(v.layer) << "\"];\n";
  }
  for (const auto& e : g.edges()) {
    out << "  n" << e.u << " -- n" << e.v << " [weight=" << e.weight << "];\n";
  }
  out << "}\n";
}

void write_edge_list(const ArtifactGraph& g, std::ostream& out) {
  for (const auto& e : g.edges()) {
    const auto& a = g.vertices()[e.u];
    const auto& b = g.vertices()[e.v];
    out << a.layer << '\t' << a.value << '\t' << b.layer << '\t' << b.value << '\t' << e.weight
        << '\n';
  }
}

}  // namespace rolegraph
