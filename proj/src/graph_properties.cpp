#include "rolegraph/graph_properties.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "rolegraph/error.hpp"
#include "rolegraph/features.hpp"

namespace rolegraph {

const std::vector<std::string>& node_property_names() {
  static const std::vector<std::string> names = {"degree",      "weighted_degree", "pagerank",
                                                 "transitivity", "diversity",       "eccentricity",
                                                 "betweenness"};
  return names;
}

Eigen::VectorXd pagerank(const ArtifactGraph& g, double damping, double tol, int max_iter) {
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  if (n == 0) return {};
  std::vector<double> strength(static_cast<std::size_t>(n), 0.0);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    for (const auto& [u, w] : g.neighbors(v)) strength[v] += static_cast<double>(w);
  }
  Eigen::VectorXd rank = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    double dangling = 0.0;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      const double mass = rank(static_cast<Eigen::Index>(v));
      if (strength[v] == 0.0) {
        dangling += mass;
        continue;
      }
      for (const auto& [u, w] : g.neighbors(v)) {
        next(static_cast<Eigen::Index>(u)) += mass * static_cast<double>(w) / strength[v];
      }
    }
    next = damping * next;
    next.array() += (damping * dangling + (1.0 - damping)) / static_cast<double>(n);
    const double change = (next - rank).lpNorm<1>();
    rank = std::move(next);
    if (change < tol) break;
  }
  return rank / rank.sum();
}

Eigen::VectorXd betweenness(const ArtifactGraph& g) {
  const std::size_t n = g.vertex_count();
  Eigen::VectorXd cb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<double> sigma(n);
  std::vector<long> dist(n);
  std::vector<double> delta(n);
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      preds[i].clear();
      sigma[i] = 0.0;
      dist[i] = -1;
      delta[i] = 0.0;
    }
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      order.push_back(v);
      for (const auto& [w, wt] : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      auto w = *it;
      for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb(static_cast<Eigen::Index>(w)) += delta[w];
    }
  }
  return cb / 2.0;
}

Eigen::VectorXd eccentricity(const ArtifactGraph& g) {
  const std::size_t n = g.vertex_count();
  Eigen::VectorXd ecc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<long> dist(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    long far = 0;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      far = std::max(far, dist[v]);
      for (const auto& [w, wt] : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
      }
    }
    ecc(static_cast<Eigen::Index>(s)) = static_cast<double>(far);
  }
  return ecc;
}

Eigen::VectorXd layer_diversity(const ArtifactGraph& g) {
  const std::size_t n = g.vertex_count();
  Eigen::VectorXd div = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const auto layer_count = g.layers().size();
  if (layer_count < 2) return div;
  const double norm = std::log(static_cast<double>(layer_count));
  for (std::size_t v = 0; v < n; ++v) {
    std::map<std::string, double> by_layer;
    double total = 0.0;
    for (const auto& [u, w] : g.neighbors(v)) {
      by_layer[g.vertices()[u].layer] += static_cast<double>(w);
      total += static_cast<double>(w);
    }
    if (total <= 0.0) continue;
    double h = 0.0;
    for (const auto& [layer, w] : by_layer) {
      const double p = w / total;
      if (p > 0.0) h -= p * std::log(p);
    }
    div(static_cast<Eigen::Index>(v)) = std::clamp(h / norm, 0.0, 1.0);
  }
  return div;
}

Eigen::MatrixXd node_properties(const ArtifactGraph& g) {
  if (g.vertex_count() == 0) throw Error(ErrorCode::EmptyGraph, "node_properties: empty graph");
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  Eigen::MatrixXd primaries = primary_features(g);
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(node_property_names().size()));
  for (Eigen::Index v = 0; v < n; ++v) m(v, 0) = static_cast<double>(g.degree(static_cast<std::size_t>(v)));
  m.col(1) = primaries.col(static_cast<int>(PrimaryFeature::WeightedDegree));
  m.col(2) = pagerank(g);
  m.col(3) = primaries.col(static_cast<int>(PrimaryFeature::Transitivity));
  m.col(4) = layer_diversity(g);
  m.col(5) = eccentricity(g);
  m.col(6) = betweenness(g);
  return m;
}

}  // namespace rolegraph
