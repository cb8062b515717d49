#include <doctest.h>

#include <limits>
#include <queue>
#include <random>

#include "planted.hpp"
#include "rolegraph/error.hpp"
#include "rolegraph/graph_properties.hpp"
#include "rolegraph/roles.hpp"

using namespace rolegraph;

namespace {

VertexKey ip(const std::string& v) { return {"ip", v}; }

ArtifactGraph star(int leaves) {
  std::vector<std::tuple<VertexKey, VertexKey, std::int64_t>> e;
  for (int i = 0; i < leaves; ++i) e.emplace_back(ip("hub"), ip("leaf" + std::to_string(i)), 1);
  return ArtifactGraph::from_edges(e);
}

// Counts, for every ordered pair (s, t), the fraction of shortest s-t paths
// through each vertex by explicit path enumeration.
Eigen::VectorXd betweenness_bruteforce(const ArtifactGraph& g) {
  const auto n = g.vertex_count();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    std::queue<std::size_t> q;
    dist[s][s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      for (const auto& [u, w] : g.neighbors(v)) {
        if (dist[s][u] < 0) {
          dist[s][u] = dist[s][v] + 1;
          q.push(u);
        }
      }
    }
  }
  auto paths = [&](std::size_t s, std::size_t t) {
    // sigma via DP over distance layers
    std::vector<double> sigma(n, 0.0);
    sigma[s] = 1;
    for (int d = 1; d <= dist[s][t]; ++d) {
      for (std::size_t v = 0; v < n; ++v) {
        if (dist[s][v] != d) continue;
        for (const auto& [u, w] : g.neighbors(v)) {
          if (dist[s][u] == d - 1) sigma[v] += sigma[u];
        }
      }
    }
    return sigma[t];
  };
  Eigen::VectorXd cb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      if (dist[s][t] <= 0) continue;
      const double total = paths(s, t);
      for (std::size_t v = 0; v < n; ++v) {
        if (v == s || v == t || dist[s][v] < 0 || dist[v][t] < 0) continue;
        if (dist[s][v] + dist[v][t] != dist[s][t]) continue;
        cb(static_cast<Eigen::Index>(v)) += paths(s, v) * paths(v, t) / total;
      }
    }
  }
  return cb;
}

ArtifactGraph random_graph(std::uint64_t seed, int n, double p) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(p);
  std::vector<std::tuple<VertexKey, VertexKey, std::int64_t>> edges;
  std::vector<VertexKey> all;
  for (int i = 0; i < n; ++i) all.push_back(ip("n" + std::to_string(i)));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (edge(rng)) edges.emplace_back(all[i], all[j], 1 + static_cast<std::int64_t>(rng() % 4));
    }
  }
  return ArtifactGraph::from_edges(edges, all);
}

Eigen::MatrixXd row_normalized(Eigen::MatrixXd G) {
  for (Eigen::Index i = 0; i < G.rows(); ++i) G.row(i) /= G.row(i).sum();
  return G;
}

}  // namespace

TEST_CASE("select_model recovers planted roles") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = planted::make(seed);
    auto sel = select_model(p.V, {}, seed);
    hits += sel.num_roles == 3;
  }
  CHECK(hits >= 18);
}

TEST_CASE("rank one data selects one role") {
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(30, 1.0, 5.0);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::LinSpaced(12, 2.0, 9.0);
  Eigen::MatrixXd V = a * b;
  auto sel = select_model(V, {}, 1);
  CHECK(sel.num_roles == 1);
}

TEST_CASE("grid is complete and its minimum is the selection") {
  auto p = planted::make(3);
  SelectOptions opts;
  opts.r_max = 6;
  opts.b_max = 4;
  auto sel = select_model(p.V, opts, 11);
  CHECK(sel.grid.size() == 6 * 4);
  const GridPoint* best = nullptr;
  for (const auto& g : sel.grid) {
    CHECK(std::isfinite(g.total));
    CHECK(g.model_cost == static_cast<double>(g.bits * g.roles * (p.V.rows() + p.V.cols())));
    if (!best || g.total < best->total) best = &g;
  }
  CHECK(best->roles == sel.num_roles);
  CHECK(best->bits == sel.num_bits);
  CHECK(sel.F.rows() == sel.num_roles);
}

TEST_CASE("ranks above the matrix size are skipped") {
  Eigen::MatrixXd V = Eigen::MatrixXd::Random(4, 3).cwiseAbs();
  auto sel = select_model(V, {}, 1);
  for (const auto& g : sel.grid) CHECK(g.roles <= 3);
  SelectOptions bad;
  bad.r_min = 5;
  CHECK_THROWS_AS(select_model(V, bad, 1), Error);
}

TEST_CASE("fixed-F memberships recover planted G") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = planted::make(seed, 40, 30, 3);
    Eigen::MatrixXd V = p.G * p.F;  // exact product, F has full row rank
    auto G = memberships_fixed_F(V, p.F);
    CHECK((G - row_normalized(p.G)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("row of F concentrates on its role") {
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 6);
  F(0, 0) = 2;
  F(0, 1) = 1;
  F(1, 2) = 4;
  F(1, 3) = 1;
  F(2, 4) = 1;
  F(2, 5) = 3;
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd v = 7.5 * F.row(k);
    auto g = memberships_fixed_F(v, F);
    CHECK(g(0, k) >= 1 - 1e-6);
  }
}

TEST_CASE("zero rows are uniform and scaling does not matter") {
  auto p = planted::make(1);
  Eigen::MatrixXd V = p.V.topRows(5);
  V.row(2).setZero();
  auto G = memberships_fixed_F(V, p.F);
  for (Eigen::Index r = 0; r < 3; ++r) CHECK(G(2, r) == doctest::Approx(1.0 / 3));
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    CHECK(G.row(i).sum() == doctest::Approx(1.0));
    CHECK((G.row(i).array() >= 0).all());
  }
  auto scaled = memberships_fixed_F(V * 13.0, p.F);
  CHECK(scaled.isApprox(G, 1e-9));
  CHECK_THROWS_AS(memberships_fixed_F(Eigen::MatrixXd::Ones(2, 4), p.F), Error);
}

TEST_CASE("schema fingerprint guards the model") {
  RoleModel m;
  m.num_roles = 1;
  m.num_bits = 1;
  m.F = Eigen::MatrixXd::Ones(1, 4);
  m.schema.features = {{0, Aggregate::None, 0, 0}, {1, Aggregate::None, 1, 0},
                       {2, Aggregate::None, 2, 0}, {3, Aggregate::None, 3, 0}};
  FeatureMatrix fm;
  fm.values = Eigen::MatrixXd::Ones(2, 4);
  fm.nodes = {ip("a"), ip("b")};
  fm.schema_id = m.schema.fingerprint();
  CHECK(memberships_fixed_F(fm, m).G.rows() == 2);
  fm.schema_id = "0000000000000000";
  CHECK_THROWS_AS(memberships_fixed_F(fm, m), Error);
}

TEST_CASE("role descriptions") {
  SUBCASE("single role ratios are one") {
    Eigen::MatrixXd G = Eigen::MatrixXd::Ones(6, 1);
    Eigen::MatrixXd M = Eigen::MatrixXd::Random(6, 4).cwiseAbs();
    auto d = role_descriptions(G, M);
    for (Eigen::Index p = 0; p < 4; ++p) CHECK(d.ratio(0, p) == doctest::Approx(1.0));
    CHECK(d.display.row(0).sum() == doctest::Approx(1.0));
  }
  SUBCASE("a role with ten times the betweenness") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.8, 1.2);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(30, 2);
    Eigen::MatrixXd M(30, 3);
    for (int n = 0; n < 30; ++n) {
      const bool a = n < 10;
      G(n, a ? 0 : 1) = 1.0;
      M(n, 0) = u(rng);
      M(n, 1) = u(rng);
      M(n, 2) = (a ? 10.0 : 1.0) * u(rng);
    }
    auto d = role_descriptions(G, M, {"degree", "pagerank", "betweenness"});
    Eigen::Index arg = 0;
    d.display.row(0).maxCoeff(&arg);
    CHECK(arg == 2);
    CHECK((d.E.array() >= 0).all());
  }
  CHECK_THROWS_AS(role_descriptions(Eigen::MatrixXd::Ones(3, 1), Eigen::MatrixXd::Ones(4, 2)), Error);
}

TEST_CASE("node properties on a star") {
  for (int n : {3, 5, 8}) {
    auto g = star(n);
    auto m = node_properties(g);
    auto hub = static_cast<Eigen::Index>(*g.find(ip("hub")));
    CHECK(m(hub, 0) == n);
    CHECK(m(hub, 3) == 0.0);
    CHECK(m(hub, 5) == 1.0);
    // Every pair of leaves routes through the hub: C(n, 2) pairs.
    CHECK(m(hub, 6) == doctest::Approx(n * (n - 1) / 2.0));
    CHECK(m(hub, 6) == doctest::Approx(betweenness_bruteforce(g)(hub)));
  }
}

TEST_CASE("betweenness matches path enumeration") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto g = random_graph(seed, 14, 0.2);
    CHECK(betweenness(g).isApprox(betweenness_bruteforce(g), 1e-9));
  }
}

TEST_CASE("triangle symmetry, pagerank mass, nonnegativity") {
  auto tri = ArtifactGraph::from_edges({{ip("a"), ip("b"), 3}, {ip("b"), ip("c"), 3}, {ip("a"), ip("c"), 3}});
  auto m = node_properties(tri);
  for (Eigen::Index v = 1; v < 3; ++v) CHECK(m.row(v).isApprox(m.row(0)));

  auto g = random_graph(9, 25, 0.1);
  auto pr = pagerank(g);
  CHECK(pr.sum() == doctest::Approx(1.0));
  auto props = node_properties(g);
  CHECK((props.array() >= 0).all());
  CHECK((props.col(4).array() <= 1.0).all());
  CHECK_THROWS_AS(node_properties(ArtifactGraph{}), Error);
}

TEST_CASE("eccentricity stays inside the component") {
  auto g = ArtifactGraph::from_edges({{ip("a"), ip("b"), 1}, {ip("b"), ip("c"), 1}, {ip("x"), ip("y"), 1}});
  auto e = eccentricity(g);
  CHECK(e(static_cast<Eigen::Index>(*g.find(ip("a")))) == 2);
  CHECK(e(static_cast<Eigen::Index>(*g.find(ip("b")))) == 1);
  CHECK(e(static_cast<Eigen::Index>(*g.find(ip("x")))) == 1);
}

TEST_CASE("diversity is the normalized layer entropy") {
  VertexKey s{"signature", "1"}, r{"rule", "2"};
  auto g = ArtifactGraph::from_edges({{ip("a"), s, 1}, {ip("a"), r, 1}, {ip("a"), ip("b"), 2}});
  auto d = layer_diversity(g);
  // a: weight 2 to ip, 1 to signature, 1 to rule over 3 layers.
  const double h = -(0.5 * std::log(0.5) + 2 * 0.25 * std::log(0.25));
  CHECK(d(static_cast<Eigen::Index>(*g.find(ip("a")))) == doctest::Approx(h / std::log(3.0)));
  CHECK(d(static_cast<Eigen::Index>(*g.find(ip("b")))) == 0.0);
}
