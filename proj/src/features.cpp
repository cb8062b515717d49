#include "rolegraph/features.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "rolegraph/csv.hpp"
#include "rolegraph/dynamics.hpp"
#include "rolegraph/error.hpp"

namespace rolegraph {

const char* to_string(PrimaryFeature f) {
  switch (f) {
    case PrimaryFeature::WeightedDegree: return "weighted_degree";
    case PrimaryFeature::EgoInterconnectivity: return "ego_interconnectivity";
    case PrimaryFeature::EgoOutDegree: return "ego_out_degree";
    case PrimaryFeature::Transitivity: return "transitivity";
  }
  return "?";
}

namespace {

constexpr const char* kSchemaMagic = "rolegraph-schema";
constexpr int kSchemaVersion = 1;

std::vector<FeatureDef> primary_defs() {
  std::vector<FeatureDef> defs;
  for (int p = 0; p < kPrimaryFeatureCount; ++p) defs.push_back({p, Aggregate::None, p, 0});
  return defs;
}

Eigen::VectorXd aggregate(const ArtifactGraph& g, const Eigen::VectorXd& column, Aggregate op) {
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index v = 0; v < n; ++v) {
    double sum = 0.0;
    auto nbrs = g.neighbors(static_cast<std::size_t>(v));
    for (const auto& [u, w] : nbrs) sum += column(static_cast<Eigen::Index>(u));
    if (op == Aggregate::NeighborMean) {
      out(v) = nbrs.empty() ? 0.0 : sum / static_cast<double>(nbrs.size());
    } else {
      out(v) = sum;
    }
  }
  return out;
}

// Orthonormal basis of the retained columns, grown one column at a time.
class ResidualBasis {
 public:
  // Relative residual norm of `c` after projection onto the basis; a zero
  // column has residual 0 by convention.
  double relative_residual(const Eigen::VectorXd& c, Eigen::VectorXd* residual = nullptr) const {
    double norm = c.norm();
    if (norm == 0.0) return 0.0;
    Eigen::VectorXd r = c;
    // Two passes of modified Gram-Schmidt keep the projection accurate.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis_) r -= q.dot(r) * q;
    }
    if (residual) *residual = r;
    return r.norm() / norm;
  }

  void add(const Eigen::VectorXd& c) {
    Eigen::VectorXd r;
    double rel = relative_residual(c, &r);
    if (rel > 1e-12) basis_.push_back(r / r.norm());
  }

 private:
  std::vector<Eigen::VectorXd> basis_;
};

}  // namespace

Eigen::MatrixXd primary_features(const ArtifactGraph& g) {
  const auto n = g.vertex_count();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), kPrimaryFeatureCount);
  std::vector<char> in_ego(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    auto nbrs = g.neighbors(v);
    double wdeg = 0.0;
    for (const auto& [u, w] : nbrs) wdeg += static_cast<double>(w);

    in_ego[v] = 1;
    for (const auto& [u, w] : nbrs) in_ego[u] = 1;

    // Each neighbor-neighbor edge is seen from both ends.
    std::size_t inner_twice = 0;
    std::size_t outward = 0;
    for (const auto& [u, w] : nbrs) {
      for (const auto& [x, wx] : g.neighbors(u)) {
        if (x == v) continue;
        if (in_ego[x]) {
          ++inner_twice;
        } else {
          ++outward;
        }
      }
    }
    for (const auto& [u, w] : nbrs) in_ego[u] = 0;
    in_ego[v] = 0;

    const double inner = static_cast<double>(inner_twice / 2);
    const double k = static_cast<double>(nbrs.size());
    const auto row = static_cast<Eigen::Index>(v);
    out(row, 0) = wdeg;
    out(row, 1) = inner;
    out(row, 2) = static_cast<double>(outward);
    out(row, 3) = nbrs.size() >= 2 ? 2.0 * inner / (k * (k - 1.0)) : 0.0;
  }
  return out;
}

std::string FeatureSchema::name_of(int id) const {
  const auto& f = features.at(static_cast<std::size_t>(id));
  switch (f.op) {
    case Aggregate::None: return to_string(static_cast<PrimaryFeature>(f.arg));
    case Aggregate::NeighborSum: return "sum(" + name_of(f.arg) + ")";
    case Aggregate::NeighborMean: return "mean(" + name_of(f.arg) + ")";
  }
  return "?";
}

std::string FeatureSchema::serialize() const {
  std::string out = fmt::format("{} {}\nmax_depth {}\nprune_tolerance {:.17g}\nfeatures {}\n",
                                kSchemaMagic, kSchemaVersion, max_depth, prune_tolerance,
                                features.size());
  for (const auto& f : features) {
    const char* op = f.op == Aggregate::None ? "primary"
                     : f.op == Aggregate::NeighborSum ? "sum"
                                                      : "mean";
    out += fmt::format("{} {} {} {}\n", f.id, op, f.arg, f.depth);
  }
  return out;
}

FeatureSchema FeatureSchema::parse(std::istream& in) {
  auto fail = [](const std::string& why) { return Error(ErrorCode::SchemaMismatch, why); };
  FeatureSchema s;
  std::string magic, key;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version) || magic != kSchemaMagic) throw fail("not a feature schema");
  if (version != kSchemaVersion) throw fail(fmt::format("unsupported schema version {}", version));
  if (!(in >> key >> s.max_depth) || key != "max_depth") throw fail("expected max_depth");
  if (!(in >> key >> s.prune_tolerance) || key != "prune_tolerance") {
    throw fail("expected prune_tolerance");
  }
  if (!(in >> key >> count) || key != "features") throw fail("expected features count");
  for (std::size_t i = 0; i < count; ++i) {
    FeatureDef f;
    std::string op;
    if (!(in >> f.id >> op >> f.arg >> f.depth)) throw fail("truncated feature list");
    if (f.id != static_cast<int>(i)) throw fail("feature ids must be dense");
    if (op == "primary") {
      f.op = Aggregate::None;
      if (f.arg < 0 || f.arg >= kPrimaryFeatureCount || f.depth != 0) throw fail("bad primary");
    } else if (op == "sum" || op == "mean") {
      f.op = op == "sum" ? Aggregate::NeighborSum : Aggregate::NeighborMean;
      if (f.arg < 0 || f.arg >= f.id) throw fail("aggregate must reference an earlier feature");
    } else {
      throw fail("unknown feature op " + op);
    }
    s.features.push_back(f);
  }
  if (s.features.size() < kPrimaryFeatureCount) throw fail("schema lacks primary features");
  return s;
}

std::string FeatureSchema::fingerprint() const {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

SchemaFit fit_schema(const ArtifactGraph& g_train, int max_depth, double prune_tolerance) {
  if (g_train.vertex_count() == 0) throw Error(ErrorCode::EmptyGraph, "training graph is empty");
  if (max_depth < 0) throw Error(ErrorCode::InvalidArgument, "max_depth must be >= 0");
  if (prune_tolerance < 0) throw Error(ErrorCode::InvalidArgument, "prune_tolerance must be >= 0");

  const auto n = static_cast<Eigen::Index>(g_train.vertex_count());
  FeatureSchema schema;
  schema.max_depth = max_depth;
  schema.prune_tolerance = prune_tolerance;
  schema.features = primary_defs();

  Eigen::MatrixXd primaries = primary_features(g_train);
  std::vector<Eigen::VectorXd> columns;
  ResidualBasis basis;
  for (int p = 0; p < kPrimaryFeatureCount; ++p) {
    columns.push_back(primaries.col(p));
    basis.add(columns.back());
  }

  std::vector<int> frontier{0, 1, 2, 3};
  for (int depth = 1; depth <= max_depth && !frontier.empty(); ++depth) {
    std::vector<int> kept;
    for (int source : frontier) {
      for (auto op : {Aggregate::NeighborSum, Aggregate::NeighborMean}) {
        Eigen::VectorXd candidate = aggregate(g_train, columns[static_cast<std::size_t>(source)], op);
        if (basis.relative_residual(candidate) <= prune_tolerance) continue;
        int id = static_cast<int>(schema.features.size());
        schema.features.push_back({id, op, source, depth});
        basis.add(candidate);
        columns.push_back(std::move(candidate));
        kept.push_back(id);
      }
    }
    frontier = std::move(kept);
  }

  SchemaFit fit;
  fit.matrix.nodes = g_train.vertices();
  fit.matrix.values.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    fit.matrix.values.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  fit.matrix.schema_id = schema.fingerprint();
  fit.schema = std::move(schema);
  return fit;
}

FeatureMatrix apply_schema(const ArtifactGraph& g, const FeatureSchema& schema,
                           NodeRegistry* registry) {
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  FeatureMatrix m;
  m.nodes = g.vertices();
  m.schema_id = schema.fingerprint();
  m.values.resize(n, static_cast<Eigen::Index>(schema.size()));
  if (n > 0) {
    Eigen::MatrixXd primaries = primary_features(g);
    for (const auto& f : schema.features) {
      const auto col = static_cast<Eigen::Index>(f.id);
      if (f.op == Aggregate::None) {
        m.values.col(col) = primaries.col(f.arg);
      } else {
        m.values.col(col) = aggregate(g, m.values.col(f.arg), f.op);
      }
    }
  }
  if (registry) {
    for (const auto& key : m.nodes) registry->intern(key);
  }
  return m;
}

void write_feature_csv(const FeatureMatrix& m, const FeatureSchema& schema, std::ostream& out) {
  out << "layer,value";
  for (const auto& f : schema.features) out << ',' << csv_escape(schema.name_of(f.id));
  out << '\n';
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    const auto& node = m.nodes[static_cast<std::size_t>(i)];
    out << csv_escape(node.layer) << ',' << csv_escape(node.value);
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) out << fmt::format(",{:.17g}", m.values(i, j));
    out << '\n';
  }
}

}  // namespace rolegraph
