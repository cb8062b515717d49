#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rolegraph/artifact_graph.hpp"

namespace rolegraph {

class NodeRegistry;

enum class PrimaryFeature : int {
  WeightedDegree = 0,
  EgoInterconnectivity = 1,
  EgoOutDegree = 2,
  Transitivity = 3,
};
inline constexpr int kPrimaryFeatureCount = 4;

const char* to_string(PrimaryFeature f);

enum class Aggregate { None, NeighborSum, NeighborMean };

/// One column of the node-feature matrix. Depth-0 columns are primaries;
/// deeper columns aggregate `source` (a lower id) over each node's neighbors.
struct FeatureDef {
  int id = 0;
  Aggregate op = Aggregate::None;
  int arg = 0;  // primary index when op == None, else source feature id
  int depth = 0;

  bool operator==(const FeatureDef&) const = default;
};

struct FeatureSchema {
  std::vector<FeatureDef> features;
  double prune_tolerance = 0.01;
  int max_depth = 3;

  std::size_t size() const { return features.size(); }
  std::string name_of(int id) const;  // e.g. "mean(sum(weighted_degree))"

  std::string serialize() const;
  static FeatureSchema parse(std::istream& in);
  // Hex digest of serialize(); identifies the schema inside a model bundle.
  std::string fingerprint() const;

  bool operator==(const FeatureSchema&) const = default;
};

/// Node-feature matrix V_nf; row i belongs to nodes[i].
struct FeatureMatrix {
  std::vector<VertexKey> nodes;
  Eigen::MatrixXd values;
  std::string schema_id;
};

/// Weighted degree, ego-net interconnectivity, ego-net out-degree and local
/// clustering coefficient, one row per vertex in graph order.
Eigen::MatrixXd primary_features(const ArtifactGraph& g);

struct SchemaFit {
  FeatureSchema schema;
  FeatureMatrix matrix;
};

/// Recursive feature generation on the training graph. Candidates whose
/// least-squares residual against the retained columns has relative norm
/// <= prune_tolerance are dropped; recursion stops when a level keeps nothing
/// or max_depth is reached.
SchemaFit fit_schema(const ArtifactGraph& g_train, int max_depth = 3,
                     double prune_tolerance = 0.01);

/// Evaluates exactly the schema's columns on `g`. Every vertex of `g` gets a
/// row; unseen vertices are appended to `registry` when one is given.
FeatureMatrix apply_schema(const ArtifactGraph& g, const FeatureSchema& schema,
                           NodeRegistry* registry = nullptr);

void write_feature_csv(const FeatureMatrix& m, const FeatureSchema& schema, std::ostream& out);

}  // namespace rolegraph
