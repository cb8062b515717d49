#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rolegraph/artifact_graph.hpp"

namespace rolegraph {

// Column order of node_properties().
const std::vector<std::string>& node_property_names();

/// M_np: degree, weighted degree, pagerank, transitivity, diversity,
/// eccentricity and betweenness for every vertex, in graph order.
Eigen::MatrixXd node_properties(const ArtifactGraph& g);

// Weight-proportional transitions; isolated vertices teleport uniformly.
Eigen::VectorXd pagerank(const ArtifactGraph& g, double damping = 0.85, double tol = 1e-8,
                         int max_iter = 1000);

// Exact unweighted betweenness (Brandes), each unordered pair counted once.
Eigen::VectorXd betweenness(const ArtifactGraph& g);

// Hop eccentricity inside each vertex's connected component.
Eigen::VectorXd eccentricity(const ArtifactGraph& g);

// Entropy of a vertex's edge weight across neighbor layers, divided by
// log(number of graph layers). Zero for graphs with a single layer.
Eigen::VectorXd layer_diversity(const ArtifactGraph& g);

}  // namespace rolegraph
