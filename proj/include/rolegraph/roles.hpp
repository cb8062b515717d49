#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rolegraph/features.hpp"
#include "rolegraph/nmf.hpp"

namespace rolegraph {

struct GridPoint {
  int roles = 0;
  int bits = 0;
  double model_cost = 0.0;
  double error_cost = 0.0;
  double total = 0.0;
};

/// Trained role definitions. F is immutable once training finishes.
struct RoleModel {
  int num_roles = 0;
  int num_bits = 0;
  Eigen::MatrixXd F;  // num_roles x N_f
  FeatureSchema schema;
  std::int64_t train_start = 0;
  std::int64_t train_end = 0;
  std::uint64_t seed = 0;
  std::vector<GridPoint> grid;

  // Throws Error(InvalidArgument) on a broken invariant.
  void validate() const;
};

struct SelectOptions {
  int r_min = 1;
  int r_max = 10;
  int b_min = 1;
  int b_max = 6;
  NmfOptions nmf;  // seed is overridden per rank
};

struct Selection {
  int num_roles = 0;
  int num_bits = 0;
  Eigen::MatrixXd G;
  Eigen::MatrixXd F;
  std::vector<GridPoint> grid;  // rank-major, ascending
};

/// Grid search over (roles, bits) for the minimum description length. Ranks
/// above min(N_n, N_f) are dropped from the grid. Ties go to fewer roles,
/// then fewer bits.
Selection select_model(const Eigen::MatrixXd& V, const SelectOptions& opts, std::uint64_t seed);

/// Node-role memberships under fixed role definitions: per row, the
/// nonnegative least-squares coefficients of v on the rows of F, scaled to
/// sum to one (uniform when the solution is zero).
Eigen::MatrixXd memberships_fixed_F(const Eigen::MatrixXd& V, const Eigen::MatrixXd& F);

struct Membership {
  std::vector<VertexKey> nodes;
  Eigen::MatrixXd G;  // rows sum to 1
};

// Checks that `V` was produced with the model's schema (SchemaMismatch otherwise).
Membership memberships_fixed_F(const FeatureMatrix& V, const RoleModel& model);

/// Per-role structural descriptions in terms of named node properties.
struct RoleDescription {
  std::vector<std::string> properties;
  Eigen::MatrixXd E;        // N_r x N_p, G E ~ M with E >= 0
  Eigen::RowVectorXd E1;    // single-role fit
  Eigen::MatrixXd ratio;    // E / E1 (0 where E1 == 0)
  Eigen::MatrixXd display;  // ratio rows scaled to sum 1
};

RoleDescription role_descriptions(const Eigen::MatrixXd& G, const Eigen::MatrixXd& M,
                                  std::vector<std::string> property_names = {});

}  // namespace rolegraph
