#include "rolegraph/roles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rolegraph/error.hpp"
#include "rolegraph/nnls.hpp"

namespace rolegraph {

void RoleModel::validate() const {
  auto fail = [](const std::string& why) { return Error(ErrorCode::InvalidArgument, why); };
  if (num_roles < 1) throw fail("model needs at least one role");
  if (num_bits < 1 || num_bits > 16) throw fail("model bits outside [1, 16]");
  if (F.rows() != num_roles) throw fail("F row count differs from num_roles");
  if (F.cols() != static_cast<Eigen::Index>(schema.size())) {
    throw Error(ErrorCode::SchemaMismatch, "F column count differs from schema length");
  }
  if ((F.array() < 0.0).any() || !F.allFinite()) throw fail("F must be finite and nonnegative");
  for (Eigen::Index r = 0; r < F.rows(); ++r) {
    if (F.row(r).maxCoeff() <= 0.0) throw fail(fmt::format("role {} has an all-zero definition", r));
  }
}

Selection select_model(const Eigen::MatrixXd& V, const SelectOptions& opts, std::uint64_t seed) {
  if (opts.r_min < 1 || opts.r_max < opts.r_min) {
    throw Error(ErrorCode::InvalidArgument, "role range must be non-empty and start at >= 1");
  }
  if (opts.b_min < 1 || opts.b_max < opts.b_min || opts.b_max > 16) {
    throw Error(ErrorCode::InvalidArgument, "bit range must be non-empty within [1, 16]");
  }
  const int r_cap = static_cast<int>(std::min(V.rows(), V.cols()));
  const int r_max = std::min(opts.r_max, r_cap);
  if (opts.r_min > r_max) {
    throw Error(ErrorCode::Dimension,
                fmt::format("no admissible rank: r_min {} exceeds min(N_n, N_f) = {}", opts.r_min, r_cap));
  }

  Selection sel;
  double best = std::numeric_limits<double>::infinity();
  for (int r = opts.r_min; r <= r_max; ++r) {
    NmfOptions nmf = opts.nmf;
    nmf.seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    auto fit = nmf_kl(V, r, nmf);
    for (int b = opts.b_min; b <= opts.b_max; ++b) {
      auto dl = description_length(V, fit.G, fit.F, b);
      sel.grid.push_back({r, b, dl.model_cost, dl.error_cost, dl.total});
      if (dl.total < best) {
        best = dl.total;
        sel.num_roles = r;
        sel.num_bits = b;
        sel.G = fit.G;
        sel.F = fit.F;
      }
    }
  }

  // A role that collapsed to zero carries no definition; drop it.
  std::vector<Eigen::Index> live;
  for (Eigen::Index a = 0; a < sel.F.rows(); ++a) {
    if (sel.F.row(a).maxCoeff() > 0.0 && sel.G.col(a).maxCoeff() > 0.0) live.push_back(a);
  }
  if (!live.empty() && static_cast<Eigen::Index>(live.size()) < sel.F.rows()) {
    Eigen::MatrixXd F(static_cast<Eigen::Index>(live.size()), sel.F.cols());
    Eigen::MatrixXd G(sel.G.rows(), static_cast<Eigen::Index>(live.size()));
    for (std::size_t k = 0; k < live.size(); ++k) {
      F.row(static_cast<Eigen::Index>(k)) = sel.F.row(live[k]);
      G.col(static_cast<Eigen::Index>(k)) = sel.G.col(live[k]);
    }
    sel.F = std::move(F);
    sel.G = std::move(G);
    sel.num_roles = static_cast<int>(live.size());
  }
  return sel;
}

Eigen::MatrixXd memberships_fixed_F(const Eigen::MatrixXd& V, const Eigen::MatrixXd& F) {
  if (V.cols() != F.cols()) {
    throw Error(ErrorCode::SchemaMismatch,
                fmt::format("feature count {} does not match role definitions ({})", V.cols(), F.cols()));
  }
  const auto r = F.rows();
  const Eigen::MatrixXd basis = F.transpose();
  Eigen::MatrixXd G(V.rows(), r);
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    Eigen::VectorXd g = nnls(basis, V.row(i).transpose()).x;
    const double total = g.sum();
    if (total > 0.0 && std::isfinite(total)) {
      G.row(i) = (g / total).transpose();
    } else {
      G.row(i).setConstant(1.0 / static_cast<double>(r));
    }
  }
  return G;
}

Membership memberships_fixed_F(const FeatureMatrix& V, const RoleModel& model) {
  if (!V.schema_id.empty() && V.schema_id != model.schema.fingerprint()) {
    throw Error(ErrorCode::SchemaMismatch, "feature matrix was built with a different schema");
  }
  Membership m;
  m.nodes = V.nodes;
  m.G = memberships_fixed_F(V.values, model.F);
  return m;
}

RoleDescription role_descriptions(const Eigen::MatrixXd& G, const Eigen::MatrixXd& M,
                                  std::vector<std::string> property_names) {
  if (G.rows() != M.rows()) throw Error(ErrorCode::Dimension, "G and M row counts differ");
  if (!property_names.empty() && static_cast<Eigen::Index>(property_names.size()) != M.cols()) {
    throw Error(ErrorCode::Dimension, "property name count differs from M columns");
  }
  RoleDescription d;
  d.properties = std::move(property_names);
  const auto r = G.cols();
  const auto p = M.cols();
  d.E.resize(r, p);
  d.E1.resize(p);
  d.ratio.resize(r, p);
  const Eigen::MatrixXd single = Eigen::MatrixXd::Ones(G.rows(), 1);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::VectorXd target = M.col(j);
    d.E.col(j) = nnls(G, target).x;
    d.E1(j) = nnls(single, target).x(0);
  }
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index j = 0; j < p; ++j) {
      d.ratio(a, j) = d.E1(j) > 0.0 ? d.E(a, j) / d.E1(j) : 0.0;
    }
  }
  d.display = d.ratio;
  for (Eigen::Index a = 0; a < r; ++a) {
    const double s = d.display.row(a).sum();
    if (s > 0.0) d.display.row(a) /= s;
  }
  return d;
}

}  // namespace rolegraph
