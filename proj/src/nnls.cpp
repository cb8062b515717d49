#include "rolegraph/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rolegraph/error.hpp"

namespace rolegraph {

namespace {

// Least squares on the passive columns only; other entries are zero.
Eigen::VectorXd passive_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              const std::vector<bool>& passive) {
  const auto n = A.cols();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  if (idx.empty()) return z;
  Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
  Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
  for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zs(static_cast<Eigen::Index>(k));
  return z;
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter, double tol) {
  if (A.rows() != b.size()) throw Error(ErrorCode::Dimension, "nnls: A rows != b size");
  const auto n = A.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);
  if (tol <= 0.0) {
    tol = 10.0 * std::numeric_limits<double>::epsilon() * A.norm() * std::max<double>(1.0, b.norm()) *
          static_cast<double>(std::max<Eigen::Index>(A.rows(), n));
  }

  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Eigen::VectorXd w = A.transpose() * (b - A * res.x);

  int outer = 0;
  while (true) {
    // Most positive gradient among the active (clamped) set.
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    if (++outer > max_iter) {
      res.converged = false;
      break;
    }
    passive[static_cast<std::size_t>(best)] = true;

    while (true) {
      Eigen::VectorXd z = passive_solve(A, b, passive);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        res.x = z;
        break;
      }
      // Step toward z until the first passive variable hits zero.
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          double denom = res.x(j) - z(j);
          if (denom > 0.0) alpha = std::min(alpha, res.x(j) / denom);
        }
      }
      if (!std::isfinite(alpha)) alpha = 0.0;
      res.x += alpha * (z - res.x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && res.x(j) <= tol * 1e-3) {
          passive[static_cast<std::size_t>(j)] = false;
          res.x(j) = 0.0;
        }
      }
      ++res.iterations;
      if (res.iterations > 10 * max_iter) {
        res.converged = false;
        break;
      }
    }
    w = A.transpose() * (b - A * res.x);
    ++res.iterations;
  }
  res.x = res.x.cwiseMax(0.0);
  return res;
}

}  // namespace rolegraph
