#include "rolegraph/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "rolegraph/error.hpp"

namespace rolegraph {

namespace {

constexpr double kClamp = 1e-12;

double uniform01(std::mt19937_64& rng) {
  // 53 random mantissa bits, open at both ends.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// V ./ A, with 0 wherever V is 0.
Eigen::MatrixXd ratio(const Eigen::MatrixXd& V, const Eigen::MatrixXd& A) {
  Eigen::MatrixXd R(V.rows(), V.cols());
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      const double v = V(i, j);
      R(i, j) = v > 0.0 ? v / std::max(A(i, j), kClamp) : 0.0;
    }
  }
  return R;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over a mixed input.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double kl_divergence(const Eigen::MatrixXd& V, const Eigen::MatrixXd& A) {
  if (V.rows() != A.rows() || V.cols() != A.cols()) {
    throw Error(ErrorCode::Dimension, "kl_divergence: shape mismatch");
  }
  double d = 0.0;
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      const double v = V(i, j);
      double a = A(i, j);
      if (v > 0.0) {
        a = std::max(a, kClamp);
        d += v * std::log(v / a) - v + a;
      } else {
        d += a;
      }
    }
  }
  return d;
}

NmfResult nmf_kl(const Eigen::MatrixXd& V, int rank, const NmfOptions& opts) {
  const auto n = V.rows();
  const auto m = V.cols();
  if (rank < 1 || rank > std::min(n, m)) {
    throw Error(ErrorCode::Dimension,
                fmt::format("rank {} outside [1, min({}, {})]", rank, n, m));
  }
  if ((V.array() < 0.0).any() || !V.allFinite()) {
    throw Error(ErrorCode::NonNegativity, "input matrix must be finite and nonnegative");
  }

  NmfResult res;
  if (V.isZero(0.0)) {
    res.G = Eigen::MatrixXd::Zero(n, rank);
    res.F = Eigen::MatrixXd::Zero(rank, m);
    res.objective = {0.0};
    return res;
  }

  std::mt19937_64 rng(opts.seed);
  const double scale = std::sqrt(V.mean() / rank);
  res.G.resize(n, rank);
  res.F.resize(rank, m);
  for (Eigen::Index i = 0; i < res.G.size(); ++i) res.G.data()[i] = scale * (0.5 + uniform01(rng));
  for (Eigen::Index i = 0; i < res.F.size(); ++i) res.F.data()[i] = scale * (0.5 + uniform01(rng));

  Eigen::MatrixXd approx = res.G * res.F;
  double prev = kl_divergence(V, approx);
  res.objective.push_back(prev);

  for (int it = 0; it < opts.max_iter; ++it) {
    // F update.
    {
      Eigen::MatrixXd num = res.G.transpose() * ratio(V, approx);
      Eigen::VectorXd den = res.G.colwise().sum().transpose();
      for (Eigen::Index a = 0; a < rank; ++a) {
        if (den(a) <= 0.0) continue;
        res.F.row(a).array() *= num.row(a).array() / den(a);
      }
      approx.noalias() = res.G * res.F;
    }
    // G update.
    {
      Eigen::MatrixXd num = ratio(V, approx) * res.F.transpose();
      Eigen::VectorXd den = res.F.rowwise().sum();
      for (Eigen::Index a = 0; a < rank; ++a) {
        if (den(a) <= 0.0) continue;
        res.G.col(a).array() *= num.col(a).array() / den(a);
      }
      approx.noalias() = res.G * res.F;
    }
    ++res.iterations;
    const double cur = kl_divergence(V, approx);
    res.objective.push_back(cur);
    if (cur == 0.0) break;
    if (std::abs(prev - cur) < opts.tol * std::max(prev, 1e-300)) break;
    prev = cur;
  }
  return res;
}

Quantized quantize(const Eigen::MatrixXd& m, int bits, int max_iter) {
  if (bits < 1 || bits > 16) throw Error(ErrorCode::InvalidArgument, "bits must be in [1, 16]");
  Quantized q;
  q.matrix = m;
  if (m.size() == 0) return q;

  std::vector<double> sorted(m.data(), m.data() + m.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  const std::size_t k = std::size_t{1} << bits;
  const std::size_t n = sorted.size();
  std::vector<double> centroids;
  if (distinct.size() <= k) {
    centroids = distinct;
  } else {
    for (std::size_t c = 0; c < k; ++c) {
      auto pos = static_cast<std::size_t>((static_cast<double>(c) + 0.5) * static_cast<double>(n) /
                                          static_cast<double>(k));
      centroids.push_back(sorted[std::min(pos, n - 1)]);
    }
    centroids.erase(std::unique(centroids.begin(), centroids.end()), centroids.end());

    // Prefix sums make each Lloyd step O(k log n) on the sorted entries.
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sorted[i];

    std::vector<std::size_t> bounds;
    for (int it = 0; it < max_iter; ++it) {
      std::vector<std::size_t> next_bounds{0};
      for (std::size_t c = 0; c + 1 < centroids.size(); ++c) {
        const double mid = 0.5 * (centroids[c] + centroids[c + 1]);
        next_bounds.push_back(static_cast<std::size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), mid) - sorted.begin()));
      }
      next_bounds.push_back(n);
      if (next_bounds == bounds) break;
      bounds = std::move(next_bounds);
      std::vector<double> updated;
      for (std::size_t c = 0; c + 1 < bounds.size(); ++c) {
        const auto lo = bounds[c];
        const auto hi = bounds[c + 1];
        if (hi > lo) updated.push_back((prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo));
      }
      std::sort(updated.begin(), updated.end());
      updated.erase(std::unique(updated.begin(), updated.end()), updated.end());
      if (updated.size() != centroids.size()) bounds.clear();
      centroids = std::move(updated);
    }
  }

  for (Eigen::Index i = 0; i < q.matrix.size(); ++i) {
    const double v = q.matrix.data()[i];
    auto it = std::lower_bound(centroids.begin(), centroids.end(), v);
    double best;
    if (it == centroids.end()) {
      best = centroids.back();
    } else if (it == centroids.begin()) {
      best = *it;
    } else {
      const double hi = *it;
      const double lo = *(it - 1);
      best = (v - lo) <= (hi - v) ? lo : hi;
    }
    q.matrix.data()[i] = best;
  }
  q.codebook = std::move(centroids);
  return q;
}

DescriptionLength description_length(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                                     const Eigen::MatrixXd& F, int bits) {
  if (G.rows() != V.rows() || F.cols() != V.cols() || G.cols() != F.rows()) {
    throw Error(ErrorCode::Dimension, "description_length: inconsistent shapes");
  }
  const auto r = static_cast<double>(G.cols());
  DescriptionLength dl;
  dl.model_cost = static_cast<double>(bits) * r * static_cast<double>(V.rows() + V.cols());
  const auto Gq = quantize(G, bits);
  const auto Fq = quantize(F, bits);
  dl.error_cost = kl_divergence(V, Gq.matrix * Fq.matrix);
  dl.total = dl.model_cost + dl.error_cost;
  return dl;
}

}  // namespace rolegraph
