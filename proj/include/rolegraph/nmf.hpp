#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace rolegraph {

/// Generalized Kullback-Leibler divergence D(V || A) =
/// sum V log(V / A) - V + A, with 0 log 0 = 0 and A clamped to >= 1e-12
/// wherever V > 0.
double kl_divergence(const Eigen::MatrixXd& V, const Eigen::MatrixXd& A);

struct NmfOptions {
  int max_iter = 1000;
  double tol = 1e-7;  // relative objective change
  std::uint64_t seed = 0;
};

struct NmfResult {
  Eigen::MatrixXd G;  // N_n x r
  Eigen::MatrixXd F;  // r x N_f
  std::vector<double> objective;  // D(V || GF) at init and after every iteration
  int iterations = 0;
};

/// KL-NMF V ~ G F by Lee-Seung multiplicative updates.
NmfResult nmf_kl(const Eigen::MatrixXd& V, int rank, const NmfOptions& opts = {});

struct Quantized {
  Eigen::MatrixXd matrix;
  std::vector<double> codebook;  // sorted, distinct
};

/// Replaces each entry by the nearest of at most 2^bits centroids found by
/// 1-D Lloyd iterations over the entries (quantile initialization).
Quantized quantize(const Eigen::MatrixXd& m, int bits, int max_iter = 100);

struct DescriptionLength {
  double model_cost = 0.0;
  double error_cost = 0.0;
  double total = 0.0;
};

/// L = M + E with M = bits * r * (N_n + N_f) and E the KL divergence between
/// V and the product of the quantized factors.
DescriptionLength description_length(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                                     const Eigen::MatrixXd& F, int bits);

// Stateless 64-bit mixer used to derive per-run seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace rolegraph
