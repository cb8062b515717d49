#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace planted {

struct Roles {
  Eigen::MatrixXd G;  // nodes x roles, rows are mostly one role
  Eigen::MatrixXd F;  // roles x features
  Eigen::MatrixXd V;  // round(G F): integer counts, like graph features
};

// Each role owns a block of features where it is strong and is weak
// elsewhere; nodes take one dominant role with a little of the others.
inline Roles make(std::uint64_t seed, int nodes = 40, int features = 30, int roles = 3,
                  double scale = 20.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Roles p;
  p.F = Eigen::MatrixXd::Zero(roles, features);
  for (int r = 0; r < roles; ++r) {
    for (int f = 0; f < features; ++f) {
      const bool own = f % roles == r;
      p.F(r, f) = scale * (own ? 0.6 + 0.4 * u(rng) : 0.05 * u(rng));
    }
  }
  p.G = Eigen::MatrixXd::Zero(nodes, roles);
  for (int n = 0; n < nodes; ++n) {
    const int main = n % roles;
    for (int r = 0; r < roles; ++r) p.G(n, r) = r == main ? 0.7 + 0.6 * u(rng) : 0.1 * u(rng);
  }
  p.V = (p.G * p.F).array().round();
  return p;
}

}  // namespace planted
