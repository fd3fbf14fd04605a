#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rslimits {

inline constexpr int kDefaultQuadOrder = 121;
inline constexpr int kMaxQuadOrder = 512;

/// Gauss-Hermite rule normalized for expectations against N(0,1):
/// E f(Z) ~= sum_i weights[i] * f(nodes[i]).
struct GaussQuadrature {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// 1 <= order <= 512. Exact for polynomials of degree <= 2*order - 1.
GaussQuadrature gauss_hermite(int order);

/// Point set for E over Z ~ N(0, I_k).
struct NormalGrid {
  Eigen::MatrixXd points; ///< one point per row
  Eigen::VectorXd weights;
};

inline constexpr int kMaxTensorDim = 3;
inline constexpr int kQmcLog2Points = 16;
inline constexpr std::uint64_t kQmcSeed = 0x5eed5eed5eedULL;

/// Tensor-product Gauss-Hermite for k <= 3, seeded randomly-shifted Halton
/// points (2^16 of them, equal weights) for k > 3.
NormalGrid normal_grid(int k, const GaussQuadrature &quad, std::uint64_t qmc_seed = kQmcSeed);

} // namespace rslimits
