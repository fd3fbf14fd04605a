#include "rslimits/quadrature.hpp"

#include "rslimits/errors.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

namespace rslimits {

namespace {

// Orthonormal (w.r.t. N(0,1)) Hermite values p_{n-1}(x), p_n(x), and the sum
// of squares of p_0..p_{n-1} (Christoffel function denominator).
struct HermiteEval {
  double p_prev = 0.0;
  double p_n = 0.0;
  double sum_sq = 0.0;
};

HermiteEval eval_hermite(int n, double x) {
  HermiteEval e;
  double pm1 = 0.0;
  double p = 1.0;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    sum += p * p;
    const double next = (x * p - std::sqrt(static_cast<double>(j)) * pm1) / std::sqrt(static_cast<double>(j + 1));
    pm1 = p;
    p = next;
  }
  e.p_prev = pm1;
  e.p_n = p;
  e.sum_sq = sum;
  return e;
}

} // namespace

GaussQuadrature gauss_hermite(int order) {
  if (order < 1 || order > kMaxQuadOrder)
    throw DomainError("gauss_hermite: order must be in [1, " + std::to_string(kMaxQuadOrder) + "], got " +
                      std::to_string(order));

  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(std::max(order - 1, 0));
  for (int i = 0; i + 1 < order; ++i) sub[i] = std::sqrt(static_cast<double>(i + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("gauss_hermite: eigen-decomposition failed");

  GaussQuadrature q;
  q.order = order;
  q.nodes.resize(static_cast<std::size_t>(order));
  q.weights.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    double x = solver.eigenvalues()[i];
    // Newton polish; p_n' = sqrt(n) p_{n-1}.
    for (int it = 0; it < 3; ++it) {
      const HermiteEval e = eval_hermite(order, x);
      const double step = e.p_n / (std::sqrt(static_cast<double>(order)) * e.p_prev);
      if (!std::isfinite(step)) break;
      x -= step;
    }
    const HermiteEval e = eval_hermite(order, x);
    q.nodes[static_cast<std::size_t>(i)] = x;
    q.weights[static_cast<std::size_t>(i)] = std::isfinite(e.sum_sq) ? 1.0 / e.sum_sq : 0.0;
  }

  // Enforce the exact symmetry of the rule.
  for (int i = 0; i < order / 2; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(order - 1 - i);
    const double x = 0.5 * (q.nodes[b] - q.nodes[a]);
    const double w = 0.5 * (q.weights[a] + q.weights[b]);
    q.nodes[a] = -x;
    q.nodes[b] = x;
    q.weights[a] = w;
    q.weights[b] = w;
  }
  if (order % 2 == 1) q.nodes[static_cast<std::size_t>(order / 2)] = 0.0;

  double total = 0.0;
  for (double w : q.weights) total += w;
  for (double &w : q.weights) w /= total;
  return q;
}

NormalGrid normal_grid(int k, const GaussQuadrature &quad, std::uint64_t qmc_seed) {
  if (k < 1) throw DomainError("normal_grid: dimension must be >= 1");
  NormalGrid g;
  if (k <= kMaxTensorDim) {
    const auto n1 = static_cast<Eigen::Index>(quad.order);
    Eigen::Index total = 1;
    for (int d = 0; d < k; ++d) total *= n1;
    g.points.resize(total, k);
    g.weights.resize(total);
    for (Eigen::Index r = 0; r < total; ++r) {
      Eigen::Index rem = r;
      double w = 1.0;
      for (int d = k - 1; d >= 0; --d) {
        const auto idx = static_cast<std::size_t>(rem % n1);
        rem /= n1;
        g.points(r, d) = quad.nodes[idx];
        w *= quad.weights[idx];
      }
      g.weights[r] = w;
    }
    return g;
  }

  static constexpr std::array<int, 32> primes = {2,  3,  5,  7,  11, 13, 17, 19, 23,  29,  31,  37,  41,  43,  47,  53,
                                                 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  if (k > static_cast<int>(primes.size()))
    throw DomainError("normal_grid: quasi-Monte-Carlo supports k <= " + std::to_string(primes.size()));

  const Eigen::Index npts = Eigen::Index{1} << kQmcLog2Points;
  std::mt19937_64 rng(qmc_seed);
  std::vector<double> shift(static_cast<std::size_t>(k));
  for (auto &s : shift) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;

  g.points.resize(npts, k);
  g.weights = Eigen::VectorXd::Constant(npts, 1.0 / static_cast<double>(npts));
  for (Eigen::Index r = 0; r < npts; ++r) {
    for (int d = 0; d < k; ++d) {
      const int base = primes[static_cast<std::size_t>(d)];
      double f = 1.0;
      double h = 0.0;
      for (Eigen::Index i = r + 1; i > 0; i /= base) {
        f /= base;
        h += f * static_cast<double>(i % base);
      }
      double u = h + shift[static_cast<std::size_t>(d)];
      u -= std::floor(u);
      u = std::clamp(u, 1e-16, 1.0 - 1e-16);
      g.points(r, d) = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
    }
  }
  return g;
}

} // namespace rslimits
