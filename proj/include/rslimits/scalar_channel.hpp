#pragma once

#include "rslimits/prior.hpp"
#include "rslimits/quadrature.hpp"

#include <Eigen/Dense>

namespace rslimits {

/// Signal-to-noise matrix of the linear Gaussian channel Y = gamma^{1/2} X + Z.
///
/// The input must be symmetric (within 1e-10) and PSD up to -1e-10; small
/// negative eigenvalues are clipped to zero before the square root is taken.
class SNRMatrix {
public:
  explicit SNRMatrix(const Eigen::MatrixXd &gamma);

  static SNRMatrix scalar(double gamma);
  static SNRMatrix scaled_identity(int k, double gamma);

  int dim() const noexcept { return static_cast<int>(value_.rows()); }
  const Eigen::MatrixXd &value() const noexcept { return value_; }
  const Eigen::MatrixXd &root() const noexcept { return root_; }
  bool is_zero() const noexcept { return zero_; }

private:
  Eigen::MatrixXd value_;
  Eigen::MatrixXd root_;
  bool zero_ = false;
};

/// Free energy of the channel,
///   psi(gamma) = E log sum_x P(x) exp(Z' gamma^{1/2} x + X' gamma x - x' gamma x / 2).
/// The expectation over the planted X is an exact sum over atoms; the one over
/// Z uses normal_grid(k, quad).
double psi(const DiscretePrior &prior, const SNRMatrix &gamma, const GaussQuadrature &quad);

/// Overlap function F(gamma) = E[<x><x>'], with <x> the posterior mean.
Eigen::MatrixXd overlap_F(const DiscretePrior &prior, const SNRMatrix &gamma, const GaussQuadrature &quad);

struct ChannelValues {
  double psi = 0.0;
  Eigen::MatrixXd overlap;
};

/// psi and F from a single pass over the quadrature grid.
ChannelValues channel_values(const DiscretePrior &prior, const SNRMatrix &gamma, const GaussQuadrature &quad);

namespace detail {
/// The k-dimensional kernel path with no k = 1 shortcut; used to cross-check it.
ChannelValues channel_values_general(const DiscretePrior &prior, const SNRMatrix &gamma, const GaussQuadrature &quad);
} // namespace detail

/// Posterior mean E[X | Y = y] in the channel Y = gamma^{1/2} X + Z.
Eigen::VectorXd denoiser(const DiscretePrior &prior, const SNRMatrix &gamma, const Eigen::VectorXd &y);

/// Jacobian d E[X|y] / dy = Cov(X | y) gamma^{1/2}.
Eigen::MatrixXd denoiser_derivative(const DiscretePrior &prior, const SNRMatrix &gamma, const Eigen::VectorXd &y);

/// Rank-one (k = 1) posterior mean and its derivative in y, for tight loops.
struct ScalarDenoise {
  double mean = 0.0;
  double derivative = 0.0;
};
ScalarDenoise denoise_scalar(const DiscretePrior &prior, double gamma, double y);

} // namespace rslimits
