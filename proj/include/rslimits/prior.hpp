#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace rslimits {

inline constexpr std::size_t kDefaultMaxSupport = 10000;

/// Finite-support distribution on R^k.
///
/// Atoms are stored row-wise (one atom per row). Construction validates that
/// probabilities are strictly positive and sum to one within 1e-12, and that
/// atoms are pairwise distinct (coordinate tolerance 1e-12). Duplicates are
/// rejected, never merged. Instances are immutable.
class DiscretePrior {
public:
  DiscretePrior(Eigen::MatrixXd atoms, Eigen::VectorXd probs,
                std::size_t max_support = kDefaultMaxSupport);

  /// Convenience constructor from a list of points.
  DiscretePrior(const std::vector<std::vector<double>> &atoms,
                const std::vector<double> &probs,
                std::size_t max_support = kDefaultMaxSupport);

  int dim() const noexcept { return static_cast<int>(atoms_.cols()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(atoms_.rows()); }

  const Eigen::MatrixXd &atoms() const noexcept { return atoms_; }
  const Eigen::VectorXd &probs() const noexcept { return probs_; }
  const Eigen::VectorXd &log_probs() const noexcept { return log_probs_; }

  Eigen::VectorXd atom(std::size_t i) const { return atoms_.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Largest absolute atom coordinate (the support bound K0).
  double max_abs() const noexcept { return max_abs_; }

private:
  Eigen::MatrixXd atoms_;
  Eigen::VectorXd probs_;
  Eigen::VectorXd log_probs_;
  double max_abs_ = 0.0;
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second_moment;
  Eigen::MatrixXd covariance;
};

/// Exact weighted sums over the atoms.
Moments moments(const DiscretePrior &prior);

/// Zero-mean, unit-variance two-point prior:
/// sqrt((1-p)/p) with probability p, -sqrt(p/(1-p)) with probability 1-p.
DiscretePrior two_point_prior(double p);

/// Uniform on {+1, -1}; identical to two_point_prior(0.5).
DiscretePrior rademacher_prior();

/// Point mass at c (k = c.size()).
DiscretePrior point_mass(const Eigen::VectorXd &c);

/// Law of (X1, X2) with X1 ~ a and X2 ~ b independent. Atom order is the
/// Cartesian product with the index into `a` varying slowest.
DiscretePrior product_prior(const DiscretePrior &a, const DiscretePrior &b,
                            std::size_t max_support = kDefaultMaxSupport);

/// Standard normal discretized on the nodes of an order-`order` Gauss-Hermite
/// rule (atoms = nodes, probabilities = weights).
DiscretePrior gaussian_discretization(int order);

} // namespace rslimits
