#include "rslimits/prior.hpp"

#include "rslimits/errors.hpp"
#include "rslimits/quadrature.hpp"

#include <cmath>
#include <string>

namespace rslimits {

namespace {

constexpr double kProbSumTol = 1e-12;
constexpr double kAtomDedupTol = 1e-12;

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>> &atoms) {
  if (atoms.empty()) throw DomainError("prior: atom list is empty");
  const auto k = atoms.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(atoms.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != k) throw DomainError("prior: atoms have inconsistent dimensions");
    for (std::size_t j = 0; j < k; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = atoms[i][j];
  }
  return m;
}

} // namespace

DiscretePrior::DiscretePrior(Eigen::MatrixXd atoms, Eigen::VectorXd probs, std::size_t max_support)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  if (atoms_.rows() == 0 || atoms_.cols() == 0) throw DomainError("prior: need at least one atom of dimension >= 1");
  if (probs_.size() != atoms_.rows())
    throw DomainError("prior: " + std::to_string(atoms_.rows()) + " atoms but " + std::to_string(probs_.size()) +
                      " probabilities");
  if (size() > max_support)
    throw SizeError("prior: support size " + std::to_string(size()) + " exceeds cap " + std::to_string(max_support));
  if (!atoms_.allFinite()) throw DomainError("prior: atoms must be finite");

  for (Eigen::Index i = 0; i < probs_.size(); ++i)
    if (!(probs_[i] > 0.0) || !std::isfinite(probs_[i]))
      throw DomainError("prior: probabilities must be strictly positive");
  const double total = probs_.sum();
  if (std::abs(total - 1.0) > kProbSumTol)
    throw DomainError("prior: probabilities sum to " + std::to_string(total) + ", expected 1");

  for (Eigen::Index i = 0; i < atoms_.rows(); ++i)
    for (Eigen::Index j = i + 1; j < atoms_.rows(); ++j)
      if ((atoms_.row(i) - atoms_.row(j)).cwiseAbs().maxCoeff() <= kAtomDedupTol)
        throw DomainError("prior: atoms " + std::to_string(i) + " and " + std::to_string(j) + " coincide");

  log_probs_ = probs_.array().log().matrix();
  max_abs_ = atoms_.cwiseAbs().maxCoeff();
}

DiscretePrior::DiscretePrior(const std::vector<std::vector<double>> &atoms, const std::vector<double> &probs,
                             std::size_t max_support)
    : DiscretePrior(to_matrix(atoms), Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size())),
                    max_support) {}

Moments moments(const DiscretePrior &prior) {
  const auto &x = prior.atoms();
  const auto &p = prior.probs();
  Moments m;
  m.mean = x.transpose() * p;
  m.second_moment = x.transpose() * p.asDiagonal() * x;
  m.second_moment = 0.5 * (m.second_moment + m.second_moment.transpose()).eval();
  m.covariance = m.second_moment - m.mean * m.mean.transpose();
  return m;
}

DiscretePrior two_point_prior(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("two_point_prior: p must lie in (0,1), got " + std::to_string(p));
  Eigen::MatrixXd atoms(2, 1);
  atoms << std::sqrt((1.0 - p) / p), -std::sqrt(p / (1.0 - p));
  Eigen::VectorXd probs(2);
  probs << p, 1.0 - p;
  return DiscretePrior(std::move(atoms), std::move(probs));
}

DiscretePrior rademacher_prior() { return two_point_prior(0.5); }

DiscretePrior point_mass(const Eigen::VectorXd &c) {
  Eigen::MatrixXd atoms = c.transpose();
  Eigen::VectorXd probs = Eigen::VectorXd::Ones(1);
  return DiscretePrior(std::move(atoms), std::move(probs));
}

DiscretePrior product_prior(const DiscretePrior &a, const DiscretePrior &b, std::size_t max_support) {
  const std::size_t total = a.size() * b.size();
  if (total > max_support)
    throw SizeError("product_prior: support size " + std::to_string(total) + " exceeds cap " +
                    std::to_string(max_support));
  const int ka = a.dim();
  const int kb = b.dim();
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(total), ka + kb);
  Eigen::VectorXd probs(static_cast<Eigen::Index>(total));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < a.atoms().rows(); ++i) {
    for (Eigen::Index j = 0; j < b.atoms().rows(); ++j, ++r) {
      atoms.row(r).head(ka) = a.atoms().row(i);
      atoms.row(r).tail(kb) = b.atoms().row(j);
      probs[r] = a.probs()[i] * b.probs()[j];
    }
  }
  // Products of probabilities that summed to 1 can drift by a few ulps.
  probs /= probs.sum();
  return DiscretePrior(std::move(atoms), std::move(probs), max_support);
}

DiscretePrior gaussian_discretization(int order) {
  const GaussQuadrature q = gauss_hermite(order);
  Eigen::MatrixXd atoms = Eigen::Map<const Eigen::VectorXd>(q.nodes.data(), order);
  Eigen::VectorXd probs = Eigen::Map<const Eigen::VectorXd>(q.weights.data(), order);
  probs /= probs.sum();
  return DiscretePrior(std::move(atoms), std::move(probs));
}

} // namespace rslimits
