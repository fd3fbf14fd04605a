#include "rslimits/scalar_channel.hpp"

#include "rslimits/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rslimits {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kEigClip = 1e-10;

void check_dims(const DiscretePrior &prior, const SNRMatrix &gamma, const char *where) {
  if (prior.dim() != gamma.dim())
    throw DomainError(std::string(where) + ": prior has dimension " + std::to_string(prior.dim()) +
                      " but SNR matrix is " + std::to_string(gamma.dim()) + "x" + std::to_string(gamma.dim()));
}

// Posterior over atoms for one observation, in log space.
// logits_x = log P(x) - x'gamma x/2 + y' gamma^{1/2} x
struct ChannelKernel {
  Eigen::MatrixXd scaled_atoms; // row x: (gamma^{1/2} x)'
  Eigen::VectorXd offsets;      // log P(x) - x' gamma x / 2

  ChannelKernel(const DiscretePrior &prior, const SNRMatrix &gamma) {
    const auto &x = prior.atoms();
    scaled_atoms = x * gamma.root();
    offsets = prior.log_probs() - 0.5 * (x * gamma.value()).cwiseProduct(x).rowwise().sum();
  }

  // Returns log normalizer; fills `post` with normalized posterior weights.
  double posterior(const Eigen::VectorXd &y, Eigen::VectorXd &post) const {
    post.noalias() = scaled_atoms * y;
    post += offsets;
    const double mx = post.maxCoeff();
    post = (post.array() - mx).exp().matrix();
    const double s = post.sum();
    post /= s;
    return mx + std::log(s);
  }
};

double log_sum_exp_scalar(const double *v, std::size_t n, double *weights) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = std::exp(v[i] - mx);
    s += weights[i];
  }
  for (std::size_t i = 0; i < n; ++i) weights[i] /= s;
  return mx + std::log(s);
}

ChannelValues channel_values_k1(const DiscretePrior &prior, double gamma, const GaussQuadrature &quad) {
  const std::size_t na = prior.size();
  const double root = std::sqrt(gamma);
  std::vector<double> x(na), offset(na), logits(na), w(na);
  for (std::size_t a = 0; a < na; ++a) {
    x[a] = prior.atoms()(static_cast<Eigen::Index>(a), 0);
    offset[a] = prior.log_probs()[static_cast<Eigen::Index>(a)] - 0.5 * gamma * x[a] * x[a];
  }
  double psi_acc = 0.0;
  double f_acc = 0.0;
  for (std::size_t p = 0; p < na; ++p) {
    const double p0 = prior.probs()[static_cast<Eigen::Index>(p)];
    double psi_p = 0.0;
    double f_p = 0.0;
    for (int g = 0; g < quad.order; ++g) {
      const double y = root * x[p] + quad.nodes[static_cast<std::size_t>(g)];
      const double ry = root * y;
      for (std::size_t a = 0; a < na; ++a) logits[a] = offset[a] + ry * x[a];
      const double lz = log_sum_exp_scalar(logits.data(), na, w.data());
      double m = 0.0;
      for (std::size_t a = 0; a < na; ++a) m += w[a] * x[a];
      const double wq = quad.weights[static_cast<std::size_t>(g)];
      psi_p += wq * lz;
      f_p += wq * m * m;
    }
    psi_acc += p0 * psi_p;
    f_acc += p0 * f_p;
  }
  ChannelValues out;
  out.psi = psi_acc;
  out.overlap = Eigen::MatrixXd::Constant(1, 1, f_acc);
  return out;
}

} // namespace

SNRMatrix::SNRMatrix(const Eigen::MatrixXd &gamma) {
  if (gamma.rows() != gamma.cols() || gamma.rows() < 1) throw DomainError("SNRMatrix: gamma must be square, k >= 1");
  if (!gamma.allFinite()) throw DomainError("SNRMatrix: gamma must be finite");
  const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale)
    throw DomainError("SNRMatrix: gamma is not symmetric");
  value_ = 0.5 * (gamma + gamma.transpose());

  if (value_.rows() == 1) {
    double g = value_(0, 0);
    if (g < -kEigClip * scale) throw DomainError("SNRMatrix: gamma has a negative eigenvalue " + std::to_string(g));
    g = std::max(g, 0.0);
    value_(0, 0) = g;
    root_ = Eigen::MatrixXd::Constant(1, 1, std::sqrt(g));
    zero_ = (g == 0.0);
    return;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(value_);
  if (es.info() != Eigen::Success) throw NumericalError("SNRMatrix: eigen-decomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -kEigClip * scale)
    throw DomainError("SNRMatrix: gamma has a negative eigenvalue " + std::to_string(ev.minCoeff()));
  ev = ev.cwiseMax(0.0);
  const Eigen::MatrixXd &vecs = es.eigenvectors();
  value_ = vecs * ev.asDiagonal() * vecs.transpose();
  value_ = 0.5 * (value_ + value_.transpose()).eval();
  root_ = vecs * ev.cwiseSqrt().asDiagonal() * vecs.transpose();
  root_ = 0.5 * (root_ + root_.transpose()).eval();
  zero_ = (ev.maxCoeff() == 0.0);
}

SNRMatrix SNRMatrix::scalar(double gamma) { return SNRMatrix(Eigen::MatrixXd::Constant(1, 1, gamma)); }

SNRMatrix SNRMatrix::scaled_identity(int k, double gamma) {
  return SNRMatrix(gamma * Eigen::MatrixXd::Identity(k, k));
}

ChannelValues channel_values(const DiscretePrior &prior, const SNRMatrix &gamma, const GaussQuadrature &quad) {
  check_dims(prior, gamma, "psi/overlap_F");
  const int k = prior.dim();
  if (gamma.is_zero()) {
    const Eigen::VectorXd mu = moments(prior).mean;
    return ChannelValues{0.0, mu * mu.transpose()};
  }
  if (k == 1) return channel_values_k1(prior, gamma.value()(0, 0), quad);
  return detail::channel_values_general(prior, gamma, quad);
}

ChannelValues detail::channel_values_general(const DiscretePrior &prior, const SNRMatrix &gamma,
                                             const GaussQuadrature &quad) {
  check_dims(prior, gamma, "psi/overlap_F");
  const int k = prior.dim();
  const NormalGrid grid = normal_grid(k, quad);
  const ChannelKernel kernel(prior, gamma);
  const auto &x = prior.atoms();
  Eigen::VectorXd post(x.rows());
  Eigen::VectorXd y(k);
  Eigen::VectorXd m(k);
  double psi_acc = 0.0;
  Eigen::MatrixXd f_acc = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index p = 0; p < x.rows(); ++p) {
    const Eigen::VectorXd signal = gamma.root() * x.row(p).transpose();
    double psi_p = 0.0;
    Eigen::MatrixXd f_p = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index g = 0; g < grid.points.rows(); ++g) {
      y = signal + grid.points.row(g).transpose();
      const double lz = kernel.posterior(y, post);
      m.noalias() = x.transpose() * post;
      const double wq = grid.weights[g];
      psi_p += wq * lz;
      f_p.noalias() += wq * m * m.transpose();
    }
    psi_acc += prior.probs()[p] * psi_p;
    f_acc += prior.probs()[p] * f_p;
  }
  return ChannelValues{psi_acc, 0.5 * (f_acc + f_acc.transpose())};
}

double psi(const DiscretePrior &prior, const SNRMatrix &gamma, const GaussQuadrature &quad) {
  return channel_values(prior, gamma, quad).psi;
}

Eigen::MatrixXd overlap_F(const DiscretePrior &prior, const SNRMatrix &gamma, const GaussQuadrature &quad) {
  return channel_values(prior, gamma, quad).overlap;
}

Eigen::VectorXd denoiser(const DiscretePrior &prior, const SNRMatrix &gamma, const Eigen::VectorXd &y) {
  check_dims(prior, gamma, "denoiser");
  if (y.size() != prior.dim()) throw DomainError("denoiser: observation has wrong dimension");
  const ChannelKernel kernel(prior, gamma);
  Eigen::VectorXd post(prior.atoms().rows());
  kernel.posterior(y, post);
  return prior.atoms().transpose() * post;
}

Eigen::MatrixXd denoiser_derivative(const DiscretePrior &prior, const SNRMatrix &gamma, const Eigen::VectorXd &y) {
  check_dims(prior, gamma, "denoiser_derivative");
  if (y.size() != prior.dim()) throw DomainError("denoiser_derivative: observation has wrong dimension");
  const ChannelKernel kernel(prior, gamma);
  const auto &x = prior.atoms();
  Eigen::VectorXd post(x.rows());
  kernel.posterior(y, post);
  const Eigen::VectorXd m = x.transpose() * post;
  const Eigen::MatrixXd cov = x.transpose() * post.asDiagonal() * x - m * m.transpose();
  return cov * gamma.root();
}

ScalarDenoise denoise_scalar(const DiscretePrior &prior, double gamma, double y) {
  if (prior.dim() != 1) throw DomainError("denoise_scalar: prior must be one-dimensional");
  if (!(gamma >= 0.0)) throw DomainError("denoise_scalar: gamma must be >= 0");
  const double root = std::sqrt(gamma);
  const auto n = static_cast<Eigen::Index>(prior.size());
  const auto &x = prior.atoms();
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < n; ++a)
    mx = std::max(mx, prior.log_probs()[a] + root * y * x(a, 0) - 0.5 * gamma * x(a, 0) * x(a, 0));
  double s = 0.0, m1 = 0.0, m2 = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    const double xa = x(a, 0);
    const double w = std::exp(prior.log_probs()[a] + root * y * xa - 0.5 * gamma * xa * xa - mx);
    s += w;
    m1 += w * xa;
    m2 += w * xa * xa;
  }
  m1 /= s;
  m2 /= s;
  return ScalarDenoise{m1, root * std::max(m2 - m1 * m1, 0.0)};
}

} // namespace rslimits
