#include "rslimits/amp.hpp"

#include "rslimits/errors.hpp"
#include "rslimits/random.hpp"
#include "rslimits/scalar_channel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace rslimits {

namespace {

constexpr char kMagic[5] = {'R', 'S', 'L', 'M', '1'};
constexpr std::uint64_t kStreamU = 1;
constexpr std::uint64_t kStreamV = 2;
constexpr std::uint64_t kStreamZ = 3;
constexpr std::uint64_t kStreamAmpInit = 4;
constexpr std::uint64_t kStreamPca = 5;

static_assert(std::endian::native == std::endian::little, "binary instance I/O assumes a little-endian host");

Eigen::MatrixXd sample_rows(const DiscretePrior &prior, std::int64_t rows, Rng &rng) {
  Eigen::MatrixXd out(rows, prior.dim());
  for (std::int64_t i = 0; i < rows; ++i) out.row(i) = prior.atoms().row(rng.atom_index(prior));
  return out;
}

template <typename T> void put(std::ofstream &os, const T &v) { os.write(reinterpret_cast<const char *>(&v), sizeof v); }

template <typename T> T get(std::ifstream &is) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof v);
  if (!is) throw DomainError("read_instance: truncated file");
  return v;
}

void put_row_major(std::ofstream &os, const Eigen::MatrixXd &a) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = a;
  os.write(reinterpret_cast<const char *>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

Eigen::MatrixXd get_row_major(std::ifstream &is, std::int64_t rows, std::int64_t cols) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  is.read(reinterpret_cast<char *>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!is) throw DomainError("read_instance: truncated file");
  return rm;
}

// Posterior mean for the effective field r ~ lambda q X + sqrt(lambda q) g,
// i.e. the scalar channel at SNR gamma = lambda q observed at y = r / sqrt(q).
// Returns the mean and its derivative in r.
ScalarDenoise denoise_field(const DiscretePrior &prior, double lambda, double q, double mean, double r) {
  if (!(q > 0.0) || lambda == 0.0) return ScalarDenoise{mean, 0.0};
  const double root_q = std::sqrt(q);
  ScalarDenoise d = denoise_scalar(prior, lambda * q, r / root_q);
  d.derivative /= root_q;
  return d;
}

} // namespace

Instance generate_instance(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n, std::int64_t m,
                           double lambda, std::uint64_t seed, std::int64_t max_entries) {
  if (n < 1 || m < 1) throw DomainError("generate_instance: n and m must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("generate_instance: lambda must be >= 0");
  if (prior_u.dim() != prior_v.dim()) throw DomainError("generate_instance: priors have different dimensions");
  if (n > max_entries / m)
    throw SizeError("generate_instance: n*m = " + std::to_string(n) + "*" + std::to_string(m) + " exceeds cap " +
                    std::to_string(max_entries));

  Instance inst;
  inst.n = n;
  inst.m = m;
  inst.lambda = lambda;
  inst.seed = seed;
  Rng ru(derive_seed(seed, kStreamU));
  Rng rv(derive_seed(seed, kStreamV));
  Rng rz(derive_seed(seed, kStreamZ));
  inst.U = sample_rows(prior_u, n, ru);
  inst.V = sample_rows(prior_v, m, rv);
  inst.Y.resize(n, m);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < m; ++j) inst.Y(i, j) = rz.normal();
  inst.Y.noalias() += std::sqrt(lambda / static_cast<double>(n)) * inst.U * inst.V.transpose();
  return inst;
}

void write_instance(const Instance &inst, const std::filesystem::path &path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DomainError("write_instance: cannot open " + path.string());
  os.write(kMagic, sizeof kMagic);
  put(os, inst.n);
  put(os, inst.m);
  put(os, inst.lambda);
  put_row_major(os, inst.U);
  put_row_major(os, inst.V);
  put_row_major(os, inst.Y);
  if (!os) throw DomainError("write_instance: write failed for " + path.string());
}

Instance read_instance(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("read_instance: cannot open " + path.string());
  char magic[5];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw DomainError("read_instance: bad magic");
  Instance inst;
  inst.n = get<std::int64_t>(is);
  inst.m = get<std::int64_t>(is);
  inst.lambda = get<double>(is);
  if (inst.n < 1 || inst.m < 1) throw DomainError("read_instance: bad dimensions");
  const auto header = static_cast<std::int64_t>(sizeof magic + 2 * sizeof(std::int64_t) + sizeof(double));
  const auto bytes = static_cast<std::int64_t>(std::filesystem::file_size(path));
  const std::int64_t doubles = (bytes - header) / 8;
  const std::int64_t rest = doubles - inst.n * inst.m;
  if ((bytes - header) % 8 != 0 || rest <= 0 || rest % (inst.n + inst.m) != 0)
    throw DomainError("read_instance: file size inconsistent with header");
  const std::int64_t k = rest / (inst.n + inst.m);
  inst.U = get_row_major(is, inst.n, k);
  inst.V = get_row_major(is, inst.m, k);
  inst.Y = get_row_major(is, inst.n, inst.m);
  return inst;
}

double factor_mse(const Eigen::MatrixXd &U, const Eigen::MatrixXd &V, const Eigen::MatrixXd &a,
                  const Eigen::MatrixXd &b) {
  const Eigen::MatrixXd uu = U.transpose() * U;
  const Eigen::MatrixXd vv = V.transpose() * V;
  const Eigen::MatrixXd ua = U.transpose() * a;
  const Eigen::MatrixXd vb = V.transpose() * b;
  const Eigen::MatrixXd aa = a.transpose() * a;
  const Eigen::MatrixXd bb = b.transpose() * b;
  const double total = (uu * vv).trace() - 2.0 * (ua * vb.transpose()).trace() + (aa * bb).trace();
  return std::max(total, 0.0) / (static_cast<double>(U.rows()) * static_cast<double>(V.rows()));
}

std::vector<std::pair<double, double>> se_predict(double lambda, const DiscretePrior &prior_u,
                                                  const DiscretePrior &prior_v, int t_max,
                                                  std::pair<double, double> q0, const GaussQuadrature &quad,
                                                  Schedule schedule) {
  if (prior_u.dim() != 1 || prior_v.dim() != 1) throw DomainError("se_predict: rank-one priors required");
  if (!(q0.first >= 0.0) || !(q0.second >= 0.0)) throw DomainError("se_predict: q0 must be >= 0");
  if (t_max < 0) throw DomainError("se_predict: t_max must be >= 0");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(t_max) + 1);
  out.push_back(q0);
  for (int t = 0; t < t_max; ++t) {
    const auto [qu, qv] = out.back();
    const double next_u = overlap_F(prior_u, SNRMatrix::scalar(lambda * qv), quad)(0, 0);
    const double feed_u = schedule == Schedule::Alternating ? next_u : qu;
    out.emplace_back(next_u, overlap_F(prior_v, SNRMatrix::scalar(lambda * feed_u), quad)(0, 0));
  }
  return out;
}

AmpRun amp_run(const Instance &inst, const DiscretePrior &prior_u, const DiscretePrior &prior_v,
               const AmpOptions &options) {
  if (inst.rank() != 1 || prior_u.dim() != 1 || prior_v.dim() != 1)
    throw DomainError("amp_run: only the rank-one recursion is implemented");
  if (inst.n != inst.m) throw DomainError("amp_run: square instances (m = n) required");
  if (options.t_max < 0) throw DomainError("amp_run: t_max must be >= 0");

  const double lambda = inst.lambda;
  const Eigen::Index n = inst.n;
  const double dn = static_cast<double>(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(dn);
  const double mean_u = moments(prior_u).mean[0];
  const double mean_v = moments(prior_v).mean[0];
  const double bound_u = 10.0 * prior_u.max_abs();
  const double bound_v = 10.0 * prior_v.max_abs();
  const bool alternating = options.schedule == Schedule::Alternating;

  std::vector<std::pair<double, double>> se;
  if (options.coupling == Coupling::StateEvolution)
    se = se_predict(lambda, prior_u, prior_v, options.t_max, options.se_init, options.quad, options.schedule);

  const Eigen::VectorXd U = inst.U.col(0);
  const Eigen::VectorXd V = inst.V.col(0);

  Rng rng(derive_seed(inst.seed, kStreamAmpInit));
  Eigen::VectorXd u_hat(n), v_hat(n);
  for (Eigen::Index i = 0; i < n; ++i) u_hat[i] = prior_u.atoms()(rng.atom_index(prior_u), 0);
  for (Eigen::Index i = 0; i < n; ++i) v_hat[i] = prior_v.atoms()(rng.atom_index(prior_v), 0);
  // Estimate that produced the current field of the other factor (Onsager memory).
  Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(n);
  double onsager_u = 0.0; // mean d u_hat / d field
  double onsager_v = 0.0;

  const auto q_of_u = [&](int t) {
    return options.coupling == Coupling::StateEvolution ? se[static_cast<std::size_t>(t)].first
                                                        : u_hat.squaredNorm() / dn;
  };
  const auto q_of_v = [&](int t) {
    return options.coupling == Coupling::StateEvolution ? se[static_cast<std::size_t>(t)].second
                                                        : v_hat.squaredNorm() / dn;
  };
  const auto record = [&](int t) {
    AMPState s;
    s.t = t;
    s.u_hat = u_hat;
    s.v_hat = v_hat;
    s.q_u = q_of_u(t);
    s.q_v = q_of_v(t);
    s.empirical_overlap_u = u_hat.dot(U) / dn;
    s.empirical_overlap_v = v_hat.dot(V) / dn;
    s.mse = factor_mse(inst.U, inst.V, u_hat, v_hat);
    return s;
  };
  const auto denoise_all = [&](const DiscretePrior &prior, double q, double mean, const Eigen::VectorXd &field,
                               Eigen::VectorXd &out) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const ScalarDenoise r = denoise_field(prior, lambda, q, mean, field[i]);
      out[i] = r.mean;
      d += r.derivative;
    }
    return d / dn;
  };

  AmpRun run;
  run.states.push_back(record(0));
  Eigen::VectorXd field_u(n), field_v(n), next_u(n), next_v(n);
  for (int t = 0; t < options.t_max; ++t) {
    const double q_v = q_of_v(t);
    field_u.noalias() = inv_sqrt_n * (inst.Y * v_hat);
    field_u -= onsager_v * (alternating ? u_hat : u_prev);
    const double du = denoise_all(prior_u, q_v, mean_u, field_u, next_u);

    if (alternating) {
      u_hat.swap(next_u);
      onsager_u = du;
      const double q_u = q_of_u(t + 1);
      field_v.noalias() = inv_sqrt_n * (inst.Y.transpose() * u_hat);
      field_v -= onsager_u * v_hat;
      onsager_v = denoise_all(prior_v, q_u, mean_v, field_v, next_v);
      v_hat.swap(next_v);
    } else {
      const double q_u = q_of_u(t);
      field_v.noalias() = inv_sqrt_n * (inst.Y.transpose() * u_hat);
      field_v -= onsager_u * v_prev;
      const double dv = denoise_all(prior_v, q_u, mean_v, field_v, next_v);
      u_prev.swap(u_hat);
      v_prev.swap(v_hat);
      u_hat.swap(next_u);
      v_hat.swap(next_v);
      onsager_u = du;
      onsager_v = dv;
    }

    if (!u_hat.allFinite() || !v_hat.allFinite() || u_hat.cwiseAbs().maxCoeff() > bound_u ||
        v_hat.cwiseAbs().maxCoeff() > bound_v) {
      run.aborted = true;
      run.abort_reason = "divergence at t=" + std::to_string(t + 1);
      break;
    }
    run.states.push_back(record(t + 1));
  }
  return run;
}

PcaResult pca_baseline(const Instance &inst, double tol, int max_iter) {
  if (inst.rank() != 1) throw DomainError("pca_baseline: rank-one instances only");
  const Eigen::Index m = inst.m;
  Rng rng(derive_seed(inst.seed, kStreamPca));
  Eigen::VectorXd v(m);
  for (Eigen::Index j = 0; j < m; ++j) v[j] = rng.normal();
  v.normalize();

  PcaResult res;
  Eigen::VectorXd yv(inst.n), next(m);
  for (int it = 1; it <= max_iter; ++it) {
    yv.noalias() = inst.Y * v;
    next.noalias() = inst.Y.transpose() * yv;
    next.normalize();
    if (next.dot(v) < 0.0) next = -next;
    const double change = (next - v).norm();
    v.swap(next);
    res.iterations = it;
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  yv.noalias() = inst.Y * v;
  const double sigma = yv.norm();
  const Eigen::VectorXd u = yv / sigma;
  const double dn = static_cast<double>(inst.n);
  const double dm = static_cast<double>(m);
  const double uu = u.dot(inst.U.col(0));
  const double vv = v.dot(inst.V.col(0));
  res.sigma1_scaled = sigma / std::sqrt(dn);
  res.overlap_u_sq = uu * uu / dn;
  res.overlap_v_sq = vv * vv / dm;
  const double norm_u = inst.U.col(0).squaredNorm();
  const double norm_v = inst.V.col(0).squaredNorm();
  res.oracle_scaled_mse = (norm_u * norm_v - uu * uu * vv * vv) / (dn * dm);
  return res;
}

double pca_asymptotic_mse(double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("pca_asymptotic_mse: lambda must be >= 0");
  if (lambda <= 1.0) return 1.0;
  return (1.0 / lambda) * (1.0 - 1.0 / lambda);
}

double pca_asymptotic_oracle_mse(double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("pca_asymptotic_oracle_mse: lambda must be >= 0");
  if (lambda <= 1.0) return 1.0;
  const double c = 1.0 - 1.0 / lambda;
  return 1.0 - c * c;
}

} // namespace rslimits
