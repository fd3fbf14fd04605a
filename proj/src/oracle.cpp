#include "rslimits/oracle.hpp"

#include "rslimits/errors.hpp"
#include "rslimits/parallel.hpp"
#include "rslimits/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace rslimits {

namespace {

// Assignments of one side (all of S^n in odometer order) with their prior log-probabilities.
struct SideTable {
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> index;
  std::vector<Eigen::MatrixXd> values; // each n x k
  std::vector<double> log_prob;
};

std::int64_t checked_count(std::size_t support, std::int64_t len, std::int64_t cap, std::int64_t already) {
  std::int64_t total = already;
  for (std::int64_t i = 0; i < len; ++i) {
    if (total > cap / static_cast<std::int64_t>(support)) return -1;
    total *= static_cast<std::int64_t>(support);
  }
  return total;
}

void check_size(const DiscretePrior &pu, const DiscretePrior &pv, std::int64_t n, std::int64_t m, std::int64_t cap) {
  const std::int64_t cu = checked_count(pu.size(), n, cap, 1);
  const std::int64_t total = cu < 0 ? -1 : checked_count(pv.size(), m, cap, cu);
  if (total < 0 || total > cap)
    throw SizeError("oracle: |S_u|^n |S_v|^m exceeds the enumeration cap of " + std::to_string(cap) + " (|S_u|=" +
                    std::to_string(pu.size()) + ", |S_v|=" + std::to_string(pv.size()) + ", n=" + std::to_string(n) +
                    ", m=" + std::to_string(m) + ")");
}

SideTable build_side(const DiscretePrior &prior, std::int64_t len) {
  const auto s = static_cast<std::int64_t>(prior.size());
  std::int64_t count = 1;
  for (std::int64_t i = 0; i < len; ++i) count *= s;
  SideTable t;
  t.index.resize(count, len);
  t.values.reserve(static_cast<std::size_t>(count));
  t.log_prob.reserve(static_cast<std::size_t>(count));
  std::vector<std::int32_t> digits(static_cast<std::size_t>(len), 0);
  for (std::int64_t c = 0; c < count; ++c) {
    Eigen::MatrixXd x(len, prior.dim());
    double lp = 0.0;
    for (std::int64_t i = 0; i < len; ++i) {
      const auto d = digits[static_cast<std::size_t>(i)];
      t.index(c, i) = d;
      x.row(i) = prior.atoms().row(d);
      lp += prior.log_probs()[d];
    }
    t.values.push_back(std::move(x));
    t.log_prob.push_back(lp);
    for (std::int64_t i = len - 1; i >= 0; --i) {
      auto &d = digits[static_cast<std::size_t>(i)];
      if (++d < s) break;
      d = 0;
    }
  }
  return t;
}

class Enumerator {
public:
  Enumerator(const DiscretePrior &pu, const DiscretePrior &pv, std::int64_t n, std::int64_t m, std::int64_t cap)
      : n_(n), m_(m) {
    if (n < 1 || m < 1) throw DomainError("oracle: n and m must be >= 1");
    if (pu.dim() != pv.dim()) throw DomainError("oracle: priors have different dimensions");
    check_size(pu, pv, n, m, cap);
    u_ = build_side(pu, n);
    v_ = build_side(pv, m);
  }

  std::int64_t num_configs() const { return static_cast<std::int64_t>(u_.values.size() * v_.values.size()); }
  const SideTable &u() const { return u_; }
  const SideTable &v() const { return v_; }

  struct Summary {
    double log_Z = 0.0;
    Eigen::MatrixXd mean; // n x m posterior mean of u_i'v_j
  };

  // Fills log_weights (if given) and returns log Z with the posterior mean.
  Summary summarize(const Eigen::MatrixXd &Y, double lambda, Eigen::VectorXd *log_weights = nullptr) const {
    const std::size_t cu = u_.values.size();
    const std::size_t cv = v_.values.size();
    Eigen::VectorXd lw(static_cast<Eigen::Index>(cu * cv));
    const double a = std::sqrt(lambda / static_cast<double>(n_));
    const double b = lambda / (2.0 * static_cast<double>(n_));
    for (std::size_t p = 0; p < cu; ++p) {
      const Eigen::MatrixXd &x = u_.values[p];
      for (std::size_t q = 0; q < cv; ++q) {
        double h = 0.0;
        if (lambda != 0.0) {
          const Eigen::MatrixXd s = x * v_.values[q].transpose();
          h = a * Y.cwiseProduct(s).sum() - b * s.squaredNorm();
        }
        lw[static_cast<Eigen::Index>(p * cv + q)] = u_.log_prob[p] + v_.log_prob[q] + h;
      }
    }
    Summary out;
    const double top = lw.maxCoeff();
    const Eigen::VectorXd w = (lw.array() - top).exp();
    const double total = w.sum();
    // At lambda = 0 the posterior is the prior and Z = 1 exactly.
    out.log_Z = lambda == 0.0 ? 0.0 : top + std::log(total);
    out.mean = Eigen::MatrixXd::Zero(n_, m_);
    for (std::size_t p = 0; p < cu; ++p)
      for (std::size_t q = 0; q < cv; ++q) {
        const double wc = w[static_cast<Eigen::Index>(p * cv + q)] / total;
        if (wc == 0.0) continue;
        out.mean.noalias() += wc * (u_.values[p] * v_.values[q].transpose());
      }
    if (log_weights) *log_weights = std::move(lw);
    return out;
  }

private:
  std::int64_t n_, m_;
  SideTable u_, v_;
};

struct Draw {
  Eigen::MatrixXd U, V, Z, U_alt;
};

// Stream layout for one Monte Carlo sample: U rows, V rows, Z row-major, then
// an independent copy of U used only by the negative control.
Draw draw_sample(const DiscretePrior &pu, const DiscretePrior &pv, std::int64_t n, std::int64_t m,
                 std::uint64_t seed, std::int64_t index) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  Draw d;
  d.U.resize(n, pu.dim());
  d.V.resize(m, pv.dim());
  d.Z.resize(n, m);
  d.U_alt.resize(n, pu.dim());
  for (std::int64_t i = 0; i < n; ++i) d.U.row(i) = pu.atoms().row(rng.atom_index(pu));
  for (std::int64_t j = 0; j < m; ++j) d.V.row(j) = pv.atoms().row(rng.atom_index(pv));
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < m; ++j) d.Z(i, j) = rng.normal();
  for (std::int64_t i = 0; i < n; ++i) d.U_alt.row(i) = pu.atoms().row(rng.atom_index(pu));
  return d;
}

Eigen::MatrixXd observe(const Draw &d, double lambda) {
  const double n = static_cast<double>(d.U.rows());
  return std::sqrt(lambda / n) * d.U * d.V.transpose() + d.Z;
}

OracleEstimate summarize(const std::vector<double> &xs, std::uint64_t seed) {
  OracleEstimate e;
  e.num_samples = static_cast<std::int64_t>(xs.size());
  e.seed = seed;
  if (xs.empty()) return e;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  e.value = mean;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    e.std_error = sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return e;
}

IdentityCheck make_check(const std::vector<double> &lhs, const std::vector<double> &rhs, std::uint64_t seed,
                         double bias_bound) {
  std::vector<double> diff(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) diff[i] = lhs[i] - rhs[i];
  IdentityCheck c;
  c.lhs = summarize(lhs, seed);
  c.rhs = summarize(rhs, seed);
  c.difference = summarize(diff, seed);
  c.bias_bound = bias_bound;
  return c;
}

void check_common(double lambda, const OracleOptions &options, const char *where) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError(std::string(where) + ": lambda must be >= 0");
  if (options.num_samples < 1) throw DomainError(std::string(where) + ": num_samples must be >= 1");
}

double mean_sq_product(const DiscretePrior &pu, const DiscretePrior &pv) {
  return (moments(pu).second_moment * moments(pv).second_moment).trace();
}

} // namespace

bool IdentityCheck::holds(double z) const {
  return std::abs(difference.value) <= z * difference.std_error + bias_bound;
}

PosteriorTable exact_posterior(const Instance &inst, const DiscretePrior &prior_u, const DiscretePrior &prior_v,
                               std::int64_t max_configs) {
  if (inst.U.cols() != prior_u.dim() || inst.V.cols() != prior_v.dim())
    throw DomainError("exact_posterior: instance rank does not match the priors");
  const Enumerator en(prior_u, prior_v, inst.n, inst.m, max_configs);
  PosteriorTable t;
  auto s = en.summarize(inst.Y, inst.lambda, &t.log_weights);
  t.log_Z = s.log_Z;
  t.posterior_mean = std::move(s.mean);
  const auto cu = en.u().index.rows();
  const auto cv = en.v().index.rows();
  t.configs.resize(cu * cv, inst.n + inst.m);
  for (Eigen::Index p = 0; p < cu; ++p)
    for (Eigen::Index q = 0; q < cv; ++q) {
      t.configs.row(p * cv + q).head(inst.n) = en.u().index.row(p);
      t.configs.row(p * cv + q).tail(inst.m) = en.v().index.row(q);
    }
  return t;
}

OracleEstimate mmse_n(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n, std::int64_t m,
                      double lambda, const OracleOptions &options) {
  check_common(lambda, options, "mmse_n");
  const Enumerator en(prior_u, prior_v, n, m, options.max_configs);
  const auto xs = parallel_map<double>(options.num_samples, options.threads, [&](std::int64_t i) {
    const Draw d = draw_sample(prior_u, prior_v, n, m, options.seed, i);
    const auto s = en.summarize(observe(d, lambda), lambda);
    return (d.U * d.V.transpose() - s.mean).squaredNorm() / static_cast<double>(n * m);
  });
  return summarize(xs, options.seed);
}

OracleEstimate free_energy_n(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n,
                             std::int64_t m, double lambda, const OracleOptions &options) {
  check_common(lambda, options, "free_energy_n");
  const Enumerator en(prior_u, prior_v, n, m, options.max_configs);
  const auto xs = parallel_map<double>(options.num_samples, options.threads, [&](std::int64_t i) {
    const Draw d = draw_sample(prior_u, prior_v, n, m, options.seed, i);
    return en.summarize(observe(d, lambda), lambda).log_Z / static_cast<double>(n);
  });
  return summarize(xs, options.seed);
}

OracleEstimate mutual_information_n(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n,
                                    std::int64_t m, double lambda, const OracleOptions &options) {
  OracleEstimate f = free_energy_n(prior_u, prior_v, n, m, lambda, options);
  const double energy =
      lambda * static_cast<double>(m) / (2.0 * static_cast<double>(n)) * mean_sq_product(prior_u, prior_v);
  f.value = energy - f.value;
  return f;
}

IdentityCheck nishimori_check(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n,
                              std::int64_t m, double lambda, const OracleOptions &options, bool negative_control) {
  check_common(lambda, options, "nishimori_check");
  const Enumerator en(prior_u, prior_v, n, m, options.max_configs);
  const double nm = static_cast<double>(n * m);
  const auto pairs =
      parallel_map<std::pair<double, double>>(options.num_samples, options.threads, [&](std::int64_t i) {
        const Draw d = draw_sample(prior_u, prior_v, n, m, options.seed, i);
        const auto s = en.summarize(observe(d, lambda), lambda);
        const Eigen::MatrixXd planted = (negative_control ? d.U_alt : d.U) * d.V.transpose();
        return std::make_pair(s.mean.squaredNorm() / nm, s.mean.cwiseProduct(planted).sum() / nm);
      });
  std::vector<double> lhs, rhs;
  lhs.reserve(pairs.size());
  rhs.reserve(pairs.size());
  for (const auto &[a, b] : pairs) {
    lhs.push_back(a);
    rhs.push_back(b);
  }
  return make_check(lhs, rhs, options.seed, 0.0);
}

IMmseReport i_mmse_check(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n, std::int64_t m,
                         double lambda, double h, const OracleOptions &options) {
  check_common(lambda, options, "i_mmse_check");
  if (h <= 0.0) h = 1e-2 * lambda;
  if (!(h > 0.0) || lambda - h < 0.0) throw DomainError("i_mmse_check: need h > 0 and lambda - h >= 0");
  const Enumerator en(prior_u, prior_v, n, m, options.max_configs);
  const double dn = static_cast<double>(n);
  const double nm = static_cast<double>(n * m);
  const double second = mean_sq_product(prior_u, prior_v);

  struct Row {
    double fd, slope, mmse_direct, mmse_expanded;
  };
  const auto rows = parallel_map<Row>(options.num_samples, options.threads, [&](std::int64_t i) {
    const Draw d = draw_sample(prior_u, prior_v, n, m, options.seed, i);
    const double up = en.summarize(observe(d, lambda + h), lambda + h).log_Z / dn;
    const double down = en.summarize(observe(d, lambda - h), lambda - h).log_Z / dn;
    const auto s = en.summarize(observe(d, lambda), lambda);
    const Eigen::MatrixXd planted = d.U * d.V.transpose();
    const double overlap = s.mean.cwiseProduct(planted).sum() / nm; // (1/nm) sum <s_ij> S_ij
    Row r;
    r.fd = (up - down) / (2.0 * h);
    r.slope = static_cast<double>(m) / (2.0 * dn) * overlap;
    r.mmse_direct = (planted - s.mean).squaredNorm() / nm;
    r.mmse_expanded = second - overlap;
    return r;
  });

  std::vector<double> fd, slope, direct, expanded;
  for (const Row &r : rows) {
    fd.push_back(r.fd);
    slope.push_back(r.slope);
    direct.push_back(r.mmse_direct);
    expanded.push_back(r.mmse_expanded);
  }
  IMmseReport rep;
  rep.h = h;
  rep.derivative = make_check(fd, slope, options.seed, h * h);
  rep.mmse = make_check(direct, expanded, options.seed, 0.0);
  return rep;
}

} // namespace rslimits
