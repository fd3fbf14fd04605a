#pragma once

#include "rslimits/amp.hpp"
#include "rslimits/prior.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace rslimits {

inline constexpr std::int64_t kMaxPosteriorConfigs = 1'000'000;

/// Full posterior of (u, v) given Y over S_u^n x S_v^m.
///
/// Row c of `configs` holds atom indices (u_1..u_n, v_1..v_m). Rows follow an
/// odometer over the atom indices with v_m varying fastest.
struct PosteriorTable {
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> configs;
  Eigen::VectorXd log_weights; ///< log P0(u, v) + H_n(u, v)
  double log_Z = 0.0;
  Eigen::MatrixXd posterior_mean; ///< n x m, E[u_i' v_j | Y]
};

PosteriorTable exact_posterior(const Instance &inst, const DiscretePrior &prior_u, const DiscretePrior &prior_v,
                               std::int64_t max_configs = kMaxPosteriorConfigs);

struct OracleOptions {
  std::int64_t num_samples = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::int64_t max_configs = kMaxPosteriorConfigs;
};

struct OracleEstimate {
  double value = 0.0;
  double std_error = 0.0; ///< sample standard deviation / sqrt(num_samples)
  std::int64_t num_samples = 0;
  std::uint64_t seed = 0;
};

/// (1/nm) sum_ij E (U_i'V_j - E[u_i'v_j | Y])^2.
OracleEstimate mmse_n(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n, std::int64_t m,
                      double lambda, const OracleOptions &options = {});

/// (1/n) E log Z_n.
OracleEstimate free_energy_n(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n,
                             std::int64_t m, double lambda, const OracleOptions &options = {});

/// (1/n) E H_n(U, V) - F_n, with (1/n) E H_n(U, V) = (lambda m / 2n) Tr[E UU' E VV'] in closed form.
OracleEstimate mutual_information_n(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n,
                                    std::int64_t m, double lambda, const OracleOptions &options = {});

/// Two Monte Carlo estimates that should agree, with the paired difference.
struct IdentityCheck {
  OracleEstimate lhs;
  OracleEstimate rhs;
  OracleEstimate difference; ///< per-sample lhs - rhs
  double bias_bound = 0.0;   ///< deterministic slack added to the sigma test

  /// |difference| <= z * std_error + bias_bound
  bool holds(double z = 3.0) const;
};

/// lhs = (1/nm) sum_ij E<u_i'v_j>^2, rhs = (1/nm) sum_ij E<u_i'v_j> U_i'V_j.
/// With `negative_control` the planted U in rhs is replaced by an independent draw.
IdentityCheck nishimori_check(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n,
                              std::int64_t m, double lambda, const OracleOptions &options = {},
                              bool negative_control = false);

struct IMmseReport {
  double h = 0.0;
  /// lhs: central difference (F_n(lambda+h) - F_n(lambda-h)) / 2h on common noise;
  /// rhs: (1/2n^2) sum_ij E<(u_i'v_j)(U_i'V_j)>.
  IdentityCheck derivative;
  /// lhs: mmse_n estimated directly; rhs: Tr[E UU' E VV'] - (2n/m) F_n'(lambda).
  IdentityCheck mmse;
};

/// h <= 0 selects the default 1e-2 * lambda. Requires lambda - h >= 0 and h > 0.
IMmseReport i_mmse_check(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n, std::int64_t m,
                         double lambda, double h = 0.0, const OracleOptions &options = {});

} // namespace rslimits
