#pragma once

#include "rslimits/prior.hpp"
#include "rslimits/quadrature.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace rslimits {

inline constexpr std::int64_t kMaxInstanceEntries = 100'000'000;

/// Y = sqrt(lambda / n) U V' + Z, with Z iid N(0,1).
struct Instance {
  std::int64_t n = 0;
  std::int64_t m = 0;
  double lambda = 0.0;
  Eigen::MatrixXd U; ///< n x k
  Eigen::MatrixXd V; ///< m x k
  Eigen::MatrixXd Y; ///< n x m
  std::uint64_t seed = 0;

  int rank() const noexcept { return static_cast<int>(U.cols()); }
};

/// Draws U (row by row), then V, then Z (row-major) from streams derived from
/// `seed`; the same seed reproduces Y bit for bit.
Instance generate_instance(const DiscretePrior &prior_u, const DiscretePrior &prior_v, std::int64_t n, std::int64_t m,
                           double lambda, std::uint64_t seed, std::int64_t max_entries = kMaxInstanceEntries);

/// Binary dump: "RSLM1", int64 n, int64 m, float64 lambda, then row-major
/// float64 U, V, Y (all little-endian). The rank is implied by the file size.
void write_instance(const Instance &inst, const std::filesystem::path &path);
Instance read_instance(const std::filesystem::path &path);

/// How the denoiser SNRs lambda*q are chosen at each step.
enum class Coupling {
  Empirical,      ///< q_u^t = |u_hat^t|^2 / n, q_v^t = |v_hat^t|^2 / m
  StateEvolution, ///< deterministic SE sequence started at AmpOptions::se_init
};

/// Update order of the two half-steps.
enum class Schedule {
  /// u then v: v^{t+1} is built from u_hat^{t+1}. One chain, so u_hat^t and
  /// v_hat^t carry a common global sign.
  Alternating,
  /// Both factors from the previous iterate, as in the textbook recursion.
  /// Splits into two independent chains; with sign-symmetric priors the sign
  /// of u_hat^t v_hat^t' is then a coin flip.
  Parallel,
};

struct AmpOptions {
  int t_max = 50;
  Coupling coupling = Coupling::Empirical;
  Schedule schedule = Schedule::Alternating;
  std::pair<double, double> se_init{0.0, 0.0};
  GaussQuadrature quad = gauss_hermite(kDefaultQuadOrder);
};

struct AMPState {
  int t = 0;
  Eigen::VectorXd u_hat;
  Eigen::VectorXd v_hat;
  double q_u = 0.0; ///< coupling coordinate used for the next v update
  double q_v = 0.0; ///< coupling coordinate used for the next u update
  double empirical_overlap_u = 0.0; ///< u_hat . U / n
  double empirical_overlap_v = 0.0; ///< v_hat . V / m
  double mse = 0.0;                 ///< |UV' - u_hat v_hat'|_F^2 / (n m)
};

struct AmpRun {
  std::vector<AMPState> states; ///< states[0] is the random initialization
  bool aborted = false;
  std::string abort_reason;

  const AMPState &final_state() const { return states.back(); }
};

/// Rank-one AMP with Onsager correction on a square instance. The initial
/// estimates are drawn iid from the priors using a stream derived from the
/// instance seed.
AmpRun amp_run(const Instance &inst, const DiscretePrior &prior_u, const DiscretePrior &prior_v,
               const AmpOptions &options = {});

/// (1/nm) |UV' - a b'|_F^2 for rank-k factors, in O((n+m) k^2).
double factor_mse(const Eigen::MatrixXd &U, const Eigen::MatrixXd &V, const Eigen::MatrixXd &a,
                  const Eigen::MatrixXd &b);

/// q_u^{t+1} = F_U(lambda q_v^t), q_v^{t+1} = F_V(lambda q_u^t); t_max + 1 entries.
/// With Schedule::Alternating the second update uses q_u^{t+1} instead.
std::vector<std::pair<double, double>> se_predict(double lambda, const DiscretePrior &prior_u,
                                                  const DiscretePrior &prior_v, int t_max,
                                                  std::pair<double, double> q0 = {0.0, 0.0},
                                                  const GaussQuadrature &quad = gauss_hermite(kDefaultQuadOrder),
                                                  Schedule schedule = Schedule::Parallel);

struct PcaResult {
  double sigma1_scaled = 0.0;    ///< top singular value of Y / sqrt(n)
  double overlap_u_sq = 0.0;     ///< (u_hat . U / n)^2 with |u_hat|^2 = n
  double overlap_v_sq = 0.0;     ///< (v_hat . V / m)^2 with |v_hat|^2 = m
  double oracle_scaled_mse = 0.0; ///< min_c (1/nm) |UV' - c u_hat v_hat'|^2
  int iterations = 0;
  bool converged = false;
};

/// Top singular pair of Y by power iteration on Y'Y (tolerance 1e-8, at most
/// 1000 iterations).
PcaResult pca_baseline(const Instance &inst, double tol = 1e-8, int max_iter = 1000);

/// Asymptotic PCA matrix MSE for zero-mean unit-variance priors:
/// 1 for lambda <= 1, (1/lambda)(1 - 1/lambda) otherwise.
double pca_asymptotic_mse(double lambda);

/// Large-n limit of PcaResult::oracle_scaled_mse: 1 for lambda <= 1,
/// 1 - (1 - 1/lambda)^2 otherwise.
double pca_asymptotic_oracle_mse(double lambda);

} // namespace rslimits
