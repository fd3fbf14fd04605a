#pragma once

#include "rslimits/prior.hpp"
#include "rslimits/quadrature.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace rslimits {

/// k x k symmetric PSD overlap (q1, q2, Q_u, Q_v, ...).
using OverlapMatrix = Eigen::MatrixXd;
using OverlapPair = std::pair<OverlapMatrix, OverlapMatrix>;

/// Symmetrize and clip negative eigenvalues to zero.
OverlapMatrix project_psd(const OverlapMatrix &q);

/// Candidate element of Gamma(lambda, alpha):
///   q2 = F_U(lambda alpha q1),  q1 = F_V(lambda q2).
struct FixedPoint {
  OverlapMatrix q1;
  OverlapMatrix q2;
  double residual = 0.0;  ///< max of both equation residuals (Frobenius)
  double potential = 0.0; ///< value of the RS potential at (q1, q2)
  int iterations = 0;
  bool converged = false;
};

struct SolverConfig {
  GaussQuadrature quad = gauss_hermite(kDefaultQuadOrder);
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 10000;
  /// k = 1 only: number of grid points on [0, E V^2] scanned for sign changes
  /// of the reduced fixed-point map.
  int scan_points = 32;
  double init_eps = 1e-3;
  double dedup_tol = 1e-6;
  double tie_tol = 1e-9;
  std::vector<OverlapPair> extra_inits;
};

/// RS potential
///   psi_U(lambda alpha q1) + alpha psi_V(lambda q2) - lambda alpha Tr[q1 q2] / 2.
double rs_potential(double lambda, double alpha, const OverlapMatrix &q1, const OverlapMatrix &q2,
                    const DiscretePrior &prior_u, const DiscretePrior &prior_v, const GaussQuadrature &quad);

struct StateEvolutionResult {
  std::vector<OverlapPair> trajectory; ///< includes the initial point
  FixedPoint point;
};

/// Damped Gauss-Seidel iteration
///   q2 <- (1-d) F_U(lambda alpha q1) + d q2;   q1 <- (1-d) F_V(lambda q2) + d q1
/// stopping once the residual at the current iterate is <= tol. Non-convergence
/// is reported through point.converged, never thrown.
StateEvolutionResult state_evolution(double lambda, double alpha, const DiscretePrior &prior_u,
                                     const DiscretePrior &prior_v, const OverlapPair &init,
                                     const SolverConfig &config);

/// Multi-start enumeration of Gamma(lambda, alpha); converged points only,
/// deduplicated, annotated with their potential. Throws NumericalError when no
/// start converges.
std::vector<FixedPoint> find_fixed_points(double lambda, double alpha, const DiscretePrior &prior_u,
                                          const DiscretePrior &prior_v, const SolverConfig &config = {});

struct RSSolution {
  double lambda = 0.0;
  double alpha = 1.0;
  double free_energy = 0.0;
  double mutual_information = 0.0; ///< nats, per-n limit
  double mmse = 0.0;
  double dmse = 0.0;
  double Q = 0.0; ///< Tr[q1 q2] at the selected maximizer
  std::vector<FixedPoint> maximizers; ///< selected maximizer first
  std::vector<FixedPoint> fixed_points;
  bool degenerate = false;
  std::string warning;

  const FixedPoint &selected() const { return maximizers.front(); }
};

RSSolution solve(double lambda, double alpha, const DiscretePrior &prior_u, const DiscretePrior &prior_v,
                 const SolverConfig &config = {});

/// Tr[E UU' E VV'] - Tr[(EU)(EU)' (EV)(EV)'].
double dmse(const DiscretePrior &prior_u, const DiscretePrior &prior_v);

/// Tr[(EU)(EU)' (EV)(EV)'], the value of Q below the threshold.
double mean_product(const DiscretePrior &prior_u, const DiscretePrior &prior_v);

/// Information-theoretic threshold by bisection on [Q(lambda) > mean_product + 1e-8].
/// Returns 0 when either prior has a nonzero mean (the indicator is then
/// positive for every lambda > 0). Throws BracketError if the indicator does
/// not switch from false to true across [lo, hi].
double lambda_c(const DiscretePrior &prior_u, const DiscretePrior &prior_v, double alpha, double lo, double hi,
                double tol, const SolverConfig &config = {});

struct MinMaxGrid {
  int q1_points = 400;
  int q2_points = 400;
  /// q2 is searched on [0, E U^2 + margin] (entrywise box for k = 2).
  double margin = 4.0;
};

struct MinMaxReport {
  double sup_inf = 0.0;
  double sup_gamma = 0.0;
  double difference = 0.0; ///< sup_inf - sup_gamma
  OverlapMatrix argmax_q1;
};

/// Grid evaluation of sup_{q1} inf_{q2} of the RS potential, compared with the
/// supremum over the fixed-point set. k = 1, or k = 2 with a coarse grid
/// (q1_points / q2_points then count values per matrix coordinate).
MinMaxReport minmax_check(double lambda, double alpha, const DiscretePrior &prior_u, const DiscretePrior &prior_v,
                          const MinMaxGrid &grid = {}, const SolverConfig &config = {});

} // namespace rslimits
