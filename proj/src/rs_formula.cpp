#include "rslimits/rs_formula.hpp"

#include "rslimits/errors.hpp"
#include "rslimits/scalar_channel.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace rslimits {

namespace {

constexpr double kZeroMeanTol = 1e-12;
constexpr double kThresholdSlack = 1e-8;
constexpr int kNearZeroRefinements = 8;

OverlapMatrix overlap_of(const DiscretePrior &prior, double scale, const OverlapMatrix &q, const GaussQuadrature &quad) {
  return overlap_F(prior, SNRMatrix(scale * q), quad);
}

double distance(const FixedPoint &a, const FixedPoint &b) {
  return std::max((a.q1 - b.q1).norm(), (a.q2 - b.q2).norm());
}

void check_pair(const DiscretePrior &prior_u, const DiscretePrior &prior_v, const char *where) {
  if (prior_u.dim() != prior_v.dim())
    throw DomainError(std::string(where) + ": priors have different dimensions (" + std::to_string(prior_u.dim()) +
                      " vs " + std::to_string(prior_v.dim()) + ")");
}

void check_params(double lambda, double alpha, const char *where) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError(std::string(where) + ": lambda must be >= 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError(std::string(where) + ": alpha must be > 0");
}

bool has_zero_mean(const Moments &m) { return m.mean.cwiseAbs().maxCoeff() <= kZeroMeanTol; }

// k = 1: roots of g(q1) = F_V(lambda F_U(lambda alpha q1)) - q1 on [0, E V^2].
std::vector<double> scan_scalar_roots(double lambda, double alpha, const DiscretePrior &prior_u,
                                      const DiscretePrior &prior_v, double upper, const SolverConfig &config) {
  const auto g = [&](double q1) {
    const double q2 = overlap_F(prior_u, SNRMatrix::scalar(lambda * alpha * q1), config.quad)(0, 0);
    return overlap_F(prior_v, SNRMatrix::scalar(lambda * q2), config.quad)(0, 0) - q1;
  };
  const int n = std::max(config.scan_points, 2);
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) grid.push_back(upper * static_cast<double>(i) / static_cast<double>(n - 1));
  // Just above a continuous transition the informative root sits very close to
  // 0, inside the first cell; refine that cell geometrically.
  for (int j = 1; j <= kNearZeroRefinements; ++j) grid.push_back(grid[1] * std::pow(10.0, -j));
  std::sort(grid.begin(), grid.end());
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = g(grid[i]);

  std::vector<double> roots;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(values[i]) <= 0.1 * config.tol) roots.push_back(grid[i]);
    if (i + 1 == grid.size()) continue;
    const double fa = values[i];
    const double fb = values[i + 1];
    if (!(fa * fb < 0.0)) continue;
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(g, grid[i], grid[i + 1], fa, fb,
                                                           boost::math::tools::eps_tolerance<double>(50), max_iter);
    const double lo = bracket.first;
    const double hi = bracket.second;
    roots.push_back(std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi);
  }
  return roots;
}

} // namespace

OverlapMatrix project_psd(const OverlapMatrix &q) {
  if (q.rows() == 1) return OverlapMatrix::Constant(1, 1, std::max(q(0, 0), 0.0));
  const OverlapMatrix sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.eigenvalues().minCoeff() >= 0.0) return sym;
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  OverlapMatrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double rs_potential(double lambda, double alpha, const OverlapMatrix &q1, const OverlapMatrix &q2,
                    const DiscretePrior &prior_u, const DiscretePrior &prior_v, const GaussQuadrature &quad) {
  check_pair(prior_u, prior_v, "rs_potential");
  check_params(lambda, alpha, "rs_potential");
  const int k = prior_u.dim();
  if (q1.rows() != k || q1.cols() != k || q2.rows() != k || q2.cols() != k)
    throw DomainError("rs_potential: overlap shapes do not match the prior dimension");
  if (lambda == 0.0) return 0.0;
  const double pu = psi(prior_u, SNRMatrix(lambda * alpha * q1), quad);
  const double pv = psi(prior_v, SNRMatrix(lambda * q2), quad);
  return pu + alpha * pv - 0.5 * lambda * alpha * (q1 * q2).trace();
}

StateEvolutionResult state_evolution(double lambda, double alpha, const DiscretePrior &prior_u,
                                     const DiscretePrior &prior_v, const OverlapPair &init,
                                     const SolverConfig &config) {
  check_pair(prior_u, prior_v, "state_evolution");
  check_params(lambda, alpha, "state_evolution");
  const int k = prior_u.dim();
  if (init.first.rows() != k || init.first.cols() != k || init.second.rows() != k || init.second.cols() != k)
    throw DomainError("state_evolution: initial overlaps do not match the prior dimension");
  if (!(config.tol > 0.0)) throw DomainError("state_evolution: tol must be > 0");
  if (!(config.damping >= 0.0 && config.damping < 1.0)) throw DomainError("state_evolution: damping must be in [0,1)");

  const double d = config.damping;
  OverlapMatrix q1 = project_psd(init.first);
  OverlapMatrix q2 = project_psd(init.second);

  StateEvolutionResult out;
  out.trajectory.emplace_back(q1, q2);
  FixedPoint &fp = out.point;
  fp.converged = false;

  for (int it = 1; it <= config.max_iter + 1; ++it) {
    const OverlapMatrix target2 = overlap_of(prior_u, lambda * alpha, q1, config.quad);
    const OverlapMatrix target1 = overlap_of(prior_v, lambda, q2, config.quad);
    const double residual = std::max((q2 - target2).norm(), (q1 - target1).norm());
    fp.residual = residual;
    fp.iterations = std::min(it, config.max_iter);
    if (residual <= config.tol) {
      fp.converged = true;
      break;
    }
    if (it > config.max_iter) break;
    q2 = project_psd((1.0 - d) * target2 + d * q2);
    q1 = project_psd((1.0 - d) * overlap_of(prior_v, lambda, q2, config.quad) + d * q1);
    out.trajectory.emplace_back(q1, q2);
  }
  fp.q1 = q1;
  fp.q2 = q2;
  fp.potential = rs_potential(lambda, alpha, q1, q2, prior_u, prior_v, config.quad);
  return out;
}

std::vector<FixedPoint> find_fixed_points(double lambda, double alpha, const DiscretePrior &prior_u,
                                          const DiscretePrior &prior_v, const SolverConfig &config) {
  check_pair(prior_u, prior_v, "find_fixed_points");
  check_params(lambda, alpha, "find_fixed_points");
  const int k = prior_u.dim();
  const Moments mu = moments(prior_u);
  const Moments mv = moments(prior_v);

  std::vector<OverlapPair> inits;
  if (has_zero_mean(mu) && has_zero_mean(mv)) inits.emplace_back(OverlapMatrix::Zero(k, k), OverlapMatrix::Zero(k, k));
  inits.emplace_back(config.init_eps * OverlapMatrix::Identity(k, k), config.init_eps * OverlapMatrix::Identity(k, k));
  inits.emplace_back(mv.second_moment, mu.second_moment);
  inits.emplace_back(mv.mean * mv.mean.transpose(), mu.mean * mu.mean.transpose());
  if (k == 1 && lambda > 0.0) {
    for (double r : scan_scalar_roots(lambda, alpha, prior_u, prior_v, mv.second_moment(0, 0), config)) {
      const OverlapMatrix q1 = OverlapMatrix::Constant(1, 1, r);
      inits.emplace_back(q1, overlap_of(prior_u, lambda * alpha, q1, config.quad));
    }
  }
  for (const auto &extra : config.extra_inits) inits.push_back(extra);

  std::vector<FixedPoint> points;
  for (const auto &init : inits) {
    FixedPoint fp = state_evolution(lambda, alpha, prior_u, prior_v, init, config).point;
    if (!fp.converged) continue;
    // Of two copies of the same point keep the more accurate one.
    const auto dup = std::find_if(points.begin(), points.end(),
                                  [&](const FixedPoint &p) { return distance(p, fp) <= config.dedup_tol; });
    if (dup == points.end())
      points.push_back(std::move(fp));
    else if (fp.residual < dup->residual)
      *dup = std::move(fp);
  }
  if (points.empty())
    throw NumericalError("find_fixed_points: no start converged at lambda=" + std::to_string(lambda) +
                         " (tol=" + std::to_string(config.tol) + ", max_iter=" + std::to_string(config.max_iter) + ")");
  std::sort(points.begin(), points.end(),
            [](const FixedPoint &a, const FixedPoint &b) { return (a.q1 * a.q2).trace() < (b.q1 * b.q2).trace(); });
  return points;
}

double mean_product(const DiscretePrior &prior_u, const DiscretePrior &prior_v) {
  check_pair(prior_u, prior_v, "mean_product");
  const Eigen::VectorXd eu = moments(prior_u).mean;
  const Eigen::VectorXd ev = moments(prior_v).mean;
  return ((eu * eu.transpose()) * (ev * ev.transpose())).trace();
}

double dmse(const DiscretePrior &prior_u, const DiscretePrior &prior_v) {
  check_pair(prior_u, prior_v, "dmse");
  const Moments mu = moments(prior_u);
  const Moments mv = moments(prior_v);
  return (mu.second_moment * mv.second_moment).trace() - mean_product(prior_u, prior_v);
}

RSSolution solve(double lambda, double alpha, const DiscretePrior &prior_u, const DiscretePrior &prior_v,
                 const SolverConfig &config) {
  RSSolution sol;
  sol.lambda = lambda;
  sol.alpha = alpha;
  sol.fixed_points = find_fixed_points(lambda, alpha, prior_u, prior_v, config);

  double best = -std::numeric_limits<double>::infinity();
  for (const auto &fp : sol.fixed_points) best = std::max(best, fp.potential);
  for (const auto &fp : sol.fixed_points)
    if (fp.potential >= best - config.tie_tol) sol.maximizers.push_back(fp);
  std::stable_sort(sol.maximizers.begin(), sol.maximizers.end(), [](const FixedPoint &a, const FixedPoint &b) {
    return (a.q1 * a.q2).trace() > (b.q1 * b.q2).trace();
  });
  sol.degenerate = sol.maximizers.size() > 1;
  if (sol.degenerate)
    sol.warning = std::to_string(sol.maximizers.size()) + " fixed points tie for the maximum potential at lambda=" +
                  std::to_string(lambda) + "; using the one with the largest Tr[q1 q2]";

  const Moments mu = moments(prior_u);
  const Moments mv = moments(prior_v);
  const double full = (mu.second_moment * mv.second_moment).trace();
  const FixedPoint &star = sol.maximizers.front();
  sol.free_energy = best;
  sol.mutual_information = 0.5 * lambda * alpha * full - best;
  sol.Q = (star.q1 * star.q2).trace();
  sol.mmse = full - sol.Q;
  sol.dmse = dmse(prior_u, prior_v);
  return sol;
}

double lambda_c(const DiscretePrior &prior_u, const DiscretePrior &prior_v, double alpha, double lo, double hi,
                double tol, const SolverConfig &config) {
  check_pair(prior_u, prior_v, "lambda_c");
  if (!(lo < hi) || !(lo >= 0.0)) throw DomainError("lambda_c: need 0 <= lo < hi");
  if (!(tol > 0.0)) throw DomainError("lambda_c: tol must be > 0");
  if (!has_zero_mean(moments(prior_u)) || !has_zero_mean(moments(prior_v))) return 0.0;

  const double base = mean_product(prior_u, prior_v);
  const auto excess = [&](double lambda) { return solve(lambda, alpha, prior_u, prior_v, config).Q - base; };
  const double e_lo = excess(lo);
  const double e_hi = excess(hi);
  if (e_lo > kThresholdSlack || !(e_hi > kThresholdSlack))
    throw BracketError("lambda_c: indicator Q > mean product does not switch on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "] (Q excess " + std::to_string(e_lo) + " at lo, " +
                           std::to_string(e_hi) + " at hi)",
                       e_lo, e_hi);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > kThresholdSlack)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

std::vector<OverlapMatrix> psd_grid(const OverlapMatrix &box, int points) {
  const int k = static_cast<int>(box.rows());
  std::vector<OverlapMatrix> out;
  const auto lin = [&](double top, int i) { return points == 1 ? 0.0 : top * i / static_cast<double>(points - 1); };
  if (k == 1) {
    for (int i = 0; i < points; ++i) out.push_back(OverlapMatrix::Constant(1, 1, lin(box(0, 0), i)));
    return out;
  }
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      const double a = lin(box(0, 0), i);
      const double b = lin(box(1, 1), j);
      const double c_max = std::sqrt(a * b);
      const int nc = c_max > 0.0 ? points : 1;
      for (int l = 0; l < nc; ++l) {
        const double c = nc == 1 ? 0.0 : -c_max + 2.0 * c_max * l / static_cast<double>(nc - 1);
        OverlapMatrix q(2, 2);
        q << a, c, c, b;
        out.push_back(q);
      }
    }
  return out;
}

} // namespace

MinMaxReport minmax_check(double lambda, double alpha, const DiscretePrior &prior_u, const DiscretePrior &prior_v,
                          const MinMaxGrid &grid, const SolverConfig &config) {
  check_pair(prior_u, prior_v, "minmax_check");
  check_params(lambda, alpha, "minmax_check");
  const int k = prior_u.dim();
  if (k > 2) throw DomainError("minmax_check: only k <= 2 is supported");
  if (grid.q1_points < 2 || grid.q2_points < 2) throw DomainError("minmax_check: need at least 2 grid points");

  const Moments mu = moments(prior_u);
  const Moments mv = moments(prior_v);
  const OverlapMatrix box2 = mu.second_moment + grid.margin * OverlapMatrix::Identity(k, k);

  std::vector<OverlapMatrix> q1s;
  for (auto &q : psd_grid(mv.second_moment, grid.q1_points)) {
    // restrict q1 to the compact set q1 <= E VV'
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mv.second_moment - q);
    if (es.eigenvalues().minCoeff() >= -1e-12) q1s.push_back(std::move(q));
  }
  const std::vector<OverlapMatrix> q2s = psd_grid(box2, grid.q2_points);

  std::vector<double> psi_v(q2s.size());
  for (std::size_t j = 0; j < q2s.size(); ++j) psi_v[j] = psi(prior_v, SNRMatrix(lambda * q2s[j]), config.quad);

  MinMaxReport rep;
  rep.sup_inf = -std::numeric_limits<double>::infinity();
  for (const auto &q1 : q1s) {
    const double pu = psi(prior_u, SNRMatrix(lambda * alpha * q1), config.quad);
    double inner = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q2s.size(); ++j)
      inner = std::min(inner, alpha * psi_v[j] - 0.5 * lambda * alpha * (q1 * q2s[j]).trace());
    if (pu + inner > rep.sup_inf) {
      rep.sup_inf = pu + inner;
      rep.argmax_q1 = q1;
    }
  }
  rep.sup_gamma = solve(lambda, alpha, prior_u, prior_v, config).free_energy;
  rep.difference = rep.sup_inf - rep.sup_gamma;
  return rep;
}

} // namespace rslimits
