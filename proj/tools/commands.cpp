#include "commands.hpp"

#include "rslimits/amp.hpp"
#include "rslimits/errors.hpp"
#include "rslimits/oracle.hpp"
#include "rslimits/parallel.hpp"
#include "rslimits/rs_formula.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#ifndef RSLIMITS_VERSION
#define RSLIMITS_VERSION "0.0.0"
#endif

namespace rslimits::cli {

namespace {

using nlohmann::json;

class Output {
public:
  Output(const RunConfig &config, const std::string &name, std::vector<std::string> &written)
      : path_(config.out / name), os_(path_, std::ios::binary | std::ios::trunc) {
    if (!os_) throw ConfigError("cannot open " + path_.string() + " for writing");
    os_ << "# rslimits " << RSLIMITS_VERSION << " config-hash=" << config.hash << '\n';
    written.push_back(path_.string());
  }
  ~Output() { os_.flush(); }

  std::ostream &stream() { return os_; }

  template <typename T> Output &operator<<(const T &v) {
    os_ << v;
    return *this;
  }
  Output &operator<<(double v) {
    os_ << format_double(v);
    return *this;
  }

private:
  std::filesystem::path path_;
  std::ofstream os_;
};

std::string flatten(const OverlapMatrix &q) {
  std::string out;
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (!out.empty()) out += ';';
      out += format_double(q(i, j));
    }
  return out;
}

SolverConfig solver_config(const RunConfig &c) {
  SolverConfig s;
  s.quad = gauss_hermite(c.quad_order);
  s.damping = c.damping;
  s.tol = c.tol;
  s.max_iter = c.max_iter;
  return s;
}

void write_json(Output &out, const json &j) { out.stream() << j.dump(2) << '\n'; }

std::vector<RSSolution> solve_grid(const std::vector<double> &lambdas, double alpha, const DiscretePrior &pu,
                                   const DiscretePrior &pv, const SolverConfig &sc, int threads) {
  return parallel_map<RSSolution>(static_cast<std::int64_t>(lambdas.size()), threads, [&](std::int64_t i) {
    return solve(lambdas[static_cast<std::size_t>(i)], alpha, pu, pv, sc);
  });
}

void report_degenerate(const std::vector<RSSolution> &sols, std::ostream &log) {
  for (const auto &s : sols)
    if (s.degenerate) log << "warning: " << s.warning << '\n';
}

void cmd_sweep(const RunConfig &c, std::ostream &log, std::vector<std::string> &written) {
  const auto sols = solve_grid(c.lambdas, c.alpha, *c.prior_u, *c.prior_v, solver_config(c), c.threads);
  report_degenerate(sols, log);
  Output csv(c, "sweep.csv", written);
  csv << "lambda,alpha,free_energy,mutual_information,mmse,dmse,Q,q1,q2,degenerate\n";
  for (const auto &s : sols) {
    csv << s.lambda << ',' << s.alpha << ',' << s.free_energy << ',' << s.mutual_information << ',' << s.mmse << ','
        << s.dmse << ',' << s.Q << ',' << flatten(s.selected().q1) << ',' << flatten(s.selected().q2) << ','
        << (s.degenerate ? 1 : 0) << '\n';
  }
  // The closed-form PCA curve assumes zero-mean unit-variance rank-one priors.
  Output pca(c, "pca.csv", written);
  pca << "lambda,pca_mse_formula,pca_mse_oracle_scaled\n";
  for (double l : c.lambdas) pca << l << ',' << pca_asymptotic_mse(l) << ',' << pca_asymptotic_oracle_mse(l) << '\n';
}

void cmd_threshold(const RunConfig &c, std::ostream &, std::vector<std::string> &written) {
  const double lc =
      lambda_c(*c.prior_u, *c.prior_v, c.alpha, c.bracket_lo, c.bracket_hi, c.threshold_tol, solver_config(c));
  json j;
  j["lambda_c"] = lc;
  j["bracket"] = {c.bracket_lo, c.bracket_hi};
  j["tol"] = c.threshold_tol;
  j["alpha"] = c.alpha;
  j["quad_order"] = c.quad_order;
  j["mean_product"] = mean_product(*c.prior_u, *c.prior_v);
  j["dmse"] = dmse(*c.prior_u, *c.prior_v);
  Output out(c, "threshold.json", written);
  write_json(out, j);
}

void cmd_fixedpoints(const RunConfig &c, std::ostream &log, std::vector<std::string> &written) {
  const auto sols = solve_grid(c.lambdas, c.alpha, *c.prior_u, *c.prior_v, solver_config(c), c.threads);
  report_degenerate(sols, log);
  Output csv(c, "fixedpoints.csv", written);
  csv << "lambda,alpha,index,q1,q2,residual,potential,iterations,maximizer\n";
  for (const auto &s : sols) {
    int index = 0;
    for (const auto &fp : s.fixed_points) {
      const bool maximizer = fp.potential >= s.free_energy - solver_config(c).tie_tol;
      csv << s.lambda << ',' << s.alpha << ',' << index++ << ',' << flatten(fp.q1) << ',' << flatten(fp.q2) << ','
          << fp.residual << ',' << fp.potential << ',' << fp.iterations << ',' << (maximizer ? 1 : 0) << '\n';
    }
  }
}

void cmd_amp(const RunConfig &c, std::ostream &log, std::vector<std::string> &written) {
  const Instance inst = generate_instance(*c.prior_u, *c.prior_v, c.n, c.m, c.lambda, c.seed);
  if (c.dump_instance) {
    write_instance(inst, c.out / "instance.rslm");
    written.push_back((c.out / "instance.rslm").string());
  }
  AmpOptions opt;
  opt.t_max = c.t_max;
  opt.coupling = c.coupling;
  opt.schedule = c.schedule;
  opt.quad = gauss_hermite(c.quad_order);
  if (c.se_init) opt.se_init = *c.se_init;
  const AmpRun run = amp_run(inst, *c.prior_u, *c.prior_v, opt);
  if (run.aborted) log << "warning: AMP aborted: " << run.abort_reason << '\n';

  // SE reference: the configured start, or else the overlaps of the random initialization.
  std::pair<double, double> q0 = c.se_init.value_or(std::make_pair(std::abs(run.states[0].empirical_overlap_u),
                                                                   std::abs(run.states[0].empirical_overlap_v)));
  if (c.coupling == Coupling::StateEvolution) q0 = opt.se_init;
  const auto se = se_predict(c.lambda, *c.prior_u, *c.prior_v, c.t_max, q0, opt.quad, c.schedule);

  Output csv(c, "amp.csv", written);
  csv << "t,overlap_u,overlap_v,mse,q_u_se,q_v_se\n";
  for (const auto &s : run.states) {
    const auto &q = se[static_cast<std::size_t>(s.t)];
    csv << s.t << ',' << s.empirical_overlap_u << ',' << s.empirical_overlap_v << ',' << s.mse << ',' << q.first << ','
        << q.second << '\n';
  }

  const PcaResult pca = pca_baseline(inst);
  const RSSolution sol = solve(c.lambda, 1.0, *c.prior_u, *c.prior_v, solver_config(c));
  const AMPState &last = run.final_state();
  json j;
  j["n"] = c.n;
  j["lambda"] = c.lambda;
  j["seed"] = c.seed;
  j["coupling"] = c.coupling == Coupling::Empirical ? "empirical" : "state_evolution";
  j["schedule"] = c.schedule == Schedule::Alternating ? "alternating" : "parallel";
  j["iterations"] = last.t;
  j["aborted"] = run.aborted;
  j["abort_reason"] = run.abort_reason;
  j["final_overlap_u"] = last.empirical_overlap_u;
  j["final_overlap_v"] = last.empirical_overlap_v;
  j["final_mse"] = last.mse;
  j["rs_q_u"] = sol.selected().q2(0, 0);
  j["rs_q_v"] = sol.selected().q1(0, 0);
  j["rs_mmse"] = sol.mmse;
  j["dmse"] = sol.dmse;
  j["pca"] = {{"sigma1_scaled", pca.sigma1_scaled},
              {"overlap_u_sq", pca.overlap_u_sq},
              {"overlap_v_sq", pca.overlap_v_sq},
              {"oracle_scaled_mse", pca.oracle_scaled_mse},
              {"iterations", pca.iterations},
              {"converged", pca.converged},
              {"mse_formula", pca_asymptotic_mse(c.lambda)},
              {"mse_oracle_scaled_limit", pca_asymptotic_oracle_mse(c.lambda)}};
  if (!pca.converged) log << "warning: power iteration did not converge\n";
  Output out(c, "amp_summary.json", written);
  write_json(out, j);
}

json estimate_json(const std::string &name, const OracleEstimate &e, const json &params) {
  return {{"name", name},
          {"estimate", e.value},
          {"std_error", e.std_error},
          {"num_samples", e.num_samples},
          {"seed", e.seed},
          {"params", params}};
}

json check_json(const std::string &name, const IdentityCheck &chk, const json &params) {
  json j = estimate_json(name, chk.difference, params);
  j["lhs"] = chk.lhs.value;
  j["lhs_std_error"] = chk.lhs.std_error;
  j["rhs"] = chk.rhs.value;
  j["rhs_std_error"] = chk.rhs.std_error;
  j["bias_bound"] = chk.bias_bound;
  j["within_3_sigma"] = chk.holds(3.0);
  return j;
}

void cmd_oracle(const RunConfig &c, std::ostream &, std::vector<std::string> &written) {
  OracleOptions opt;
  opt.num_samples = c.num_samples;
  opt.seed = c.seed;
  opt.threads = c.threads;
  const auto &pu = *c.prior_u;
  const auto &pv = *c.prior_v;
  json results = json::array();
  for (double l : c.lambdas) {
    json params = {{"n", c.n}, {"m", c.m}, {"lambda", l}};
    results.push_back(estimate_json("free_energy_n", free_energy_n(pu, pv, c.n, c.m, l, opt), params));
    results.push_back(estimate_json("mutual_information_n", mutual_information_n(pu, pv, c.n, c.m, l, opt), params));
    results.push_back(estimate_json("mmse_n", mmse_n(pu, pv, c.n, c.m, l, opt), params));
    results.push_back(check_json("nishimori", nishimori_check(pu, pv, c.n, c.m, l, opt), params));
    if (c.negative_control)
      results.push_back(
          check_json("nishimori_negative_control", nishimori_check(pu, pv, c.n, c.m, l, opt, true), params));
    if (l > 0.0) {
      const IMmseReport rep = i_mmse_check(pu, pv, c.n, c.m, l, c.h, opt);
      json p = params;
      p["h"] = rep.h;
      results.push_back(check_json("i_mmse", rep.derivative, p));
      results.push_back(check_json("mmse_expansion", rep.mmse, p));
    }
  }
  json j;
  j["results"] = results;
  Output out(c, "oracle.json", written);
  write_json(out, j);
}

void write_figure1(const RunConfig &c, const std::string &name, double p, std::ostream &log,
                   std::vector<std::string> &written) {
  const DiscretePrior prior = two_point_prior(p);
  const auto lambdas = figure1_lambdas();
  const auto sols = solve_grid(lambdas, 1.0, prior, prior, solver_config(c), c.threads);
  report_degenerate(sols, log);
  Output csv(c, name, written);
  csv << "lambda,mmse,dmse,mutual_information,pca_mse_formula,pca_mse_oracle_scaled\n";
  for (const auto &s : sols)
    csv << s.lambda << ',' << s.mmse << ',' << s.dmse << ',' << s.mutual_information << ','
        << pca_asymptotic_mse(s.lambda) << ',' << pca_asymptotic_oracle_mse(s.lambda) << '\n';
}

void write_figure2(const RunConfig &c, const std::string &name, bool mixed, std::ostream &log,
                   std::vector<std::string> &written) {
  const auto ps = figure2_ps();
  const SolverConfig sc = solver_config(c);
  const auto sols = parallel_map<RSSolution>(static_cast<std::int64_t>(ps.size()), c.threads, [&](std::int64_t i) {
    const DiscretePrior pu = two_point_prior(ps[static_cast<std::size_t>(i)]);
    const DiscretePrior pv = mixed ? two_point_prior(0.5) : pu;
    return solve(kFigure2Lambda, 1.0, pu, pv, sc);
  });
  report_degenerate(sols, log);
  Output csv(c, name, written);
  csv << "p_u,p_v,lambda,mmse,dmse,q_u,q_v\n";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto &s = sols[i];
    csv << ps[i] << ',' << (mixed ? 0.5 : ps[i]) << ',' << s.lambda << ',' << s.mmse << ',' << s.dmse << ','
        << s.selected().q2(0, 0) << ',' << s.selected().q1(0, 0) << '\n';
  }
}

void cmd_figures(const RunConfig &c, std::ostream &log, std::vector<std::string> &written) {
  write_figure1(c, "fig1a.csv", 0.5, log, written);
  write_figure1(c, "fig1b.csv", 0.1, log, written);
  write_figure2(c, "fig2a.csv", false, log, written);
  write_figure2(c, "fig2b.csv", true, log, written);
}

} // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<double> figure1_lambdas() {
  std::vector<double> out;
  for (int i = 1; i <= 60; ++i) out.push_back(i / 20.0);
  return out;
}

std::vector<double> figure2_ps() {
  std::vector<double> out;
  for (int i = 1; i <= 50; ++i) out.push_back(i / 100.0);
  return out;
}

std::vector<std::string> run(const RunConfig &config, std::ostream &log) {
  std::vector<std::string> written;
  if (config.command == "sweep") cmd_sweep(config, log, written);
  else if (config.command == "threshold") cmd_threshold(config, log, written);
  else if (config.command == "fixedpoints") cmd_fixedpoints(config, log, written);
  else if (config.command == "amp") cmd_amp(config, log, written);
  else if (config.command == "oracle") cmd_oracle(config, log, written);
  else if (config.command == "figures") cmd_figures(config, log, written);
  else throw ConfigError("unknown command '" + config.command + "'");
  return written;
}

} // namespace rslimits::cli
