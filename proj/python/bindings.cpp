#include "rslimits/amp.hpp"
#include "rslimits/errors.hpp"
#include "rslimits/oracle.hpp"
#include "rslimits/prior.hpp"
#include "rslimits/quadrature.hpp"
#include "rslimits/rs_formula.hpp"
#include "rslimits/scalar_channel.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rslimits;

namespace {

// Scalars become 1x1 SNR matrices so k = 1 calls can pass a plain float.
SNRMatrix to_snr(const py::object &gamma) {
  if (py::isinstance<py::float_>(gamma) || py::isinstance<py::int_>(gamma))
    return SNRMatrix::scalar(gamma.cast<double>());
  return SNRMatrix(gamma.cast<Eigen::MatrixXd>());
}

SolverConfig solver_config(int quad_order, double damping, double tol, int max_iter) {
  SolverConfig c;
  c.quad = gauss_hermite(quad_order);
  c.damping = damping;
  c.tol = tol;
  c.max_iter = max_iter;
  return c;
}

OracleOptions oracle_options(std::int64_t num_samples, std::uint64_t seed, int threads) {
  OracleOptions o;
  o.num_samples = num_samples;
  o.seed = seed;
  o.threads = threads;
  return o;
}

py::dict estimate_dict(const OracleEstimate &e) {
  py::dict d;
  d["estimate"] = e.value;
  d["std_error"] = e.std_error;
  d["num_samples"] = e.num_samples;
  d["seed"] = e.seed;
  return d;
}

py::dict identity_dict(const IdentityCheck &c) {
  py::dict d;
  d["lhs"] = estimate_dict(c.lhs);
  d["rhs"] = estimate_dict(c.rhs);
  d["difference"] = estimate_dict(c.difference);
  d["bias_bound"] = c.bias_bound;
  d["holds"] = c.holds();
  return d;
}

} // namespace

PYBIND11_MODULE(_rslimits, m) {
  m.doc() = "Replica-symmetric limits, AMP and exact finite-n oracles for low-rank matrix estimation";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.attr("DEFAULT_QUAD_ORDER") = kDefaultQuadOrder;

  py::class_<DiscretePrior>(m, "DiscretePrior")
      .def(py::init<Eigen::MatrixXd, Eigen::VectorXd, std::size_t>(), py::arg("atoms"), py::arg("probs"),
           py::arg("max_support") = kDefaultMaxSupport)
      .def_property_readonly("dim", &DiscretePrior::dim)
      .def_property_readonly("size", &DiscretePrior::size)
      .def_property_readonly("atoms", &DiscretePrior::atoms)
      .def_property_readonly("probs", &DiscretePrior::probs)
      .def("__repr__", [](const DiscretePrior &p) {
        return "<DiscretePrior k=" + std::to_string(p.dim()) + " atoms=" + std::to_string(p.size()) + ">";
      });

  m.def("two_point_prior", &two_point_prior, py::arg("p"));
  m.def("rademacher_prior", &rademacher_prior);
  m.def("point_mass", &point_mass, py::arg("c"));
  m.def("product_prior", &product_prior, py::arg("a"), py::arg("b"), py::arg("max_support") = kDefaultMaxSupport);
  m.def("gaussian_discretization", &gaussian_discretization, py::arg("order"));
  m.def("moments", [](const DiscretePrior &p) {
    const Moments mo = moments(p);
    py::dict d;
    d["mean"] = mo.mean;
    d["second_moment"] = mo.second_moment;
    d["covariance"] = mo.covariance;
    return d;
  });

  m.def("gauss_hermite", [](int order) {
    const GaussQuadrature q = gauss_hermite(order);
    return py::make_tuple(q.nodes, q.weights);
  }, py::arg("order"));

  m.def("psi", [](const DiscretePrior &p, const py::object &gamma, int quad_order) {
    return psi(p, to_snr(gamma), gauss_hermite(quad_order));
  }, py::arg("prior"), py::arg("gamma"), py::arg("quad_order") = kDefaultQuadOrder);
  m.def("overlap_F", [](const DiscretePrior &p, const py::object &gamma, int quad_order) {
    return overlap_F(p, to_snr(gamma), gauss_hermite(quad_order));
  }, py::arg("prior"), py::arg("gamma"), py::arg("quad_order") = kDefaultQuadOrder);
  m.def("denoiser", [](const DiscretePrior &p, const py::object &gamma, const Eigen::VectorXd &y) {
    return denoiser(p, to_snr(gamma), y);
  }, py::arg("prior"), py::arg("gamma"), py::arg("y"));
  m.def("denoiser_derivative", [](const DiscretePrior &p, const py::object &gamma, const Eigen::VectorXd &y) {
    return denoiser_derivative(p, to_snr(gamma), y);
  }, py::arg("prior"), py::arg("gamma"), py::arg("y"));

  py::class_<FixedPoint>(m, "FixedPoint")
      .def_readonly("q1", &FixedPoint::q1)
      .def_readonly("q2", &FixedPoint::q2)
      .def_readonly("residual", &FixedPoint::residual)
      .def_readonly("potential", &FixedPoint::potential)
      .def_readonly("iterations", &FixedPoint::iterations)
      .def_readonly("converged", &FixedPoint::converged);

  py::class_<RSSolution>(m, "RSSolution")
      .def_readonly("lambda_", &RSSolution::lambda)
      .def_readonly("alpha", &RSSolution::alpha)
      .def_readonly("free_energy", &RSSolution::free_energy)
      .def_readonly("mutual_information", &RSSolution::mutual_information)
      .def_readonly("mmse", &RSSolution::mmse)
      .def_readonly("dmse", &RSSolution::dmse)
      .def_readonly("Q", &RSSolution::Q)
      .def_readonly("maximizers", &RSSolution::maximizers)
      .def_readonly("fixed_points", &RSSolution::fixed_points)
      .def_readonly("degenerate", &RSSolution::degenerate)
      .def_readonly("warning", &RSSolution::warning)
      .def_property_readonly("q_u", [](const RSSolution &s) { return s.selected().q2; })
      .def_property_readonly("q_v", [](const RSSolution &s) { return s.selected().q1; });

  m.def("rs_potential", [](double lambda, double alpha, const Eigen::MatrixXd &q1, const Eigen::MatrixXd &q2,
                           const DiscretePrior &pu, const DiscretePrior &pv, int quad_order) {
    return rs_potential(lambda, alpha, q1, q2, pu, pv, gauss_hermite(quad_order));
  }, py::arg("lam"), py::arg("alpha"), py::arg("q1"), py::arg("q2"), py::arg("prior_u"), py::arg("prior_v"),
        py::arg("quad_order") = kDefaultQuadOrder);
  m.def("find_fixed_points", [](double lambda, double alpha, const DiscretePrior &pu, const DiscretePrior &pv,
                                int quad_order, double damping, double tol, int max_iter) {
    return find_fixed_points(lambda, alpha, pu, pv, solver_config(quad_order, damping, tol, max_iter));
  }, py::arg("lam"), py::arg("alpha"), py::arg("prior_u"), py::arg("prior_v"),
        py::arg("quad_order") = kDefaultQuadOrder, py::arg("damping") = 0.5, py::arg("tol") = 1e-10,
        py::arg("max_iter") = 10000);
  m.def("solve", [](double lambda, double alpha, const DiscretePrior &pu, const DiscretePrior &pv, int quad_order,
                    double damping, double tol, int max_iter) {
    return solve(lambda, alpha, pu, pv, solver_config(quad_order, damping, tol, max_iter));
  }, py::arg("lam"), py::arg("alpha"), py::arg("prior_u"), py::arg("prior_v"),
        py::arg("quad_order") = kDefaultQuadOrder, py::arg("damping") = 0.5, py::arg("tol") = 1e-10,
        py::arg("max_iter") = 10000);
  m.def("dmse", &dmse, py::arg("prior_u"), py::arg("prior_v"));
  m.def("lambda_c", [](const DiscretePrior &pu, const DiscretePrior &pv, double alpha, double lo, double hi, double tol,
                       int quad_order) {
    SolverConfig c;
    c.quad = gauss_hermite(quad_order);
    return lambda_c(pu, pv, alpha, lo, hi, tol, c);
  }, py::arg("prior_u"), py::arg("prior_v"), py::arg("alpha") = 1.0, py::arg("lo") = 0.5, py::arg("hi") = 2.0,
        py::arg("tol") = 1e-4, py::arg("quad_order") = kDefaultQuadOrder);
  m.def("minmax_check", [](double lambda, double alpha, const DiscretePrior &pu, const DiscretePrior &pv) {
    const MinMaxReport r = minmax_check(lambda, alpha, pu, pv);
    py::dict d;
    d["sup_inf"] = r.sup_inf;
    d["sup_gamma"] = r.sup_gamma;
    d["difference"] = r.difference;
    return d;
  }, py::arg("lam"), py::arg("alpha"), py::arg("prior_u"), py::arg("prior_v"));

  py::class_<Instance>(m, "Instance")
      .def_readonly("n", &Instance::n)
      .def_readonly("m", &Instance::m)
      .def_readonly("lambda_", &Instance::lambda)
      .def_readonly("U", &Instance::U)
      .def_readonly("V", &Instance::V)
      .def_readonly("Y", &Instance::Y)
      .def_readonly("seed", &Instance::seed);

  m.def("generate_instance", [](const DiscretePrior &pu, const DiscretePrior &pv, std::int64_t n, std::int64_t mm,
                                double lambda, std::uint64_t seed) {
    return generate_instance(pu, pv, n, mm, lambda, seed);
  }, py::arg("prior_u"), py::arg("prior_v"), py::arg("n"), py::arg("m"), py::arg("lam"), py::arg("seed"));

  m.def("amp_run", [](const Instance &inst, const DiscretePrior &pu, const DiscretePrior &pv, int t_max,
                      const std::string &schedule) {
    AmpOptions opt;
    opt.t_max = t_max;
    if (schedule == "alternating") opt.schedule = Schedule::Alternating;
    else if (schedule == "parallel") opt.schedule = Schedule::Parallel;
    else throw DomainError("schedule must be 'alternating' or 'parallel'");
    const AmpRun run = amp_run(inst, pu, pv, opt);
    py::list states;
    for (const auto &s : run.states) {
      py::dict d;
      d["t"] = s.t;
      d["overlap_u"] = s.empirical_overlap_u;
      d["overlap_v"] = s.empirical_overlap_v;
      d["mse"] = s.mse;
      d["q_u"] = s.q_u;
      d["q_v"] = s.q_v;
      states.append(d);
    }
    py::dict out;
    out["states"] = states;
    out["u_hat"] = run.final_state().u_hat;
    out["v_hat"] = run.final_state().v_hat;
    out["aborted"] = run.aborted;
    return out;
  }, py::arg("instance"), py::arg("prior_u"), py::arg("prior_v"), py::arg("t_max") = 50,
        py::arg("schedule") = "alternating");

  m.def("se_predict", [](double lambda, const DiscretePrior &pu, const DiscretePrior &pv, int t_max,
                         std::pair<double, double> q0) { return se_predict(lambda, pu, pv, t_max, q0); },
        py::arg("lam"), py::arg("prior_u"), py::arg("prior_v"), py::arg("t_max"),
        py::arg("q0") = std::pair<double, double>{0.0, 0.0});

  m.def("pca_baseline", [](const Instance &inst) {
    const PcaResult r = pca_baseline(inst);
    py::dict d;
    d["sigma1_scaled"] = r.sigma1_scaled;
    d["overlap_u_sq"] = r.overlap_u_sq;
    d["overlap_v_sq"] = r.overlap_v_sq;
    d["oracle_scaled_mse"] = r.oracle_scaled_mse;
    d["converged"] = r.converged;
    return d;
  }, py::arg("instance"));
  m.def("pca_asymptotic_mse", &pca_asymptotic_mse, py::arg("lam"));
  m.def("pca_asymptotic_oracle_mse", &pca_asymptotic_oracle_mse, py::arg("lam"));

  m.def("mmse_n", [](const DiscretePrior &pu, const DiscretePrior &pv, std::int64_t n, std::int64_t mm, double lambda,
                     std::int64_t num_samples, std::uint64_t seed, int threads) {
    return estimate_dict(mmse_n(pu, pv, n, mm, lambda, oracle_options(num_samples, seed, threads)));
  }, py::arg("prior_u"), py::arg("prior_v"), py::arg("n"), py::arg("m"), py::arg("lam"),
        py::arg("num_samples") = 10000, py::arg("seed") = 0, py::arg("threads") = 1);
  m.def("free_energy_n", [](const DiscretePrior &pu, const DiscretePrior &pv, std::int64_t n, std::int64_t mm,
                            double lambda, std::int64_t num_samples, std::uint64_t seed, int threads) {
    return estimate_dict(free_energy_n(pu, pv, n, mm, lambda, oracle_options(num_samples, seed, threads)));
  }, py::arg("prior_u"), py::arg("prior_v"), py::arg("n"), py::arg("m"), py::arg("lam"),
        py::arg("num_samples") = 10000, py::arg("seed") = 0, py::arg("threads") = 1);
  m.def("nishimori_check", [](const DiscretePrior &pu, const DiscretePrior &pv, std::int64_t n, std::int64_t mm,
                              double lambda, std::int64_t num_samples, std::uint64_t seed, bool negative_control) {
    return identity_dict(
        nishimori_check(pu, pv, n, mm, lambda, oracle_options(num_samples, seed, 1), negative_control));
  }, py::arg("prior_u"), py::arg("prior_v"), py::arg("n"), py::arg("m"), py::arg("lam"),
        py::arg("num_samples") = 10000, py::arg("seed") = 0, py::arg("negative_control") = false);
  m.def("i_mmse_check", [](const DiscretePrior &pu, const DiscretePrior &pv, std::int64_t n, std::int64_t mm,
                           double lambda, double h, std::int64_t num_samples, std::uint64_t seed) {
    const IMmseReport r = i_mmse_check(pu, pv, n, mm, lambda, h, oracle_options(num_samples, seed, 1));
    py::dict d;
    d["h"] = r.h;
    d["derivative"] = identity_dict(r.derivative);
    d["mmse"] = identity_dict(r.mmse);
    return d;
  }, py::arg("prior_u"), py::arg("prior_v"), py::arg("n"), py::arg("m"), py::arg("lam"), py::arg("h") = 0.0,
        py::arg("num_samples") = 10000, py::arg("seed") = 0);
}
