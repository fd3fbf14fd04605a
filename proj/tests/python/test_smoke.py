import math

import numpy as np
import pytest

import rslimits as rs


def test_priors():
    p = rs.two_point_prior(0.1)
    assert p.dim == 1 and p.size == 2
    assert np.allclose(p.atoms[:, 0], [3.0, -1.0 / 3.0])
    m = rs.moments(p)
    assert abs(m["mean"][0]) < 1e-14
    assert abs(m["second_moment"][0, 0] - 1.0) < 1e-14
    custom = rs.DiscretePrior(np.array([[1.0], [2.0]]), np.array([0.25, 0.75]))
    assert custom.size == 2
    with pytest.raises(ValueError):
        rs.two_point_prior(1.5)


def test_scalar_channel():
    r = rs.rademacher_prior()
    assert rs.psi(r, 0.0) == 0.0
    assert rs.overlap_F(r, 1e4)[0, 0] >= 0.999
    y = np.array([0.3])
    assert math.isclose(rs.denoiser(r, 4.0, y)[0], math.tanh(2.0 * 0.3), rel_tol=1e-12)
    gamma = np.diag([0.7, 2.3])
    f = rs.overlap_F(rs.product_prior(r, r), gamma)
    assert f.shape == (2, 2)


def test_solve_and_threshold():
    r = rs.rademacher_prior()
    s = rs.solve(0.5, 1.0, r, r)
    assert abs(s.mmse - 1.0) < 1e-8
    assert abs(s.mutual_information - 0.25) < 1e-8
    s4 = rs.solve(4.0, 1.0, r, r)
    assert s4.q_u[0, 0] > 0.9
    assert len(s4.fixed_points) == 2
    assert abs(rs.lambda_c(r, r) - 1.0) <= 0.01
    p = rs.two_point_prior(0.1)
    assert rs.lambda_c(p, p) < 0.999
    with pytest.raises(RuntimeError):
        rs.lambda_c(r, r, lo=1.5, hi=2.0)


def test_amp_and_pca():
    r = rs.rademacher_prior()
    inst = rs.generate_instance(r, r, 300, 300, 4.0, 3)
    assert inst.Y.shape == (300, 300)
    again = rs.generate_instance(r, r, 300, 300, 4.0, 3)
    assert np.array_equal(inst.Y, again.Y)
    run = rs.amp_run(inst, r, r, t_max=20)
    assert len(run["states"]) == 21
    assert not run["aborted"]
    assert abs(run["states"][-1]["overlap_u"]) > 0.8
    pca = rs.pca_baseline(inst)
    assert pca["converged"]
    assert rs.pca_asymptotic_mse(4.0) == 0.1875
    se = rs.se_predict(4.0, r, r, 5, (0.01, 0.01))
    assert len(se) == 6


def test_oracle():
    r = rs.rademacher_prior()
    est = rs.mmse_n(r, r, 2, 2, 1.0, num_samples=500, seed=1)
    assert est["num_samples"] == 500
    assert 0.0 < est["estimate"] < 1.0
    chk = rs.nishimori_check(r, r, 2, 2, 1.0, num_samples=2000)
    assert set(chk) >= {"lhs", "rhs", "difference", "holds"}
    with pytest.raises(ValueError):
        rs.mmse_n(r, r, 11, 10, 1.0, num_samples=10)
