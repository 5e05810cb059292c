import math

import numpy as np
import pytest

from liberation.bridge import (binomial_rows, invert_projected_moments,
                               measure_mu_from_nu, measure_nu_from_mu,
                               project_moments, projection_atom_masses,
                               sigma_from_nu)
from liberation.errors import ValidationError
from liberation.measures import CircleMeasure, IntervalMeasure, TraceParams
from liberation.moments import stationary_moments
from liberation.transforms import stationary_decomposition


def test_binomial_rows_values():
    t = binomial_rows(3)
    assert t[0, 0] == 0.25
    assert t[1, 0] == 0.25 and t[1, 1] == 1.0 / 16.0
    assert np.allclose(t[2], [15.0 / 64.0, 6.0 / 64.0, 1.0 / 64.0])
    assert t[0, 1] == 0.0


def test_first_projection_moment():
    rng = np.random.default_rng(7)
    for alpha, beta in rng.uniform(-1.0, 1.0, size=(20, 2)):
        params = TraceParams(alpha, beta)
        f1 = stationary_moments(params, 1).f
        m1 = project_moments(f1, params)[0]
        assert abs(m1 - (1.0 + alpha) * (1.0 + beta) / 4.0) < 1e-14


def test_identity_pair_maps_to_identity():
    params = TraceParams(1.0, 1.0)
    m = project_moments(np.ones(10), params)
    assert np.max(np.abs(m - 1.0)) < 1e-12


def test_null_trace_projection_moments_are_central_binomial():
    params = TraceParams(0.0, 0.0)
    m = project_moments(np.zeros(8), params)
    expect = [math.comb(2 * n, n) / 2 ** (2 * n + 1) for n in range(1, 9)]
    assert np.max(np.abs(m - expect)) < 1e-15


def test_round_trip_amplification_stays_bounded():
    rng = np.random.default_rng(8)
    params = TraceParams(0.2, -0.4)
    for _ in range(20):
        f = rng.uniform(-1.0, 1.0, size=8)
        back = invert_projected_moments(project_moments(f, params), params)
        assert np.max(np.abs(back - f)) < 1e-10


def test_projection_atom_masses():
    assert projection_atom_masses(TraceParams(0.2, -0.4)) == (0.7, 0.0)
    m0, m1 = projection_atom_masses(TraceParams(0.6, 0.6))
    assert abs(m0 - 0.2) < 1e-15 and abs(m1 - 0.6) < 1e-15


def test_stationary_measure_round_trip():
    params = TraceParams(0.2, -0.4)
    nu = stationary_decomposition(params, n_points=20001)
    mu = measure_mu_from_nu(nu, params)
    back = measure_nu_from_mu(mu, params)
    assert abs(back.atom_zero - nu.atom_zero) < 1e-12
    assert abs(back.atom_pi - nu.atom_pi) < 1e-12
    assert np.max(np.abs(back.grid - nu.grid)) < 1e-10
    assert np.max(np.abs(back.density - nu.density)) < 1e-9


def test_stationary_mu_atoms():
    rng = np.random.default_rng(9)
    for alpha, beta in rng.uniform(-0.95, 0.95, size=(15, 2)):
        params = TraceParams(alpha, beta)
        nu = stationary_decomposition(params, n_points=101)
        mu = measure_mu_from_nu(nu, params)
        a0, a1 = projection_atom_masses(params)
        assert abs(mu.atom_zero - a0) < 1e-12
        assert abs(mu.atom_one - a1) < 1e-12


def test_projection_moments_through_quadrature():
    params = TraceParams(0.2, -0.4)
    nu = stationary_decomposition(params)
    m_quad = measure_mu_from_nu(nu, params).moments(4)
    m_ref = project_moments(stationary_moments(params, 4).f, params)
    assert np.max(np.abs(m_quad - m_ref)) < 1e-6


def test_sigma_remainder_mass():
    params = TraceParams(0.2, -0.4)
    nu = stationary_decomposition(params)
    sigma = sigma_from_nu(nu, params)
    assert abs(sigma.atom_zero) < 1e-14
    assert abs(sigma.atom_pi) < 1e-14
    assert abs(sigma.mass() - (1.0 - params.a - params.b)) < 1e-5


def test_atom_deficit_raises():
    grid = np.linspace(0.5, 2.5, 11)
    nu = CircleMeasure(0.0, 0.0, grid, np.ones(11) / 10.0)
    with pytest.raises(ValidationError, match="angle pi"):
        sigma_from_nu(nu, TraceParams(0.2, -0.4))


def test_inconsistent_traces_raise():
    x = np.linspace(0.01, 0.99, 51)
    mu = IntervalMeasure(0.0, 0.0, x, np.ones_like(x))
    with pytest.raises(ValidationError, match="projection-pair"):
        measure_nu_from_mu(mu, TraceParams(0.5, 0.5))
