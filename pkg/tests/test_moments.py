import math

import numpy as np
import pytest

from liberation.errors import ValidationError
from liberation.measures import MomentSequence, TraceParams
from liberation.moments import (evolve_moments, fixed_point_residual,
                                moment_ode_rhs, source_terms,
                                stationary_moments)


def test_source_terms_values():
    s = source_terms(TraceParams(0.2, -0.4), 4)
    assert np.allclose(s, [-0.08, 0.4, -0.72, 1.6], atol=1e-15)
    assert np.all(source_terms(TraceParams(0.0, 0.0), 8) == 0.0)


def test_rhs_at_equal_pair_start():
    # f = 1 for all n at the equal-pair start; with null traces the
    # right-hand side collapses to -n - n (n - 1) = -n^2
    params = TraceParams(0.0, 0.0)
    f = np.ones(6)
    rhs = moment_ode_rhs(f, params)
    assert np.allclose(rhs, -np.arange(1.0, 7.0) ** 2, atol=1e-13)


def test_rhs_vanishes_at_stationarity():
    rng = np.random.default_rng(2)
    for alpha, beta in rng.uniform(-0.95, 0.95, size=(10, 2)):
        params = TraceParams(alpha, beta)
        seq = stationary_moments(params, 24)
        assert fixed_point_residual(seq, params) < 1e-9


def test_first_moment_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(5):
        alpha, beta = rng.uniform(-0.9, 0.9, size=2)
        f1_0 = rng.uniform(-1.0, 1.0)
        params = TraceParams(alpha, beta)
        traj = evolve_moments(np.array([f1_0]), params, 3.0, step=1e-3,
                              store_every=100)
        gamma = alpha * beta
        exact = gamma + (f1_0 - gamma) * np.exp(-traj.times)
        assert np.max(np.abs(traj.values[:, 0] - exact)) < 1e-10


def test_null_trace_equal_pair_closed_forms():
    params = TraceParams(0.0, 0.0)
    traj = evolve_moments(np.ones(2), params, 2.0, step=1e-3, store_every=10)
    t = traj.times
    assert np.max(np.abs(traj.values[:, 0] - np.exp(-t))) < 1e-10
    assert np.max(np.abs(traj.values[:, 1]
                         - np.exp(-2.0 * t) * (1.0 - 2.0 * t))) < 1e-10


def test_stationary_moments_special_cases():
    assert np.all(stationary_moments(TraceParams(0.0, 0.0), 12).f == 0.0)
    f = stationary_moments(TraceParams(1.0, 0.0), 8).f
    assert np.allclose(f, [0, 1, 0, 1, 0, 1, 0, 1], atol=1e-12)
    # R = S = I means Y = I and every moment is one
    f = stationary_moments(TraceParams(1.0, 1.0), 8).f
    assert np.allclose(f, 1.0, atol=1e-12)


def test_stationary_moments_against_evolution():
    params = TraceParams(0.3, 0.6)
    target = stationary_moments(params, 12).f
    traj = evolve_moments(np.zeros(12), params, 25.0, step=5e-3,
                          store_every=1000)
    assert np.max(np.abs(traj.final().f - target)) < 1e-9


def test_trajectory_grid_and_storage():
    params = TraceParams(0.1, 0.2)
    traj = evolve_moments(np.zeros(3), params, 1.0, step=1e-3, store_every=200)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == 1.0
    assert len(traj.times) == 6
    assert traj.index_of(0.6) == 3
    with pytest.raises(ValidationError):
        traj.index_of(0.55)


def test_store_every_larger_than_step_count_is_clamped():
    params = TraceParams(0.0, 0.0)
    traj = evolve_moments(np.zeros(2), params, 0.01, step=1e-3,
                          store_every=10 ** 9)
    assert len(traj.times) == 2
    assert traj.times[-1] == 0.01


def test_evolve_accepts_moment_sequence_and_t_zero():
    params = TraceParams(0.2, 0.1)
    seq = MomentSequence(0.5, np.array([0.1, 0.2]))
    traj = evolve_moments(seq, params, 0.0)
    assert traj.times[0] == 0.5 and len(traj.times) == 1
    traj = evolve_moments(seq, params, 1.0, step=1e-2)
    assert abs(traj.times[-1] - 1.5) < 1e-12
    with pytest.raises(ValidationError):
        evolve_moments(seq, params, -1.0)


def test_fixed_point_is_preserved_exactly():
    params = TraceParams(0.2, -0.4)
    f_inf = stationary_moments(params, 10).f
    traj = evolve_moments(f_inf, params, 5.0, step=1e-2, store_every=100)
    # every RK4 stage vanishes at the fixed point up to the rhs roundoff
    assert np.max(np.abs(traj.final().f - f_inf)) < 1e-12


def test_trajectory_csv(tmp_path):
    params = TraceParams(0.0, 0.0)
    traj = evolve_moments(np.ones(2), params, 0.02, step=1e-2)
    path = tmp_path / "traj.csv"
    traj.write_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,f1,f2"
    assert len(lines) == 4
    row = [float(v) for v in lines[-1].split(",")]
    assert row[0] == 0.02 and abs(row[1] - math.exp(-0.02)) < 1e-9
