import math

import numpy as np
import pytest

from liberation.errors import DomainError, NumericalHealthError, ValidationError
from liberation.measures import TraceParams
from liberation.moments import evolve_moments, stationary_moments
from liberation.transforms import (HerglotzEvaluator, K_eval, L_eval,
                                   cauchy_eval, classical_evaluator,
                                   density_from_boundary, free_evaluator,
                                   herglotz_eval, initial_moments,
                                   moebius_part, pde_residual, pde_source,
                                   point_mass_pi, point_mass_zero,
                                   regularized_taylor_coefficients,
                                   s_transform_pipeline, series_evaluator,
                                   stationary_arc_density,
                                   stationary_decomposition,
                                   stationary_evaluator)


def test_classical_herglotz_value():
    # Gamma = 1 point mass at angle 0: H(z) = (1 + z) / (1 - z)
    assert abs(herglotz_eval(point_mass_zero(), 0.5) - 3.0) < 1e-15
    assert abs(herglotz_eval(point_mass_pi(), 0.5) - 1.0 / 3.0) < 1e-15
    params = TraceParams(0.3, 0.5)
    h = classical_evaluator(params)
    z = 0.2 + 0.1j
    expect = (1.0 + 2.0 * 0.15 * z + z * z) / (1.0 - z * z)
    assert abs(herglotz_eval(h, z) - expect) < 1e-15


def test_series_matches_stationary_closed_form():
    params = TraceParams(0.2, -0.4)
    seq = stationary_moments(params, 64)
    hs = series_evaluator(seq, r_max=0.5)
    hc = stationary_evaluator(params)
    z = 0.5 * np.exp(1j * np.linspace(0.0, 2.0 * math.pi, 17))
    assert np.max(np.abs(herglotz_eval(hs, z) - herglotz_eval(hc, z))) < 1e-12


def test_initial_moments_by_kind():
    params = TraceParams(0.3, 0.5)
    f = initial_moments(classical_evaluator(params), 6)
    assert np.allclose(f[0::2], 0.15, atol=1e-15)
    assert np.allclose(f[1::2], 1.0, atol=1e-15)
    assert np.allclose(initial_moments(point_mass_zero(), 4), 1.0)
    f = initial_moments(free_evaluator(params), 8)
    assert np.allclose(f, stationary_moments(params, 8).f, atol=1e-15)


def test_evaluator_validation():
    with pytest.raises(ValidationError):
        HerglotzEvaluator("nonsense")
    with pytest.raises(ValidationError):
        HerglotzEvaluator("series")
    with pytest.raises(ValidationError):
        HerglotzEvaluator("stationary")
    with pytest.raises(ValidationError):
        herglotz_eval(point_mass_zero(), 1.0)
    seq = stationary_moments(TraceParams(0.1, 0.1), 8)
    with pytest.raises(ValidationError):
        herglotz_eval(series_evaluator(seq, r_max=0.5), 0.7)


def test_herglotz_has_positive_real_part():
    rng = np.random.default_rng(4)
    z = 0.95 * np.sqrt(rng.uniform(0.0, 1.0, 200)) * np.exp(
        2j * math.pi * rng.uniform(0.0, 1.0, 200))
    for h in (stationary_evaluator(TraceParams(0.2, -0.4)),
              classical_evaluator(TraceParams(0.6, 0.6)),
              point_mass_zero()):
        assert np.min(np.real(herglotz_eval(h, z))) > 0.0


def test_stationary_K_is_constant():
    params = TraceParams(0.2, -0.4)
    const = math.sqrt(0.84)
    z = np.array([0.1, -0.5, 0.3 + 0.4j, 0.85j])
    vals = K_eval(stationary_evaluator(params), z, params)
    assert np.max(np.abs(vals - const)) < 1e-12


def test_L_identity_and_moebius():
    params = TraceParams(0.5, 0.3)
    h = classical_evaluator(params)
    z = 0.4 + 0.2j
    lv = L_eval(h, z, params)
    assert abs(lv - (herglotz_eval(h, z) - moebius_part(z, params))) < 1e-14
    with pytest.raises(ValidationError):
        K_eval(h, 1.0 - 1e-13, params)


def test_cauchy_transform_oracles():
    # free pair with null traces: H = 1 and G(2) = 1/4 + 1/(2 sqrt(2))
    eq = TraceParams(0.0, 0.0)
    g = cauchy_eval(free_evaluator(eq), 2.0 + 0.0j, eq)
    assert abs(g - (0.25 + 0.5 / math.sqrt(2.0))) < 1e-13
    # equal projections: mu = (delta_0 + delta_1) / 2, so G(2) = 3/4
    g = cauchy_eval(point_mass_zero(), 2.0 + 0.0j, eq)
    assert abs(g - 0.75) < 1e-13
    with pytest.raises(DomainError):
        cauchy_eval(free_evaluator(eq), 0.5 + 0.0j, eq)
    # decay at infinity: z G(z) -> 1
    g = cauchy_eval(free_evaluator(eq), 200.0 + 1.0j, eq)
    assert abs(g * (200.0 + 1.0j) - 1.0) < 1e-2


def test_arc_density_orientation_witnesses():
    """The signed first arc moment separates the two atom conventions."""
    # (0.6, 0.6) has an arc touching pi, where quadrature converges slower
    for ab, expect in (((0.2, -0.4), 0.12), ((0.6, 0.6), -0.24)):
        params = TraceParams(*ab)
        nu = stationary_decomposition(params)
        arc_f1 = 2.0 * nu.density_integral(np.cos(nu.grid))
        gamma = params.alpha * params.beta
        assert abs(arc_f1 - (gamma - params.b + params.a)) < 1e-5
        assert abs(arc_f1 - expect) < 1e-5


def test_decomposition_moments_match_stationary_sequence():
    for ab in ((0.2, -0.4), (0.6, 0.6), (0.0, 0.0)):
        params = TraceParams(*ab)
        nu = stationary_decomposition(params)
        f = nu.moments(10)
        assert np.max(np.abs(f - stationary_moments(params, 10).f)) < 1e-5


def test_decomposition_zero_width_arc():
    nu = stationary_decomposition(TraceParams(1.0, 0.4))
    assert nu.grid.size == 0
    assert abs(nu.atom_zero - 0.7) < 1e-15
    assert abs(nu.atom_pi - 0.3) < 1e-15


def test_arc_density_support():
    # support in the angle is [arccos(-r_minus), arccos(-r_plus)]
    params = TraceParams(0.2, -0.4)
    t_lo = math.acos(-params.r_minus)
    t_hi = math.acos(-params.r_plus)
    assert stationary_arc_density(params, 0.5 * (t_lo + t_hi)) > 0.0
    assert stationary_arc_density(params, t_lo / 2.0) == 0.0
    assert stationary_arc_density(params, 0.5 * (t_hi + math.pi)) == 0.0


def test_density_from_boundary_matches_arc_density():
    params = TraceParams(0.2, -0.4)
    nu = stationary_decomposition(params, n_points=2001)
    h = stationary_evaluator(params)
    # interior of the arc: the Poisson average converges to the density
    interior = (nu.grid > nu.grid[0] + 0.15) & (nu.grid < nu.grid[-1] - 0.15)
    _, dens = density_from_boundary(h, r=0.999, grid=nu.grid)
    assert np.max(np.abs(dens[interior] - nu.density[interior])) < 2e-5
    # near the square-root edges the smoothing error decays as r -> 1
    edge_dev = []
    for r in (0.99, 0.999):
        _, dens = density_from_boundary(h, r=r, grid=nu.grid)
        edge_dev.append(float(np.max(np.abs(dens - nu.density))))
    assert edge_dev[1] < edge_dev[0]


def test_density_from_boundary_shows_atom_spike():
    grid, dens = density_from_boundary(point_mass_zero(), r=0.995,
                                       grid=np.array([1e-3, math.pi / 2.0]))
    assert dens[0] > 10.0
    assert dens[1] < 1.0


def test_regularized_taylor_coefficients():
    params = TraceParams(0.2, -0.4)
    co = regularized_taylor_coefficients(free_evaluator(params), params, 8)
    assert abs(co[0] - math.sqrt(1.0 - (params.a + params.b) ** 2)) < 1e-14
    # the stationary K is constant, all higher coefficients vanish
    assert np.max(np.abs(co[1:])) < 1e-12
    co = regularized_taylor_coefficients(classical_evaluator(params), params, 4)
    assert abs(co[2]) > 0.1
    with pytest.raises(ValidationError):
        regularized_taylor_coefficients(point_mass_zero(), TraceParams(1.0, 0.0), 4)


def test_pde_residual_small_and_validated():
    params = TraceParams(0.2, -0.4)
    f0 = initial_moments(classical_evaluator(params), 48)
    traj = evolve_moments(f0, params, 1.0, step=1e-3)
    z = 0.5 * np.exp(1j * np.linspace(0.1, 2.0, 7))
    assert pde_residual(traj, params, z, (0.5,)) < 1e-5
    with pytest.raises(ValidationError):
        pde_residual(traj, params, z, (0.0,))
    with pytest.raises(ValidationError):
        pde_residual(traj, params, z, (1.0,))


def test_pde_source_closed_form_point():
    params = TraceParams(0.2, -0.4)
    z = 0.3
    expect = (2.0 * z * (0.2 * z * z - 0.8 * z + 0.2)
              * (-0.4 * z * z + 0.4 * z - 0.4) / (1.0 - z * z) ** 3)
    assert abs(pde_source(params, z) - expect) < 1e-15


def test_pipeline_matches_closed_form_phi():
    for ab in ((0.2, -0.4), (0.5, 0.3), (-0.7, -0.2)):
        params = TraceParams(*ab)
        pipe = s_transform_pipeline(params)
        for z in (-0.8, -0.45, -0.1, 0.1, 0.3, 0.6, 0.85):
            closed = (z * (params.alpha + params.beta * z)
                      * (params.beta + params.alpha * z) / (1.0 - z * z) ** 2)
            assert abs(pipe.phi(z) - closed) < 1e-10


def test_pipeline_herglotz_route():
    params = TraceParams(0.2, -0.4)
    pipe = s_transform_pipeline(params)
    z = np.linspace(-0.85, 0.85, 21)
    closed = np.real(herglotz_eval(stationary_evaluator(params),
                                   z.astype(complex)))
    assert np.max(np.abs(pipe.herglotz(z) - closed)) < 1e-10
    with pytest.raises(ValidationError):
        pipe.phi(1.0)


def test_chi_branch_cap_for_negative_traces():
    """psi is not injective for a negative trace: chi recovers z only
    below the critical point, which the self-check grid must respect."""
    params = TraceParams(0.2, -0.4)
    pipe = s_transform_pipeline(params)
    cap = pipe._branch_cap(params.beta)
    z = 0.9 * cap
    assert abs(pipe.chi_s(pipe.psi_s(z)) - z) < 1e-12
    # beyond the cap chi lands on the other root of the quadratic
    assert abs(pipe.chi_s(pipe.psi_s(0.3)) - 0.3) > 0.1


def test_pipeline_null_trace_factor():
    # alpha = 0 kills the self-check S-probe but the product law survives
    params = TraceParams(0.0, 0.6)
    pipe = s_transform_pipeline(params)
    z = 0.5
    closed = (z * (0.6 * z) * (0.6 + 0.0) / (1.0 - z * z) ** 2)
    assert abs(pipe.phi(z) - closed) < 1e-12
