"""Acceptance criteria for the toolkit, runnable as a library.

Each criterion function returns a CriterionResult; run_all executes a
subset or all of them.  The same functions back `liberation verify` and
the acceptance test module, so the shipped checks and the CLI report can
never drift apart.  All criteria are deterministic: random inputs are
drawn from fixed seeds.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .bridge import invert_projected_moments, measure_mu_from_nu, \
    project_moments
from .measures import TraceParams
from .moments import evolve_moments, stationary_moments
from .rmt import EnsembleConfig, advance_unitary, build_pair, \
    empirical_moments, monte_carlo
from .subordination import _flow_batch, flow_identity_drift, flow_lifetime, \
    phi_closed_form, subordination_check
from .transforms import K_eval, classical_evaluator, free_evaluator, \
    herglotz_eval, initial_moments, pde_residual, point_mass_zero, \
    s_transform_pipeline, stationary_decomposition, stationary_evaluator


@dataclass(frozen=True)
class CriterionResult:
    cid: int
    name: str
    passed: bool
    observed: float
    tolerance: float
    runtime: float
    detail: str = ""

    def format_line(self):
        verdict = "PASS" if self.passed else "FAIL"
        line = "[%2d] %s %s: observed %.3e vs tolerance %.1e (%.2fs)" % (
            self.cid, verdict, self.name, self.observed, self.tolerance,
            self.runtime)
        if self.detail:
            line += " [" + self.detail + "]"
        return line


def _disk_grid(radii, n_angles):
    pts = [0.0 + 0.0j]
    for r in radii:
        for k in range(n_angles):
            pts.append(r * np.exp(2j * math.pi * k / n_angles))
    return np.array(pts)


def criterion_01():
    """Moment ODE relaxes onto the stationary sequence by t = 20."""
    t0 = time.perf_counter()
    worst = 0.0
    for ab in ((0.0, 0.0), (0.2, -0.4), (0.6, 0.6), (1.0, 0.0)):
        params = TraceParams(*ab)
        f0 = initial_moments(classical_evaluator(params), 16)
        traj = evolve_moments(f0, params, 20.0, step=0.01, store_every=2000)
        err = np.max(np.abs(traj.final().f - stationary_moments(params, 16).f))
        worst = max(worst, float(err))
    elapsed = time.perf_counter() - t0
    passed = worst < 1e-6 and elapsed < 1.0
    return CriterionResult(1, "relaxation to the stationary moments",
                           passed, worst, 1e-6, elapsed,
                           "4 trace pairs, N=16, runtime budget 1s")


def criterion_02():
    """Null-trace equal pair: f1, f2 match their closed forms on [0, 5]."""
    t0 = time.perf_counter()
    params = TraceParams(0.0, 0.0)
    f0 = initial_moments(point_mass_zero(), 4)
    traj = evolve_moments(f0, params, 5.0, step=1e-3)
    t = traj.times
    err1 = np.max(np.abs(traj.values[:, 0] - np.exp(-t)))
    err2 = np.max(np.abs(traj.values[:, 1] - np.exp(-2.0 * t) * (1.0 - 2.0 * t)))
    worst = float(max(err1, err2))
    elapsed = time.perf_counter() - t0
    return CriterionResult(2, "null-trace equal pair closed forms",
                           worst < 1e-8, worst, 1e-8, elapsed)


def criterion_03():
    """Transport equation residual is small and scales like step^2."""
    t0 = time.perf_counter()
    params = TraceParams(0.2, -0.4)
    f0 = initial_moments(classical_evaluator(params), 64)
    z_grid = np.concatenate([_disk_grid([0.3], 12), _disk_grid([0.6], 12)[1:]])
    t_grid = (0.4, 0.8, 1.2, 1.6)
    r_coarse = pde_residual(evolve_moments(f0, params, 1.7, step=1e-3),
                            params, z_grid, t_grid)
    r_fine = pde_residual(evolve_moments(f0, params, 1.7, step=5e-4),
                          params, z_grid, t_grid)
    ratio = r_coarse / r_fine
    elapsed = time.perf_counter() - t0
    passed = r_coarse < 1e-5 and ratio >= 4.0 - 1e-9
    return CriterionResult(3, "transport equation residual and step scaling",
                           passed, float(r_coarse), 1e-5, elapsed,
                           "halving ratio %.3f (needs >= 4)" % ratio)


def criterion_04():
    """S-transform pipeline agrees with the closed stationary transform."""
    t0 = time.perf_counter()
    z = np.linspace(-0.9, 0.9, 100)
    worst = 0.0
    for ab in ((0.2, -0.4), (0.5, 0.3)):
        params = TraceParams(*ab)
        pipe = s_transform_pipeline(params)
        closed = np.real(herglotz_eval(stationary_evaluator(params),
                                       z.astype(complex)))
        worst = max(worst, float(np.max(np.abs(pipe.herglotz(z) - closed))))
    elapsed = time.perf_counter() - t0
    return CriterionResult(4, "S-transform route matches the closed form",
                           worst < 1e-10, worst, 1e-10, elapsed,
                           "100 grid points, 2 trace pairs")


def criterion_05():
    """Stationary decomposition integrates to total mass one."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        alpha, beta = rng.uniform(-1.0, 1.0, size=2)
        measure = stationary_decomposition(TraceParams(alpha, beta))
        worst = max(worst, abs(measure.mass() - 1.0))
    elapsed = time.perf_counter() - t0
    return CriterionResult(5, "stationary decomposition has unit mass",
                           worst < 1e-6, worst, 1e-6, elapsed,
                           "20 random trace pairs")


def criterion_06():
    """The flow conserves h^2 - Hinf(phi)^2 along every trajectory."""
    t0 = time.perf_counter()
    seeds = np.concatenate([_disk_grid([0.35], 8), _disk_grid([0.7], 8)[1:]])
    worst = 0.0
    for params, h0 in ((TraceParams(0.2, -0.4), free_evaluator(TraceParams(0.2, -0.4))),
                       (TraceParams(0.5, 0.3), classical_evaluator(TraceParams(0.5, 0.3)))):
        worst = max(worst, flow_identity_drift(params, h0, seeds, 2.0,
                                               step=1e-4))
    elapsed = time.perf_counter() - t0
    return CriterionResult(6, "flow conserves the mixed transform identity",
                           worst < 1e-8, worst, 1e-8, elapsed,
                           "free and classical initial data, step 1e-4")


def criterion_07():
    """Closed-form flow values match the ODE flow on real seeds."""
    t0 = time.perf_counter()
    params = TraceParams(0.2, -0.4)
    h0 = free_evaluator(params)
    radii = np.array([0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.9])
    seeds = np.concatenate([radii, -radii])
    times, phis, _, alives = _ode_flow_snapshots(seeds, params, h0, 2.0, 1e-4, 4)
    worst = 0.0
    checked = 0
    for k, t in enumerate(times):
        if t == 0.0:
            continue
        for i, z in enumerate(seeds):
            if not alives[k, i] or flow_lifetime(z, params, h0) < t + 0.05:
                continue
            val = phi_closed_form(float(z), float(t), params, h0)
            worst = max(worst, abs(val - float(phis[k, i].real)))
            checked += 1
    passed = worst < 1e-6 and checked >= 20

    # null-trace equal pair: the closed form must reduce to z exp(t H0(z))
    eq = TraceParams(0.0, 0.0)
    h0_eq = point_mass_zero()
    worst_eq = 0.0
    for z in (-0.6, -0.3, -0.1, 0.1, 0.3, 0.6, 0.85):
        h_val = (1.0 + z) / (1.0 - z)
        for t in (0.3, 0.7, 1.2):
            exact = z * math.exp(t * h_val)
            if abs(exact) >= 1.0 - 1e-6:
                continue
            worst_eq = max(worst_eq,
                           abs(phi_closed_form(z, t, eq, h0_eq) - exact))
    passed = passed and worst_eq < 1e-8
    elapsed = time.perf_counter() - t0
    return CriterionResult(7, "closed-form flow matches the ODE flow",
                           passed, float(max(worst, worst_eq)), 1e-6, elapsed,
                           "%d alive pairs; null-trace reduction %.2e (tol 1e-8)"
                           % (checked, worst_eq))


def _ode_flow_snapshots(seeds, params, h0, t_end, step, n_snaps):
    record_every = int(round(t_end / step)) // n_snaps
    return _flow_batch(seeds, params, h0, t_end, step, record_every)


def criterion_08():
    """Regularized transform is subordinate: K(t, z) = K(0, eta_t(z))."""
    t0 = time.perf_counter()
    angles = np.array([0.0, 0.25, 0.5, 0.75, 1.0]) * math.pi
    z = np.concatenate([r * np.exp(1j * angles) for r in (0.3, 0.55, 0.7)])
    t_grid = (0.5, 1.0, 2.0)
    worst = 0.0
    for params, h0 in ((TraceParams(0.0, 0.0), point_mass_zero()),
                       (TraceParams(0.2, -0.4), free_evaluator(TraceParams(0.2, -0.4)))):
        worst = max(worst, subordination_check(params, h0, z, t_grid))
    elapsed = time.perf_counter() - t0
    return CriterionResult(8, "subordination of the regularized transform",
                           worst < 1e-6, worst, 1e-6, elapsed,
                           "15 disk points, t up to 2, two initial laws")


def criterion_09():
    """Stationary K is the constant sqrt(1 - max(alpha^2, beta^2))."""
    t0 = time.perf_counter()
    z = _disk_grid([0.2, 0.5, 0.9], 8)
    worst = 0.0
    for ab in ((0.0, 0.0), (0.2, -0.4), (0.6, 0.6), (0.3, 0.7)):
        params = TraceParams(*ab)
        const = math.sqrt(1.0 - max(params.alpha ** 2, params.beta ** 2))
        vals = K_eval(stationary_evaluator(params), z, params)
        worst = max(worst, float(np.max(np.abs(vals - const))))
    elapsed = time.perf_counter() - t0
    return CriterionResult(9, "stationary regularized transform is constant",
                           worst < 1e-10, worst, 1e-10, elapsed,
                           "25 disk points, 4 trace pairs")


def criterion_10():
    """Binomial identity holds per sample; the linear map round-trips."""
    t0 = time.perf_counter()
    worst = 0.0
    cases = (("free", 0.3, -0.5), ("classical", 0.2, 0.4), ("equal", 0.6, 0.6))
    for idx, (preset, alpha, beta) in enumerate(cases):
        rng = np.random.default_rng(100 + idx)
        r_mat, s_mat, aa, bb = build_pair(128, alpha, beta, preset, rng)
        achieved = TraceParams(aa, bb)
        u = np.eye(128, dtype=complex)
        for t_now, duration in ((0.0, 0.0), (0.7, 0.7)):
            u, _ = advance_unitary(u, duration, 0.1, rng)
            f, m = empirical_moments(r_mat, s_mat, u, 10)
            resid = float(np.max(np.abs(m - project_moments(f, achieved))))
            worst = max(worst, resid)
    rng = np.random.default_rng(11)
    params = TraceParams(0.2, -0.4)
    round_trip = 0.0
    for _ in range(50):
        f = rng.uniform(-1.0, 1.0, size=8)
        back = invert_projected_moments(project_moments(f, params), params)
        round_trip = max(round_trip, float(np.max(np.abs(back - f))))
    worst = max(worst, round_trip)
    elapsed = time.perf_counter() - t0
    return CriterionResult(10, "per-sample binomial identity and round trip",
                           worst < 1e-10, worst, 1e-10, elapsed,
                           "N=128, three presets at t in {0, 0.7}; "
                           "round trip at n=8, error %.2e" % round_trip)


def criterion_11():
    """Monte Carlo moments match the ODE within value and sigma bands."""
    t0 = time.perf_counter()
    config = EnsembleConfig(n_dim=256, alpha=0.2, beta=-0.4, preset="free",
                            delta=0.05, seed=7, n_samples=40, n_moments=6,
                            t_grid=(0.5, 1.0, 2.0, 8.0))
    table = monte_carlo(config)
    achieved = TraceParams(table.achieved_alpha, table.achieved_beta)
    f0 = stationary_moments(achieved, 6).f
    traj = evolve_moments(f0, achieved, 8.0, step=1e-3, store_every=100)
    worst_diff = 0.0
    worst_z = 0.0
    for i, t in enumerate(config.t_grid):
        f_ref = traj.values[traj.index_of(t)]
        m_ref = project_moments(f_ref, achieved)
        for ref, mean, err in ((f_ref, table.f_mean[i], table.f_err[i]),
                               (m_ref, table.m_mean[i], table.m_err[i])):
            diff = np.abs(mean - ref)
            worst_diff = max(worst_diff, float(np.max(diff)))
            worst_z = max(worst_z, float(np.max(diff / np.maximum(err, 1e-15))))
    elapsed = time.perf_counter() - t0
    passed = worst_diff < 5e-2 and worst_z <= 4.0 and elapsed < 300.0
    return CriterionResult(11, "Monte Carlo matches the moment ODE",
                           passed, worst_diff, 5e-2, elapsed,
                           "max |z-score| %.2f (needs <= 4), runtime budget 300s"
                           % worst_z)


def criterion_12():
    """Seeds near the right boundary collapse: phi_t(1 - 10^-k) -> 0."""
    t0 = time.perf_counter()
    params = TraceParams(0.6, 0.6)
    h0 = point_mass_zero()
    worst_step = -math.inf
    tail = 0.0
    for t in (1e-3, 1e-2):
        vals = [phi_closed_form(1.0 - 10.0 ** (-k), t, params, h0)
                for k in range(3, 7)]
        steps = np.diff(vals)
        worst_step = max(worst_step, float(np.max(steps)))
        tail = max(tail, abs(vals[-1]))
    elapsed = time.perf_counter() - t0
    passed = worst_step <= 1e-3 and tail <= 1e-3
    return CriterionResult(12, "flow collapse near the right boundary seed",
                           passed, worst_step, 1e-3, elapsed,
                           "equal pair (0.6, 0.6), k = 3..6, t in {1e-3, 1e-2}")


def criterion_13():
    """Stationary measure, bridged to the interval, reproduces the
    projection moments predicted by the binomial identity."""
    t0 = time.perf_counter()
    worst = 0.0
    for ab in ((0.2, -0.4), (0.6, 0.6)):
        params = TraceParams(*ab)
        nu = stationary_decomposition(params, n_points=400001)
        m_quad = measure_mu_from_nu(nu, params).moments(8)
        m_ref = project_moments(stationary_moments(params, 8).f, params)
        worst = max(worst, float(np.max(np.abs(m_quad - m_ref))))
    elapsed = time.perf_counter() - t0
    return CriterionResult(13, "stationary measure bridges to projection moments",
                           worst < 1e-8, worst, 1e-8, elapsed,
                           "n = 1..8, 400001 quadrature points")


CRITERIA = {
    1: criterion_01, 2: criterion_02, 3: criterion_03, 4: criterion_04,
    5: criterion_05, 6: criterion_06, 7: criterion_07, 8: criterion_08,
    9: criterion_09, 10: criterion_10, 11: criterion_11, 12: criterion_12,
    13: criterion_13,
}


def run_all(ids=None, report=None):
    """Run the requested criteria (all by default) in ascending order.

    `report`, if given, is called with each CriterionResult as soon as it
    is available, so progress can be streamed.
    """
    if ids is None:
        ids = sorted(CRITERIA)
    results = []
    for cid in ids:
        if cid not in CRITERIA:
            raise ValueError("unknown criterion id %r" % (cid,))
        res = CRITERIA[cid]()
        results.append(res)
        if report is not None:
            report(res)
    return results
