"""Radial flow of the pair process and subordination of its transforms.

The characteristic map phi_t(z) of the disk solves

    d/dt phi = phi * H(t, phi),    phi_0(z) = z,

and the companion value h(t) = H(t, phi_t(z)) closes into the autonomous
pair

    d/dt h = 2 phi (alpha phi^2 + 2 beta phi + alpha)
                   (beta phi^2 + 2 alpha phi + beta) / (1 - phi^2)^3,

so the flow never needs H(t, .) at intermediate times.  Along every
trajectory h^2 - Hinf(phi)^2 is conserved and equals
H0(z)^2 - Hinf(z)^2.  A trajectory dies when |phi| reaches 1; the
integrator freezes it at the last interior value and marks it dead
(EXIT_TOL below).  The inverse maps eta_t = phi_t^(-1) subordinate the
regularized transform: K(t, z) = K(0, eta_t(z)).

For real seeds the flow has a closed form.  With y = (1 + z) / (1 - z),
c = K0(z)^2 + (a + b)^2 and u0 = 1 - y^2, set c1 = c + alpha beta,
c2 = b^2 and

    d = -c1 + 2 sqrt(c) (c1 - c2 u0) / (sqrt(c) + sqrt(X)),
    X = c - c1 u0 + c2 u0^2,

(the conjugate form avoids cancellation and gives d = 0 exactly at
z = 0); then with E = exp(t sqrt(c)),

    w = sqrt( ((alpha beta - c + d E)^2 - 4 a^2 c)
            / ((alpha beta + c + d E)^2 - 4 b^2 c) ),
    phi_t(z) = (w - 1) / (w + 1).

Zeros of the two radicands in E give the exit time of the seed in closed
form (flow_lifetime); past it the formula continues through reflected
values 1 / phi, which is intentional and used by boundary diagnostics.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalHealthError, ValidationError
from .moments import evolve_moments
from .transforms import (K_eval, herglotz_eval, initial_moments,
                         moebius_part, series_evaluator,
                         stationary_evaluator)

EXIT_TOL = 1e-9


@dataclass(frozen=True)
class FlowState:
    """Snapshot of one characteristic trajectory."""

    t: float
    z0: complex
    phi: complex
    h: complex
    alive: bool


def _flow_rhs(phi, hh, alpha, beta):
    dphi = phi * hh
    dh = (2.0 * phi
          * (alpha * phi * phi + 2.0 * beta * phi + alpha)
          * (beta * phi * phi + 2.0 * alpha * phi + beta)
          / (1.0 - phi * phi) ** 3)
    return dphi, dh


def _flow_batch(z0, params, h0, t_end, step, record_every=1):
    """Integrate a batch of seeds; returns (times, phis, hs, alive) arrays.

    phis[k, i] is the i-th trajectory at times[k]; dead trajectories are
    frozen at their last interior value, alive[k, i] tracks the flag.
    """
    z = np.asarray(z0, dtype=complex).ravel()
    if np.any(np.abs(z) >= 1.0):
        raise ValidationError("flow seeds must satisfy |z| < 1")
    alpha, beta = params.alpha, params.beta
    phi = z.copy()
    hh = np.asarray(herglotz_eval(h0, z), dtype=complex).reshape(z.shape).copy()
    alive = np.abs(phi) < 1.0 - EXIT_TOL

    if t_end == 0.0:
        return (np.zeros(1), phi[None, :].copy(), hh[None, :].copy(),
                alive[None, :].copy())
    n_steps = max(1, int(round(t_end / step)))
    record_every = min(record_every, n_steps)
    n_steps = ((n_steps + record_every - 1) // record_every) * record_every
    h = t_end / n_steps
    n_rec = n_steps // record_every + 1
    times = np.linspace(0.0, t_end, n_rec)
    phis = np.empty((n_rec, z.size), dtype=complex)
    hs = np.empty((n_rec, z.size), dtype=complex)
    alives = np.empty((n_rec, z.size), dtype=bool)
    phis[0], hs[0], alives[0] = phi, hh, alive

    j = 1
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for i in range(n_steps):
            live = np.nonzero(alive)[0]
            if live.size:
                p, q = phi[live], hh[live]
                k1p, k1q = _flow_rhs(p, q, alpha, beta)
                k2p, k2q = _flow_rhs(p + 0.5 * h * k1p, q + 0.5 * h * k1q, alpha, beta)
                k3p, k3q = _flow_rhs(p + 0.5 * h * k2p, q + 0.5 * h * k2q, alpha, beta)
                k4p, k4q = _flow_rhs(p + h * k3p, q + h * k3q, alpha, beta)
                np_ = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
                nq = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
                # a genuine h is a Herglotz value (Re > 0) and resolvable
                # (|h| dt small); violations mean a Runge-Kutta stage left
                # the disk and poisoned the update, freeze at once
                bad = (~np.isfinite(np_) | ~np.isfinite(nq)
                       | (np.abs(np_) >= 1.0 - EXIT_TOL)
                       | (nq.real <= 0.0) | (np.abs(nq) * h > 10.0))
                phi[live] = np.where(bad, p, np_)
                hh[live] = np.where(bad, q, nq)
                alive[live[bad]] = False
            if (i + 1) % record_every == 0:
                phis[j], hs[j], alives[j] = phi, hh, alive
                j += 1
    return times, phis, hs, alives


def flow_ode(z0, params, h0, t_end, step=1e-3, record_every=1):
    """Single-seed flow as a list of FlowState snapshots."""
    times, phis, hs, alives = _flow_batch([z0], params, h0, t_end, step,
                                          record_every)
    return [FlowState(float(t), complex(z0), complex(phis[k, 0]),
                      complex(hs[k, 0]), bool(alives[k, 0]))
            for k, t in enumerate(times)]


def flow_identity_drift(params, h0, z0, t_end, step=1e-4, record_every=50,
                        phi_cap=0.9):
    """Max drift of the conserved quantity h^2 - Hinf(phi)^2, batched
    over seeds.

    Checked on recorded states that are alive and satisfy |phi| <= phi_cap:
    approaching the boundary both terms grow like (1 - |phi|)^-2 and their
    float cancellation would swamp the genuine drift.
    """
    z = np.asarray(z0, dtype=complex).ravel()
    hinf = stationary_evaluator(params)
    target = (np.asarray(herglotz_eval(h0, z)) ** 2
              - np.asarray(herglotz_eval(hinf, z)) ** 2)
    times, phis, hs, alives = _flow_batch(z, params, h0, t_end, step,
                                          record_every)
    worst = 0.0
    for k in range(len(times)):
        mask = alives[k] & (np.abs(phis[k]) <= phi_cap)
        if not np.any(mask):
            continue
        val = (hs[k, mask] ** 2
               - np.asarray(herglotz_eval(hinf, phis[k, mask])) ** 2)
        worst = max(worst, float(np.max(np.abs(val - target[mask]))))
    return worst


def _closed_form_data(z, params, h0):
    """Shared ingredients (c, sqrt(c), d) of the real-seed closed form."""
    alpha, beta = params.alpha, params.beta
    hz = herglotz_eval(h0, complex(z))
    if abs(hz.imag) > 1e-9 * (1.0 + abs(hz)):
        raise ValidationError("initial transform is not real on the real seed")
    wz = complex(moebius_part(complex(z), params))
    c = (hz * hz - wz * wz).real + (params.a + params.b) ** 2
    if c <= 0.0:
        raise DomainError("c(y) = %.6g is not positive at z = %r" % (c, z))
    y = (1.0 + z) / (1.0 - z)
    u0 = 1.0 - y * y
    c1 = c + alpha * beta
    c2 = params.b ** 2
    x_val = c - c1 * u0 + c2 * u0 * u0
    if x_val < 0.0:
        raise DomainError(
            "auxiliary radicand X(u0) = %.6g is negative at z = %r" % (x_val, z))
    sc = math.sqrt(c)
    d = -c1 + 2.0 * sc * (c1 - c2 * u0) / (sc + math.sqrt(x_val))
    return c, sc, d


def phi_closed_form(z, t, params, h0, ode_step=1e-4):
    """Closed-form phi_t(z) for real z.

    Near the origin (|z| < 0.05) the formula loses digits to cancellation
    and the ODE path is used instead; complex seeds always go through the
    ODE.  Negative radicands raise DomainError naming the quantity; past
    the exit time of the seed the formula returns reflected values rather
    than raising, callers tracking lifetimes should use flow_lifetime.
    """
    if isinstance(z, complex) and z.imag != 0.0:
        raise ValidationError("closed form is for real seeds, use flow_ode")
    z = float(z)
    if not -1.0 < z < 1.0:
        raise ValidationError("seed must satisfy |z| < 1")
    if t < 0.0:
        raise ValidationError("time must be nonnegative")
    if z == 0.0 or t == 0.0:
        return z
    if abs(z) < 0.05:
        phi, _ = _phi_final([z], params, h0, t, ode_step)
        return float(phi[0].real)
    alpha, beta = params.alpha, params.beta
    c, sc, d = _closed_form_data(z, params, h0)
    a2c = 4.0 * params.a ** 2 * c
    b2c = 4.0 * params.b ** 2 * c
    expo = t * sc
    if d != 0.0 and (expo + math.log(abs(d)) > 200.0 or expo > 500.0):
        # dE dominates both radicands; w -> 1 and phi decays like
        # -(c / d) exp(-t sqrt(c)), underflow to 0 is fine
        return -(c / d) * math.exp(-expo)
    de = d * math.exp(expo)
    num = (alpha * beta - c + de) ** 2 - a2c
    den = (alpha * beta + c + de) ** 2 - b2c
    if num < 0.0:
        raise DomainError(
            "numerator radicand %.6g < 0 at z = %r, t = %r: z is outside the "
            "domain of the flow or too close to 0" % (num, z, t))
    if den <= 0.0:
        raise DomainError(
            "denominator radicand %.6g <= 0 at z = %r, t = %r: z is outside "
            "the domain of the flow or too close to 0" % (den, z, t))
    w = math.sqrt(num / den)
    return (w - 1.0) / (w + 1.0)


def flow_lifetime(z, params, h0):
    """Exit time of the real-seed flow, math.inf if it never exits.

    Zeros in E = exp(t sqrt(c)) of the closed-form radicands mark the
    times at which phi reaches -1 (numerator) or +1 (denominator); the
    first crossing past E = 1 is the exit.
    """
    z = float(z)
    if not -1.0 < z < 1.0:
        raise ValidationError("seed must satisfy |z| < 1")
    if z == 0.0:
        return math.inf
    alpha, beta = params.alpha, params.beta
    c, sc, d = _closed_form_data(z, params, h0)
    if d == 0.0:
        return math.inf
    two_a = 2.0 * params.a * sc
    two_b = 2.0 * params.b * sc
    crossings = [(c - alpha * beta + two_a) / d,
                 (c - alpha * beta - two_a) / d,
                 (-(alpha * beta + c) + two_b) / d,
                 (-(alpha * beta + c) - two_b) / d]
    # the margin only needs to reject pre-initial crossings; seeds close
    # to the circle have genuine crossings barely above E = 1
    future = [e for e in crossings if e > 1.0 + 1e-13]
    if not future:
        return math.inf
    return math.log(min(future)) / sc


def _phi_final(seeds, params, h0, t, step):
    """Endpoint of the flow for a batch of seeds; returns (phi, alive)."""
    n_steps = max(1, int(round(t / step)))
    _, phis, _, alives = _flow_batch(seeds, params, h0, t, step,
                                     record_every=n_steps)
    return phis[-1], alives[-1]


def eta_batch(z, t_targets, params, h0, ode_step=1e-3, dt_ladder=0.25,
              tol=1e-9, max_iter=40):
    """Inverse maps eta_t(z) for a batch of z at several times.

    Newton iteration on phi_t(w) = z with a finite-difference derivative
    (real offset, valid for analytic maps) and continuation up a time
    ladder starting from eta_0 = id.  Returns {t: eta array}.
    """
    z = np.asarray(z, dtype=complex).ravel()
    if np.any(np.abs(z) >= 1.0):
        raise ValidationError("targets must satisfy |z| < 1")
    t_targets = sorted(set(float(t) for t in np.atleast_1d(t_targets)))
    if t_targets[0] < 0.0:
        raise ValidationError("times must be nonnegative")
    ladder = set(t_targets)
    for k in range(1, int(t_targets[-1] / dt_ladder) + 1):
        ladder.add(k * dt_ladder)
    ladder = sorted(tau for tau in ladder if tau > 0.0)

    eta = z.copy()
    out = {}
    if t_targets[0] == 0.0:
        out[0.0] = z.copy()
    for tau in ladder:
        w = eta.copy()
        converged = np.zeros(z.size, dtype=bool)
        for _ in range(max_iter):
            delta = 1e-6 * np.maximum(1.0, np.abs(w))
            seeds = np.concatenate([w, w + delta, w - delta])
            vals, _ = _phi_final(seeds, params, h0, tau, ode_step)
            fw = vals[:z.size] - z
            converged = np.abs(fw) < tol
            if np.all(converged):
                break
            dphi = (vals[z.size:2 * z.size] - vals[2 * z.size:]) / (2.0 * delta)
            dphi = np.where(dphi == 0.0, 1.0, dphi)
            step = fw / dphi
            cand = w - step
            # damp any update that would leave the disk
            for _ in range(60):
                mask = np.abs(cand) >= 1.0 - EXIT_TOL
                if not np.any(mask):
                    break
                step = step / 2.0
                cand = np.where(mask, w - step, cand)
            w = np.where(converged, w, cand)
        if not np.all(converged):
            final, _ = _phi_final(w, params, h0, tau, ode_step)
            if np.max(np.abs(final - z)) > tol:
                raise NumericalHealthError(
                    "subordination Newton did not converge at t = %.4g; "
                    "reduce t or use a finer continuation ladder" % tau)
        eta = w
        if tau in t_targets:
            out[tau] = eta.copy()
    return out


def eta_inverse(z, t, params, h0, ode_step=1e-3, dt_ladder=0.25, tol=1e-9):
    """Scalar inverse map eta_t(z) with |eta| <= |z| (Schwarz)."""
    if z == 0.0:
        return 0.0 + 0.0j
    res = eta_batch([z], [t], params, h0, ode_step=ode_step,
                    dt_ladder=dt_ladder, tol=tol)
    return complex(res[float(t)][0])


def subordination_check(params, h0, z_grid, t_grid, n_moments=64,
                        ode_step=1e-3, r_max=0.75):
    """Max |K(t, z) - K(0, eta_t(z))| over the given grids.

    K(t, .) comes from the evolved moment series, eta from the Newton
    inversion of the ODE flow: the two sides share no analytic shortcut.
    """
    z = np.asarray(z_grid, dtype=complex).ravel()
    t_grid = sorted(float(t) for t in np.atleast_1d(t_grid))
    f0 = initial_moments(h0, n_moments)
    traj = evolve_moments(f0, params, max(t_grid), step=ode_step)
    etas = eta_batch(z, [t for t in t_grid if t > 0.0], params, h0,
                     ode_step=ode_step)
    worst = 0.0
    for t in t_grid:
        if t == 0.0:
            continue
        h_t = series_evaluator(traj.state(traj.index_of(t)), r_max=r_max)
        lhs = K_eval(h_t, z, params)
        rhs = K_eval(h0, etas[t], params)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def domain_boundary(t, params, h0, max_radius=None):
    """Real boundary points (x_minus, x_plus) of the domain of eta_t.

    Seeds beyond x_plus (or below x_minus) have exited the disk by time
    t.  Located by bisection on the closed-form exit time.  At t = 0 the
    domain is the whole interval, returned as the sentinel (-1.0, 1.0).
    Each side needs the corresponding stationary atom, or failing that an
    initial atom feeding it: b > 0 or nu_0({angle 0}) > 0 for x_plus,
    a > 0 or nu_0({angle pi}) > 0 for x_minus.
    """
    if t < 0.0:
        raise ValidationError("time must be nonnegative")
    if t == 0.0:
        return (-1.0, 1.0)
    if max_radius is None:
        # closed-form evaluators stay conditioned up to 1 - 1e-6; closer
        # to the circle the exit-time crossings degenerate in float64
        max_radius = (h0.r_max - 1e-12) if h0.kind == "series" else 1.0 - 1e-6
    probe = max_radius - 1e-9
    init_zero = (1.0 - probe) * herglotz_eval(h0, probe).real / 2.0
    init_pi = (1.0 - probe) * herglotz_eval(h0, -probe).real / 2.0
    if params.b <= 0.0 and init_zero < 1e-3:
        raise DomainError(
            "x_plus undefined: b = 0 and the initial law has no atom at angle 0")
    if params.a <= 0.0 and init_pi < 1e-3:
        raise DomainError(
            "x_minus undefined: a = 0 and the initial law has no atom at angle pi")

    if flow_lifetime(max_radius, params, h0) > t:
        raise DomainError("x_plus reaches the edge of the evaluable radius")
    if flow_lifetime(-max_radius, params, h0) > t:
        raise DomainError("x_minus reaches the edge of the evaluable radius")
    x_plus = _bisect_exit(t, params, h0, max_radius)
    x_minus = _bisect_exit(t, params, h0, -max_radius)
    return (x_minus, x_plus)


def _bisect_exit(t, params, h0, edge):
    # invariant: lifetime(lo) > t >= lifetime(hi)
    lo, hi = 0.0, edge
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if flow_lifetime(mid, params, h0) > t:
            lo = mid
        else:
            hi = mid
        if abs(hi - lo) < 1e-15:
            break
    return 0.5 * (lo + hi)
