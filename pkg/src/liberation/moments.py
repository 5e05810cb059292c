"""Moment flow of the pair process under free unitary Brownian motion.

The moments f_n(t) = tau[(R U_t S U_t*)^n] close into the triangular ODE
system

    f_n' = -n f_n - n * sum_{k=1}^{n-1} f_k f_{n-k} + s_n,

with constant source s_n = n^2 alpha beta for odd n and
s_n = n^2 (alpha^2 + beta^2) / 2 for even n.  Truncation at order N is
exact for the first N moments: f_n' involves only f_1..f_{n-1}.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalHealthError, ValidationError
from .measures import MomentSequence


def source_terms(params, n_max):
    n = np.arange(1, n_max + 1, dtype=float)
    s = np.where(np.arange(1, n_max + 1) % 2 == 1,
                 params.alpha * params.beta,
                 (params.alpha ** 2 + params.beta ** 2) / 2.0)
    return n * n * s


def moment_ode_rhs(f, params, source=None):
    """Right-hand side of the closed moment system.

    The quadratic term for f_n is sum_{k=1}^{n-1} f_k f_{n-k}, which is
    np.convolve(f, f)[n - 2] (empty for n = 1).
    """
    f = np.asarray(f, dtype=float)
    n_max = f.size
    if source is None:
        source = source_terms(params, n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    quad = np.zeros(n_max)
    if n_max >= 2:
        quad[1:] = np.convolve(f, f)[:n_max - 1]
    return -n * f - n * quad + source


@dataclass(frozen=True)
class MomentTrajectory:
    """Moment vectors on a uniform time grid.

    values[i] holds (f_1, ..., f_N) at times[i]; step is the RK4 step
    actually used (a divisor of the requested horizon).
    """

    times: np.ndarray
    values: np.ndarray
    step: float

    @property
    def n_moments(self):
        return self.values.shape[1]

    def state(self, i):
        return MomentSequence(float(self.times[i]), self.values[i])

    def final(self):
        return self.state(len(self.times) - 1)

    def index_of(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(float(self.times[i]) - t) > 1e-9:
            raise ValidationError("time %r is not on the trajectory grid" % (t,))
        return i

    def write_csv(self, path):
        n = self.n_moments
        with open(path, "w") as fh:
            fh.write("t," + ",".join("f%d" % k for k in range(1, n + 1)) + "\n")
            for t, row in zip(self.times, self.values):
                fh.write("%.17g," % t + ",".join("%.17g" % v for v in row) + "\n")


def evolve_moments(f0, params, t_end, step=1e-3, store_every=1):
    """Integrate the moment system with classical fixed-step RK4.

    f0 may be a MomentSequence or a plain vector (then taken at t = 0).
    The step is adjusted to the nearest divisor of t_end so the grid ends
    exactly on the horizon.  Fixed points of the system are preserved
    exactly: every RK4 stage vanishes there.
    """
    if isinstance(f0, MomentSequence):
        t0, f = f0.t, f0.f.copy()
    else:
        t0, f = 0.0, np.asarray(f0, dtype=float).copy()
    if t_end < 0.0:
        raise ValidationError("t_end must be nonnegative")
    if t_end == 0.0:
        return MomentTrajectory(np.array([t0]), f[None, :].copy(), step)
    n_steps = max(1, int(round(t_end / step)))
    # round up to a multiple of store_every so the grid ends on t_end
    store_every = min(store_every, n_steps)
    n_steps = ((n_steps + store_every - 1) // store_every) * store_every
    h = t_end / n_steps
    source = source_terms(params, f.size)

    n_store = n_steps // store_every + 1
    times = np.empty(n_store)
    values = np.empty((n_store, f.size))
    times[0] = t0
    values[0] = f
    j = 1
    for i in range(n_steps):
        k1 = moment_ode_rhs(f, params, source)
        k2 = moment_ode_rhs(f + 0.5 * h * k1, params, source)
        k3 = moment_ode_rhs(f + 0.5 * h * k2, params, source)
        k4 = moment_ode_rhs(f + h * k3, params, source)
        f = f + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (i + 1) % store_every == 0:
            if not np.all(np.isfinite(f)):
                raise NumericalHealthError(
                    "non-finite moment state at t = %.6g" % (t0 + (i + 1) * h))
            times[j] = t0 + (i + 1) * h
            values[j] = f
            j += 1
    return MomentTrajectory(times[:j], values[:j], h)


def _series_mul(a, b):
    n = len(a)
    return np.convolve(a, b)[:n]


def _series_sqrt(c):
    # sqrt of a power series with positive constant term
    c = np.asarray(c, dtype=float)
    if c[0] <= 0.0:
        raise ValidationError("series sqrt needs a positive constant term")
    n = c.size
    h = np.zeros(n)
    h[0] = math.sqrt(c[0])
    for k in range(1, n):
        acc = np.dot(h[1:k], h[k - 1:0:-1])
        h[k] = (c[k] - acc) / (2.0 * h[0])
    return h


def stationary_moments(params, n_max):
    """Limit moments f_n(inf) as a MomentSequence at t = inf.

    Read off from the square of the limiting Herglotz transform,

        H^2 = 1 + (4 ab z + 4 (a^2 + b^2) z^2 + 4 ab z^3) / (1 - z^2)^2,

    with a = alpha, b = beta, via a power series square root.
    """
    alpha, beta = params.alpha, params.beta
    size = n_max + 1
    num = np.zeros(size)
    if size > 1:
        num[1] = 4.0 * alpha * beta
    if size > 2:
        num[2] = 4.0 * (alpha ** 2 + beta ** 2)
    if size > 3:
        num[3] = 4.0 * alpha * beta
    inv_sq = np.zeros(size)  # (1 - z^2)^(-2) = sum (k+1) z^(2k)
    inv_sq[0::2] = np.arange(1, (size + 1) // 2 + 1)[:inv_sq[0::2].size]
    hsq = _series_mul(num, inv_sq)
    hsq[0] += 1.0
    h = _series_sqrt(hsq)
    return MomentSequence(math.inf, h[1:] / 2.0)


def fixed_point_residual(seq, params):
    """Max |rhs| of the moment system at a sequence; small at stationarity."""
    return float(np.max(np.abs(moment_ode_rhs(seq.f, params))))
