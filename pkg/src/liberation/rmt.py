"""Finite-dimensional matrix models of the liberation process.

Unitary Brownian motion is discretized by independent multiplicative
increments U <- U exp(i sqrt(h) G) with GUE steps G normalized so that
E[(1/N) Tr G^2] = 1.  The exponential of the Hermitian step is taken by
spectral decomposition, which is exactly unitary up to roundoff; the
running product is re-orthonormalized every 100 steps.

Sample streams are derived as SeedSequence(seed, spawn_key=(i,)) so each
sample index i owns a fixed stream: results are bit-identical however
the samples are scheduled, and the mean/stderr reduction runs in fixed
index order.

All identities are checked against the achieved traces of the built
matrices (a trace like alpha can only be realized on a grid of spacing
2/N), never against the requested targets.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from .bridge import project_moments
from .errors import NumericalHealthError, ValidationError
from .measures import TraceParams

_PRESETS = ("free", "equal", "classical", "custom")
_REORTH_EVERY = 100
_UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class EnsembleConfig:
    """Monte Carlo run description.

    alpha and beta are targets; the achieved traces land on the grid
    (2 ceil(N (1 + target) / 2) - N) / N and are reported back by
    monte_carlo.  t_grid must be increasing.
    """

    n_dim: int
    alpha: float = 0.0
    beta: float = 0.0
    preset: str = "free"
    delta: float = 0.05
    seed: int = 42
    n_samples: int = 40
    n_moments: int = 6
    t_grid: tuple = (1.0,)
    n_workers: int = 1
    angles: tuple = None

    def __post_init__(self):
        if self.n_dim < 2:
            raise ValidationError("n_dim must be at least 2")
        if self.preset not in _PRESETS:
            raise ValidationError("unknown preset %r" % (self.preset,))
        if self.delta <= 0.0:
            raise ValidationError("delta must be positive")
        if self.n_samples < 1 or self.n_moments < 1:
            raise ValidationError("n_samples and n_moments must be positive")
        if not (-1.0 <= self.alpha <= 1.0 and -1.0 <= self.beta <= 1.0):
            raise ValidationError("trace targets must lie in [-1, 1]")
        t = tuple(float(v) for v in self.t_grid)
        if any(v < 0.0 for v in t) or any(b <= a for a, b in zip(t, t[1:])):
            raise ValidationError("t_grid must be nonnegative and increasing")
        object.__setattr__(self, "t_grid", t)
        if self.angles is not None:
            object.__setattr__(self, "angles",
                               tuple(float(v) for v in self.angles))


def achieved_trace(n_dim, target):
    """Trace actually realizable by a +-1 diagonal of dimension n_dim."""
    ones = math.ceil(n_dim * (1.0 + target) / 2.0)
    return (2 * ones - n_dim) / n_dim


def gue_step(n_dim, rng):
    """GUE matrix with E[(1/N) Tr G^2] = 1."""
    a = rng.standard_normal((n_dim, n_dim)) + 1j * rng.standard_normal((n_dim, n_dim))
    return (a + a.conj().T) / (2.0 * math.sqrt(n_dim))


def haar_unitary(n_dim, rng):
    """Haar unitary via QR with the R-diagonal phase fix."""
    z = (rng.standard_normal((n_dim, n_dim))
         + 1j * rng.standard_normal((n_dim, n_dim))) / math.sqrt(2.0)
    q, r = qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _reorthonormalize(u):
    q, r = qr(u)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _unitary_exponential(g, scale):
    # exp(i scale g) for Hermitian g via eigendecomposition
    w, v = np.linalg.eigh(g)
    return (v * np.exp(1j * scale * w)) @ v.conj().T


def advance_unitary(u, duration, delta, rng, counter=0):
    """Advance the Brownian product by `duration`; returns (u, counter).

    The segment is cut into max(1, round(duration / delta)) equal steps
    so every requested time is hit exactly.
    """
    if duration < 0.0:
        raise ValidationError("duration must be nonnegative")
    if duration == 0.0:
        return u, counter
    n_steps = max(1, int(round(duration / delta)))
    h = duration / n_steps
    scale = math.sqrt(h)
    for _ in range(n_steps):
        u = u @ _unitary_exponential(gue_step(u.shape[0], rng), scale)
        counter += 1
        if counter % _REORTH_EVERY == 0:
            u = _reorthonormalize(u)
    return u, counter


def unitarity_defect(u):
    n = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(n))))


def evolve_unitary(n_dim, t, delta, rng):
    """Brownian unitary at time t started from the identity."""
    u = np.eye(n_dim, dtype=complex)
    u, _ = advance_unitary(u, t, delta, rng)
    defect = unitarity_defect(u)
    if defect > _UNITARITY_TOL:
        raise NumericalHealthError(
            "unitarity defect %.3e after evolution to t = %r" % (defect, t))
    return u


def _sign_diagonal(n_dim, trace_target):
    ones = math.ceil(n_dim * (1.0 + trace_target) / 2.0)
    d = -np.ones(n_dim)
    d[:ones] = 1.0
    return d


def build_pair(n_dim, alpha, beta, preset, rng, angles=None):
    """Symmetry matrices (R, S) plus their achieved traces.

    free: R diagonal, S a Haar conjugate of a diagonal, so the pair is
    asymptotically free.  equal: S = R.  classical: independently
    shuffled sign diagonals, a commuting independent pair.  custom:
    2x2 blocks with the given principal angles (n_dim even, both traces
    zero by construction).
    """
    if preset not in _PRESETS:
        raise ValidationError("unknown preset %r" % (preset,))
    if preset == "custom":
        if angles is None:
            raise ValidationError("custom preset needs principal angles")
        if n_dim % 2 != 0 or len(angles) != n_dim // 2:
            raise ValidationError(
                "custom preset needs n_dim even and n_dim / 2 angles")
        r_mat = np.zeros((n_dim, n_dim), dtype=complex)
        s_mat = np.zeros((n_dim, n_dim), dtype=complex)
        for i, theta in enumerate(angles):
            j = 2 * i
            c, s = math.cos(theta), math.sin(theta)
            r_mat[j, j] = 1.0
            r_mat[j + 1, j + 1] = -1.0
            # S = 2 Q - I for the projection onto (c, s)
            s_mat[j, j] = 2.0 * c * c - 1.0
            s_mat[j, j + 1] = 2.0 * c * s
            s_mat[j + 1, j] = 2.0 * c * s
            s_mat[j + 1, j + 1] = 2.0 * s * s - 1.0
    else:
        r_diag = _sign_diagonal(n_dim, alpha)
        r_mat = np.diag(r_diag).astype(complex)
        if preset == "equal":
            s_mat = r_mat.copy()
        elif preset == "classical":
            s_diag = rng.permutation(_sign_diagonal(n_dim, beta))
            r_mat = np.diag(rng.permutation(r_diag)).astype(complex)
            s_mat = np.diag(s_diag).astype(complex)
        else:
            v = haar_unitary(n_dim, rng)
            s_diag = _sign_diagonal(n_dim, beta)
            s_mat = (v * s_diag[None, :]) @ v.conj().T
    achieved_a = float(np.trace(r_mat).real) / n_dim
    achieved_b = float(np.trace(s_mat).real) / n_dim
    return r_mat, s_mat, achieved_a, achieved_b


def empirical_moments(r_mat, s_mat, u, n_max):
    """Traces of powers of the conjugated pair.

    Returns (f, m) with f[n-1] = (1/N) Tr[(R U S U*)^n] and m[n-1] the
    same for the projections P = (I + R)/2, Q' = (I + U S U*)/2.  Powers
    are accumulated by repeated multiplication, no eigendecomposition.
    Imaginary parts must vanish: beyond 1e-8 the run is aborted.
    """
    n_dim = u.shape[0]
    eye = np.eye(n_dim)
    us = u @ s_mat @ u.conj().T
    base_f = r_mat @ us
    base_m = ((r_mat + eye) / 2.0) @ ((us + eye) / 2.0)
    f = np.empty(n_max, dtype=complex)
    m = np.empty(n_max, dtype=complex)
    acc_f, acc_m = base_f, base_m
    for n in range(n_max):
        f[n] = np.trace(acc_f) / n_dim
        m[n] = np.trace(acc_m) / n_dim
        if n + 1 < n_max:
            acc_f = acc_f @ base_f
            acc_m = acc_m @ base_m
    worst = max(float(np.max(np.abs(f.imag))), float(np.max(np.abs(m.imag))))
    if worst > 1e-8:
        raise NumericalHealthError(
            "trace of a power has imaginary part %.3e, model is unhealthy" % worst)
    return f.real.copy(), m.real.copy()


def _run_sample(config, index):
    """One sample: full t_grid sweep with the stream owned by `index`."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed,
                                                       spawn_key=(index,)))
    r_mat, s_mat, aa, bb = build_pair(config.n_dim, config.alpha, config.beta,
                                      config.preset, rng, config.angles)
    achieved = TraceParams(aa, bb)
    n_t = len(config.t_grid)
    out_f = np.empty((n_t, config.n_moments))
    out_m = np.empty((n_t, config.n_moments))
    u = np.eye(config.n_dim, dtype=complex)
    counter = 0
    prev = 0.0
    for j, t in enumerate(config.t_grid):
        u, counter = advance_unitary(u, t - prev, config.delta, rng, counter)
        prev = t
        f, m = empirical_moments(r_mat, s_mat, u, config.n_moments)
        resid = float(np.max(np.abs(m - project_moments(f, achieved))))
        if resid > 1e-10:
            raise NumericalHealthError(
                "binomial projection identity violated per sample: "
                "residual %.3e at t = %r" % (resid, t))
        out_f[j] = f
        out_m[j] = m
    defect = unitarity_defect(u)
    if defect > _UNITARITY_TOL:
        raise NumericalHealthError(
            "unitarity defect %.3e in sample %d" % (defect, index))
    return out_f, out_m, aa, bb


@dataclass(frozen=True)
class MomentTable:
    """Mean and standard error of empirical moments over samples."""

    t_grid: tuple
    n_samples: int
    n_dim: int
    achieved_alpha: float
    achieved_beta: float
    f_mean: np.ndarray
    f_err: np.ndarray
    m_mean: np.ndarray
    m_err: np.ndarray

    @property
    def n_moments(self):
        return self.f_mean.shape[1]

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("process,t,n,mean,stderr,n_samples,N\n")
            for name, mean, err in (("symmetry", self.f_mean, self.f_err),
                                    ("projection", self.m_mean, self.m_err)):
                for i, t in enumerate(self.t_grid):
                    for n in range(self.n_moments):
                        fh.write("%s,%.17g,%d,%.17g,%.17g,%d,%d\n"
                                 % (name, t, n + 1, mean[i, n], err[i, n],
                                    self.n_samples, self.n_dim))


def monte_carlo(config):
    """Run the ensemble described by config.

    The per-sample binomial identity is asserted inside every worker; a
    violation aborts the whole run.  The reduction is a fixed-order mean
    over the sample axis, independent of worker scheduling.
    """
    n_t = len(config.t_grid)
    all_f = np.empty((config.n_samples, n_t, config.n_moments))
    all_m = np.empty((config.n_samples, n_t, config.n_moments))
    aa = bb = None
    if config.n_workers > 1:
        with ProcessPoolExecutor(max_workers=config.n_workers) as pool:
            results = list(pool.map(_run_sample,
                                    [config] * config.n_samples,
                                    range(config.n_samples)))
    else:
        results = [_run_sample(config, i) for i in range(config.n_samples)]
    for i, (f, m, a1, b1) in enumerate(results):
        all_f[i] = f
        all_m[i] = m
        aa, bb = a1, b1
    if config.n_samples > 1:
        f_err = np.std(all_f, axis=0, ddof=1) / math.sqrt(config.n_samples)
        m_err = np.std(all_m, axis=0, ddof=1) / math.sqrt(config.n_samples)
    else:
        f_err = np.zeros((n_t, config.n_moments))
        m_err = np.zeros((n_t, config.n_moments))
    return MomentTable(config.t_grid, config.n_samples, config.n_dim,
                       aa, bb,
                       all_f.mean(axis=0), f_err,
                       all_m.mean(axis=0), m_err)
