"""Domain types: trace parameters, moment sequences, spectral measures.

The toolkit follows the pair process Y_t = R (U_t S U_t*) built from two
symmetries R, S (self-adjoint unitaries) conjugated by a free unitary
Brownian motion U_t.  All moments f_n(t) = tau[Y_t^n] are real, so the
spectral measure nu_t of Y_t on the unit circle is invariant under
conjugation.  Circle measures are therefore stored one-sided: atoms may
sit only at angles 0 and pi, and a density sample at theta in (0, pi)
implicitly carries the same value at -theta.  Total mass counts the
density twice.

The companion projection process X_t = P (U_t Q U_t*), with R = 2P - 1
and S = 2Q - 1, has a spectral measure mu_t on [0, 1].  IntervalMeasure
stores it with atoms allowed only at the endpoints.  The two pictures are
linked by x = cos^2(theta / 2); conversions live at the bottom of this
module and in the bridge module.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Tolerance for clipping roundoff-negative atoms and densities.  Anything
# below -_NEG_TOL is a real sign violation and rejected.
_NEG_TOL = 1e-12


def _clip_nonneg(x, what):
    x = np.asarray(x, dtype=float)
    if np.any(x < -_NEG_TOL):
        raise ValidationError("%s is negative: min value %.3e" % (what, float(np.min(x))))
    return np.clip(x, 0.0, None)


def quadrature_weights(grid):
    """Weights w with sum(w * samples) ~ integral over [grid[0], grid[-1]].

    Composite Simpson on a uniform grid with an odd number of points; a
    trailing trapezoid cell is appended when the uniform count is even.
    Non-uniform grids fall back to the trapezoid rule.  A grid with fewer
    than two points integrates to zero.
    """
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    w = np.zeros(n)
    if n < 2:
        return w
    h = np.diff(grid)
    # rtol must absorb the wobble of angle grids recovered through arccos
    if np.allclose(h, h[0], rtol=1e-8, atol=0.0) and n >= 3:
        step = float(h[0])
        m = n if n % 2 == 1 else n - 1
        w[0:m:2] = 2.0 * step / 3.0
        w[1:m:2] = 4.0 * step / 3.0
        w[0] = step / 3.0
        w[m - 1] = step / 3.0
        if m < n:
            w[-2] += step / 2.0
            w[-1] += step / 2.0
    else:
        w[:-1] += h / 2.0
        w[1:] += h / 2.0
    return w


@dataclass(frozen=True)
class TraceParams:
    """Trace data of the pair: alpha = tau(R), beta = tau(S).

    Derived quantities fixed by (alpha, beta):

    * a = |alpha - beta| / 2 and b = |alpha + beta| / 2, the stationary
      atoms of nu at angles pi and 0.  They satisfy a, b >= 0,
      a + b = max(|alpha|, |beta|) <= 1 and b^2 - a^2 = alpha * beta.
    * r_plus >= r_minus, the cosines of the edges of the stationary
      spectral arc, with theta_plus = arccos(r_plus) and
      theta_minus = arccos(r_minus), so 0 <= theta_plus <= theta_minus <= pi.
    """

    alpha: float
    beta: float
    a: float = field(init=False)
    b: float = field(init=False)
    r_plus: float = field(init=False)
    r_minus: float = field(init=False)
    theta_plus: float = field(init=False)
    theta_minus: float = field(init=False)

    def __post_init__(self):
        alpha = float(self.alpha)
        beta = float(self.beta)
        if not (-1.0 <= alpha <= 1.0 and -1.0 <= beta <= 1.0):
            raise ValidationError(
                "traces must lie in [-1, 1], got alpha=%r beta=%r" % (alpha, beta))
        cross = math.sqrt(max((1.0 - alpha * alpha) * (1.0 - beta * beta), 0.0))
        r_plus = min(alpha * beta + cross, 1.0)
        r_minus = max(alpha * beta - cross, -1.0)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "a", abs(alpha - beta) / 2.0)
        object.__setattr__(self, "b", abs(alpha + beta) / 2.0)
        object.__setattr__(self, "r_plus", r_plus)
        object.__setattr__(self, "r_minus", r_minus)
        object.__setattr__(self, "theta_plus", math.acos(r_plus))
        object.__setattr__(self, "theta_minus", math.acos(r_minus))


@dataclass(frozen=True)
class MomentSequence:
    """Moments f[n-1] = tau[Y_t^n] for n = 1..len(f) at a single time t."""

    t: float
    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.ndim != 1:
            raise ValidationError("moment vector must be one dimensional")
        # unit circle support bounds every moment by 1; small integrator
        # overshoot is tolerated
        if f.size and np.max(np.abs(f)) > 1.0 + 1e-8:
            raise ValidationError(
                "moment out of range: max |f_n| = %.6f" % float(np.max(np.abs(f))))
        if not (self.t >= 0.0):
            raise ValidationError("time must be nonnegative, got %r" % (self.t,))
        object.__setattr__(self, "f", f)

    @property
    def n_moments(self):
        return self.f.size


@dataclass(frozen=True)
class CircleMeasure:
    """Symmetric probability-like measure on the unit circle.

    Atoms only at angles 0 and pi; `density` samples the absolutely
    continuous part on `grid`, a strictly increasing array inside
    (0, pi).  The stored density is one-sided: it enters every integral
    with a factor 2 for the mirror arc at negative angles.
    """

    atom_zero: float
    atom_pi: float
    grid: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        density = _clip_nonneg(self.density, "circle density")
        if grid.shape != density.shape or grid.ndim != 1:
            raise ValidationError("grid and density must be 1d arrays of equal length")
        if grid.size:
            if grid[0] <= 0.0 or grid[-1] >= math.pi:
                raise ValidationError("grid must lie strictly inside (0, pi)")
            if np.any(np.diff(grid) <= 0.0):
                raise ValidationError("grid must be strictly increasing")
        atom_zero = float(_clip_nonneg(self.atom_zero, "atom at angle 0"))
        atom_pi = float(_clip_nonneg(self.atom_pi, "atom at angle pi"))
        object.__setattr__(self, "atom_zero", atom_zero)
        object.__setattr__(self, "atom_pi", atom_pi)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", density)

    def density_integral(self, values=None):
        """One-sided integral of density (optionally times `values`) over the grid."""
        w = quadrature_weights(self.grid)
        if values is None:
            return float(w @ self.density)
        return float(w @ (self.density * np.asarray(values, dtype=float)))

    def mass(self):
        return self.atom_zero + self.atom_pi + 2.0 * self.density_integral()

    def moments(self, n_max):
        """f_n = integral of cos(n theta), n = 1..n_max (real by symmetry)."""
        f = np.empty(n_max)
        for n in range(1, n_max + 1):
            f[n - 1] = (self.atom_zero + self.atom_pi * (-1.0) ** n
                        + 2.0 * self.density_integral(np.cos(n * self.grid)))
        return f

    def to_json(self):
        return {
            "atom_zero": self.atom_zero,
            "atom_pi": self.atom_pi,
            "grid": self.grid.tolist(),
            "density": self.density.tolist(),
        }

    @classmethod
    def from_json(cls, data):
        return cls(data["atom_zero"], data["atom_pi"],
                   np.asarray(data["grid"]), np.asarray(data["density"]))

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("theta,density\n")
            for theta, dens in zip(self.grid, self.density):
                fh.write("%.17g,%.17g\n" % (theta, dens))


@dataclass(frozen=True)
class IntervalMeasure:
    """Measure on [0, 1] with atoms only at the endpoints."""

    atom_zero: float
    atom_one: float
    grid: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        density = _clip_nonneg(self.density, "interval density")
        if grid.shape != density.shape or grid.ndim != 1:
            raise ValidationError("grid and density must be 1d arrays of equal length")
        if grid.size:
            if grid[0] <= 0.0 or grid[-1] >= 1.0:
                raise ValidationError("grid must lie strictly inside (0, 1)")
            if np.any(np.diff(grid) <= 0.0):
                raise ValidationError("grid must be strictly increasing")
        object.__setattr__(self, "atom_zero", float(_clip_nonneg(self.atom_zero, "atom at 0")))
        object.__setattr__(self, "atom_one", float(_clip_nonneg(self.atom_one, "atom at 1")))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", density)

    def mass(self):
        w = quadrature_weights(self.grid)
        return self.atom_zero + self.atom_one + float(w @ self.density)

    def moments(self, n_max):
        """m_n = integral of x^n, n = 1..n_max.

        Integrated in the angle variable theta = 2 arccos(sqrt(x)).  The
        Jacobian sqrt(x(1-x)) cancels the generic inverse square root
        edge behaviour of densities arising from circle measures, so the
        quadrature sees a smooth integrand; grids that are uniform in
        theta regain Simpson accuracy.
        """
        x = self.grid
        theta = 2.0 * np.arccos(np.sqrt(x))
        # theta decreases with x; flip to an increasing grid
        theta_r = theta[::-1]
        base = (self.density * np.sqrt(x * (1.0 - x)))[::-1]
        w = quadrature_weights(theta_r)
        xr = x[::-1]
        m = np.empty(n_max)
        for n in range(1, n_max + 1):
            m[n - 1] = self.atom_one + float(w @ (base * xr ** n))
        return m

    def to_json(self):
        return {
            "atom_zero": self.atom_zero,
            "atom_one": self.atom_one,
            "grid": self.grid.tolist(),
            "density": self.density.tolist(),
        }

    @classmethod
    def from_json(cls, data):
        return cls(data["atom_zero"], data["atom_one"],
                   np.asarray(data["grid"]), np.asarray(data["density"]))

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("x,density\n")
            for x, dens in zip(self.grid, self.density):
                fh.write("%.17g,%.17g\n" % (x, dens))


def bernoulli_symmetry_law(alpha):
    """Spectral law of a single symmetry with trace alpha.

    Two atoms on the circle: mass (1 + alpha) / 2 at angle 0 and
    (1 - alpha) / 2 at angle pi.
    """
    if not (-1.0 <= alpha <= 1.0):
        raise ValidationError("trace must lie in [-1, 1], got %r" % (alpha,))
    empty = np.zeros(0)
    return CircleMeasure((1.0 + alpha) / 2.0, (1.0 - alpha) / 2.0, empty, empty)


def moments_from_measure(measure, n_max, t=0.0):
    """Moment sequence of a CircleMeasure, tagged with time t."""
    return MomentSequence(t, measure.moments(n_max))


def interval_to_circle(mu):
    """Push an IntervalMeasure forward under x = cos^2(theta / 2).

    Returns the symmetrized circle measure mu_hat: the atom at x = 1 goes
    to angle 0, the atom at x = 0 to angle pi, and a density h(x) dx
    becomes h(cos^2(theta / 2)) |sin theta| / 4 per side.
    """
    x = mu.grid
    theta = 2.0 * np.arccos(np.sqrt(x))
    dens = mu.density * np.abs(np.sin(theta)) / 4.0
    return CircleMeasure(mu.atom_one, mu.atom_zero, theta[::-1], dens[::-1])


def circle_to_interval(nu_hat):
    """Inverse of interval_to_circle for symmetric circle measures."""
    theta = nu_hat.grid
    x = np.cos(theta / 2.0) ** 2
    sin_theta = np.abs(np.sin(theta))
    if np.any(sin_theta < 1e-300):
        raise ValidationError("grid touches an endpoint, cannot divide by sin(theta)")
    dens = 4.0 * nu_hat.density / sin_theta
    return IntervalMeasure(nu_hat.atom_pi, nu_hat.atom_zero, x[::-1], dens[::-1])
