"""Bridges between the symmetry-pair and projection-pair pictures.

With R = 2P - 1 and S = 2Q - 1, the moments of the projection process
m_n = tau[(P U_t Q U_t*)^n] and of the symmetry process
f_n = tau[(R U_t S U_t*)^n] are related by the exact binomial identity

    m_n = C(2n, n) / 2^(2n+1) + (alpha + beta) / 4
          + 4^(-n) sum_{k=1}^n C(2n, n-k) f_k,

valid sample by sample in matrix models, not only in expectation.  The
linear map is lower triangular with diagonal 4^(-n), so inverting it
amplifies absolute errors of m_n by 4^n; round trips in float64 are
reliable up to n around 10.

On the measure level, writing mu_hat for the symmetrization of mu_t on
the circle (under x = cos^2(theta / 2)),

    nu_t = 2 mu_hat - ((2 - alpha - beta) / 2) delta_pi
                    - ((alpha + beta) / 2) delta_0,

and removing the stationary atoms leaves the positive remainder
sigma_t = nu_t - a delta_pi - b delta_0 of mass 1 - a - b.
"""

import math

import numpy as np

from .errors import NumericalHealthError, ValidationError
from .measures import (CircleMeasure, IntervalMeasure, circle_to_interval,
                       interval_to_circle)

_ATOM_TOL = 1e-10


def binomial_rows(n_max):
    """Lower-triangular map T[n-1, k-1] = 4^(-n) C(2n, n-k), k <= n."""
    t = np.zeros((n_max, n_max))
    for n in range(1, n_max + 1):
        scale = 1.0 / 4 ** n
        for k in range(1, n + 1):
            t[n - 1, k - 1] = math.comb(2 * n, n - k) * scale
    return t


def projection_base(params, n_max):
    """Affine part of the identity: central binomial term plus traces."""
    base = np.array([math.comb(2 * n, n) / 2 ** (2 * n + 1)
                     for n in range(1, n_max + 1)])
    return base + (params.alpha + params.beta) / 4.0


def project_moments(f, params):
    """Map symmetry moments f_1..f_N to projection moments m_1..m_N."""
    f = np.asarray(f, dtype=float)
    return binomial_rows(f.size) @ f + projection_base(params, f.size)


def invert_projected_moments(m, params):
    """Forward substitution of the triangular identity.

    The diagonal is 4^(-n): input noise in m_n shows up in f_n amplified
    by 4^n, so keep n modest when m carries float roundoff.
    """
    m = np.asarray(m, dtype=float)
    n_max = m.size
    t = binomial_rows(n_max)
    rhs = m - projection_base(params, n_max)
    f = np.zeros(n_max)
    for n in range(n_max):
        acc = float(t[n, :n] @ f[:n])
        f[n] = (rhs[n] - acc) / t[n, n]
    return f


def projection_atom_masses(params):
    """Endpoint atoms of the stationary projection law.

    With p = (1 + alpha) / 2 and q = (1 + beta) / 2 the projection ranks,
    mass 1 - min(p, q) sits at x = 0 and max(p + q - 1, 0) at x = 1.
    """
    p = (1.0 + params.alpha) / 2.0
    q = (1.0 + params.beta) / 2.0
    return 1.0 - min(p, q), max(p + q - 1.0, 0.0)


def measure_nu_from_mu(mu, params):
    """Symmetry-side law nu from the projection-side law mu."""
    mu_hat = interval_to_circle(mu)
    atom_zero = 2.0 * mu_hat.atom_zero - (params.alpha + params.beta) / 2.0
    atom_pi = 2.0 * mu_hat.atom_pi - (2.0 - params.alpha - params.beta) / 2.0
    if atom_zero < -_ATOM_TOL:
        raise ValidationError(
            "atom of nu at angle 0 would be %.3e: mu is not a projection-pair "
            "law for these traces" % atom_zero)
    if atom_pi < -_ATOM_TOL:
        raise ValidationError(
            "atom of nu at angle pi would be %.3e: mu is not a projection-pair "
            "law for these traces" % atom_pi)
    return CircleMeasure(max(atom_zero, 0.0), max(atom_pi, 0.0),
                         mu_hat.grid, 2.0 * mu_hat.density)


def measure_mu_from_nu(nu, params):
    """Projection-side law mu from the symmetry-side law nu."""
    atom_one = (nu.atom_zero + (params.alpha + params.beta) / 2.0) / 2.0
    atom_zero_x = (nu.atom_pi + (2.0 - params.alpha - params.beta) / 2.0) / 2.0
    if atom_one < -_ATOM_TOL or atom_zero_x < -_ATOM_TOL:
        raise ValidationError("traces inconsistent with nu: negative mu atom")
    mu_hat = CircleMeasure(max(atom_one, 0.0), max(atom_zero_x, 0.0),
                           nu.grid, nu.density / 2.0)
    return circle_to_interval(mu_hat)


def sigma_from_nu(nu, params):
    """Remainder sigma = nu - a delta_pi - b delta_0, mass 1 - a - b.

    Computed twice, directly and through the projection picture, and the
    two atom values must agree to 1e-12.
    """
    s_pi = nu.atom_pi - params.a
    s_zero = nu.atom_zero - params.b
    if s_pi < -_ATOM_TOL:
        raise ValidationError(
            "atom deficit at angle pi: nu carries %.6g, stationary atom a = %.6g"
            % (nu.atom_pi, params.a))
    if s_zero < -_ATOM_TOL:
        raise ValidationError(
            "atom deficit at angle 0: nu carries %.6g, stationary atom b = %.6g"
            % (nu.atom_zero, params.b))
    # independent route through the projection picture
    p = (1.0 + params.alpha) / 2.0
    q = (1.0 + params.beta) / 2.0
    hat_pi = (nu.atom_pi + (2.0 - params.alpha - params.beta) / 2.0) / 2.0
    hat_zero = (nu.atom_zero + (params.alpha + params.beta) / 2.0) / 2.0
    alt_pi = 2.0 * (hat_pi - (1.0 - min(p, q)))
    alt_zero = 2.0 * (hat_zero - max(p + q - 1.0, 0.0))
    if abs(alt_pi - s_pi) > 1e-12 or abs(alt_zero - s_zero) > 1e-12:
        raise NumericalHealthError(
            "the two routes to the sigma atoms disagree beyond roundoff")
    return CircleMeasure(max(s_zero, 0.0), max(s_pi, 0.0), nu.grid, nu.density)
