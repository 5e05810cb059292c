"""Herglotz-type transforms of the pair process and derived objects.

For a symmetric circle measure nu_t with moments f_n(t), the Herglotz
transform is

    H(t, z) = 1 + 2 sum_{n>=1} f_n(t) z^n,   |z| < 1,

with Re H > 0 on the disk.  Subtracting the Moebius part

    W(z) = a (1 - z) / (1 + z) + b (1 + z) / (1 - z)

carried by the stationary atoms (a at angle pi, b at angle 0) gives the
regularized transforms K = sqrt(H^2 - W^2) and L = H - W.

Closed forms implemented here: the stationary / free-initial law

    H^2 = 1 + (4 alpha beta z + 4 (alpha^2 + beta^2) z^2
               + 4 alpha beta z^3) / (1 - z^2)^2,

and the classical (commuting, independent) pair

    H = (1 + 2 Gamma z + z^2) / (1 - z^2),   Gamma = alpha * beta,

which also covers the point masses at angle 0 (Gamma = 1) and angle pi
(Gamma = -1).  Square roots of H^2-type quantities are taken as the
principal branch of a single quotient: since H has positive real part,
arg(H^2) stays in (-pi, pi) and the principal branch is exact, no
quadrant bookkeeping is needed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalHealthError, ValidationError
from .measures import CircleMeasure, MomentSequence, TraceParams
from .moments import _series_mul, _series_sqrt, stationary_moments


@dataclass(frozen=True)
class HerglotzEvaluator:
    """Evaluation handle for H(t, .) in one of four forms.

    kind:
      * "series": truncated moment series at a fixed time; reliable for
        |z| <= r_max with tail bound 2 |z|^(N+1) / (1 - |z|).
      * "stationary": closed-form limit law for given trace parameters.
      * "free": initial data a free pair; same closed form as the
        stationary law, of which it is the fixed point.
      * "classical": commuting independent pair, or a point mass, with
        cross coefficient Gamma stored in `cross`.
    """

    kind: str
    params: TraceParams = None
    moments: MomentSequence = None
    cross: float = None
    r_max: float = 0.9

    def __post_init__(self):
        if self.kind not in ("series", "stationary", "free", "classical"):
            raise ValidationError("unknown evaluator kind %r" % (self.kind,))
        if self.kind == "series" and self.moments is None:
            raise ValidationError("series evaluator needs a moment sequence")
        if self.kind in ("stationary", "free") and self.params is None:
            raise ValidationError("%s evaluator needs trace parameters" % self.kind)
        if self.kind == "classical" and self.cross is None:
            raise ValidationError("classical evaluator needs a cross coefficient")

    def __call__(self, z):
        return herglotz_eval(self, z)


def series_evaluator(seq, r_max=0.9):
    return HerglotzEvaluator("series", moments=seq, r_max=r_max)


def stationary_evaluator(params):
    return HerglotzEvaluator("stationary", params=params)


def free_evaluator(params):
    return HerglotzEvaluator("free", params=params)


def classical_evaluator(params):
    return HerglotzEvaluator("classical", params=params,
                             cross=params.alpha * params.beta)


def point_mass_zero():
    """Initial law delta at angle 0 (the equal pair S = R)."""
    return HerglotzEvaluator("classical", cross=1.0)


def point_mass_pi():
    """Initial law delta at angle pi (the opposite pair S = -R)."""
    return HerglotzEvaluator("classical", cross=-1.0)


def initial_moments(h, n_max):
    """Moment vector f_1..f_n_max encoded by an evaluator."""
    if h.kind == "series":
        f = h.moments.f
        if f.size < n_max:
            raise ValidationError("series evaluator holds only %d moments" % f.size)
        return f[:n_max].copy()
    if h.kind in ("stationary", "free"):
        return stationary_moments(h.params, n_max).f
    n = np.arange(1, n_max + 1)
    return np.where(n % 2 == 1, h.cross, 1.0)


def _as_complex_array(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def herglotz_eval(h, z):
    """Evaluate H at complex z (scalar or array), |z| < 1.

    Series evaluators additionally require |z| <= r_max; beyond that the
    truncation tail 2 |z|^(N+1) / (1 - |z|) is no longer negligible.
    """
    arr, scalar = _as_complex_array(z)
    if np.any(np.abs(arr) >= 1.0):
        raise ValidationError("Herglotz transform requires |z| < 1")
    if h.kind == "series":
        if np.any(np.abs(arr) > h.r_max + 1e-12):
            raise ValidationError(
                "series evaluator limited to |z| <= %.3g" % h.r_max)
        f = h.moments.f
        out = np.ones_like(arr)
        zp = np.ones_like(arr)
        for fn in f:
            zp = zp * arr
            out = out + 2.0 * fn * zp
    elif h.kind in ("stationary", "free"):
        alpha, beta = h.params.alpha, h.params.beta
        den = (1.0 - arr * arr) ** 2
        num = den + 4.0 * arr * (alpha * beta * (1.0 + arr) ** 2
                                 + (alpha - beta) ** 2 * arr)
        out = np.sqrt(num / den)
    else:
        out = (1.0 + 2.0 * h.cross * arr + arr * arr) / (1.0 - arr * arr)
    return complex(out) if scalar else out


def moebius_part(z, params):
    """W(z), the Herglotz transform of the stationary atom pair."""
    arr, scalar = _as_complex_array(z)
    out = (params.a * (1.0 - arr) / (1.0 + arr)
           + params.b * (1.0 + arr) / (1.0 - arr))
    return complex(out) if scalar else out


def _check_disk_no_poles(arr):
    if np.any(np.abs(arr) >= 1.0):
        raise ValidationError("transform requires |z| < 1")
    if np.any(np.abs(1.0 - arr) < 1e-12) or np.any(np.abs(1.0 + arr) < 1e-12):
        raise ValidationError("z = +-1 is a pole of the atom part")


def K_eval(h, z, params):
    """K = sqrt(H^2 - W^2), principal branch of the single quotient-free
    radicand; Re K >= 0 is asserted, never corrected."""
    arr, scalar = _as_complex_array(z)
    _check_disk_no_poles(arr)
    hv = herglotz_eval(h, arr)
    wv = moebius_part(arr, params)
    out = np.sqrt(hv * hv - wv * wv)
    if np.any(np.real(out) < -1e-10):
        raise NumericalHealthError(
            "Re K < 0 encountered, branch bookkeeping is broken")
    return complex(out) if scalar else out


def L_eval(h, z, params):
    """L = H - W; the identity K^2 = L (L + 2 W) is asserted to 1e-12."""
    arr, scalar = _as_complex_array(z)
    _check_disk_no_poles(arr)
    hv = herglotz_eval(h, arr)
    wv = moebius_part(arr, params)
    out = hv - wv
    ksq = hv * hv - wv * wv
    resid = np.abs(ksq - out * (out + 2.0 * wv))
    scale = np.maximum(1.0, np.abs(ksq))
    if np.any(resid > 1e-12 * scale):
        raise NumericalHealthError("K^2 = L(L + 2W) violated beyond roundoff")
    return complex(out) if scalar else out


def cauchy_eval(h, z, params):
    """Cauchy transform of the projection-pair law mu_t on C minus [0, 1].

    Built from the circle-side Herglotz transform through the conformal
    substitution zeta + 1/zeta = 4 z - 2, taking the root inside the unit
    disk; the accompanying square root sqrt(z^2 - z) is derived from the
    same root so the two stay on consistent branches.
    """
    arr, scalar = _as_complex_array(z)
    on_cut = (arr.imag == 0.0) & (arr.real >= 0.0) & (arr.real <= 1.0)
    if np.any(on_cut):
        raise DomainError("Cauchy transform evaluated on the cut [0, 1]")
    root = np.sqrt(arr * arr - arr)
    zeta = (2.0 * arr - 1.0) + 2.0 * root
    g = np.where(np.abs(zeta) <= 1.0, zeta, 1.0 / zeta)
    s = (1.0 / g - g) / 4.0  # consistent evaluation of sqrt(z^2 - z)
    hv = herglotz_eval(h, g)
    out = (1.0 / (2.0 * arr)
           + (params.alpha + params.beta) / (4.0 * arr * (arr - 1.0))
           + hv / (2.0 * s))
    return complex(out) if scalar else out


def stationary_arc_density(params, theta):
    """Density of the absolutely continuous part of the limit law.

    Supported on cos(theta) in [-r_plus, -r_minus] with

        rho(theta) = sqrt(Q(cos theta)) / (2 pi sin theta),
        Q(c) = 1 - alpha^2 - beta^2 - 2 alpha beta c - c^2
             = -(c + r_plus)(c + r_minus).
    """
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    q = (1.0 - params.alpha ** 2 - params.beta ** 2
         - 2.0 * params.alpha * params.beta * c - c * c)
    return np.sqrt(np.clip(q, 0.0, None)) / (2.0 * math.pi * np.sin(theta))


def stationary_decomposition(params, n_points=100001, grid=None):
    """Limit law as atoms plus sampled arc density.

    Atom b at angle 0, atom a at angle pi, and the arc density on the
    angular support.  With a default grid the measure integrates to 1
    within quadrature tolerance.  When an arc edge sits at angle 0 or pi
    (|alpha| = |beta|) the density stays finite there and the grid is
    extended to within 1e-9 of the endpoint to avoid losing mass.
    """
    empty = np.zeros(0)
    if params.r_plus - params.r_minus < 1e-15:
        # zero-width arc: |alpha| = 1 or |beta| = 1, purely atomic limit
        return CircleMeasure(params.b, params.a, empty, empty)
    if grid is None:
        t_lo = math.acos(-params.r_minus)
        t_hi = math.acos(-params.r_plus)
        h = (t_hi - t_lo) / (n_points + 1)
        lo = t_lo + h if t_lo > 1e-7 else 1e-9
        hi = t_hi - h if t_hi < math.pi - 1e-7 else math.pi - 1e-9
        grid = np.linspace(lo, hi, n_points)
    return CircleMeasure(params.b, params.a, grid,
                         stationary_arc_density(params, grid))


def density_from_boundary(target, r=None, grid=None, n_points=2048):
    """Sampled density via the Poisson kernel at radius r < 1.

    target is an evaluator or any callable z -> transform value; the
    approximate density at angle theta is Re target(r e^(i theta)) / (2 pi).
    Atoms are not subtracted, they show up as near-angle spikes.
    """
    if r is None:
        if isinstance(target, HerglotzEvaluator) and target.kind == "series":
            r = min(0.9, target.r_max)
        else:
            r = 0.995
    if grid is None:
        grid = np.linspace(1e-3, math.pi - 1e-3, n_points)
    vals = target(r * np.exp(1j * grid))
    return grid, np.real(vals) / (2.0 * math.pi)


def regularized_taylor_coefficients(h, params, n_max):
    """Taylor coefficients of K(t, .) at 0, orders 0..n_max.

    These encode the t-dependent profile of the regularized transform;
    the order-zero coefficient sqrt(1 - (a + b)^2) is the total mass of
    the associated profile measure and is below 1 whenever atoms are
    present.
    """
    if params.a + params.b >= 1.0 - 1e-14:
        raise ValidationError(
            "K vanishes identically for a + b = 1, no profile to expand")
    f = initial_moments(h, n_max)
    hcoef = np.concatenate(([1.0], 2.0 * f))
    hsq = _series_mul(hcoef, hcoef)
    n = np.arange(1, n_max + 1)
    wcoef = np.concatenate(([params.a + params.b],
                            2.0 * (params.b + params.a * (-1.0) ** n)))
    wsq = _series_mul(wcoef, wcoef)
    return _series_sqrt(hsq - wsq)


def pde_source(params, z):
    """Closed form of the source R(z) in the transport equation
    dH/dt + (z/2) d(H^2)/dz = R(z)."""
    arr, scalar = _as_complex_array(z)
    alpha, beta = params.alpha, params.beta
    out = (2.0 * arr * (alpha * arr * arr + 2.0 * beta * arr + alpha)
           * (beta * arr * arr + 2.0 * alpha * arr + beta)
           / (1.0 - arr * arr) ** 3)
    return complex(out) if scalar else out


def pde_residual(traj, params, z_grid, t_grid):
    """Max transport-equation residual over z_grid at the given times.

    z-derivatives are exact (differentiated series); the time derivative
    is a central difference on the trajectory grid, so each requested t
    must be an interior stored time.  The residual is dominated by the
    O(dt^2) time difference.
    """
    z = np.asarray(z_grid, dtype=complex).ravel()
    n = traj.n_moments
    orders = np.arange(1, n + 1)
    powers = z[None, :] ** orders[:, None]
    powers_lower = z[None, :] ** (orders - 1)[:, None]
    dt = float(traj.times[1] - traj.times[0])
    worst = 0.0
    for t in np.atleast_1d(t_grid):
        i = traj.index_of(float(t))
        if i < 1 or i > len(traj.times) - 2:
            raise ValidationError("t = %r has no interior neighbours" % (t,))
        f = traj.values[i]
        hv = 1.0 + 2.0 * (f @ powers)
        dhz = 2.0 * ((orders * f) @ powers_lower)
        dht = ((traj.values[i + 1] - traj.values[i - 1]) @ powers) / dt
        resid = np.abs(dht + z * hv * dhz - pde_source(params, z))
        worst = max(worst, float(np.max(resid)))
    return worst


class STransformPipeline:
    """Independent reconstruction of the free/stationary law through the
    multiplicative machinery of the two symmetry laws.

    For a single symmetry with trace alpha the moment generating function
    is psi(z) = z (z + alpha) / (1 - z^2); its inverse chi solves the
    quadratic (1 + w) x^2 + alpha x - w = 0, and S(w) = chi(w) (1 + w) / w.
    Multiplying the two S-transforms and inverting back gives psi of the
    product law, solved here by Newton continuation on the resultant

        G(p) = [A + z^2 B - (alpha + beta z)^2]^2 - 4 z^2 A B,
        A = alpha^2 + 4 p,   B = beta^2 + 4 p,   p = psi (1 + psi),

    deflated by its universal root p = 0 (where both factors of the
    product equation vanish).  The remaining root must satisfy the
    sign-resolved product equation
    (-alpha + e1 sqrt(A)) (-beta + e2 sqrt(B)) = 4 z p on some branch
    pair, which _product_defect certifies; the active pair flips where A
    or B crosses zero.  The Herglotz transform follows as
    H = sqrt(1 + 4 p).

    This route shares no code with the closed form in herglotz_eval, so
    agreement between the two is a real consistency check.
    """

    def __init__(self, params):
        self.params = params
        self._sign_r = 1.0 if params.alpha >= 0.0 else -1.0
        self._sign_s = 1.0 if params.beta >= 0.0 else -1.0
        self._self_check()

    # single-symmetry building blocks

    def psi_r(self, z):
        z = np.asarray(z, dtype=float)
        return z * (z + self.params.alpha) / (1.0 - z * z)

    def psi_s(self, z):
        z = np.asarray(z, dtype=float)
        return z * (z + self.params.beta) / (1.0 - z * z)

    def _chi(self, w, trace, sign):
        w = np.asarray(w, dtype=float)
        disc = trace * trace + 4.0 * w * (1.0 + w)
        if np.any(disc < -1e-14):
            raise DomainError("chi discriminant negative, w outside range")
        return (-trace + sign * np.sqrt(np.clip(disc, 0.0, None))) / (2.0 * (1.0 + w))

    def chi_r(self, w):
        return self._chi(w, self.params.alpha, self._sign_r)

    def chi_s(self, w):
        return self._chi(w, self.params.beta, self._sign_s)

    def s_r(self, w):
        w = np.asarray(w, dtype=float)
        return self.chi_r(w) * (1.0 + w) / w

    def s_s(self, w):
        w = np.asarray(w, dtype=float)
        return self.chi_s(w) * (1.0 + w) / w

    def s_product(self, w):
        return self.s_r(w) * self.s_s(w)

    @staticmethod
    def _branch_cap(trace):
        # for a negative trace psi is not injective on (0, 1): chi is the
        # branch through 0 and inverts psi only below the critical point
        # where psi' vanishes (discriminant zero)
        if trace >= 0.0:
            return 0.9
        w_min = 0.5 * (math.sqrt(1.0 - trace * trace) - 1.0)
        return -trace / (2.0 * (1.0 + w_min))

    def _self_check(self):
        # chi must invert psi, and S(0+) must match 1/mean when mean != 0
        zg = np.linspace(0.05, 0.8, 6)
        zr = zg * self._branch_cap(self.params.alpha)
        if np.max(np.abs(self.chi_r(self.psi_r(zr)) - zr)) > 1e-10:
            raise NumericalHealthError("chi_r does not invert psi_r")
        zs = zg * self._branch_cap(self.params.beta)
        if np.max(np.abs(self.chi_s(self.psi_s(zs)) - zs)) > 1e-10:
            raise NumericalHealthError("chi_s does not invert psi_s")
        w0 = 1e-6
        if abs(self.params.alpha) > 1e-8:
            # S(w) tau = 1 + w (1 - 1 / tau^2) + O(w^2), so the probe at
            # w0 carries an O(w0 / tau^2) curvature term
            tol = 1e-4 + 4.0 * w0 / self.params.alpha ** 2
            if abs(self.s_r(w0) * self.params.alpha - 1.0) > tol:
                raise NumericalHealthError("S_r(0+) != 1/tau(R)")
        if abs(self.params.beta) > 1e-8:
            tol = 1e-4 + 4.0 * w0 / self.params.beta ** 2
            if abs(self.s_s(w0) * self.params.beta - 1.0) > tol:
                raise NumericalHealthError("S_s(0+) != 1/tau(S)")

    # product law via Newton continuation

    def _poly(self, p, z):
        # G always has the spurious root p = 0 (both factors of the
        # product equation vanish there), so Newton runs on the quotient
        # G / p.  The division is exact: writing head = 4 (1 + z^2) p + h0
        # with h0 = alpha^2 + z^2 beta^2 - (alpha + beta z)^2 = -2 alpha
        # beta z, the constant terms h0^2 and 4 z^2 alpha^2 beta^2 cancel,
        # and the p^2 terms collapse through (1 + z^2)^2 - 4 z^2.
        alpha, beta = self.params.alpha, self.params.beta
        one = 1.0 + z * z
        h0 = -2.0 * alpha * beta * z
        g = (16.0 * one * one * p + 8.0 * one * h0 - 64.0 * z * z * p
             - 16.0 * z * z * (alpha * alpha + beta * beta))
        gp = 16.0 * one * one - 64.0 * z * z
        return g, gp

    def _product_defect(self, p, z):
        """Residual of the sign-resolved product equation at the root.

        The active sign pair starts at (sign alpha, sign beta) for small z
        and flips whenever A or B crosses zero (the two branches of the
        radical collide there), so the certificate takes the best pair.
        Inside a window A < 0 the radical is imaginary and the equation is
        checked in modulus: |−alpha + i sqrt(−A)| = 2 sqrt(−p), so
        |−beta + e v| must equal 2 |z| sqrt(−p).  A and B cannot both be
        negative at a real root (that would force |z| = 1).
        """
        alpha, beta = self.params.alpha, self.params.beta
        aa = alpha * alpha + 4.0 * p
        bb = beta * beta + 4.0 * p
        if aa >= 0.0 and bb >= 0.0:
            u = math.sqrt(aa)
            v = math.sqrt(bb)
            return min(abs((-alpha + e1 * u) * (-beta + e2 * v) - 4.0 * z * p)
                       for e1 in (1.0, -1.0) for e2 in (1.0, -1.0))
        if aa < 0.0 and bb >= 0.0:
            v = math.sqrt(bb)
            return min(abs(2.0 * math.sqrt(-p) * abs(-beta + e2 * v)
                           - 4.0 * abs(z * p)) for e2 in (1.0, -1.0))
        if bb < 0.0 and aa >= 0.0:
            u = math.sqrt(aa)
            return min(abs(2.0 * math.sqrt(-p) * abs(-alpha + e1 * u)
                           - 4.0 * abs(z * p)) for e1 in (1.0, -1.0))
        return math.inf

    def _psi_at(self, z, rungs):
        if z == 0.0:
            return 0.0
        ladder = np.linspace(z / rungs, z, rungs)
        p = self.params.alpha * self.params.beta * ladder[0]
        for zi in ladder:
            for _ in range(80):
                g, gp = self._poly(p, zi)
                if gp == 0.0:
                    p += 1e-12
                    continue
                step = g / gp
                p -= step
                if abs(step) <= 1e-15 * (1.0 + abs(p)):
                    break
        g, gp = self._poly(p, z)
        if abs(g) > 1e-10 * abs(gp) * (1.0 + abs(p)):
            raise NumericalHealthError(
                "Newton did not reach a root of the resultant at z = %r" % (z,))
        scale = 1e-8 * (1.0 + abs(4.0 * z * p))
        if self._product_defect(p, z) > scale:
            raise NumericalHealthError(
                "product equation not satisfied at z = %r" % (z,))
        return p

    def phi(self, z):
        """p = psi (1 + psi) of the product law, real z in (-1, 1)."""
        arr = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(np.abs(arr) >= 1.0):
            raise ValidationError("pipeline defined for real |z| < 1")
        out = np.empty_like(arr)
        for i, zi in enumerate(arr):
            p = None
            for rungs in (8, 16, 32, 64):
                try:
                    p = self._psi_at(float(zi), rungs)
                    break
                except NumericalHealthError:
                    continue
            if p is None:
                raise NumericalHealthError(
                    "Newton continuation failed at z = %r" % (zi,))
            out[i] = p
        return out if np.ndim(z) else float(out[0])

    def herglotz(self, z):
        """H on real z through the S-transform route."""
        p = np.asarray(self.phi(z), dtype=float)
        rad = 1.0 + 4.0 * p
        if np.any(rad < 0.0):
            raise NumericalHealthError("1 + 4 psi(1 + psi) went negative")
        out = np.sqrt(rad)
        return out if np.ndim(z) else float(out)

    def to_evaluator(self):
        return free_evaluator(self.params)


def s_transform_pipeline(params):
    """Build the S-transform route for a free initial pair."""
    return STransformPipeline(params)
