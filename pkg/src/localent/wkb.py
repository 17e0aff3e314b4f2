"""Semiclassical two-particle machinery for a single-well relative potential.

For a bound state at energy E in a well V(r) with two classical turning
points r1 < r2, the piecewise WKB wavefunction is

    region 2 (allowed):   phi = 2A p^-1/2 sin(S(r)/hbar + pi/4)
    region 1 (r < r1):    phi = (-1)^n A |p|^-1/2 exp(-int_r^r1 |p|/hbar)
    region 3 (r > r2):    phi = A |p|^-1/2 exp(-int_r2^r |p|/hbar)

with S(r) = int_r^r2 p dr', p = sqrt(2m|E - V|) and n the node count. The
local concurrence for boxes (a, b) follows from the second log-derivative of
phi; in the forbidden regions it vanishes whenever the force does.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, ValidationError
from .states import ComRelState

__all__ = [
    "HarmonicPotential",
    "MorsePotential",
    "TanhWellPotential",
    "TabulatedPotential",
    "CustomPotential",
    "WkbProblem",
    "turning_points",
    "classical_momentum",
    "action_integral",
    "wkb_wavefunction",
    "wkb_concurrence",
    "wkb_state",
    "bohr_sommerfeld_energy",
]


# --------------------------------------------------------------------------- #
# potentials
# --------------------------------------------------------------------------- #

class HarmonicPotential:
    """V(r) = 1/2 k (r - c)^2."""

    def __init__(self, spring_constant, center=0.0):
        if spring_constant <= 0:
            raise ValidationError("spring constant must be positive")
        self.k = float(spring_constant)
        self.center = float(center)

    @classmethod
    def from_omega(cls, omega, mass, center=0.0):
        return cls(mass * omega * omega, center)

    def value(self, r):
        return 0.5 * self.k * (np.asarray(r) - self.center) ** 2

    def deriv(self, r):
        return self.k * (np.asarray(r) - self.center)

    def deriv2(self, r):
        return np.broadcast_to(self.k, np.shape(r)) if np.ndim(r) else self.k


class MorsePotential:
    """V(r) = D (1 - exp(-alpha (r - r_e)))^2."""

    def __init__(self, depth, alpha, r_e):
        if depth <= 0 or alpha <= 0:
            raise ValidationError("Morse depth and alpha must be positive")
        self.depth = float(depth)
        self.alpha = float(alpha)
        self.r_e = float(r_e)

    def value(self, r):
        u = 1.0 - np.exp(-self.alpha * (np.asarray(r) - self.r_e))
        return self.depth * u * u

    def deriv(self, r):
        e = np.exp(-self.alpha * (np.asarray(r) - self.r_e))
        return 2.0 * self.depth * self.alpha * e * (1.0 - e)

    def deriv2(self, r):
        e = np.exp(-self.alpha * (np.asarray(r) - self.r_e))
        return 2.0 * self.depth * self.alpha ** 2 * e * (2.0 * e - 1.0)


class TanhWellPotential:
    """Flat-bottomed well with tanh walls, V -> 0 far outside.

    V(r) = -V0/2 [tanh((r + w)/s) - tanh((r - w)/s)]
    """

    def __init__(self, depth, half_width, steepness):
        if depth <= 0 or half_width <= 0 or steepness <= 0:
            raise ValidationError("tanh-well parameters must be positive")
        self.depth = float(depth)
        self.half_width = float(half_width)
        self.steepness = float(steepness)

    def value(self, r):
        r = np.asarray(r)
        s = self.steepness
        return -0.5 * self.depth * (np.tanh((r + self.half_width) / s)
                                    - np.tanh((r - self.half_width) / s))

    def deriv(self, r):
        r = np.asarray(r)
        s = self.steepness
        sech2 = lambda u: 1.0 / np.cosh(u) ** 2
        return -0.5 * self.depth / s * (sech2((r + self.half_width) / s)
                                        - sech2((r - self.half_width) / s))

    def deriv2(self, r):
        r = np.asarray(r)
        s = self.steepness
        def d_sech2(u):
            return -2.0 * np.tanh(u) / np.cosh(u) ** 2
        return -0.5 * self.depth / s ** 2 * (d_sech2((r + self.half_width) / s)
                                             - d_sech2((r - self.half_width) / s))


class TabulatedPotential:
    """Cubic-spline interpolation of (r, V) samples."""

    def __init__(self, r_samples, v_samples):
        from scipy.interpolate import CubicSpline
        r_samples = np.asarray(r_samples, dtype=float)
        v_samples = np.asarray(v_samples, dtype=float)
        if r_samples.size < 4:
            raise ValidationError("tabulated potential needs at least 4 samples")
        self._spline = CubicSpline(r_samples, v_samples)
        self.r_min = float(r_samples[0])
        self.r_max = float(r_samples[-1])

    def value(self, r):
        return self._spline(np.asarray(r))

    def deriv(self, r):
        return self._spline(np.asarray(r), 1)

    def deriv2(self, r):
        return self._spline(np.asarray(r), 2)


class CustomPotential:
    """Potential from user callables (value, first and second derivative)."""

    def __init__(self, value, deriv, deriv2):
        self._v, self._d1, self._d2 = value, deriv, deriv2

    def value(self, r):
        return self._v(np.asarray(r))

    def deriv(self, r):
        return self._d1(np.asarray(r))

    def deriv2(self, r):
        return self._d2(np.asarray(r))


# --------------------------------------------------------------------------- #
# problem setup
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class WkbProblem:
    """A bound-state problem: potential, energy, (reduced) mass and domain.

    The domain must bracket exactly two classical turning points at the
    given energy (single-well assumption).
    """

    potential: object
    energy: float
    mass: float
    hbar: float = 1.0
    domain: tuple = (-10.0, 10.0)

    def __post_init__(self):
        if self.mass <= 0 or self.hbar <= 0:
            raise ValidationError("mass and hbar must be positive")
        if self.domain[1] <= self.domain[0]:
            raise ValidationError("empty domain")


@lru_cache(maxsize=512)
def turning_points(problem, scan_points=1024):
    """The two roots of V(r) = E, by bracketing scan plus bisection."""
    lo, hi = problem.domain
    grid = np.linspace(lo, hi, scan_points + 1)
    diff = problem.energy - np.asarray(problem.potential.value(grid))
    sign = np.sign(diff)
    crossings = []
    for k in range(sign.size - 1):
        if sign[k] == 0.0:
            crossings.append(grid[k])
        elif sign[k] * sign[k + 1] < 0:
            root = brentq(lambda r: problem.energy - problem.potential.value(r),
                          grid[k], grid[k + 1], xtol=1e-12)
            crossings.append(root)
    if len(crossings) != 2:
        raise ValidationError(
            f"expected exactly two turning points in the domain, found {len(crossings)}")
    return float(crossings[0]), float(crossings[1])


def classical_momentum(problem, r):
    """sqrt(2m|E - V(r)|): the classical momentum (allowed region) or the
    decay rate magnitude on the inverted surface (forbidden regions)."""
    v = problem.potential.value(r)
    return np.sqrt(2.0 * problem.mass * np.abs(problem.energy - v))


def _p_region2(problem, r):
    return np.sqrt(2.0 * problem.mass * (problem.energy - problem.potential.value(r)))


def _q_forbidden(problem, r):
    return np.sqrt(2.0 * problem.mass * (problem.potential.value(r) - problem.energy))


def action_integral(problem, r_lo, r_hi, singular="auto", rtol=1e-10):
    """integral of |p| over [r_lo, r_hi] within one region.

    Turning-point endpoints are handled with the substitution u^2 = |r - rt|,
    which removes the square-root derivative singularity.
    """
    if r_hi < r_lo:
        raise ValidationError("action integral needs r_lo <= r_hi")
    if r_hi == r_lo:
        return 0.0
    r1, r2 = turning_points(problem)

    def p_abs(r):
        return classical_momentum(problem, r)

    sing_lo = singular in ("lo", "both") if singular != "auto" else (
        min(abs(r_lo - r1), abs(r_lo - r2)) < 1e-9)
    sing_hi = singular in ("hi", "both") if singular != "auto" else (
        min(abs(r_hi - r1), abs(r_hi - r2)) < 1e-9)

    if sing_hi and not sing_lo:
        span = r_hi - r_lo
        val, _ = quad(lambda u: 2.0 * u * p_abs(r_hi - u * u),
                      0.0, math.sqrt(span), epsabs=1e-13, epsrel=rtol, limit=200)
    elif sing_lo and not sing_hi:
        span = r_hi - r_lo
        val, _ = quad(lambda u: 2.0 * u * p_abs(r_lo + u * u),
                      0.0, math.sqrt(span), epsabs=1e-13, epsrel=rtol, limit=200)
    elif sing_lo and sing_hi:
        mid = 0.5 * (r_lo + r_hi)
        return (action_integral(problem, r_lo, mid, singular="lo", rtol=rtol)
                + action_integral(problem, mid, r_hi, singular="hi", rtol=rtol))
    else:
        val, _ = quad(p_abs, r_lo, r_hi, epsabs=1e-13, epsrel=rtol, limit=200)
    return float(val)


def classify_region(problem, r):
    r1, r2 = turning_points(problem)
    if r < r1:
        return 1
    if r > r2:
        return 3
    return 2


def turning_point_exclusion(problem, r_t):
    """Airy-length exclusion radius around a turning point."""
    vp = abs(float(problem.potential.deriv(r_t)))
    if vp == 0.0:
        raise ValidationError("flat potential at a turning point")
    return 10.0 * (problem.hbar ** 2 / (problem.mass * vp)) ** (1.0 / 3.0)


def _check_exclusion(problem, r, r1, r2):
    for r_t in (r1, r2):
        if abs(r - r_t) < turning_point_exclusion(problem, r_t):
            raise DomainError(
                f"r={r:g} lies inside the turning-point exclusion zone at {r_t:g}")


def phase(problem, r, r2=None):
    """Region-2 phase Theta(r) = action(r -> r2)/hbar + pi/4."""
    if r2 is None:
        _, r2 = turning_points(problem)
    return action_integral(problem, r, r2, singular="hi") / problem.hbar + math.pi / 4.0


@lru_cache(maxsize=512)
def node_count(problem):
    """Number of region-2 nodes: floor(Theta(r1)/pi)."""
    r1, r2 = turning_points(problem)
    return int(math.floor(phase(problem, r1, r2) / math.pi))


@lru_cache(maxsize=512)
def normalization(problem):
    """A with the region-2 semiclassical norm 2 A^2 int dr/p = 1."""
    r1, r2 = turning_points(problem)

    def inv_p_end(r_t, other, sign):
        # int 1/p near a turning point via u^2 = |r - r_t|
        span = 0.25 * (r2 - r1)
        val, _ = quad(lambda u: 2.0 * u / _p_region2(problem, r_t + sign * u * u),
                      0.0, math.sqrt(span), epsabs=1e-13, epsrel=1e-10, limit=200)
        return val

    lo_part = inv_p_end(r1, r2, +1.0)
    hi_part = inv_p_end(r2, r1, -1.0)
    mid_lo = r1 + 0.25 * (r2 - r1)
    mid_hi = r2 - 0.25 * (r2 - r1)
    mid, _ = quad(lambda r: 1.0 / _p_region2(problem, r), mid_lo, mid_hi,
                  epsabs=1e-13, epsrel=1e-10, limit=200)
    inv_p_total = lo_part + hi_part + mid
    return 1.0 / math.sqrt(2.0 * inv_p_total)


def _log_derivs(problem, r, r1, r2):
    """(phi, dlog phi, d2log phi) at r, region-wise, with shared norm A."""
    hbar = problem.hbar
    m = problem.mass
    region = 1 if r < r1 else (3 if r > r2 else 2)
    a_norm = normalization(problem)
    if region == 2:
        p = float(_p_region2(problem, r))
        vp = float(problem.potential.deriv(r))
        vpp = float(problem.potential.deriv2(r))
        p1 = -m * vp / p
        p2 = -m * vpp / p - (m * vp) ** 2 / p ** 3
        theta = phase(problem, r, r2)
        value = 2.0 * a_norm * math.sin(theta) / math.sqrt(p)
        cot = math.cos(theta) / math.sin(theta)
        csc2 = 1.0 / math.sin(theta) ** 2
        l1 = -0.5 * p1 / p - cot * p / hbar
        l2 = -0.5 * (p2 / p - (p1 / p) ** 2) - csc2 * p * p / hbar ** 2 - cot * p1 / hbar
        return value, l1, l2, region
    q = float(_q_forbidden(problem, r))
    vp = float(problem.potential.deriv(r))
    vpp = float(problem.potential.deriv2(r))
    q1 = m * vp / q
    q2 = m * vpp / q - (m * vp) ** 2 / q ** 3
    if region == 1:
        w = action_integral(problem, r, r1, singular="hi") / hbar
        sign = (-1.0) ** node_count(problem)
        value = sign * a_norm * math.exp(-w) / math.sqrt(q)
        l1 = -0.5 * q1 / q + q / hbar
        l2 = -0.5 * (q2 / q - (q1 / q) ** 2) + q1 / hbar
    else:
        w = action_integral(problem, r2, r, singular="lo") / hbar
        value = a_norm * math.exp(-w) / math.sqrt(q)
        l1 = -0.5 * q1 / q - q / hbar
        l2 = -0.5 * (q2 / q - (q1 / q) ** 2) - q1 / hbar
    return value, l1, l2, region


def wkb_wavefunction(problem, r):
    """(amplitude, region tag) of the piecewise WKB wavefunction."""
    r1, r2 = turning_points(problem)
    _check_exclusion(problem, r, r1, r2)
    value, _, _, region = _log_derivs(problem, r, r1, r2)
    return value, region


def wkb_wavefunction_derivs(problem, r):
    """(phi, phi', phi'') assembled from the region-wise log-derivatives."""
    r1, r2 = turning_points(problem)
    _check_exclusion(problem, r, r1, r2)
    value, l1, l2, _ = _log_derivs(problem, r, r1, r2)
    return value, value * l1, value * (l1 * l1 + l2)


def wkb_concurrence(problem, r, a, b):
    """Local concurrence of the WKB state for boxes (a, b), region-wise.

    In the allowed region:
      C2 = |ab/(3 hbar^2 p^2)| |2 csc^2(Theta) p^4 + hbar^2 p p''
            - hbar^2 p'^2 + 2 hbar cot(Theta) p^2 p'|
    and in the forbidden regions (q = |p|):
      C1 = |ab/(3 hbar q^2)| |2 q^2 q' + hbar q'^2 - hbar q q''|
      C3 = |ab/(3 hbar q^2)| |2 q^2 q' - hbar q'^2 + hbar q q''|
    """
    r1, r2 = turning_points(problem)
    _check_exclusion(problem, r, r1, r2)
    hbar = problem.hbar
    m = problem.mass
    region = 1 if r < r1 else (3 if r > r2 else 2)
    vp = float(problem.potential.deriv(r))
    vpp = float(problem.potential.deriv2(r))
    if region == 2:
        p = float(_p_region2(problem, r))
        p1 = -m * vp / p
        p2 = -m * vpp / p - (m * vp) ** 2 / p ** 3
        theta = phase(problem, r, r2)
        csc2 = 1.0 / math.sin(theta) ** 2
        cot = math.cos(theta) / math.sin(theta)
        val = (a * b / (3.0 * hbar ** 2 * p ** 2)) * (
            2.0 * csc2 * p ** 4 + hbar ** 2 * p * p2
            - hbar ** 2 * p1 ** 2 + 2.0 * hbar * cot * p ** 2 * p1)
        return abs(val)
    q = float(_q_forbidden(problem, r))
    q1 = m * vp / q
    q2 = m * vpp / q - (m * vp) ** 2 / q ** 3
    if region == 1:
        val = (-a * b / (3.0 * hbar * q ** 2)) * (
            2.0 * q ** 2 * q1 + hbar * q1 ** 2 - hbar * q * q2)
    else:
        val = (a * b / (3.0 * hbar * q ** 2)) * (
            2.0 * q ** 2 * q1 - hbar * q1 ** 2 + hbar * q * q2)
    return abs(val)


def bohr_sommerfeld_energy(potential, mass, level, bracket, hbar=1.0,
                           domain=(-50.0, 50.0)):
    """Energy with int_{r1}^{r2} p dr = (n + 1/2) pi hbar, via root finding."""
    if level < 0:
        raise ValidationError("level must be non-negative")
    target = (level + 0.5) * math.pi * hbar

    def mismatch(energy):
        prob = WkbProblem(potential, energy, mass, hbar, domain)
        r1, r2 = turning_points(prob)
        return action_integral(prob, r1, r2, singular="both") - target

    return float(brentq(mismatch, bracket[0], bracket[1], xtol=1e-12))


# --------------------------------------------------------------------------- #
# wrapped bipartite state
# --------------------------------------------------------------------------- #

class WkbRelativePart:
    """1-D relative part backed by the piecewise WKB wavefunction.

    Supports derivatives to order 2 (enough for the leading entanglement
    quantities); COM motion is a plane wave, contributing nothing.
    """

    dim = 1
    normalized = False

    def __init__(self, problem):
        self.problem = problem
        self.r1, self.r2 = turning_points(problem)
        p_max = float(_p_region2(problem,
                                 0.5 * (self.r1 + self.r2)))
        self._char = problem.hbar / p_max

    @property
    def char_lengths(self):
        return np.array([self._char])

    def check_point(self, x):
        r = np.atleast_1d(np.asarray(x, dtype=float))[..., 0]
        for val in np.atleast_1d(r).ravel():
            _check_exclusion(self.problem, float(val), self.r1, self.r2)

    def max_order(self):
        return 2

    def value(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x[..., 0]).ravel()
        vals = np.array([_log_derivs(self.problem, float(r), self.r1, self.r2)[0]
                         for r in flat], dtype=complex)
        return vals.reshape(np.shape(x[..., 0])) if x.ndim > 1 else vals[0]

    def derivative(self, x, orders):
        k = orders[0]
        if k > 2:
            from .errors import UnsupportedOrderError
            raise UnsupportedOrderError("WKB states support derivatives to order 2")
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x[..., 0]).ravel()
        out = np.empty(flat.shape, dtype=complex)
        for idx, r in enumerate(flat):
            value, l1, l2, _ = _log_derivs(self.problem, float(r), self.r1, self.r2)
            out[idx] = (value, value * l1, value * (l1 * l1 + l2))[k]
        return out.reshape(np.shape(x[..., 0])) if x.ndim > 1 else out[0]

    def log_hessian(self, x):
        value, l1, l2, _ = _log_derivs(self.problem, float(np.asarray(x).ravel()[0]),
                                       self.r1, self.r2)
        return np.array([[-l2]], dtype=complex)

    def is_real(self):
        return True


def wkb_state(problem, mass_a=None, mass_b=None):
    """Bipartite state phi_wkb(q_A - q_B) with plane-wave (ignored) COM.

    Default masses give a reduced mass equal to the problem's mass.
    """
    if mass_a is None:
        mass_a = 2.0 * problem.mass
    if mass_b is None:
        mass_b = 2.0 * problem.mass
    mu = mass_a * mass_b / (mass_a + mass_b)
    if not math.isclose(mu, problem.mass, rel_tol=1e-9):
        raise ValidationError("particle masses must reproduce the problem's reduced mass")
    return ComRelState(WkbRelativePart(problem), None, mass_a, mass_b, problem.hbar)
