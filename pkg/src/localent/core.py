"""Closed-form local-entanglement quantities for filtered pure states.

After both parties filter their particles into small axis-aligned boxes
(half-widths a_i, b_j) around a reference point, the discarding-ensemble
reduced density matrix carries a subleading spectral weight

    eps = sum_ij (a_i b_j / (3 |psi|^2))^2
          |psi d2psi/dq_Ai dq_Bj - dpsi/dq_Ai dpsi/dq_Bj|^2 ,

from which the entanglement entropy h(eps), the concurrence C = 2 sqrt(eps)
and the negativity N = sqrt(eps) follow. The module also evaluates the
fourth-order correction eigenvalue (lambda3), the Alice-only variant, and
the validity / node-cutoff classification that keeps the small-box expansion
honest near wavefunction zeros.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _quad
from .derivatives import build_jet
from .errors import QuadratureError, UnsupportedOrderError, ValidationError
from .states import ConfigPoint, MultiIndex

__all__ = [
    "MeasurementRegion",
    "Validity",
    "ValidityInfo",
    "EntanglementReport",
    "AliceOnlyResult",
    "binary_entropy",
    "epsilon_pair_matrix",
    "epsilon_joint",
    "epsilon_alice_only",
    "lambda3_joint",
    "concurrence_from_log_state",
    "validity_and_cutoff",
    "report",
]


# --------------------------------------------------------------------------- #
# region and report types
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class MeasurementRegion:
    """Axis-aligned filtering boxes around a reference configuration point.

    `half_widths_b` may be empty for measurements on Alice's particle only.
    """

    center: ConfigPoint
    half_widths_a: np.ndarray
    half_widths_b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        wa = np.atleast_1d(np.asarray(self.half_widths_a, dtype=float))
        wb = np.asarray(self.half_widths_b, dtype=float).reshape(-1)
        if wa.size != self.center.dim_a:
            raise ValidationError("half_widths_a must match the center's dim_A")
        if wb.size not in (0, self.center.dim_b):
            raise ValidationError("half_widths_b must be empty or match dim_B")
        if np.any(wa <= 0) or np.any(wb <= 0):
            raise ValidationError("half-widths must be positive")
        object.__setattr__(self, "half_widths_a", wa)
        object.__setattr__(self, "half_widths_b", wb)

    @property
    def alice_only(self):
        return self.half_widths_b.size == 0

    def scaled(self, factor):
        """Same center, all half-widths multiplied by `factor`."""
        wb = self.half_widths_b * factor if not self.alice_only else self.half_widths_b
        return MeasurementRegion(self.center, self.half_widths_a * factor, wb)

    def with_widths(self, half_widths_a=None, half_widths_b=None):
        return MeasurementRegion(
            self.center,
            self.half_widths_a if half_widths_a is None else half_widths_a,
            self.half_widths_b if half_widths_b is None else half_widths_b)


class Validity(enum.Enum):
    VALID = "valid"
    NEAR_NODE_CUTOFF = "near_node_cutoff"
    INVALID_REGION_TOO_LARGE = "invalid_region_too_large"


@dataclass(frozen=True)
class ValidityInfo:
    status: Validity
    a_max: np.ndarray
    b_max: np.ndarray
    epsilon_max: float


@dataclass(frozen=True)
class EntanglementReport:
    """All local-entanglement quantities at one reference point."""

    epsilon: float
    epsilon_raw: float
    lambda3: float | None
    entropy_d: float
    concurrence: float
    negativity: float
    per_pair_concurrence: np.ndarray
    validity: Validity
    sigma_used: float
    p_ab: float | None = None
    entropy_nd: float | None = None

    def to_dict(self):
        d = {
            "epsilon": self.epsilon,
            "epsilon_raw": self.epsilon_raw,
            "lambda3": self.lambda3,
            "E_D": self.entropy_d,
            "concurrence": self.concurrence,
            "negativity": self.negativity,
            "per_pair_concurrence": np.asarray(self.per_pair_concurrence).tolist(),
            "validity": self.validity.value,
            "sigma": self.sigma_used,
            "p_ab": self.p_ab,
            "E_ND": self.entropy_nd,
        }
        return d


@dataclass(frozen=True)
class AliceOnlyResult:
    lambda1: float
    lambda2: float
    lambda3: float
    per_axis_lambda1: np.ndarray
    per_axis_lambda3: np.ndarray


# --------------------------------------------------------------------------- #
# scalar helpers
# --------------------------------------------------------------------------- #

def binary_entropy(eps):
    """h(eps) = -eps log2 eps - (1-eps) log2 (1-eps), h(0) = h(1) = 0."""
    eps = float(eps)
    if eps < 0.0 or eps > 1.0:
        raise ValidationError(f"binary_entropy argument {eps} outside [0, 1]")
    if eps == 0.0 or eps == 1.0:
        return 0.0
    return -(eps * math.log2(eps) + (1.0 - eps) * math.log2(1.0 - eps))


def _require_joint(state, region):
    if region.alice_only:
        raise ValidationError("operation needs both parties' half-widths")
    _check_region(state, region)


def _check_region(state, region):
    if region.center.dim_a != state.dim_a or region.center.dim_b != state.dim_b:
        raise ValidationError("region dimensions do not match the state")


# --------------------------------------------------------------------------- #
# joint-measurement epsilon (three equivalent computation paths)
# --------------------------------------------------------------------------- #

def _pair_epsilon_from_jet(jet, a, b, method):
    psi = jet[(0, 0)]
    psi_a = jet[(1, 0)]
    psi_b = jet[(0, 1)]
    psi_ab = jet[(1, 1)]
    rho0 = (psi * np.conjugate(psi)).real
    if method == "bracket":
        bracket = psi * psi_ab - psi_a * psi_b
        return (a * b) ** 2 * abs(bracket) ** 2 / (9.0 * rho0 ** 2)
    if method == "log":
        s_ab = -(psi * psi_ab - psi_a * psi_b) / (psi * psi)
        return (a * b) ** 2 * abs(s_ab) ** 2 / 9.0
    def rho(n1, n2, n3, n4):
        return jet[(n1, n3)] * np.conjugate(jet[(n2, n4)])
    if method == "product":
        num = (rho(1, 1, 0, 0) * rho(0, 0, 1, 1) + rho(0, 0, 0, 0) * rho(1, 1, 1, 1)
               - rho(1, 0, 0, 0) * rho(0, 1, 1, 1) - rho(0, 1, 0, 0) * rho(1, 0, 1, 1))
        return (a * b) ** 2 * num.real / (9.0 * rho0 ** 2)
    if method == "symmetric":
        num = (2 * rho(1, 1, 0, 0) * rho(0, 0, 1, 1) + 2 * rho(0, 0, 0, 0) * rho(1, 1, 1, 1)
               - rho(1, 0, 0, 0) * rho(0, 1, 1, 1) - rho(0, 1, 0, 0) * rho(1, 0, 1, 1)
               - rho(0, 0, 1, 0) * rho(1, 1, 0, 1) - rho(0, 0, 0, 1) * rho(1, 1, 1, 0))
        return (a * b) ** 2 * num.real / (18.0 * rho0 ** 2)
    raise ValidationError(f"unknown epsilon method {method!r}")


def epsilon_pair_matrix(state, region, method="bracket"):
    """Per-(i, j) contributions eps_ij; the total is their sum."""
    _require_joint(state, region)
    out = np.empty((state.dim_a, state.dim_b))
    for i in range(state.dim_a):
        for j in range(state.dim_b):
            jet = build_jet(state, region.center, i, j, max_order=1)
            out[i, j] = _pair_epsilon_from_jet(
                jet, region.half_widths_a[i], region.half_widths_b[j], method)
    return out


def epsilon_joint(state, region, method="bracket"):
    """Leading small-box entanglement parameter for joint filtering."""
    return float(np.sum(epsilon_pair_matrix(state, region, method)))


def concurrence_from_log_state(state, region):
    """(C, C_ij) from the mixed log-derivative: C_ij = (2 a_i b_j / 3)|S_ij''|.

    S = -log psi is never evaluated directly; its mixed second derivative is
    assembled from the jet by the quotient rule, so complex phases carry no
    branch ambiguity.
    """
    _require_joint(state, region)
    c_sq = np.empty((state.dim_a, state.dim_b))
    for i in range(state.dim_a):
        for j in range(state.dim_b):
            jet = build_jet(state, region.center, i, j, max_order=1)
            c_sq[i, j] = 4.0 * _pair_epsilon_from_jet(
                jet, region.half_widths_a[i], region.half_widths_b[j], "log")
    return math.sqrt(float(np.sum(c_sq))), np.sqrt(c_sq)


# --------------------------------------------------------------------------- #
# fourth-order correction eigenvalue (joint measurement)
# --------------------------------------------------------------------------- #

# Term tables for the third eigenvalue of the filtered reduced density
# matrix: each entry is (coefficient, idx1, idx2, idx3) with idx = (n1,n2,n3,n4)
# labelling rho partials. The overall scale constant was fixed against the
# brute-force Schmidt spectrum of discretized boxes (see tests).
_L3_NU_TERMS = (
    (+1, (0, 2, 1, 1), (1, 1, 2, 0), (2, 0, 0, 2)), (-1, (0, 1, 2, 0), (1, 2, 1, 1), (2, 0, 0, 2)),
    (-1, (0, 1, 1, 1), (1, 2, 2, 0), (2, 0, 0, 2)), (+1, (0, 2, 2, 0), (1, 1, 1, 1), (2, 0, 0, 2)),
    (+1, (0, 2, 0, 2), (1, 1, 2, 0), (2, 0, 1, 1)), (-1, (0, 1, 2, 0), (1, 2, 0, 2), (2, 0, 1, 1)),
    (-1, (0, 1, 0, 2), (1, 2, 2, 0), (2, 0, 1, 1)), (+1, (0, 2, 2, 0), (1, 1, 0, 2), (2, 0, 1, 1)),
    (-1, (0, 2, 2, 0), (1, 0, 1, 1), (2, 1, 0, 2)), (-1, (0, 2, 1, 1), (1, 0, 2, 0), (2, 1, 0, 2)),
    (+1, (0, 0, 2, 0), (1, 2, 1, 1), (2, 1, 0, 2)), (+1, (0, 0, 1, 1), (1, 2, 2, 0), (2, 1, 0, 2)),
    (-1, (0, 2, 2, 0), (1, 0, 0, 2), (2, 1, 1, 1)), (-1, (0, 2, 0, 2), (1, 0, 2, 0), (2, 1, 1, 1)),
    (+1, (0, 0, 2, 0), (1, 2, 0, 2), (2, 1, 1, 1)), (+1, (0, 0, 0, 2), (1, 2, 2, 0), (2, 1, 1, 1)),
    (-1, (0, 2, 1, 1), (1, 0, 0, 2), (2, 1, 2, 0)), (+1, (0, 0, 0, 2), (1, 2, 1, 1), (2, 1, 2, 0)),
    (+1, (0, 2, 1, 1), (1, 0, 0, 0), (2, 1, 2, 2)), (-1, (0, 0, 0, 0), (1, 2, 1, 1), (2, 1, 2, 2)),
    (+1, (0, 1, 2, 0), (1, 0, 1, 1), (2, 2, 0, 2)), (+1, (0, 1, 1, 1), (1, 0, 2, 0), (2, 2, 0, 2)),
    (-1, (0, 0, 2, 0), (1, 1, 1, 1), (2, 2, 0, 2)), (-1, (0, 0, 1, 1), (1, 1, 2, 0), (2, 2, 0, 2)),
    (+1, (0, 1, 2, 0), (1, 0, 0, 2), (2, 2, 1, 1)), (+1, (0, 1, 0, 2), (1, 0, 2, 0), (2, 2, 1, 1)),
    (-1, (0, 0, 2, 0), (1, 1, 0, 2), (2, 2, 1, 1)), (-1, (0, 0, 0, 2), (1, 1, 2, 0), (2, 2, 1, 1)),
    (+1, (0, 1, 1, 1), (1, 0, 0, 2), (2, 2, 2, 0)), (+1, (0, 1, 0, 2), (1, 0, 1, 1), (2, 2, 2, 0)),
    (-1, (0, 0, 1, 1), (1, 1, 0, 2), (2, 2, 2, 0)), (-1, (0, 0, 0, 2), (1, 1, 1, 1), (2, 2, 2, 0)),
    (-1, (0, 1, 1, 1), (1, 0, 0, 0), (2, 2, 2, 2)), (-1, (0, 1, 0, 0), (1, 0, 1, 1), (2, 2, 2, 2)),
    (+1, (0, 0, 1, 1), (1, 1, 0, 0), (2, 2, 2, 2)), (+1, (0, 0, 0, 0), (1, 1, 1, 1), (2, 2, 2, 2)),
)
_L3_DE_TERMS = (
    (+1, (0, 0, 0, 2), (0, 1, 0, 0), (1, 0, 0, 0)), (+2, (0, 0, 1, 1), (0, 1, 0, 0), (1, 0, 0, 0)),
    (+1, (0, 0, 2, 0), (0, 1, 0, 0), (1, 0, 0, 0)), (+1, (0, 0, 0, 0), (0, 1, 0, 2), (1, 0, 0, 0)),
    (+2, (0, 0, 0, 0), (0, 1, 1, 1), (1, 0, 0, 0)), (+1, (0, 0, 0, 0), (0, 1, 2, 0), (1, 0, 0, 0)),
    (+1, (0, 0, 0, 0), (0, 1, 0, 0), (1, 0, 0, 2)), (+2, (0, 0, 0, 0), (0, 1, 0, 0), (1, 0, 1, 1)),
    (+1, (0, 0, 0, 0), (0, 1, 0, 0), (1, 0, 2, 0)), (-2, (0, 0, 0, 0), (0, 0, 0, 2), (1, 1, 0, 0)),
    (-4, (0, 0, 0, 0), (0, 0, 1, 1), (1, 1, 0, 0)), (-2, (0, 0, 0, 0), (0, 0, 2, 0), (1, 1, 0, 0)),
    (-1, (0, 0, 0, 0), (0, 0, 0, 0), (1, 1, 0, 2)), (-2, (0, 0, 0, 0), (0, 0, 0, 0), (1, 1, 1, 1)),
    (-1, (0, 0, 0, 0), (0, 0, 0, 0), (1, 1, 2, 0)),
)
_L3_SCALE = -32.0 / 5.0
_CANCEL_RTOL = 1e-11


def _lambda3_pair(jet, a, b):
    """Third-eigenvalue contribution of one (i, j) pair, O(a^4 b^4).

    Returns (value, degenerate_flag); the flag marks pairs whose numerator
    and denominator both cancel (separable directions), which contribute 0.
    """
    def rho(idx):
        return jet[(idx[0], idx[2])] * np.conjugate(jet[(idx[1], idx[3])])

    nu = 0.0 + 0.0j
    nu_abs = 0.0
    for c, i1, i2, i3 in _L3_NU_TERMS:
        t = c * rho(i1) * rho(i2) * rho(i3)
        nu += t
        nu_abs += abs(t)
    nu /= 54.0
    nu_abs /= 54.0
    de = 0.0 + 0.0j
    de_abs = 0.0
    for c, i1, i2, i3 in _L3_DE_TERMS:
        t = c * rho(i1) * rho(i2) * rho(i3)
        de += t
        de_abs += abs(t)
    de *= 120.0
    de_abs *= 120.0
    if abs(de) <= _CANCEL_RTOL * de_abs:
        # fully cancelling denominator: separable direction (zero) unless the
        # numerator survives, which signals a node-degenerate point
        if abs(nu) <= math.sqrt(_CANCEL_RTOL) * nu_abs or nu_abs == 0.0:
            return 0.0, True
        return math.inf, True
    val = _L3_SCALE * (a ** 4) * (b ** 4) * (nu / de).real
    return val, False


def lambda3_joint(state, region):
    """Fourth-order correction eigenvalue, summed pairwise over (i, j).

    Needs jets to order 2 per side. Near-cancelling pairs contribute zero;
    tiny negative rounding residues are clamped so the result is >= 0.
    """
    _require_joint(state, region)
    total = 0.0
    for i in range(state.dim_a):
        for j in range(state.dim_b):
            jet = build_jet(state, region.center, i, j, max_order=2)
            val, _ = _lambda3_pair(jet, region.half_widths_a[i], region.half_widths_b[j])
            if math.isinf(val):
                return math.inf
            total += val
    return max(total, 0.0)


# --------------------------------------------------------------------------- #
# Alice-only measurement
# --------------------------------------------------------------------------- #

def _reduced_partials(state, center, axis, max_order, order, panels_per_length,
                      truncation_lengths):
    """Partials of Alice's pre-measurement reduced density matrix.

    rho^(A)_{n1 n2} for derivatives along `axis`, computed as the Bob-space
    integral of (d^{n1} psi)(d^{n2} psi)* over the truncated domain. The
    overall (arbitrary) normalization cancels in the eigenvalue formulas,
    which are homogeneous of degree zero.
    """
    axes = []
    for j in range(state.dim_b):
        length = truncation_lengths[j]
        lo = center.q_b[j] - 8.0 * length
        hi = center.q_b[j] + 8.0 * length
        breaks = _quad.uniform_panels(lo, hi, max(4, int(round(panels_per_length * 16))))
        axes.append(_quad.gl_panels(breaks, order))
    qb_pts, w = _quad.tensor_grid(axes)
    qa = np.broadcast_to(center.q_a, (qb_pts.shape[0], state.dim_a))

    derivs = []
    for n in range(max_order + 1):
        idx = MultiIndex.pair(axis, 0, n, 0, state.dim_a, state.dim_b)
        derivs.append(state.derivative_many(qa, qb_pts, idx))
    table = {}
    for n1 in range(max_order + 1):
        for n2 in range(max_order + 1):
            table[(n1, n2)] = np.sum(w * derivs[n1] * np.conjugate(derivs[n2]))
    return table


def epsilon_alice_only(state, region, order=24, panels_per_length=1.0,
                       check_convergence=True):
    """(lambda1, lambda2, lambda3) when only Alice filters her particle.

    lambda1 per axis uses the reduced-density-matrix bracket
    a_i^2/(3 rho^2) (rho rho_11 - rho_10 rho_01); lambda3 is the fourth-order
    eigenvalue, applied per axis and summed.
    """
    _check_region(state, region)
    if not region.alice_only:
        raise ValidationError("epsilon_alice_only takes a region with empty Bob widths")
    trunc = np.asarray(state.char_lengths_b, dtype=float)
    trunc = np.where(np.isfinite(trunc), trunc, 1.0)

    lam1_axis = np.empty(state.dim_a)
    lam3_axis = np.empty(state.dim_a)
    for i in range(state.dim_a):
        t = _reduced_partials(state, region.center, i, 2, order, panels_per_length, trunc)
        if check_convergence:
            t2 = _reduced_partials(state, region.center, i, 0, order + 8,
                                   panels_per_length, trunc)
            scale = abs(t2[(0, 0)])
            if abs(t[(0, 0)] - t2[(0, 0)]) > 1e-9 * scale:
                raise QuadratureError("Bob-space quadrature for the reduced density "
                                      "matrix did not converge")
        a = region.half_widths_a[i]
        rho0 = t[(0, 0)].real
        bracket = (t[(1, 1)] * rho0 - t[(1, 0)] * t[(0, 1)]).real
        lam1_axis[i] = a * a * bracket / (3.0 * rho0 * rho0)

        num = (t[(0, 2)] * t[(1, 1)] * t[(2, 0)] + t[(0, 1)] * t[(2, 2)] * t[(1, 0)]
               + t[(1, 2)] * t[(0, 0)] * t[(2, 1)] - t[(0, 1)] * t[(1, 2)] * t[(2, 0)]
               - t[(1, 0)] * t[(0, 2)] * t[(2, 1)] - t[(0, 0)] * t[(1, 1)] * t[(2, 2)])
        den = 45.0 * rho0 * (t[(0, 1)] * t[(1, 0)] - t[(1, 1)] * rho0)
        num_abs = sum(abs(x) for x in (
            t[(0, 2)] * t[(1, 1)] * t[(2, 0)], t[(0, 1)] * t[(2, 2)] * t[(1, 0)],
            t[(1, 2)] * t[(0, 0)] * t[(2, 1)], t[(0, 1)] * t[(1, 2)] * t[(2, 0)],
            t[(1, 0)] * t[(0, 2)] * t[(2, 1)], t[(0, 0)] * t[(1, 1)] * t[(2, 2)]))
        if abs(den) <= _CANCEL_RTOL * 45.0 * rho0 * (abs(t[(0, 1)] * t[(1, 0)]) + abs(t[(1, 1)]) * rho0) \
                or abs(num) <= _CANCEL_RTOL * num_abs:
            lam3_axis[i] = 0.0
        else:
            lam3_axis[i] = max((a ** 4 * num / den).real, 0.0)

    lam1 = float(np.sum(lam1_axis))
    return AliceOnlyResult(lam1, 1.0 - lam1, float(np.sum(lam3_axis)),
                           lam1_axis, lam3_axis)


# --------------------------------------------------------------------------- #
# validity domain and node cutoff
# --------------------------------------------------------------------------- #

def validity_and_cutoff(state, region, sigma=0.1):
    """Classify the region against the small-box validity domain.

    a_i^MAX = sigma |psi| / |dpsi/dq_Ai| (similarly for b); widths beyond
    these trigger the node cutoff, with eps capped at
    eps_MAX = dim_A dim_B sigma^4 / 9. Widths at or beyond the state's own
    characteristic lengths invalidate the Taylor expansion outright.
    """
    _check_region(state, region)
    if not 0.0 < sigma < 1.0:
        raise ValidationError("sigma must lie in (0, 1)")
    center = region.center
    psi0 = abs(state.evaluate(center))

    def width_limits(dim, side):
        out = np.empty(dim)
        for k in range(dim):
            if side == 0:
                idx = MultiIndex.pair(k, 0, 1, 0, state.dim_a, state.dim_b)
            else:
                idx = MultiIndex.pair(0, k, 0, 1, state.dim_a, state.dim_b)
            grad = abs(state.derivative(center, idx))
            out[k] = sigma * psi0 / grad if grad > 0.0 else math.inf
        return out

    a_max = width_limits(state.dim_a, 0)
    n_pairs = state.dim_a * state.dim_b
    eps_max = n_pairs * sigma ** 4 / 9.0
    if region.alice_only:
        b_max = np.zeros(0)
        node = bool(np.any(region.half_widths_a > a_max))
        too_large = bool(np.any(region.half_widths_a >= state.char_lengths_a))
    else:
        b_max = width_limits(state.dim_b, 1)
        node = bool(np.any(region.half_widths_a > a_max)
                    or np.any(region.half_widths_b > b_max))
        too_large = bool(np.any(region.half_widths_a >= state.char_lengths_a)
                         or np.any(region.half_widths_b >= state.char_lengths_b))
    if too_large:
        status = Validity.INVALID_REGION_TOO_LARGE
    elif node:
        status = Validity.NEAR_NODE_CUTOFF
    else:
        status = Validity.VALID
    return ValidityInfo(status, a_max, b_max, eps_max)


# --------------------------------------------------------------------------- #
# full report
# --------------------------------------------------------------------------- #

def report(state, region, sigma=0.1, with_probability=False,
           compute_lambda3=True, method="bracket"):
    """EntanglementReport for a joint measurement at one point.

    At node-cutoff points eps is capped at eps_MAX (and the per-pair
    concurrences at their uniform capped values); eps > 1/2 flags the region
    as too large for the two-level expansion. E_ND = p_ab E_D is filled when
    `with_probability` is set.
    """
    _require_joint(state, region)
    info = validity_and_cutoff(state, region, sigma)
    status = info.status
    psi0 = abs(state.evaluate(region.center))

    if psi0 > 0.0:
        pair_eps = epsilon_pair_matrix(state, region, method)
        eps_raw = float(np.sum(pair_eps))
    else:
        pair_eps = np.full((state.dim_a, state.dim_b), math.inf)
        eps_raw = math.inf

    eps = eps_raw
    if status is Validity.NEAR_NODE_CUTOFF and eps_raw > info.epsilon_max:
        eps = info.epsilon_max
    elif status is Validity.VALID and eps_raw > 0.5:
        status = Validity.INVALID_REGION_TOO_LARGE
    if not math.isfinite(eps):
        eps = info.epsilon_max
    if eps == eps_raw:
        per_pair_c = 2.0 * np.sqrt(pair_eps)
    else:
        # capped: spread uniformly so sum(C_ij^2) = 4 eps still holds
        n_pairs = state.dim_a * state.dim_b
        per_pair_c = np.full((state.dim_a, state.dim_b),
                             2.0 * math.sqrt(eps / n_pairs))

    h_arg = eps if eps <= 1.0 else 0.5
    entropy_d = binary_entropy(h_arg)
    concurrence = 2.0 * math.sqrt(eps)
    negativity = math.sqrt(eps)

    lam3 = None
    if compute_lambda3 and status is Validity.VALID:
        try:
            val = lambda3_joint(state, region)
            lam3 = val if math.isfinite(val) else None
        except UnsupportedOrderError:
            lam3 = None

    p_ab = None
    entropy_nd = None
    if with_probability:
        from .oracle import probability_mass
        p_ab = probability_mass(state, region)
        entropy_nd = p_ab * entropy_d

    return EntanglementReport(
        epsilon=eps, epsilon_raw=eps_raw, lambda3=lam3, entropy_d=entropy_d,
        concurrence=concurrence, negativity=negativity,
        per_pair_concurrence=per_pair_c, validity=status, sigma_used=sigma,
        p_ab=p_ab, entropy_nd=entropy_nd)
