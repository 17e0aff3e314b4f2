"""Brute-force validator for the closed-form entanglement expressions.

The discarding ensemble restricts the wavefunction to the measurement boxes;
its Schmidt spectrum is obtained from first definitions by discretizing the
boxes on tensor Gauss-Legendre grids, assembling the quadrature-weighted
amplitude matrix Phi[x_A, x_B] = sqrt(w_A) psi sqrt(w_B), and taking singular
values (equivalently, diagonalizing the reduced density matrix Phi Phi^+).
Working with Phi instead of Phi Phi^+ keeps eigenvalues as small as ~1e-24
resolvable, which the fourth-order checks need.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _quad
from .core import (MeasurementRegion, binary_entropy, epsilon_joint,
                   lambda3_joint)
from .errors import QuadratureError, ValidationError
from .states import ComRelState, ProductState

__all__ = [
    "DiscretizedRdm",
    "OracleSpectrum",
    "build_rdm",
    "spectrum",
    "probability_mass",
    "compare",
    "ComparisonReport",
]


# --------------------------------------------------------------------------- #
# discretized reduced density matrix
# --------------------------------------------------------------------------- #

@dataclass
class DiscretizedRdm:
    """Discretized discarding-ensemble RDM of Alice's particle.

    `factor` is the weighted amplitude matrix Phi with Phi Phi^+ equal to the
    unnormalized RDM; `matrix` materializes the trace-normalized Hermitian
    matrix on demand (kept lazy: it is O(n^2) memory and only the invariant
    tests need it).
    """

    grids: list
    weights_a: np.ndarray
    factor: np.ndarray
    trace_raw: float
    nodes_per_axis: int
    _matrix: np.ndarray = field(default=None, repr=False)

    @property
    def matrix(self):
        if self._matrix is None:
            m = self.factor @ self.factor.conj().T
            self._matrix = m / self.trace_raw
        return self._matrix

    @property
    def trace(self):
        return float(np.trace(self.matrix).real)


def _box_axes(centers, half_widths, nodes):
    return [_quad.gl_interval(c - w, c + w, nodes)
            for c, w in zip(centers, half_widths)]


def _truncated_axes(centers, lengths, nodes, span=8.0):
    axes = []
    for c, length in zip(centers, lengths):
        breaks = _quad.uniform_panels(c - span * length, c + span * length,
                                      max(8, int(2 * span)))
        axes.append(_quad.gl_panels(breaks, nodes))
    return axes


def build_rdm(state, region, nodes_per_axis=16):
    """Assemble the discretized RDM on the region's Alice box.

    Bob's coordinates are integrated over his measurement box (joint case) or
    over all space truncated at 8 characteristic lengths (Alice-only case).
    """
    if nodes_per_axis < 4:
        raise ValidationError("nodes_per_axis must be at least 4")
    center = region.center
    axes_a = _box_axes(center.q_a, region.half_widths_a, nodes_per_axis)
    if region.alice_only:
        lengths = np.asarray(state.char_lengths_b, dtype=float)
        lengths = np.where(np.isfinite(lengths), lengths, 1.0)
        axes_b = _truncated_axes(center.q_b, lengths, nodes_per_axis)
    else:
        axes_b = _box_axes(center.q_b, region.half_widths_b, nodes_per_axis)

    qa, wa = _quad.tensor_grid(axes_a)
    qb, wb = _quad.tensor_grid(axes_b)
    phi = state.amplitude_outer(qa, qb)
    if state.is_real():
        phi = np.ascontiguousarray(phi.real)
    phi *= np.sqrt(wa)[:, None]
    phi *= np.sqrt(wb)[None, :]
    trace_raw = float(np.sum(np.abs(phi) ** 2))
    if not (trace_raw > 0.0 and math.isfinite(trace_raw)):
        raise ValidationError("state vanishes (or diverges) on the whole region grid")
    return DiscretizedRdm([a[0] for a in axes_a], wa, phi, trace_raw, nodes_per_axis)


# --------------------------------------------------------------------------- #
# spectrum and derived measures
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class OracleSpectrum:
    """Leading RDM eigenvalues (descending) and measures built from them."""

    eigenvalues: np.ndarray
    entropy_bits: float
    concurrence: float
    negativity: float
    subleading_weight: float

    @property
    def lambda1(self):
        return float(self.eigenvalues[0])

    @property
    def lambda2(self):
        return float(self.eigenvalues[1]) if self.eigenvalues.size > 1 else 0.0

    @property
    def lambda3(self):
        return float(self.eigenvalues[2]) if self.eigenvalues.size > 2 else 0.0


def _measures(lam):
    lam = np.sort(np.asarray(lam))[::-1]
    lam = np.clip(lam, 0.0, None)
    pos = lam[lam > 0.0]
    entropy = float(-np.sum(pos * np.log2(pos)))
    c_sq = 0.0
    negativity = 0.0
    for m in range(lam.size):
        for n in range(m + 1, lam.size):
            c_sq += lam[m] * lam[n]
            negativity += math.sqrt(lam[m] * lam[n])
    concurrence = 2.0 * math.sqrt(c_sq)
    subleading = float(np.sum(lam[1:]))
    return lam, entropy, concurrence, negativity, subleading


def spectrum(rdm, k=8, method="schmidt"):
    """Eigenvalues of the discretized RDM and the measures built from them.

    method="schmidt" (default) takes singular values of the weighted
    amplitude factor -- the Schmidt coefficients of the filtered state --
    which resolves eigenvalues far below the eig noise floor of the squared
    matrix. method="eigh" diagonalizes the Hermitian matrix directly;
    eigenvalues below -1e-10 are rejected, small negatives clamped.
    """
    if method == "schmidt":
        phi = rdm.factor
        if min(phi.shape) <= 1024:
            sv = np.linalg.svd(phi, compute_uv=False)
        else:
            from scipy.sparse.linalg import svds
            k_eff = min(k, min(phi.shape) - 1)
            sv = svds(phi, k=k_eff, return_singular_vectors=False)
            sv = np.sort(sv)[::-1]
        lam = (sv * sv) / rdm.trace_raw
    elif method == "eigh":
        lam = np.linalg.eigvalsh(rdm.matrix)[::-1]
        if np.any(lam < -1e-10):
            raise ValidationError(f"RDM has a significantly negative eigenvalue "
                                  f"({lam.min():.3e}); assembly is inconsistent")
        lam = np.clip(lam, 0.0, None)
    else:
        raise ValidationError(f"unknown spectrum method {method!r}")
    lam = lam[:max(k, 2)]
    lam_sorted, entropy, concurrence, negativity, subleading = _measures(lam)
    return OracleSpectrum(lam_sorted, entropy, concurrence, negativity, subleading)


def schmidt_spectrum(state, region, nodes_per_axis=16, k=8):
    """Convenience: build_rdm + spectrum in one call."""
    return spectrum(build_rdm(state, region, nodes_per_axis), k=k)


# --------------------------------------------------------------------------- #
# probability mass of the measurement boxes
# --------------------------------------------------------------------------- #

def _subdivisions(max_width, scale, cap=64):
    if not math.isfinite(scale) or scale <= 0 or max_width <= scale:
        return 1
    return min(cap, int(math.ceil(max_width / scale)))


def _com_band_factors(factor, r_nodes, a_lo, a_hi, b_lo, b_hi, frac_a,
                      scale=math.inf, order=16):
    """integral of |chi(R)|^2 over the R band reachable at relative offset r.

    For fixed r = q_A - q_B the allowed q_B interval is
    [max(b_lo, a_lo - r), min(b_hi, a_hi - r)] and R = q_B + frac_a * r.
    Bands wider than the factor's length scale are subdivided.
    """
    lo = np.maximum(b_lo, a_lo - r_nodes) + frac_a * r_nodes
    hi = np.minimum(b_hi, a_hi - r_nodes) + frac_a * r_nodes
    width = np.clip(hi - lo, 0.0, None)
    if factor is None:
        return width
    n_sub = _subdivisions(float(np.max(width, initial=0.0)), scale)
    x, w = _quad.gl_nodes(order)
    total = np.zeros_like(width)
    for k in range(n_sub):
        seg_lo = lo + width * (k / n_sub)
        seg_half = 0.5 * width / n_sub
        nodes = (seg_lo + seg_half)[:, None] + seg_half[:, None] * x[None, :]
        vals = np.abs(factor.value(nodes)) ** 2
        total += np.sum(vals * w[None, :], axis=1) * seg_half
    return total


def _rel_axis_breaks(center_rel, wa, wb, scale):
    lo = center_rel - wa - wb
    hi = center_rel + wa + wb
    kink = abs(wa - wb)
    knots = sorted({lo, center_rel - kink, center_rel + kink, hi})
    refined = []
    for seg_lo, seg_hi in zip(knots[:-1], knots[1:]):
        n_sub = _subdivisions(seg_hi - seg_lo, scale)
        refined.extend(np.linspace(seg_lo, seg_hi, n_sub + 1)[:-1])
    refined.append(knots[-1])
    return refined


def _probability_comrel(state, region, order):
    center = region.center
    wa, wb = region.half_widths_a, region.half_widths_b
    frac_a = state.mass_a / state.total_mass
    rel_scales = np.asarray(state.rel_part.char_lengths, dtype=float)
    com_scales = (np.full(state.dim_a, math.inf) if state.com_part is None
                  else np.asarray(state.com_part.char_lengths, dtype=float))
    axes = []
    com_factors = ([None] * state.dim_a if state.com_part is None
                   else state.com_part.factors)
    for i in range(state.dim_a):
        rel_c = center.q_a[i] - center.q_b[i]
        breaks = _rel_axis_breaks(rel_c, wa[i], wb[i], rel_scales[i])
        nodes, weights = _quad.gl_panels(breaks, order)
        g = _com_band_factors(com_factors[i], nodes,
                              center.q_a[i] - wa[i], center.q_a[i] + wa[i],
                              center.q_b[i] - wb[i], center.q_b[i] + wb[i],
                              frac_a, scale=com_scales[i])
        axes.append((nodes, weights * g))
    r_pts, w = _quad.tensor_grid(axes)
    dens = np.abs(np.asarray(state.rel_part.value(r_pts))) ** 2
    return float(np.sum(w * dens))


def _probability_product(state, region, order):
    total = 1.0
    center = region.center
    sides = [(state.part_a.factors, center.q_a, region.half_widths_a),
             (state.part_b.factors, center.q_b, region.half_widths_b)]
    for factors, centers, widths in sides:
        for i, f in enumerate(factors):
            lo, hi = centers[i] - widths[i], centers[i] + widths[i]
            n_sub = _subdivisions(hi - lo, f.scale)
            breaks = np.linspace(lo, hi, n_sub + 1)
            total *= _quad.integrate_checked(lambda x: np.abs(f.value(x)) ** 2,
                                             breaks, order, 1e-8, "p_ab factor")
    return total


def _probability_generic(state, region, order):
    if state.dim_a + state.dim_b > 4:
        raise ValidationError("direct box quadrature limited to 4 total dimensions; "
                              "use a COM/relative or product state")
    center = region.center
    axes_a = _box_axes(center.q_a, region.half_widths_a, order)
    axes_b = _box_axes(center.q_b, region.half_widths_b, order)
    qa, wq_a = _quad.tensor_grid(axes_a)
    qb, wq_b = _quad.tensor_grid(axes_b)
    dens = np.abs(state.amplitude_outer(qa, qb)) ** 2
    return float(wq_a @ dens @ wq_b)


def probability_mass(state, region, order=16, rtol=1e-8):
    """p_ab: probability of finding both particles inside their boxes.

    Requires a normalized state; for plane-wave/absent COM factors the value
    is per unit COM volume (the relative part is unit-normalized and
    |chi| = 1). Computed by Gauss-Legendre quadrature with a refinement
    convergence check.
    """
    if region.alice_only:
        raise ValidationError("probability_mass needs both boxes")
    if not state.is_normalized():
        if not (isinstance(state, ComRelState) and state.rel_part.normalized):
            raise ValidationError("probability requires a normalized state")
    if isinstance(state, ComRelState):
        val = _probability_comrel(state, region, order)
        ref = _probability_comrel(state, region, order + 6)
    elif isinstance(state, ProductState):
        return _probability_product(state, region, order)
    else:
        val = _probability_generic(state, region, order)
        ref = _probability_generic(state, region, order + 6)
    if abs(val - ref) > rtol * max(abs(ref), 1e-300):
        raise QuadratureError("box-probability quadrature did not converge")
    return ref


# --------------------------------------------------------------------------- #
# side-by-side comparison against the closed forms
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ComparisonRung:
    scale: float
    half_widths_a: list
    half_widths_b: list
    eps_formula: float
    eps_oracle: float
    lambda2_oracle: float
    lambda3_formula: float
    lambda3_oracle: float
    entropy_formula: float
    entropy_oracle: float

    @property
    def eps_rel_error(self):
        if self.eps_oracle == 0.0:
            return 0.0 if self.eps_formula == 0.0 else math.inf
        return abs(self.eps_formula - self.eps_oracle) / abs(self.eps_oracle)

    @property
    def lambda3_rel_error(self):
        if self.lambda3_oracle == 0.0:
            return 0.0 if self.lambda3_formula == 0.0 else math.inf
        return abs(self.lambda3_formula - self.lambda3_oracle) / abs(self.lambda3_oracle)


@dataclass(frozen=True)
class ComparisonReport:
    rungs: list
    eps_slope_formula: float
    eps_slope_oracle: float
    lambda3_slope_formula: float
    lambda3_slope_oracle: float

    def to_dict(self):
        return {
            "rungs": [{
                "scale": r.scale,
                "half_widths_a": r.half_widths_a,
                "half_widths_b": r.half_widths_b,
                "eps_formula": r.eps_formula,
                "eps_oracle": r.eps_oracle,
                "lambda2_oracle": r.lambda2_oracle,
                "lambda3_formula": r.lambda3_formula,
                "lambda3_oracle": r.lambda3_oracle,
                "entropy_formula": r.entropy_formula,
                "entropy_oracle": r.entropy_oracle,
                "eps_rel_error": r.eps_rel_error,
                "lambda3_rel_error": r.lambda3_rel_error,
            } for r in self.rungs],
            "eps_slope_formula": self.eps_slope_formula,
            "eps_slope_oracle": self.eps_slope_oracle,
            "lambda3_slope_formula": self.lambda3_slope_formula,
            "lambda3_slope_oracle": self.lambda3_slope_oracle,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _loglog_slope(scales, values):
    pairs = [(s, v) for s, v in zip(scales, values) if v > 0.0 and math.isfinite(v)]
    if len(pairs) < 2:
        return math.nan
    x = np.log([p[0] for p in pairs])
    y = np.log([p[1] for p in pairs])
    return float(np.polyfit(x, y, 1)[0])


def compare(state, region, sigma=0.1, nodes_per_axis=48,
            ladder=(1.0, 0.5, 0.25), k=8, with_lambda3=True, vary="a"):
    """Formula-vs-oracle comparison across a geometric ladder of region sizes.

    `vary` picks which party's half-widths the ladder rescales ("a", "b" or
    "both"); with "a" the expected log-log slopes are 2 for eps and 4 for the
    third eigenvalue. The oracle's eps is the subleading spectral weight
    1 - lambda1, which for one-dimensional parties equals the second
    eigenvalue and for multimode states sums the per-pair eigenvalues.
    """
    if vary not in ("a", "b", "both"):
        raise ValidationError("vary must be 'a', 'b' or 'both'")
    rungs = []
    for s in ladder:
        if vary == "both":
            reg = region.scaled(s)
        elif vary == "a":
            reg = region.with_widths(half_widths_a=region.half_widths_a * s)
        else:
            reg = region.with_widths(half_widths_b=region.half_widths_b * s)
        eps_f = epsilon_joint(state, reg)
        try:
            l3_f = lambda3_joint(state, reg) if with_lambda3 else math.nan
        except Exception:
            l3_f = math.nan
        spec = schmidt_spectrum(state, reg, nodes_per_axis, k=k)
        rungs.append(ComparisonRung(
            scale=s,
            half_widths_a=reg.half_widths_a.tolist(),
            half_widths_b=reg.half_widths_b.tolist(),
            eps_formula=eps_f,
            eps_oracle=spec.subleading_weight,
            lambda2_oracle=spec.lambda2,
            lambda3_formula=l3_f,
            lambda3_oracle=spec.lambda3,
            entropy_formula=binary_entropy(min(eps_f, 0.5)),
            entropy_oracle=spec.entropy_bits,
        ))
    scales = [r.scale for r in rungs]
    return ComparisonReport(
        rungs=rungs,
        eps_slope_formula=_loglog_slope(scales, [r.eps_formula for r in rungs]),
        eps_slope_oracle=_loglog_slope(scales, [r.eps_oracle for r in rungs]),
        lambda3_slope_formula=_loglog_slope(scales, [r.lambda3_formula for r in rungs]),
        lambda3_slope_oracle=_loglog_slope(scales, [r.lambda3_oracle for r in rungs]),
    )
