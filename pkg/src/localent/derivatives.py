"""Density-matrix derivative assembly.

For a pure state rho = psi psi*, every mixed partial of the density matrix
factorizes into two conjugated wavefunction derivatives taken at the same
reference point. This module builds per-coordinate-pair derivative jets of
psi and assembles the rho partials from them, and provides the
central-difference fallback for user-supplied states.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, UnsupportedOrderError, ValidationError
from .states import ConfigPoint, MultiIndex

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DerivativeJet:
    """All psi partials for one (Alice axis i, Bob axis j) pair.

    entries[(n_a, n_b)] = d^{n_a}/dq_{A,i}^{n_a} d^{n_b}/dq_{B,j}^{n_b} psi
    at `point`, complete for n_a, n_b in 0..max_order.
    """

    point: ConfigPoint
    axis_a: int
    axis_b: int
    max_order: int
    entries: dict

    def __getitem__(self, key):
        try:
            return self.entries[key]
        except KeyError:
            raise UnsupportedOrderError(f"jet entry {key} not populated") from None


def build_jet(state, point, i, j, max_order=1):
    """Populate the (i, j) jet with all (max_order+1)^2 mixed partials."""
    if max_order not in (1, 2):
        raise ValidationError("max_order must be 1 or 2")
    if not (0 <= i < state.dim_a and 0 <= j < state.dim_b):
        raise ValidationError("axis indices out of range")
    entries = {}
    for n_a in range(max_order + 1):
        for n_b in range(max_order + 1):
            idx = MultiIndex.pair(i, j, n_a, n_b, state.dim_a, state.dim_b)
            entries[(n_a, n_b)] = state.derivative(point, idx)
    return DerivativeJet(point, i, j, max_order, entries)


def rho_partial(jet_or_state, n1, n2, n3, n4, point=None, i=0, j=0):
    """rho_{n1 n2 n3 n4} for the pure state, from a jet or directly.

    Index convention: n1/n2 differentiate q_A and q_A', n3/n4 differentiate
    q_B and q_B'; purity factorizes the value into
    (d^{n1} d^{n3} psi) conj(d^{n2} d^{n4} psi).
    """
    if isinstance(jet_or_state, DerivativeJet):
        jet = jet_or_state
    else:
        if point is None:
            raise ValidationError("rho_partial from a state needs an explicit point")
        order = max(n1, n2, n3, n4)
        jet = build_jet(jet_or_state, point, i, j, max_order=1 if order <= 1 else 2)
    return jet[(n1, n3)] * np.conjugate(jet[(n2, n4)])


# --------------------------------------------------------------------------- #
# finite-difference fallback
# --------------------------------------------------------------------------- #

_STENCILS = {
    1: ((-1.0, -0.5), (1.0, 0.5)),
    2: ((-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)),
    3: ((-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)),
    4: ((-2.0, 1.0), (-1.0, -4.0), (0.0, 6.0), (1.0, -4.0), (2.0, 1.0)),
}


def _stencil_eval(amp, qa, qb, coords, h_list):
    """Tensor central-difference stencil over the active coordinates.

    coords: list of (side, axis, order); h_list: step per active coordinate.
    Returns (value, coefficient_l1_norm) -- the latter bounds the rounding
    noise as eps * |f| * l1_norm.
    """
    import itertools

    offset_sets = []
    for (_, _, order), _h in zip(coords, h_list):
        offset_sets.append(_STENCILS[order])
    total = 0.0 + 0.0j
    coef_l1 = 0.0
    for combo in itertools.product(*offset_sets):
        qa_s = np.array(qa, dtype=float)
        qb_s = np.array(qb, dtype=float)
        coef = 1.0
        for (side, axis, order), h, (mult, c) in zip(coords, h_list, combo):
            if side == 0:
                qa_s[axis] += mult * h
            else:
                qb_s[axis] += mult * h
            coef *= c / h ** order
        total += coef * complex(amp(qa_s, qb_s))
        coef_l1 += abs(coef)
    return total, coef_l1


def fd_derivative(state, point, idx, rtol=1e-5):
    """Central differences with two Richardson refinement levels.

    The base step for total order k is eps^(1/(k+4)) times the coordinate
    scale, so that the finest level h0/4 sits near the rounding/truncation
    optimum for that order. Raises ConvergenceError when the two
    highest-order extrapolants disagree by more than `rtol` relative
    (measured against the larger of the result and the rounding floor).
    """
    total_order = idx.total
    if total_order == 0:
        return state.evaluate(point)
    if total_order > 4:
        raise UnsupportedOrderError("finite differences support total order <= 4")
    if any(k > 4 for k in idx.order_a + idx.order_b):
        raise UnsupportedOrderError("finite differences support per-coordinate order <= 4")

    coords = []
    scales = []
    cl_a = np.asarray(state.char_lengths_a, dtype=float)
    cl_b = np.asarray(state.char_lengths_b, dtype=float)
    for axis, order in enumerate(idx.order_a):
        if order:
            coords.append((0, axis, order))
            scales.append(cl_a[axis] if math.isfinite(cl_a[axis]) else 1.0)
    for axis, order in enumerate(idx.order_b):
        if order:
            coords.append((1, axis, order))
            scales.append(cl_b[axis] if math.isfinite(cl_b[axis]) else 1.0)

    h0 = _EPS ** (1.0 / (total_order + 4))
    amp = state._amplitude

    def estimate(shrink):
        h_list = [h0 * s / shrink for s in scales]
        return _stencil_eval(amp, point.q_a, point.q_b, coords, h_list)

    d1, _ = estimate(1.0)
    d2, _ = estimate(2.0)
    d4, coef_l1 = estimate(4.0)
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d4 - d2) / 3.0
    final = (16.0 * r2 - r1) / 15.0
    f0 = abs(complex(amp(point.q_a, point.q_b)))
    noise_floor = 32.0 * _EPS * f0 * coef_l1
    scale = max(abs(final), noise_floor, 1e-300)
    if abs(r2 - r1) > rtol * scale:
        raise ConvergenceError(
            f"finite-difference estimates for order {tuple(idx.order_a)}|"
            f"{tuple(idx.order_b)} differ by {abs(r2 - r1) / scale:.2e} relative")
    return final
