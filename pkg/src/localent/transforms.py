"""Coordinate-transform machinery.

Local orthogonal redefinitions of one party's axes leave the local
entanglement invariant; non-local linear maps that make the wavefunction
separable (normal modes, center-of-mass/relative coordinates) turn the
mixed log-Hessian into sums of one-dimensional curvatures. The measurement
boxes always stay axis-aligned in the ORIGINAL coordinates: transforms only
change the computation path, never the (A, B) partition.
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import MeasurementRegion, epsilon_joint
from .errors import DomainError, ValidationError
from .states import BipartiteState, ComRelState, ConfigPoint

__all__ = [
    "LocalTransform",
    "MappedState",
    "orthogonal_pullback_epsilon",
    "SeparableSystem",
    "separable_epsilon",
    "ComRelSplit",
    "com_rel_epsilon",
    "com_rel_epsilon_general",
    "spherical_cartesian_jet",
]


# --------------------------------------------------------------------------- #
# local orthogonal transforms
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class LocalTransform:
    """Width-scaled orthogonal redefinition of one party's axes.

    New coordinates satisfy Q_i / A_i = sum_j O_ij q_j / a_j with O
    orthogonal, old box half-widths a_j and new half-widths A_i.
    """

    party: str
    matrix: np.ndarray
    old_widths: np.ndarray
    new_widths: np.ndarray

    def __post_init__(self):
        if self.party not in ("A", "B"):
            raise ValidationError("party must be 'A' or 'B'")
        o = np.asarray(self.matrix, dtype=float)
        if o.ndim != 2 or o.shape[0] != o.shape[1]:
            raise ValidationError("transform matrix must be square")
        if not np.allclose(o @ o.T, np.eye(o.shape[0]), atol=1e-12):
            raise ValidationError("transform matrix is not orthogonal")
        ow = np.asarray(self.old_widths, dtype=float)
        nw = np.asarray(self.new_widths, dtype=float)
        if ow.size != o.shape[0] or nw.size != o.shape[0]:
            raise ValidationError("width vectors must match the matrix size")
        if np.any(ow <= 0) or np.any(nw <= 0):
            raise ValidationError("widths must be positive")
        object.__setattr__(self, "matrix", o)
        object.__setattr__(self, "old_widths", ow)
        object.__setattr__(self, "new_widths", nw)


class MappedState(BipartiteState):
    """Pullback of a state through per-party affine coordinate maps.

    psi'(Q_A, Q_B) = psi(M_A Q_A + c_A, M_B Q_B + c_B); derivatives expand
    the directional operators (sum_v M[v,i] d_v)^n multinomially.
    """

    def __init__(self, base, mat_a=None, off_a=None, mat_b=None, off_b=None):
        super().__init__(base.dim_a, base.dim_b, base.mass_a, base.mass_b, base.hbar)
        self.base = base
        self.mat_a = np.eye(base.dim_a) if mat_a is None else np.asarray(mat_a, float)
        self.off_a = np.zeros(base.dim_a) if off_a is None else np.asarray(off_a, float)
        self.mat_b = np.eye(base.dim_b) if mat_b is None else np.asarray(mat_b, float)
        self.off_b = np.zeros(base.dim_b) if off_b is None else np.asarray(off_b, float)

    def map_a(self, q):
        return np.asarray(q) @ self.mat_a.T + self.off_a

    def map_b(self, q):
        return np.asarray(q) @ self.mat_b.T + self.off_b

    def _amplitude(self, qa, qb):
        return self.base._amplitude(self.map_a(qa), self.map_b(qb))

    @staticmethod
    def _expand_side(mat, orders):
        """Multinomial expansion of prod_i (sum_v mat[v,i] d_v)^{n_i}.

        Yields (coefficient, base-side multi-index) pairs, merged.
        """
        dim = mat.shape[0]
        terms = {(0,) * dim: 1.0}
        for i, n in enumerate(orders):
            for _ in range(n):
                new = {}
                for multi, coef in terms.items():
                    for v in range(dim):
                        c = coef * mat[v, i]
                        if c == 0.0:
                            continue
                        key = tuple(m + (1 if u == v else 0) for u, m in enumerate(multi))
                        new[key] = new.get(key, 0.0) + c
                terms = new
        return terms.items()

    def _derivative(self, qa, qb, idx):
        from .states import MultiIndex
        pa = self.map_a(qa)
        pb = self.map_b(qb)
        total = 0.0 + 0.0j
        terms_a = list(self._expand_side(self.mat_a, idx.order_a))
        terms_b = list(self._expand_side(self.mat_b, idx.order_b))
        for (multi_a, coef_a), (multi_b, coef_b) in itertools.product(terms_a, terms_b):
            val = self.base._derivative(pa, pb, MultiIndex(multi_a, multi_b)) \
                if (sum(multi_a) + sum(multi_b)) else self.base._amplitude(pa, pb)
            total = total + coef_a * coef_b * val
        return total

    def check_point(self, point):
        self.base.check_point(ConfigPoint(self.map_a(point.q_a), self.map_b(point.q_b)))

    def max_order(self):
        return self.base.max_order()

    @property
    def char_lengths_a(self):
        return self._mapped_lengths(self.base.char_lengths_a, self.mat_a)

    @property
    def char_lengths_b(self):
        return self._mapped_lengths(self.base.char_lengths_b, self.mat_b)

    @staticmethod
    def _mapped_lengths(base_lengths, mat):
        out = np.empty(mat.shape[1])
        for i in range(mat.shape[1]):
            rate = sum(abs(mat[v, i]) / base_lengths[v]
                       for v in range(mat.shape[0]) if math.isfinite(base_lengths[v]))
            out[i] = 1.0 / rate if rate > 0 else math.inf
        return out

    def is_real(self):
        return self.base.is_real()


def pulled_back_state_and_region(state, region, transform):
    """The transformed state plus the equivalent region in new coordinates."""
    o = transform.matrix
    a_old = transform.old_widths
    a_new = transform.new_widths
    # q_j = a_j sum_i O_ij Q_i / A_i
    mat = (a_old[:, None] * o.T) / a_new[None, :]
    if transform.party == "A":
        if a_old.size != state.dim_a:
            raise ValidationError("transform size must match Alice's dimension")
        center_new = a_new * (o @ (region.center.q_a / a_old))
        mapped = MappedState(state, mat_a=mat)
        new_region = MeasurementRegion(
            ConfigPoint(center_new, region.center.q_b),
            a_new, region.half_widths_b)
    else:
        if a_old.size != state.dim_b:
            raise ValidationError("transform size must match Bob's dimension")
        center_new = a_new * (o @ (region.center.q_b / a_old))
        mapped = MappedState(state, mat_b=mat)
        new_region = MeasurementRegion(
            ConfigPoint(region.center.q_a, center_new),
            region.half_widths_a, a_new)
    return mapped, new_region


def orthogonal_pullback_epsilon(state, region, transform):
    """eps computed through the transformed coordinates.

    Equals eps in the original coordinates exactly at leading order: the
    width-scaled orthogonal map preserves sum_i a_i^2 d_i d_i' termwise.
    """
    mapped, new_region = pulled_back_state_and_region(state, region, transform)
    return epsilon_joint(mapped, new_region)


# --------------------------------------------------------------------------- #
# separable (normal-mode) systems
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class SeparableSystem:
    """Wavefunction that factorizes along X_k = sum_i T_ik x_i.

    `log_curvatures[k]` evaluates S_k''(X_k) = d^2(-log psi_k)/dX_k^2; the
    first dim_a rows of T belong to Alice's coordinates, the rest to Bob's.
    """

    dim_a: int
    dim_b: int
    matrix: np.ndarray
    log_curvatures: tuple

    def __post_init__(self):
        t = np.asarray(self.matrix, dtype=float)
        if t.shape[0] != self.dim_a + self.dim_b:
            raise ValidationError("T must have dim_a + dim_b rows")
        if t.shape[1] != len(self.log_curvatures):
            raise ValidationError("one factor curvature per column of T")
        object.__setattr__(self, "matrix", t)
        object.__setattr__(self, "log_curvatures", tuple(self.log_curvatures))


def separable_epsilon(system, widths_a, widths_b, point):
    """eps = sum_ij (a_i b_j)^2/9 |sum_k T_ik T_jk S_k''(X_k)|^2."""
    wa = np.atleast_1d(np.asarray(widths_a, dtype=float))
    wb = np.atleast_1d(np.asarray(widths_b, dtype=float))
    if wa.size != system.dim_a or wb.size != system.dim_b:
        raise ValidationError("width vectors must match the system dimensions")
    x = np.concatenate([np.atleast_1d(point.q_a), np.atleast_1d(point.q_b)])
    big_x = x @ system.matrix
    curv = np.array([s(big_x[k]) for k, s in enumerate(system.log_curvatures)],
                    dtype=complex)
    t = system.matrix
    total = 0.0
    for i in range(system.dim_a):
        for j in range(system.dim_b):
            mixed = np.sum(t[i, :] * t[system.dim_a + j, :] * curv)
            total += (wa[i] * wb[j]) ** 2 / 9.0 * abs(mixed) ** 2
    return float(total)


# --------------------------------------------------------------------------- #
# center-of-mass / relative split
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ComRelSplit:
    """COM/relative description: masses plus the two log-Hessian contracts.

    `rel_log_hessian(r)` and `com_log_hessian(R)` return the matrices
    d^2 S / dr_i dr_j and d^2 S / dR_i dR_j of the two factors' logs.
    """

    mass_a: float
    mass_b: float
    rel_log_hessian: object
    com_log_hessian: object

    @property
    def reduced_mass(self):
        return self.mass_a * self.mass_b / (self.mass_a + self.mass_b)

    @classmethod
    def from_state(cls, state):
        if not isinstance(state, ComRelState):
            raise ValidationError("ComRelSplit.from_state needs a COM/relative state")
        return cls(state.mass_a, state.mass_b,
                   state.rel_log_hessian, state.com_log_hessian)


def com_rel_epsilon(split, widths_a, widths_b, point):
    """eps for a COM x relative product through the two log-Hessians.

    eps = sum_ij (a_i^2 b_j^2 / 9) |S_phi''_ij(r) - (mu^2/mA mB) S_chi''_ij(R)|^2.
    The relative sign follows from the chain rule d/dq_A = d/dr + (mu/m_B) d/dR,
    d/dq_B = -d/dr + (mu/m_A) d/dR applied to the mixed second derivative.
    """
    wa = np.atleast_1d(np.asarray(widths_a, dtype=float))
    wb = np.atleast_1d(np.asarray(widths_b, dtype=float))
    qa = np.atleast_1d(point.q_a)
    qb = np.atleast_1d(point.q_b)
    mass_total = split.mass_a + split.mass_b
    r = qa - qb
    big_r = (split.mass_a * qa + split.mass_b * qb) / mass_total
    s_rel = np.asarray(split.rel_log_hessian(r), dtype=complex)
    s_com = np.asarray(split.com_log_hessian(big_r), dtype=complex)
    factor = split.reduced_mass ** 2 / (split.mass_a * split.mass_b)
    mixed = s_rel - factor * s_com
    scale = np.outer(wa ** 2, wb ** 2) / 9.0
    return float(np.sum(scale * np.abs(mixed) ** 2))


def com_rel_epsilon_general(state, region):
    """eps from the non-separated (R, r) operator form.

    Expands psi = chi phi under D_A^i = d_{r_i} + (mu/m_B) d_{R_i} and
    D_B^j = (mu/m_A) d_{R_j} - d_{r_j} and assembles
    |psi D_A D_B psi - (D_A psi)(D_B psi)|^2 termwise from the part
    derivatives -- an independent arithmetic path from the jet route.
    """
    if not isinstance(state, ComRelState):
        raise ValidationError("com_rel_epsilon_general needs a COM/relative state")
    if region.alice_only:
        raise ValidationError("needs both parties' half-widths")
    qa, qb = region.center.q_a, region.center.q_b
    r = qa - qb
    big_r = state.com_coords(qa, qb)
    dim = state.dim_a
    ca = state.reduced_mass / state.mass_b
    cb = state.reduced_mass / state.mass_a

    def dphi(orders):
        return state.rel_part.derivative(r, tuple(orders))

    def dchi(orders):
        if state.com_part is None:
            return 1.0 if sum(orders) == 0 else 0.0
        return state.com_part.derivative(big_r, tuple(orders))

    def unit(i):
        return tuple(1 if k == i else 0 for k in range(dim))

    def unit2(i, j):
        return tuple((1 if k == i else 0) + (1 if k == j else 0) for k in range(dim))

    phi0 = dphi((0,) * dim)
    chi0 = dchi((0,) * dim)
    psi0 = chi0 * phi0
    total = 0.0
    wa, wb = region.half_widths_a, region.half_widths_b
    for i in range(dim):
        for j in range(dim):
            psi_a = ca * dchi(unit(i)) * phi0 + chi0 * dphi(unit(i))
            psi_b = cb * dchi(unit(j)) * phi0 - chi0 * dphi(unit(j))
            psi_ab = (ca * cb * dchi(unit2(i, j)) * phi0
                      - ca * dchi(unit(i)) * dphi(unit(j))
                      + cb * dchi(unit(j)) * dphi(unit(i))
                      - chi0 * dphi(unit2(i, j)))
            bracket = psi0 * psi_ab - psi_a * psi_b
            total += (wa[i] * wb[j]) ** 2 * abs(bracket) ** 2 / (9.0 * abs(psi0) ** 4)
    return float(total)


# --------------------------------------------------------------------------- #
# spherical -> Cartesian derivative chain
# --------------------------------------------------------------------------- #

_SPH_KEYS_1 = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
_SPH_KEYS_2 = ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))
_CART_KEYS = _SPH_KEYS_1 + _SPH_KEYS_2


@lru_cache(maxsize=1)
def _spherical_chain_table():
    """Coefficient functions mapping a spherical jet to Cartesian partials.

    Built by applying the spherical derivative operators symbolically twice
    and collecting coefficients of each spherical partial; the simplified
    coefficients are lambdified once and cached.
    """
    import sympy as sp

    r, th, ph = sp.symbols("r theta phi", positive=True)
    f = sp.Function("f")(r, th, ph)

    ops = {
        0: lambda e: (sp.sin(th) * sp.cos(ph) * e.diff(r)
                      + sp.cos(th) * sp.cos(ph) / r * e.diff(th)
                      - sp.sin(ph) / (r * sp.sin(th)) * e.diff(ph)),
        1: lambda e: (sp.sin(th) * sp.sin(ph) * e.diff(r)
                      + sp.cos(th) * sp.sin(ph) / r * e.diff(th)
                      + sp.cos(ph) / (r * sp.sin(th)) * e.diff(ph)),
        2: lambda e: sp.cos(th) * e.diff(r) - sp.sin(th) / r * e.diff(th),
    }

    sph_slots = []
    for a in range(3):
        for b in range(3):
            for c in range(3):
                if 0 < a + b + c <= 2:
                    sph_slots.append((a, b, c))

    def coeff_functions(expr):
        expr = sp.expand(expr)
        funcs = {}
        for slot in sph_slots:
            wrt = [(v, k) for v, k in zip((r, th, ph), slot) if k > 0]
            coeff = expr.coeff(sp.Derivative(f, *wrt))
            if coeff != 0:
                funcs[slot] = sp.lambdify((r, th, ph), sp.simplify(coeff), "numpy")
        return funcs

    table = {}
    for c_idx, key in ((0, (1, 0, 0)), (1, (0, 1, 0)), (2, (0, 0, 1))):
        table[key] = coeff_functions(ops[c_idx](f))
    second = {(2, 0, 0): (0, 0), (1, 1, 0): (0, 1), (1, 0, 1): (0, 2),
              (0, 2, 0): (1, 1), (0, 1, 1): (1, 2), (0, 0, 2): (2, 2)}
    for key, (c1, c2) in second.items():
        table[key] = coeff_functions(ops[c1](ops[c2](f)))
    return table


def spherical_cartesian_jet(spherical_jet, r, theta, phi):
    """Cartesian partials (orders <= 2) from a spherical derivative jet.

    `spherical_jet[(a, b, c)]` holds d^a_r d^b_theta d^c_phi of the function
    for a+b+c <= 2. Returns a dict over Cartesian multi-indices (x, y, z),
    including the zero-order passthrough.
    """
    if r < 1e-8:
        raise DomainError("spherical chain is singular at the origin")
    if abs(math.sin(theta)) < 1e-8:
        raise DomainError("spherical chain is singular on the polar axis")
    table = _spherical_chain_table()
    out = {(0, 0, 0): spherical_jet[(0, 0, 0)]}
    for key in _CART_KEYS:
        val = 0.0 + 0.0j
        for slot, fn in table[key].items():
            val += complex(fn(r, theta, phi)) * spherical_jet[slot]
        out[key] = val
    return out
