"""Bipartite pure-state model.

A state is a smooth wavefunction psi(q_A, q_B) for two distinguishable
particles with dim_A and dim_B position coordinates. Every state carries an
exact amplitude contract and a mixed-partial-derivative contract; the built-in
families (coupled harmonic oscillators, hydrogen-like atoms, separable
Gaussian/plane-wave products) provide analytic derivatives, user-supplied
states may opt into the finite-difference fallback.

States are immutable value objects: all evaluation methods are pure functions
and safe for concurrent use.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, UnsupportedOrderError, ValidationError

__all__ = [
    "ConfigPoint",
    "MultiIndex",
    "BipartiteState",
    "ProductState",
    "ComRelState",
    "HermiteFactor",
    "ExpQuadFactor",
    "gaussian_factor",
    "gaussian_packet_factor",
    "plane_wave_factor",
    "GaussianPacketSpec",
    "PlaneWaveSpec",
    "coupled_oscillator_state",
    "coupled_oscillator_from_lengths",
    "hydrogen_state",
    "separable_product",
    "UserState",
]

ELECTRON_MASS = 1.0
PROTON_MASS = 1836.15267343


# --------------------------------------------------------------------------- #
# points and multi-indices
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ConfigPoint:
    """A configuration-space point (q_A, q_B)."""

    q_a: np.ndarray
    q_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q_a", np.atleast_1d(np.asarray(self.q_a, dtype=float)))
        object.__setattr__(self, "q_b", np.atleast_1d(np.asarray(self.q_b, dtype=float)))

    @property
    def dim_a(self):
        return self.q_a.size

    @property
    def dim_b(self):
        return self.q_b.size


@dataclass(frozen=True)
class MultiIndex:
    """Derivative orders per coordinate, per side."""

    order_a: tuple
    order_b: tuple

    def __post_init__(self):
        oa = tuple(int(k) for k in np.atleast_1d(self.order_a))
        ob = tuple(int(k) for k in np.atleast_1d(self.order_b))
        if any(k < 0 for k in oa + ob):
            raise ValidationError("derivative orders must be non-negative")
        object.__setattr__(self, "order_a", oa)
        object.__setattr__(self, "order_b", ob)

    @classmethod
    def pair(cls, i, j, n_a, n_b, dim_a, dim_b):
        """Orders concentrated on Alice's axis i and Bob's axis j."""
        oa = [0] * dim_a
        ob = [0] * dim_b
        oa[i] = n_a
        ob[j] = n_b
        return cls(tuple(oa), tuple(ob))

    @property
    def total(self):
        return sum(self.order_a) + sum(self.order_b)

    def is_zero(self):
        return self.total == 0


def _validate_point(state, point):
    if point.dim_a != state.dim_a or point.dim_b != state.dim_b:
        raise ValidationError(
            f"point dimensions ({point.dim_a}, {point.dim_b}) do not match "
            f"state dimensions ({state.dim_a}, {state.dim_b})")


# --------------------------------------------------------------------------- #
# 1-D factors
# --------------------------------------------------------------------------- #

class Factor1D:
    """One-dimensional wavefunction factor with analytic derivatives."""

    scale = 1.0          # characteristic length (may be inf for plane waves)
    normalized = True    # unit L2 norm

    def value(self, x):
        raise NotImplementedError

    def derivative(self, x, k):
        raise NotImplementedError

    def log_second_derivative(self, x):
        """d^2/dx^2 of -log f, via quotient rule (no branch cuts)."""
        f = self.value(x)
        f1 = self.derivative(x, 1)
        f2 = self.derivative(x, 2)
        return (f1 * f1 - f * f2) / (f * f)

    def is_real(self):
        return True


class HermiteFactor(Factor1D):
    """Harmonic-oscillator eigenfunction.

    u_n(x) = (sqrt(pi) 2^n n! L)^(-1/2) exp(-t^2/2) H_n(t), t = (x-c)/L.

    Derivatives use the polynomial recurrence P_{k+1} = P_k' - t P_k, so
    d^k u / dx^k = norm * exp(-t^2/2) P_k(t) / L^k exactly.
    """

    def __init__(self, n, length, center=0.0):
        if n < 0 or length <= 0:
            raise ValidationError("HermiteFactor requires n >= 0 and length > 0")
        self.n = int(n)
        self.length = float(length)
        self.center = float(center)
        self.scale = self.length
        self._norm = 1.0 / math.sqrt(math.sqrt(math.pi) * (2.0 ** self.n)
                                     * math.factorial(self.n) * self.length)
        basis = np.zeros(self.n + 1)
        basis[self.n] = 1.0
        self._polys = [Polynomial(np.polynomial.hermite.herm2poly(basis))]

    def _poly(self, k):
        while len(self._polys) <= k:
            p = self._polys[-1]
            self._polys.append(p.deriv() - Polynomial([0.0, 1.0]) * p)
        return self._polys[k]

    def value(self, x):
        t = (np.asarray(x) - self.center) / self.length
        return self._norm * np.exp(-0.5 * t * t) * self._poly(0)(t)

    def derivative(self, x, k):
        t = (np.asarray(x) - self.center) / self.length
        return (self._norm / self.length ** k) * np.exp(-0.5 * t * t) * self._poly(k)(t)


class ExpQuadFactor(Factor1D):
    """Exponential of a quadratic, f(x) = N exp(g(x)) with deg(g) <= 2.

    Covers Gaussians, Gaussian wave packets and plane waves; derivatives use
    Q_{k+1} = Q_k' + g' Q_k so that d^k f / dx^k = N Q_k(x) exp(g(x)).
    """

    def __init__(self, g_coeffs, norm_const, scale=None, normalized=True):
        self.g = Polynomial(np.asarray(g_coeffs, dtype=complex))
        if self.g.degree() > 2:
            raise ValidationError("ExpQuadFactor exponent must be quadratic")
        self.norm_const = complex(norm_const)
        g2 = self.g.coef[2] if len(self.g.coef) > 2 else 0.0
        if scale is None:
            scale = 1.0 / math.sqrt(abs(g2.real)) if abs(g2.real) > 0 else math.inf
        self.scale = scale
        self.normalized = normalized
        self._qpolys = [Polynomial([1.0 + 0.0j])]

    def _qpoly(self, k):
        gp = self.g.deriv()
        while len(self._qpolys) <= k:
            q = self._qpolys[-1]
            self._qpolys.append(q.deriv() + gp * q)
        return self._qpolys[k]

    def value(self, x):
        return self.norm_const * np.exp(self.g(np.asarray(x)))

    def derivative(self, x, k):
        x = np.asarray(x)
        return self.norm_const * self._qpoly(k)(x) * np.exp(self.g(x))

    def log_second_derivative(self, x):
        g2 = self.g.coef[2] if len(self.g.coef) > 2 else 0.0
        return np.broadcast_to(-2.0 * g2, np.shape(x)) if np.ndim(x) else -2.0 * g2

    def is_real(self):
        return bool(np.all(np.abs(self.g.coef.imag) == 0.0)
                    and abs(self.norm_const.imag) == 0.0)


def gaussian_factor(width, center=0.0, wave_number=0.0):
    """Normalized Gaussian exp(-(x-c)^2 / (2 w^2)) exp(i k x)."""
    if width <= 0:
        raise ValidationError("gaussian width must be positive")
    c, w = float(center), float(width)
    g = Polynomial([-c * c / (2 * w * w) + 0j, c / (w * w), -1.0 / (2 * w * w)])
    g = g + Polynomial([0.0, 1j * wave_number])
    return ExpQuadFactor(g.coef, (math.pi * w * w) ** -0.25, scale=w)


def gaussian_packet_factor(width, center=0.0, wave_number=0.0):
    """Wave-packet factor (2/(pi R0^2))^(1/4) exp(-(x-c)^2/R0^2) exp(i k x)."""
    if width <= 0:
        raise ValidationError("packet width must be positive")
    c, w = float(center), float(width)
    g = Polynomial([-c * c / (w * w) + 0j, 2 * c / (w * w), -1.0 / (w * w)])
    g = g + Polynomial([0.0, 1j * wave_number])
    return ExpQuadFactor(g.coef, (2.0 / (math.pi * w * w)) ** 0.25, scale=w)


def plane_wave_factor(wave_number):
    """Unit-modulus factor exp(i k x); not L2-normalizable."""
    return ExpQuadFactor([0.0, 1j * wave_number], 1.0,
                         scale=math.inf, normalized=False)


# --------------------------------------------------------------------------- #
# multi-dimensional parts (separable and hydrogen-like)
# --------------------------------------------------------------------------- #

class SeparableFactorPart:
    """Product of independent 1-D factors, one per coordinate."""

    def __init__(self, factors):
        self.factors = list(factors)
        self.dim = len(self.factors)
        self.normalized = all(f.normalized for f in self.factors)

    @property
    def char_lengths(self):
        # inf for scale-free factors (plane waves); consumers that need a
        # finite truncation scale substitute a fallback themselves
        return np.array([f.scale for f in self.factors])

    def check_point(self, x):
        pass

    def value(self, x):
        x = np.asarray(x)
        out = self.factors[0].value(x[..., 0])
        for i in range(1, self.dim):
            out = out * self.factors[i].value(x[..., i])
        return out

    def derivative(self, x, orders):
        x = np.asarray(x)
        out = self.factors[0].derivative(x[..., 0], orders[0])
        for i in range(1, self.dim):
            out = out * self.factors[i].derivative(x[..., i], orders[i])
        return out

    def max_order(self):
        return None  # any order

    def log_hessian(self, x):
        x = np.asarray(x, dtype=float)
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for i, f in enumerate(self.factors):
            h[i, i] = f.log_second_derivative(x[i])
        return h

    def is_real(self):
        return all(f.is_real() for f in self.factors)


_X, _Y, _Z, _A0 = None, None, None, None


def _hydrogen_symbols():
    global _X, _Y, _Z, _A0
    if _X is None:
        import sympy as sp
        _X, _Y, _Z = sp.symbols("x y z", real=True)
        _A0 = sp.Symbol("a0", positive=True)
    return _X, _Y, _Z, _A0


@lru_cache(maxsize=None)
def _hydrogen_expr(n, l, m):
    """Cartesian sympy expression for the hydrogenic orbital, a0 symbolic.

    Built from the radial function R_nl and a solid-harmonic form of Y_lm so
    the result is smooth everywhere off the origin (no polar-axis artifacts).
    """
    import sympy as sp
    from sympy.physics.hydrogen import R_nl

    x, y, z, a0 = _hydrogen_symbols()
    r = sp.sqrt(x * x + y * y + z * z)
    radial = R_nl(n, l, r / a0, 1) * a0 ** sp.Rational(-3, 2)
    mm = abs(m)
    u = sp.Symbol("u")
    pder = sp.diff(sp.legendre(l, u), u, mm)
    norm = sp.sqrt(sp.Rational(2 * l + 1, 4) / sp.pi
                   * sp.Rational(math.factorial(l - mm), math.factorial(l + mm)))
    angular = norm * pder.subs(u, z / r)
    if m > 0:
        angular *= (-1) ** mm * ((x + sp.I * y) / r) ** mm
    elif m < 0:
        angular *= ((x - sp.I * y) / r) ** mm
    return sp.simplify(radial * angular)


@lru_cache(maxsize=None)
def _hydrogen_deriv_fn(n, l, m, ox, oy, oz):
    import sympy as sp

    x, y, z, a0 = _hydrogen_symbols()
    expr = sp.diff(_hydrogen_expr(n, l, m), x, ox, y, oy, z, oz)
    return sp.lambdify((x, y, z, a0), expr, modules="numpy")


class HydrogenRelativePart:
    """Hydrogenic relative wavefunction phi_nlm with exact Cartesian partials.

    Derivatives are generated symbolically once per (n, l, m, orders) and
    cached; the Bohr radius stays a runtime parameter.
    """

    dim = 3
    normalized = True

    def __init__(self, n, l, m, bohr_radius=1.0):
        n, l, m = int(n), int(l), int(m)
        if n < 1 or not (0 <= l < n) or abs(m) > l:
            raise ValidationError(f"invalid hydrogenic quantum numbers (n,l,m)=({n},{l},{m})")
        if bohr_radius <= 0:
            raise ValidationError("bohr_radius must be positive")
        self.n, self.l, self.m = n, l, m
        self.a0 = float(bohr_radius)
        self.exclusion_radius = 1e-8 * self.a0

    @property
    def char_lengths(self):
        return np.full(3, self.n * self.n * self.a0)

    def check_point(self, x):
        r = np.sqrt(np.sum(np.square(np.asarray(x, dtype=float)), axis=-1))
        if np.any(r <= self.exclusion_radius):
            raise DomainError("hydrogen wavefunction queried inside the r=0 exclusion zone")

    def value(self, x):
        x = np.asarray(x)
        fn = _hydrogen_deriv_fn(self.n, self.l, self.m, 0, 0, 0)
        return np.asarray(fn(x[..., 0], x[..., 1], x[..., 2], self.a0), dtype=complex)

    def derivative(self, x, orders):
        if sum(orders) > 6:
            raise UnsupportedOrderError("hydrogen derivatives supported to total order 6")
        x = np.asarray(x)
        fn = _hydrogen_deriv_fn(self.n, self.l, self.m, *orders)
        return np.asarray(fn(x[..., 0], x[..., 1], x[..., 2], self.a0), dtype=complex)

    def max_order(self):
        return 6

    def log_hessian(self, x):
        f = self.value(x)
        h = np.empty((3, 3), dtype=complex)
        grads = [self.derivative(x, tuple(1 if k == i else 0 for k in range(3)))
                 for i in range(3)]
        for i in range(3):
            for j in range(i, 3):
                orders = [0, 0, 0]
                orders[i] += 1
                orders[j] += 1
                fij = self.derivative(x, tuple(orders))
                h[i, j] = h[j, i] = (grads[i] * grads[j] - f * fij) / (f * f)
        return h

    def is_real(self):
        return self.m == 0


# --------------------------------------------------------------------------- #
# bipartite states
# --------------------------------------------------------------------------- #

class BipartiteState:
    """Abstract bipartite pure state psi(q_A, q_B).

    Subclasses provide `_amplitude(qa, qb)` (vectorized over leading axes)
    and `_derivative(qa, qb, idx)`; purity is structural since only psi is
    ever stored.
    """

    def __init__(self, dim_a, dim_b, mass_a=1.0, mass_b=1.0, hbar=1.0):
        if dim_a < 1 or dim_b < 1:
            raise ValidationError("dimensions must be positive")
        if mass_a <= 0 or mass_b <= 0 or hbar <= 0:
            raise ValidationError("masses and hbar must be positive")
        self.dim_a = int(dim_a)
        self.dim_b = int(dim_b)
        self.mass_a = float(mass_a)
        self.mass_b = float(mass_b)
        self.hbar = float(hbar)

    # -- contracts ---------------------------------------------------------
    def _amplitude(self, qa, qb):
        raise NotImplementedError

    def _derivative(self, qa, qb, idx):
        raise NotImplementedError

    def check_point(self, point):
        """Raise DomainError for declared singular zones. Default: none."""

    def max_order(self):
        """Largest supported total derivative order (None = unlimited)."""
        return None

    # -- public API --------------------------------------------------------
    def evaluate(self, point):
        _validate_point(self, point)
        self.check_point(point)
        return complex(self._amplitude(point.q_a, point.q_b))

    def derivative(self, point, idx):
        _validate_point(self, point)
        if len(idx.order_a) != self.dim_a or len(idx.order_b) != self.dim_b:
            raise ValidationError("multi-index does not match state dimensions")
        mo = self.max_order()
        if mo is not None and idx.total > mo:
            raise UnsupportedOrderError(
                f"derivative order {idx.total} exceeds supported order {mo}")
        self.check_point(point)
        if idx.is_zero():
            return complex(self._amplitude(point.q_a, point.q_b))
        return complex(self._derivative(point.q_a, point.q_b, idx))

    def amplitude_outer(self, qa_points, qb_points):
        """psi on the outer product of two point sets: shape (n_a, n_b)."""
        qa = np.asarray(qa_points, dtype=float)
        qb = np.asarray(qb_points, dtype=float)
        qa_big = np.broadcast_to(qa[:, None, :], (qa.shape[0], qb.shape[0], qa.shape[1]))
        qb_big = np.broadcast_to(qb[None, :, :], (qa.shape[0], qb.shape[0], qb.shape[1]))
        return np.asarray(self._amplitude(qa_big, qb_big), dtype=complex)

    def derivative_many(self, qa_points, qb_points, idx):
        """Vectorized mixed partial over broadcast point arrays.

        Skips the singular-zone check; callers integrating over known-good
        domains use this as the hot path.
        """
        qa = np.asarray(qa_points, dtype=float)
        qb = np.asarray(qb_points, dtype=float)
        if idx.is_zero():
            return np.asarray(self._amplitude(qa, qb), dtype=complex)
        return np.asarray(self._derivative(qa, qb, idx), dtype=complex)

    # -- metadata used by quadrature and validity machinery -----------------
    @property
    def char_lengths_a(self):
        return np.ones(self.dim_a)

    @property
    def char_lengths_b(self):
        return np.ones(self.dim_b)

    @property
    def reduced_mass(self):
        return self.mass_a * self.mass_b / (self.mass_a + self.mass_b)

    @property
    def total_mass(self):
        return self.mass_a + self.mass_b

    def is_real(self):
        return False

    def is_normalized(self):
        """True when the full configuration-space L2 norm is 1."""
        return False


class ProductState(BipartiteState):
    """Separable state psi_A(q_A) psi_B(q_B); carries zero entanglement."""

    def __init__(self, factors_a, factors_b, mass_a=1.0, mass_b=1.0, hbar=1.0):
        self.part_a = SeparableFactorPart(factors_a)
        self.part_b = SeparableFactorPart(factors_b)
        super().__init__(self.part_a.dim, self.part_b.dim, mass_a, mass_b, hbar)

    def _amplitude(self, qa, qb):
        return self.part_a.value(qa) * self.part_b.value(qb)

    def _derivative(self, qa, qb, idx):
        return (self.part_a.derivative(qa, idx.order_a)
                * self.part_b.derivative(qb, idx.order_b))

    def amplitude_outer(self, qa_points, qb_points):
        va = self.part_a.value(np.asarray(qa_points, dtype=float))
        vb = self.part_b.value(np.asarray(qb_points, dtype=float))
        return np.multiply.outer(np.asarray(va, dtype=complex),
                                 np.asarray(vb, dtype=complex))

    @property
    def char_lengths_a(self):
        return self.part_a.char_lengths

    @property
    def char_lengths_b(self):
        return self.part_b.char_lengths

    def is_real(self):
        return self.part_a.is_real() and self.part_b.is_real()

    def is_normalized(self):
        return self.part_a.normalized and self.part_b.normalized


def separable_product(factors_a, factors_b, mass_a=1.0, mass_b=1.0, hbar=1.0):
    """Product state from per-axis 1-D factors."""
    return ProductState(factors_a, factors_b, mass_a, mass_b, hbar)


@dataclass(frozen=True)
class GaussianPacketSpec:
    """Center-of-mass Gaussian packet: width R0 and wave numbers per axis."""

    width: float
    wave_numbers: tuple = ()
    center: tuple = ()


@dataclass(frozen=True)
class PlaneWaveSpec:
    """Center-of-mass plane wave with the given wave numbers per axis."""

    wave_numbers: tuple = ()


class ComRelState(BipartiteState):
    """State chi(R) phi(r) in center-of-mass / relative coordinates.

    r_i = q_A,i - q_B,i and R_i = (m_A q_A,i + m_B q_B,i) / M; both particles
    live in the same physical space, so dim_A = dim_B. Mixed q-derivatives
    expand binomially through the linear map:

        d/dq_A,i = d/dr_i + (mu/m_B) d/dR_i
        d/dq_B,i = -d/dr_i + (mu/m_A) d/dR_i
    """

    def __init__(self, rel_part, com_part, mass_a=1.0, mass_b=1.0, hbar=1.0):
        super().__init__(rel_part.dim, rel_part.dim, mass_a, mass_b, hbar)
        if com_part is not None and com_part.dim != rel_part.dim:
            raise ValidationError("COM and relative parts must share a dimension")
        self.rel_part = rel_part
        self.com_part = com_part
        self._ca = self.reduced_mass / self.mass_b   # dR/dq_A
        self._cb = self.reduced_mass / self.mass_a   # dR/dq_B

    # -- coordinate maps ----------------------------------------------------
    def rel_coords(self, qa, qb):
        return np.asarray(qa) - np.asarray(qb)

    def com_coords(self, qa, qb):
        return (self.mass_a * np.asarray(qa) + self.mass_b * np.asarray(qb)) / self.total_mass

    def point_from_com_rel(self, com, rel):
        com = np.atleast_1d(np.asarray(com, dtype=float))
        rel = np.atleast_1d(np.asarray(rel, dtype=float))
        qa = com + (self.mass_b / self.total_mass) * rel
        qb = com - (self.mass_a / self.total_mass) * rel
        return ConfigPoint(qa, qb)

    # -- contracts ----------------------------------------------------------
    def check_point(self, point):
        self.rel_part.check_point(self.rel_coords(point.q_a, point.q_b))

    def max_order(self):
        return self.rel_part.max_order()

    def _amplitude(self, qa, qb):
        r = self.rel_coords(qa, qb)
        v = self.rel_part.value(r)
        if self.com_part is not None:
            v = v * self.com_part.value(self.com_coords(qa, qb))
        return v

    def _derivative(self, qa, qb, idx):
        r = self.rel_coords(qa, qb)
        big_r = self.com_coords(qa, qb)
        dim = self.dim_a
        total = 0.0 + 0.0j
        # per-axis split of d^n_{qA} d^m_{qB} into dR^(k+l) dr^(n+m-k-l)
        axis_terms = []
        for i in range(dim):
            n, m = idx.order_a[i], idx.order_b[i]
            terms = []
            for k in range(n + 1):
                for l in range(m + 1):
                    coef = (math.comb(n, k) * math.comb(m, l)
                            * self._ca ** k * self._cb ** l * (-1.0) ** (m - l))
                    terms.append((coef, k + l, n + m - k - l))
            axis_terms.append(terms)
        import itertools
        for combo in itertools.product(*axis_terms):
            coef = 1.0
            com_orders = []
            rel_orders = []
            for c, kr, kl in combo:
                coef *= c
                com_orders.append(kr)
                rel_orders.append(kl)
            rel_val = self.rel_part.derivative(r, tuple(rel_orders))
            if self.com_part is None:
                com_val = 1.0 if sum(com_orders) == 0 else 0.0
                if sum(com_orders) > 0:
                    continue
            else:
                com_val = self.com_part.derivative(big_r, tuple(com_orders))
            total = total + coef * rel_val * com_val
        return total

    def amplitude_outer(self, qa_points, qb_points):
        qa = np.asarray(qa_points, dtype=float)
        qb = np.asarray(qb_points, dtype=float)
        r = qa[:, None, :] - qb[None, :, :]
        out = np.asarray(self.rel_part.value(r), dtype=complex)
        if self.com_part is not None:
            big_r = (self.mass_a * qa[:, None, :] + self.mass_b * qb[None, :, :]) / self.total_mass
            out = out * self.com_part.value(big_r)
        return out

    # -- metadata -----------------------------------------------------------
    @property
    def char_lengths_a(self):
        rel = self.rel_part.char_lengths
        if self.com_part is None:
            return rel
        return np.minimum(rel, self.com_part.char_lengths)

    @property
    def char_lengths_b(self):
        return self.char_lengths_a

    def is_real(self):
        ok = self.rel_part.is_real()
        if self.com_part is not None:
            ok = ok and self.com_part.is_real()
        return ok

    def is_normalized(self):
        # the (R, r) map has unit Jacobian, so part norms multiply; a missing
        # COM part means free (non-normalizable) COM motion
        if self.com_part is None:
            return False
        return self.rel_part.normalized and self.com_part.normalized

    def rel_log_hessian(self, rel):
        return self.rel_part.log_hessian(rel)

    def com_log_hessian(self, com):
        if self.com_part is None:
            return np.zeros((self.dim_a, self.dim_a), dtype=complex)
        return self.com_part.log_hessian(com)


# --------------------------------------------------------------------------- #
# built-in families
# --------------------------------------------------------------------------- #

class CoupledOscillatorState(ComRelState):
    """Eigenstate of two 1-D oscillators (equal frequency) with a spring
    coupling: H = H_A + H_B + K (x_A + ... ) -> separable in (R, r) with
    R0 = sqrt(hbar/(M omega)) and r0 = sqrt(hbar/(mu Omega)),
    Omega = sqrt(omega^2 + K/mu)."""

    def __init__(self, n_com, n_rel, mass_a=1.0, mass_b=1.0, omega=1.0,
                 coupling=0.0, hbar=1.0):
        if n_com < 0 or n_rel < 0:
            raise ValidationError("quantum numbers must be non-negative")
        if omega <= 0 or coupling < 0:
            raise ValidationError("omega must be positive and coupling non-negative")
        mass_total = mass_a + mass_b
        mu = mass_a * mass_b / mass_total
        omega_rel = math.sqrt(omega * omega + coupling / mu)
        com_len = math.sqrt(hbar / (mass_total * omega))
        rel_len = math.sqrt(hbar / (mu * omega_rel))
        super().__init__(SeparableFactorPart([HermiteFactor(n_rel, rel_len)]),
                         SeparableFactorPart([HermiteFactor(n_com, com_len)]),
                         mass_a, mass_b, hbar)
        self.n_com = int(n_com)
        self.n_rel = int(n_rel)
        self.omega = float(omega)
        self.coupling = float(coupling)
        self.omega_rel = omega_rel
        self.com_length = com_len
        self.rel_length = rel_len


def coupled_oscillator_state(n_com, n_rel, mass_a=1.0, mass_b=1.0, omega=1.0,
                             coupling=0.0, hbar=1.0):
    return CoupledOscillatorState(n_com, n_rel, mass_a, mass_b, omega, coupling, hbar)


def coupled_oscillator_from_lengths(n_com, n_rel, com_length, rel_length,
                                    mass_a=1.0, mass_b=1.0, hbar=1.0):
    """Pin the state by its characteristic lengths instead of (omega, K).

    omega = hbar/(M R0^2) and Omega = hbar/(mu r0^2); requires Omega >= omega
    so that the implied spring constant K = mu (Omega^2 - omega^2) >= 0.
    """
    mass_total = mass_a + mass_b
    mu = mass_a * mass_b / mass_total
    omega = hbar / (mass_total * com_length ** 2)
    omega_rel = hbar / (mu * rel_length ** 2)
    if omega_rel < omega:
        raise ValidationError("rel_length too large: implied coupling is negative")
    coupling = mu * (omega_rel ** 2 - omega ** 2)
    return CoupledOscillatorState(n_com, n_rel, mass_a, mass_b, omega, coupling, hbar)


def _com_part_from_spec(spec, dim):
    if spec is None:
        return None
    if isinstance(spec, PlaneWaveSpec):
        ks = list(spec.wave_numbers) or [0.0] * dim
        if len(ks) != dim:
            raise ValidationError("wave_numbers length must match the dimension")
        return SeparableFactorPart([plane_wave_factor(k) for k in ks])
    if isinstance(spec, GaussianPacketSpec):
        ks = list(spec.wave_numbers) or [0.0] * dim
        cs = list(spec.center) or [0.0] * dim
        if len(ks) != dim or len(cs) != dim:
            raise ValidationError("packet spec lengths must match the dimension")
        return SeparableFactorPart(
            [gaussian_packet_factor(spec.width, c, k) for c, k in zip(cs, ks)])
    raise ValidationError(f"unknown COM spec {spec!r}")


def hydrogen_state(n, l, m, com=None, bohr_radius=1.0,
                   mass_a=ELECTRON_MASS, mass_b=PROTON_MASS, hbar=1.0):
    """Hydrogen-like bound state: relative part phi_nlm, optional COM part.

    Alice's particle is the electron, Bob's the proton. With `com=None` the
    COM motion is ignored (equivalent to a plane wave: zero contribution to
    the local entanglement, and probabilities are per unit COM volume).
    """
    rel = HydrogenRelativePart(n, l, m, bohr_radius)
    return ComRelState(rel, _com_part_from_spec(com, 3), mass_a, mass_b, hbar)


class UserState(BipartiteState):
    """State defined by user callables.

    `amplitude(qa, qb)` must accept arrays with a trailing coordinate axis.
    Supply `derivative(qa, qb, idx)` for analytic partials, or set
    `use_finite_differences=True` to opt into the central-difference fallback.
    """

    def __init__(self, amplitude, dim_a, dim_b, mass_a=1.0, mass_b=1.0,
                 hbar=1.0, derivative=None, use_finite_differences=False,
                 char_lengths_a=None, char_lengths_b=None, real_valued=False,
                 normalized=False):
        super().__init__(dim_a, dim_b, mass_a, mass_b, hbar)
        if derivative is None and not use_finite_differences:
            raise ValidationError(
                "user states need analytic derivatives or use_finite_differences=True")
        self._amp = amplitude
        self._deriv = derivative
        self._use_fd = bool(use_finite_differences)
        self._cla = np.ones(dim_a) if char_lengths_a is None else np.asarray(char_lengths_a, float)
        self._clb = np.ones(dim_b) if char_lengths_b is None else np.asarray(char_lengths_b, float)
        self._real = bool(real_valued)
        self._normalized = bool(normalized)

    def _amplitude(self, qa, qb):
        return self._amp(qa, qb)

    def _derivative(self, qa, qb, idx):
        if self._deriv is not None:
            return self._deriv(qa, qb, idx)
        from .derivatives import fd_derivative
        return fd_derivative(self, ConfigPoint(qa, qb), idx)

    def derivative(self, point, idx):
        _validate_point(self, point)
        self.check_point(point)
        if idx.is_zero():
            return self.evaluate(point)
        if self._deriv is not None:
            return complex(self._deriv(point.q_a, point.q_b, idx))
        from .derivatives import fd_derivative
        return fd_derivative(self, point, idx)

    def derivative_many(self, qa_points, qb_points, idx):
        qa = np.asarray(qa_points, dtype=float)
        qb = np.asarray(qb_points, dtype=float)
        if idx.is_zero() or self._deriv is not None:
            return super().derivative_many(qa_points, qb_points, idx)
        shape = np.broadcast_shapes(qa.shape[:-1], qb.shape[:-1])
        qa = np.broadcast_to(qa, shape + (self.dim_a,))
        qb = np.broadcast_to(qb, shape + (self.dim_b,))
        out = np.empty(shape, dtype=complex)
        from .derivatives import fd_derivative
        for pos in np.ndindex(shape):
            out[pos] = fd_derivative(self, ConfigPoint(qa[pos], qb[pos]), idx)
        return out

    @property
    def char_lengths_a(self):
        return self._cla

    @property
    def char_lengths_b(self):
        return self._clb

    def is_real(self):
        return self._real

    def is_normalized(self):
        return self._normalized
