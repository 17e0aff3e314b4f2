import numpy as np
import pytest
import sympy as sp

from localent.states import UserState


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_exp_state(poly_terms, dim_a=1, dim_b=1, mass_a=1.0, mass_b=1.0,
                   char=1.0, real_valued=None):
    """UserState psi = exp(P) with P polynomial, exact sympy derivatives.

    poly_terms maps ((a-orders...), (b-orders...)) -> coefficient (complex ok).
    """
    xs = sp.symbols(f"x0:{dim_a}", real=True)
    ys = sp.symbols(f"y0:{dim_b}", real=True)
    poly = 0
    for (oa, ob), c in poly_terms.items():
        term = sp.sympify(c)
        for v, k in zip(xs, oa):
            term *= v ** k
        for v, k in zip(ys, ob):
            term *= v ** k
        poly += term
    expr = sp.exp(poly)
    cache = {}

    def lam(idx_a, idx_b):
        key = (idx_a, idx_b)
        if key not in cache:
            e = expr
            for v, k in zip(xs, idx_a):
                e = sp.diff(e, v, k)
            for v, k in zip(ys, idx_b):
                e = sp.diff(e, v, k)
            cache[key] = sp.lambdify(xs + ys, e, "numpy")
        return cache[key]

    def split(qa, qb):
        qa = np.asarray(qa)
        qb = np.asarray(qb)
        return tuple(qa[..., i] for i in range(dim_a)) + tuple(qb[..., j] for j in range(dim_b))

    def amplitude(qa, qb):
        return lam((0,) * dim_a, (0,) * dim_b)(*split(qa, qb))

    def derivative(qa, qb, idx):
        return lam(idx.order_a, idx.order_b)(*split(qa, qb))

    if real_valued is None:
        real_valued = all(abs(complex(sp.sympify(c)).imag) == 0.0
                          for c in poly_terms.values())
    return UserState(amplitude, dim_a, dim_b, mass_a, mass_b,
                     derivative=derivative, char_lengths_a=np.full(dim_a, char),
                     char_lengths_b=np.full(dim_b, char), real_valued=real_valued)


GENERIC_1x1 = {
    ((2,), (0,)): "-1/2", ((0,), (2,)): "-2/5", ((1,), (1,)): "3/10",
    ((2,), (1,)): "1/10", ((1,), (2,)): "-1/20", ((2,), (2,)): "1/30",
    ((1,), (0,)): "1/7", ((0,), (1,)): "1/11",
}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, CRITERIA
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(CRITERIA):
        state, detail = RESULTS.get(num, ("NOT RUN", ""))
        terminalreporter.write_line(
            f"criterion {num:>2} [{state}] {CRITERIA[num]}" + (f" -- {detail}" if detail else ""))
