"""Gauss-Legendre quadrature helpers (nodes, panels, tensor grids)."""

import numpy as np

from .errors import QuadratureError

_GL_CACHE = {}


def gl_nodes(order):
    """Nodes and weights on [-1, 1], cached."""
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def gl_interval(lo, hi, order):
    """Nodes and weights on [lo, hi]."""
    x, w = gl_nodes(order)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def gl_panels(breaks, order):
    """Composite rule: `order`-point Gauss-Legendre on each panel.

    `breaks` is an increasing sequence of panel edges.
    """
    xs, ws = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        x, w = gl_interval(lo, hi, order)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def uniform_panels(lo, hi, n_panels):
    return np.linspace(lo, hi, n_panels + 1)


def tensor_grid(axes):
    """Flattened tensor-product grid.

    `axes` is a list of (nodes, weights) pairs; returns (points, weights)
    with points of shape (N, ndim) and weights of shape (N,).
    """
    node_list = [a[0] for a in axes]
    weight_list = [a[1] for a in axes]
    mesh = np.meshgrid(*node_list, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    w = weight_list[0]
    for wi in weight_list[1:]:
        w = np.multiply.outer(w, wi)
    return pts, w.ravel()


def integrate_checked(f, breaks, order, rtol, name="integral"):
    """1-D panel quadrature with a refinement convergence check.

    Evaluates with `order` and `3*order//2` points per panel; raises
    QuadratureError if the two estimates disagree beyond rtol (relative
    to the refined value, with a small absolute floor).
    """
    x1, w1 = gl_panels(breaks, order)
    x2, w2 = gl_panels(breaks, max(order + 2, 3 * order // 2))
    v1 = np.sum(w1 * f(x1))
    v2 = np.sum(w2 * f(x2))
    scale = max(abs(v2), 1e-300)
    if abs(v1 - v2) > rtol * scale + 1e-15:
        raise QuadratureError(f"{name}: panel refinement changed the result by "
                              f"{abs(v1 - v2) / scale:.3e} (rtol={rtol:g})")
    return v2
