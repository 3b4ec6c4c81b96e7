"""Panel Gauss-Legendre quadrature on radial intervals."""

from __future__ import annotations

import numpy as np

_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(n: int):
    if n not in _CACHE:
        _CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _CACHE[n]


def panel_nodes(a: float, b: float, breakpoints=(), max_panel: float = 0.5,
                n_nodes: int = 24):
    """Gauss nodes/weights on [a, b], split at breakpoints and to max_panel.

    Breakpoints outside (a, b) are ignored.  Returns (nodes, weights) as
    flat arrays; exact for polynomials of degree < 2 n_nodes per panel.
    """
    if b <= a:
        return np.array([]), np.array([])
    pts = [a, b]
    for p in breakpoints:
        if a < p < b:
            pts.append(float(p))
    pts = sorted(set(pts))
    x0, w0 = _gauss(n_nodes)
    nodes, weights = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        nsub = max(1, int(np.ceil((hi - lo) / max_panel)))
        edges = np.linspace(lo, hi, nsub + 1)
        for e0, e1 in zip(edges[:-1], edges[1:]):
            half = 0.5 * (e1 - e0)
            mid = 0.5 * (e0 + e1)
            nodes.append(mid + half * x0)
            weights.append(half * w0)
    return np.concatenate(nodes), np.concatenate(weights)
