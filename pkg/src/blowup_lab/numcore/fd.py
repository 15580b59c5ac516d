"""Finite-difference derivative weights on arbitrary nodes (Fornberg recursion)."""
from __future__ import annotations

import numpy as np


def fd_weights(nodes: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Weights w with sum(w * f(nodes)) ~ f^(order)(x0)."""
    nodes = np.asarray(nodes, dtype=np.float64)
    n = nodes.size
    if order < 0 or n <= order:
        raise ValueError(f"need more than {order} nodes for derivative order {order}")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def central_fd(values: np.ndarray, h: float, order: int, accuracy: int = 4) -> np.ndarray:
    """Interior central finite differences; edge entries are NaN.

    The symmetric stencil uses half-width (order + accuracy) // 2, giving at
    least ``accuracy``-order convergence on uniform grids.
    """
    values = np.asarray(values, dtype=np.float64)
    if order == 0:
        return values.copy()
    hw = (order + accuracy) // 2
    if values.size < 2 * hw + 1:
        raise ValueError(f"need at least {2 * hw + 1} samples for order {order}")
    offsets = np.arange(-hw, hw + 1, dtype=np.float64)
    w = fd_weights(offsets, 0.0, order) / h**order
    out = np.full_like(values, np.nan)
    acc = np.zeros(values.size - 2 * hw)
    for k, wk in enumerate(w):
        acc += wk * values[k : values.size - 2 * hw + k]
    out[hw:-hw] = acc
    return out


def derivative_table(values: np.ndarray, h: float, max_order: int, accuracy: int = 4) -> np.ndarray:
    """Rows f, f', ..., f^(max_order) by central differences (NaN edges)."""
    out = np.empty((max_order + 1, np.asarray(values).size))
    out[0] = values
    for m in range(1, max_order + 1):
        out[m] = central_fd(values, h, m, accuracy)
    return out
