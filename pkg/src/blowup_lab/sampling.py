"""Sampled 1-D profiles shared by the profile, shooting and evolution layers.

A :class:`SampledProfile` is a function on a strictly increasing grid with
optional exact derivative rows, optional compact-support endpoints, refined
sign-change positions and a free-form map of named scalars. Derivative rows
are stored per order so producers with closed forms (or integrator state)
can hand exact values downstream instead of forcing finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np


@dataclass
class SampledProfile:
    xs: np.ndarray
    values: np.ndarray
    derivative_values: Dict[int, np.ndarray] = field(default_factory=dict)
    support: Optional[Tuple[float, float]] = None
    sign_changes: Optional[np.ndarray] = None
    metadata: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.xs = np.asarray(self.xs, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.xs.ndim != 1 or self.xs.size < 2:
            raise ValueError("profile grid needs at least two points")
        if self.xs.shape != self.values.shape:
            raise ValueError("grid and values must have matching shapes")
        if not np.all(np.diff(self.xs) > 0.0):
            raise ValueError("profile grid must be strictly increasing")
        for order, row in self.derivative_values.items():
            row = np.asarray(row, dtype=np.float64)
            if row.shape != self.xs.shape:
                raise ValueError(f"derivative row {order} does not match the grid")
            self.derivative_values[order] = row
        if self.support is not None:
            lo, hi = self.support
            if not (self.xs[0] <= lo < hi <= self.xs[-1]):
                raise ValueError(
                    f"support ({lo:.6g}, {hi:.6g}) must lie inside the grid "
                    f"[{self.xs[0]:.6g}, {self.xs[-1]:.6g}]"
                )

    @property
    def n_points(self) -> int:
        return int(self.xs.size)

    def derivative(self, order: int) -> np.ndarray:
        """Stored derivative row; order 0 is the values themselves."""
        if order == 0:
            return self.values
        try:
            return self.derivative_values[order]
        except KeyError:
            raise KeyError(
                f"profile carries derivative orders {sorted(self.derivative_values)}, "
                f"not {order}"
            ) from None

    def grid_spacing(self) -> float:
        """Common spacing of a uniform grid; error when the grid is not uniform."""
        d = np.diff(self.xs)
        h = float(d[0])
        if not np.allclose(d, h, rtol=1e-9, atol=0.0):
            raise ValueError("grid is not uniform")
        return h


def crossing_positions(xs: np.ndarray, values: np.ndarray, level: float = 0.0) -> np.ndarray:
    """Linear-interpolated positions where ``values`` crosses ``level``.

    Counts strict sign changes of ``values - level`` between adjacent nodes;
    nodes sitting exactly on the level do not produce crossings on their own.
    """
    xs = np.asarray(xs, dtype=np.float64)
    g = np.asarray(values, dtype=np.float64) - level
    s = np.sign(g)
    idx = np.nonzero(s[:-1] * s[1:] < 0.0)[0]
    if idx.size == 0:
        return np.empty(0)
    x0, x1 = xs[idx], xs[idx + 1]
    g0, g1 = g[idx], g[idx + 1]
    return x0 - g0 * (x1 - x0) / (g1 - g0)
