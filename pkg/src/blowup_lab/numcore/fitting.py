"""Least-squares fits of power laws with optional logarithmic corrections."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PowerLogFit:
    model: str  # "pure_power" or "power_log"
    coefficient: float
    exponent: float
    log_exponent: float
    rms_log_residual: float
    n_points: int

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = self.coefficient * x**self.exponent
        if self.model == "power_log":
            out = out * np.abs(np.log(x)) ** self.log_exponent
        return out


def fit_power_log(
    xs: np.ndarray,
    ys: np.ndarray,
    with_log_factor: bool = False,
    fixed_exponent: float | None = None,
) -> PowerLogFit:
    """Fit ``y = c * x**p`` or ``y = c * x**p * |ln x|**q`` in log space.

    ``xs`` must be positive and strictly monotone, ``ys`` positive, with at
    least four samples. The logarithmic-factor model additionally needs the
    whole window on one side of ``x = 1`` so ``|ln x|`` stays away from zero.
    ``fixed_exponent`` pins ``p`` instead of fitting it; with the log factor
    active this removes the near-collinearity of ``ln x`` and ``ln |ln x|``
    over narrow windows, which otherwise lets the exponent soak up part of
    the logarithmic growth.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if xs.size < 4:
        raise ValueError(f"need at least 4 points, got {xs.size}")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("fit window must be strictly positive in x and y")
    d = np.diff(xs)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("xs must be strictly monotone")

    lx = np.log(xs)
    ly = np.log(ys)
    if fixed_exponent is not None:
        ly = ly - fixed_exponent * lx
    if with_log_factor:
        if not (np.all(xs > 1.0 + 1e-9) or np.all(xs < 1.0 - 1e-9)):
            raise ValueError("log-factor fit needs all x on one side of 1")
        cols = [np.ones_like(lx), np.log(np.abs(lx))]
    else:
        cols = [np.ones_like(lx)]
    if fixed_exponent is None:
        cols.insert(1, lx)
    design = np.column_stack(cols)
    if design.shape[1] == 1:
        coef = np.array([float(np.mean(ly))])
        rank = 1
    else:
        coef, _, rank, _ = np.linalg.lstsq(design, ly, rcond=None)
    if rank < design.shape[1]:
        raise ValueError("degenerate fit window (rank-deficient design)")
    resid = ly - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    p = fixed_exponent if fixed_exponent is not None else float(coef[1])
    q = float(coef[-1]) if with_log_factor else 0.0
    return PowerLogFit(
        "power_log" if with_log_factor else "pure_power",
        float(np.exp(coef[0])),
        float(p),
        q,
        rms,
        xs.size,
    )
