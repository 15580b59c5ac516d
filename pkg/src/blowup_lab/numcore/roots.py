"""Bracketed scalar root finding (bisection with secant/inverse-quadratic steps)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

_EPS = float(np.finfo(float).eps)


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise BracketError(f"non-finite bracket ({self.lo}, {self.hi})")
        if not self.lo < self.hi:
            raise BracketError(f"degenerate bracket ({self.lo}, {self.hi})")


@dataclass
class RootResult:
    root: float
    residual: float
    iterations: int
    function_calls: int
    converged: bool


def find_root(
    f: Callable[[float], float],
    bracket: Bracket,
    rtol: float = 4.0 * _EPS,
    atol: float = 1e-14,
    max_iter: int = 120,
) -> RootResult:
    """Find a root of ``f`` inside ``bracket``.

    Brent-style iteration: keeps a guaranteed sign-change interval, tries
    secant / inverse-quadratic steps and falls back to bisection whenever the
    fast step is not clearly shrinking the interval. Raises
    :class:`BracketError` when ``f(lo)`` and ``f(hi)`` do not differ in sign.
    """
    if rtol < _EPS:
        raise ValueError("rtol below machine precision is unsatisfiable")
    xpre, xcur = bracket.lo, bracket.hi
    fpre, fcur = f(xpre), f(xcur)
    calls = 2
    if not (np.isfinite(fpre) and np.isfinite(fcur)):
        raise BracketError("f is not finite at a bracket endpoint")
    if fpre == 0.0:
        return RootResult(xpre, 0.0, 0, calls, True)
    if fcur == 0.0:
        return RootResult(xcur, 0.0, 0, calls, True)
    if fpre * fcur > 0.0:
        raise BracketError(
            f"no sign change on ({bracket.lo}, {bracket.hi}): "
            f"f(lo)={fpre:.3e}, f(hi)={fcur:.3e}"
        )

    xblk, fblk = 0.0, 0.0
    spre = scur = 0.0
    for it in range(1, max_iter + 1):
        if fpre * fcur < 0.0:
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur, xblk = xcur, xblk, xcur
            fpre, fcur, fblk = fcur, fblk, fcur

        delta = 0.5 * (atol + rtol * abs(xcur))
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0.0 or abs(sbis) < delta:
            return RootResult(xcur, fcur, it, calls, True)

        if abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - delta):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis

        xpre, fpre = xcur, fcur
        if abs(scur) > delta:
            xcur += scur
        else:
            xcur += delta if sbis > 0.0 else -delta
        fcur = f(xcur)
        calls += 1
        if not np.isfinite(fcur):
            raise BracketError(f"f returned a non-finite value at x={xcur!r}")

    return RootResult(xcur, fcur, max_iter, calls, False)


def bisect_root(
    f: Callable[[float], float],
    bracket: Bracket,
    xtol: float = 1e-13,
    max_iter: int = 200,
) -> float:
    """Plain bisection. Slow but assumption-free; used for cross checks."""
    lo, hi = bracket.lo, bracket.hi
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketError(f"no sign change on ({lo}, {hi})")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < xtol or mid in (lo, hi):
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)
