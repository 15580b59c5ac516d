"""Band-matrix storage and LU solves with partial pivoting.

Storage follows the usual diagonal-ordered convention: ``ab[nu + i - j, j]``
holds ``A[i, j]`` for ``-nu <= i - j <= nl``. Factorization works in an
expanded buffer with ``nl`` extra super-diagonal rows so row swaps cannot
fall off the band.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import NUMBA_ENABLED, jit_kernel


class SingularBandedError(ArithmeticError):
    """Elimination hit a zero pivot column."""


def _band_lu_factor(work, n, nl, nu, ipiv):
    # work has shape (2*nl + nu + 1, n); entry A[i, j] sits at
    # work[kv + i - j, j] with kv = nl + nu. Returns 1 + the column index of
    # a vanishing pivot, or 0 on success.
    kv = nl + nu
    ju = 0
    for j in range(n):
        kmax = min(nl, n - 1 - j)
        jp = 0
        amax = abs(work[kv, j])
        for k in range(1, kmax + 1):
            v = abs(work[kv + k, j])
            if v > amax:
                amax = v
                jp = k
        ipiv[j] = j + jp
        if amax == 0.0:
            return j + 1
        ju_new = j + nu + jp
        if ju_new > n - 1:
            ju_new = n - 1
        if ju_new > ju:
            ju = ju_new
        if jp != 0:
            for c in range(j, ju + 1):
                r1 = kv + j - c
                r2 = kv + j + jp - c
                tmp = work[r1, c]
                work[r1, c] = work[r2, c]
                work[r2, c] = tmp
        pivot = work[kv, j]
        for k in range(1, kmax + 1):
            work[kv + k, j] /= pivot
        for c in range(j + 1, ju + 1):
            u = work[kv + j - c, c]
            if u != 0.0:
                for k in range(1, kmax + 1):
                    work[kv + k + j - c, c] -= work[kv + k, j] * u
    return 0


def _band_lu_solve(work, n, nl, nu, ipiv, b):
    kv = nl + nu
    for j in range(n - 1):
        jp = ipiv[j]
        if jp != j:
            tmp = b[jp]
            b[jp] = b[j]
            b[j] = tmp
        kmax = min(nl, n - 1 - j)
        bj = b[j]
        for k in range(1, kmax + 1):
            b[j + k] -= work[kv + k, j] * bj
    for j in range(n - 1, -1, -1):
        b[j] /= work[kv, j]
        xj = b[j]
        kmin = min(kv, j)
        for k in range(1, kmin + 1):
            b[j - k] -= work[kv - k, j] * xj
    return b


_band_lu_factor_jit = jit_kernel(_band_lu_factor)
_band_lu_solve_jit = jit_kernel(_band_lu_solve)


@dataclass
class BandedMatrix:
    nl: int
    nu: int
    ab: np.ndarray  # (nl + nu + 1, n) diagonal-ordered bands

    def __post_init__(self):
        self.ab = np.asarray(self.ab, dtype=np.float64)
        if self.nl < 0 or self.nu < 0:
            raise ValueError("bandwidths must be non-negative")
        if self.ab.ndim != 2 or self.ab.shape[0] != self.nl + self.nu + 1:
            raise ValueError(
                f"band storage must have {self.nl + self.nu + 1} rows, got shape {self.ab.shape}"
            )

    @property
    def n(self) -> int:
        return self.ab.shape[1]

    @classmethod
    def from_dense(cls, a: np.ndarray, nl: int, nu: int) -> "BandedMatrix":
        a = np.asarray(a, dtype=np.float64)
        n = a.shape[0]
        ab = np.zeros((nl + nu + 1, n))
        for i in range(n):
            for j in range(max(0, i - nl), min(n, i + nu + 1)):
                ab[nu + i - j, j] = a[i, j]
        return cls(nl, nu, ab)

    def to_dense(self) -> np.ndarray:
        n = self.n
        a = np.zeros((n, n))
        for j in range(n):
            for i in range(max(0, j - self.nu), min(n, j + self.nl + 1)):
                a[i, j] = self.ab[self.nu + i - j, j]
        return a

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        n = self.n
        out = np.zeros(n)
        for d in range(-self.nl, self.nu + 1):
            row = self.nu - d
            if d >= 0:
                out[: n - d] += self.ab[row, d:] * x[d:]
            else:
                out[-d:] += self.ab[row, : n + d] * x[: n + d]
        return out


def solve_banded(bm: BandedMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve ``A x = rhs`` for band-stored ``A``. Raises on singular columns."""
    b = np.array(rhs, dtype=np.float64, copy=True)
    n = bm.n
    if b.shape != (n,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({n},)")
    work = np.zeros((2 * bm.nl + bm.nu + 1, n))
    work[bm.nl :, :] = bm.ab
    ipiv = np.zeros(n, dtype=np.int64)
    factor = _band_lu_factor_jit if NUMBA_ENABLED else _band_lu_factor
    solve = _band_lu_solve_jit if NUMBA_ENABLED else _band_lu_solve
    info = factor(work, n, bm.nl, bm.nu, ipiv)
    if info != 0:
        raise SingularBandedError(f"zero pivot in column {int(info) - 1}")
    solve(work, n, bm.nl, bm.nu, ipiv, b)
    if not np.all(np.isfinite(b)):
        raise SingularBandedError("solve produced non-finite entries")
    return b
