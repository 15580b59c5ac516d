"""Stationary threshold profiles with compact support.

The degenerate multiplier in each model makes stationary states solve a
*linear* constant-coefficient ODE inside the support, glued to zero outside
with as many vanishing derivatives as the order allows:

* RD2:   f'' + f = 0,      f(+-L) = 0                     (simple contact)
* RD4:   -f'''' + f = 0,   f(+-L) = f'(+-L) = 0           (double contact)
* RD6:   f^(6) + f = 0,    f(+-L) = f'(+-L) = f''(+-L) = 0 (triple contact)
* NDE3:  f''' + f = 0,     f(-L) = f'(-L) = 0, f(L) = 0   (asymmetric)

The support half-length L0 is the smallest L > 0 admitting a nontrivial
solution; it is located as a root of the boundary-condition determinant built
from an explicit exponential basis, so profiles and all their derivatives are
available in closed form.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Tuple, Union

import numpy as np

from .numcore import Bracket, RootResult, find_root
from .numcore.fitting import fit_power_log
from .sampling import SampledProfile

_SUPPORTED = ("RD2", "RD4", "RD6", "NDE3")


@dataclass(frozen=True)
class StationaryProblem:
    """Linear contact problem: ODE order plus endpoint derivative orders pinned to zero."""

    model: str
    ode_order: int
    bc_left: Tuple[int, ...]
    bc_right: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bc_left) + len(self.bc_right) != self.ode_order:
            raise ValueError(
                f"{self.model}: {len(self.bc_left)} + {len(self.bc_right)} boundary "
                f"conditions cannot pin an order-{self.ode_order} ODE"
            )


STATIONARY_PROBLEMS: Dict[str, StationaryProblem] = {
    "RD2": StationaryProblem("RD2", 2, (0,), (0,)),
    "RD4": StationaryProblem("RD4", 4, (0, 1), (0, 1)),
    "RD6": StationaryProblem("RD6", 6, (0, 1, 2), (0, 1, 2)),
    "NDE3": StationaryProblem("NDE3", 3, (0, 1), (0,)),
}

ProblemLike = Union[str, StationaryProblem]


def _model_name(problem: ProblemLike) -> str:
    name = problem.model if isinstance(problem, StationaryProblem) else problem
    _require_supported(name)
    return name

# Scan windows for the smallest nontrivial support half-length. The lower
# ends sit above the trivial L -> 0 degeneracy of each determinant.
_SCAN_WINDOWS: Dict[str, Tuple[float, float]] = {
    "RD4": (0.5 * np.pi + 1e-9, np.pi - 1e-9),
    "RD6": (0.5 * np.pi, 3.0 * np.pi),
    "NDE3": (0.5, 3.0 * np.pi),
}


def _require_supported(model: str) -> None:
    if model not in _SUPPORTED:
        raise ValueError(
            f"no compactly supported stationary problem registered for {model!r}; "
            f"available: {', '.join(_SUPPORTED)}"
        )


# ---------------------------------------------------------------------------
# Exponential bases. Each returns shape (orders, nbasis, nx).


def _basis_rd4(x: np.ndarray, max_order: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty((max_order + 1, 2, x.size))
    for j in range(max_order + 1):
        c = [np.cos, lambda z: -np.sin(z), lambda z: -np.cos(z), np.sin][j % 4]
        out[j, 0] = c(x)
        out[j, 1] = np.cosh(x) if j % 2 == 0 else np.sinh(x)
    return out


def _basis_rd2(x: np.ndarray, max_order: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty((max_order + 1, 1, x.size))
    for j in range(max_order + 1):
        c = [np.cos, lambda z: -np.sin(z), lambda z: -np.cos(z), np.sin][j % 4]
        out[j, 0] = c(x)
    return out


def _basis_rd6(x: np.ndarray, max_order: int) -> np.ndarray:
    # Even solutions of f^(6) = -f: cos(x) plus real/imaginary parts of
    # cosh(m x) with m = exp(i pi / 6), m^6 = -1.
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    m = cmath.exp(1j * np.pi / 6.0)
    out = np.empty((max_order + 1, 3, x.size))
    mx = m * x
    for j in range(max_order + 1):
        c = [np.cos, lambda z: -np.sin(z), lambda z: -np.cos(z), np.sin][j % 4]
        out[j, 0] = c(x)
        w = (m**j) * (np.cosh(mx) if j % 2 == 0 else np.sinh(mx))
        out[j, 1] = w.real
        out[j, 2] = w.imag
    return out


def _basis_nde3(x: np.ndarray, max_order: int) -> np.ndarray:
    # Solutions of f''' = -f: exp(-x) plus real/imaginary parts of
    # exp(m x) with m = exp(i pi / 3), m^3 = -1.
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    m = cmath.exp(1j * np.pi / 3.0)
    out = np.empty((max_order + 1, 3, x.size))
    ex = np.exp(-x)
    emx = np.exp(m * x)
    for j in range(max_order + 1):
        out[j, 0] = (-1.0) ** j * ex
        w = (m**j) * emx
        out[j, 1] = w.real
        out[j, 2] = w.imag
    return out


_BASES = {"RD2": _basis_rd2, "RD4": _basis_rd4, "RD6": _basis_rd6, "NDE3": _basis_nde3}

# (contact order at left endpoint, at right endpoint)
_CONTACT_ORDERS: Dict[str, Tuple[int, int]] = {
    "RD2": (1, 1),
    "RD4": (2, 2),
    "RD6": (3, 3),
    "NDE3": (2, 1),
}


def _bc_matrix(model: str, length: float) -> np.ndarray:
    """Square matrix whose kernel holds the basis coefficients at contact."""
    if model == "RD4":
        b = _basis_rd4(np.array([length]), 1)
        return np.array([[b[0, 0, 0], b[0, 1, 0]], [b[1, 0, 0], b[1, 1, 0]]])
    if model == "RD6":
        b = _basis_rd6(np.array([length]), 2)
        return np.array([[b[j, i, 0] for i in range(3)] for j in range(3)])
    if model == "NDE3":
        bl = _basis_nde3(np.array([-length]), 1)
        br = _basis_nde3(np.array([length]), 0)
        return np.array(
            [
                [bl[0, i, 0] for i in range(3)],
                [bl[1, i, 0] for i in range(3)],
                [br[0, i, 0] for i in range(3)],
            ]
        )
    raise ValueError(model)


def _det3(a: np.ndarray) -> float:
    if a.shape == (2, 2):
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


@dataclass
class ThresholdResult:
    model: str
    length: float
    determinant_residual: float
    characteristic_residual: float
    root: RootResult


def threshold_length(problem: ProblemLike) -> ThresholdResult:
    """Smallest support half-length admitting a nontrivial contact solution."""
    model = _model_name(problem)
    if model == "RD2":
        length = 0.5 * np.pi
        return ThresholdResult(
            model,
            length,
            0.0,
            abs(float(np.cos(length))),
            RootResult(length, 0.0, 0, 0, True),
        )

    if model == "RD4":
        # det = sin(L) cosh(L) + cos(L) sinh(L); no poles, unlike the
        # equivalent tan(L) = -tanh(L) form.
        def det_fn(length: float) -> float:
            return float(np.sin(length) * np.cosh(length) + np.cos(length) * np.sinh(length))

        lo, hi = _SCAN_WINDOWS["RD4"]
        root = find_root(det_fn, Bracket(lo, hi), rtol=4e-16)
        length = root.root
        char = abs(float(np.tan(length) + np.tanh(length)))
        return ThresholdResult(model, length, abs(det_fn(length)), char, root)

    def det_fn(length: float) -> float:
        return _det3(_bc_matrix(model, length))

    lo, hi = _SCAN_WINDOWS[model]
    grid = np.linspace(lo, hi, 2001)
    vals = np.array([det_fn(s) for s in grid])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if idx.size == 0:
        raise RuntimeError(f"no determinant sign change for {model} in ({lo}, {hi})")
    i = idx[0]
    root = find_root(det_fn, Bracket(float(grid[i]), float(grid[i + 1])), rtol=4e-16)
    length = root.root
    return ThresholdResult(model, length, abs(det_fn(length)), abs(det_fn(length)), root)


@dataclass
class StationaryProfile:
    model: str
    length: float
    basis_coefficients: np.ndarray
    contact_order_left: int
    contact_order_right: int
    contact_coefficient_left: float
    contact_coefficient_right: float
    bc_residual: float

    def derivatives(self, x: np.ndarray, max_order: int = 0) -> np.ndarray:
        """Rows f, f', ... on ``x``; zero-extended outside the support."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        basis = _BASES[self.model](x, max_order)
        vals = np.einsum("b,jbn->jn", self.basis_coefficients, basis)
        outside = (x < -self.length) | (x > self.length)
        vals[:, outside] = 0.0
        return vals

    def evaluate(self, x: np.ndarray, order: int = 0) -> np.ndarray:
        return self.derivatives(x, order)[order]

    @property
    def center_value(self) -> float:
        return float(self.evaluate(np.array([0.0]))[0])


def stationary_state(problem: ProblemLike) -> StationaryProfile:
    """Closed-form threshold profile on [-L0, L0], zero outside."""
    model = _model_name(problem)
    length = threshold_length(model).length

    if model == "RD2":
        coeffs = np.array([1.0])
    elif model == "RD4":
        big = _basis_rd4(np.array([length]), 1)
        ratio = -big[0, 0, 0] / big[0, 1, 0]  # cosh-coefficient from f(L) = 0
        other = float(np.sin(length) / np.sinh(length))  # same ratio via f'(L) = 0
        if abs(ratio - other) > 1e-9:
            raise RuntimeError(
                "internal consistency: the two contact relations disagree on the "
                f"cosh coefficient ({ratio!r} vs {other!r})"
            )
        coeffs = np.array([1.0, ratio])
    elif model == "RD6":
        b = _basis_rd6(np.array([length]), 2)
        sub = np.array([[b[j, i, 0] for i in (1, 2)] for j in (0, 1)])
        rhs = -np.array([b[0, 0, 0], b[1, 0, 0]])
        c23 = np.linalg.solve(sub, rhs)
        coeffs = np.array([1.0, c23[0], c23[1]])
    else:  # NDE3
        bl = _basis_nde3(np.array([-length]), 1)
        sub = np.array([[bl[j, i, 0] for i in (1, 2)] for j in (0, 1)])
        rhs = -np.array([bl[0, 0, 0], bl[1, 0, 0]])
        c23 = np.linalg.solve(sub, rhs)
        coeffs = np.array([1.0, c23[0], c23[1]])

    kl, kr = _CONTACT_ORDERS[model]
    basis_l = _BASES[model](np.array([-length]), max(kl, kr))
    basis_r = _BASES[model](np.array([length]), max(kl, kr))
    dl = np.einsum("b,jbn->jn", coeffs, basis_l)[:, 0]
    dr = np.einsum("b,jbn->jn", coeffs, basis_r)[:, 0]

    # Orientation. The even-contact profiles keep a positive center value
    # (the f(0) = 1 + C convention); the transversal right contact of NDE3
    # instead takes a positive slope there, so the local form is C1 (x - L0)
    # with C1 > 0 and the adjacent hump is negative.
    if model == "NDE3":
        flip = dr[1] < 0.0
    else:
        basis_origin = _BASES[model](np.array([0.0]), 0)
        flip = float(np.einsum("b,jbn->jn", coeffs, basis_origin)[0, 0]) < 0.0
    if flip:
        coeffs, dl, dr = -coeffs, -dl, -dr

    # Inward Taylor coefficients: f ~ c (x + L0)^k at the left endpoint and
    # f ~ c (L0 - x)^k at the right one.
    c_left = dl[kl] / math.factorial(kl)
    c_right = (-1.0) ** kr * dr[kr] / math.factorial(kr)

    bc_res = max(abs(dl[j]) for j in range(kl)) if kl > 0 else 0.0
    bc_res = max(bc_res, max(abs(dr[j]) for j in range(kr)) if kr > 0 else 0.0)

    return StationaryProfile(
        model,
        length,
        coeffs,
        kl,
        kr,
        float(c_left),
        float(c_right),
        float(bc_res),
    )


def stationary_profile(
    problem: ProblemLike,
    normalization: str = "value_at_origin",
    grid_points: int = 2001,
) -> SampledProfile:
    """Threshold profile sampled on a uniform grid with a zero margin.

    ``value_at_origin`` keeps the oscillatory basis coefficient at one, the
    convention in which the center value reads 1 + C for the fourth-order
    problem.  ``unit_C1`` rescales so the right contact coefficient is one,
    which is the natural gauge when matching inner expansions.
    """
    if grid_points < 3:
        raise ValueError("need at least 3 grid points")
    state = stationary_state(problem)
    scale = 1.0
    if normalization == "unit_C1":
        # Magnitude only: normalization must not reorient the profile.
        scale = 1.0 / abs(state.contact_coefficient_right)
    elif normalization != "value_at_origin":
        raise ValueError(f"unknown normalization {normalization!r}")

    length = state.length
    xs = np.linspace(-1.15 * length, 1.15 * length, grid_points)
    max_order = max(2, state.contact_order_left, state.contact_order_right)
    rows = scale * state.derivatives(xs, max_order)

    metadata = {
        "L0": length,
        "C1": scale * abs(state.contact_coefficient_right),
        "f0": scale * state.center_value,
    }
    if state.model == "RD4":
        metadata["C"] = float(state.basis_coefficients[1] / state.basis_coefficients[0])
    if state.contact_order_left != state.contact_order_right:
        metadata["C1_left"] = scale * state.contact_coefficient_left

    return SampledProfile(
        xs=xs,
        values=rows[0],
        derivative_values={j: rows[j] for j in range(1, max_order + 1)},
        support=(-length, length),
        sign_changes=np.empty(0),
        metadata=metadata,
    )


class ContactExpansion(NamedTuple):
    exponent: int
    coefficient: float


def boundary_layer_coefficient(profile: SampledProfile, endpoint: float) -> ContactExpansion:
    """Leading inward Taylor behavior f ~ C |x - endpoint|^k from samples alone.

    The integer order k comes from a log-log fit over a short inward window;
    the coefficient is then refined by a polynomial fit of f / s^k in the
    inward distance s, which suppresses the higher Taylor terms that bias the
    raw log-log coefficient.
    """
    xs = profile.xs
    if not xs[0] <= endpoint <= xs[-1]:
        raise ValueError(f"endpoint {endpoint} outside the sampled grid")
    if profile.support is not None:
        width = 0.5 * (profile.support[1] - profile.support[0])
    else:
        width = 0.5 * (xs[-1] - xs[0])

    # Inward distance: positive toward the bulk of the grid.
    inward = 1.0 if endpoint < 0.5 * (xs[0] + xs[-1]) else -1.0
    s = inward * (xs - endpoint)
    # The inner cutoff stays well clear of the contact point: there f is a
    # small difference of order-one basis terms, so its relative roundoff
    # grows like s^(-k) and would pollute the extrapolation below.
    window = 0.02 * width
    for _ in range(8):
        mask = (s >= 5e-3 * width) & (s <= window) & (profile.values != 0.0)
        if np.count_nonzero(mask) >= 10:
            break
        window *= 2.0
    else:
        raise ValueError("too few samples adjacent to the endpoint")

    fit = fit_power_log(s[mask], np.abs(profile.values[mask]))
    k = int(round(fit.exponent))
    if k < 1 or abs(fit.exponent - k) > 0.15 or fit.rms_log_residual > 0.05:
        raise ValueError(
            "no clean leading power at the endpoint "
            f"(exponent {fit.exponent:.3f}, rms {fit.rms_log_residual:.2e})"
        )

    row = profile.derivative_values.get(k)
    if row is not None:
        # The k-th derivative does not vanish at contact, so extrapolating it
        # carries none of the cancellation noise of the raw values there.
        cap = 0.02 * width
        for _ in range(6):
            sel = (s >= 0.0) & (s <= cap) & (row != 0.0)
            if np.count_nonzero(sel) >= 8:
                break
            cap *= 2.0
        if np.count_nonzero(sel) >= 8:
            poly = np.polynomial.Polynomial.fit(s[sel], inward**k * row[sel], 5)
            return ContactExpansion(k, float(poly(0.0)) / math.factorial(k))

    reduced = profile.values[mask] / s[mask] ** k
    degree = min(7, reduced.size - 3)
    poly = np.polynomial.Polynomial.fit(s[mask], reduced, degree)
    return ContactExpansion(k, float(poly(0.0)))
