"""Explicit Runge-Kutta 5(4) initial value solver.

The stepping loop is written once as a plain function over float64 arrays and
compiled with numba when the acceleration layer is active. orbit data is
accumulated in growable buffers; first-component stop conditions (escape above
a magnitude, drop below a floor) end the run without error since the shooting
drivers use them as legitimate outcomes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .._accel import NUMBA_ENABLED, jit_kernel

# Dormand-Prince tableau (FSAL). The last error weight belongs to the k7
# stage, which doubles as k1 of the following step once accepted.
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_SAFETY = 0.9
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0

STATUS_REACHED_END = 0
STATUS_ESCAPE = 1
STATUS_FLOOR = 2
STATUS_UNDERFLOW = 3
STATUS_NONFINITE = 4
STATUS_MAX_STEPS = 5

_STATUS_LABELS = {
    STATUS_REACHED_END: "reached_end",
    STATUS_ESCAPE: "escape",
    STATUS_FLOOR: "floor",
    STATUS_UNDERFLOW: "underflow",
    STATUS_NONFINITE: "nonfinite",
    STATUS_MAX_STEPS: "max_steps",
}


def _rk45_core(
    rhs,
    params,
    t0,
    t1,
    y0,
    rel_tol,
    abs_tol,
    h_init,
    min_step,
    max_step,
    max_steps,
    stop_max_abs,
    stop_floor,
    use_escape,
    use_floor,
):
    n = y0.shape[0]
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)

    cap = 512
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ts[0] = t0
    ys[0, :] = y0
    count = 1

    t = t0
    y = y0.copy()
    k1 = rhs(t, y, params)
    for i in range(n):
        if not np.isfinite(k1[i]):
            return STATUS_NONFINITE, ts[:count], ys[:count], 0, 0, 0.0

    # Starting step (curvature probe) unless the caller pinned one.
    if h_init > 0.0:
        h = h_init
    else:
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            sc = abs_tol + rel_tol * abs(y[i])
            d0 += (y[i] / sc) ** 2
            d1 += (k1[i] / sc) ** 2
        d0 = np.sqrt(d0 / n)
        d1 = np.sqrt(d1 / n)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6 * max(span, 1.0)
        else:
            h0 = 0.01 * d0 / d1
        yp = y + h0 * direction * k1
        kp = rhs(t + h0 * direction, yp, params)
        d2 = 0.0
        for i in range(n):
            sc = abs_tol + rel_tol * abs(y[i])
            d2 += ((kp[i] - k1[i]) / sc) ** 2
        d2 = np.sqrt(d2 / n) / h0
        dm = max(d1, d2)
        if dm > 1e-15:
            h1 = (0.01 / dm) ** 0.2
        else:
            h1 = max(1e-6, h0 * 1e-3)
        h = min(100.0 * h0, h1)
    h = min(h, max_step, span)
    if h <= 0.0:
        h = min(1e-6, span)
    # Never start below the smallest step the loop will accept; a span shorter
    # than min_step is covered in one clipped step instead of underflowing.
    if h < min_step:
        h = min(min_step, span)

    err_prev = 1.0
    n_acc = 0
    n_rej = 0
    attempts = 0
    status = STATUS_REACHED_END

    y2 = np.empty(n)
    y3 = np.empty(n)
    y4 = np.empty(n)
    y5 = np.empty(n)
    y6 = np.empty(n)
    ynew = np.empty(n)

    while (t1 - t) * direction > 0.0:
        if attempts >= max_steps:
            status = STATUS_MAX_STEPS
            break
        attempts += 1

        remaining = abs(t1 - t)
        last = False
        h_pref = h
        if h >= remaining:
            h = remaining
            last = True
        if h < min_step and not last:
            status = STATUS_UNDERFLOW
            break

        hd = h * direction
        for i in range(n):
            y2[i] = y[i] + hd * _A21 * k1[i]
        k2 = rhs(t + _C2 * hd, y2, params)
        for i in range(n):
            y3[i] = y[i] + hd * (_A31 * k1[i] + _A32 * k2[i])
        k3 = rhs(t + _C3 * hd, y3, params)
        for i in range(n):
            y4[i] = y[i] + hd * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        k4 = rhs(t + _C4 * hd, y4, params)
        for i in range(n):
            y5[i] = y[i] + hd * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        k5 = rhs(t + _C5 * hd, y5, params)
        for i in range(n):
            y6[i] = y[i] + hd * (
                _A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i]
            )
        k6 = rhs(t + hd, y6, params)
        for i in range(n):
            ynew[i] = y[i] + hd * (
                _B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i]
            )
        k7 = rhs(t + hd, ynew, params)

        err = 0.0
        finite = True
        for i in range(n):
            if not np.isfinite(ynew[i]):
                finite = False
                break
            sc = abs_tol + rel_tol * max(abs(y[i]), abs(ynew[i]))
            ei = hd * (
                _E1 * k1[i]
                + _E3 * k3[i]
                + _E4 * k4[i]
                + _E5 * k5[i]
                + _E6 * k6[i]
                + _E7 * k7[i]
            )
            err += (ei / sc) ** 2
        if finite:
            err = np.sqrt(err / n)
            finite = np.isfinite(err)

        if not finite:
            n_rej += 1
            h *= 0.25
            if h < min_step:
                status = STATUS_NONFINITE
                break
            continue

        if err <= 1.0:
            n_acc += 1
            t = t1 if last else t + hd
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if count == cap:
                cap *= 2
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, n))
                ts2[:count] = ts[:count]
                ys2[:count] = ys[:count]
                ts = ts2
                ys = ys2
            ts[count] = t
            ys[count, :] = y
            count += 1

            if err == 0.0:
                fac = 10.0
            else:
                fac = _SAFETY * err ** (-_PI_ALPHA) * err_prev ** _PI_BETA
                if fac > 10.0:
                    fac = 10.0
                elif fac < 0.2:
                    fac = 0.2
            # Grow from the controller's preferred step, not from a final step
            # clipped to the sliver left before t1; otherwise the carried step
            # can collapse when segments are chained back to back.
            if last:
                h = h_pref
            h = min(h * fac, max_step)
            err_prev = max(err, 1e-4)

            if use_escape and abs(y[0]) >= stop_max_abs:
                status = STATUS_ESCAPE
                break
            if use_floor and y[0] <= stop_floor:
                status = STATUS_FLOOR
                break
        else:
            n_rej += 1
            fac = _SAFETY * err ** (-0.2)
            if fac < 0.1:
                fac = 0.1
            elif fac > 0.9:
                fac = 0.9
            h *= fac
            if h < min_step:
                status = STATUS_UNDERFLOW
                break

    return status, ts[:count], ys[:count], n_acc, n_rej, h


_rk45_jit = jit_kernel(_rk45_core)


class IvpError(RuntimeError):
    """Integration failed; the partial orbit is attached as ``.partial``."""

    def __init__(self, message: str, partial: "IvpResult"):
        super().__init__(message)
        self.partial = partial


@dataclass
class IvpControls:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    initial_step: float = 0.0
    min_step: float = 0.0
    max_step: float = np.inf
    max_steps: int = 1_000_000


@dataclass
class IvpResult:
    ts: np.ndarray
    ys: np.ndarray
    status: str
    n_accepted: int
    n_rejected: int
    last_step: float

    @property
    def y_end(self) -> np.ndarray:
        return self.ys[-1]

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])


def _is_dispatcher(func) -> bool:
    return hasattr(func, "py_func") and hasattr(func, "signatures")


def integrate_ivp(
    rhs: Callable,
    span: Tuple[float, float],
    y0: Sequence[float],
    params: Optional[Sequence[float]] = None,
    controls: Optional[IvpControls] = None,
    stop_max_abs: float = 0.0,
    stop_floor: Optional[float] = None,
) -> IvpResult:
    """Integrate ``y' = rhs(t, y, params)`` over ``span``.

    ``rhs`` takes ``(t, y, params)`` with ``y`` and ``params`` float64 arrays
    and returns the derivative array. When numba acceleration is active and
    ``rhs`` is a compiled dispatcher the whole stepping loop runs jitted;
    otherwise the identical source runs as plain Python.

    ``stop_max_abs > 0`` ends the run with status ``"escape"`` once
    ``|y[0]|`` reaches it; ``stop_floor`` ends with ``"floor"`` once
    ``y[0]`` falls to or below it. Both count as successful outcomes.
    Underflow of the step size, non-finite values and step exhaustion raise
    :class:`IvpError` carrying the partial orbit.
    """
    t0, t1 = float(span[0]), float(span[1])
    yv = np.asarray(y0, dtype=np.float64).copy()
    if yv.ndim != 1 or yv.size == 0:
        raise ValueError("y0 must be a non-empty 1-d sequence")
    pv = np.asarray(params if params is not None else (), dtype=np.float64)
    ctl = controls if controls is not None else IvpControls()
    if t0 == t1:
        res = IvpResult(np.array([t0]), yv.reshape(1, -1), "reached_end", 0, 0, 0.0)
        return res

    min_step = ctl.min_step
    if min_step <= 0.0:
        scale = max(abs(t0), abs(t1), abs(t1 - t0))
        min_step = 32.0 * np.finfo(float).eps * scale

    use_escape = stop_max_abs > 0.0
    use_floor = stop_floor is not None
    floor_val = float(stop_floor) if use_floor else 0.0

    core = _rk45_jit if (NUMBA_ENABLED and _is_dispatcher(rhs)) else _rk45_core
    status, ts, ys, n_acc, n_rej, h_last = core(
        rhs,
        pv,
        t0,
        t1,
        yv,
        float(ctl.rel_tol),
        float(ctl.abs_tol),
        float(ctl.initial_step),
        float(min_step),
        float(ctl.max_step),
        int(ctl.max_steps),
        float(stop_max_abs),
        floor_val,
        use_escape,
        use_floor,
    )
    result = IvpResult(
        np.array(ts), np.array(ys), _STATUS_LABELS[int(status)], int(n_acc), int(n_rej), float(h_last)
    )
    if result.status in ("underflow", "nonfinite", "max_steps"):
        raise IvpError(
            f"integration stopped with status {result.status!r} at t={result.t_end:.6g}",
            result,
        )
    return result


def integrate_at(
    rhs: Callable,
    nodes: Sequence[float],
    y0: Sequence[float],
    params: Optional[Sequence[float]] = None,
    controls: Optional[IvpControls] = None,
) -> np.ndarray:
    """Solution values at prescribed monotone ``nodes`` (first node = start).

    Runs the adaptive solver segment by segment so every requested node is hit
    exactly; the step size carries over between segments. Returns an array of
    shape ``(len(nodes), len(y0))``.
    """
    xs = np.asarray(nodes, dtype=np.float64)
    if xs.ndim != 1 or xs.size < 2:
        raise ValueError("need at least two nodes")
    d = np.diff(xs)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("nodes must be strictly monotone")
    ctl = controls if controls is not None else IvpControls()
    out = np.empty((xs.size, len(y0)))
    out[0] = np.asarray(y0, dtype=np.float64)
    y = out[0].copy()
    h_carry = ctl.initial_step
    eps_gap = 64.0 * np.finfo(float).eps * float(np.max(np.abs(xs)))
    for j in range(xs.size - 1):
        if abs(xs[j + 1] - xs[j]) <= eps_gap:
            # Nodes indistinguishable at integration precision share the state.
            out[j + 1] = y
            continue
        seg_ctl = IvpControls(
            rel_tol=ctl.rel_tol,
            abs_tol=ctl.abs_tol,
            initial_step=h_carry,
            min_step=ctl.min_step,
            max_step=ctl.max_step,
            max_steps=ctl.max_steps,
        )
        res = integrate_ivp(rhs, (xs[j], xs[j + 1]), y, params, seg_ctl)
        y = res.y_end.copy()
        h_carry = min(res.last_step, abs(xs[j + 1] - xs[j])) if res.last_step > 0 else 0.0
        out[j + 1] = y
    return out
