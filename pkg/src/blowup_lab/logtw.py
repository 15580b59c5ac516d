"""Log-travelling waves: reduced profile ODEs and their far-field growth laws.

Writing u = (T - t)^(-alpha) g(eta) with eta = x + lam * ln(T - t) and keeping
only the degenerate diffusion balance leaves a reduced autonomous ODE in g,

    parabolic / dispersive:  c g - lam g' = sign * g^sigma * g^(k)
    wave:           2 g - 3 lam g' + lam^2 g'' = sign * g^sigma * g^(k)

whose receding tail (s = -eta -> +infinity) grows like

    g(eta) ~ a * s^p * (ln s)^q,   p = k / sigma,  q = 1 / sigma,

with the amplitude pinned by the leading balance. A second term
a * kappa * s^p * (ln s)^(q-1) * ln ln s cancels the next order. The terms are
kept as exact (coefficient, power, power, power) tuples so derivatives of any
order are available without finite differencing, which is what makes residual
checks at s = 1e6 meaningful.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ._accel import jit_kernel
from .numcore import IvpControls, IvpResult, integrate_ivp

# c * s**s_pow * (ln s)**l_pow * (ln ln s)**n_pow
Term = Tuple[float, Fraction, Fraction, int]


@dataclass(frozen=True)
class LogTwOde:
    model: str
    sigma: int
    order: int
    diffusion_sign: int
    rate_constant: Fraction
    wave_form: bool


_ODES: Dict[str, LogTwOde] = {
    o.model: o
    for o in (
        LogTwOde("RD2", 2, 2, +1, Fraction(1, 2), False),
        LogTwOde("RD4", 2, 4, -1, Fraction(1, 2), False),
        LogTwOde("RD6", 2, 6, +1, Fraction(1, 2), False),
        LogTwOde("QWE4", 2, 4, -1, Fraction(2), True),
        LogTwOde("NDE3", 3, 3, +1, Fraction(1, 3), False),
    )
}

LOGTW_MODELS: Tuple[str, ...] = tuple(_ODES)


def logtw_ode(model: str) -> LogTwOde:
    try:
        return _ODES[model]
    except KeyError:
        raise KeyError(
            f"no log-travelling-wave reduction for {model!r}; available: {', '.join(LOGTW_MODELS)}"
        ) from None


def differentiate_terms(terms: Sequence[Term]) -> List[Term]:
    """Exact d/ds on a sum of c * s^a * (ln s)^b * (ln ln s)^g terms."""
    acc: Dict[Tuple[Fraction, Fraction, int], float] = {}

    def add(c: float, a: Fraction, b: Fraction, g: int) -> None:
        if c != 0.0:
            key = (a, b, g)
            acc[key] = acc.get(key, 0.0) + c

    for c, a, b, g in terms:
        add(c * float(a), a - 1, b, g)
        add(c * float(b), a - 1, b - 1, g)
        if g > 0:
            add(c * g, a - 1, b - 1, g - 1)
    return [(c, a, b, g) for (a, b, g), c in acc.items() if c != 0.0]


def evaluate_terms(terms: Sequence[Term], s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if np.any(s <= 1.0):
        raise ValueError("terms are defined for s > 1 (so ln s > 0)")
    ls = np.log(s)
    lls = np.log(ls)
    out = np.zeros_like(s)
    for c, a, b, g in terms:
        out += c * s ** float(a) * ls ** float(b) * lls**g
    return out


@dataclass(frozen=True)
class AsymptoticLaw:
    model: str
    amplitude: float
    amplitude_power_sigma: Fraction  # exact value of amplitude**sigma
    power: int  # p
    log_power: Fraction  # q
    correction: Fraction  # kappa multiplying (ln s)^(q-1) * ln ln s
    harmonic_sum: Fraction  # S over the derivative index chain
    chain_product: int  # P over the same chain
    n_terms: int

    def terms(self, amplitude_factor: float = 1.0) -> List[Term]:
        a = self.amplitude * amplitude_factor
        p = Fraction(self.power)
        out: List[Term] = [(a, p, self.log_power, 0)]
        if self.n_terms == 2 and self.correction != 0:
            out.append((a * float(self.correction), p, self.log_power - 1, 1))
        return out

    def evaluate(self, eta: np.ndarray, amplitude_factor: float = 1.0) -> np.ndarray:
        eta = np.asarray(eta, dtype=np.float64)
        if np.any(eta >= -1.0):
            raise ValueError("the growth law applies on the receding side eta < -1")
        return evaluate_terms(self.terms(amplitude_factor), -eta)


def logtw_law(model: str, n_correction_terms: int = 1) -> AsymptoticLaw:
    """Far-field growth law of the reduced log-travelling-wave ODE.

    ``n_correction_terms`` selects the plain power-log leading term (1) or
    adds the ln ln s correction (2). Higher truncations are not implemented.
    """
    if n_correction_terms not in (1, 2):
        raise ValueError("n_correction_terms must be 1 or 2")
    ode = logtw_ode(model)
    k, sigma = ode.order, ode.sigma
    if k % sigma != 0:
        raise ValueError(f"{model}: tail power k/sigma = {k}/{sigma} is not an integer")
    p = k // sigma
    q = Fraction(1, sigma)
    chain = [m for m in range(p - k + 1, p + 1) if m != 0]
    chain_product = math.prod(chain)
    harmonic = sum((Fraction(1, m) for m in chain), Fraction(0))
    b_factor = ode.diffusion_sign * (-1) ** k * chain_product
    amp_sigma = ode.rate_constant / (b_factor * q)
    if amp_sigma <= 0:
        raise ArithmeticError(f"{model}: amplitude balance gives non-positive a^sigma = {amp_sigma}")
    amplitude = float(amp_sigma) ** (1.0 / sigma)
    kappa = harmonic * q * (1 - q)
    return AsymptoticLaw(
        model,
        amplitude,
        amp_sigma,
        p,
        q,
        kappa,
        harmonic,
        chain_product,
        n_correction_terms,
    )


def logtw_residual(
    model: str,
    eta: np.ndarray,
    n_correction_terms: int = 1,
    lam: float = 1.0,
    amplitude_factor: float = 1.0,
) -> np.ndarray:
    """Relative reduced-ODE residual of the growth law at the given eta < -1.

    All derivatives of the ansatz are exact, so this measures the law itself,
    not a discretization. ``amplitude_factor`` scales the leading coefficient
    (useful to show a detuned amplitude leaves an O(1) defect).
    """
    law = logtw_law(model, n_correction_terms)
    ode = logtw_ode(model)
    eta = np.atleast_1d(np.asarray(eta, dtype=np.float64))
    s = -eta
    terms = law.terms(amplitude_factor)
    ds: List[List[Term]] = [list(terms)]
    for _ in range(ode.order):
        ds.append(differentiate_terms(ds[-1]))
    # eta-derivative of order j is (-1)^j times the s-derivative.
    g = evaluate_terms(ds[0], s)
    g1 = -evaluate_terms(ds[1], s)
    gk = (-1.0) ** ode.order * evaluate_terms(ds[ode.order], s)
    c = float(ode.rate_constant)
    if ode.wave_form:
        g2 = evaluate_terms(ds[2], s)
        lhs = 2.0 * g - 3.0 * lam * g1 + lam * lam * g2
    else:
        lhs = c * g - lam * g1
    rhs = ode.diffusion_sign * g**ode.sigma * gk
    return (lhs - rhs) / (c * np.abs(g))


def _logtw_rhs(t, y, params):
    c = params[0]
    lam = params[1]
    sigma = params[2]
    sign = params[3]
    wave = params[4]
    n = y.shape[0]
    out = np.empty(n)
    for i in range(n - 1):
        out[i] = y[i + 1]
    if wave != 0.0:
        num = 2.0 * y[0] - 3.0 * lam * y[1] + lam * lam * y[2]
    else:
        num = c * y[0] - lam * y[1]
    out[n - 1] = num / (sign * y[0] ** sigma)
    return out


logtw_rhs = jit_kernel(_logtw_rhs)


def integrate_logtw(
    model: str,
    eta_start: float,
    eta_end: float,
    lam: float = 1.0,
    n_correction_terms: int = 2,
    controls: IvpControls = None,
) -> Tuple[IvpResult, np.ndarray]:
    """Integrate the reduced ODE from law-generated far-field data.

    Starts at ``eta_start`` (deep in the tail) with g, g', ... taken from the
    exact term expansion and integrates to ``eta_end``. Returns the orbit and
    the law's prediction on the orbit nodes for comparison.
    """
    ode = logtw_ode(model)
    law = logtw_law(model, n_correction_terms)
    if not eta_start < eta_end <= -1.0:
        raise ValueError("need eta_start < eta_end <= -1 on the receding side")
    terms = law.terms()
    ds: List[List[Term]] = [list(terms)]
    for _ in range(ode.order - 1):
        ds.append(differentiate_terms(ds[-1]))
    s0 = np.array([-eta_start])
    y0 = np.array([(-1.0) ** j * evaluate_terms(ds[j], s0)[0] for j in range(ode.order)])
    params = (
        float(ode.rate_constant),
        lam,
        float(ode.sigma),
        float(ode.diffusion_sign),
        1.0 if ode.wave_form else 0.0,
    )
    ctl = controls if controls is not None else IvpControls(rel_tol=1e-10, abs_tol=1e-10)
    res = integrate_ivp(logtw_rhs, (eta_start, eta_end), y0, params, ctl)
    predicted = law.evaluate(res.ts)
    return res, predicted
