"""Structural matching between the profile layers, plus linearization checks.

The pieces collected here connect the other modules:

* ``nonexistence_identity`` evaluates the first-integral identity of the
  separable profile ODE along a candidate; for genuine solutions the trace
  is constant, while any candidate vanishing at the support endpoints drives
  the singular term to minus infinity against bounded polynomial terms (the
  contradiction that rules out smooth separable profiles).
* ``predict_amplitude`` carries out the exponent bookkeeping that matches
  the log-travelling-wave factor against the stationary boundary layer. The
  result is a pure counting statement: a double-log amplitude with exponent
  q for the non-divergence models, and no self-similar amplitude correction
  at all for the divergence models (their compactons already exist).
* ``euler_indicial_roots``, ``hermite_spectrum`` and ``phi_expansion`` are
  the local diagnostics of the linearization around the stationary state:
  the indicial quartic at the contact point, the quarter-integer spectrum
  of the fourth-order Hermite operator, and the z^2 ln z correction forced
  by the 1/C1 z^2 source.
* ``reparameterize_time`` and ``amplitude_ode_check`` probe the slow
  amplitude dynamics A' = exp(-A^2) and the induced time variable
  s = int A^2 dtau that the matching argument runs on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .logtw import logtw_law
from .models import ModelSpec, get_model
from .numcore import IvpControls, integrate_at
from .profiles import STATIONARY_PROBLEMS
from .sampling import SampledProfile

__all__ = [
    "AmplitudeLaw",
    "AmplitudeOdeCheck",
    "IdentityTrace",
    "IndicialRoots",
    "PhiExpansion",
    "StructuralMatchingError",
    "TimeReparameterization",
    "amplitude_ode_check",
    "euler_indicial_roots",
    "hermite_spectrum",
    "nonexistence_identity",
    "phi_expansion",
    "predict_amplitude",
    "reparameterize_time",
]

ModelLike = Union[str, ModelSpec]


class StructuralMatchingError(RuntimeError):
    """Spatial factors of the two asymptotic layers failed to agree."""


def _model_spec(model: ModelLike) -> ModelSpec:
    return model if isinstance(model, ModelSpec) else get_model(model)


# ---------------------------------------------------------------------------
# First-integral identity traces.


@dataclass
class IdentityTrace:
    """Pointwise values of a first-integral identity along a candidate.

    ``constant`` is the mean over the interior 90% of the evaluated span (so
    a divergence at the endpoints cannot hide itself in its own average) and
    ``max_deviation`` is measured against it. ``endpoint_contradiction`` is
    set when the identity dips more than 10 below the constant within the
    outer 5% of the span while the polynomial terms stay bounded there: the
    signature of a candidate vanishing at its endpoints.
    """

    model: str
    xs: np.ndarray
    identity_values: np.ndarray
    constant: float
    max_deviation: float
    skipped_points: int
    endpoint_contradiction: bool


_IDENTITY_ROWS = {"RD4": 3, "RD6": 5, "NDE3": 2}


def nonexistence_identity(model: ModelLike, candidate: SampledProfile) -> IdentityTrace:
    """First-integral trace of the separable profile ODE along ``candidate``.

    The identities (one integration of the profile ODE against theta'):

    * 4th order:  1/2 ln|th| + th''' th' - 1/2 th''^2 - 1/2 th^2
    * 6th order:  1/2 ln|th| - th^(5) th' + th^(4) th'' - 1/2 th'''^2 - 1/2 th^2
    * 3rd order:  1/3 / th + th' th'' - int th''^2 + 1/2 th^2

    Grid points where the candidate vanishes exactly are skipped and counted
    in ``skipped_points`` (zero-extension margins around a compact support
    classify cleanly this way); near-vanishing interior values are kept, and
    their divergent singular term is precisely the nonexistence signal.
    The candidate must carry derivative rows up to the order listed above.
    """
    spec = _model_spec(model)
    if spec.name not in _IDENTITY_ROWS:
        raise ValueError(
            f"first-integral identity is registered for RD4, RD6 and NDE3, not {spec.name!r}"
        )
    xs = candidate.xs
    th = candidate.values
    if spec.name == "RD4":
        t1 = candidate.derivative(1)
        t2 = candidate.derivative(2)
        t3 = candidate.derivative(3)
        poly = t3 * t1 - 0.5 * t2**2 - 0.5 * th**2
    elif spec.name == "RD6":
        t1 = candidate.derivative(1)
        t2 = candidate.derivative(2)
        t3 = candidate.derivative(3)
        t4 = candidate.derivative(4)
        t5 = candidate.derivative(5)
        poly = -t5 * t1 + t4 * t2 - 0.5 * t3**2 - 0.5 * th**2
    else:
        t1 = candidate.derivative(1)
        t2 = candidate.derivative(2)
        poly = t1 * t2 - cumulative_trapezoid(t2**2, xs, initial=0.0) + 0.5 * th**2

    keep = th != 0.0
    skipped = int(np.sum(~keep))
    if not np.any(keep):
        raise ValueError("candidate vanishes at every grid point")
    xs_eval = xs[keep]
    poly_eval = poly[keep]
    with np.errstate(divide="ignore"):
        if spec.name == "NDE3":
            singular = (1.0 / 3.0) / th[keep]
        else:
            singular = 0.5 * np.log(np.abs(th[keep]))
    identity = singular + poly_eval

    span = xs_eval[-1] - xs_eval[0]
    bulk = (xs_eval >= xs_eval[0] + 0.05 * span) & (xs_eval <= xs_eval[-1] - 0.05 * span)
    if not np.any(bulk):
        bulk = np.ones_like(bulk)
    constant = float(np.mean(identity[bulk]))
    max_deviation = float(np.max(np.abs(identity - constant)))

    poly_bound = 10.0 * (1.0 + float(np.max(np.abs(poly_eval[bulk]))))
    outer = ~bulk
    contradiction = bool(
        np.any((identity[outer] < constant - 10.0) & (np.abs(poly_eval[outer]) <= poly_bound))
    )
    return IdentityTrace(
        model=spec.name,
        xs=xs_eval,
        identity_values=identity,
        constant=constant,
        max_deviation=max_deviation,
        skipped_points=skipped,
        endpoint_contradiction=contradiction,
    )


# ---------------------------------------------------------------------------
# Amplitude-law bookkeeping.


@dataclass(frozen=True)
class AmplitudeLaw:
    """Predicted slow amplitude A(t) in front of the stationary profile.

    ``log_log`` means A(t) grows like [ln|ln(T-t)|]^exponent with the given
    coefficient; ``none_self_similar`` means the model needs no amplitude
    correction because a genuine self-similar (compacton) profile exists.
    """

    model: str
    kind: str
    exponent: Optional[Fraction]
    coefficient: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("log_log", "none_self_similar"):
            raise ValueError(f"unknown amplitude-law kind {self.kind!r}")
        if (self.exponent is None) != (self.kind == "none_self_similar"):
            raise ValueError("exponent must be present exactly for log_log laws")


# Stationary threshold problem sharing the spatial operator of each
# non-divergence model; the wave model reuses the fourth-order problem.
_THRESHOLD_PARTNER = {2: "RD2", 3: "NDE3", 4: "RD4", 6: "RD6"}


def predict_amplitude(model: ModelLike) -> AmplitudeLaw:
    """Match the log-TW factor against the boundary layer of the profile.

    Divergence-form models return ``none_self_similar``. For the others the
    spatial factor (-eta)^p of the log-travelling-wave law must reproduce
    the contact order k of the stationary profile (p = k is what lets the
    wave glue onto the boundary layer); with the spatial factors matched,
    the temporal factors force the amplitude exponent to equal the law's
    log-power q. The travelling-wave speed drops out entirely, which is why
    this function takes no speed parameter.
    """
    spec = _model_spec(model)
    if spec.divergence_form:
        return AmplitudeLaw(model=spec.name, kind="none_self_similar", exponent=None)
    law = logtw_law(spec.name)
    partner = STATIONARY_PROBLEMS[_THRESHOLD_PARTNER[spec.spatial_order]]
    contact_order = len(partner.bc_right)
    if law.power != contact_order:
        raise StructuralMatchingError(
            f"log-TW spatial power {law.power} does not reproduce the boundary-layer "
            f"contact order {contact_order} for {spec.name}"
        )
    return AmplitudeLaw(model=spec.name, kind="log_log", exponent=law.log_power)


# ---------------------------------------------------------------------------
# Indicial analysis at the contact point.


@dataclass(frozen=True)
class IndicialRoots:
    """Roots m of C1^2 m(m-1)(m-2)(m-3) + lambda = 0.

    Each complex-conjugate pair is reported once in ``oscillation_pairs`` as
    (a, b) = (Re m, |Im m|), the exponents of the oscillatory local solution
    (L0 - x)^a sin(b ln(L0 - x)).
    """

    roots: Tuple[complex, ...]
    oscillation_pairs: Tuple[Tuple[float, float], ...]

    @property
    def oscillatory(self) -> bool:
        return bool(self.oscillation_pairs)


def euler_indicial_roots(contact_coefficient: float, eigenvalue: float) -> IndicialRoots:
    """Indicial roots of the Euler operator frozen at the contact point."""
    c1 = float(contact_coefficient)
    if c1 == 0.0:
        raise ValueError("contact coefficient C1 must be nonzero")
    lam = float(eigenvalue)
    if lam == 0.0:
        roots = np.array([0.0 + 0.0j, 1.0 + 0.0j, 2.0 + 0.0j, 3.0 + 0.0j])
    else:
        c2 = c1 * c1
        roots = np.roots([c2, -6.0 * c2, 11.0 * c2, -6.0 * c2, lam])
    # Repeated real roots come back from the companion solver with O(sqrt(eps))
    # conjugate noise; snap those to the real axis before classifying so a
    # degenerate quartic is not mistaken for an oscillatory one.
    tol = 1e-7 * max(1.0, float(np.max(np.abs(roots))))
    roots = np.where(np.abs(roots.imag) <= tol, roots.real + 0.0j, roots)
    roots = roots[np.lexsort((roots.imag, roots.real))]
    pairs = tuple(
        (float(r.real), float(r.imag)) for r in roots if r.imag > tol
    )
    return IndicialRoots(roots=tuple(complex(r) for r in roots), oscillation_pairs=pairs)


def hermite_spectrum(k: int) -> float:
    """Eigenvalue -k/4 of the fourth-order Hermite operator, k = 0, 1, 2, ..."""
    if k < 0:
        raise ValueError("mode number k must be a nonnegative integer")
    return -0.25 * float(k)


# ---------------------------------------------------------------------------
# Singular expansion of the linearized correction.


@dataclass(frozen=True)
class PhiExpansion:
    """Leading behaviour of the correction Phi near the contact z = L0 - x.

    The equation -Phi'''' + Phi = -1/(C1 z^2) forces the non-regular term
    ``log_coefficient`` * z^2 ln z: its fourth derivative is exactly
    -2 log_coefficient / z^2, which cancels the source, while the remaining
    regular terms carry the free constants listed in ``free_constants``
    (undetermined at this order; they would come from further matching).
    """

    contact_coefficient: float
    log_coefficient: float
    free_constants: Tuple[str, ...] = ("A1", "A2", "A3", "A4")

    def leading_derivatives(self, z: np.ndarray) -> np.ndarray:
        """Rows Phi, Phi', ..., Phi'''' of the z^2 ln z term."""
        z = np.asarray(z, dtype=np.float64)
        c = self.log_coefficient
        ln = np.log(z)
        return np.stack(
            [
                c * z * z * ln,
                c * (2.0 * z * ln + z),
                c * (2.0 * ln + 3.0),
                c * 2.0 / z,
                -c * 2.0 / (z * z),
            ]
        )

    def substitution_residual(self, z: np.ndarray) -> np.ndarray:
        """Relative residual of -Phi'''' + Phi = -1/(C1 z^2) for the term alone."""
        rows = self.leading_derivatives(z)
        source = -1.0 / (self.contact_coefficient * np.asarray(z, dtype=np.float64) ** 2)
        return np.abs(-rows[4] + rows[0] - source) / np.abs(source)


def phi_expansion(contact_coefficient: float) -> PhiExpansion:
    """Coefficient of the z^2 ln z correction forced by the 1/(C1 z^2) source."""
    c1 = float(contact_coefficient)
    if c1 <= 0.0:
        raise ValueError("contact coefficient C1 must be positive")
    coefficient = -1.0 / (2.0 * c1)
    # Cancellation check: (z^2 ln z)'''' = -2/z^2, so the source is matched
    # exactly when 2 * coefficient * C1 = -1.
    if abs(2.0 * coefficient * c1 + 1.0) > 1e-12:
        raise AssertionError("substitution check failed; coefficient formula is wrong")
    return PhiExpansion(contact_coefficient=c1, log_coefficient=coefficient)


# ---------------------------------------------------------------------------
# Slow time and the amplitude ODE.


@dataclass
class TimeReparameterization:
    taus: np.ndarray
    amplitudes: np.ndarray
    s_values: np.ndarray
    terminal_ratio: float


def reparameterize_time(taus: np.ndarray, amplitudes: np.ndarray) -> TimeReparameterization:
    """Slow time s = int A^2 dtau by the trapezoidal rule.

    ``terminal_ratio`` reports s_end / (tau_end ln tau_end), the diagnostic
    the matching argument cares about (it tends to 1 when A^2 ~ ln tau).
    """
    taus = np.asarray(taus, dtype=np.float64)
    amplitudes = np.asarray(amplitudes, dtype=np.float64)
    if taus.shape != amplitudes.shape or taus.ndim != 1 or taus.size < 2:
        raise ValueError("need matching 1-D tau and amplitude traces with at least 2 samples")
    if np.any(np.diff(taus) <= 0.0):
        raise ValueError("tau samples must be strictly monotone increasing")
    if np.any(amplitudes <= 0.0):
        raise ValueError("amplitude samples must be positive")
    s = cumulative_trapezoid(amplitudes**2, taus, initial=0.0)
    tau_end = float(taus[-1])
    ratio = float(s[-1] / (tau_end * math.log(tau_end))) if tau_end > 1.0 else math.nan
    return TimeReparameterization(
        taus=taus, amplitudes=amplitudes, s_values=s, terminal_ratio=ratio
    )


@dataclass
class AmplitudeOdeCheck:
    taus: np.ndarray
    amplitudes: np.ndarray
    s_values: np.ndarray
    mu_values: np.ndarray
    mu_slope_ratios: np.ndarray
    terminal_amplitude: float
    terminal_ratio: float

    @property
    def mu_decay_verified(self) -> bool:
        r = self.mu_slope_ratios
        return bool(np.all(np.diff(r) < 0.0) and r[-1] < 1e-3)


def _amplitude_rhs(t, y, params):
    return np.array([math.exp(-y[0] * y[0])])


def amplitude_ode_check(tau_max: float, n_samples: int = 1025) -> AmplitudeOdeCheck:
    """Integrate the rough amplitude law A' = exp(-A^2), A(1) = 1.

    Reports the terminal ratio A / sqrt(ln tau) together with the induced
    slow-time trace and mu = 1/(2 A^2): the matching ansatz needs mu
    positive, decreasing, and slowly varying (|mu'(s)| << |mu(s)|), all of
    which the returned object exposes for assertion.
    """
    if tau_max < 1e3:
        raise ValueError("tau_max must be at least 1e3 for the asymptotics to set in")
    taus = np.geomspace(1.0, float(tau_max), n_samples)
    controls = IvpControls(rel_tol=1e-11, abs_tol=1e-13)
    states = integrate_at(_amplitude_rhs, taus, np.array([1.0]), None, controls)
    amplitudes = states[:, 0]
    s = cumulative_trapezoid(amplitudes**2, taus, initial=0.0)
    mu = 0.5 / amplitudes**2
    dmu = np.gradient(mu, s)
    ratios = np.abs(dmu) / mu
    return AmplitudeOdeCheck(
        taus=taus,
        amplitudes=amplitudes,
        s_values=s,
        mu_values=mu,
        mu_slope_ratios=ratios,
        terminal_amplitude=float(amplitudes[-1]),
        terminal_ratio=float(amplitudes[-1] / math.sqrt(math.log(float(tau_max)))),
    )
