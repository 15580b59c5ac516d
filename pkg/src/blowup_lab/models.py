"""Model registry: the quasilinear equations, their exponents and separable forms.

Each entry describes one evolution equation u_t (or u_tt) = A(u) whose
blow-up envelope is (T - t)^(-alpha) and whose separable profile theta
solves  A(theta) = c * theta  with the rate constant c listed below.
Divergence-form entries also carry a pointwise rescaling theta = b * F^p
that removes the constants from the profile equation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Tuple

import numpy as np

Derivs = np.ndarray  # shape (max_order + 1, n): rows are theta, theta', ...


@dataclass(frozen=True)
class ModelSpec:
    name: str
    family: str  # "parabolic" | "wave" | "dispersive"
    spatial_order: int
    alpha: Fraction
    nonlinearity_power: int
    divergence_form: bool
    rate_constant: Fraction
    equation: str
    separable_equation: str


_REGISTRY_ROWS: Tuple[ModelSpec, ...] = (
    ModelSpec(
        "RD2", "parabolic", 2, Fraction(1, 2), 2, False, Fraction(1, 2),
        "u_t = u^2 (u_xx + u)",
        "th^2 (th'' + th) = th/2",
    ),
    ModelSpec(
        "RD2_DIV", "parabolic", 2, Fraction(1, 2), 3, True, Fraction(1, 2),
        "u_t = (u^3)_xx + u^3",
        "(th^3)'' + th^3 = th/2",
    ),
    ModelSpec(
        "RD4", "parabolic", 4, Fraction(1, 2), 2, False, Fraction(1, 2),
        "u_t = u^2 (-u_xxxx + u)",
        "th^2 (-th'''' + th) = th/2",
    ),
    ModelSpec(
        "RD6", "parabolic", 6, Fraction(1, 2), 2, False, Fraction(1, 2),
        "u_t = u^2 (u_xxxxxx + u)",
        "th^2 (th^(6) + th) = th/2",
    ),
    ModelSpec(
        "PME4", "parabolic", 4, Fraction(1, 2), 3, True, Fraction(1, 2),
        "u_t = -(u^3)_xxxx + u^3",
        "-(th^3)'''' + th^3 = th/2",
    ),
    ModelSpec(
        "TFE4", "parabolic", 4, Fraction(1, 2), 2, True, Fraction(1, 2),
        "u_t = -(u^2 u_xxx)_x + u^3",
        "-(th^2 th''')' + th^3 = th/2",
    ),
    ModelSpec(
        "QWE4", "wave", 4, Fraction(1), 2, False, Fraction(2),
        "u_tt = u^2 (-u_xxxx + u)",
        "th^2 (-th'''' + th) = 2 th",
    ),
    ModelSpec(
        "QWE4_DIV", "wave", 4, Fraction(1), 3, True, Fraction(2),
        "u_tt = -(u^3)_xxxx + u^3",
        "-(th^3)'''' + th^3 = 2 th",
    ),
    ModelSpec(
        "NDE3", "dispersive", 3, Fraction(1, 3), 3, False, Fraction(1, 3),
        "u_t = u^3 (u_xxx + u)",
        "th^3 (th''' + th) = th/3",
    ),
    ModelSpec(
        "NDE3_DIV", "dispersive", 3, Fraction(1, 3), 4, True, Fraction(1, 3),
        "u_t = (u^4)_xxx + u^4",
        "(th^4)''' + th^4 = th/3",
    ),
)

MODELS: Dict[str, ModelSpec] = {m.name: m for m in _REGISTRY_ROWS}
MODEL_NAMES: Tuple[str, ...] = tuple(MODELS)


def get_model(name: str) -> ModelSpec:
    try:
        return MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}") from None


def _check_derivs(derivs: Derivs, need: int) -> Derivs:
    d = np.atleast_2d(np.asarray(derivs, dtype=np.float64))
    if d.shape[0] < need + 1:
        raise ValueError(f"need derivative rows 0..{need}, got {d.shape[0]} rows")
    return d


# Spatial operators A(theta) written out with the product rule so callers only
# supply derivatives of theta itself.

def _op_rd2(d):
    return d[0] ** 2 * (d[2] + d[0])


def _op_rd2_div(d):
    return 6.0 * d[0] * d[1] ** 2 + 3.0 * d[0] ** 2 * d[2] + d[0] ** 3


def _op_rd4(d):
    return d[0] ** 2 * (-d[4] + d[0])


def _op_rd6(d):
    return d[0] ** 2 * (d[6] + d[0])


def _op_pme4(d):
    cube_4 = (
        36.0 * d[1] ** 2 * d[2]
        + 18.0 * d[0] * d[2] ** 2
        + 24.0 * d[0] * d[1] * d[3]
        + 3.0 * d[0] ** 2 * d[4]
    )
    return -cube_4 + d[0] ** 3


def _op_tfe4(d):
    flux_x = 2.0 * d[0] * d[1] * d[3] + d[0] ** 2 * d[4]
    return -flux_x + d[0] ** 3


def _op_qwe4(d):
    return d[0] ** 2 * (-d[4] + d[0])


def _op_qwe4_div(d):
    cube_4 = (
        36.0 * d[1] ** 2 * d[2]
        + 18.0 * d[0] * d[2] ** 2
        + 24.0 * d[0] * d[1] * d[3]
        + 3.0 * d[0] ** 2 * d[4]
    )
    return -cube_4 + d[0] ** 3


def _op_nde3(d):
    return d[0] ** 3 * (d[3] + d[0])


def _op_nde3_div(d):
    quart_3 = 24.0 * d[0] * d[1] ** 3 + 36.0 * d[0] ** 2 * d[1] * d[2] + 4.0 * d[0] ** 3 * d[3]
    return quart_3 + d[0] ** 4


_OPERATORS: Dict[str, Callable[[Derivs], np.ndarray]] = {
    "RD2": _op_rd2,
    "RD2_DIV": _op_rd2_div,
    "RD4": _op_rd4,
    "RD6": _op_rd6,
    "PME4": _op_pme4,
    "TFE4": _op_tfe4,
    "QWE4": _op_qwe4,
    "QWE4_DIV": _op_qwe4_div,
    "NDE3": _op_nde3,
    "NDE3_DIV": _op_nde3_div,
}


def separable_residual(name: str, derivs: Derivs) -> np.ndarray:
    """Residual A(theta) - c * theta of the separable profile equation.

    ``derivs`` stacks theta and its x-derivatives row by row, at least up to
    the model's spatial order.
    """
    spec = get_model(name)
    d = _check_derivs(derivs, spec.spatial_order)
    return _OPERATORS[name](d) - float(spec.rate_constant) * d[0]


def signed_power(values: np.ndarray, power: float) -> np.ndarray:
    """|v|**power * sign(v); keeps odd-root nonlinearities defined through zero."""
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.abs(values) ** power


@dataclass(frozen=True)
class ScalingReduction:
    model: str
    prefactor: float
    prefactor_exact: str
    profile_power: Fraction  # theta = prefactor * F ** profile_power
    residual_scale: float  # separable residual == residual_scale * normalized residual
    normalized_equation: str


def _norm_res_rd2_div(d):
    return d[2] + d[0] - signed_power(d[0], 1.0 / 3.0)


def _norm_res_pme4(d):
    return d[4] - d[0] + signed_power(d[0], 1.0 / 3.0)


def _norm_res_tfe4(d):
    return 2.0 * d[0] * d[1] * d[3] + d[0] ** 2 * d[4] - d[0] ** 3 + d[0]


def _norm_res_nde3_div(d):
    return d[3] + d[0] - signed_power(d[0], 0.25)


_REDUCTIONS: Dict[str, Tuple[ScalingReduction, Callable[[Derivs], np.ndarray]]] = {
    "RD2_DIV": (
        ScalingReduction(
            "RD2_DIV", 2.0 ** -0.5, "2**(-1/2)", Fraction(1, 3), 2.0 ** -1.5,
            "F'' + F - F^(1/3) = 0",
        ),
        _norm_res_rd2_div,
    ),
    "PME4": (
        ScalingReduction(
            "PME4", 2.0 ** -0.5, "2**(-1/2)", Fraction(1, 3), -(2.0 ** -1.5),
            "F'''' - F + F^(1/3) = 0",
        ),
        _norm_res_pme4,
    ),
    "TFE4": (
        ScalingReduction(
            "TFE4", 2.0 ** -0.5, "2**(-1/2)", Fraction(1), -(2.0 ** -1.5),
            "(F^2 F''')' - F^3 + F = 0",
        ),
        _norm_res_tfe4,
    ),
    "QWE4_DIV": (
        ScalingReduction(
            "QWE4_DIV", 2.0 ** 0.5, "2**(1/2)", Fraction(1, 3), -(2.0 ** 1.5),
            "F'''' - F + F^(1/3) = 0",
        ),
        _norm_res_pme4,
    ),
    "NDE3_DIV": (
        ScalingReduction(
            "NDE3_DIV", 3.0 ** (-1.0 / 3.0), "3**(-1/3)", Fraction(1, 4), 3.0 ** (-4.0 / 3.0),
            "F''' + F - F^(1/4) = 0",
        ),
        _norm_res_nde3_div,
    ),
}


def rescale_separable(name: str) -> ScalingReduction:
    """Rescaling theta = b * F**p that normalizes a divergence-form profile ODE."""
    spec = get_model(name)
    if not spec.divergence_form:
        raise ValueError(f"{name} is not in divergence form; nothing to rescale")
    return _REDUCTIONS[name][0]


def normalized_residual(name: str, derivs: Derivs) -> np.ndarray:
    """Residual of the normalized profile ODE produced by :func:`rescale_separable`."""
    spec = get_model(name)
    if not spec.divergence_form:
        raise ValueError(f"{name} has no normalized form")
    d = _check_derivs(derivs, spec.spatial_order)
    return _REDUCTIONS[name][1](d)
