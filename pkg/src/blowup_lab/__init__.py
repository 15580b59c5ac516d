"""Numerical laboratory for higher-order blow-up asymptotics.

Subpackages and modules:

* :mod:`blowup_lab.models` — the catalogue of scalar model equations, their
  blow-up rate constants and separable reductions.
* :mod:`blowup_lab.profiles` — stationary threshold profiles of the linear
  contact problems and their boundary-layer coefficients.
* :mod:`blowup_lab.logtw` — log-travelling-wave amplitude laws and their
  correction terms.
* :mod:`blowup_lab.selfsim` — compactly supported self-similar profiles of
  the divergence-form models (shooting, energy, crossing patterns).
* :mod:`blowup_lab.matcher` — matching-based amplitude-law predictions.
* :mod:`blowup_lab.evolve` — rescaled evolution runs and their diagnostics.
* :mod:`blowup_lab.numcore` — shared numerics (IVP solver, banded systems,
  root finding, power-log fits).
"""
from ._accel import NUMBA_ENABLED, accel_mode
from .models import MODEL_NAMES, MODELS, ModelSpec, get_model

__version__ = "0.1.0"

__all__ = [
    "MODELS",
    "MODEL_NAMES",
    "ModelSpec",
    "NUMBA_ENABLED",
    "__version__",
    "accel_mode",
    "get_model",
]
