"""Far-field growth laws of the log-travelling-wave reductions.

The amplitude balance is re-derived here by hand for every model (explicit
derivative index chains) and the exact-term calculus is cross-checked against
finite differences, so the residual decay tests measure the laws themselves.
"""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from blowup_lab.logtw import (
    LOGTW_MODELS,
    differentiate_terms,
    evaluate_terms,
    integrate_logtw,
    logtw_law,
    logtw_ode,
    logtw_residual,
)
from blowup_lab.numcore import IvpError

# model -> (derivative index chain of d^k applied to s^p, rate, sign * (-1)^k)
HAND_CHAINS = {
    "RD2": ([1], Fraction(1, 2), 1),
    "RD4": ([-1, 1, 2], Fraction(1, 2), -1),
    "RD6": ([-2, -1, 1, 2, 3], Fraction(1, 2), 1),
    "QWE4": ([-1, 1, 2], Fraction(2), -1),
    "NDE3": ([-1, 1], Fraction(1, 3), -1),
}


def test_frozen_amplitudes():
    assert_allclose(logtw_law("RD2").amplitude, 1.0, atol=1e-14)
    assert_allclose(logtw_law("RD4").amplitude, 2.0**-0.5, atol=1e-14)
    assert_allclose(logtw_law("RD6").amplitude, 1.0 / (2.0 * np.sqrt(3.0)), atol=1e-13)
    assert_allclose(logtw_law("QWE4").amplitude, np.sqrt(2.0), atol=1e-14)
    assert_allclose(logtw_law("NDE3").amplitude, 1.0, atol=1e-14)


def test_frozen_corrections_and_powers():
    expected = {
        "RD2": (1, Fraction(1, 2), Fraction(1, 4)),
        "RD4": (2, Fraction(1, 2), Fraction(1, 8)),
        "RD6": (3, Fraction(1, 2), Fraction(1, 12)),
        "QWE4": (2, Fraction(1, 2), Fraction(1, 8)),
        "NDE3": (1, Fraction(1, 3), Fraction(0)),
    }
    for model, (p, q, kappa) in expected.items():
        law = logtw_law(model, 2)
        assert (law.power, law.log_power, law.correction) == (p, q, kappa)


@pytest.mark.parametrize("model", LOGTW_MODELS)
def test_amplitude_balance_hand_derivation(model):
    """a^sigma = rate / (sign (-1)^k P q) with P, S from the explicit chain."""
    chain, rate, signed = HAND_CHAINS[model]
    law = logtw_law(model)
    product = 1
    harmonic = Fraction(0)
    for m in chain:
        product *= m
        harmonic += Fraction(1, m)
    assert law.chain_product == product
    assert law.harmonic_sum == harmonic
    assert law.amplitude_power_sigma == rate / (signed * product * law.log_power)
    assert law.correction == harmonic * law.log_power * (1 - law.log_power)


# ---------------------------------------------------------------------------
# exact term calculus


def test_differentiate_polynomial_term():
    ds = differentiate_terms([(1.0, Fraction(2), Fraction(0), 0)])
    assert ds == [(2.0, Fraction(1), Fraction(0), 0)]


def test_differentiate_matches_finite_difference():
    terms = [(1.5, Fraction(3), Fraction(1, 2), 1), (-0.4, Fraction(1), Fraction(-1, 2), 0)]
    ds = differentiate_terms(terms)
    s = np.array([40.0])
    h = 1e-6 * s
    fd = (evaluate_terms(terms, s + h) - evaluate_terms(terms, s - h)) / (2.0 * h)
    assert_allclose(evaluate_terms(ds, s), fd, rtol=1e-8)


@given(
    coeff=st.floats(-3.0, 3.0).filter(lambda c: abs(c) > 1e-3),
    s_pow=st.integers(-2, 3),
    l_num=st.integers(-1, 2),
    ll_pow=st.integers(0, 1),
    s_val=st.floats(5.0, 100.0),
)
@settings(max_examples=60, deadline=None)
def test_differentiation_property(coeff, s_pow, l_num, ll_pow, s_val):
    terms = [(coeff, Fraction(s_pow), Fraction(l_num, 2), ll_pow)]
    ds = differentiate_terms(terms)
    s = np.array([s_val])
    h = 1e-6 * s_val
    fd = (evaluate_terms(terms, s + h) - evaluate_terms(terms, s - h)) / (2.0 * h)
    assert_allclose(evaluate_terms(ds, s), fd, rtol=2e-6, atol=1e-12)


def test_evaluate_terms_domain():
    with pytest.raises(ValueError, match="s > 1"):
        evaluate_terms([(1.0, Fraction(1), Fraction(0), 0)], np.array([0.5]))
    with pytest.raises(ValueError, match="receding"):
        logtw_law("RD4").evaluate(np.array([-0.5]))


def test_unknown_model_and_truncation():
    with pytest.raises(KeyError, match="log-travelling-wave"):
        logtw_ode("PME4")
    with pytest.raises(ValueError, match="1 or 2"):
        logtw_law("RD4", 3)


def test_term_counts():
    assert len(logtw_law("RD4", 1).terms()) == 1
    assert len(logtw_law("RD4", 2).terms()) == 2
    # zero correction collapses the second term
    assert len(logtw_law("NDE3", 2).terms()) == 1


# ---------------------------------------------------------------------------
# residual decay of the laws


@pytest.mark.parametrize("model", LOGTW_MODELS)
@pytest.mark.parametrize("n_terms", [1, 2])
def test_residual_decays_into_the_tail(model, n_terms):
    near = abs(logtw_residual(model, np.array([-1e3]), n_terms)[0])
    far = abs(logtw_residual(model, np.array([-1e6]), n_terms)[0])
    assert far < 0.55 * near
    assert far < 0.05


@pytest.mark.parametrize("model", ["RD2", "RD4", "RD6", "QWE4"])
def test_correction_term_improves_far_residual(model):
    one = abs(logtw_residual(model, np.array([-1e6]), 1)[0])
    two = abs(logtw_residual(model, np.array([-1e6]), 2)[0])
    assert two < 0.5 * one


@pytest.mark.parametrize("model", LOGTW_MODELS)
def test_detuned_amplitude_leaves_defect(model):
    true = abs(logtw_residual(model, np.array([-1e6]), 2)[0])
    off = abs(logtw_residual(model, np.array([-1e6]), 2, amplitude_factor=1.1)[0])
    assert off > 0.1
    assert off > 20.0 * true


def test_residual_insensitive_to_wave_speed():
    # The leading balance carries no lam, so decay persists for any speed.
    for lam in (0.5, 2.0):
        near = abs(logtw_residual("RD4", np.array([-1e3]), 2, lam=lam)[0])
        far = abs(logtw_residual("RD4", np.array([-1e6]), 2, lam=lam)[0])
        assert far < 0.6 * near


# ---------------------------------------------------------------------------
# integrating the reduced ODE from law-generated data


ORBIT_DEVIATION = {"RD2": 0.015, "RD4": 0.03, "RD6": 0.05, "QWE4": 0.03, "NDE3": 0.01}


@pytest.mark.parametrize("model", LOGTW_MODELS)
def test_orbit_tracks_law(model):
    res, predicted = integrate_logtw(model, -1e3, -100.0)
    assert res.status == "reached_end"
    deviation = np.max(np.abs(res.ys[:, 0] - predicted) / predicted)
    assert deviation < ORBIT_DEVIATION[model]


def test_long_span_leaves_the_tail_branch():
    # Far-field data is off the connecting orbit by its truncation error, so
    # a span this long collapses toward the g = 0 singularity and stalls.
    with pytest.raises(IvpError):
        integrate_logtw("RD4", -1e4, -20.0)


def test_integrate_window_validation():
    with pytest.raises(ValueError, match="receding"):
        integrate_logtw("RD4", -100.0, -1e3)
