"""Shared-numerics checks: each solver against an independent reference."""
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from blowup_lab.numcore import (
    BandedMatrix,
    Bracket,
    BracketError,
    IvpControls,
    IvpError,
    SingularBandedError,
    bisect_root,
    find_root,
    fit_power_log,
    integrate_at,
    integrate_ivp,
    solve_banded,
)
from blowup_lab.numcore.fd import central_fd, derivative_table, fd_weights


# ---------------------------------------------------------------------------
# initial value solver


def decay(t, y, params):
    return -y


def test_ivp_exponential_decay():
    res = integrate_ivp(decay, (0.0, 5.0), [1.0])
    assert res.status == "reached_end"
    assert_allclose(res.y_end[0], np.exp(-5.0), rtol=1e-9)
    assert res.ts[0] == 0.0 and res.ts[-1] == 5.0
    assert np.all(np.diff(res.ts) > 0)


def test_ivp_backward_direction():
    res = integrate_ivp(decay, (2.0, 0.0), [np.exp(-2.0)])
    assert_allclose(res.y_end[0], 1.0, rtol=1e-9)
    assert np.all(np.diff(res.ts) < 0)


def test_ivp_tolerance_scaling():
    errs = []
    for rtol in (1e-6, 1e-9, 1e-12):
        ctl = IvpControls(rel_tol=rtol, abs_tol=rtol * 1e-3)
        res = integrate_ivp(decay, (0.0, 5.0), [1.0], controls=ctl)
        errs.append(abs(res.y_end[0] - np.exp(-5.0)))
    assert errs[0] > errs[1] > errs[2]


def stiffish(t, y, params):
    out = np.empty(2)
    out[0] = y[1]
    out[1] = -y[0] - 0.1 * y[1] * (y[0] ** 2 - 1.0)
    return out


def test_ivp_against_scipy_oracle():
    """Same nonlinear oscillator through both integrators."""
    ctl = IvpControls(rel_tol=1e-11, abs_tol=1e-13)
    mine = integrate_ivp(stiffish, (0.0, 20.0), [1.0, 0.0], controls=ctl)
    ref = solve_ivp(
        lambda t, y: stiffish(t, y, None),
        (0.0, 20.0),
        [1.0, 0.0],
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
    )
    assert_allclose(mine.y_end, ref.sol(20.0), atol=5e-9)


def test_ivp_escape_stop():
    res = integrate_ivp(lambda t, y, p: y, (0.0, 50.0), [1.0], stop_max_abs=100.0)
    assert res.status == "escape"
    assert abs(res.y_end[0]) >= 100.0
    assert res.t_end < 50.0


def test_ivp_floor_stop():
    """The floor stop fires at step granularity, so bound the step to localize."""
    ctl = IvpControls(max_step=0.05)
    res = integrate_ivp(lambda t, y, p: -np.ones(1), (0.0, 10.0), [1.0], controls=ctl, stop_floor=0.25)
    assert res.status == "floor"
    assert res.y_end[0] <= 0.25
    assert res.ys[-2, 0] > 0.25  # previous node still above
    assert_allclose(res.t_end, 0.75, atol=0.05 + 1e-12)


def test_ivp_max_steps_raises_with_partial():
    ctl = IvpControls(max_steps=4)
    with pytest.raises(IvpError) as exc:
        integrate_ivp(decay, (0.0, 100.0), [1.0], controls=ctl)
    partial = exc.value.partial
    assert partial.ts.size >= 1
    assert partial.status == "max_steps"


def test_ivp_nonfinite_rhs_raises():
    def bad(t, y, params):
        return np.array([np.inf])

    with pytest.raises(IvpError):
        integrate_ivp(bad, (0.0, 1.0), [1.0])


def test_integrate_at_hits_nodes_exactly():
    nodes = np.linspace(0.0, 3.0, 17)
    states = integrate_at(decay, nodes, [2.0])
    assert states.shape == (17, 1)
    assert_allclose(states[:, 0], 2.0 * np.exp(-nodes), rtol=1e-9)


def test_integrate_at_backward_and_duplicate_tolerance():
    nodes = np.array([1.0, 0.5, 0.25, 0.25 + 1e-17, 0.0])
    with pytest.raises(ValueError):
        integrate_at(decay, nodes, [1.0])  # not strictly monotone
    nodes = np.array([1.0, 0.5, 0.25, 0.0])
    states = integrate_at(decay, nodes, [np.exp(-1.0)])
    assert_allclose(states[:, 0], np.exp(-1.0) * np.exp(1.0 - nodes), rtol=1e-9)


def test_integrate_at_micro_segment_is_benign():
    """Nodes closer than integration precision share a state instead of dying."""
    base = np.linspace(0.0, 1.0, 9)
    nodes = np.insert(base, 4, base[4] + 1e-15 * 4.0)
    states = integrate_at(decay, np.unique(nodes), [1.0])
    assert np.all(np.isfinite(states))


@settings(max_examples=25, deadline=None)
@given(
    rate=st.floats(min_value=-3.0, max_value=3.0),
    t1=st.floats(min_value=0.1, max_value=2.0),
)
def test_ivp_linear_property(rate, t1):
    res = integrate_ivp(lambda t, y, p: p[0] * y, (0.0, t1), [1.0], params=np.array([rate]))
    assert_allclose(res.y_end[0], np.exp(rate * t1), rtol=1e-7, atol=1e-12)


# ---------------------------------------------------------------------------
# banded systems


def random_banded(n, nl, nu, rng):
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - nl), min(n, i + nu + 1)):
            a[i, j] = rng.uniform(-1.0, 1.0)
        a[i, i] += 3.0  # keep comfortably nonsingular
    return a


def test_banded_against_dense_and_scipy():
    rng = np.random.default_rng(7)
    for n, nl, nu in [(4, 1, 1), (9, 2, 3), (20, 3, 2), (13, 0, 2), (11, 2, 0)]:
        a = random_banded(n, nl, nu, rng)
        bm = BandedMatrix.from_dense(a, nl, nu)
        b = rng.uniform(-1.0, 1.0, n)
        x = solve_banded(bm, b)
        assert_allclose(x, np.linalg.solve(a, b), atol=1e-12)
        x_scipy = scipy.linalg.solve_banded((nl, nu), bm.ab, b)
        assert_allclose(x, x_scipy, atol=1e-12)


def test_banded_round_trip_and_matvec():
    rng = np.random.default_rng(3)
    a = random_banded(8, 2, 1, rng)
    bm = BandedMatrix.from_dense(a, 2, 1)
    assert_allclose(bm.to_dense(), a)
    v = rng.normal(size=8)
    assert_allclose(bm.matvec(v), a @ v, atol=1e-13)


def test_banded_singular_raises():
    a = np.diag([1.0, 0.0, 2.0])
    bm = BandedMatrix.from_dense(a, 0, 0)
    with pytest.raises(SingularBandedError):
        solve_banded(bm, np.ones(3))


def test_banded_shape_validation():
    with pytest.raises(ValueError):
        BandedMatrix(1, 1, np.zeros((2, 5)))
    bm = BandedMatrix.from_dense(np.eye(4), 1, 1)
    with pytest.raises(ValueError):
        solve_banded(bm, np.ones(5))


# ---------------------------------------------------------------------------
# root finding


def test_find_root_matches_bisection():
    f = lambda x: np.tan(x) + np.tanh(x)
    br = Bracket(1.6, 3.1)
    fast = find_root(f, br)
    slow = bisect_root(f, br)
    assert fast.converged
    assert abs(fast.root - slow) < 1e-10
    assert abs(f(fast.root)) < 1e-10


def test_find_root_reports_calls():
    calls = {"n": 0}

    def f(x):
        calls["n"] += 1
        return x**3 - 2.0

    res = find_root(f, Bracket(0.0, 2.0))
    assert res.function_calls == calls["n"]
    assert_allclose(res.root, 2.0 ** (1.0 / 3.0), rtol=1e-12)


def test_find_root_bad_bracket():
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1.0, Bracket(-1.0, 1.0))


def test_bracket_orientation():
    with pytest.raises(BracketError):
        Bracket(2.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(root=st.floats(min_value=-5.0, max_value=5.0))
def test_find_root_affine_property(root):
    res = find_root(lambda x: x - root, Bracket(root - 1.5, root + 2.5))
    assert res.converged
    assert abs(res.root - root) < 1e-9 * max(1.0, abs(root))


# ---------------------------------------------------------------------------
# power-law fits


def test_fit_pure_power_round_trip():
    xs = np.geomspace(1e-4, 1e-1, 40)
    ys = 2.7 * xs**1.8
    fit = fit_power_log(xs, ys)
    assert fit.model == "pure_power"
    assert_allclose(fit.exponent, 1.8, rtol=1e-10)
    assert_allclose(fit.coefficient, 2.7, rtol=1e-10)
    assert fit.rms_log_residual < 1e-12


def test_fit_power_log_round_trip():
    xs = np.geomspace(1e-6, 1e-2, 60)
    ys = 0.4 * xs**2 * np.abs(np.log(xs)) ** 0.5
    fit = fit_power_log(xs, ys, with_log_factor=True)
    assert fit.model == "power_log"
    assert_allclose(fit.exponent, 2.0, atol=5e-3)
    assert_allclose(fit.log_exponent, 0.5, atol=5e-2)
    assert_allclose(fit.evaluate(xs), ys, rtol=1e-6)


def test_fit_fixed_exponent_removes_collinearity():
    """Over a narrow window the free exponent eats the log factor; pinning
    the known power recovers q accurately."""
    xs = np.geomspace(3e-4, 3e-2, 50)
    ys = 0.4 * xs**2 * np.abs(np.log(xs)) ** 0.5
    pinned = fit_power_log(xs, ys, with_log_factor=True, fixed_exponent=2.0)
    assert pinned.exponent == 2.0
    assert_allclose(pinned.log_exponent, 0.5, atol=1e-10)
    assert_allclose(pinned.coefficient, 0.4, rtol=1e-8)


def test_fit_rejects_bad_windows():
    xs = np.geomspace(0.5, 2.0, 10)  # straddles x = 1
    ys = xs**2
    with pytest.raises(ValueError):
        fit_power_log(xs, ys, with_log_factor=True)
    with pytest.raises(ValueError):
        fit_power_log(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        fit_power_log(np.array([1.0, -2.0, 3.0, 4.0]), np.ones(4))


@settings(max_examples=30, deadline=None)
@given(
    coeff=st.floats(min_value=0.1, max_value=10.0),
    power=st.floats(min_value=0.25, max_value=4.0),
)
def test_fit_power_property(coeff, power):
    xs = np.geomspace(1e-3, 1.0, 25)
    fit = fit_power_log(xs, coeff * xs**power)
    assert abs(fit.exponent - power) < 1e-8
    assert abs(fit.coefficient - coeff) < 1e-6 * coeff


# ---------------------------------------------------------------------------
# finite differences


def test_fd_weights_reproduce_classic_stencil():
    w = fd_weights(np.array([-1.0, 0.0, 1.0]), 0.0, 2)
    assert_allclose(w, [1.0, -2.0, 1.0], atol=1e-13)


def test_central_fd_convergence_order():
    f = np.sin
    errs = []
    for n in (26, 51):
        xs = np.linspace(0.0, 2.0, n)
        h = xs[1] - xs[0]
        d2 = central_fd(f(xs), h, 2, accuracy=4)
        interior = slice(4, -4)
        errs.append(np.max(np.abs(d2[interior] + np.sin(xs[interior]))))
    # fourth order: halving h gains a factor near 16
    assert errs[0] / errs[1] > 10.0


def test_derivative_table_rows():
    xs = np.linspace(-1.0, 1.0, 201)
    h = xs[1] - xs[0]
    table = derivative_table(np.exp(xs), h, 3)
    assert table.shape == (4, xs.size)
    inner = slice(5, -5)
    for m in range(4):
        assert_allclose(table[m][inner], np.exp(xs)[inner], atol=1e-7)
    assert np.isnan(table[1][0]) and np.isnan(table[3][-1])
