"""Compact-support profile construction and crossing classification."""
import functools

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from blowup_lab.profiles import threshold_length
from blowup_lab.sampling import SampledProfile
from blowup_lab.selfsim import (
    PME4_MODE_PARAMETERS,
    TFE4_INTERFACE,
    PatternAmbiguityError,
    classify_pattern,
    first_integral_quartic,
    ls_category,
    ls_energy,
    ls_spectrum,
    nde_div_shoot,
    pme4_shoot,
    tfe4_shoot,
    zk_profile,
)

# Pinned outputs of the quartic mode table (z_e = support half width, contact
# distance = phase-space norm at the interface, index = crossing pattern).
MODE_HALF_WIDTH = {
    "F0": 6.757010,
    "F1": 9.493932,
    "F2": 11.070041,
    "F3": 13.818039,
    "crater": 10.280529,
    "cubic_dipole": 11.468270,
}
MODE_DISTANCE_TOL = {
    "F0": 1e-3,
    "F1": 1e-3,
    "F2": 2.5e-2,
    "F3": 2.5e-2,
    "crater": 1e-3,
    "cubic_dipole": 1e-3,
}
MODE_INDEX = {
    "F0": "{+2}",
    "F1": "{-2,1,+2}",
    "F2": "{-2,1,+2,1,-2}",
    "F3": "{+2,1,-2,1,+2,1,-2}",
    "crater": "{+4}",
    "cubic_dipole": "{-2,1,+2}",
}
F0_SIGN_CHANGES = np.array([4.161437, 6.053806, 6.753745])
F0_ENERGY = -1.607370736744

TFE4_X0 = 2.803364657400
TFE4_SERIES_C = -0.075275599206
TFE4_CENTER = 1.2489482114
TFE4_CURVATURE = -0.6045728508

NDE_SUPPORT_RIGHT = 4.7574368
NDE_HUMP_MAX = 4.6941

# Characteristic-length table of the clamped-plate count, pinned from the
# brentq oracle below.
CATEGORY_TABLE = [(1, 0), (2, 0), (3, 1), (5, 2), (8, 4), (10, 5), (20, 12), (50, 31), (100, 63)]


@functools.lru_cache(maxsize=None)
def mode_result(name, n_points=4001):
    symmetry, guess = PME4_MODE_PARAMETERS[name]
    return pme4_shoot(symmetry, guess, search_radius=0.0, n_points=n_points)


@functools.lru_cache(maxsize=None)
def interface_result(delta_frac=1e-4):
    return tfe4_shoot(delta_frac=delta_frac)


@functools.lru_cache(maxsize=None)
def quartic_contact_result(offset=0.0):
    return nde_div_shoot(initial_guess=offset)


def polyline_profile(values, samples_per_segment=200):
    """Piecewise-linear profile through unit-spaced control values."""
    values = np.asarray(values, dtype=float)
    knots = np.arange(values.size, dtype=float)
    xs = np.linspace(0.0, knots[-1], (values.size - 1) * samples_per_segment + 1)
    return SampledProfile(xs, np.interp(xs, knots, values))


# ---------------------------------------------------------------------------
# Quartic oscillatory modes.


@pytest.mark.parametrize("name", sorted(PME4_MODE_PARAMETERS))
def test_mode_table_converges(name):
    res = mode_result(name)
    assert res.converged, res.message
    assert res.objective_residual < MODE_DISTANCE_TOL[name]
    assert_allclose(res.profile.metadata["support_half_width"], MODE_HALF_WIDTH[name], atol=1e-3)
    assert res.profile.metadata["first_integral_drift"] < 1e-10


@pytest.mark.parametrize("name", sorted(MODE_INDEX))
def test_mode_classification(name):
    assert str(classify_pattern(mode_result(name).profile)) == MODE_INDEX[name]


def test_mode_zero_crossing_totals():
    # The k-th mode carries k structural sign changes: the near-interface
    # tail oscillations are below the amplitude threshold and do not count.
    for name, expected in [("F0", 0), ("F1", 1), ("F2", 2), ("F3", 3)]:
        assert classify_pattern(mode_result(name).profile).zero_crossing_total == expected


def test_f0_sign_change_positions():
    zs = mode_result("F0").profile.sign_changes
    assert zs.size == 6
    assert_allclose(zs, np.concatenate([-F0_SIGN_CHANGES[::-1], F0_SIGN_CHANGES]), atol=2e-3)


def test_f0_tail_crossings_cluster_at_contact():
    # The last pair of sign changes sits inside the outer tenth of the
    # support; the previous pair does not quite reach it.
    p = mode_result("F0").profile
    edge = 0.9 * p.metadata["support_half_width"]
    assert np.sum(np.abs(p.sign_changes) >= edge) == 2


def test_f0_even_symmetry():
    p = mode_result("F0").profile
    assert set(p.derivative_values) == {1, 2, 3}
    assert_allclose(p.values, p.values[::-1], rtol=0, atol=1e-14)
    assert_allclose(p.derivative_values[1], -p.derivative_values[1][::-1], rtol=0, atol=1e-14)
    center = p.values[p.n_points // 2]
    assert_allclose(center, PME4_MODE_PARAMETERS["F0"][1][0], rtol=1e-13)


def test_f1_odd_symmetry():
    p = mode_result("F1").profile
    assert_allclose(p.values, -p.values[::-1], rtol=0, atol=1e-14)
    assert p.values[p.n_points // 2] == 0.0


def test_profile_rows_differentiate_values():
    p = mode_result("F0").profile
    h = p.xs[1] - p.xs[0]
    interior = np.abs(p.xs) <= 0.8 * p.metadata["support_half_width"]
    assert_allclose(
        np.gradient(p.values, h)[interior], p.derivative_values[1][interior], atol=1e-5
    )
    assert_allclose(
        np.gradient(p.derivative_values[1], h)[interior],
        p.derivative_values[2][interior],
        atol=1e-5,
    )


@pytest.mark.parametrize("name", ["F0", "F2", "crater"])
def test_even_mode_parameters_sit_on_first_integral_curve(name):
    center, curvature = PME4_MODE_PARAMETERS[name][1]
    state = np.array([center, 0.0, curvature, 0.0])
    assert_allclose(first_integral_quartic(state), 0.0, atol=1e-13)


def test_first_integral_values():
    assert_allclose(first_integral_quartic(np.array([1.0, 0.0, 0.0, 0.0])), 0.25)
    batch = np.array([[0.0, 2.0, 0.0, 3.0], [0.0, 0.0, 1.0, 0.0]])
    assert_allclose(first_integral_quartic(batch), [6.0, -0.5])


def test_orbit_against_scipy():
    center, curvature = PME4_MODE_PARAMETERS["F0"][1]
    y0 = [center, 0.0, curvature, 0.0]

    def rhs(t, y):
        f = y[0]
        return [y[1], y[2], y[3], f - np.sign(f) * np.abs(f) ** (1.0 / 3.0)]

    ref = solve_ivp(rhs, (0.0, 4.0), y0, rtol=1e-12, atol=1e-14, dense_output=True)
    p = mode_result("F0").profile
    sel = (p.xs >= 0.0) & (p.xs <= 4.0)
    assert_allclose(p.values[sel], ref.sol(p.xs[sel])[0], rtol=0, atol=1e-9)


def test_search_recovers_frozen_amplitude():
    center = PME4_MODE_PARAMETERS["F0"][1][0]
    res = pme4_shoot(
        "even", (center + 3e-4, -0.5), search_radius=8e-4, search_grid=9, n_points=201
    )
    assert res.converged
    assert abs(res.parameters["F0"] - center) < 1e-8


def test_detuned_center_is_rejected():
    res = pme4_shoot("even", (1.2, -0.4), search_radius=0.0)
    assert not res.converged
    assert res.objective_residual > 0.5


def test_orbit_without_excursion_reports_failure():
    res = pme4_shoot("even", (1e-3, -1.0), search_radius=0.0, z_max=2.5)
    assert not res.converged
    assert np.isinf(res.objective_residual)
    assert "never left" in res.message


def test_shoot_argument_validation():
    with pytest.raises(ValueError, match="symmetry"):
        pme4_shoot("both", (1.0, -0.5), search_radius=0.0)
    with pytest.raises(ValueError, match="search_radius"):
        pme4_shoot("even", (1.0, -0.5), search_radius=-1.0)
    with pytest.raises(ValueError, match="search_grid"):
        pme4_shoot("even", (1.0, -0.5), search_radius=1e-3, search_grid=2)
    with pytest.raises(ValueError, match="center value"):
        pme4_shoot("even", (2.0, -0.5), search_radius=0.0)


def test_cubic_dipole_refinement_exposes_central_tangency():
    # The odd orbit launched by the third derivative alone rises like x^3,
    # so the sampled slope at the central zero shrinks quadratically with the
    # grid step and eventually falls below the transversality tolerance.
    res = mode_result("cubic_dipole", n_points=40001)
    with pytest.raises(PatternAmbiguityError, match="transversality"):
        classify_pattern(res.profile)


# ---------------------------------------------------------------------------
# Thin-film interface.


def test_interface_convergence():
    res = interface_result()
    assert res.converged, res.message
    assert res.objective_residual < 1e-9
    assert_allclose(res.parameters["x0"], TFE4_X0, atol=1e-9)
    assert_allclose(res.parameters["x0"], TFE4_INTERFACE, atol=1e-9)
    assert_allclose(res.parameters["C"], TFE4_SERIES_C, atol=1e-6)


def test_interface_center_values():
    meta = interface_result().profile.metadata
    assert_allclose(meta["center_value"], TFE4_CENTER, atol=1e-6)
    assert_allclose(meta["center_curvature"], TFE4_CURVATURE, atol=1e-6)


def test_interface_profile_shape():
    res = interface_result()
    p = res.profile
    x0 = res.parameters["x0"]
    assert p.support == (-x0, x0)
    assert set(p.derivative_values) == {1, 2, 3}
    assert_allclose(p.values, p.values[::-1], rtol=0, atol=1e-14)
    assert p.values[0] == 0.0 and p.values[-1] == 0.0
    assert np.all(p.values[1:-1] > 0.0)


def test_interface_is_stable_under_series_offset():
    # Halving the matching offset moves the interface by far less than the
    # truncation order of the two-term contact series suggests.
    x0 = interface_result().parameters["x0"]
    x0_half = interface_result(delta_frac=5e-5).parameters["x0"]
    assert abs(x0_half - x0) < 1e-4


def test_interface_against_center_integration():
    # Independent route: start scipy at the shot center values and integrate
    # outward; the film must touch down at the same interface with a
    # near-flat slope.
    meta = interface_result().profile.metadata
    y0 = [meta["center_value"], 0.0, meta["center_curvature"], 0.0]

    def rhs(x, y):
        return [y[1], y[2], y[3] / (y[0] * y[0]), y[0] ** 3 - y[0]]

    def touch(x, y):
        return y[0] - 1e-6

    touch.terminal = True
    sol = solve_ivp(rhs, (0.0, 3.2), y0, rtol=1e-10, atol=1e-12, events=touch)
    assert sol.t_events[0].size == 1
    assert 2.800 < sol.t[-1] < 2.804
    assert abs(sol.y[1, -1]) < 5e-3


def test_interface_rejects_bad_guesses():
    with pytest.raises(ValueError, match="positive"):
        tfe4_shoot(initial_guess=(-1.0, 0.0))
    with pytest.raises(ValueError, match="integrable trial"):
        tfe4_shoot(initial_guess=(2.6, -0.3))


def test_interface_nonconvergence_is_reported():
    res = tfe4_shoot(initial_guess=(2.81, 0.3), max_iterations=2)
    assert not res.converged
    assert res.objective_residual > 1e-3
    assert "norm" in res.message


# ---------------------------------------------------------------------------
# Third-order quartic-contact profile.


def test_quartic_contact_profile():
    res = quartic_contact_result()
    assert res.converged, res.message
    assert res.objective_residual < 5e-3
    p = res.profile
    assert abs(p.metadata["interface_exponent"] - 4.0) <= 0.05
    assert_allclose(p.metadata["hump_max"], NDE_HUMP_MAX, atol=1e-2)
    assert_allclose(p.support[0], -threshold_length("NDE3").length, atol=1e-12)
    assert_allclose(p.support[1], NDE_SUPPORT_RIGHT, atol=1e-4)
    assert p.sign_changes.size == 1
    assert_allclose(p.sign_changes[0], p.support[1])
    assert p.values[0] == 0.0
    assert "transversal zero" in res.message


def test_quartic_contact_translates_with_offset():
    base = quartic_contact_result().profile.support
    shifted = quartic_contact_result(offset=0.7).profile.support
    assert_allclose(shifted[0], base[0] + 0.7, atol=1e-12)
    assert_allclose(shifted[1], base[1] + 0.7, atol=1e-9)


def test_quartic_contact_against_scipy():
    a = 24.0 ** (-4.0 / 3.0)
    b = -a / 204.0
    d = 0.1
    y0 = [a * d**4 + b * d**7, 4 * a * d**3 + 7 * b * d**6, 12 * a * d**2 + 42 * b * d**5]

    def rhs(u, y):
        return [y[1], y[2], max(y[0], 0.0) ** 0.25 - y[0]]

    ref = solve_ivp(rhs, (d, 7.0), y0, rtol=1e-12, atol=1e-16, dense_output=True)
    us = np.linspace(d, 7.0, 20001)
    p = quartic_contact_result().profile
    assert_allclose(ref.sol(us)[0].max(), p.metadata["hump_max"], atol=1e-3)
    house = np.interp(p.metadata["interface_x"] + 3.0, p.xs, p.values)
    assert_allclose(house, ref.sol(3.0)[0], atol=1e-4)


def test_zero_amplitude_stays_zero():
    res = nde_div_shoot(series_amplitude=0.0)
    assert res.converged
    assert res.objective_residual == 0.0
    assert not np.any(res.profile.values)


def test_quartic_contact_validation():
    with pytest.raises(ValueError, match="nonnegative branch"):
        nde_div_shoot(series_amplitude=-1.0)
    with pytest.raises(ValueError, match="delta"):
        nde_div_shoot(delta=0.6)


# ---------------------------------------------------------------------------
# Variational energy and clamped-plate count.


def test_ground_mode_energy():
    e = ls_energy(mode_result("F0").profile)
    assert e < 0.0
    assert_allclose(e, F0_ENERGY, rtol=0, atol=1e-6)


def test_energy_finite_difference_fallback():
    p = mode_result("F0").profile
    stripped = SampledProfile(p.xs, p.values)
    assert_allclose(ls_energy(stripped), ls_energy(p), rtol=0, atol=1e-5)


def test_energy_rejects_coarse_grids():
    xs = np.linspace(-1.0, 1.0, 8)
    with pytest.raises(ValueError, match="too coarse"):
        ls_energy(SampledProfile(xs, np.cos(xs)))


@pytest.mark.parametrize("length_r, expected", CATEGORY_TABLE)
def test_category_table(length_r, expected):
    assert ls_category(length_r) == expected


def test_category_is_nondecreasing():
    counts = [ls_category(r) for r in np.linspace(0.5, 120.0, 240)]
    assert all(b >= a for a, b in zip(counts, counts[1:]))


def test_spectrum_against_bracketed_oracle():
    lam = ls_spectrum(7.0, 8)
    assert np.all(lam < 0.0)
    assert np.all(np.diff(lam) < 0.0)
    for k in range(1, 9):
        root = brentq(
            lambda r: np.cos(r) - 1.0 / np.cosh(r),
            (k + 0.25) * np.pi,
            (k + 0.75) * np.pi,
            xtol=1e-14,
        )
        assert_allclose(lam[k - 1], -((root / 14.0) ** 4), rtol=1e-12)


def test_spectrum_scale_identity():
    # The eigenvalues depend on the half-length only through the fourth
    # power of the characteristic roots over 2R.
    s1 = ls_spectrum(3.0, 5) * 6.0**4
    s2 = ls_spectrum(11.0, 5) * 22.0**4
    assert_allclose(s1, s2, rtol=1e-8)


@pytest.mark.parametrize("length_r", [3.0, 10.0, 25.0])
def test_category_matches_spectrum_threshold(length_r):
    n = ls_category(length_r)
    lam = ls_spectrum(length_r, n + 2)
    assert np.all(lam[:n] > -1.0)
    assert lam[n] <= -1.0


def test_category_linear_density():
    for r in np.linspace(10.0, 100.0, 91):
        assert abs(ls_category(r) / r - 2.0 / np.pi) <= 0.15


def test_spectrum_validation():
    with pytest.raises(ValueError, match="positive"):
        ls_spectrum(-1.0, 3)
    with pytest.raises(ValueError, match="at least one"):
        ls_spectrum(2.0, 0)
    with pytest.raises(ValueError, match="positive"):
        ls_category(0.0)


# ---------------------------------------------------------------------------
# Explicit cosine compacton.


def test_zk_explicit_values():
    p = zk_profile()
    half = 1.5 * np.pi
    assert p.support == (-half, half)
    k = int(np.argmax(p.values))
    assert p.xs[k] == 0.0
    assert_allclose(p.values[k], np.sqrt(3.0) / 2.0, rtol=1e-15)
    outside = np.abs(p.xs) > half
    assert not np.any(p.values[outside])


def test_zk_satisfies_normalized_equation():
    # Product-rule route: (theta^3)'' = 6 theta theta'^2 + 3 theta^2 theta''
    # from the analytic rows.
    p = zk_profile()
    inside = np.abs(p.xs) <= p.support[1]
    th = p.values[inside]
    t1 = p.derivative_values[1][inside]
    t2 = p.derivative_values[2][inside]
    residual = 6.0 * th * t1**2 + 3.0 * th**2 * t2 + th**3 - 0.5 * th
    assert np.max(np.abs(residual)) < 1e-12


def test_zk_composite_fd_residual():
    # Independent route: difference the sampled composite directly.
    p = zk_profile()
    h = p.xs[1] - p.xs[0]
    c = p.values**3
    i = np.arange(2, p.n_points - 2)
    i = i[np.abs(p.xs[i]) <= p.support[1] - 5.0 * h]
    c2 = (-c[i - 2] + 16 * c[i - 1] - 30 * c[i] + 16 * c[i + 1] - c[i + 2]) / (12.0 * h * h)
    assert np.max(np.abs(c2 + c[i] - 0.5 * p.values[i])) < 1e-8


def test_zk_classifies_as_featureless():
    # Positive, below both equilibria, vanishing only at the contact points:
    # nothing to count.
    index = classify_pattern(zk_profile())
    assert index.entries == ()
    assert str(index) == "{}"


def test_zk_grid_validation():
    with pytest.raises(ValueError, match="grid points"):
        zk_profile(grid_points=2)


# ---------------------------------------------------------------------------
# Crossing multi-index on synthetic data.

REFERENCE_PATTERN_VALUES = [
    0.5, 1.5, 0.5, 1.5, 0.5,
    -0.5,
    -1.5, -0.5, -1.5, -0.5,
    0.5,
    1.5, 0.5,
    -0.5, 0.5,
    1.5, 0.5, 1.5, 0.5,
    -0.5,
    -1.5, -0.5, -1.5, -0.5,
    0.5,
    1.5, 0.5, 1.5, 0.5, 1.5, 0.5, 1.5, 0.5,
]


def test_reference_pattern_renders():
    index = classify_pattern(polyline_profile(REFERENCE_PATTERN_VALUES))
    assert str(index) == "{+4,1,-4,1,+2,2,+4,1,-4,1,+8}"
    assert index.entries == (4, 1, -4, 1, 2, 2, 4, 1, -4, 1, 8)
    assert index.starts_with_equilibrium
    assert index.zero_crossing_total == 6
    assert index.equilibrium_crossing_total == 26


def test_reference_pattern_is_refinement_invariant():
    coarse = classify_pattern(polyline_profile(REFERENCE_PATTERN_VALUES, 200))
    fine = classify_pattern(polyline_profile(REFERENCE_PATTERN_VALUES, 800))
    assert coarse == fine


def test_single_hump_index():
    index = classify_pattern(polyline_profile([0.5, 1.5, 0.7, 1.5, 0.5]))
    assert str(index) == "{+4}"
    assert index.zero_crossing_total == 0


def test_zero_profile_has_empty_index():
    xs = np.linspace(0.0, 1.0, 64)
    assert classify_pattern(SampledProfile(xs, np.zeros(64))).entries == ()


def test_leading_zero_count_renders_unsigned():
    # A profile that changes sign before ever reaching an equilibrium starts
    # with an unsigned entry.
    index = classify_pattern(polyline_profile([-0.5, 0.5, 1.5, 0.5]))
    assert not index.starts_with_equilibrium
    assert str(index) == "{1,+2}"


def test_subthreshold_tail_is_ignored():
    values = [0.2, 1.5, 0.2, -0.02, 0.02, -0.02]
    assert str(classify_pattern(polyline_profile(values))) == "{+2}"
    # Lowering the amplitude threshold turns the tail wiggles back into
    # countable zero crossings.
    full = classify_pattern(polyline_profile(values), amplitude_fraction=1e-3)
    assert str(full) == "{+2,3}"


def test_tangency_raises():
    xs = np.linspace(0.0, 2.0, 201)
    values = np.interp(xs, [0.0, 1.0, 2.0], [0.5, 1.0, 0.5])
    with pytest.raises(PatternAmbiguityError, match="tangential"):
        classify_pattern(SampledProfile(xs, values))


def test_flat_crossing_raises():
    xs = np.linspace(0.0, 3.0, 301)
    values = np.interp(xs, [0.0, 1.0, 2.0, 3.0], [0.5, 0.0, 0.0, -0.5])
    with pytest.raises(PatternAmbiguityError, match="flat crossing"):
        classify_pattern(SampledProfile(xs, values))


def test_under_resolved_crossings_raise():
    xs = np.linspace(0.0, 2.0, 5)
    values = np.interp(xs, [0.0, 1.0, 2.0], [0.3, 1.5, 0.3])
    with pytest.raises(PatternAmbiguityError, match="grid points"):
        classify_pattern(SampledProfile(xs, values))
