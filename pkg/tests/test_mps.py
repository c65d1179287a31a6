import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ladderqpt.mps import (
    DegeneratePairError,
    build_state,
    g_matrix,
    ground_pair,
    haar_coefficients,
    log_norm_closed_form,
    orthogonalize,
    overlap_closed_form,
    superpose,
    translate,
)
from ladderqpt.rung_basis import rung_state, two_rung

SQ2 = math.sqrt(2.0)


def test_g_matrix_entries():
    g = g_matrix(0.0)
    np.testing.assert_array_equal(g[0, 0], rung_state("t0"))
    g2 = g_matrix(2.0)
    np.testing.assert_array_equal(g2[0, 0], 2 * rung_state("s") + rung_state("t0"))
    np.testing.assert_array_equal(g2[0, 1], -SQ2 * rung_state("t+"))
    np.testing.assert_array_equal(g2[1, 0], SQ2 * rung_state("t-"))
    np.testing.assert_array_equal(g2[1, 1], 2 * rung_state("s") - rung_state("t0"))
    flipped = g2.copy()
    flipped[0, 0, 3] *= -1
    flipped[1, 1, 3] *= -1
    np.testing.assert_array_equal(g_matrix(-2.0), flipped)
    np.testing.assert_array_equal(g_matrix(0.0), g_matrix(-0.0))


def test_two_rung_state_hand_expansion():
    u = 0.8
    v = lambda a, b: two_rung(rung_state(a), rung_state(b))  # noqa: E731
    s, t0 = "s", "t0"
    # Tr g(u) g(-u): paths (1,1,1), (1,2,1), (2,1,2), (2,2,2)
    p11 = u * u * v(s, s) * -1 + u * v(s, t0) * -1 + u * v(t0, s) + v(t0, t0)  # (u s + t0)(-u s + t0)
    p11 = -u * u * v(s, s) + u * v(s, t0) - u * v(t0, s) + v(t0, t0)
    p12 = -SQ2 * SQ2 * v("t+", "t-")
    p21 = SQ2 * -SQ2 * v("t-", "t+")
    p22 = -u * u * v(s, s) - u * v(s, t0) + u * v(t0, s) + v(t0, t0)
    expected = p11 + p12 + p21 + p22
    np.testing.assert_allclose(build_state(u, 2).coefficients, expected, atol=1e-14)


def test_offset_one_is_sign_flipped_u():
    for u in (0.3, 1.7):
        np.testing.assert_allclose(build_state(u, 6, 1).coefficients, build_state(-u, 6, 0).coefficients, atol=1e-12)


@pytest.mark.parametrize("rungs", [2, 4, 6, 8])
@pytest.mark.parametrize("u", [0.0, 0.5, 1.0, 2.0])
def test_norm_and_overlap_match_dense(u, rungs):
    N = rungs // 2
    s1 = build_state(u, rungs, 0)
    assert math.log(s1.norm_squared) == pytest.approx(log_norm_closed_form(u, N), rel=1e-10, abs=1e-12)
    dense = float(s1.normalized().coefficients @ build_state(u, rungs, 1).normalized().coefficients)
    assert dense == pytest.approx(overlap_closed_form(u, N), rel=1e-10, abs=1e-12)


def test_overlap_examples():
    assert overlap_closed_form(0.0, 7) == 1.0
    assert overlap_closed_form(1.0, 2) == pytest.approx(0.25, abs=1e-15)
    assert build_state(1.0, 4).norm_squared == pytest.approx(256.0)
    assert overlap_closed_form(1.0, 10**6) < 1e-100
    assert overlap_closed_form(inv_u=0.0, N=3) == pytest.approx(1.0)


@given(st.floats(-50, 50), st.integers(1, 10**7))
def test_overlap_bounded_and_even(u, N):
    p = overlap_closed_form(u, N)
    assert 0.0 <= p <= 1.0 + 1e-12
    assert p == overlap_closed_form(-u, N)
    assert math.isfinite(log_norm_closed_form(u, N))


@pytest.mark.parametrize("rungs", [2, 4, 6, 8])
def test_translation_swaps_the_dimerized_states(rungs):
    s = build_state(0.6, rungs, 0)
    moved = translate(s)
    np.testing.assert_allclose(moved.coefficients, build_state(0.6, rungs, 1).coefficients, atol=1e-12)
    np.testing.assert_allclose(translate(s, rungs).coefficients, s.coefficients)


def test_build_state_validation():
    with pytest.raises(ValueError):
        build_state(1.0, 10)
    with pytest.raises(ValueError):
        build_state(1.0, 5)
    with pytest.raises(ValueError):
        build_state(1.0, 4, offset=2)


def test_orthogonalize():
    phi1, phi2 = ground_pair(1.0, 4)
    assert abs(phi1.coefficients @ phi2.coefficients) < 1e-12
    assert np.linalg.norm(phi2.coefficients) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(phi1.coefficients, build_state(1.0, 4).normalized().coefficients)
    with pytest.raises(DegeneratePairError):
        ground_pair(0.0, 4)
    # already-orthogonal input is passed through
    a, b = orthogonalize(phi1, phi2)
    np.testing.assert_allclose(b.coefficients, phi2.coefficients, atol=1e-15)


def test_superpose():
    phi1, phi2 = ground_pair(1.0, 4)
    np.testing.assert_allclose(superpose(1, 0, phi1, phi2).coefficients, phi1.coefficients)
    np.testing.assert_allclose(superpose(0, 1, phi1, phi2).coefficients, phi2.coefficients)
    s = superpose(1 / SQ2, 1j / SQ2, phi1, phi2)
    assert np.linalg.norm(s.coefficients) == pytest.approx(1.0, abs=1e-12)
    with pytest.warns(UserWarning):
        s = superpose(1.0, 1.0, phi1, phi2)
    assert abs(s.a) ** 2 + abs(s.b) ** 2 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        superpose(0, 0, phi1, phi2)


def test_haar_coefficients_on_sphere():
    c = haar_coefficients(np.random.default_rng(1), 500)
    np.testing.assert_allclose(np.abs(c[:, 0]) ** 2 + np.abs(c[:, 1]) ** 2, 1.0, atol=1e-12)
    # |a|^2 is uniform on [0, 1]
    assert abs(np.mean(np.abs(c[:, 0]) ** 2) - 0.5) < 0.05
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        haar_coefficients(np.random.default_rng(1), 1)
