import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ladderqpt.fidelity import (
    DegenerateOverlapError,
    StepTooLargeError,
    alpha_asymptotic,
    alpha_tilde,
    chi_f,
    collapse_dataset,
    curvature_report,
    d_of_u,
    d_tilde,
    estimate_nu,
    fidelity_closed,
    fidelity_closed_tilde,
    log_alpha,
    log_fidelity,
)
from ladderqpt.mps import ground_pair


def dense_average_fidelity(u1, u2, rungs):
    """Exact Haar average of <phi(u1)|phi(u2)> with shared (a, b): E[conj(a_i) a_j] = delta_ij / 2."""
    p = ground_pair(u1, rungs)
    q = ground_pair(u2, rungs)
    gram = np.array([[x.coefficients @ y.coefficients for y in q] for x in p])
    return 0.5 * np.trace(gram)


def mp_fidelity(u1, u2, N, dps=300):
    """The averaged-overlap formula evaluated term by term at high precision."""
    with mp.workdps(dps or mp.mp.dps):
        u1, u2 = mp.mpf(u1), mp.mpf(u2)
        k = 2 * N
        q1, q2, x = u1 * u1, u2 * u2, u1 * u2
        n1 = (q1 + 3) ** k + 3 * (q1 - 1) ** k
        n2 = (q2 + 3) ** k + 3 * (q2 - 1) ** k
        p1 = (3 * (q1 + 1) ** k + (q1 - 3) ** k) / n1
        p2 = (3 * (q2 + 1) ** k + (q2 - 3) ** k) / n2
        same = ((x + 3) ** k + 3 * (x - 1) ** k) / mp.sqrt(n1 * n2)
        cross = ((x - 3) ** k + 3 * (x + 1) ** k) / mp.sqrt(n1 * n2)
        s = mp.sqrt((1 - p1**2) * (1 - p2**2))
        return +(same * (1 + (1 + p1 * p2) / s) - (p1 + p2) * cross / s) / 2


def mp_log_fidelity(u1, u2, N, dps=300):
    with mp.workdps(dps or mp.mp.dps):
        return mp.log(mp_fidelity(u1, u2, N, dps))


@pytest.mark.parametrize("rungs", [4, 6, 8])
@pytest.mark.parametrize("u1,u2", [(1.0, 1.1), (0.5, 2.0), (-0.7, 0.3), (3.0, 3.0)])
def test_closed_form_equals_exact_average(u1, u2, rungs):
    ref = dense_average_fidelity(u1, u2, rungs)
    got = fidelity_closed(u1, u2, rungs // 2)
    assert got.value == pytest.approx(ref, rel=1e-10)
    assert got.log_value == pytest.approx(math.log(abs(ref)), rel=1e-10, abs=1e-14)


@given(
    st.floats(1e-2, 1e2),
    st.sampled_from([1e-6, 1e-3, 0.1, 1.0, -0.5]),
    st.sampled_from([2, 3, 10, 100, 1000, 10**5]),
    st.booleans(),
)
def test_log_fidelity_against_high_precision(u1, rel, N, flip):
    u2 = u1 * (1 + rel)
    if flip:
        u1 = -u1
    with mp.workdps(300):
        ref = mp_fidelity(u1, u2, N)
        log_ref = float(mp.log(abs(ref)))
    assume(math.isfinite(log_ref))
    got = fidelity_closed(u1, u2, N)
    if flip:
        # F(u, -u) = 0: the two dimerized states swap, so only absolute accuracy is meaningful
        assert got.value == pytest.approx(float(ref), rel=1e-5, abs=1e-13)
    else:
        assert got.log_value == pytest.approx(log_ref, rel=1e-5, abs=1e-15)
        assert log_fidelity(u1, u2, N) == got.log_value


@given(st.floats(-1e3, 1e3).filter(lambda u: abs(u) > 1e-6), st.integers(2, 10**7))
def test_fidelity_identity_and_symmetry(u, N):
    assert fidelity_closed(u, u, N).value == pytest.approx(1.0, abs=1e-10)
    v = u * 1.01 + 0.01
    a, b = fidelity_closed(u, v, N), fidelity_closed(v, u, N)
    assert a.value == pytest.approx(b.value, rel=1e-12, abs=1e-300)
    assert abs(a.value) <= 1 + 1e-12


def test_fidelity_decreases_with_N():
    vals = [fidelity_closed(1.0, 1.001, N).value for N in (10, 100, 1000, 10**4, 10**5, 10**6)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert fidelity_closed(1.0, 1.1, 10**7).value < 1e-100


def test_degenerate_points():
    with pytest.raises(DegenerateOverlapError):
        fidelity_closed(0.0, 1.0, 10)
    # on the two-rung ring the dimerized states coincide for every u
    with pytest.raises(DegenerateOverlapError):
        fidelity_closed(1.0, 1.2, 1)
    with pytest.raises(ValueError):
        fidelity_closed(1.0, 1.2, 0)


def test_alpha_examples():
    assert alpha_asymptotic(1.0, 1.1) == pytest.approx(16.81 / 16.84, rel=1e-12)
    assert alpha_asymptotic(0.7, 0.7) == pytest.approx(1.0, abs=1e-15)
    for d in (0.01, 0.3):
        assert alpha_asymptotic(0.0, d) == pytest.approx(9 / (3 * d * d + 9), rel=1e-14)
    grid = np.linspace(-2, 2, 401)
    vals = [alpha_asymptotic(u, u + 1e-3) for u in grid]
    assert abs(grid[int(np.argmin(vals))] + 5e-4) < 0.011
    assert alpha_tilde(0.2, 0.2) == pytest.approx(1.0, abs=1e-15)
    assert alpha_tilde(0.2, 0.5) == pytest.approx(alpha_asymptotic(5.0, 2.0), rel=1e-14)
    assert log_alpha(1.0, 1.1) == pytest.approx(math.log(16.81 / 16.84), rel=1e-12)


def test_log_fidelity_per_cell_approaches_log_alpha():
    la = log_alpha(1.0, 1.1)
    for N in (10**3, 10**4, 10**5):
        assert abs(log_fidelity(1.0, 1.1, N) / N - la) < 1e-3 / N
    # at u = 1 the remainder is exponentially small in N, not O(1)
    with mp.workdps(60):
        rest = mp_log_fidelity(1, mp.mpf("1.1"), 10**3, dps=None) - 10**3 * mp.log(mp.mpf("16.81") / mp.mpf("16.84"))
    assert abs(rest) < 1e-50


def test_fidelity_vanishes_between_mirror_points():
    for u in (0.5, 2.0):
        assert abs(fidelity_closed(u, -u, 3).value) < 1e-14
        assert abs(dense_average_fidelity(u, -u, 6)) < 1e-14


def test_mirror_fidelity_matches_direct():
    for t1, t2 in ((0.5, 0.6), (0.02, 0.03)):
        assert fidelity_closed_tilde(t1, t2, 50).value == pytest.approx(
            fidelity_closed(1 / t1, 1 / t2, 50).value, rel=1e-10
        )
    # both dimerized states are the rung-singlet product at 1/u = 0
    with pytest.raises(DegenerateOverlapError):
        fidelity_closed_tilde(0.0, 0.1, 10)


def test_curvature_against_high_precision():
    u, N = 0.7, 50
    with mp.workdps(50):
        ref = float(mp.diff(lambda a, b: mp_log_fidelity(a, b, N, dps=None), (mp.mpf(u), mp.mpf(u)), (1, 1)))
    assert d_of_u(u, N) == pytest.approx(ref, rel=1e-5)
    assert d_of_u(u, N, normalized=True) == pytest.approx(ref, rel=1e-5)


def test_curvature_positive_and_even():
    for u in np.linspace(0.1, 10, 12):
        d = d_of_u(u, 1000)
        assert d > 0 and math.isfinite(d)
        assert d_of_u(-u, 1000) == pytest.approx(d, rel=1e-6)
        c = chi_f(u, 1000)
        assert c > 0 and math.isfinite(c)
        assert chi_f(-u, 1000, -1e-3) == pytest.approx(c, rel=1e-6)


def test_curvature_linear_in_N():
    assert d_of_u(1.0, 2 * 10**5) / d_of_u(1.0, 10**5) == pytest.approx(2.0, rel=0.01)
    assert chi_f(1.0, 2 * 10**4) / chi_f(1.0, 10**4) == pytest.approx(2.0, rel=0.01)


def test_curvature_profile():
    vals = [d_of_u(u, 10**6) * (u * u + 3) ** 2 for u in np.linspace(0.5, 2, 7)]
    assert (max(vals) - min(vals)) / np.mean(vals) < 0.05


def test_chi_matches_curvature_and_normalization_term_vanishes():
    rep = curvature_report(1.0, 10**4)
    assert chi_f(1.0, 10**4, 1e-3) == pytest.approx(rep.unnormalized, rel=0.01)
    assert abs(rep.normalization_difference) < 1e-6 * rep.normalized


def test_step_guards():
    with pytest.raises(ValueError):
        d_of_u(0.0, 100)
    assert math.isfinite(d_of_u(1e-5, 100, h=1e-4))
    with pytest.raises(ValueError):
        chi_f(1.0, 100, 0.0)
    # u + delta = -3 makes the per-cell overlap vanish
    with pytest.raises(StepTooLargeError):
        chi_f(1.0, 100, -4.0, extrapolate=False)


def test_mirror_curvature():
    assert d_tilde(0.01, 2 * 10**4) / d_tilde(0.01, 10**4) == pytest.approx(2.0, rel=0.01)
    vals = [d_tilde(t, 10**5) * (3 * t * t + 1) ** 2 for t in np.linspace(0.3, 1, 8)]
    assert (max(vals) - min(vals)) / np.mean(vals) < 0.05
    assert d_tilde(0.5, 100) == pytest.approx(d_of_u(2.0, 100) * 16, rel=1e-5)


def test_collapse_pair_sharing_scaling_variable():
    a = d_tilde(0.01, 10**4) / 10**4
    b = d_tilde(0.001, 10**6) / 10**6
    assert abs(a - b) / abs(0.5 * (a + b)) < 0.02


def test_collapse_dataset_layout():
    data = collapse_dataset((100, 1000), (0.01, 0.1))
    assert len(data.rows) == 4
    for x, rows in data.groups().items():
        for r in rows:
            assert r.N * r.t**2 == pytest.approx(x, rel=1e-12)
    assert data.score() == max(data.spreads().values())


def test_collapse_holds_at_small_scaling_variable():
    data = collapse_dataset((1000, 10**4, 10**5), tuple(np.logspace(-2, 0, 5)))
    assert data.score() < 0.02
    est = estimate_nu((1000, 10**4, 10**5), tuple(np.logspace(-2, 0, 5)))
    assert est.nu == pytest.approx(2.0, abs=0.1)
