import itertools
import math

import numpy as np
import pytest

from ladderqpt.rung_basis import (
    BASIS_LABELS,
    clebsch_gordan,
    clebsch_tt,
    positive_multiplets,
    rung_state,
    spin_operator,
    total_spin_squared_two_rungs,
    two_rung,
    two_rung_multiplet,
)

SQ3 = math.sqrt(3.0)


def test_rung_states_are_unit_vectors():
    assert rung_state("s").tolist() == [0, 0, 0, 1]
    assert rung_state("t0").tolist() == [0, 1, 0, 0]
    assert rung_state("t+").tolist() == [1, 0, 0, 0]
    with pytest.raises(ValueError):
        rung_state("x")


def test_sz_on_triplet_and_singlet():
    sz = spin_operator(1, "z").matrix
    np.testing.assert_allclose(sz @ rung_state("t+"), 0.5 * rung_state("t+"), atol=1e-15)
    np.testing.assert_allclose(sz @ rung_state("s"), 0.5 * rung_state("t0"), atol=1e-15)


def test_spin_algebra_per_leg_and_across_legs():
    for leg in (1, 2):
        sx, sy, sz = (spin_operator(leg, a).matrix for a in "xyz")
        np.testing.assert_allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-14)
        np.testing.assert_allclose(sx @ sx + sy @ sy + sz @ sz, 0.75 * np.eye(4), atol=1e-14)
    for a, b in itertools.product("xyz", repeat=2):
        m1, m2 = spin_operator(1, a).matrix, spin_operator(2, b).matrix
        np.testing.assert_allclose(m1 @ m2 - m2 @ m1, 0, atol=1e-14)


def test_bad_operator_labels():
    with pytest.raises(ValueError):
        spin_operator(3, "z")
    with pytest.raises(ValueError):
        spin_operator(1, "w")


def test_clebsch_gordan_against_sympy():
    cg = pytest.importorskip("sympy.physics.quantum.cg")
    from sympy import Rational

    half = Rational(1, 2)
    cases = []
    for j1, j2 in [(1, 1), (half, half), (1, half), (2, 1)]:
        for j in np.arange(abs(j1 - j2), j1 + j2 + 1):
            j = Rational(j).limit_denominator(2)
            for m1 in np.arange(-j1, j1 + 1):
                for m2 in np.arange(-j2, j2 + 1):
                    cases.append((j1, Rational(m1).limit_denominator(2), j2, Rational(m2).limit_denominator(2), j))
    for j1, m1, j2, m2, j in cases:
        m = m1 + m2
        if abs(m) > j:
            continue
        ref = float(cg.CG(j1, m1, j2, m2, j, m).doit())
        got = clebsch_gordan(float(j1), float(m1), float(j2), float(m2), float(j), float(m))
        assert got == pytest.approx(ref, abs=1e-14), (j1, m1, j2, m2, j)


def test_triplet_pair_tables():
    tt = lambda a, b: two_rung(rung_state(a), rung_state(b))  # noqa: E731
    np.testing.assert_allclose(clebsch_tt(0, 0), (tt("t+", "t-") - tt("t0", "t0") + tt("t-", "t+")) / SQ3, atol=1e-15)
    np.testing.assert_allclose(clebsch_tt(2, 2), tt("t+", "t+"), atol=1e-15)
    np.testing.assert_allclose(clebsch_tt(1, 1), (tt("t+", "t0") - tt("t0", "t+")) / math.sqrt(2), atol=1e-15)


def test_multiplet_examples():
    ss = two_rung(rung_state("s"), rung_state("s"))
    np.testing.assert_allclose(two_rung_multiplet(0.0, 0, 0), ss, atol=1e-15)
    np.testing.assert_allclose(two_rung_multiplet(1.0, 0, 0), (SQ3 * ss - clebsch_tt(0, 0)) / 2, atol=1e-15)
    st0 = two_rung(rung_state("s"), rung_state("t0")) + two_rung(rung_state("t0"), rung_state("s"))
    for u in (0.0, 0.7, 3.0):
        np.testing.assert_allclose(two_rung_multiplet(u, 1, 0), st0 / math.sqrt(2), atol=1e-15)
    with pytest.raises(ValueError):
        two_rung_multiplet(1.0, 3, 0)
    with pytest.raises(ValueError):
        two_rung_multiplet(1.0, 1, 2)


@pytest.mark.parametrize("u", [0.0, 0.5, 1.0, 2.0, 7.0])
def test_multiplets_orthonormal_and_spin_eigenstates(u):
    trips = positive_multiplets(u)
    vecs = np.array([v for _, _, v in trips])
    np.testing.assert_allclose(vecs @ vecs.T, np.eye(9), atol=1e-12)
    s2 = total_spin_squared_two_rungs()
    for J, _, v in trips:
        np.testing.assert_allclose(s2 @ v, J * (J + 1) * v, atol=1e-12)


def test_basis_labels_order():
    assert BASIS_LABELS == ("t+", "t0", "t-", "s")
