import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ladderqpt.model import (
    compare_spin_form_with_projector,
    couplings,
    energy_residual,
    ground_energy_per_rung,
    j0_level_from_couplings,
    ladder_hamiltonian_spin,
    local_hamiltonian,
    total_sz,
)
from ladderqpt.mps import build_state, g_matrix

us = st.floats(-5, 5, allow_nan=False)


def test_coupling_examples():
    c = couplings(1.0)
    assert (c.K, c.J_r, c.V, c.J, c.eps1, c.eps2) == pytest.approx((0, 0, 4, 3, 4, 4))
    c = couplings(0.0)
    assert (c.K, c.J_r, c.V, c.J, c.eps1, c.eps2) == pytest.approx((-1.5, -1.5, 9 / 4, 15 / 16, 15 / 8, 9 / 8))
    assert c.J_d == 0.0
    with pytest.raises(ValueError):
        couplings(1.0, eps0=0.0)


@given(us)
def test_couplings_and_energy_even(u):
    a, b = couplings(u), couplings(-u)
    assert (a.J, a.J_r, a.V, a.K, a.eps1, a.eps2) == (b.J, b.J_r, b.V, b.K, b.eps1, b.eps2)
    assert ground_energy_per_rung(u) == ground_energy_per_rung(-u)
    assert a.eps1 > 0 and a.eps2 > 0


def test_ground_energy_examples():
    assert ground_energy_per_rung(1.0) == -2.25
    assert ground_energy_per_rung(0.0) == pytest.approx(-57 / 64)


@pytest.mark.parametrize("u", [0.0, 0.5, 1.0, 2.0, 4.0])
def test_local_hamiltonian_spectrum(u):
    c = couplings(u)
    w = np.sort(np.linalg.eigvalsh(local_hamiltonian(u)))
    expected = np.sort([c.eps0] + [c.eps1] * 3 + [c.eps2] * 5 + [0.0] * 7)
    np.testing.assert_allclose(w, expected, atol=1e-12)
    assert w.min() >= -1e-12


@given(us)
def test_local_hamiltonian_kills_dimer_products(u):
    gp, gm = g_matrix(u), g_matrix(-u)
    h = local_hamiltonian(u)
    for a in range(2):
        for c in range(2):
            v = sum(np.kron(gp[a, b], gm[b, c]) for b in range(2))
            assert np.abs(h @ v).max() < 1e-10 * max(1.0, u * u)


def test_spin_form_hamiltonian_commutes_with_total_sz():
    h = ladder_hamiltonian_spin(couplings(0.7), 4).todense()
    sz = np.diag(total_sz(4))
    assert np.abs(h @ sz - sz @ h).max() < 1e-10


def test_spin_form_hamiltonian_ground_energy_at_u1():
    psi = build_state(1.0, 4).normalized().coefficients
    h = ladder_hamiltonian_spin(couplings(1.0), 4)
    assert energy_residual(h, psi, 4 * ground_energy_per_rung(1.0)) < 1e-8


@pytest.mark.parametrize("u", [0.5, 1.0, 2.0])
def test_spin_form_projector_finding(u):
    f = compare_spin_form_with_projector(u)
    # the literal identity does not hold; the discrepancy is isolated in the J=0 plaquette channel
    assert not f.consistent
    assert f.residual_outside_j0 < 1e-10
    assert f.j0_level_spin == pytest.approx(j0_level_from_couplings(u), rel=1e-12)
    assert "SPIN-FORM-J0-LEVEL" in f.describe()


def test_rung_count_validation():
    with pytest.raises(ValueError):
        ladder_hamiltonian_spin(couplings(1.0), 3)
    with pytest.raises(ValueError):
        ladder_hamiltonian_spin(couplings(1.0), 10)
    with pytest.raises(ValueError):
        ladder_hamiltonian_spin(couplings(1.0), 6).todense()
