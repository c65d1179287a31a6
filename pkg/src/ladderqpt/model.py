"""Couplings, plaquette projector Hamiltonian and the full ladder Hamiltonian.

The ladder Hamiltonian is only ever needed at oracle scale (at most 8 rungs,
dimension 65536).  It is represented as a sum of identical two-rung terms and
applied matrix-free; a dense matrix is materialized only for small rings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rung_basis import heisenberg, positive_multiplets, spin_vector, two_rung, two_rung_multiplet

MAX_RUNGS = 8
MAX_DENSE_RUNGS = 4


@dataclass(frozen=True)
class CouplingSet:
    u: float
    J: float
    J_r: float
    J_d: float
    V: float
    K: float
    eps0: float
    eps1: float
    eps2: float

    def eps(self, J: int) -> float:
        return (self.eps0, self.eps1, self.eps2)[J]


def couplings(u: float, eps0: float = 1.0) -> CouplingSet:
    """The one-parameter solution with ``J_d = 0``, ``K = J_r`` and ``u_tilde = -u``."""
    if not eps0 > 0:
        raise ValueError(f"eps0 must be positive, got {eps0!r}")
    u2 = u * u
    u4 = u2 * u2
    k = eps0 * (u2 - 1.0) * (u2 + 3.0) / 2.0
    return CouplingSet(
        u=u,
        J=3.0 * eps0 * (u4 + 10.0 * u2 + 5.0) / 16.0,
        J_r=k,
        J_d=0.0,
        V=eps0 * (5.0 * u4 + 2.0 * u2 + 9.0) / 4.0,
        K=k,
        eps0=eps0,
        eps1=eps0 * (3.0 * u4 + 14.0 * u2 + 15.0) / 8.0,
        eps2=eps0 * (5.0 * u4 + 18.0 * u2 + 9.0) / 8.0,
    )


def ground_energy_per_rung(u: float, eps0: float = 1.0) -> float:
    u2 = u * u
    return -3.0 / 64.0 * eps0 * (7.0 * u2 * u2 + 22.0 * u2 + 19.0)


def local_hamiltonian(u: float, eps0: float = 1.0) -> np.ndarray:
    """Plaquette projector ``sum_JM eps_J |psi_JM><psi_JM|`` (16x16, PSD, rank 9)."""
    c = couplings(u, eps0)
    h = np.zeros((16, 16))
    for J, _, v in positive_multiplets(u):
        h += c.eps(J) * np.outer(v, v)
    return h


def plaquette_term_spin(c: CouplingSet) -> np.ndarray:
    """Two-rung term whose ring sum reproduces the spin form of the ladder Hamiltonian.

    The rung coupling ``J_r S_1j.S_2j`` lives on a single rung; it is split
    evenly between the two plaquettes that contain rung ``j``.
    """
    eye = np.eye(4)
    s1, s2 = spin_vector(1), spin_vector(2)
    s1a = [two_rung(s, eye) for s in s1]
    s1b = [two_rung(eye, s) for s in s1]
    s2a = [two_rung(s, eye) for s in s2]
    s2b = [two_rung(eye, s) for s in s2]
    legs11 = heisenberg(s1a, s1b)
    legs22 = heisenberg(s2a, s2b)
    rung_a = heisenberg(s1a, s2a)
    rung_b = heisenberg(s1b, s2b)
    diag12 = heisenberg(s1a, s2b)
    diag21 = heisenberg(s2a, s1b)
    h = c.J * (legs11 + legs22)
    h = h + 0.5 * c.J_r * (rung_a + rung_b)
    h = h + c.V * legs11 @ legs22
    h = h + c.J_d * (diag12 + diag21)
    h = h + c.K * (diag12 @ diag21 - rung_a @ rung_b)
    return h


def _check_rungs(rungs: int, limit: int = MAX_RUNGS) -> None:
    if not isinstance(rungs, (int, np.integer)) or rungs < 2 or rungs % 2:
        raise ValueError(f"rung count must be an even integer >= 2, got {rungs!r}")
    if rungs > limit:
        raise ValueError(f"rung count {rungs} exceeds the oracle limit {limit}")


def apply_two_rung(op: np.ndarray, psi: np.ndarray, i: int, j: int) -> np.ndarray:
    """Apply a 16x16 operator to rungs ``(i, j)`` of a state tensor of shape ``(4,)*L``."""
    op4 = op.reshape(4, 4, 4, 4)
    out = np.tensordot(op4, psi, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def apply_one_rung(op: np.ndarray, psi: np.ndarray, i: int) -> np.ndarray:
    out = np.tensordot(op, psi, axes=([1], [i]))
    return np.moveaxis(out, 0, i)


class LadderHamiltonian:
    """Periodic ring ``sum_j term(j, j+1) + shift * rungs``, applied matrix-free."""

    def __init__(self, term: np.ndarray, rungs: int, shift: float = 0.0, couplings: CouplingSet | None = None):
        _check_rungs(rungs)
        self.term = np.asarray(term)
        self.rungs = rungs
        self.shift = shift
        self.couplings = couplings

    @property
    def dim(self) -> int:
        return 4**self.rungs

    def matvec(self, v: np.ndarray) -> np.ndarray:
        L = self.rungs
        psi = np.asarray(v).reshape((4,) * L)
        out = np.zeros_like(psi, dtype=np.result_type(psi, self.term))
        for j in range(L):
            out += apply_two_rung(self.term, psi, j, (j + 1) % L)
        out = out.reshape(-1)
        if self.shift:
            out = out + self.shift * L * np.asarray(v)
        return out

    __matmul__ = matvec

    def todense(self) -> np.ndarray:
        if self.rungs > MAX_DENSE_RUNGS:
            raise ValueError(f"dense form limited to {MAX_DENSE_RUNGS} rungs; use matvec")
        eye = np.eye(self.dim)
        return np.column_stack([self.matvec(eye[:, k]) for k in range(self.dim)])


def ladder_hamiltonian_spin(c: CouplingSet, rungs: int) -> LadderHamiltonian:
    return LadderHamiltonian(plaquette_term_spin(c), rungs, couplings=c)


def projector_hamiltonian(u: float, rungs: int, eps0: float = 1.0) -> LadderHamiltonian:
    """``sum_j h_{j,j+1}``; its kernel holds both dimerized MP ground states."""
    return LadderHamiltonian(local_hamiltonian(u, eps0), rungs, couplings=couplings(u, eps0))


def total_sz(rungs: int) -> np.ndarray:
    """Diagonal of total ``S^z`` over the ``(t+, t0, t-, s)^{rungs}`` basis."""
    rung = np.array([1.0, 0.0, -1.0, 0.0])
    out = np.zeros(1)
    for _ in range(rungs):
        out = (out[:, None] + rung[None, :]).reshape(-1)
    return out


@dataclass(frozen=True)
class SpinFormFinding:
    """Outcome of comparing the spin-form Hamiltonian with the projector form.

    ``literal_residual`` is the max-norm of ``H_spin - sum_j (h - E0)`` and
    ``sign_fixed_residual`` that of ``H_spin - sum_j (h + E0)``.  What remains
    after the sign fix sits entirely in the J=0 plaquette channel:
    ``j0_level_spin`` is the energy the spin form assigns to ``|psi_00>``,
    ``j0_level_projector`` the one the projector form assigns (``eps0``).
    """

    u: float
    rungs: int
    literal_residual: float
    sign_fixed_residual: float
    j0_level_spin: float
    j0_level_projector: float
    residual_outside_j0: float

    name = "SPIN-FORM-J0-LEVEL"

    @property
    def consistent(self) -> bool:
        return self.literal_residual < 1e-8

    def describe(self) -> str:
        return (
            f"{self.name}: spin form != sum(h - E0) (max residual {self.literal_residual:.3g}); "
            f"spin form == sum(h + E0) except the J=0 plaquette level, which is "
            f"{self.j0_level_spin:.12g} instead of eps0={self.j0_level_projector:.12g} "
            f"(= eps0*(3+u^4)); residual elsewhere {self.residual_outside_j0:.2e}"
        )


def compare_spin_form_with_projector(u: float, eps0: float = 1.0, rungs: int = 4) -> SpinFormFinding:
    c = couplings(u, eps0)
    e0 = ground_energy_per_rung(u, eps0)
    spin = ladder_hamiltonian_spin(c, rungs).todense()
    proj = projector_hamiltonian(u, rungs, eps0).todense()
    eye = np.eye(spin.shape[0])
    literal = np.abs(spin - (proj - rungs * e0 * eye)).max()
    fixed = np.abs(spin - (proj + rungs * e0 * eye)).max()

    local_diff = plaquette_term_spin(c) - local_hamiltonian(u, eps0) - e0 * np.eye(16)
    v00 = two_rung_multiplet(u, 0, 0)
    level = float(v00 @ (plaquette_term_spin(c) - e0 * np.eye(16)) @ v00)
    p_out = np.eye(16) - np.outer(v00, v00)
    outside = np.abs(p_out @ local_diff @ p_out).max()
    mixed = np.abs(p_out @ local_diff @ v00).max()
    return SpinFormFinding(
        u=u,
        rungs=rungs,
        literal_residual=float(literal),
        sign_fixed_residual=float(fixed),
        j0_level_spin=level,
        j0_level_projector=eps0,
        residual_outside_j0=float(max(outside, mixed)),
    )


def j0_level_from_couplings(u: float, eps0: float = 1.0) -> float:
    """Energy of ``|psi_00>`` implied by the coupling constants: ``eps0 (3 + u^4)``."""
    return eps0 * (3.0 + u**4)


def energy_residual(h: LadderHamiltonian, v: np.ndarray, energy: float = 0.0) -> float:
    v = np.asarray(v)
    return float(np.linalg.norm(h.matvec(v) - energy * v) / math.sqrt(float(np.vdot(v, v).real)))
