"""Single-rung Hilbert space of the two-leg ladder.

A rung holds two spin-1/2 sites (leg 1, leg 2).  Everything in the package
works in the singlet/triplet basis ordered ``(t+, t0, t-, s)``; this order is
what makes the single-rung reduced density matrix come out as
``diag(t, t, t, s)``.  Two-rung objects use ``kron(rung_i, rung_i+1)``, i.e. the
left tensor factor is the lower rung index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

BASIS_LABELS = ("t+", "t0", "t-", "s")
TRIPLET_M = {"t+": 1, "t0": 0, "t-": -1}
_INDEX = {label: i for i, label in enumerate(BASIS_LABELS)}

# columns: rung states written in the product basis |uu>, |ud>, |du>, |dd> (leg1 x leg2)
_SQ2 = math.sqrt(2.0)
PRODUCT_TO_RUNG = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1 / _SQ2, 0.0, 1 / _SQ2],
        [0.0, 1 / _SQ2, 0.0, -1 / _SQ2],
        [0.0, 0.0, 1.0, 0.0],
    ]
)

_PAULI_HALF = {
    "x": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    "y": np.array([[0.0, -0.5j], [0.5j, 0.0]]),
    "z": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
}


@dataclass(frozen=True)
class RungOperator:
    """A 4x4 operator on one rung, in the ``(t+, t0, t-, s)`` basis."""

    matrix: np.ndarray
    label: str = ""

    def __matmul__(self, other):
        if isinstance(other, RungOperator):
            return RungOperator(self.matrix @ other.matrix, f"{self.label}*{other.label}")
        return self.matrix @ other


def rung_state(label: str) -> np.ndarray:
    """Unit vector for one of ``t+``, ``t0``, ``t-``, ``s``."""
    try:
        idx = _INDEX[label]
    except KeyError:
        raise ValueError(f"unknown rung state {label!r}; expected one of {BASIS_LABELS}") from None
    v = np.zeros(4)
    v[idx] = 1.0
    return v


def spin_operator(leg: int, axis: str) -> RungOperator:
    """Spin-1/2 operator of one leg, rotated into the singlet/triplet basis.

    ``x`` and ``z`` come back real; ``y`` is purely imaginary in this basis and
    is returned as a complex matrix.
    """
    if leg not in (1, 2):
        raise ValueError(f"leg must be 1 or 2, got {leg!r}")
    if axis not in _PAULI_HALF:
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    eye = np.eye(2)
    s = _PAULI_HALF[axis]
    prod = np.kron(s, eye) if leg == 1 else np.kron(eye, s)
    m = PRODUCT_TO_RUNG.T @ prod @ PRODUCT_TO_RUNG
    if axis != "y":
        m = m.real
    return RungOperator(m, f"S{axis} leg {leg}")


def spin_vector(leg: int) -> list[np.ndarray]:
    return [spin_operator(leg, a).matrix for a in "xyz"]


def two_rung(op_i: np.ndarray, op_j: np.ndarray) -> np.ndarray:
    """``op_i`` on the lower rung, ``op_j`` on the upper one (16x16)."""
    return np.kron(np.asarray(op_i), np.asarray(op_j))


def heisenberg(a: list[np.ndarray], b: list[np.ndarray]) -> np.ndarray:
    """``A . B`` for two vector operators already embedded in the same space."""
    out = sum(x @ y for x, y in zip(a, b))
    imag = np.abs(np.imag(out)).max()
    if imag > 1e-12:
        raise ValueError("scalar product of spin operators should be real")
    return np.real(out)


# --- Clebsch-Gordan ---------------------------------------------------------


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """<j1 m1; j2 m2 | j m> via the Racah formula (Condon-Shortley phases).

    Arguments may be ints or half-integers given as ``Fraction``/float.
    """
    j1, m1, j2, m2, j, m = (Fraction(x).limit_denominator(2) for x in (j1, m1, j2, m2, j, m))
    if m1 + m2 != m:
        return 0.0
    if not (abs(j1 - j2) <= j <= j1 + j2):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m) > j:
        return 0.0
    f = math.factorial

    def fi(x):
        if x.denominator != 1 or x < 0:
            raise ValueError("non-integral factorial argument")
        return f(int(x))

    pre = (2 * j + 1) * fi(j + j1 - j2) * fi(j - j1 + j2) * fi(j1 + j2 - j) / fi(j1 + j2 + j + 1)
    pre *= fi(j + m) * fi(j - m) * fi(j1 - m1) * fi(j1 + m1) * fi(j2 - m2) * fi(j2 + m2)
    total = Fraction(0)
    kmin = max(0, int(j2 - j - m1), int(j1 + m2 - j))
    kmax = min(int(j1 + j2 - j), int(j1 - m1), int(j2 + m2))
    for k in range(kmin, kmax + 1):
        den = (
            f(k)
            * fi(j1 + j2 - j - k)
            * fi(j1 - m1 - k)
            * fi(j2 + m2 - k)
            * fi(j - j2 + m1 + k)
            * fi(j - j1 - m2 + k)
        )
        total += Fraction((-1) ** k, den)
    return float(total) * math.sqrt(float(pre))


def _check_jm(J: int, M: int, allowed=(0, 1, 2)) -> None:
    if J not in allowed or not isinstance(M, (int, np.integer)) or abs(M) > J:
        raise ValueError(f"invalid multiplet label J={J!r}, M={M!r}")


def clebsch_tt(J: int, M: int) -> np.ndarray:
    """Total-spin ``(J, M)`` state built from triplets on two neighbouring rungs."""
    _check_jm(J, M)
    v = np.zeros(16)
    for a, ma in TRIPLET_M.items():
        for b, mb in TRIPLET_M.items():
            c = clebsch_gordan(1, ma, 1, mb, J, M)
            if c:
                v += c * two_rung(rung_state(a), rung_state(b))
    return v


def _triplet_label(M: int) -> str:
    return {1: "t+", 0: "t0", -1: "t-"}[M]


def two_rung_multiplet(u: float, J: int, M: int, u_tilde: float | None = None) -> np.ndarray:
    """Normalized positive-energy multiplet component ``|psi_JM>`` of a plaquette.

    ``u_tilde`` defaults to ``-u``, the only branch implemented downstream; then
    the mixing amplitude ``f = (u + u_tilde)/sqrt(2)`` of the J=1 states is zero.
    """
    _check_jm(J, M)
    ut = -u if u_tilde is None else u_tilde
    s = rung_state("s")
    if J == 0:
        uu = u * ut
        v = math.sqrt(3.0) * two_rung(s, s) + uu * clebsch_tt(0, 0)
        return v / math.sqrt(3.0 + uu * uu)
    if J == 1:
        f = (u + ut) / _SQ2
        t = rung_state(_triplet_label(M))
        v = two_rung(s, t) + two_rung(t, s) + f * clebsch_tt(1, M)
        return v / math.sqrt(2.0 + f * f)
    return clebsch_tt(2, M)


def positive_multiplets(u: float) -> list[tuple[int, int, np.ndarray]]:
    """All nine ``(J, M, vector)`` triples entering the plaquette projector."""
    return [(J, M, two_rung_multiplet(u, J, M)) for J in (0, 1, 2) for M in range(J, -J - 1, -1)]


def total_spin_squared_two_rungs() -> np.ndarray:
    """``(S_1 + S_2)^2`` summed over all four spins of a plaquette (16x16)."""
    eye = np.eye(4)
    comps = []
    for axis in "xyz":
        s_rung = spin_operator(1, axis).matrix + spin_operator(2, axis).matrix
        comps.append(two_rung(s_rung, eye) + two_rung(eye, s_rung))
    return heisenberg(comps, comps)
