"""Transfer operators and thermodynamic-limit reduced density matrices.

The doubled auxiliary space is 2 x 2 = 4 dimensional.  For a ket built from
``g_ket`` and a bra built from ``g_bra`` the plain transfer operator is
``sum_m kron(g_ket^m, g_bra^m)``; an operator insertion weights the pair
``(m, m')`` by ``<m'|op|m>``.

All routines take a point either as ``u`` or as ``inv_u = 1/u``.  Passing
``dps`` switches the whole contraction to ``mpmath`` at that many digits,
which the entanglement-length fits need (the signal there sits 50+ orders of
magnitude below the entropy itself).
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field

import numpy as np

from .mps import g_tensor, ray
from .rung_basis import BASIS_LABELS, RungOperator, spin_operator

PAIR_LABELS = tuple(f"{a},{b}" for a in BASIS_LABELS for b in BASIS_LABELS)


@dataclass(frozen=True)
class TransferOperator:
    matrix: np.ndarray
    u_bra: float
    u_ket: float
    insertion: str | None = None

    def eigenvalues(self) -> np.ndarray:
        w = np.linalg.eigvals(np.asarray(self.matrix, dtype=float))
        return w[np.argsort(-np.abs(w))]


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    basis_labels: tuple[str, ...] = field(default=BASIS_LABELS)
    separation: int | None = None
    parity: int | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self):
        return np.trace(self.matrix)

    def eigenvalues(self) -> np.ndarray:
        return _eigvalsh(self.matrix)

    def check(self, tol: float = 1e-12) -> None:
        """Raise ``ValueError`` unless Hermitian, unit-trace and PSD within ``tol``."""
        m = self.matrix
        if m.dtype == object:
            m = np.array(m.tolist(), dtype=float)
        herm = np.abs(m - m.conj().T).max()
        tr = abs(np.trace(m) - 1.0)
        low = np.linalg.eigvalsh(m).min()
        if herm > tol or tr > tol or low < -tol:
            raise ValueError(f"not a density matrix: hermiticity {herm:.2e}, trace error {tr:.2e}, min eig {low:.2e}")

    def reduce(self, keep: int) -> "DensityMatrix":
        """Partial trace of a two-rung matrix down to rung ``keep`` (0 or 1)."""
        if self.dim != 16:
            raise ValueError("reduce() applies to two-rung density matrices")
        t = self.matrix.reshape(4, 4, 4, 4)
        m = np.einsum("ikjk->ij", t) if keep == 0 else np.einsum("kikj->ij", t)
        return DensityMatrix(m, BASIS_LABELS)


# --- linear algebra that works for float and mpmath object arrays -----------


def _mp():
    import mpmath

    return mpmath


def _eigh(m: np.ndarray):
    """Ascending eigenpairs of a real symmetric matrix (float or mpmath)."""
    if m.dtype == object:
        mp = _mp()
        w, v = mp.eigsy(mp.matrix(m.tolist()))
        n = m.shape[0]
        w = np.array([w[i] for i in range(n)], dtype=object)
        v = np.array([[v[i, j] for j in range(n)] for i in range(n)], dtype=object)
        order = np.argsort(np.array([float(x) for x in w]))
        return w[order], v[:, order]
    return np.linalg.eigh(m)


def _eigvalsh(m: np.ndarray) -> np.ndarray:
    if m.dtype == object:
        mp = _mp()
        w = mp.eigsy(mp.matrix(m.tolist()), eigvals_only=True)
        return np.array(sorted((w[i] for i in range(m.shape[0])), key=float), dtype=object)
    return np.linalg.eigvalsh(m)


def _point(u, inv_u, dps):
    a, b = ray(u, inv_u)
    if dps is not None:
        mp = _mp()
        a, b = mp.mpf(a), mp.mpf(b)
    return a, b


def _precision(dps):
    return _mp().workdps(int(dps)) if dps is not None else contextlib.nullcontext()


# --- transfer operators ------------------------------------------------------


def e_tensor(g_ket: np.ndarray, g_bra: np.ndarray) -> np.ndarray:
    """``E[m, m'] = kron(g_ket^m, g_bra^m')`` as a ``(4, 4, 4, 4)`` array."""
    e = np.einsum("abm,cdn->mnacbd", g_ket, g_bra)
    return e.reshape(4, 4, 4, 4)


def _tm(g_ket: np.ndarray, g_bra: np.ndarray, op: np.ndarray | None = None) -> np.ndarray:
    e = e_tensor(g_ket, g_bra)
    if op is None:
        return np.einsum("mmij->ij", e)
    # weight of (m ket, m' bra) is <m'|op|m>
    return np.einsum("nm,mnij->ij", np.asarray(op), e)


def transfer_matrix(u_bra: float, u_ket: float) -> TransferOperator:
    return TransferOperator(_tm(g_tensor(u_ket, 1.0), g_tensor(u_bra, 1.0)), u_bra, u_ket)


def operator_tm(u_bra: float, u_ket: float, op) -> TransferOperator:
    label = op.label if isinstance(op, RungOperator) else None
    m = op.matrix if isinstance(op, RungOperator) else np.asarray(op)
    mat = _tm(g_tensor(u_ket, 1.0), g_tensor(u_bra, 1.0), m)
    if np.iscomplexobj(mat):
        mat = mat.real
    return TransferOperator(mat, u_bra, u_ket, label or "op")


class _Environment:
    """Dominant-eigenvector environment of the dimerized state at one point.

    The unit cell is two rungs, ``g(u) g(-u)``.  Its transfer operator is
    diagonalized once; long strings of plain transfer operators are then
    ``sum_k (w_k / w_max)^p v_k v_k^T`` so nothing larger than 1 is ever powered.
    """

    def __init__(self, a, b):
        self.gp = g_tensor(a, b)
        self.gm = g_tensor(-a, b)
        self.t_plus = _tm(self.gp, self.gp)
        self.t_minus = _tm(self.gm, self.gm)
        cell = self.t_plus @ self.t_minus
        w, v = _eigh(cell)
        self.cell_eigs = w
        self.cell_vecs = v
        self.lam_cell = w[-1]
        if not float(self.lam_cell) > 0:
            raise ArithmeticError("unit-cell transfer operator has no positive dominant eigenvalue")
        self.left = v[:, -1]

    def g_at(self, k: int, parity: int) -> np.ndarray:
        return self.gp if (k + parity) % 2 == 0 else self.gm

    def plain_string(self, length: int, start: int) -> np.ndarray:
        """Normalized product of ``length`` plain rung transfer operators."""
        cells, extra = divmod(length, 2)
        w = self.cell_eigs / self.lam_cell
        m = (self.cell_vecs * w**cells) @ self.cell_vecs.T
        if extra:
            single = self.t_plus if start % 2 == 0 else self.t_minus
            m = m @ single
        return m


def _environment(u=None, inv_u=None, dps=None) -> _Environment:
    a, b = _point(u, inv_u, dps)
    return _Environment(a, b)


def rho_single_tdl(u=None, *, inv_u=None, dps=None) -> DensityMatrix:
    """One-rung reduced density matrix of a dimerized ground state in the infinite chain."""
    with _precision(dps):
        env = _environment(u, inv_u, dps)
        l = env.left
        e = e_tensor(env.gp, env.gp)
        m = np.einsum("a,mnab,b->mn", l, e, l)
        m = m / np.trace(m)
    return DensityMatrix(m, BASIS_LABELS)


def rho_pair_tdl(u=None, n: int = 1, parity: int = 0, *, inv_u=None, dps=None) -> DensityMatrix:
    """Two-rung reduced density matrix for rungs ``i`` and ``i + n``.

    ``parity = 0`` puts rung ``i`` on a ``g(u)`` site, ``parity = 1`` on a
    ``g(-u)`` site.  Indices are ordered ``(rung i) x (rung i+n)``.
    """
    if n < 1:
        raise ValueError(f"separation must be >= 1, got {n}")
    if parity not in (0, 1):
        raise ValueError("parity must be 0 or 1")
    with _precision(dps):
        env = _environment(u, inv_u, dps)
        l = env.left
        ei = e_tensor(env.g_at(0, parity), env.g_at(0, parity))
        ej = e_tensor(env.g_at(n, parity), env.g_at(n, parity))
        mid = env.plain_string(n - 1, 1 + parity)
        left = np.einsum("a,mnab->mnb", l, ei)
        left = np.einsum("mnb,bc->mnc", left, mid)
        right = np.einsum("kocd,d->koc", ej, l)
        rho = np.einsum("mnc,koc->mkno", left, right).reshape(16, 16)
        rho = rho / np.trace(rho)
    return DensityMatrix(rho, PAIR_LABELS, separation=n, parity=parity)


def string_expectation(u, n: int, op_i, op_j, parity: int = 0, *, inv_u=None) -> float:
    """``<op_i(rung i) op_j(rung i+n)>`` evaluated as a string of transfer operators."""
    env = _environment(u, inv_u, None)
    l = env.left
    gi, gj = env.g_at(0, parity), env.g_at(n, parity)
    mid = env.plain_string(n - 1, 1 + parity)
    oi = np.real(_tm(gi, gi, op_i))
    oj = np.real(_tm(gj, gj, op_j))
    num = l @ oi @ mid @ oj @ l
    den = l @ _tm(gi, gi) @ mid @ _tm(gj, gj) @ l
    return float(num / den)


def spin_correlation_tm(u=None, n: int = 1, parity: int = 0, *, inv_u=None) -> float:
    """``<S^z_{1,i} S^z_{1,i+n}>`` from transfer-operator strings."""
    if n < 1:
        raise ValueError("separation must be >= 1")
    sz = spin_operator(1, "z").matrix
    return string_expectation(u, n, sz, sz, parity, inv_u=inv_u)


def spin_correlation(u=None, n: int = 1, parity: int = 0, *, inv_u=None) -> float:
    """Closed form of the leg-1 ``S^z`` correlator at rung separation ``n``.

    With ``z_pm = (u +- 1)^2 / (u^2 + 3)`` and ``k = n // 2``::

        C(2k)   =  (u^2+3)^-1 (z+ z-)^k
        C(2k+1) = -(u^2+3)^-1 (z+ z-)^k z_odd

    where ``z_odd = z-`` when rung ``i`` starts a ``g(u) g(-u)`` cell
    (``parity = 0``) and ``z+`` otherwise.
    """
    if n < 1:
        raise ValueError("separation must be >= 1")
    a, b = ray(u, inv_u)
    z = a * a + 3 * b * b
    zp = (a + b) ** 2 / z
    zm = (a - b) ** 2 / z
    pre = b * b / z
    k = n // 2
    val = pre * (zp * zm) ** k
    if n % 2:
        val = -val * (zm if parity == 0 else zp)
    return float(val)


def _log_decay(u=None, inv_u=None) -> float:
    """``ln |(u^2 + 3) / (u^2 - 1)|`` without overflow in either variable."""
    a, b = ray(u, inv_u)
    q, w = float(a) ** 2, float(b) ** 2
    if q == w:
        return math.inf
    if q > w:
        t = w / q
        return math.log1p(3 * t) - math.log1p(-t)
    t = q / w
    return math.log(3.0) + math.log1p(t / 3) - math.log1p(-t)


def correlation_length(u=None, *, inv_u=None) -> float:
    """Decay length of the spin correlator, in rungs; 0 at ``|u| = 1``, inf at ``1/u = 0``."""
    rate = _log_decay(u, inv_u)
    return 1.0 / rate if rate else math.inf


def subleading_ratio(u=None, *, inv_u=None) -> float:
    """``(u^2 - 1)/(u^2 + 3)``: subleading over leading single-rung eigenvalue."""
    a, b = ray(u, inv_u)
    q, w = a * a, b * b
    return (q - w) / (q + 3 * w)
