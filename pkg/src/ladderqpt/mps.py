"""Matrix-product ground states: g-matrices, dense finite rings and their overlaps.

Conventions
-----------
``N`` always counts two-rung unit cells; a ring has ``2N`` rungs.  The
dimerized state with ``offset=0`` starts with ``g(u)`` on rung 0
(``Tr g(u) g(-u) g(u) ...``); ``offset=1`` starts with ``g(-u)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import MAX_RUNGS, _check_rungs
from .numerics import log1p_weighted_pow, log_sum_pow
from .rung_basis import BASIS_LABELS

_SQ2 = math.sqrt(2.0)

_T_PLUS, _T_ZERO, _T_MINUS, _S = range(4)


class DegeneratePairError(ValueError):
    """The two dimerized states coincide (``u = 0``); there is a single ground state."""


def g_tensor(a, b) -> np.ndarray:
    """Homogeneous g-matrix ``b * g(a/b)`` as a ``(2, 2, 4)`` array.

    Using the pair ``(a, b)`` instead of ``u = a/b`` lets the rung-singlet
    limit ``u -> inf`` be reached at ``(1, 0)``.  Object arrays (``mpmath``)
    pass straight through.
    """
    mp = is_mp(a) or is_mp(b)
    zero = a * 0
    g = np.full((2, 2, 4), zero, dtype=object if mp else float)
    sq2 = _mp_sqrt2() if mp else _SQ2
    g[0, 0, _S] = a
    g[0, 0, _T_ZERO] = b
    g[0, 1, _T_PLUS] = -sq2 * b
    g[1, 0, _T_MINUS] = sq2 * b
    g[1, 1, _S] = a
    g[1, 1, _T_ZERO] = -b
    return g


def is_mp(x) -> bool:
    return type(x).__module__.startswith("mpmath")


def _mp_sqrt2():
    import mpmath

    return mpmath.sqrt(2)


def g_matrix(u: float) -> np.ndarray:
    """``g(u)``: entries ``(u s + t0, -sqrt2 t+; sqrt2 t-, u s - t0)``."""
    return g_tensor(float(u), 1.0)


def ray(u=None, inv_u=None) -> tuple:
    """Homogeneous coordinates for either ``u`` or ``1/u`` (exactly one given)."""
    if (u is None) == (inv_u is None):
        raise ValueError("give exactly one of u and inv_u")
    if u is not None:
        return u, u * 0 + 1
    return inv_u * 0 + 1, inv_u


@dataclass
class FiniteState:
    coefficients: np.ndarray
    rungs: int
    u: float
    offset: int = 0

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.coefficients, self.coefficients).real)

    def normalized(self) -> "FiniteState":
        return FiniteState(self.coefficients / math.sqrt(self.norm_squared), self.rungs, self.u, self.offset)

    def tensor(self) -> np.ndarray:
        return self.coefficients.reshape((4,) * self.rungs)


def _trace_product(gs: list[np.ndarray]) -> np.ndarray:
    acc = gs[0]
    for g in gs[1:]:
        d = acc.shape[-1]
        acc = np.einsum("abp,bcm->acpm", acc, g).reshape(2, 2, d * 4)
    return np.einsum("aap->p", acc)


def build_state(u: float, rungs: int, offset: int = 0) -> FiniteState:
    """Unnormalized periodic trace state on ``rungs`` rungs."""
    _check_rungs(rungs, MAX_RUNGS)
    if offset not in (0, 1):
        raise ValueError(f"offset must be 0 or 1, got {offset!r}")
    gp, gm = g_matrix(u), g_matrix(-u)
    gs = [gp if (k + offset) % 2 == 0 else gm for k in range(rungs)]
    return FiniteState(_trace_product(gs), rungs, u, offset)


def translate(state: FiniteState, shift: int = 1) -> FiniteState:
    """Move the content of rung ``j`` to rung ``j + shift`` (periodic)."""
    t = state.tensor()
    for _ in range(shift % state.rungs):
        t = np.moveaxis(t, -1, 0)
    return FiniteState(t.reshape(-1), state.rungs, state.u, (state.offset + shift) % 2)


def log_norm_closed_form(u: float, N: int) -> float:
    """``log N0(u)`` with ``N0 = (u^2+3)^{2N} + 3 (u^2-1)^{2N}``."""
    u2 = u * u
    return log_sum_pow([u2 + 3.0, u2 - 1.0], [1.0, 3.0], 2 * N)


def norm_closed_form(u: float, N: int) -> float:
    return math.exp(log_norm_closed_form(u, N))


def overlap_closed_form(u=None, N: int = 1, *, inv_u=None) -> float:
    """``<psi1|psi2>`` of the two normalized dimerized states on ``2N`` rungs.

    Written against the dominant base ``(a^2 + 3b^2)``::

        p = [3 c^{2N} + d^{2N}] / [1 + 3 r^{2N}]

    with ``r, c, d = (a^2-b^2, a^2+b^2, a^2-3b^2) / (a^2+3b^2)``, all of modulus <= 1.
    """
    a, b = ray(u, inv_u)
    q, w = a * a, b * b
    z = q + 3 * w
    k = 2 * N
    r, c, d = (q - w) / z, (q + w) / z, (q - 3 * w) / z
    num = 3.0 * abs(c) ** k + abs(d) ** k
    return num / math.exp(log1p_weighted_pow(r, 3.0, k))


def orthogonalize(psi1: FiniteState, psi2: FiniteState, tol: float = 1e-12):
    """Gram-Schmidt on a normalized pair: ``phi1 = psi1``, ``phi2`` orthogonal to it."""
    v1 = psi1.coefficients
    v2 = psi2.coefficients
    for v in (v1, v2):
        if abs(np.vdot(v, v).real - 1.0) > 1e-10:
            raise ValueError("orthogonalize expects normalized states")
    ov = np.vdot(v1, v2)
    n_tilde = 1.0 - abs(ov) ** 2
    if n_tilde <= tol:
        raise DegeneratePairError(f"states coincide (|overlap| = {abs(ov):.15g}); ground state is unique")
    phi2 = (v2 - ov * v1) / math.sqrt(n_tilde)
    return (
        FiniteState(v1.copy(), psi1.rungs, psi1.u, psi1.offset),
        FiniteState(phi2, psi2.rungs, psi2.u, psi2.offset),
    )


def ground_pair(u: float, rungs: int):
    """Orthonormal pair spanning the two-fold degenerate ground space."""
    psi1 = build_state(u, rungs, 0).normalized()
    psi2 = build_state(u, rungs, 1).normalized()
    return orthogonalize(psi1, psi2)


@dataclass
class SuperposedState:
    a: complex
    b: complex
    coefficients: np.ndarray
    rungs: int


def superpose(a: complex, b: complex, phi1: FiniteState, phi2: FiniteState) -> SuperposedState:
    """``a |phi1> + b |phi2>`` for an orthonormal pair; renormalizes ``(a, b)`` if needed."""
    weight = abs(a) ** 2 + abs(b) ** 2
    if weight == 0.0:
        raise ValueError("a and b cannot both vanish")
    if abs(weight - 1.0) > 1e-12:
        warnings.warn(f"|a|^2+|b|^2 = {weight:.6g}; renormalizing", stacklevel=2)
        s = math.sqrt(weight)
        a, b = a / s, b / s
    vec = a * phi1.coefficients + b * phi2.coefficients
    if np.iscomplexobj(vec) and not np.any(np.imag(vec)):
        vec = vec.real
    return SuperposedState(complex(a), complex(b), vec, phi1.rungs)


def haar_coefficients(rng: np.random.Generator, size: int) -> np.ndarray:
    """``(size, 2)`` complex pairs uniform on the unit 3-sphere."""
    g = rng.standard_normal((size, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.column_stack([g[:, 0] + 1j * g[:, 1], g[:, 2] + 1j * g[:, 3]])


def configuration_label(index: int, rungs: int) -> str:
    digits = np.unravel_index(index, (4,) * rungs)
    return "".join(f"|{BASIS_LABELS[d]}>" for d in digits)
