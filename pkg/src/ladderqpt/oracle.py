"""Brute-force checks on rings of at most 8 rungs.

Nothing here uses a transfer matrix: states are full ``4^L`` coefficient
vectors, reduced density matrices come from reshaping, and Hamiltonians are
applied term by term.  These are the reference values the closed forms are
tested against, and the source of the checked-in golden table.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .entanglement import von_neumann
from .model import MAX_RUNGS, _check_rungs, apply_two_rung, projector_hamiltonian
from .mps import DegeneratePairError, FiniteState, SuperposedState, build_state, ground_pair, haar_coefficients
from .rung_basis import heisenberg, spin_vector, two_rung
from .transfer import DensityMatrix

DenseState = FiniteState


@dataclass(frozen=True)
class PartialTraceSpec:
    keep: tuple[int, ...]
    rungs: int

    def __post_init__(self):
        keep = tuple(self.keep)
        if not keep:
            raise ValueError("keep must not be empty")
        if any(b <= a for a, b in zip(keep, keep[1:])):
            raise ValueError(f"keep must be strictly increasing, got {keep}")
        if keep[0] < 0 or keep[-1] >= self.rungs:
            raise ValueError(f"keep {keep} out of range for {self.rungs} rungs")
        object.__setattr__(self, "keep", keep)


def _vector(state) -> tuple[np.ndarray, int]:
    if isinstance(state, (FiniteState, SuperposedState)):
        return np.asarray(state.coefficients), state.rungs
    v = np.asarray(state)
    rungs = round(math.log(v.size, 4))
    if 4**rungs != v.size:
        raise ValueError(f"state length {v.size} is not a power of 4")
    return v, rungs


def _kept_matrix(v: np.ndarray, rungs: int, keep: Sequence[int]) -> np.ndarray:
    """Coefficients regrouped as ``(kept configurations) x (traced configurations)``."""
    t = v.reshape((4,) * rungs)
    t = np.moveaxis(t, list(keep), list(range(len(keep))))
    return t.reshape(4 ** len(keep), -1)


def partial_trace(state, keep: Iterable[int], rungs: int | None = None) -> DensityMatrix:
    """Reduced density matrix on the rungs in ``keep``.

    ``state`` is a vector, a :class:`FiniteState`, or a mixture given as a
    list of ``(weight, state)`` pairs.  The result is normalized to unit trace.
    """
    if isinstance(state, list):
        parts = [(w, *_vector(s)) for w, s in state]
    else:
        parts = [(1.0, *_vector(state))]
    size = parts[0][2]
    spec = PartialTraceSpec(tuple(keep), rungs or size)
    if any(p[2] != spec.rungs for p in parts):
        raise ValueError("state size does not match the rung count")
    rho = 0
    for w, v, _ in parts:
        m = _kept_matrix(v, spec.rungs, spec.keep)
        rho = rho + w * (m @ m.conj().T)
    rho = rho / np.trace(rho).real
    if np.iscomplexobj(rho) and not np.abs(rho.imag).max() > 0:
        rho = rho.real
    return DensityMatrix(rho, separation=(spec.keep[-1] - spec.keep[0]) if len(spec.keep) == 2 else None)


def exact_entropy(state, keep: Iterable[int], base: float = 2.0) -> float:
    return von_neumann(partial_trace(state, keep), base)


def dense_state(u: float, rungs: int, offset: int = 0, normalized: bool = True) -> DenseState:
    s = build_state(u, rungs, offset)
    return s.normalized() if normalized else s


def exact_norm_squared(u: float, rungs: int) -> float:
    return build_state(u, rungs, 0).norm_squared


def exact_overlap(u: float, rungs: int) -> float:
    a = dense_state(u, rungs, 0)
    b = dense_state(u, rungs, 1)
    return float(np.dot(a.coefficients, b.coefficients))


# --- Monte-Carlo averages over the ground space ------------------------------


@dataclass(frozen=True)
class MonteCarloValue:
    mean: float
    stderr: float
    samples: int
    note: str = ""


def _summarize(values: np.ndarray, note: str = "") -> MonteCarloValue:
    k = len(values)
    mean = math.fsum(values) / k
    if k > 1:
        var = math.fsum((x - mean) ** 2 for x in values) / (k - 1)
        err = math.sqrt(var / k)
    else:
        err = math.nan
    return MonteCarloValue(mean, err, k, note)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _keep_for(measure: str, rungs: int, n: int | None) -> tuple[int, ...]:
    if measure == "single":
        return (0,)
    if measure == "pair":
        n = rungs // 2 if n is None else n
        if not 1 <= n < rungs:
            raise ValueError(f"separation {n} out of range for {rungs} rungs")
        return (0, n)
    raise ValueError(f"measure must be 'single' or 'pair', got {measure!r}")


def average_entropy(measure: str, u: float, rungs: int, samples: int = 1000, seed: int = 0x5EED,
                    n: int | None = None, workers: int = 1) -> MonteCarloValue:
    """Haar average of ``S(i)`` or ``S(i, i+n)`` over ``a phi1 + b phi2``.

    All coefficients are drawn up front from one generator, so the result
    depends only on ``seed`` and ``samples``, not on ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    _check_rungs(rungs, MAX_RUNGS)
    keep = _keep_for(measure, rungs, n)
    try:
        phi1, phi2 = ground_pair(u, rungs)
    except DegeneratePairError:
        psi = dense_state(u, rungs)
        return MonteCarloValue(exact_entropy(psi, keep), 0.0, 1, "unique ground state (u = 0): no averaging")
    m1 = _kept_matrix(phi1.coefficients, rungs, keep)
    m2 = _kept_matrix(phi2.coefficients, rungs, keep)
    blocks = (m1 @ m1.T, m2 @ m2.T, m1 @ m2.T)
    coeffs = haar_coefficients(np.random.default_rng(seed), samples)

    def one(ab):
        a, b = ab
        r11, r22, r12 = blocks
        rho = abs(a) ** 2 * r11 + abs(b) ** 2 * r22 + a * np.conj(b) * r12 + np.conj(a) * b * r12.T
        return von_neumann(rho)

    return _summarize(np.array(_map(one, list(coeffs), workers)))


def exact_average_fidelity(u: float, delta: float, rungs: int, samples: int = 2000, seed: int = 0x5EED,
                           workers: int = 1) -> MonteCarloValue:
    """Haar average of ``<phi(u)|phi(u + delta)>`` with the same ``(a, b)`` on both sides.

    The overlap's imaginary part averages to zero; its real part is sampled.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p1, p2 = ground_pair(u, rungs)
    q1, q2 = ground_pair(u + delta, rungs)
    gram = np.array([[p.coefficients @ q.coefficients for q in (q1, q2)] for p in (p1, p2)])
    coeffs = haar_coefficients(np.random.default_rng(seed), samples)
    vals = np.einsum("si,ij,sj->s", coeffs.conj(), gram, coeffs).real
    return _summarize(vals)


def exact_energy_residual(u: float, rungs: int, eps0: float = 1.0) -> float:
    """Largest ``||sum_j h_{j,j+1} psi||`` over the two normalized dimerized states."""
    h = projector_hamiltonian(u, rungs, eps0)
    return max(float(np.linalg.norm(h.matvec(dense_state(u, rungs, k).coefficients))) for k in (0, 1))


@lru_cache(maxsize=1)
def _leg1_dot() -> np.ndarray:
    eye = np.eye(4)
    s = spin_vector(1)
    return heisenberg([two_rung(x, eye) for x in s], [two_rung(eye, x) for x in s])


def _apply_dimer(psi: np.ndarray, i: int, rungs: int) -> np.ndarray:
    op = _leg1_dot()
    return apply_two_rung(op, psi, i, (i + 1) % rungs) - apply_two_rung(op, psi, i, (i - 1) % rungs)


def dimer_correlation(u: float, rungs: int, n: int, offset: int = 0, site: int = 0) -> float:
    """``<D_i D_{i+n}>`` with ``D_i = S_{1,i} . (S_{1,i+1} - S_{1,i-1})`` in one dimerized state.

    ``offset`` picks the state (0: starts with ``g(u)``, 1: with ``g(-u)``) and
    ``site`` the first rung ``i``; indices wrap around the ring.
    """
    _check_rungs(rungs, MAX_RUNGS)
    if not 1 <= n <= rungs - 2:
        raise ValueError(f"separation must lie in [1, {rungs - 2}], got {n}")
    psi = dense_state(u, rungs, offset).tensor()
    a = _apply_dimer(psi, site % rungs, rungs)
    b = _apply_dimer(psi, (site + n) % rungs, rungs)
    return float(np.vdot(a, b).real)


# --- golden data -------------------------------------------------------------

GOLDEN_NAME = "golden_v1.tsv"
GOLDEN_HEADER = "# ladderqpt oracle golden data, schema v1\nu\trungs\tquantity\tvalue\ttolerance\n"
GOLDEN_US = (0.5, 1.0, 2.0)
GOLDEN_RUNGS = (2, 4, 6, 8)


@dataclass(frozen=True)
class GoldenRow:
    u: float
    rungs: int
    quantity: str
    value: float
    tolerance: float


@dataclass(frozen=True)
class GoldenMismatch:
    row: GoldenRow
    actual: float

    @property
    def name(self) -> str:
        return f"golden:{self.row.quantity}@u={self.row.u:g},rungs={self.row.rungs}"

    def __str__(self) -> str:
        return f"{self.name}: stored {self.row.value!r}, computed {self.actual!r} (tol {self.row.tolerance:g})"


def _oracle_quantities(u: float, rungs: int) -> dict[str, tuple[float, float]]:
    psi = dense_state(u, rungs)
    out = {
        "log_norm": (math.log(exact_norm_squared(u, rungs)), 1e-10),
        "overlap": (exact_overlap(u, rungs), 1e-10),
        "entropy_single": (exact_entropy(psi, [0]), 1e-10),
        "entropy_pair_n1": (exact_entropy(psi, [0, 1]), 1e-10),
    }
    if rungs >= 4:
        out["dimer_n2"] = (dimer_correlation(u, rungs, 2), 1e-10)
    return out


def closed_form_quantities(u: float, rungs: int) -> dict[str, float]:
    """The golden quantities that also have a closed form."""
    from .mps import log_norm_closed_form, overlap_closed_form

    N = rungs // 2
    return {"log_norm": log_norm_closed_form(u, N), "overlap": overlap_closed_form(u, N)}


def golden_rows(us=GOLDEN_US, rungs_list=GOLDEN_RUNGS) -> list[GoldenRow]:
    rows = []
    for u in us:
        for L in rungs_list:
            for q, (v, tol) in _oracle_quantities(u, L).items():
                rows.append(GoldenRow(u, L, q, v, tol))
    return rows


def write_golden(path: str | Path, rows: list[GoldenRow] | None = None) -> Path:
    rows = golden_rows() if rows is None else rows
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(GOLDEN_HEADER)
        for r in rows:
            fh.write(f"{r.u!r}\t{r.rungs}\t{r.quantity}\t{r.value:.17g}\t{r.tolerance:g}\n")
    return path


def default_golden_path() -> Path:
    return Path(str(resources.files("ladderqpt") / "data" / GOLDEN_NAME))


def read_golden(path: str | Path | None = None) -> list[GoldenRow]:
    path = default_golden_path() if path is None else Path(path)
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#") or line.startswith("u\t"):
            continue
        u, L, q, v, tol = line.split("\t")
        rows.append(GoldenRow(float(u), int(L), q, float(v), float(tol)))
    return rows


def _close(stored: float, actual: float, tol: float) -> bool:
    return abs(stored - actual) <= tol * max(1.0, abs(stored))


def check_golden(path: str | Path | None = None, *, max_rungs: int = MAX_RUNGS,
                 closed_form: bool = False) -> list[GoldenMismatch]:
    """Recompute every stored row (up to ``max_rungs``) and list the disagreements.

    With ``closed_form=True`` rows that have a closed form are compared with it
    instead of the brute-force oracle.
    """
    mismatches = []
    cache: dict[tuple[float, int], dict[str, float]] = {}
    for row in read_golden(path):
        if row.rungs > max_rungs:
            continue
        key = (row.u, row.rungs)
        if key not in cache:
            if closed_form:
                cache[key] = closed_form_quantities(*key)
            else:
                cache[key] = {q: v for q, (v, _) in _oracle_quantities(*key).items()}
        if row.quantity not in cache[key]:
            if closed_form:
                continue
            mismatches.append(GoldenMismatch(row, math.nan))
            continue
        actual = cache[key][row.quantity]
        if not _close(row.value, actual, row.tolerance):
            mismatches.append(GoldenMismatch(row, actual))
    return mismatches
