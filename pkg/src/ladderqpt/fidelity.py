"""Haar-averaged ground-state fidelity and the curvature measures built on it.

Points are handled in homogeneous coordinates ``(a, b)`` with ``u = a/b``;
``u``-functions use ``(u, 1)`` and their mirrored ``_tilde`` twins use
``(1, u_tilde)``, so ``u -> inf`` is simply ``u_tilde = 0``.

Every power ``(.)^{2N}`` is taken relative to its dominant base, which keeps
``N`` up to 1e7 well inside double range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .mps import DegeneratePairError, log_norm_closed_form
from .numerics import log_sum_pow, one_minus_pow_ratio_sum, richardson

DEFAULT_DELTA = 1e-3


class DegenerateOverlapError(DegeneratePairError):
    """One of the points has ``p = 1`` (``u = 0`` or ``1/u = 0``), where the averaged fidelity is undefined."""


class StepTooLargeError(ValueError):
    """The fidelity at ``(u, u + delta)`` is not positive; ``delta`` must shrink."""


@dataclass(frozen=True)
class FidelityPoint:
    """``value`` may be negative for points on opposite sides of ``u = 0``; ``log_value`` is ``ln|value|``."""

    u1: float
    u2: float
    N: int
    value: float
    log_value: float


def _state_terms(a, b, k):
    """``(norm_rel, 1 - p)`` for one point; ``norm_rel = N0 / Z^k``."""
    norm, gap = one_minus_pow_ratio_sum(a * a, b * b, k)
    return norm, gap / norm


def signed_log_fidelity_h(a1: float, b1: float, a2: float, b2: float, N: int) -> tuple[float, float]:
    """``(sign, ln|F|)`` of the shared-coefficient Haar-averaged overlap, homogeneous input.

    ``F = 1/2 [X (1 + (1 + p1 p2)/s) - (p1 + p2) Y / s]`` with
    ``s = sqrt((1 - p1^2)(1 - p2^2))`` and ``X, Y`` the same- and cross-state
    overlaps of the normalized dimerized states.  It is evaluated as
    ``1/2 [X + (X d1 d2 + (p1 + p2)(X - Y)) / s]`` (``d = 1 - p``), where
    ``X - Y`` comes from the gap series and carries no cancellation near
    ``u1 = u2``.  ``X`` and ``Y`` are scaled by their dominant base ``B^{2N}``;
    ``B^2 / (Z1 Z2) = 1 - 3 (a1 b2 -+ a2 b1)^2 / (Z1 Z2)`` supplies the prefactor.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    k = 2 * N
    n1, d1 = _state_terms(a1, b1, k)
    n2, d2 = _state_terms(a2, b2, k)
    if d1 <= 0.0 or d2 <= 0.0:
        raise DegenerateOverlapError("p = 1 at one of the points (u = 0 or 1/u = 0): the two ground states coincide")
    p1, p2 = 1.0 - d1, 1.0 - d2
    if b1 * b2 < 0:
        a2, b2 = -a2, -b2
    x, y = a1 * a2, b1 * b2
    norm_x, gap_x = one_minus_pow_ratio_sum(abs(x), y, k)
    if x < 0:
        # Y owns the dominant base |x| + 3y; X = 3 c^k + d^k against it
        z = abs(x) + 3.0 * y
        x_rel = 3.0 * ((abs(x) + y) / z) ** k + ((abs(x) - 3.0 * y) / z) ** k
        x_minus_y = -gap_x
        cross = a1 * b2 + a2 * b1
    else:
        x_rel = norm_x
        x_minus_y = gap_x
        cross = a1 * b2 - a2 * b1
    z1, z2 = a1 * a1 + 3 * b1 * b1, a2 * a2 + 3 * b2 * b2
    shrink = 3.0 * cross * cross / (z1 * z2)
    s = math.sqrt(d1 * (2.0 - d1) * d2 * (2.0 - d2))
    inner = 0.5 * (x_rel + (x_rel * d1 * d2 + (p1 + p2) * x_minus_y) / s)
    if inner == 0.0:
        return 0.0, -math.inf
    log_abs = N * math.log1p(-shrink) - 0.5 * (math.log(n1) + math.log(n2)) + math.log(abs(inner))
    return math.copysign(1.0, inner), log_abs


def log_fidelity_h(a1: float, b1: float, a2: float, b2: float, N: int) -> float:
    """``ln F``; ``nan`` where the averaged overlap is negative, ``-inf`` where it vanishes."""
    sign, log_abs = signed_log_fidelity_h(a1, b1, a2, b2, N)
    return log_abs if sign >= 0 else math.nan


def _point(value: float, mirror: bool) -> tuple[float, float]:
    return (1.0, value) if mirror else (value, 1.0)


def log_fidelity(u1: float, u2: float, N: int, *, mirror: bool = False) -> float:
    return log_fidelity_h(*_point(u1, mirror), *_point(u2, mirror), N)


def _fidelity_point(u1, u2, N, mirror) -> FidelityPoint:
    sign, log_abs = signed_log_fidelity_h(*_point(u1, mirror), *_point(u2, mirror), N)
    return FidelityPoint(u1, u2, N, sign * math.exp(log_abs), log_abs)


def fidelity_closed(u1: float, u2: float, N: int) -> FidelityPoint:
    """Averaged fidelity on ``2N`` rungs between ground states at ``u1`` and ``u2``."""
    return _fidelity_point(u1, u2, N, False)


def fidelity_closed_tilde(t1: float, t2: float, N: int) -> FidelityPoint:
    """As :func:`fidelity_closed` with both points given as ``1/u``."""
    return _fidelity_point(t1, t2, N, True)


def alpha_asymptotic(u1: float, u2: float) -> float:
    """Per-cell fidelity decay ``(u1 u2 + 3)^2 / ((u1^2 + 3)(u2^2 + 3))``."""
    return (u1 * u2 + 3.0) ** 2 / ((u1 * u1 + 3.0) * (u2 * u2 + 3.0))


def alpha_tilde(t1: float, t2: float) -> float:
    """Mirror form ``(1 + 3 t1 t2)^2 / ((1 + 3 t1^2)(1 + 3 t2^2))`` with ``t = 1/u``."""
    return (1.0 + 3.0 * t1 * t2) ** 2 / ((1.0 + 3.0 * t1 * t1) * (1.0 + 3.0 * t2 * t2))


def log_alpha(u1: float, u2: float, *, mirror: bool = False) -> float:
    """``ln alpha`` via ``log1p(-3 (a1 b2 - a2 b1)^2 / (Z1 Z2))``: exact near ``u1 = u2``."""
    a1, b1 = _point(u1, mirror)
    a2, b2 = _point(u2, mirror)
    z1, z2 = a1 * a1 + 3 * b1 * b1, a2 * a2 + 3 * b2 * b2
    return math.log1p(-3.0 * (a1 * b2 - a2 * b1) ** 2 / (z1 * z2))


# --- curvature ---------------------------------------------------------------


def _log_norm(v: float, N: int, mirror: bool) -> float:
    if not mirror:
        return log_norm_closed_form(v, N)
    t2 = v * v
    return log_sum_pow([1.0 + 3.0 * t2, 1.0 - t2], [1.0, 3.0], 2 * N)


def default_curvature_step(x: float) -> float:
    return 1e-4 * max(1.0, abs(x))


def _safe_step(x: float, h: float | None) -> float:
    if x == 0.0:
        raise ValueError("curvature is singular at the critical point 0; use a nonzero argument")
    h = default_curvature_step(x) if h is None else h
    if h >= abs(x):
        # the stencil would straddle 0; stay on one side
        h = abs(x) / 4.0
    return h


def _mixed_stencil(x: float, N: int, h: float, mirror: bool, normalized: bool) -> float:
    def lf(v1, v2):
        if v1 == v2 and normalized:
            return 0.0
        val = 0.0 if v1 == v2 else log_fidelity(v1, v2, N, mirror=mirror)
        if not normalized:
            val += 0.5 * (_log_norm(v1, N, mirror) + _log_norm(v2, N, mirror))
        return val

    hi, lo = x + h, x - h
    return (lf(hi, hi) - lf(hi, lo) - lf(lo, hi) + lf(lo, lo)) / (4.0 * h * h)


def _curvature(x, N, h, mirror, normalized, extrapolate):
    h = _safe_step(x, h)
    if not extrapolate:
        return _mixed_stencil(x, N, h, mirror, normalized)
    return richardson(lambda s: _mixed_stencil(x, N, s, mirror, normalized), h, order=2)


def d_of_u(u: float, N: int, h: float | None = None, *, normalized: bool = False,
           extrapolate: bool = True) -> float:
    """Mixed second derivative ``d^2 ln F / du1 du2`` at ``u1 = u2 = u``.

    ``normalized=False`` differentiates ``F = sqrt(N0(u1) N0(u2)) * fidelity``,
    ``normalized=True`` the fidelity itself.  The sign is chosen so the
    result is positive (it grows like ``6 N / (u^2 + 3)^2``).
    """
    return _curvature(u, N, h, False, normalized, extrapolate)


def d_tilde(t: float, N: int, h: float | None = None, *, normalized: bool = False,
            extrapolate: bool = True) -> float:
    """:func:`d_of_u` in the variable ``t = 1/u``."""
    return _curvature(t, N, h, True, normalized, extrapolate)


@dataclass(frozen=True)
class CurvatureReport:
    unnormalized: float
    normalized: float

    @property
    def normalization_difference(self) -> float:
        return self.unnormalized - self.normalized


def curvature_report(u: float, N: int, h: float | None = None, *, mirror: bool = False) -> CurvatureReport:
    f = d_tilde if mirror else d_of_u
    return CurvatureReport(f(u, N, h, normalized=False), f(u, N, h, normalized=True))


def _chi(x: float, N: int, delta: float, mirror: bool) -> float:
    lf = log_fidelity(x, x + delta, N, mirror=mirror)
    if not math.isfinite(lf):
        raise StepTooLargeError(f"fidelity at ({x}, {x + delta}) is not positive; reduce delta")
    return -2.0 * lf / (delta * delta)


def chi_f(u: float, N: int, delta: float = DEFAULT_DELTA, *, extrapolate: bool = True,
          mirror: bool = False) -> float:
    """Fidelity susceptibility ``-2 ln F(u, u + delta) / delta^2``.

    The leading error is linear in ``delta``; one Richardson step over
    ``delta, delta/2`` removes it.
    """
    if delta == 0.0:
        raise ValueError("delta must be nonzero")
    if not extrapolate:
        return _chi(u, N, delta, mirror)
    return richardson(lambda d: _chi(u, N, d, mirror), delta, order=1)


# --- scaling collapse --------------------------------------------------------

DEFAULT_COLLAPSE_N = (100, 1000, 10000, 100000)
DEFAULT_COLLAPSE_X = tuple(float(x) for x in np.logspace(-2, 2, 9))


@dataclass(frozen=True)
class CollapseRow:
    N: int
    t: float
    d_over_n: float
    x: float


@dataclass
class CollapseDataset:
    """Rows ``(N, u_tilde, D'/N, N u_tilde^nu)`` on a grid of the scaling variable."""

    rows: list[CollapseRow]
    nu: float = 2.0
    x_grid: tuple[float, ...] = field(default=())

    def groups(self) -> dict[float, list[CollapseRow]]:
        out: dict[float, list[CollapseRow]] = {}
        for r in self.rows:
            out.setdefault(r.x, []).append(r)
        return out

    def spreads(self) -> dict[float, float]:
        """Relative spread ``(max - min)/|mean|`` of ``D'/N`` per scaling-variable bin."""
        res = {}
        for x, rows in self.groups().items():
            vals = [r.d_over_n for r in rows]
            res[x] = (max(vals) - min(vals)) / abs(math.fsum(vals) / len(vals))
        return res

    def score(self) -> float:
        return max(self.spreads().values())


def collapse_dataset(N_list=DEFAULT_COLLAPSE_N, x_grid=DEFAULT_COLLAPSE_X, nu: float = 2.0) -> CollapseDataset:
    """Evaluate ``D'(t)/N`` at ``t = (x/N)^(1/nu)`` for every ``N`` and scaling value ``x``.

    Parametrizing by ``x = N t^nu`` puts every size exactly on the same bins,
    so no interpolation enters the spread.
    """
    rows = []
    for x in x_grid:
        for N in N_list:
            t = (x / N) ** (1.0 / nu)
            rows.append(CollapseRow(int(N), t, d_tilde(t, int(N)) / N, float(x)))
    return CollapseDataset(rows, nu, tuple(x_grid))


@dataclass(frozen=True)
class NuEstimate:
    nu: float
    score: float
    bounds: tuple[float, float]


def estimate_nu(N_list=DEFAULT_COLLAPSE_N, x_grid=DEFAULT_COLLAPSE_X, bounds=(1.5, 2.5)) -> NuEstimate:
    """Exponent minimizing the collapse score over ``bounds``."""
    res = minimize_scalar(lambda nu: collapse_dataset(N_list, x_grid, nu).score(), bounds=bounds,
                          method="bounded", options={"xatol": 1e-4})
    return NuEstimate(float(res.x), float(res.fun), tuple(bounds))
