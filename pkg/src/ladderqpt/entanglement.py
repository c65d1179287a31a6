"""Von Neumann entropies of one and two rungs, their derivatives and decay lengths.

Entropies are in bits unless ``base`` says otherwise.  Anything that takes a
point accepts either ``u`` or ``inv_u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .mps import ray
from .transfer import DensityMatrix, _eigvalsh, _log_decay, rho_pair_tdl, rho_single_tdl, subleading_ratio

ABORT_TOL = 1e-9
_LN2 = math.log(2.0)


class InvalidDensityError(ValueError):
    """A density matrix had an eigenvalue below ``-ABORT_TOL``."""


def von_neumann(rho, base: float = 2.0):
    """``-Tr rho log rho`` with the ``0 log 0 = 0`` convention.

    Eigenvalues in ``[-1e-9, 0)`` are treated as zero; anything lower raises.  ``mpmath`` object
    matrices are diagonalized at the working precision and return an ``mpf``.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w = _eigvalsh(m)
    low = float(w[0])
    if low < -ABORT_TOL:
        raise InvalidDensityError(f"eigenvalue {low:.3e} below -{ABORT_TOL:g}")
    if m.dtype == object:
        import mpmath as mp

        lb = mp.log(base)
        return -mp.fsum(x * mp.log(x) for x in w if x > 0) / lb
    # anything in [-ABORT_TOL, 0) is rounding noise around a zero eigenvalue
    w = np.where(w < 0, 0.0, w)
    return float(-xlogy(w, w).sum() / math.log(base)) + 0.0


def single_rung_spectrum(u=None, *, inv_u=None) -> tuple[float, float]:
    """``(triplet weight, singlet weight)``; the reduced matrix is ``diag(t, t, t, s)``."""
    a, b = ray(u, inv_u)
    q, w = a * a, b * b
    z = q + 3 * w
    return w / z, q / z


def s_single(u=None, *, inv_u=None, base: float = 2.0) -> float:
    t, s = single_rung_spectrum(u, inv_u=inv_u)
    return float(-(3 * xlogy(t, t) + xlogy(s, s)) / math.log(base)) + 0.0


def s_pair(u=None, n: int = 1000, parity: int = 0, *, inv_u=None, average: bool = False,
           quad_points: int = 48, base: float = 2.0) -> float:
    """Entropy of two rungs ``n`` apart in one dimerized ground state.

    With ``average=True`` the entropy is instead averaged over the
    Haar-distributed superpositions ``a psi1 + b psi2``.  In the infinite chain
    the two states are orthogonal and locally distinguishable, so the reduced
    matrix is ``t rho1 + (1 - t) rho2`` with ``t = |a|^2`` uniform on ``[0, 1]``;
    the average is done by Gauss-Legendre quadrature in ``t``.
    """
    rho1 = rho_pair_tdl(u, n, parity, inv_u=inv_u).matrix
    if not average:
        return von_neumann(rho1, base)
    rho2 = rho_pair_tdl(u, n, 1 - parity, inv_u=inv_u).matrix
    x, w = np.polynomial.legendre.leggauss(quad_points)
    t = 0.5 * (x + 1.0)
    vals = [von_neumann(ti * rho1 + (1 - ti) * rho2, base) for ti in t]
    return float(0.5 * math.fsum(wi * vi for wi, vi in zip(w, vals)))


# --- derivatives -------------------------------------------------------------


@dataclass(frozen=True)
class Derivative:
    value: float
    order: int
    step: float | None
    near_singular: bool


NEAR_SINGULAR = 1e-3


def _single_first(x: float, var: str) -> float:
    # dS/dx = -6 x ln(x^2) / (ln2 W^2) with W = x^2 + 3 (var u) or 1 + 3 x^2 (var inv_u)
    if x == 0.0:
        return 0.0
    w = x * x + 3.0 if var == "u" else 1.0 + 3.0 * x * x
    return -6.0 * x * math.log(x * x) / (_LN2 * w * w)


def default_step(x: float) -> float:
    """``1e-5 max(1, |x|)``, shrunk so the stencil never reaches ``x = 0``."""
    h = 1e-5 * max(1.0, abs(x))
    if x != 0.0:
        h = min(h, abs(x) / 100.0)
    return h


def entropy_derivative(kind: str, x: float, order: int = 1, n: int = 1000, *, var: str = "u",
                       parity: int = 0, h: float | None = None) -> Derivative:
    """First or second derivative of ``S(i)`` (``kind='single'``) or ``S(i,j)`` (``'pair'``).

    ``x`` is ``u`` or ``1/u`` according to ``var``.  ``S(i)`` has an analytic
    first derivative; everything else is central differences.  Near the
    critical points the second derivative diverges logarithmically; those
    values carry ``near_singular=True``, and at ``x = 0`` it is ``-inf``.
    """
    if kind not in ("single", "pair"):
        raise ValueError(f"kind must be 'single' or 'pair', got {kind!r}")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if var not in ("u", "inv_u"):
        raise ValueError("var must be 'u' or 'inv_u'")
    flag = order == 2 and abs(x) < NEAR_SINGULAR
    if kind == "single" and order == 1:
        return Derivative(_single_first(x, var), 1, None, False)
    if order == 2 and x == 0.0:
        return Derivative(-math.inf, 2, None, True)
    step = default_step(x) if h is None else h
    if kind == "single":
        d = (_single_first(x + step, var) - _single_first(x - step, var)) / (2 * step)
        return Derivative(d, 2, step, flag)

    def f(y):
        return s_pair(y, n, parity) if var == "u" else s_pair(inv_u=y, n=n, parity=parity)

    if order == 1:
        if x == 0.0:
            return Derivative(0.0, 1, None, False)
        return Derivative((f(x + step) - f(x - step)) / (2 * step), 1, step, False)
    d = (f(x + 2 * step) - 2 * f(x) + f(x - 2 * step)) / (4 * step * step)
    return Derivative(d, 2, step, flag)


# --- entanglement length -----------------------------------------------------


@dataclass(frozen=True)
class ELEstimate:
    u: float
    xi_closed: float
    xi_fit: float
    prefactor: float
    fit_window: tuple[int, int]
    residual: float

    @property
    def ratio(self) -> float:
        return self.xi_fit / self.xi_closed if self.xi_closed else math.nan


def xi_closed(u=None, *, inv_u=None) -> float:
    """``1 / (2 ln|(u^2+3)/(u^2-1)|)``; zero at ``|u| = 1``."""
    rate = _log_decay(u, inv_u)
    return 0.5 / rate if rate else math.inf


def _excess_dps(r: float, n: int) -> int:
    return int(30 + 2 * (n - 1) * abs(math.log10(abs(r))))


def entropy_excess(u=None, n: int = 1, parity: int = 0, *, inv_u=None, dps: int | None = None):
    """``S(i, i+n) - 2 S(i)`` at high precision (an ``mpf``).

    The excess falls like ``r^(2n)`` with ``r = (u^2-1)/(u^2+3)``, far below
    double precision for the separations the fits use, so the whole
    contraction runs in ``mpmath``.
    """
    import mpmath as mp

    r = float(subleading_ratio(u, inv_u=inv_u))
    if r == 0.0:
        return mp.mpf(0)
    digits = dps or _excess_dps(r, n)
    with mp.workdps(digits):
        pair = von_neumann(rho_pair_tdl(u, n, parity, inv_u=inv_u, dps=digits))
        one = von_neumann(rho_single_tdl(u, inv_u=inv_u, dps=digits))
        return +(pair - 2 * one)


def entanglement_length(u=None, *, inv_u=None, window: tuple[int, int] = (10, 60), cap: int = 200,
                        tol: float = 1e-6, shift: int = 10, parity: int = 0) -> ELEstimate:
    """Closed-form ``xi_E`` and a fit of ``ln|S(n) - S(inf)|`` over even ``n``.

    The window slides up by ``shift`` until the RMS fit residual drops below
    ``tol`` or its upper end would pass ``cap``; the last fit is returned
    either way with its residual.
    """
    import mpmath as mp

    label = u if u is not None else (math.inf if inv_u == 0 else 1.0 / inv_u)
    closed = xi_closed(u, inv_u=inv_u)
    if closed == 0.0:
        return ELEstimate(label, 0.0, 0.0, 0.0, (0, 0), 0.0)
    lo, hi = window
    lo += lo % 2
    span = hi - lo
    cache: dict[int, float] = {}
    sign = 1.0
    while True:
        ns = list(range(lo, lo + span + 1, 2))
        for n in ns:
            if n not in cache:
                d = entropy_excess(u, n, parity, inv_u=inv_u)
                sign = 1.0 if d > 0 else -1.0
                cache[n] = float(mp.log(abs(d)))
        ys = np.array([cache[n] for n in ns])
        slope, intercept = np.polyfit(ns, ys, 1)
        res = float(np.sqrt(np.mean((ys - (slope * np.array(ns) + intercept)) ** 2)))
        if res < tol or lo + span + shift > cap:
            break
        lo += shift
    xi = -1.0 / float(slope) if slope < 0 else math.nan
    return ELEstimate(label, closed, xi, sign * math.exp(float(intercept)), (ns[0], ns[-1]), res)


# --- Haar average on finite rings -------------------------------------------


def average_entanglement(measure: str, u: float, rungs: int, samples: int = 1000, seed: int = 0x5EED,
                         n: int | None = None, workers: int = 1):
    """Monte-Carlo Haar average of ``S(i)`` or ``S(i, i+n)`` on a ring of ``rungs`` rungs.

    Returns a ``MonteCarloValue`` (mean, standard error, sample count, note).
    """
    from .oracle import average_entropy

    return average_entropy(measure, u, rungs, samples=samples, seed=seed, n=n, workers=workers)
