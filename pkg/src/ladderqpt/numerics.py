"""Overflow-safe helpers for sums of large even powers and small-step calculus.

Every closed form in this package is a ratio of sums like ``sum_i w_i * b_i**k``
with ``k = 2N`` up to ~1e7.  Those are evaluated by factoring out the base of
largest magnitude so that only numbers of modulus <= 1 are ever raised to ``k``.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

__all__ = [
    "log_sum_pow",
    "log1p_weighted_pow",
    "one_minus_pow_ratio_sum",
    "richardson",
]


def log_sum_pow(bases: Sequence[float], weights: Sequence[float], k: int) -> float:
    """Return ``log(sum_i w_i * b_i**k)`` for even ``k`` and positive weights.

    The dominant ``|b_i|`` is factored out first, so no intermediate power
    exceeds 1 in magnitude.  Even exponents make every term non-negative, which
    is why no sign bookkeeping is needed on the result.
    """
    if k % 2:
        raise ValueError(f"exponent must be even, got {k}")
    mags = [abs(float(b)) for b in bases]
    top = max(mags)
    if top == 0.0:
        return -math.inf if k > 0 else math.log(math.fsum(weights))
    total = math.fsum(w * (m / top) ** k for w, m in zip(weights, mags))
    return k * math.log(top) + math.log(total)


def log1p_weighted_pow(ratio: float, weight: float, k: int) -> float:
    """``log(1 + weight * ratio**k)`` for even ``k``, valid for any ``|ratio|``."""
    m = abs(ratio)
    if m <= 1.0:
        return math.log1p(weight * m**k)
    # 1 + w m^k = m^k (m^-k + w)
    return k * math.log(m) + math.log(m ** (-k) + weight)


def _gap_series(e: float, k: int) -> float:
    """``1 + 3(1-4e)^k - 3(1-2e)^k - (1-6e)^k`` by its binomial series.

    The ``j = 0, 1, 2`` terms cancel identically, so summing from ``j = 3``
    keeps full relative accuracy when ``k e`` is small.
    """
    total = 0.0
    coef = 1.0  # C(k, j) (-e)^j
    for j in range(1, k + 1):
        coef *= -e * (k - j + 1) / j
        if j < 3:
            continue
        term = coef * (3.0 * 4.0**j - 3.0 * 2.0**j - 6.0**j)
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


_SERIES_LIMIT = 2.0


def _one_minus_pow(deficit: float, k: int) -> float:
    """``1 - (1 - deficit)^k`` for ``deficit`` in ``[0, 1]``."""
    if deficit >= 1.0:
        return 1.0
    return -math.expm1(k * math.log1p(-deficit))


def one_minus_pow_ratio_sum(q: float, w: float, k: int) -> tuple[float, float]:
    """Gap function shared by the norm/overlap pair of closed forms.

    With ``Z = q + 3w`` and the ratios ``r = (q-w)/Z``, ``c = (q+w)/Z``,
    ``d = (q-3w)/Z`` this returns ``(1 + 3 r**k, 1 + 3 r**k - 3 c**k - d**k)``
    for even ``k``.  The first is the norm-like sum over its dominant base, the
    second the difference "norm minus cross term" over the same base.
    Requires ``q, w >= 0`` (then every ratio lies in [-1, 1]).

    The difference is assembled as ``(1 - d^k) - 3 c^k (1 - (r/c)^k)``, each
    bracket from the exactly known distance of its base to 1.  When ``k w / Z``
    is small the two brackets cancel to third order in ``w / Z``; that regime
    is summed as a series instead.
    """
    if q < 0.0 or w < 0.0:
        raise ValueError("q and w must be non-negative")
    z = q + 3.0 * w
    if z == 0.0:
        raise ZeroDivisionError("dominant base vanishes")
    e = w / z
    rk = math.exp(k * math.log1p(-4.0 * e)) if e < 0.25 else ((q - w) / z) ** k
    norm = 1.0 + 3.0 * rk
    if 6.0 * k * e < _SERIES_LIMIT:
        return norm, _gap_series(e, k)
    # 1 - |d| and 1 - |r|/c as sums of non-negative terms
    d_deficit = 6.0 * w / z if q >= 3.0 * w else 2.0 * q / z
    r_deficit = 2.0 * min(q, w) / (q + w)
    ck = math.exp(k * math.log1p(-2.0 * e))
    return norm, _one_minus_pow(d_deficit, k) - 3.0 * ck * _one_minus_pow(r_deficit, k)


def richardson(f: Callable[[float], float], h: float, order: int = 2) -> float:
    """One Richardson halving step for an estimate with error ``O(h**order)``."""
    coarse = f(h)
    fine = f(h / 2.0)
    factor = 2.0**order
    return (factor * fine - coarse) / (factor - 1.0)
