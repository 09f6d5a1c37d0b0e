"""Daily jump occurrence, signed size, log-magnitude and sign measures.

Each test implies its own integrated-variance estimate; the signed jump
size is the square-root of the excess of realized variance over that
estimate, signed by the daily return.  Scan-type tests (ABD, LM) instead
aggregate the flagged intraday returns, and the swap-variance test solves
its defining nonlinear relation for the jump directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[np.ndarray, float]


@dataclass(frozen=True)
class JumpMeasures:
    """Per-day jump measures for one method.

    `log_magnitude` is NaN where undefined (no measurable jump variation);
    `sign` is always +/-1 with sign(0) = +1.
    """

    indicator: ArrayLike
    z: ArrayLike
    log_magnitude: ArrayLike
    sign: ArrayLike


def _sign(x: ArrayLike) -> ArrayLike:
    """Sign with the zero tie broken to +1."""
    return np.where(np.asarray(x, dtype=float) < 0, -1.0, 1.0)


def signed_jump_variation(rv: ArrayLike, iv_est: ArrayLike, daily_return: ArrayLike) -> ArrayLike:
    """sign(daily return) * sqrt(max(RV - IV, 0))."""
    rv = np.asarray(rv, dtype=float)
    iv = np.asarray(iv_est, dtype=float)
    if np.any(rv < 0) or np.any(iv < 0):
        raise ValueError("variance measures must be nonnegative")
    z = _sign(daily_return) * np.sqrt(np.maximum(rv - iv, 0.0))
    return z if np.ndim(z) else float(z)


def intraday_jump_sum(returns: np.ndarray, flags: np.ndarray) -> ArrayLike:
    """Sum of flagged intraday returns (0 when nothing is flagged)."""
    r = np.asarray(returns, dtype=float)
    f = np.asarray(flags, dtype=bool)
    if f.shape != r.shape:
        raise ValueError("flag matrix must match the returns shape")
    z = np.sum(r * f, axis=-1)
    return z if np.ndim(z) else float(z)


def _swap_gap(z: np.ndarray) -> np.ndarray:
    """f(Z) = 2(e^Z - Z - 1) - Z^2, the swap-variance jump relation."""
    return 2.0 * (np.expm1(z) - z) - z * z


def jo_jump_size_solve(d: ArrayLike, indicator: ArrayLike = 1) -> ArrayLike:
    """Invert f(Z) = 2(e^Z - Z - 1) - Z^2 = d for the swap-variance jump.

    f is monotone nondecreasing (f'(Z) = 2(e^Z - 1 - Z) >= 0) so the root
    is unique and shares the sign of d.  Solved by bisection on an
    expandable bracket polished with Newton steps; days with indicator 0
    return 0 without solving.
    """
    d_arr = np.atleast_1d(np.asarray(d, dtype=float))
    ind = np.broadcast_to(np.atleast_1d(np.asarray(indicator)), d_arr.shape)
    out = np.zeros_like(d_arr)
    active = (ind != 0) & (d_arr != 0)
    if np.any(active):
        target = d_arr[active]
        lo, hi = np.full_like(target, -10.0), np.full_like(target, 10.0)
        for _ in range(3):                       # expand 10 -> 20 -> 40 -> 50 (capped)
            hi = np.where(_swap_gap(hi) < target, np.minimum(hi * 2.0, 50.0), hi)
            lo = np.where(_swap_gap(lo) > target, np.maximum(lo * 2.0, -50.0), lo)
        if np.any(_swap_gap(hi) < target) or np.any(_swap_gap(lo) > target):
            raise ValueError("swap-variance gap outside the invertible range (|Z| > 50)")
        z = np.zeros_like(target)
        for _ in range(60):                      # bisection: bracket to ~1e-16 relative
            z = 0.5 * (lo + hi)
            high_side = _swap_gap(z) > target
            hi = np.where(high_side, z, hi)
            lo = np.where(high_side, lo, z)
        for _ in range(4):                       # Newton polish
            fz = _swap_gap(z) - target
            fpz = 2.0 * (np.expm1(z) - z)
            step = np.where(fpz > 0, fz / np.where(fpz > 0, fpz, 1.0), 0.0)
            z = z - step
        out[active] = z
    return out if np.ndim(d) else float(out[0])


def split_magnitude_sign(z: ArrayLike, rv: ArrayLike, iv_est: ArrayLike,
                         daily_return: ArrayLike = 0.0):
    """(log |z| or NaN, sign) for a signed jump-size measure.

    The log magnitude is defined only when realized variance exceeds the
    integrated-variance estimate and the measure itself is nonzero.  The
    sign is the measure's sign, falling back to the daily-return sign when
    the measure is exactly zero (ties to +1).
    """
    z = np.asarray(z, dtype=float)
    defined = (np.asarray(rv, dtype=float) > np.asarray(iv_est, dtype=float)) & (z != 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = np.where(defined, np.log(np.abs(np.where(z != 0, z, 1.0))), np.nan)
    s = np.where(z != 0, _sign(z), _sign(daily_return))
    if np.ndim(z):
        return lm, s
    return float(lm), float(s)


def scan_measures(returns: np.ndarray, flags: np.ndarray, indicator: ArrayLike) -> JumpMeasures:
    """Jump measures for the intraday-scan tests (ABD, LM)."""
    z = intraday_jump_sum(returns, flags)
    any_flag = np.asarray(flags, dtype=bool).any(axis=-1)
    defined = any_flag & (np.asarray(z) != 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = np.where(defined, np.log(np.abs(np.where(defined, z, 1.0))), np.nan)
    return JumpMeasures(indicator=indicator, z=z, log_magnitude=lm, sign=_sign(z))


def variation_measures(rv: ArrayLike, iv_est: ArrayLike, daily_return: ArrayLike,
                       indicator: ArrayLike) -> JumpMeasures:
    """Jump measures for the variation-based tests (sign from the daily return)."""
    z = signed_jump_variation(rv, iv_est, daily_return)
    lm, s = split_magnitude_sign(z, rv, iv_est, daily_return)
    return JumpMeasures(indicator=indicator, z=z, log_magnitude=lm, sign=s)


def jo_measures(swv: ArrayLike, rv: ArrayLike, indicator: ArrayLike) -> JumpMeasures:
    """Jump measures for the swap-variance test (size solved on flagged days)."""
    d = np.asarray(swv, dtype=float) - np.asarray(rv, dtype=float)
    z = jo_jump_size_solve(d, indicator)
    defined = (np.asarray(indicator) != 0) & (np.asarray(z) != 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = np.where(defined, np.log(np.abs(np.where(defined, z, 1.0))), np.nan)
    return JumpMeasures(indicator=indicator, z=z, log_magnitude=lm, sign=_sign(z))
