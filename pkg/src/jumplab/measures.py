"""Daily realized measures of price variation.

Total, jump-robust, quarticity, power-variation and swap-variance measures
computed from one day's intraday log-returns.  Every function accepts the
returns of a single day (1-D) or a stack of days (..., M) and reduces over
the last axis, so the Monte Carlo harness can process whole panels in one
call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .panel import thin

ArrayLike = Union[np.ndarray, float]

# Moment constants of the standard normal used in scaling factors.
MU_43 = 2.0 ** (2.0 / 3.0) * math.gamma(7.0 / 6.0) / math.gamma(0.5)  # E|U|^{4/3}

# Truncating-function caps for returns exceeding the threshold (r^2 > theta):
# |r| is replaced by TAU1_CAP * sqrt(theta), |r|^{4/3} by TAU43_CAP * theta^{2/3}.
TAU1_CAP = 1.094
TAU43_CAP = 1.129

# Swap-variance sixth-moment constant: (m_6 / 9) * m_{3/2}^{-4}, rounded as used.
JO_OMEGA_CONST = 3.05

MINRV_SCALE = math.pi / (math.pi - 2.0)
MEDRV_SCALE = math.pi / (math.pi + 6.0 - 4.0 * math.sqrt(3.0))
MINRQ_SCALE = math.pi / (3.0 * math.pi - 8.0)
MEDRQ_SCALE = 3.0 * math.pi / (9.0 * math.pi + 72.0 - 52.0 * math.sqrt(3.0))


class InsufficientDataError(ValueError):
    """A measure was asked for on a day with too few returns."""


def _m_count(returns: np.ndarray, least: int, what: str) -> int:
    m = returns.shape[-1]
    if m < least:
        raise InsufficientDataError(f"{what} needs at least {least} returns, got {m}")
    return m


def normal_abs_moment(p: float) -> float:
    """m_p = E|U|^p for U standard normal."""
    if p <= 0:
        raise ValueError("power must be positive")
    return math.pi ** -0.5 * 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0)


@dataclass(frozen=True)
class ThresholdSpec:
    """Truncation rule for threshold measures.

    `base` is a per-interval local variance series (CPR-style measures) or
    a daily variance scalar (ASJ/PZ-style return cutoffs).  `scale` is the
    multiplier (c_theta, or the threshold scale on sqrt(base)); `root` is
    the grid-size exponent used only by the return-cutoff form.
    """

    scale: float
    base: ArrayLike
    root: Optional[float] = None

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("threshold scale must be positive")
        if np.any(np.asarray(self.base) < 0):
            raise ValueError("local variance base must be nonnegative")

    def variance_cutoffs(self) -> np.ndarray:
        """Per-interval squared-return cutoffs theta_i = scale^2 * base_i."""
        return self.scale ** 2 * np.asarray(self.base, dtype=float)

    def return_cutoff(self, m: int) -> ArrayLike:
        """Absolute-return cutoff scale * sqrt(base) * (1/m)^root."""
        if self.root is None:
            raise ValueError("return_cutoff requires a root exponent")
        if not 0.0 < self.root < 0.5:
            raise ValueError("root exponent must lie in (0, 1/2)")
        return self.scale * np.sqrt(np.asarray(self.base, dtype=float)) * m ** -self.root


@dataclass(frozen=True)
class MeasureSet:
    """All daily measures consumed by the squared-variation and swap tests.

    Fields hold per-day scalars, or aligned arrays when computed for a
    stack of days.
    """

    rv: ArrayLike
    bv: ArrayLike
    tp: ArrayLike
    ctbv: ArrayLike
    ctripv: ArrayLike
    minrv: ArrayLike
    medrv: ArrayLike
    minrq: ArrayLike
    medrq: ArrayLike
    swv: ArrayLike
    m: int

    FIELDS = ("rv", "bv", "tp", "ctbv", "ctripv", "minrv", "medrv", "minrq", "medrq", "swv")


def realized_variance(returns: np.ndarray) -> ArrayLike:
    """RV: sum of squared returns."""
    r = np.asarray(returns, dtype=float)
    _m_count(r, 1, "realized variance")
    return np.sum(r * r, axis=-1)


def bipower_variation(returns: np.ndarray) -> ArrayLike:
    """BV: (pi/2) (M/(M-1)) * sum |r_i||r_{i-1}|."""
    r = np.abs(np.asarray(returns, dtype=float))
    m = _m_count(r, 2, "bipower variation")
    s = np.sum(r[..., 1:] * r[..., :-1], axis=-1)
    return (math.pi / 2.0) * (m / (m - 1.0)) * s


def tripower_quarticity(returns: np.ndarray) -> ArrayLike:
    """TP: mu43^-3 (M^2/(M-2)) * sum of adjacent |r|^{4/3} triples."""
    r = np.abs(np.asarray(returns, dtype=float)) ** (4.0 / 3.0)
    m = _m_count(r, 3, "tripower quarticity")
    s = np.sum(r[..., 2:] * r[..., 1:-1] * r[..., :-2], axis=-1)
    return MU_43 ** -3 * (m * m / (m - 2.0)) * s


def _tau1(r: np.ndarray, cutoffs: np.ndarray) -> np.ndarray:
    a = np.abs(r)
    return np.where(r * r > cutoffs, TAU1_CAP * np.sqrt(cutoffs), a)


def _tau43(r: np.ndarray, cutoffs: np.ndarray) -> np.ndarray:
    a = np.abs(r) ** (4.0 / 3.0)
    return np.where(r * r > cutoffs, TAU43_CAP * cutoffs ** (2.0 / 3.0), a)


def _cutoffs_for(r: np.ndarray, spec: ThresholdSpec) -> np.ndarray:
    cut = spec.variance_cutoffs()
    if np.ndim(cut) == 0:
        return np.broadcast_to(cut, r.shape)
    if cut.shape[-1] != r.shape[-1]:
        raise ValueError(
            f"threshold base supplies {cut.shape[-1]} local variances for {r.shape[-1]} returns"
        )
    return np.broadcast_to(cut, r.shape)


def threshold_bipower(returns: np.ndarray, spec: ThresholdSpec) -> ArrayLike:
    """CTBV: bipower variation with truncated absolute returns.

    Equals bipower_variation exactly when no return crosses its threshold.
    """
    r = np.asarray(returns, dtype=float)
    m = _m_count(r, 2, "threshold bipower")
    t = _tau1(r, _cutoffs_for(r, spec))
    s = np.sum(t[..., 1:] * t[..., :-1], axis=-1)
    return (math.pi / 2.0) * (m / (m - 1.0)) * s


def threshold_tripower_quarticity(returns: np.ndarray, spec: ThresholdSpec) -> ArrayLike:
    """CTriPV: tripower quarticity with truncated 4/3-power returns."""
    r = np.asarray(returns, dtype=float)
    m = _m_count(r, 3, "threshold tripower quarticity")
    t = _tau43(r, _cutoffs_for(r, spec))
    s = np.sum(t[..., 2:] * t[..., 1:-1] * t[..., :-2], axis=-1)
    return MU_43 ** -3 * (m * m / (m - 2.0)) * s


def min_med_rv(returns: np.ndarray, kind: str) -> ArrayLike:
    """MinRV / MedRV: order statistics of adjacent absolute returns, squared."""
    r = np.abs(np.asarray(returns, dtype=float))
    if kind == "min":
        m = _m_count(r, 2, "MinRV")
        s = np.sum(np.minimum(r[..., 1:], r[..., :-1]) ** 2, axis=-1)
        return MINRV_SCALE * (m / (m - 1.0)) * s
    if kind == "med":
        m = _m_count(r, 3, "MedRV")
        med = np.median(np.stack([r[..., 2:], r[..., 1:-1], r[..., :-2]]), axis=0)
        return MEDRV_SCALE * (m / (m - 2.0)) * np.sum(med * med, axis=-1)
    raise ValueError(f"kind must be 'min' or 'med', got {kind!r}")


def min_med_rq(returns: np.ndarray, kind: str) -> ArrayLike:
    """MinRQ / MedRQ: quarticity analogues with fourth powers."""
    r = np.abs(np.asarray(returns, dtype=float))
    if kind == "min":
        m = _m_count(r, 2, "MinRQ")
        s = np.sum(np.minimum(r[..., 1:], r[..., :-1]) ** 4, axis=-1)
        return MINRQ_SCALE * (m * m / (m - 1.0)) * s
    if kind == "med":
        m = _m_count(r, 3, "MedRQ")
        med = np.median(np.stack([r[..., 2:], r[..., 1:-1], r[..., :-2]]), axis=0)
        return MEDRQ_SCALE * (m * m / (m - 2.0)) * np.sum(med ** 4, axis=-1)
    raise ValueError(f"kind must be 'min' or 'med', got {kind!r}")


def swap_variance(returns: np.ndarray) -> ArrayLike:
    """SwV: 2 * sum(arithmetic return - log return) = 2 * sum(e^r - 1 - r).

    Nonnegative for any input by convexity of exp.
    """
    r = np.asarray(returns, dtype=float)
    _m_count(r, 1, "swap variance")
    return 2.0 * np.sum(np.expm1(r) - r, axis=-1)


def jo_omega(returns: np.ndarray) -> ArrayLike:
    """Sixth-moment scale for the swap-variance test.

    3.05 (M^3/(M-3)) * sum over i >= 4 of the product of four adjacent
    |r|^{3/2}; the sum starts at the first index where all four lags exist.
    """
    r = np.abs(np.asarray(returns, dtype=float)) ** 1.5
    m = _m_count(r, 4, "swap-variance quarticity")
    s = np.sum(r[..., 3:] * r[..., 2:-1] * r[..., 1:-2] * r[..., :-3], axis=-1)
    return JO_OMEGA_CONST * (m ** 3 / (m - 3.0)) * s


def power_variation(returns: np.ndarray, p: float, spacing: int = 1) -> ArrayLike:
    """B(p, k*Delta): sum |r|^p on a grid `spacing` times coarser."""
    if p <= 0:
        raise ValueError("power must be positive")
    r = np.asarray(returns, dtype=float)
    if spacing > 1:
        r = thin(r, spacing)
    if p == 2:
        return np.sum(r * r, axis=-1)    # coincides with realized variance exactly
    return np.sum(np.abs(r) ** p, axis=-1)


def truncated_power_variation(returns: np.ndarray, p: float, threshold: ArrayLike) -> ArrayLike:
    """A(p, Delta): Delta^{1-p/2}/m_p * sum |r|^p 1{|r| < threshold}."""
    if p <= 0:
        raise ValueError("power must be positive")
    if np.any(np.asarray(threshold) <= 0):
        raise ValueError("threshold must be positive")
    r = np.asarray(returns, dtype=float)
    m = r.shape[-1]
    a = np.abs(r)
    kept = np.where(a < np.asarray(threshold)[..., None] if np.ndim(threshold) else a < threshold,
                    a ** p, 0.0)
    return (1.0 / m) ** (1.0 - p / 2.0) / normal_abs_moment(p) * np.sum(kept, axis=-1)


def randomized_truncated_pv(
    returns: np.ndarray, p: float, threshold: ArrayLike, eta: np.ndarray
) -> ArrayLike:
    """B_T(p, Delta): M^{(p-1)/2} * sum |r|^p (1 - eta_i 1{|r| < threshold}).

    `eta` supplies one auxiliary draw per return (values 1 -/+ tau).
    """
    r = np.asarray(returns, dtype=float)
    e = np.asarray(eta, dtype=float)
    if e.shape != r.shape:
        raise ValueError(f"eta shape {e.shape} does not match returns shape {r.shape}")
    m = r.shape[-1]
    a = np.abs(r)
    below = a < (np.asarray(threshold)[..., None] if np.ndim(threshold) else threshold)
    return m ** ((p - 1.0) / 2.0) * np.sum(a ** p * (1.0 - e * below), axis=-1)


def _rolling_sum(x: np.ndarray, width: int) -> np.ndarray:
    """Sums of every `width` consecutive entries along the last axis."""
    c = np.cumsum(x, axis=-1)
    out = c[..., width - 1:].copy()
    out[..., 1:] -= c[..., :-width]
    return out


def local_variance(
    returns: np.ndarray,
    scheme: str = "lm",
    k: int = 10,
    c_theta: float = 3.0,
) -> np.ndarray:
    """Per-interval spot variance from a rolling bipower window.

    The window covers the K-1 adjacent-return products up to and including
    interval i, scaled by (pi/2)(K/(K-1)) and divided by K-2.  Intervals
    before the first complete window are back-filled with its value (no
    look-ahead beyond the warm-up).

    scheme="cpr" iterates once: returns whose square exceeds
    c_theta^2 * V_hat are replaced by the implied cap and the rolling
    window is recomputed, so isolated jumps do not inflate their own
    threshold.  With no exceedances the result equals the plain scheme.
    """
    if k < 3:
        raise ValueError("window must be at least 3")
    r = np.asarray(returns, dtype=float)
    m = r.shape[-1]
    if m < k:
        raise InsufficientDataError(f"local variance needs at least K={k} returns, got {m}")

    def one_pass(a: np.ndarray) -> np.ndarray:
        prod = a[..., 1:] * a[..., :-1]                      # products at i = 2..M
        win = _rolling_sum(prod, k - 1)                       # full windows end at i = K..M
        v = (math.pi / 2.0) * (k / (k - 1.0)) * win / (k - 2.0)
        pad = np.repeat(v[..., :1], k - 1, axis=-1)
        return np.concatenate([pad, v], axis=-1)

    a = np.abs(r)
    v = one_pass(a)
    if scheme == "lm":
        return v
    if scheme != "cpr":
        raise ValueError(f"scheme must be 'lm' or 'cpr', got {scheme!r}")
    cut = c_theta ** 2 * v
    capped = np.where(r * r > cut, np.sqrt(cut), a)
    return one_pass(capped)


def measure_set(returns: np.ndarray, spec: ThresholdSpec) -> MeasureSet:
    """Compute every MeasureSet field for one day or a stack of days."""
    r = np.asarray(returns, dtype=float)
    m = _m_count(r, 4, "measure set")
    return MeasureSet(
        rv=realized_variance(r),
        bv=bipower_variation(r),
        tp=tripower_quarticity(r),
        ctbv=threshold_bipower(r, spec),
        ctripv=threshold_tripower_quarticity(r, spec),
        minrv=min_med_rv(r, "min"),
        medrv=min_med_rv(r, "med"),
        minrq=min_med_rq(r, "min"),
        medrq=min_med_rq(r, "med"),
        swv=swap_variance(r),
        m=m,
    )
