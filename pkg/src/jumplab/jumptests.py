"""The ten daily price-jump tests and their critical regions.

Statistics are grouped by construction: squared-variation ratios (BNS,
CPR, MINRV, MEDRV), higher-order power variation (ASJ, PZ2, PZ4),
standardized returns (ABD, LM) and swap variance (JO).  Each statistic
function accepts per-day scalars or aligned arrays for a stack of days.

Degenerate days (no variation) map to "statistic 0, no jump" rather than
NaN so Monte Carlo aggregation never propagates missing values; genuinely
undefined statistics (fully truncated ASJ days) come back as NaN with the
indicator forced to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import ndtri

from . import measures as ms_mod
from .measures import MeasureSet, ThresholdSpec, local_variance, normal_abs_moment

ArrayLike = Union[np.ndarray, float]

METHODS = ("bns", "cpr", "minrv", "medrv", "asj", "pz2", "pz4", "abd", "lm", "jo")

TAIL_UPPER = "Upper"
TAIL_LOWER = "Lower"
TAIL_TWO_SIDED = "TwoSidedNormal"
TAIL_GUMBEL = "Gumbel"
TAIL_SCAN = "BonferroniScan"

METHOD_TAIL = {
    "bns": TAIL_UPPER,
    "cpr": TAIL_UPPER,
    "minrv": TAIL_UPPER,
    "medrv": TAIL_UPPER,
    "asj": TAIL_LOWER,
    "pz2": TAIL_UPPER,
    "pz4": TAIL_UPPER,
    "abd": TAIL_SCAN,
    "lm": TAIL_GUMBEL,
    "jo": TAIL_TWO_SIDED,
}

# Asymptotic variance constants of the ratio statistics.
RATIO_VAR_CONST = (math.pi / 2.0) ** 2 + math.pi - 5.0   # BNS and CPR
MINRV_VAR_CONST = 1.81
MEDRV_VAR_CONST = 0.96

# ABD's conservative significance preset (0.001%).
ABD_CONSERVATIVE_ALPHA = 1e-5

# E[|U|^p |U + sqrt(k-1) V|^p] for independent standard normals, by (k, p).
# Exact values from the Isserlis expansion; the test suite cross-checks them
# against a Monte Carlo oracle.
M_KP = {
    (2, 2): 4.0,
    (2, 4): 204.0,
    (3, 4): 321.0,
    (4, 4): 456.0,
}


@dataclass(frozen=True)
class AsjTuning:
    p: float = 4.0
    k: int = 2
    theta_scale: float = 3.0
    varpi: float = 0.48

    def __post_init__(self):
        if self.k < 2 or int(self.k) != self.k:
            raise ValueError("ASJ grid multiple k must be an integer >= 2")
        lo = 0.5 - 1.0 / self.p
        if not lo < self.varpi < 0.5:
            raise ValueError(f"ASJ varpi must lie in ({lo}, 0.5)")


@dataclass(frozen=True)
class PzTuning:
    theta_scale: float = 2.3
    varpi: float = 0.4
    tau: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.varpi < 0.5:
            raise ValueError("PZ varpi must lie in (0, 1/2)")
        if self.tau <= 0:
            raise ValueError("PZ tau must be positive")


@dataclass(frozen=True)
class LmTuning:
    k: int = 10
    constants_variant: str = "paper"   # "paper" or "original"

    def __post_init__(self):
        if self.k < 3:
            raise ValueError("LM window must be at least 3")
        if self.constants_variant not in ("paper", "original"):
            raise ValueError("constants_variant must be 'paper' or 'original'")


@dataclass(frozen=True)
class AbdTuning:
    alpha: Optional[float] = None    # falls back to the global level


@dataclass(frozen=True)
class CprTuning:
    local_k: int = 50                # rolling window of the local variance stand-in


@dataclass(frozen=True)
class TuningConfig:
    """Significance level and per-test tuning parameters.

    Defaults follow the values recommended by each test's authors: 1%
    daily level, CPR truncation multiple 3, ASJ power 4 on a doubled grid
    with root 0.48 and scale 3, PZ root 0.4 with scale 2.3 and tau 0.05,
    LM window 10.
    """

    alpha: float = 0.01
    c_theta: float = 3.0
    asj: AsjTuning = field(default_factory=AsjTuning)
    pz: PzTuning = field(default_factory=PzTuning)
    lm: LmTuning = field(default_factory=LmTuning)
    abd: AbdTuning = field(default_factory=AbdTuning)
    cpr: CprTuning = field(default_factory=CprTuning)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.c_theta <= 0:
            raise ValueError("c_theta must be positive")

    @property
    def abd_alpha(self) -> float:
        return self.alpha if self.abd.alpha is None else self.abd.alpha


@dataclass(frozen=True)
class TestOutcome:
    """One method's daily verdict: statistic, critical region and indicator."""

    method: str
    statistic: float
    tail: str
    indicator: int
    flagged_intervals: tuple[int, ...] = ()


def gumbel_critical(alpha: float) -> float:
    """Upper-alpha quantile of the standardized Gumbel law."""
    return -math.log(-math.log(1.0 - alpha))


def decide(statistic: ArrayLike, tail: str, alpha: float) -> ArrayLike:
    """0/1 jump indicator for a statistic under its critical region.

    NaN statistics (undefined days) never reject.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    t = np.asarray(statistic, dtype=float)
    if tail == TAIL_UPPER:
        hit = t > ndtri(1.0 - alpha)
    elif tail == TAIL_LOWER:
        hit = t < ndtri(alpha)
    elif tail == TAIL_TWO_SIDED:
        hit = np.abs(t) > ndtri(1.0 - alpha / 2.0)
    elif tail == TAIL_GUMBEL:
        hit = t > gumbel_critical(alpha)
    else:
        raise ValueError(f"no scalar critical region for tail {tail!r}")
    hit = np.where(np.isnan(t), False, hit)
    return hit.astype(int) if np.ndim(hit) else int(hit)


def _ratio_stat(total: ArrayLike, iv: ArrayLike, quart: ArrayLike,
                var_const: float, m: int) -> ArrayLike:
    """Common form (1 - IV/total) / sqrt(c M^-1 max(1, Q/IV^2)) with guards."""
    total = np.asarray(total, dtype=float)
    iv = np.asarray(iv, dtype=float)
    quart = np.asarray(quart, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(iv > 0, quart / np.square(iv), np.where(quart > 0, np.inf, 1.0))
        rj = np.where(total > 0, 1.0 - iv / total, 0.0)
        denom = np.sqrt(var_const / m * np.maximum(1.0, ratio))
        stat = np.where(np.isfinite(denom), rj / denom, 0.0)
    stat = np.where(total > 0, stat, 0.0)
    return stat if stat.ndim else float(stat)


def bns_stat(ms: MeasureSet) -> ArrayLike:
    """BNS ratio statistic: relative jump measure over its asymptotic scale."""
    return _ratio_stat(ms.rv, ms.bv, ms.tp, RATIO_VAR_CONST, ms.m)


def cpr_stat(ms: MeasureSet) -> ArrayLike:
    """CPR statistic: BNS form with threshold (truncated) measures."""
    return _ratio_stat(ms.rv, ms.ctbv, ms.ctripv, RATIO_VAR_CONST, ms.m)


def minmed_stat(ms: MeasureSet, kind: str) -> ArrayLike:
    """MinRV / MedRV ratio statistics."""
    if kind == "min":
        return _ratio_stat(ms.rv, ms.minrv, ms.minrq, MINRV_VAR_CONST, ms.m)
    if kind == "med":
        return _ratio_stat(ms.rv, ms.medrv, ms.medrq, MEDRV_VAR_CONST, ms.m)
    raise ValueError(f"kind must be 'min' or 'med', got {kind!r}")


def asj_variance_factor(p: float, k: int) -> float:
    """M(p, k) in the ASJ variance, from tabulated normal cross-moments."""
    key = (int(k), int(p))
    if key not in M_KP or p not in (2.0, 4.0) or int(p) != p:
        raise ValueError(f"no tabulated cross-moment for (k, p) = {key}")
    m_p = normal_abs_moment(p)
    m_2p = normal_abs_moment(2 * p)
    m_kp = M_KP[key]
    return (k ** (p - 2.0) * (1.0 + k) * m_2p
            + k ** (p - 2.0) * (k - 1.0) * m_p ** 2
            - 2.0 * k ** (p / 2.0 - 1.0) * m_kp) / m_p ** 2


def asj_threshold(ms: MeasureSet, tuning: TuningConfig) -> ArrayLike:
    """ASJ return cutoff: theta_scale * sqrt(BV) * M^-varpi."""
    return tuning.asj.theta_scale * np.sqrt(np.asarray(ms.bv, dtype=float)) * ms.m ** -tuning.asj.varpi


def pz_threshold(ms: MeasureSet, tuning: TuningConfig) -> ArrayLike:
    """PZ return cutoff: theta_scale * sqrt(BV) * M^-varpi."""
    return tuning.pz.theta_scale * np.sqrt(np.asarray(ms.bv, dtype=float)) * ms.m ** -tuning.pz.varpi


def asj_stat(returns: np.ndarray, ms: MeasureSet, tuning: TuningConfig) -> ArrayLike:
    """ASJ two-grid power-variation ratio statistic (lower-tail test).

    Days where every return is truncated leave the variance estimate
    undefined; those come back as NaN (decide() maps NaN to no jump).
    """
    r = np.asarray(returns, dtype=float)
    p, k = tuning.asj.p, tuning.asj.k
    thr = asj_threshold(ms, tuning)
    b_fine = ms_mod.power_variation(r, p, 1)
    b_coarse = ms_mod.power_variation(r, p, k)
    a_p = ms_mod.truncated_power_variation(r, p, np.where(np.asarray(thr) > 0, thr, np.inf))
    a_2p = ms_mod.truncated_power_variation(r, 2 * p, np.where(np.asarray(thr) > 0, thr, np.inf))
    factor = asj_variance_factor(p, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_hat = b_coarse / b_fine
        sigma = factor / ms.m * a_2p / np.square(a_p)
        stat = (s_hat - k ** (p / 2.0 - 1.0)) / np.sqrt(sigma)
    stat = np.where((a_p > 0) & (b_fine > 0), stat, np.nan)
    return stat if np.ndim(stat) else float(stat)


def draw_eta(m: int, tau: float, rng: np.random.Generator, n_days: Optional[int] = None) -> np.ndarray:
    """Auxiliary PZ draws: i.i.d. on {1-tau, 1+tau} with equal probability."""
    shape = (m,) if n_days is None else (n_days, m)
    return 1.0 + tau * (2.0 * rng.integers(0, 2, size=shape) - 1.0)


def pz_stat(returns: np.ndarray, ms: MeasureSet, tuning: TuningConfig,
            eta: np.ndarray, p: float) -> ArrayLike:
    """PZ randomized-truncation statistic for power p (upper-tail test).

    The numerator is the eta-randomized truncated variation; the
    denominator studentizes it by its conditional standard deviation
    Var(eta) * sum of |r|^{2p} over the non-truncated set, which makes the
    statistic standard normal given the returns under the no-jump null.
    """
    r = np.asarray(returns, dtype=float)
    m = r.shape[-1]
    thr = np.asarray(pz_threshold(ms, tuning), dtype=float)
    num = ms_mod.randomized_truncated_pv(r, p, np.where(thr > 0, thr, np.inf), eta)
    a = np.abs(r)
    below = a < (thr[..., None] if thr.ndim else thr)
    var_eta = tuning.pz.tau ** 2
    den = np.sqrt(var_eta * m ** (p - 1.0) * np.sum(a ** (2 * p) * below, axis=-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = np.where(den > 0, num / den, 0.0)
    return stat if np.ndim(stat) else float(stat)


def abd_scan(returns: np.ndarray, ms: MeasureSet, tuning: TuningConfig):
    """ABD intraday scan at the Bonferroni-adjusted level.

    Returns (max |T_i| per day, flag matrix).  A zero-BV day with nonzero
    returns flags every nonzero return (the limit of the test as the
    variance estimate vanishes).
    """
    r = np.asarray(returns, dtype=float)
    m = r.shape[-1]
    alpha = tuning.abd_alpha
    alpha_star = 1.0 - (1.0 - alpha) ** (1.0 / m)
    crit = float(ndtri(1.0 - alpha_star / 2.0))
    bv = np.asarray(ms.bv, dtype=float)
    per_interval = (bv[..., None] if bv.ndim else bv) / m
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.abs(r) / np.sqrt(per_interval)
    t = np.where(np.isnan(t), 0.0, t)                 # 0/0 on all-zero days
    flags = t > crit                                  # inf > crit flags nonzero returns
    stat = t.max(axis=-1)
    return stat, flags


def lm_constants(m: int, variant: str) -> tuple[float, float]:
    """Gumbel centering C_M and scale S_M for the LM maximum statistic.

    Two constant sets circulate for this statistic: a rounded form using
    0.8 / 1.6 / 0.6 with log pi inside the scale terms ('paper'), and the
    underlying extreme-value limit with c = sqrt(2/pi) and log M
    throughout ('original').  They differ materially (the rounded form is
    far more conservative), so both ship behind this switch.
    """
    log_m = math.log(m)
    if variant == "paper":
        c_m = math.sqrt(2.0 * log_m) / 0.8 - (math.log(math.pi) + math.log(log_m)) / (
            1.6 * math.sqrt(2.0 * math.log(math.pi)))
        s_m = 1.0 / (0.6 * math.sqrt(2.0 * math.log(math.pi)))
    elif variant == "original":
        c = math.sqrt(2.0 / math.pi)
        c_m = math.sqrt(2.0 * log_m) / c - (math.log(math.pi) + math.log(log_m)) / (
            2.0 * c * math.sqrt(2.0 * log_m))
        s_m = 1.0 / (c * math.sqrt(2.0 * log_m))
    else:
        raise ValueError(f"unknown LM constants variant {variant!r}")
    return c_m, s_m


def lm_scan(returns: np.ndarray, tuning: TuningConfig, alpha: Optional[float] = None):
    """LM extreme-value statistic and per-interval flags.

    Flags mark intervals whose standardized |return| exceeds the Gumbel
    critical value after the (C_M, S_M) transform; the daily statistic is
    the transformed maximum.  Zero local variance under a nonzero return
    yields +inf (certain rejection).
    """
    r = np.asarray(returns, dtype=float)
    m = r.shape[-1]
    alpha = tuning.alpha if alpha is None else alpha
    vhat = local_variance(r, "lm", tuning.lm.k)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.abs(r) / np.sqrt(vhat)
    t = np.where(np.isnan(t), 0.0, t)                 # 0/0: no excitation
    c_m, s_m = lm_constants(m, tuning.lm.constants_variant)
    z = (t - c_m) / s_m
    flags = z > gumbel_critical(alpha)
    stat = z.max(axis=-1)
    return stat, flags


def lm_stat(returns: np.ndarray, tuning: TuningConfig) -> ArrayLike:
    """Daily LM statistic: standardized maximum of |r| over local volatility."""
    stat, _ = lm_scan(returns, tuning)
    return stat if np.ndim(stat) else float(stat)


def jo_stat(ms: MeasureSet, omega: ArrayLike) -> ArrayLike:
    """Swap-variance statistic (two-sided): BV M / sqrt(omega) * (1 - RV/SwV)."""
    swv = np.asarray(ms.swv, dtype=float)
    omega = np.asarray(omega, dtype=float)
    bv = np.asarray(ms.bv, dtype=float)
    rv = np.asarray(ms.rv, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = bv * ms.m / np.sqrt(omega) * (1.0 - rv / swv)
    stat = np.where((swv > 0) & (omega > 0), stat, 0.0)
    return stat if stat.ndim else float(stat)


def cpr_threshold_spec(returns: np.ndarray, tuning: TuningConfig) -> ThresholdSpec:
    """Per-interval CPR truncation thresholds from the local-variance filter."""
    base = local_variance(returns, "cpr", tuning.cpr.local_k, tuning.c_theta)
    return ThresholdSpec(scale=tuning.c_theta, base=base)
