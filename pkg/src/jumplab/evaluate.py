"""Monte Carlo experiment drivers and accuracy metrics.

`day_battery` runs every configured test and jump-size extraction over a
stack of days in one vectorized pass; `power_surface` and
`accuracy_experiment` drive the single-jump power grid and the
sequence-accuracy battery on top of it.  Work units (grid cells,
replications) draw from deterministic substreams, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import chdtrc

from . import jumpsize as jsz
from . import jumptests as jt
from . import measures as ms_mod
from .jumptests import METHODS, TuningConfig, decide
from .rng import ETA, PATH, stream
from .simulate import DgpConfig, initial_state, scenario_config, simulate_day, simulate_sequence

DEFAULT_SDE_LEVEL = 0.05


def thread_count(requested: Optional[int] = None) -> int:
    """Worker count: explicit argument, JUMPLAB_THREADS, then CPU count."""
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get("JUMPLAB_THREADS")
    if env:
        try:
            n = int(env)
            if n > 0:
                return n
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class MethodDaily:
    """Per-day outputs of one method over a stack of days."""

    statistic: np.ndarray
    indicator: np.ndarray
    z: np.ndarray
    log_magnitude: np.ndarray
    sign: np.ndarray
    flags: Optional[np.ndarray] = None       # (days, M) bool, scan tests only


def day_battery(
    returns: np.ndarray,
    tuning: TuningConfig,
    eta: Optional[np.ndarray] = None,
    methods: Sequence[str] = METHODS,
    alpha: Optional[float] = None,
) -> dict[str, MethodDaily]:
    """All requested tests and jump measures over days arranged as (T, M).

    `eta` carries the PZ auxiliary draws, one per return; it is required
    only when a PZ method is requested.  `alpha` overrides the tuning
    significance level (statistics are unchanged; only critical regions
    and scan flags move).
    """
    r = np.atleast_2d(np.asarray(returns, dtype=float))
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ValueError(f"unknown methods {bad}; valid: {list(METHODS)}")
    alpha = tuning.alpha if alpha is None else alpha
    if alpha is not None and not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")

    spec = jt.cpr_threshold_spec(r, tuning)
    ms = ms_mod.measure_set(r, spec)
    daily_ret = r.sum(axis=-1)
    out: dict[str, MethodDaily] = {}

    def variation(name: str, stat, iv_est):
        ind = decide(stat, jt.METHOD_TAIL[name], alpha)
        jm = jsz.variation_measures(ms.rv, iv_est, daily_ret, ind)
        out[name] = MethodDaily(np.asarray(stat, dtype=float), np.asarray(ind),
                                np.asarray(jm.z), np.asarray(jm.log_magnitude),
                                np.asarray(jm.sign))

    if "bns" in methods:
        variation("bns", jt.bns_stat(ms), ms.bv)
    if "cpr" in methods:
        variation("cpr", jt.cpr_stat(ms), ms.ctbv)
    if "minrv" in methods:
        variation("minrv", jt.minmed_stat(ms, "min"), ms.minrv)
    if "medrv" in methods:
        variation("medrv", jt.minmed_stat(ms, "med"), ms.medrv)

    if "asj" in methods:
        stat = jt.asj_stat(r, ms, tuning)
        thr = np.asarray(jt.asj_threshold(ms, tuning), dtype=float)
        iv = ms_mod.truncated_power_variation(r, 2.0, np.where(thr > 0, thr, np.inf))
        variation("asj", stat, iv)

    pz_requested = [m for m in methods if m in ("pz2", "pz4")]
    if pz_requested:
        if eta is None:
            raise ValueError("PZ methods need auxiliary eta draws")
        e = np.atleast_2d(np.asarray(eta, dtype=float))
        if e.shape != r.shape:
            raise ValueError(f"eta shape {e.shape} does not match returns {r.shape}")
        thr = np.asarray(jt.pz_threshold(ms, tuning), dtype=float)
        safe_thr = np.where(thr > 0, thr, np.inf)
        # PZ's own truncation machinery doubles as its integrated-variance
        # estimate; the randomized measure is clamped at zero before use.
        iv_pz = np.maximum(ms_mod.randomized_truncated_pv(r, 2.0, safe_thr, e), 0.0)
        for name, p in (("pz2", 2.0), ("pz4", 4.0)):
            if name in methods:
                variation(name, jt.pz_stat(r, ms, tuning, e, p), iv_pz)

    if "abd" in methods:
        abd_tuning = tuning if alpha == tuning.alpha else _with_alpha(tuning, alpha)
        stat, flags = jt.abd_scan(r, ms, abd_tuning)
        ind = flags.any(axis=-1).astype(int)
        jm = jsz.scan_measures(r, flags, ind)
        out["abd"] = MethodDaily(np.asarray(stat, dtype=float), ind, np.asarray(jm.z),
                                 np.asarray(jm.log_magnitude), np.asarray(jm.sign), flags)

    if "lm" in methods:
        stat, flags = jt.lm_scan(r, tuning, alpha)
        ind = decide(stat, jt.METHOD_TAIL["lm"], alpha)
        jm = jsz.scan_measures(r, flags, ind)
        out["lm"] = MethodDaily(np.asarray(stat, dtype=float), np.asarray(ind), np.asarray(jm.z),
                                np.asarray(jm.log_magnitude), np.asarray(jm.sign), flags)

    if "jo" in methods:
        omega = ms_mod.jo_omega(r)
        stat = jt.jo_stat(ms, omega)
        ind = decide(stat, jt.METHOD_TAIL["jo"], alpha)
        jm = jsz.jo_measures(ms.swv, ms.rv, ind)
        out["jo"] = MethodDaily(np.asarray(stat, dtype=float), np.asarray(ind), np.asarray(jm.z),
                                np.asarray(jm.log_magnitude), np.asarray(jm.sign))

    return out


def _with_alpha(tuning: TuningConfig, alpha: float) -> TuningConfig:
    from dataclasses import replace

    # ABD follows the global level unless its own override is set.
    return replace(tuning, alpha=alpha)


def day_outcomes(
    returns: np.ndarray,
    tuning: Optional[TuningConfig] = None,
    eta: Optional[np.ndarray] = None,
    methods: Sequence[str] = METHODS,
) -> list[jt.TestOutcome]:
    """Run the battery on a single day and wrap each method's verdict."""
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1:
        raise ValueError("day_outcomes expects one day of returns")
    tuning = tuning or TuningConfig()
    battery = day_battery(r[None, :], tuning, eta=None if eta is None else np.asarray(eta)[None, :],
                          methods=methods)
    out = []
    for m in methods:
        res = battery[m]
        flagged = tuple(np.flatnonzero(res.flags[0]) + 1) if res.flags is not None else ()
        out.append(jt.TestOutcome(method=m.upper(), statistic=float(res.statistic[0]),
                                  tail=jt.METHOD_TAIL[m], indicator=int(res.indicator[0]),
                                  flagged_intervals=flagged))
    return out


def panel_eta(m: int, t_days: int, tau: float, seed: int,
              key_prefix: tuple[int, ...] = ()) -> np.ndarray:
    """Per-day PZ eta draws for a whole panel, keyed like the simulator."""
    eta = np.empty((t_days, m))
    for d in range(t_days):
        eta[d] = jt.draw_eta(m, tau, stream(seed, *key_prefix, d, ETA))
    return eta


# --------------------------------------------------------------------------
# Accuracy metrics
# --------------------------------------------------------------------------

def detection_rates(indicators: np.ndarray, truth_dn: np.ndarray) -> tuple[float, float]:
    """(DJ, NDJ): detection rate on jump days, correct-negative rate elsewhere.

    Either rate is NaN when its conditioning set is empty.
    """
    ind = np.asarray(indicators).astype(bool)
    dn = np.asarray(truth_dn).astype(bool)
    if ind.shape != dn.shape:
        raise ValueError("indicator and truth lengths differ")
    n_jump = int(dn.sum())
    n_quiet = dn.size - n_jump
    dj = float(np.sum(ind & dn) / n_jump) if n_jump else float("nan")
    ndj = float(np.sum(~ind & ~dn) / n_quiet) if n_quiet else float("nan")
    return dj, ndj


def independence_test(errors: np.ndarray) -> float:
    """P-value of the likelihood-ratio test of i.i.d. errors vs a Markov chain.

    The alternative is a first-order two-state chain; the statistic is
    compared to chi-squared(1).  Degenerate sequences (constant, or a
    state with no outgoing transition) carry no evidence of dependence and
    return 1.
    """
    e = np.asarray(errors).astype(int)
    if e.ndim != 1 or e.size < 2:
        raise ValueError("need a 1-D error sequence of length >= 2")
    prev, cur = e[:-1], e[1:]
    n00 = int(np.sum((prev == 0) & (cur == 0)))
    n01 = int(np.sum((prev == 0) & (cur == 1)))
    n10 = int(np.sum((prev == 1) & (cur == 0)))
    n11 = int(np.sum((prev == 1) & (cur == 1)))
    n0, n1 = n00 + n01, n10 + n11
    ones = n01 + n11
    total = n0 + n1
    if n0 == 0 or n1 == 0 or ones == 0 or ones == total:
        return 1.0

    def xlogy(n: int, p: float) -> float:
        return n * np.log(p) if n else 0.0

    pi = ones / total
    pi01 = n01 / n0
    pi11 = n11 / n1
    ll_iid = xlogy(n00 + n10, 1.0 - pi) + xlogy(ones, pi)
    ll_markov = (xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01)
                 + xlogy(n10, 1.0 - pi11) + xlogy(n11, pi11))
    lr = max(0.0, 2.0 * (ll_markov - ll_iid))
    return float(chdtrc(1, lr))


def jump_run_lengths(truth_dn: np.ndarray) -> np.ndarray:
    """Length of the maximal run of consecutive jump days covering each day
    (0 on non-jump days)."""
    dn = np.asarray(truth_dn).astype(bool)
    if dn.ndim != 1:
        raise ValueError("expected a 1-D occurrence sequence")
    out = np.zeros(dn.size, dtype=int)
    if not dn.any():
        return out
    starts = dn & ~np.concatenate(([False], dn[:-1]))
    run_id = np.cumsum(starts) - 1
    lengths = np.bincount(run_id[dn])
    out[dn] = lengths[run_id[dn]]
    return out


def _mse_components(z_measured, truth_z, truth_dn, min_run: int) -> tuple[float, int]:
    zm = np.abs(np.asarray(z_measured, dtype=float))
    zt = np.abs(np.asarray(truth_z, dtype=float))
    if zm.shape != zt.shape:
        raise ValueError("measured and true size lengths differ")
    qualify = jump_run_lengths(truth_dn) >= min_run
    n = int(qualify.sum())
    if n == 0:
        return 0.0, 0
    return float(np.sum((zm[qualify] - zt[qualify]) ** 2)), n


def jump_size_mse(z_measured, truth_z, truth_dn, min_run: int = 1) -> float:
    """Mean squared error of |size| over jump days in runs of >= min_run.

    NaN when no day qualifies.
    """
    if min_run not in (1, 2, 3):
        raise ValueError("min_run must be 1, 2 or 3")
    sse, n = _mse_components(z_measured, truth_z, truth_dn, min_run)
    return sse / n if n else float("nan")


def sign_concordance(sign_measured, truth_sign, truth_dn) -> float:
    """Share of jump days whose measured sign matches the true sign."""
    sm = np.asarray(sign_measured, dtype=float)
    st = np.asarray(truth_sign, dtype=float)
    dn = np.asarray(truth_dn).astype(bool)
    if sm.shape != st.shape or sm.shape != dn.shape:
        raise ValueError("length mismatch")
    n = int(dn.sum())
    if n == 0:
        return float("nan")
    return float(np.sum(sm[dn] == st[dn]) / n)


# --------------------------------------------------------------------------
# Experiment drivers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerSurface:
    """Rejection rates over a (price jump, variance jump) size grid."""

    zp_grid: np.ndarray
    zv_grid: np.ndarray
    reps: int
    rates: dict[str, np.ndarray]      # method -> (len(zp), len(zv))


@dataclass(frozen=True)
class MethodAccuracy:
    dj_bar: float
    ndj_bar: float
    sde: float
    mse: float
    mse_ge2: float
    mse_ge3: float
    scd_bar: float


@dataclass(frozen=True)
class AccuracyReport:
    """Sequence-experiment accuracy battery, averaged over replications."""

    scenario: str
    reps: int
    t_days: int
    methods: dict[str, MethodAccuracy]


def default_zp_grid(theta: float, points: int = 11) -> np.ndarray:
    return np.linspace(-10.0 * np.sqrt(theta), 10.0 * np.sqrt(theta), points)


def default_zv_grid(theta: float, points: int = 11) -> np.ndarray:
    return np.linspace(0.0, 20.0 * theta, points)


def _power_cell(args) -> tuple[int, dict[str, float]]:
    (config, tuning, methods, seed, cell_idx, zp, zv, reps) = args
    state0 = initial_state(config)
    m = config.m_per_day
    rows = np.empty((reps, m))
    for rep in range(reps):
        rng = stream(seed, cell_idx, rep, PATH)
        day, _ = simulate_day(config, state0, rng, day_index=0, forced_jumps=(zp, zv))
        rows[rep] = day.returns
    eta = None
    if any(mth in ("pz2", "pz4") for mth in methods):
        eta = np.empty((reps, m))
        for rep in range(reps):
            eta[rep] = jt.draw_eta(m, tuning.pz.tau, stream(seed, cell_idx, rep, ETA))
    battery = day_battery(rows, tuning, eta=eta, methods=methods)
    return cell_idx, {mth: float(battery[mth].indicator.mean()) for mth in methods}


def power_surface(
    config: DgpConfig,
    zp_grid: Optional[Sequence[float]] = None,
    zv_grid: Optional[Sequence[float]] = None,
    reps: int = 200,
    methods: Sequence[str] = METHODS,
    tuning: Optional[TuningConfig] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> PowerSurface:
    """Rejection rate per method over a grid of forced single-day jump sizes.

    Each cell simulates `reps` independent days with deterministic price
    and variance jumps of the given sizes (zero disables that jump), so
    the (0, 0) cell is the empirical size.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    zp = np.asarray(default_zp_grid(config.theta) if zp_grid is None else zp_grid, dtype=float)
    zv = np.asarray(default_zv_grid(config.theta) if zv_grid is None else zv_grid, dtype=float)
    if np.any(np.diff(zp) < 0) or np.any(np.diff(zv) < 0):
        raise ValueError("grids must be sorted ascending")
    tuning = tuning or TuningConfig()
    jobs = []
    for i, p in enumerate(zp):
        for j, v in enumerate(zv):
            jobs.append((config, tuning, tuple(methods), seed, i * zv.size + j, float(p), float(v), reps))
    results: dict[int, dict[str, float]] = {}
    workers = thread_count(threads)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, rates in pool.map(_power_cell, jobs, chunksize=8):
                results[idx] = rates
    else:
        for job in jobs:
            idx, rates = _power_cell(job)
            results[idx] = rates
    mats = {mth: np.empty((zp.size, zv.size)) for mth in methods}
    for i in range(zp.size):
        for j in range(zv.size):
            cell = results[i * zv.size + j]
            for mth in methods:
                mats[mth][i, j] = cell[mth]
    return PowerSurface(zp_grid=zp, zv_grid=zv, reps=reps, rates=mats)


def _accuracy_rep(args) -> tuple[int, dict[str, dict[str, float]]]:
    (config, t_days, tuning, methods, seed, rep) = args
    panel = simulate_sequence(config, t_days, seed, key_prefix=(rep,))
    r = panel.returns_matrix()
    truth = panel.truth_arrays()
    eta = None
    if any(mth in ("pz2", "pz4") for mth in methods):
        eta = panel_eta(panel.m, panel.t, tuning.pz.tau, seed, key_prefix=(rep,))
    battery = day_battery(r, tuning, eta=eta, methods=methods)
    dn = truth["dn_p"]
    true_sign = np.where(truth["z_p"] < 0, -1.0, 1.0)
    metrics: dict[str, dict[str, float]] = {}
    for mth in methods:
        res = battery[mth]
        dj, ndj = detection_rates(res.indicator, dn)
        p_dep = independence_test((res.indicator != dn).astype(int))
        sse1, n1 = _mse_components(res.z, truth["z_p"], dn, 1)
        sse2, n2 = _mse_components(res.z, truth["z_p"], dn, 2)
        sse3, n3 = _mse_components(res.z, truth["z_p"], dn, 3)
        scd = sign_concordance(res.sign, true_sign, dn)
        metrics[mth] = {
            "dj": dj, "ndj": ndj, "p_dep": p_dep, "scd": scd,
            "sse1": sse1, "n1": n1, "sse2": sse2, "n2": n2, "sse3": sse3, "n3": n3,
        }
    return rep, metrics


def accuracy_experiment(
    scenario: str,
    reps: int = 200,
    t_days: int = 2000,
    methods: Sequence[str] = METHODS,
    tuning: Optional[TuningConfig] = None,
    seed: int = 0,
    threads: Optional[int] = None,
    sde_level: float = DEFAULT_SDE_LEVEL,
    config: Optional[DgpConfig] = None,
) -> AccuracyReport:
    """Sequence-accuracy battery for one scenario.

    Per replication: simulate T chained days, run every method, and score
    detection (DJ/NDJ), serial dependence of detection errors (SDE at
    `sde_level`), size accuracy (MSE over jump days, overall and within
    runs of >= 2 and >= 3), and sign concordance.  DJ/NDJ/SCD average the
    per-replication rates; MSEs pool squared errors weighted by each
    replication's qualifying jump count.
    """
    if reps < 1 or t_days < 2:
        raise ValueError("need reps >= 1 and t_days >= 2")
    cfg = config if config is not None else scenario_config(scenario)
    tuning = tuning or TuningConfig()
    jobs = [(cfg, t_days, tuning, tuple(methods), seed, rep) for rep in range(reps)]
    per_rep: dict[int, dict[str, dict[str, float]]] = {}
    workers = thread_count(threads)
    if workers > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rep, metrics in pool.map(_accuracy_rep, jobs, chunksize=max(1, reps // (4 * workers))):
                per_rep[rep] = metrics
    else:
        for job in jobs:
            rep, metrics = _accuracy_rep(job)
            per_rep[rep] = metrics

    out: dict[str, MethodAccuracy] = {}
    for mth in methods:
        rows = [per_rep[rep][mth] for rep in range(reps)]

        def nanmean(key: str) -> float:
            vals = np.array([row[key] for row in rows])
            return float(np.nanmean(vals)) if np.any(~np.isnan(vals)) else float("nan")

        def pooled(sse_key: str, n_key: str) -> float:
            sse = sum(row[sse_key] for row in rows)
            n = sum(row[n_key] for row in rows)
            return sse / n if n else float("nan")

        sde = float(np.mean([row["p_dep"] < sde_level for row in rows]))
        out[mth] = MethodAccuracy(
            dj_bar=nanmean("dj"), ndj_bar=nanmean("ndj"), sde=sde,
            mse=pooled("sse1", "n1"), mse_ge2=pooled("sse2", "n2"),
            mse_ge3=pooled("sse3", "n3"), scd_bar=nanmean("scd"),
        )
    return AccuracyReport(scenario=scenario, reps=reps, t_days=t_days, methods=out)
