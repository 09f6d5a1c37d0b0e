"""Euler-discretized bivariate jump diffusion with dynamic jump intensities.

One trading day is a fine grid of `steps_per_day` Euler steps of the
square-root variance process (full truncation: V+ = max(V, 0) in drift and
diffusion), with at most one price jump and one variance jump per day,
placed at independent uniform steps.  Fine returns are aggregated by
`thin_factor` into the grid the tests consume.

Daily jump occurrences are Bernoulli draws from intensities that follow
either a discretized Hawkes recursion or an affine function of the
variance; the variance-jump intensity can mirror the price intensity.

The variance state and its parameters (theta, sigma_v, mu_v) live in
annualized-proportion units, with mean reversion per day as in the daily
state recursion; emitted returns are raw daily log-returns, i.e. the
day's diffusive return variance is V/252.  Jump sizes are drawn in
abstract units (sign times a lognormal magnitude) and mapped to the
return scale by a configurable unit convention: under "sqrt-day" the
daily jump is Z/sqrt(252), so an abstract size of 10*sqrt(theta) lands
exactly ten daily diffusive standard deviations; "raw-annual" applies
Z/252 and "per-day" applies Z unscaled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .panel import GroundTruth, IntradayDay, Panel, thin
from .rng import PATH, stream
from . import measures as ms_mod

log = logging.getLogger(__name__)

DAYS_PER_YEAR = 252

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap if not (args and callable(args[0])) else args[0]

    HAS_NUMBA = False


# --------------------------------------------------------------------------
# Intensity specifications
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantIntensity:
    """Time-invariant daily jump probability."""

    delta0: float

    def __post_init__(self):
        if not 0.0 <= self.delta0 <= 1.0:
            raise ValueError("constant intensity must lie in [0, 1]")


@dataclass(frozen=True)
class HawkesIntensity:
    """Self-exciting daily recursion delta_t = a*d_inf + (1-a)*delta_{t-1} + b*dN_{t-1}.

    `beta_cross` lets jumps in the other process excite this intensity; it
    defaults to 0 and is exercised by no stock scenario.
    """

    alpha: float
    beta: float
    delta_inf: float
    beta_cross: float = 0.0

    def __post_init__(self):
        if not self.alpha > self.beta >= 0.0:
            raise ValueError("Hawkes stationarity requires alpha > beta >= 0")
        if self.delta_inf < 0:
            raise ValueError("steady-state intensity must be nonnegative")


@dataclass(frozen=True)
class StateDependentIntensity:
    """Intensity affine in the start-of-day diffusive variance."""

    beta0: float
    beta1: float


@dataclass(frozen=True)
class MirrorPrice:
    """Variance-jump intensity equals the price-jump intensity path
    (jump draws stay independent)."""


IntensitySpec = Union[None, ConstantIntensity, HawkesIntensity, StateDependentIntensity, MirrorPrice]


def hawkes_unconditional_mean(alpha: float, beta: float, delta_inf: float) -> float:
    """Long-run mean intensity alpha * delta_inf / (alpha - beta)."""
    if alpha <= beta:
        raise ValueError("nonstationary Hawkes intensity: alpha must exceed beta")
    return alpha * delta_inf / (alpha - beta)


def hawkes_delta_inf(alpha: float, beta: float, unconditional_mean: float) -> float:
    """Steady-state level that yields a target unconditional mean."""
    return unconditional_mean * (alpha - beta) / alpha


def intensity_step(
    spec: IntensitySpec,
    state: float,
    dn_prev: int,
    v_open: float,
    dn_prev_cross: int = 0,
) -> float:
    """Advance one intensity process by a day; result clamped to [0, 1]."""
    if spec is None:
        return 0.0
    if isinstance(spec, ConstantIntensity):
        return spec.delta0
    if isinstance(spec, HawkesIntensity):
        nxt = (spec.alpha * spec.delta_inf + (1.0 - spec.alpha) * state
               + spec.beta * dn_prev + spec.beta_cross * dn_prev_cross)
    elif isinstance(spec, StateDependentIntensity):
        nxt = spec.beta0 + spec.beta1 * v_open
    else:
        raise TypeError("MirrorPrice is resolved by the simulator, not stepped directly")
    return min(1.0, max(0.0, nxt))


def unconditional_intensity(spec: IntensitySpec, mean_variance: float) -> float:
    """Implied long-run jump frequency of an intensity specification."""
    if spec is None:
        return 0.0
    if isinstance(spec, ConstantIntensity):
        return spec.delta0
    if isinstance(spec, HawkesIntensity):
        return hawkes_unconditional_mean(spec.alpha, spec.beta, spec.delta_inf)
    if isinstance(spec, StateDependentIntensity):
        return spec.beta0 + spec.beta1 * mean_variance
    raise TypeError("mirror intensity has no standalone unconditional mean")


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PriceJumpLaw:
    """Sign/magnitude law: -1 with probability pi_p, magnitude exp(N(mu_p, sigma_p^2))."""

    pi_p: float = 0.5
    mu_p: float = 1.0
    sigma_p: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.pi_p <= 1.0:
            raise ValueError("sign probability must lie in [0, 1]")
        if self.sigma_p <= 0:
            raise ValueError("log-magnitude spread must be positive")


@dataclass(frozen=True)
class VolJumpLaw:
    """Exponential variance-jump size with mean mu_v."""

    mu_v: float = 0.03

    def __post_init__(self):
        if self.mu_v <= 0:
            raise ValueError("variance jump mean must be positive")


@dataclass(frozen=True)
class NoiseConfig:
    """Additive log-price noise: i.i.d. or AR(1), scaled to the diffusive grid."""

    noise_ratio: float
    kind: str = "iid"
    phi: float = 0.0

    def __post_init__(self):
        if self.noise_ratio < 0:
            raise ValueError("noise ratio must be nonnegative")
        if self.kind not in ("iid", "ar1"):
            raise ValueError("noise kind must be 'iid' or 'ar1'")
        if not -1.0 < self.phi < 1.0:
            raise ValueError("AR(1) parameter must lie in (-1, 1)")


UNIT_CONVENTIONS = ("sqrt-day", "raw-annual", "per-day")

# Emitted returns are raw daily log-returns while the variance state is
# annualized, so diffusive increments shrink by sqrt(252).
RETURN_EMIT_SCALE = 1.0 / math.sqrt(DAYS_PER_YEAR)


def jump_unit_scale(convention: str) -> float:
    """Factor mapping abstract jump sizes onto daily log-return units.

    sqrt-day: Z shares the annualized-volatility scale, daily jump =
    Z/sqrt(252), so a jump of c*sqrt(theta) is c daily standard
    deviations.  raw-annual: Z is an annual quantity, daily jump = Z/252.
    per-day: Z is applied raw.
    """
    if convention == "sqrt-day":
        return 1.0 / math.sqrt(DAYS_PER_YEAR)
    if convention == "raw-annual":
        return 1.0 / DAYS_PER_YEAR
    if convention == "per-day":
        return 1.0
    raise ValueError(f"unknown unit convention {convention!r}; pick from {UNIT_CONVENTIONS}")


@dataclass(frozen=True)
class DgpConfig:
    """Full parameterization of the bivariate jump diffusion."""

    mu: float = 0.2
    gamma: float = -7.9
    kappa: float = 0.03
    theta: float = 0.02
    sigma_v: float = 0.02
    rho: float = 0.0
    p_intensity: IntensitySpec = None
    v_intensity: IntensitySpec = None
    p_jump: PriceJumpLaw = field(default_factory=PriceJumpLaw)
    v_jump: VolJumpLaw = field(default_factory=VolJumpLaw)
    steps_per_day: int = 720
    thin_factor: int = 10
    unit_convention: str = "sqrt-day"
    noise: Optional[NoiseConfig] = None

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("long-run variance must be positive")
        if 2.0 * self.kappa * self.theta < self.sigma_v ** 2:
            raise ValueError("variance process violates 2*kappa*theta >= sigma_v^2")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError("correlation must lie in [-1, 1]")
        if self.steps_per_day < 1 or self.thin_factor < 1:
            raise ValueError("grid sizes must be positive")
        if self.steps_per_day % self.thin_factor:
            raise ValueError("thin_factor must divide steps_per_day")
        jump_unit_scale(self.unit_convention)

    @property
    def m_per_day(self) -> int:
        return self.steps_per_day // self.thin_factor


@dataclass(frozen=True)
class SimState:
    """Day-to-day carry: variance level, intensities, yesterday's jumps."""

    v: float
    delta_p: float
    delta_v: float
    dn_prev_p: int = 0
    dn_prev_v: int = 0


def initial_state(config: DgpConfig) -> SimState:
    """Start the chain at the long-run variance and unconditional intensities."""
    v0 = config.theta
    if isinstance(config.p_intensity, MirrorPrice):
        raise ValueError("price intensity cannot mirror itself")
    dp = unconditional_intensity(config.p_intensity, v0)
    if isinstance(config.v_intensity, MirrorPrice):
        dv = dp
    else:
        dv = unconditional_intensity(config.v_intensity, v0)
    return SimState(v=v0, delta_p=min(1.0, dp), delta_v=min(1.0, dv))


# --------------------------------------------------------------------------
# Euler path
# --------------------------------------------------------------------------

@njit(cache=True)
def _euler_core(v0, mu, gamma, kappa, theta, sigma_v, rho, h, emit, xi,
                jump_step, jump_size, vjump_step, vjump_size, out_r):  # pragma: no cover
    v = v0
    neg = 0
    sd_sum = 0.0
    rho_c = math.sqrt(1.0 - rho * rho)
    n = out_r.shape[0]
    for i in range(n):
        vp = v if v > 0.0 else 0.0
        step_sd = math.sqrt(vp * h)
        sd_sum += step_sd
        r = emit * ((mu + gamma * vp) * h + step_sd * xi[i, 0])
        if i + 1 == jump_step:
            r += jump_size
        out_r[i] = r
        xv = rho * xi[i, 0] + rho_c * xi[i, 1]
        v = v + kappa * (theta - vp) * h + sigma_v * step_sd * xv
        if i + 1 == vjump_step:
            v += vjump_size
        if v < 0.0:
            neg += 1
    return v, neg, emit * sd_sum / n


def euler_day_path(
    config: DgpConfig,
    v0: float,
    xi: np.ndarray,
    jump_step: int = 0,
    jump_size: float = 0.0,
    vjump_step: int = 0,
    vjump_size: float = 0.0,
):
    """One day of fine-grid returns from pre-drawn standard normals.

    `xi` has shape (steps_per_day, 2); jump steps are 1-based (0 = none)
    and `jump_size` is already in daily log-return units.  Returns (fine
    returns, end-of-day variance, count of pre-truncation negative
    variance steps, mean per-step diffusive standard deviation in return
    units).
    """
    steps = config.steps_per_day
    if xi.shape != (steps, 2):
        raise ValueError(f"xi must have shape ({steps}, 2)")
    out = np.empty(steps)
    h = 1.0 / steps
    # mu and gamma are annual rates; the variance parameters act per day
    # as in the daily state recursion.
    v_close, neg, mean_sd = _euler_core(
        float(v0), config.mu / DAYS_PER_YEAR, config.gamma / DAYS_PER_YEAR,
        config.kappa, config.theta,
        config.sigma_v, config.rho, h, RETURN_EMIT_SCALE, xi,
        int(jump_step), float(jump_size), int(vjump_step), float(vjump_size), out,
    )
    return out, v_close, neg, mean_sd


# --------------------------------------------------------------------------
# Daily simulation
# --------------------------------------------------------------------------

def draw_jumps(
    config: DgpConfig,
    delta_p: float,
    delta_v: float,
    v_open: float,
    rng: np.random.Generator,
):
    """Draw the day's jump events: (dn_p, z_p_applied, dn_v, z_v, jump_step, vjump_step).

    The price jump is -1 with probability pi_p times a lognormal magnitude,
    mapped to the return scale by the unit convention; the variance jump is
    exponential with mean mu_v, applied in variance units.  Steps are
    1-based uniform draws (0 = no jump); at most one of each per day.
    """
    if not (0.0 <= delta_p <= 1.0 and 0.0 <= delta_v <= 1.0):
        raise ValueError("intensities must lie in [0, 1]")
    steps = config.steps_per_day
    scale = jump_unit_scale(config.unit_convention)
    dn_p, z_p, jstep = 0, 0.0, 0
    if rng.random() < delta_p:
        dn_p = 1
        sign = -1.0 if rng.random() < config.p_jump.pi_p else 1.0
        z_p = scale * sign * math.exp(rng.normal(config.p_jump.mu_p, config.p_jump.sigma_p))
        jstep = int(rng.integers(1, steps + 1))
    dn_v, z_v, vstep = 0, 0.0, 0
    if rng.random() < delta_v:
        dn_v = 1
        z_v = float(rng.exponential(config.v_jump.mu_v))
        vstep = int(rng.integers(1, steps + 1))
    return dn_p, z_p, dn_v, z_v, jstep, vstep


def _ar1_path(eps: np.ndarray, phi: float, sd: float) -> np.ndarray:
    u = np.empty_like(eps)
    innov_sd = sd * math.sqrt(1.0 - phi * phi)
    u[0] = sd * eps[0]
    for i in range(1, eps.size):
        u[i] = phi * u[i - 1] + innov_sd * eps[i]
    return u


def _noise_increments(noise: NoiseConfig, n_prices: int, sd_u: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Return increments of the additive log-price noise (length n_prices - 1)."""
    eps = rng.standard_normal(n_prices)
    if noise.kind == "iid" or noise.phi == 0.0:
        u = sd_u * eps
    else:
        u = _ar1_path(eps, noise.phi, sd_u)
    return np.diff(u)


def simulate_day(
    config: DgpConfig,
    state: SimState,
    rng: np.random.Generator,
    day_index: int = 0,
    forced_jumps: Optional[tuple[float, float]] = None,
):
    """Simulate one trading day; returns (IntradayDay with truth, next state).

    `forced_jumps = (z_p_abstract, z_v)` overrides the intensity draws with
    deterministic sizes (zero means no jump of that kind), as in the
    single-day power experiments; the price size is still mapped through
    the unit convention.
    """
    if forced_jumps is None:
        dn_p, z_p, dn_v, z_v, jstep, vstep = draw_jumps(
            config, state.delta_p, state.delta_v, state.v, rng)
    else:
        zp_raw, z_v = forced_jumps
        if z_v < 0:
            raise ValueError("variance jumps must be nonnegative")
        dn_p = int(zp_raw != 0.0)
        dn_v = int(z_v != 0.0)
        z_p = jump_unit_scale(config.unit_convention) * zp_raw
        jstep = int(rng.integers(1, config.steps_per_day + 1)) if dn_p else 0
        vstep = int(rng.integers(1, config.steps_per_day + 1)) if dn_v else 0

    xi = rng.standard_normal((config.steps_per_day, 2))
    r_fine, v_close, _neg, mean_sd = euler_day_path(
        config, state.v, xi, jstep, z_p if dn_p else 0.0, vstep, z_v if dn_v else 0.0)

    if config.noise is not None and config.noise.noise_ratio > 0:
        sd_u = config.noise.noise_ratio * mean_sd
        r_fine = r_fine + _noise_increments(config.noise, r_fine.size + 1, sd_u, rng)

    returns = thin(r_fine, config.thin_factor)
    truth = GroundTruth(
        day_index=day_index,
        dn_p=dn_p, z_p=z_p if dn_p else 0.0,
        dn_v=dn_v, z_v=z_v if dn_v else 0.0,
        v_open=state.v, v_close=max(v_close, 0.0),
        delta_p=state.delta_p, delta_v=state.delta_v,
        jump_step=jstep if dn_p else None,
    )
    day = IntradayDay(day_index=day_index, returns=returns, truth=truth)

    dp_next = intensity_step(
        None if isinstance(config.p_intensity, MirrorPrice) else config.p_intensity,
        state.delta_p, dn_p, max(v_close, 0.0), dn_prev_cross=dn_v)
    if isinstance(config.v_intensity, MirrorPrice):
        dv_next = dp_next
    else:
        dv_next = intensity_step(config.v_intensity, state.delta_v, dn_v,
                                 max(v_close, 0.0), dn_prev_cross=dn_p)
    nxt = SimState(v=max(v_close, 0.0), delta_p=dp_next, delta_v=dv_next,
                   dn_prev_p=dn_p, dn_prev_v=dn_v)
    return day, nxt


def simulate_sequence(config: DgpConfig, t_days: int, seed: int,
                      key_prefix: tuple[int, ...] = ()) -> Panel:
    """Simulate a chained panel of `t_days` days, deterministic in (config, seed).

    Each day draws from its own stream keyed by (seed, *key_prefix, day),
    so replications parallelize without perturbing each other's draws.
    """
    if t_days < 0:
        raise ValueError("day count must be nonnegative")
    state = initial_state(config)
    days = []
    for d in range(t_days):
        rng = stream(seed, *key_prefix, d, PATH)
        day, state = simulate_day(config, state, rng, day_index=d)
        days.append(day)
    return Panel(days=tuple(days))


def inject_noise(day: IntradayDay, noise: NoiseConfig, rng: np.random.Generator) -> IntradayDay:
    """Contaminate a day's grid with additive log-price noise.

    The noise standard deviation is noise_ratio times the day's average
    per-interval diffusive return s.d., proxied by sqrt(BV/M) so jumps do
    not inflate the scale.  Ground truth, if any, is carried over.
    """
    if noise.noise_ratio == 0:
        return day
    r = day.returns
    sd_u = noise.noise_ratio * math.sqrt(ms_mod.bipower_variation(r) / r.size)
    contaminated = r + _noise_increments(noise, r.size + 1, sd_u, rng)
    return IntradayDay(day_index=day.day_index, returns=contaminated, truth=day.truth)


# --------------------------------------------------------------------------
# Stock scenarios
# --------------------------------------------------------------------------

TARGET_JUMP_FREQUENCY = 0.105        # unconditional daily price-jump probability
SD_BETA0 = 0.100
HAWKES_ALPHA = 0.094
HAWKES_BETA = 0.059
CONSTANT_VOL_INTENSITY = 0.105

SCENARIOS = ("H1", "H2", "H3", "SD1", "SD2", "SD3")

# Unit convention used by the sequence scenarios.  Calibrated so that the
# simulated jump sizes sit in the regime where detection rates and sign
# accuracy match the stock accuracy tables; the single-day power surface
# keeps the sqrt-day default, under which its grid spans +/-10 daily
# standard deviations.
SCENARIO_UNIT_CONVENTION = "raw-annual"


def scenario_config(name: str, unit_convention: Optional[str] = None, **overrides) -> DgpConfig:
    """DgpConfig for one of the six stock scenarios (H1-H3, SD1-SD3).

    Hawkes scenarios invert the steady-state level so the unconditional
    jump frequency is 0.105.  State-dependent scenarios rescale the
    variance slope so beta0 + beta1 * E(V) hits the same 0.105 target,
    with E(V) = theta + delta_v * mu_v / kappa accounting for variance
    jumps; the rescaled slope is logged.
    """
    key = name.strip().upper()
    if key not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; pick from {SCENARIOS}")
    base = DgpConfig(unit_convention=unit_convention or SCENARIO_UNIT_CONVENTION)

    vol_rate = 0.0 if key in ("H1", "SD1") else CONSTANT_VOL_INTENSITY
    mean_v = base.theta + vol_rate * base.v_jump.mu_v / base.kappa

    if key.startswith("H"):
        p_spec = HawkesIntensity(
            alpha=HAWKES_ALPHA, beta=HAWKES_BETA,
            delta_inf=hawkes_delta_inf(HAWKES_ALPHA, HAWKES_BETA, TARGET_JUMP_FREQUENCY))
    else:
        beta1 = (TARGET_JUMP_FREQUENCY - SD_BETA0) / mean_v
        log.info("scenario %s: state-dependent slope rescaled to %.6g "
                 "(target mean intensity %.3f at E(V)=%.4g)",
                 key, beta1, TARGET_JUMP_FREQUENCY, mean_v)
        p_spec = StateDependentIntensity(beta0=SD_BETA0, beta1=beta1)

    v_spec: IntensitySpec
    if key in ("H1", "SD1"):
        v_spec = None
    elif key in ("H2", "SD2"):
        v_spec = ConstantIntensity(CONSTANT_VOL_INTENSITY)
    else:
        v_spec = MirrorPrice()

    cfg = replace(base, p_intensity=p_spec, v_intensity=v_spec)
    return replace(cfg, **overrides) if overrides else cfg
