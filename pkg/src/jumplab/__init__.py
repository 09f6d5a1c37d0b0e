"""jumplab: high-frequency price-jump tests, measures and Monte Carlo harness."""

__version__ = "0.1.0"

from .panel import (GroundTruth, IngestionError, IntradayDay, Panel,
                    load_intraday_csv, returns_from_prices, thin)
from .measures import (InsufficientDataError, MeasureSet, ThresholdSpec,
                       bipower_variation, jo_omega, local_variance, measure_set,
                       min_med_rq, min_med_rv, normal_abs_moment, power_variation,
                       randomized_truncated_pv, realized_variance, swap_variance,
                       threshold_bipower, threshold_tripower_quarticity,
                       tripower_quarticity, truncated_power_variation)
from .jumptests import (METHODS, TestOutcome, TuningConfig, abd_scan, asj_stat,
                        bns_stat, cpr_stat, decide, jo_stat, lm_scan, lm_stat,
                        minmed_stat, pz_stat)
from .jumpsize import (JumpMeasures, intraday_jump_sum, jo_jump_size_solve,
                       signed_jump_variation, split_magnitude_sign)
from .simulate import (ConstantIntensity, DgpConfig, HawkesIntensity, MirrorPrice,
                       NoiseConfig, SCENARIOS, SimState, StateDependentIntensity,
                       draw_jumps, hawkes_unconditional_mean, initial_state,
                       inject_noise, intensity_step, jump_unit_scale, scenario_config,
                       simulate_day, simulate_sequence)
from .evaluate import (AccuracyReport, PowerSurface, accuracy_experiment, day_battery,
                       day_outcomes, detection_rates, independence_test, jump_size_mse,
                       power_surface, sign_concordance)

__all__ = [name for name in dir() if not name.startswith("_")]
