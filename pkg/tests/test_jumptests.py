import math

import numpy as np
import pytest
from scipy.special import ndtri

from jumplab import jumptests as jt
from jumplab.evaluate import day_battery, day_outcomes
from jumplab.jumptests import (METHODS, AsjTuning, PzTuning, TuningConfig, abd_scan,
                               asj_stat, asj_variance_factor, bns_stat, cpr_stat,
                               cpr_threshold_spec, decide, draw_eta, gumbel_critical,
                               jo_stat, lm_constants, lm_scan, minmed_stat, pz_stat)
from jumplab.measures import MeasureSet, measure_set


def _ms(returns, tuning=None):
    tuning = tuning or TuningConfig()
    return measure_set(returns, cpr_threshold_spec(returns, tuning))


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def cross_moment_oracle(k: int, p: int) -> float:
    """E[U^p (U + sqrt(k-1) V)^p] by the Isserlis binomial expansion."""
    total = 0.0
    for j in range(0, p + 1, 2 if p % 2 == 0 else 1):
        if (p + j) % 2 or (p - j) % 2:
            continue
        total += (math.comb(p, j) * (k - 1) ** ((p - j) / 2)
                  * double_factorial(p + j - 1) * double_factorial(p - j - 1))
    return total


class TestConstants:
    def test_ratio_variance_constant(self):
        # arithmetic: (pi/2)^2 + pi - 5
        assert jt.RATIO_VAR_CONST == pytest.approx((math.pi / 2) ** 2 + math.pi - 5, abs=1e-15)
        assert jt.RATIO_VAR_CONST == pytest.approx(0.608994, abs=1e-5)

    def test_minmed_variance_constants(self):
        assert jt.MINRV_VAR_CONST == 1.81
        assert jt.MEDRV_VAR_CONST == 0.96

    def test_cross_moments_isserlis(self):
        for (k, p), val in jt.M_KP.items():
            assert val == pytest.approx(cross_moment_oracle(k, p), abs=1e-9)

    def test_cross_moment_m24_monte_carlo(self):
        rng = np.random.default_rng(99)
        acc, n = 0.0, 0
        for _ in range(8):
            u = rng.standard_normal(2_500_000)
            v = rng.standard_normal(2_500_000)
            acc += np.sum(u ** 4 * (u + v) ** 4)
            n += u.size
        assert jt.M_KP[(2, 4)] == pytest.approx(acc / n, abs=2.0)

    def test_asj_variance_factor(self):
        assert asj_variance_factor(4, 2) == pytest.approx(480.0 / 9.0, abs=1e-9)
        assert asj_variance_factor(4, 2) == pytest.approx(53.333, abs=0.1)
        with pytest.raises(ValueError):
            asj_variance_factor(6, 2)


class TestDecide:
    def test_examples(self):
        assert decide(3.0, jt.TAIL_UPPER, 0.01) == 1
        assert decide(2.0, jt.TAIL_UPPER, 0.01) == 0
        assert decide(3.0, jt.TAIL_LOWER, 0.01) == 0      # wrong tail
        assert decide(-3.0, jt.TAIL_LOWER, 0.01) == 1
        assert decide(-3.0, jt.TAIL_TWO_SIDED, 0.01) == 1  # |T| > 2.5758
        assert decide(2.4, jt.TAIL_TWO_SIDED, 0.01) == 0
        assert decide(5.0, jt.TAIL_GUMBEL, 0.01) == 1
        assert decide(4.5, jt.TAIL_GUMBEL, 0.01) == 0

    def test_nan_never_rejects(self):
        assert decide(float("nan"), jt.TAIL_LOWER, 0.01) == 0

    def test_gumbel_critical_value(self):
        assert gumbel_critical(0.01) == pytest.approx(-math.log(-math.log(0.99)), abs=1e-15)
        assert gumbel_critical(0.01) == pytest.approx(4.6001, abs=1e-4)

    def test_scan_tail_rejected(self):
        with pytest.raises(ValueError):
            decide(1.0, jt.TAIL_SCAN, 0.01)


class TestRatioStatistics:
    def test_rv_equals_iv_gives_zero(self):
        m = MeasureSet(rv=1e-4, bv=1e-4, tp=1e-9, ctbv=1e-4, ctripv=1e-9,
                       minrv=1e-4, medrv=1e-4, minrq=1e-9, medrq=1e-9, swv=1e-4, m=72)
        assert bns_stat(m) == 0.0
        assert minmed_stat(m, "min") == 0.0
        assert minmed_stat(m, "med") == 0.0

    def test_zero_day_conventions(self):
        m = MeasureSet(rv=0.0, bv=0.0, tp=0.0, ctbv=0.0, ctripv=0.0,
                       minrv=0.0, medrv=0.0, minrq=0.0, medrq=0.0, swv=0.0, m=72)
        assert bns_stat(m) == 0.0
        assert cpr_stat(m) == 0.0
        assert jo_stat(m, 0.0) == 0.0

    def test_zero_iv_with_positive_quarticity(self):
        m = MeasureSet(rv=1e-4, bv=0.0, tp=1e-9, ctbv=0.0, ctripv=1e-9,
                       minrv=0.0, medrv=0.0, minrq=1e-9, medrq=1e-9, swv=1e-4, m=72)
        assert bns_stat(m) == 0.0
        assert cpr_stat(m) == 0.0

    def test_hand_value(self):
        # single day evaluated against the printed formula
        m = MeasureSet(rv=2e-4, bv=1.5e-4, tp=4e-9, ctbv=1.5e-4, ctripv=4e-9,
                       minrv=1.4e-4, medrv=1.45e-4, minrq=4e-9, medrq=4e-9, swv=2e-4, m=72)
        rj = 1 - 1.5e-4 / 2e-4
        denom = math.sqrt(jt.RATIO_VAR_CONST / 72 * max(1.0, 4e-9 / 1.5e-4 ** 2))
        assert bns_stat(m) == pytest.approx(rj / denom, rel=1e-12)

    def test_cpr_equals_bns_without_truncation(self, null_panel_72):
        tuning = TuningConfig(c_theta=100.0)
        ms = _ms(null_panel_72, tuning)
        assert np.array_equal(bns_stat(ms), cpr_stat(ms))


class TestAsj:
    def test_null_ratio_near_limit(self):
        from tests.conftest import null_days

        rows = null_days(200, seed=21, steps_per_day=720, thin_factor=1)
        tuning = TuningConfig()
        ms = _ms(rows, tuning)
        from jumplab.measures import power_variation
        s_hat = power_variation(rows, 4, 2) / power_variation(rows, 4, 1)
        assert np.mean(s_hat) == pytest.approx(2.0, abs=0.05)

    def test_dominant_jump_pushes_negative(self, null_panel_72):
        r = null_panel_72[7].copy()
        tuning = TuningConfig()
        stat0 = asj_stat(r, _ms(r), tuning)
        r[10] += 30 * r.std()
        from jumplab.measures import power_variation
        s_hat = power_variation(r, 4, 2) / power_variation(r, 4, 1)
        assert s_hat == pytest.approx(1.0, abs=0.15)
        stat1 = asj_stat(r, _ms(r), tuning)
        assert stat1 < stat0
        assert stat1 < -0.5

    def test_all_truncated_day_undefined(self):
        tuning = TuningConfig()
        zero_day = np.zeros(8)
        assert np.isnan(asj_stat(zero_day, _ms_zero(8), tuning))
        # a zero-BV day maps the cutoff to +inf, so a nonzero day stays defined
        r = np.full(8, 1e-3)
        ms0 = MeasureSet(rv=float(np.sum(r * r)), bv=0.0, tp=0.0, ctbv=0.0, ctripv=0.0,
                         minrv=0.0, medrv=0.0, minrq=0.0, medrq=0.0, swv=0.0, m=8)
        assert not np.isnan(asj_stat(r, ms0, tuning))

    def test_tuning_validation(self):
        with pytest.raises(ValueError):
            AsjTuning(varpi=0.6)
        with pytest.raises(ValueError):
            AsjTuning(k=1)


def _ms_zero(m):
    return MeasureSet(rv=0.0, bv=0.0, tp=0.0, ctbv=0.0, ctripv=0.0, minrv=0.0,
                      medrv=0.0, minrq=0.0, medrq=0.0, swv=0.0, m=m)


class TestPz:
    def test_eta_law(self):
        eta = draw_eta(100_000, 0.05, np.random.default_rng(5))
        assert set(np.round(np.unique(eta), 10)) == {0.95, 1.05}
        assert np.var(eta) == pytest.approx(0.0025, abs=2e-4)
        assert PzTuning().tau ** 2 == pytest.approx(0.0025, abs=1e-18)

    def test_unit_eta_cancels(self, null_panel_72):
        r = null_panel_72[8]
        stat = pz_stat(r, _ms(r), TuningConfig(), np.ones(r.size), 2.0)
        assert stat == 0.0

    def test_zero_day_statistic_zero(self):
        r = np.zeros(8)
        stat = pz_stat(r, _ms_zero(8), TuningConfig(), np.ones(8) * 1.05, 2.0)
        assert stat == 0.0

    def test_deterministic_in_eta(self, null_panel_72):
        r = null_panel_72[9]
        eta = draw_eta(r.size, 0.05, np.random.default_rng(11))
        a = pz_stat(r, _ms(r), TuningConfig(), eta, 4.0)
        b = pz_stat(r, _ms(r), TuningConfig(), eta, 4.0)
        assert a == b

    def test_jump_pushes_positive(self, null_panel_72):
        r = null_panel_72[10].copy()
        eta = draw_eta(r.size, 0.05, np.random.default_rng(13))
        base = pz_stat(r, _ms(r), TuningConfig(), eta, 2.0)
        r[5] += 20 * r.std()
        jumped = pz_stat(r, _ms(r), TuningConfig(), eta, 2.0)
        assert jumped > max(10.0, base)


class TestAbd:
    def test_bonferroni_level_and_critical(self):
        alpha, m = 0.01, 72
        alpha_star = 1 - (1 - alpha) ** (1 / m)
        assert alpha_star == pytest.approx(1.3958e-4, abs=1e-8)
        crit = ndtri(1 - alpha_star / 2)
        # quantile verified by round trip through the survival function
        from scipy.stats import norm
        assert 2 * norm.sf(crit) == pytest.approx(alpha_star, rel=1e-10)
        assert crit == pytest.approx(3.8089, abs=1e-3)

    def test_zero_returns_no_flags(self):
        r = np.zeros(8)
        stat, flags = abd_scan(r, _ms_zero(8), TuningConfig())
        assert stat == 0.0
        assert not flags.any()

    def test_zero_bv_flags_nonzero_returns(self):
        r = np.array([0.0, 0.02, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        ms = _ms_zero(8)
        stat, flags = abd_scan(r, ms, TuningConfig())
        assert np.isinf(stat)
        assert flags[1] and flags.sum() == 1

    def test_alpha_monotonicity(self, null_panel_72):
        r = null_panel_72[:50].copy()
        r[:, 12] += 0.01
        counts = []
        for alpha in (0.05, 0.01, 0.001, 1e-5):
            tuning = TuningConfig(alpha=alpha)
            _, flags = abd_scan(r, _ms(r), tuning)
            counts.append(flags.sum())
        assert counts == sorted(counts, reverse=True)

    def test_conservative_preset(self):
        assert jt.ABD_CONSERVATIVE_ALPHA == 1e-5
        t = TuningConfig(abd=jt.AbdTuning(alpha=jt.ABD_CONSERVATIVE_ALPHA))
        assert t.abd_alpha == 1e-5
        assert TuningConfig().abd_alpha == 0.01


class TestLm:
    def test_paper_constants(self):
        c_m, s_m = lm_constants(72, "paper")
        assert c_m == pytest.approx(2.5826, abs=1e-3)
        assert s_m == pytest.approx(1.1015, abs=1e-4)

    def test_original_constants(self):
        c = math.sqrt(2 / math.pi)
        c_m, s_m = lm_constants(72, "original")
        root = math.sqrt(2 * math.log(72))
        assert c_m == pytest.approx(root / c - (math.log(math.pi) + math.log(math.log(72)))
                                    / (2 * c * root), abs=1e-12)
        assert s_m == pytest.approx(1 / (c * root), abs=1e-12)

    def test_zero_returns_never_reject(self):
        r = np.zeros(30)
        stat, flags = lm_scan(r, TuningConfig())
        c_m, s_m = lm_constants(30, "paper")
        assert stat == pytest.approx(-c_m / s_m, rel=1e-12)
        assert not flags.any()

    def test_zero_local_variance_rejects(self):
        r = np.zeros(30)
        r[25] = 0.05
        stat, flags = lm_scan(r, TuningConfig())
        assert np.isinf(stat)
        assert flags[25]

    def test_jump_flagged(self, null_panel_72):
        r = null_panel_72[11].copy()
        r[40] += 15 * r.std()
        stat, flags = lm_scan(r, TuningConfig())
        assert flags[40]
        assert decide(stat, jt.TAIL_GUMBEL, 0.01) == 1


class TestJo:
    def test_rv_equals_swv_zero(self):
        m = MeasureSet(rv=1e-4, bv=1e-4, tp=1e-9, ctbv=1e-4, ctripv=1e-9, minrv=1e-4,
                       medrv=1e-4, minrq=1e-9, medrq=1e-9, swv=1e-4, m=72)
        assert jo_stat(m, 1e-12) == 0.0

    def test_hand_value(self):
        m = MeasureSet(rv=2.0e-4, bv=1.8e-4, tp=0.0, ctbv=0.0, ctripv=0.0, minrv=0.0,
                       medrv=0.0, minrq=0.0, medrq=0.0, swv=2.1e-4, m=72)
        omega = 3e-12
        expect = 1.8e-4 * 72 / math.sqrt(omega) * (1 - 2.0e-4 / 2.1e-4)
        assert jo_stat(m, omega) == pytest.approx(expect, rel=1e-12)


class TestBatteryProperties:
    def test_scale_equivariance(self, null_panel_72):
        r = null_panel_72[:40]
        tuning = TuningConfig()
        eta = np.vstack([draw_eta(r.shape[1], 0.05, np.random.default_rng(1000 + i))
                         for i in range(r.shape[0])])
        base = day_battery(r, tuning, eta=eta)
        for c in (0.01, 7.0):
            scaled = day_battery(c * r, tuning, eta=eta)
            for m in ("bns", "cpr", "minrv", "medrv", "asj", "lm"):
                np.testing.assert_allclose(scaled[m].statistic, base[m].statistic,
                                           rtol=1e-10, atol=1e-10, err_msg=m)
                assert np.array_equal(scaled[m].indicator, base[m].indicator), m

    def test_determinism_bitwise(self, null_panel_72):
        r = null_panel_72[:20]
        eta = np.vstack([draw_eta(r.shape[1], 0.05, np.random.default_rng(7 + i))
                         for i in range(r.shape[0])])
        a = day_battery(r, TuningConfig(), eta=eta)
        b = day_battery(r, TuningConfig(), eta=eta)
        for m in METHODS:
            assert np.array_equal(a[m].statistic, b[m].statistic), m

    def test_unknown_method_rejected(self, null_panel_72):
        with pytest.raises(ValueError, match="unknown methods"):
            day_battery(null_panel_72[:2], TuningConfig(), methods=("bns", "nope"))

    def test_day_outcomes_wrapper(self, null_panel_72):
        r = null_panel_72[12].copy()
        r[20] += 0.02
        outs = day_outcomes(r, TuningConfig(),
                            eta=draw_eta(r.size, 0.05, np.random.default_rng(3)))
        by_method = {o.method: o for o in outs}
        assert set(by_method) == {m.upper() for m in METHODS}
        assert by_method["BNS"].tail == "Upper"
        assert by_method["ABD"].indicator == 1
        assert 21 in by_method["ABD"].flagged_intervals
