import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumplab.panel import (GroundTruth, IngestionError, IntradayDay, Panel,
                           load_intraday_csv, returns_from_prices, thin)


class TestReturnsFromPrices:
    def test_constant_price(self):
        out = returns_from_prices([100.0] * 5)
        assert np.allclose(out, 0.0)
        assert out.shape == (4,)

    def test_log_ratios(self):
        # oracle: direct log ratios
        prices = [100.0, 101.005, 99.005, 100.0, 100.0]
        out = returns_from_prices(prices)
        expect = [math.log(101.005 / 100.0), math.log(99.005 / 101.005)]
        assert out[0] == pytest.approx(expect[0], abs=1e-12)
        assert out[1] == pytest.approx(expect[1], abs=1e-12)
        assert out[0] == pytest.approx(0.0100, abs=1e-4)
        assert out[1] == pytest.approx(-0.0200, abs=1e-4)

    def test_zero_price_rejected(self):
        with pytest.raises(IngestionError, match="record 2"):
            returns_from_prices([100.0, 100.0, 0.0, 100.0, 100.0])

    def test_too_short(self):
        with pytest.raises(IngestionError):
            returns_from_prices([100.0, 101.0, 102.0])

    @given(st.lists(st.floats(min_value=-0.2, max_value=0.2), min_size=4, max_size=100))
    @settings(max_examples=50, deadline=None)
    def test_round_trip(self, rets):
        prices = 100.0 * np.exp(np.concatenate([[0.0], np.cumsum(rets)]))
        out = returns_from_prices(prices)
        rebuilt = np.concatenate([[0.0], np.cumsum(out)])
        direct = np.log(prices) - np.log(prices[0])
        assert np.allclose(rebuilt, direct, rtol=1e-12, atol=1e-12)


class TestThin:
    def test_pairs(self):
        assert np.allclose(thin([0.01, 0.01, 0.01, 0.01], 2), [0.02, 0.02])

    def test_fine_to_five_minute(self):
        r = np.arange(720) * 1e-5
        out = thin(r, 10)
        assert out.shape == (72,)
        assert out[0] == pytest.approx(r[:10].sum())

    def test_divisibility(self):
        with pytest.raises(ValueError):
            thin(np.zeros(7), 2)

    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=30),
           st.integers(min_value=0, max_value=2 ** 31))
    @settings(max_examples=30, deadline=None)
    def test_total_preserved(self, k, blocks, seed):
        r = np.random.default_rng(seed).normal(0, 0.01, k * blocks)
        assert thin(r, k).sum() == pytest.approx(r.sum(), abs=1e-12)


class TestTypes:
    def test_day_rejects_nan(self):
        with pytest.raises(ValueError):
            IntradayDay(0, np.array([0.1, np.nan, 0.0, 0.0]))

    def test_day_needs_four_returns(self):
        with pytest.raises(ValueError):
            IntradayDay(0, np.array([0.1, 0.2, 0.1]))

    def test_truth_day_index_must_match(self):
        g = GroundTruth(day_index=3, dn_p=0, z_p=0.0, dn_v=0, z_v=0.0,
                        v_open=0.02, v_close=0.02, delta_p=0.1, delta_v=0.0)
        with pytest.raises(ValueError):
            IntradayDay(0, np.zeros(4), truth=g)

    def test_truth_invariants(self):
        with pytest.raises(ValueError):
            GroundTruth(0, dn_p=1, z_p=0.0, dn_v=0, z_v=0.0,
                        v_open=0.02, v_close=0.02, delta_p=0.1, delta_v=0.0)
        with pytest.raises(ValueError):
            GroundTruth(0, dn_p=0, z_p=0.0, dn_v=0, z_v=0.0,
                        v_open=0.02, v_close=0.02, delta_p=1.5, delta_v=0.0)

    def test_panel_grid_agreement(self):
        d1 = IntradayDay(0, np.zeros(4))
        d2 = IntradayDay(1, np.zeros(5))
        with pytest.raises(ValueError):
            Panel(days=(d1, d2))
        with pytest.raises(ValueError):
            Panel(days=(d2, IntradayDay(1, np.zeros(5))))


def _write_sample(path, days, grid=79, drop=None):
    times = [f"{(9 * 60 + 30 + 5 * k) // 60:02d}:{(9 * 60 + 30 + 5 * k) % 60:02d}:00"
             for k in range(grid)]
    lines = ["date,time,price"]
    for d, date in enumerate(days):
        for k, t in enumerate(times):
            if drop and (date, k) in drop:
                continue
            lines.append(f"{date},{t},{100 + d + 0.01 * k:.4f}")
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoadCsv:
    def test_two_day_file(self, tmp_path):
        f = _write_sample(tmp_path / "p.csv", ["2020-01-02", "2020-01-03"])
        panel = load_intraday_csv(f, grid=79)
        assert panel.t == 2
        assert panel.m == 78
        assert panel.days[0].label == "2020-01-02"

    def test_strict_grid_error_names_date(self, tmp_path):
        f = _write_sample(tmp_path / "p.csv", ["2020-01-02", "2020-01-03"],
                          drop={("2020-01-03", 40)})
        with pytest.raises(IngestionError, match="2020-01-03"):
            load_intraday_csv(f, grid=79)

    def test_pad_forward_fills_and_warns(self, tmp_path, caplog):
        f = _write_sample(tmp_path / "p.csv", ["2020-01-02", "2020-01-03"],
                          drop={("2020-01-03", 40)})
        with caplog.at_level(logging.WARNING, logger="jumplab.panel"):
            panel = load_intraday_csv(f, grid=79, pad_forward=True)
        assert panel.t == 2
        assert panel.m == 78
        assert len([r for r in caplog.records if "forward-filled" in r.message]) == 1
        # forward fill repeats the prior price: zero return into the gap slot
        assert panel.days[1].returns[39] == pytest.approx(0.0)

    def test_bad_header(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("time,price\n09:30:00,100\n")
        with pytest.raises(IngestionError, match="header"):
            load_intraday_csv(f, grid=79)
