import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumplab.jumpsize import (_swap_gap, intraday_jump_sum, jo_jump_size_solve,
                              signed_jump_variation, split_magnitude_sign)


class TestSignedJumpVariation:
    def test_clamped_at_zero(self):
        assert signed_jump_variation(1e-4, 1e-4, 0.01) == 0.0
        assert signed_jump_variation(1e-4, 2e-4, 0.01) == 0.0

    def test_direct(self):
        assert signed_jump_variation(5e-4, 1e-4, -0.02) == pytest.approx(-0.02, abs=1e-15)

    def test_sign_zero_tie(self):
        assert signed_jump_variation(5e-4, 1e-4, 0.0) > 0

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            signed_jump_variation(-1e-4, 0.0, 0.0)

    @given(st.floats(min_value=0, max_value=1e-2), st.floats(min_value=0, max_value=1e-2))
    @settings(max_examples=100, deadline=None)
    def test_squared_size_identity(self, rv, iv):
        z = signed_jump_variation(rv, iv, 1.0)
        if rv > iv:
            assert z * z + iv <= rv + 1e-15


class TestIntradayJumpSum:
    def test_single_flag(self):
        r = np.zeros(8)
        r[2] = -0.05
        flags = np.zeros(8, dtype=bool)
        flags[2] = True
        assert intraday_jump_sum(r, flags) == pytest.approx(-0.05)

    def test_two_flags(self):
        r = np.zeros(8)
        r[1], r[6] = 0.04, -0.01
        flags = np.zeros(8, dtype=bool)
        flags[[1, 6]] = True
        assert intraday_jump_sum(r, flags) == pytest.approx(0.03)

    def test_no_flags(self):
        assert intraday_jump_sum(np.full(5, 0.1), np.zeros(5, dtype=bool)) == 0.0

    def test_shape_check(self):
        with pytest.raises(ValueError):
            intraday_jump_sum(np.zeros(5), np.zeros(4, dtype=bool))


class TestJoSolve:
    def test_zero_gap(self):
        assert jo_jump_size_solve(0.0) == 0.0

    def test_forward_map_values(self):
        # d computed by direct evaluation of f(Z) = 2(e^Z - Z - 1) - Z^2
        d = 2 * (math.exp(0.1) - 0.1 - 1) - 0.01
        assert jo_jump_size_solve(d) == pytest.approx(0.1, abs=1e-8)
        d_neg = 2 * (math.exp(-1.0) + 1.0 - 1) - 1.0
        assert d_neg == pytest.approx(-0.26424, abs=1e-5)
        assert jo_jump_size_solve(d_neg) == pytest.approx(-1.0, abs=1e-8)

    def test_round_trip_grid(self):
        for z in (0.01, -0.01, 0.1, -0.1, 1.0, -1.0, 5.0, -5.0):
            d = float(_swap_gap(np.array([z]))[0])
            assert jo_jump_size_solve(d) == pytest.approx(z, abs=1e-8)

    def test_indicator_gates_solution(self):
        d = np.array([0.5, 0.5])
        out = jo_jump_size_solve(d, indicator=np.array([1, 0]))
        assert out[0] > 0
        assert out[1] == 0.0

    def test_sign_follows_gap(self):
        assert jo_jump_size_solve(1e-6) > 0
        assert jo_jump_size_solve(-1e-6) < 0

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            jo_jump_size_solve(-1e9)

    def test_monotone_derivative_nonnegative(self):
        z = np.linspace(-5, 5, 101)
        fp = 2.0 * (np.expm1(z) - z)
        assert np.all(fp >= -1e-15)


class TestSplitMagnitudeSign:
    def test_defined_case(self):
        lm, s = split_magnitude_sign(-0.02, rv=5e-4, iv_est=1e-4)
        assert lm == pytest.approx(math.log(0.02), abs=1e-12)
        assert lm == pytest.approx(-3.912, abs=1e-3)
        assert s == -1.0

    def test_zero_measure_undefined(self):
        lm, s = split_magnitude_sign(0.0, rv=5e-4, iv_est=1e-4)
        assert math.isnan(lm)
        assert s == 1.0

    def test_rv_below_iv_undefined_with_daily_sign(self):
        lm, s = split_magnitude_sign(0.0, rv=1e-4, iv_est=1e-4, daily_return=-0.01)
        assert math.isnan(lm)
        assert s == -1.0

    def test_vector(self):
        lm, s = split_magnitude_sign(np.array([0.1, 0.0]), np.array([1.0, 1.0]),
                                     np.array([0.5, 0.5]), np.array([1.0, -1.0]))
        assert lm[0] == pytest.approx(math.log(0.1))
        assert math.isnan(lm[1])
        assert list(s) == [1.0, -1.0]
