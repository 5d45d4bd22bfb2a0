import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entlab.rates import RateFormula, dyadic_points, eval_rate, fit_power_law, fit_rate, fitted_constant
from entlab.seqspace import MonotoneSeq


class TestEval:
    def test_constant(self):
        assert eval_rate(RateFormula(), 12345) == 1

    def test_power(self):
        assert eval_rate(RateFormula(1, 0.75), 16) == pytest.approx(0.125)

    def test_log_at_one(self):
        assert eval_rate(RateFormula(1, 0, 1), 1) == pytest.approx(1.0)

    def test_rejects_n_zero(self):
        with pytest.raises(ValueError):
            eval_rate(RateFormula(), 0)

    @pytest.mark.parametrize("bad", [dict(C=0), dict(C=-1), dict(p0=float("nan"))])
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            RateFormula(**bad)


class TestFit:
    def test_exact_power(self):
        n = np.arange(1, 2**12 + 1)
        f = fit_rate(MonotoneSeq(eval_rate(RateFormula(2.0, 0.75), n)), 4, 2**12)
        assert f.formula.exponents == pytest.approx((0.75, 0, 0), abs=1e-6)
        assert f.formula.C == pytest.approx(2.0, rel=1e-6)

    def test_log_growth(self):
        n = np.arange(1, 2**16 + 1)
        v = eval_rate(RateFormula(1, 0.5, -1), n)
        f = fit_rate(v, 4, 2**16)
        assert f.formula.q0 == pytest.approx(-1, abs=0.02)

    def test_noise(self):
        rng = np.random.default_rng(0)
        n = np.arange(1, 2**14 + 1)
        v = n**-0.5 * np.exp(0.01 * rng.standard_normal(n.size))
        f = fit_rate(v, 4, 2**14, fit_log=False)
        assert f.formula.p0 == pytest.approx(0.5, abs=0.05)

    def test_loglog(self):
        n = np.arange(1, 2**20 + 1)
        v = eval_rate(RateFormula(1, 0.25, 0.5, 2.0), n)
        f = fit_rate(v, 4, 2**20, fit_loglog=True)
        assert f.formula.exponents == pytest.approx((0.25, 0.5, 2.0), abs=1e-6)

    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="dyadic"):
            fit_rate(np.ones(64), 8, 64)

    @given(st.floats(-1, 3), st.floats(-2, 2), st.floats(0.1, 10))
    def test_recovers_model(self, p0, q0, C):
        n = np.arange(1, 2**12 + 1)
        f = fit_rate(eval_rate(RateFormula(C, p0, q0), n), 4, 2**12)
        assert f.formula.exponents == pytest.approx((p0, q0, 0), abs=1e-6)
        assert f.residual < 1e-8

    def test_power_law(self):
        p, C = fit_power_law([1, 2, 4, 8], [3, 1.5, 0.75, 0.375])
        assert (p, C) == pytest.approx((1.0, 3.0))

    def test_fitted_constant(self):
        v = 5.0 / np.arange(1, 9)
        assert fitted_constant(v, RateFormula(1, 1), np.arange(1, 9)) == pytest.approx(5.0)

    def test_dyadic_points(self):
        assert list(dyadic_points(3, 40)) == [4, 8, 16, 32]
