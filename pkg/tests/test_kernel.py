import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entlab.kernel import (
    IntegrabilityError,
    KernelSpec,
    Mode,
    RegimeError,
    interval_rate_under_d,
    kernel_l1,
    kernel_q_integral,
    pseudo_metric,
    sampled_interval_metric,
    sandwich_check,
)
from entlab.metricspace import entropy_numbers
from entlab.rates import fit_power_law

E2 = math.e**2


def loose(factory, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return factory(*a, **kw)


def mp_q_integral(k, q, r):
    """(int_0^r k^q)^(1/q) with tanh-sinh quadrature on a log-refined split."""
    mp.mp.dps = 30
    pts = [mp.mpf(0)] + [mp.mpf(r) * mp.mpf(10) ** -j for j in range(12, 0, -1)] + [mp.mpf(r)]
    return float(mp.quad(lambda x: k(x) ** q, pts) ** (mp.mpf(1) / q))


ORACLE_KERNELS = [
    (KernelSpec.power(0.25), lambda x: x**-0.25),
    (KernelSpec.power(0.4, scale=3.0), lambda x: 3 * x**-0.4),
    (KernelSpec.logpower(0.25, 1.0, c0=5.0), lambda x: x**-0.25 * (5 - mp.log(x)) ** -1),
    (KernelSpec.logpower(0.5, 2.0, c0=5.0), lambda x: x**-0.5 * (5 - mp.log(x)) ** -2),
    (KernelSpec.doublelog(0.25, 0.5, 1.0, c0=E2),
     lambda x: x**-0.25 * (E2 - mp.log(x)) ** -0.5 * (E2 + mp.log(E2 - mp.log(x))) ** -1),
]


class TestQIntegral:
    def test_power_r1(self):
        assert kernel_q_integral(KernelSpec.power(0.25), 2, 1.0) == pytest.approx(math.sqrt(2), rel=1e-12)

    def test_power_quarter(self):
        assert kernel_q_integral(KernelSpec.power(0.25), 2, 0.25) == pytest.approx(1.0, rel=1e-12)

    def test_logpower_critical(self):
        spec = loose(KernelSpec.logpower, 0.5, 1.0, c0=1.0)
        assert kernel_q_integral(spec, 2, 1.0) == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.parametrize("spec,k", ORACLE_KERNELS, ids=lambda v: getattr(v, "family", "k"))
    @pytest.mark.parametrize("q", [1.0, 2.0])
    @pytest.mark.parametrize("r", [1.0, 0.3, 1e-3, 1e-8])
    def test_against_mpmath(self, spec, k, q, r):
        if spec.tau * q >= 1:
            pytest.skip("not in L_q")
        assert kernel_q_integral(spec, q, r) == pytest.approx(mp_q_integral(k, q, r), rel=1e-7)

    @pytest.mark.parametrize("spec", [s for s, _ in ORACLE_KERNELS[:4]])
    def test_closed_form_matches_quadrature(self, spec):
        for r in np.logspace(-12, 0, 13):
            a = kernel_q_integral(spec, 1.0, r, method="closed")
            b = kernel_q_integral(spec, 1.0, r, method="quad")
            assert a == pytest.approx(b, rel=1e-6)

    def test_not_integrable(self):
        with pytest.raises((IntegrabilityError, ValueError)):
            kernel_q_integral(KernelSpec.power(0.5), 2, 1.0)

    @given(st.floats(0.01, 0.45), st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
    def test_monotone_in_r(self, tau, r1, r2):
        spec = KernelSpec.power(tau)
        lo, hi = sorted((r1, r2))
        assert kernel_q_integral(spec, 2, lo) <= kernel_q_integral(spec, 2, hi) * (1 + 1e-12)

    def test_l1(self):
        assert kernel_l1(KernelSpec.power(0.5), 0.25) == pytest.approx(1.0)


class TestPseudoMetric:
    def test_identical(self):
        assert pseudo_metric(KernelSpec.power(0.25), 2, 0.4, 0.4) == 0

    def test_vo_bracket(self):
        d = pseudo_metric(KernelSpec.power(0.25), 2, 0.5, 0.25)
        assert 1 <= d <= math.sqrt(2)

    def test_ws_upper(self):
        d = pseudo_metric(KernelSpec.power(0.25, mode=Mode.WS), 2, 0.5, 0.25)
        assert d <= 2

    def test_vo_against_mpmath(self):
        mp.mp.dps = 20
        s, t = 0.3, 0.7
        f = lambda x: ((t - x) ** -0.25 - ((s - x) ** -0.25 if x < s else 0)) ** 2
        want = math.sqrt(float(mp.quad(f, [0, s, t])))
        assert pseudo_metric(KernelSpec.power(0.25), 2, s, t) == pytest.approx(want, rel=1e-7)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_triangle(self, a, b, c):
        spec = KernelSpec.power(0.25)
        dab, dbc, dac = (pseudo_metric(spec, 2, *p) for p in ((a, b), (b, c), (a, c)))
        assert dac <= dab + dbc + 1e-9

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_symmetric(self, a, b):
        spec = KernelSpec.logpower(0.25, 1.0, c0=5.0, mode=Mode.WS)
        assert pseudo_metric(spec, 2, a, b) == pytest.approx(pseudo_metric(spec, 2, b, a), rel=1e-12)


class TestSandwich:
    def test_identical(self):
        r = sandwich_check(KernelSpec.power(0.25), 2, 0.3, 0.3)
        assert r == (0.0, 0.0, True)

    def test_power(self):
        r = sandwich_check(KernelSpec.power(0.25), 2, 0.75, 0.5)
        assert r.base == pytest.approx(1.0) and r.passed and 1 <= r.d <= 1.41422

    def test_logpower(self):
        spec = loose(KernelSpec.logpower, 0.5, 1.0, c0=1.0)
        r = sandwich_check(spec, 2, 0.5, 0.5 - math.exp(-1))
        assert r.base == pytest.approx(2**-0.5, rel=1e-9) and r.passed

    @given(st.floats(0, 1), st.floats(0, 1), st.sampled_from([4 / 3, 2.0, 4.0]), st.sampled_from(list(Mode)))
    def test_random_pairs(self, s, t, q, mode):
        spec = KernelSpec.power(0.125, mode=mode)
        assert sandwich_check(spec, q, s, t).passed


class TestRates:
    def test_power(self):
        assert interval_rate_under_d(KernelSpec.power(0.25), 2).as_row() == (1.0, 0.25, 0.0, 0.0)

    def test_doublelog_case2(self):
        spec = KernelSpec.doublelog(0.5, 0.75, 0.3, c0=E2)
        assert interval_rate_under_d(spec, 2).exponents == pytest.approx((0.0, 0.25, 0.3))

    def test_doublelog_case3(self):
        spec = KernelSpec.doublelog(0.5, 0.5, 1.0, c0=E2)
        assert interval_rate_under_d(spec, 2).exponents == pytest.approx((0.0, 0.0, 0.5))

    def test_outside(self):
        with pytest.raises(RegimeError):
            interval_rate_under_d(KernelSpec.power(0.6), 2)


class TestSampledMetric:
    def test_two_points(self):
        spec = KernelSpec.power(0.25)
        D = sampled_interval_metric(spec, 2, 2).distance_matrix()
        assert D.shape == (2, 2) and D[0, 1] == pytest.approx(pseudo_metric(spec, 2, 0.0, 1.0))

    def test_entropy_exponent(self):
        cloud = sampled_interval_metric(KernelSpec.power(0.25), 2, 65)
        e = entropy_numbers(cloud, 32, solver="milp").values
        p, _ = fit_power_law(np.arange(1, 33), e)
        assert abs(p - 0.25) <= 0.07


class TestSpecValidation:
    def test_warns_when_not_decreasing(self):
        with pytest.warns(UserWarning):
            KernelSpec.logpower(0.25, 1.0, c0=1.0)

    @pytest.mark.parametrize("kw", [dict(c0=0.0), dict(c0=-1.0)])
    def test_bad_c0(self, kw):
        with pytest.raises(ValueError):
            KernelSpec.logpower(0.25, 1.0, **kw)

    def test_custom_needs_callable(self):
        with pytest.raises(ValueError):
            KernelSpec("CUSTOM")
