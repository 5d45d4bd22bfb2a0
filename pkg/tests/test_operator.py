import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from entlab.kernel import KernelSpec, Mode
from entlab.operator import (
    RL,
    RL04I,
    RL04II,
    DegenerateNetError,
    DiscretizedOperator,
    NetKind,
    SizeCapError,
    apply,
    net_lower_kernel_atoms,
    net_lower_means,
    net_lower_rademacher,
    rieli_bound,
    rl04_bound,
    rl_monomial,
    semigroup_check,
    shift_modulus_check,
    singular_values,
    thread_count,
)
from entlab.rates import fit_power_law
from entlab.seqspace import MonotoneSeq

RL_HALF = DiscretizedOperator(RL(0.5), 65)
samples = arrays(np.float64, 65, elements=st.floats(-10, 10, allow_nan=False))


class TestApply:
    def test_zero(self):
        assert np.all(apply(RL_HALF, np.zeros(65)) == 0)

    def test_plain_integration(self):
        op = DiscretizedOperator(RL(1.0), 257)
        assert np.max(np.abs(apply(op, np.ones(257)) - op.x)) <= 1e-10

    def test_half_integral_of_one(self):
        op = DiscretizedOperator(RL(0.5), 257)
        g = apply(op, np.ones(257))
        assert g[-1] == pytest.approx(2 / math.sqrt(math.pi), rel=1e-10)
        assert np.allclose(g, 2 * np.sqrt(op.x / math.pi), rtol=0, atol=1e-10)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 1.5])
    @pytest.mark.parametrize("k", range(5))
    def test_monomials(self, alpha, k):
        op = DiscretizedOperator(RL(alpha), 257)
        got = apply(op, op.x**k)
        want = rl_monomial(alpha, k, op.x)
        assert np.max(np.abs(got - want)) <= 1e-6 * np.max(np.abs(want))

    @given(samples, samples, st.floats(-5, 5))
    def test_linear(self, f, g, c):
        lhs = apply(RL_HALF, f + c * g)
        rhs = apply(RL_HALF, f) + c * apply(RL_HALF, g)
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)

    @given(arrays(np.float64, 65, elements=st.floats(0, 10, allow_nan=False)))
    def test_trapezoid_weights_positive(self, f):
        # order 1 weights are non-negative, so non-negative data stays non-negative
        op = DiscretizedOperator(RL(0.5), 65, order=1)
        assert np.all(apply(op, f) >= -1e-12)

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            apply(RL_HALF, np.ones(3))


class TestSemigroup:
    def test_half_half(self):
        assert semigroup_check(0.5, 0.5, [1.0], 256) <= 1e-6

    def test_monomial_identity(self):
        assert semigroup_check(1.0, 1.0, [0.0, 1.0], 256) <= 1e-10

    def test_zero(self):
        assert semigroup_check(0.5, 0.5, [0.0], 64) == 0


class TestShift:
    def test_zero_shift(self):
        r = shift_modulus_check(RL(0.5), 2, 0.0, np.ones(257))
        assert r.lhs == 0 and r.passed

    def test_rl_half(self):
        r = shift_modulus_check(RL(0.5), 2, 0.25, np.ones(257))
        assert r.rhs == pytest.approx(2 / math.sqrt(math.pi), rel=1e-9)
        assert r.passed

    @given(arrays(np.float64, 129, elements=st.floats(-10, 10, allow_nan=False)),
           st.sampled_from([1.0, 2.0, math.inf]), st.integers(1, 6))
    def test_random(self, f, p, j):
        assert shift_modulus_check(KernelSpec.power(0.25), p, 2.0**-j, f).passed

    def test_needs_volterra(self):
        with pytest.raises(ValueError):
            shift_modulus_check(KernelSpec.power(0.25, mode=Mode.WS), 2, 0.25, np.ones(129))


class TestNets:
    def test_rademacher_half(self):
        b = net_lower_rademacher(KernelSpec.power(0.5), 4)
        assert (b.separation, b.bound, b.log2_cardinality) == pytest.approx((2.0, 1.0, 4.0), rel=1e-10)
        assert b.net_kind is NetKind.RADEMACHER and b.entropy_index == 15

    def test_rademacher_quarter(self):
        assert net_lower_rademacher(KernelSpec.power(0.25), 1).bound == pytest.approx(4 / 3, rel=1e-10)

    def test_rademacher_vanishes(self):
        b = [net_lower_rademacher(KernelSpec.power(0.25), n).bound for n in (1, 10, 100, 10_000)]
        assert all(x > y for x, y in zip(b, b[1:])) and b[-1] < 1e-2

    def test_atoms_power(self):
        b = net_lower_kernel_atoms(KernelSpec.power(0.25), 2, 4)
        assert (b.separation, b.bound) == pytest.approx((1.0, 0.5), rel=1e-10)

    def test_atoms_logpower(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            spec = KernelSpec.logpower(0.5, 1.0, c0=1.0)
        b = net_lower_kernel_atoms(spec, 2, math.e**3, log_m=3.0)
        assert b.separation == pytest.approx(0.5, rel=1e-10)

    def test_atoms_degenerate(self):
        with pytest.raises(DegenerateNetError):
            net_lower_kernel_atoms(KernelSpec.power(0.25), 2, 1)

    def test_means_four(self):
        b = net_lower_means(KernelSpec.power(0.25), 2, 4)
        assert b.log2_cardinality == 2
        assert b.separation == pytest.approx(2**-0.5, rel=1e-10)

    def test_means_sixteen(self):
        b = net_lower_means(KernelSpec.power(0.25), 2, 16)
        assert b.log2_cardinality == 8
        assert b.separation == pytest.approx(16**-0.25 * 2**-0.5, rel=1e-10)

    def test_means_not_square(self):
        with pytest.raises(ValueError):
            net_lower_means(KernelSpec.power(0.25), 2, 5)


class TestSingularValues:
    def test_rate(self):
        s = singular_values(DiscretizedOperator(RL(0.5), 256)).values
        p, _ = fit_power_law(np.arange(8, 65), s[7:64])
        assert 0.45 <= p <= 0.55

    def test_young_bound(self):
        s = singular_values(DiscretizedOperator(RL(0.5), 256)).values
        assert s[0] <= 2 / math.sqrt(math.pi)

    def test_zero_kernel(self):
        op = DiscretizedOperator.from_matrix(np.zeros((8, 8)))
        assert np.all(singular_values(op).values == 0)

    def test_cap(self):
        with pytest.raises(SizeCapError):
            singular_values(DiscretizedOperator(RL(0.5), 2000))

    def test_threads_do_not_change_matrix(self, monkeypatch):
        monkeypatch.setenv("ENTLAB_THREADS", "1")
        a = DiscretizedOperator(RL(0.5), 300).matrix()
        monkeypatch.setenv("ENTLAB_THREADS", "3")
        b = DiscretizedOperator(RL(0.5), 300).matrix()
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("v", ["0", "-2", "x"])
    def test_bad_thread_count(self, monkeypatch, v):
        monkeypatch.setenv("ENTLAB_THREADS", v)
        with pytest.raises(ValueError):
            thread_count()


class TestBounds:
    def test_rieli(self):
        assert rieli_bound(KernelSpec.power(0.25), 2, 4) == pytest.approx(2**-0.5, rel=1e-10)

    def test_rieli_vanishes(self):
        assert rieli_bound(KernelSpec.power(0.25), 2, 10**8) < 1e-3

    def test_rl04_ii_zero(self):
        assert rl04_bound(MonotoneSeq(np.zeros(8)), RL04II, 4).value == 1

    def test_rl04_ii_hand_sum(self):
        e = MonotoneSeq(1.0 / np.arange(1, 9))
        assert rl04_bound(e, RL04II, 4).value == pytest.approx(2.67100, abs=1e-5)

    def test_rl04_i(self):
        e = MonotoneSeq(1.0 / np.arange(1, 9))
        assert rl04_bound(e, RL04I(1.0, 0.0, 2.0), 3).value == pytest.approx(1.0)
