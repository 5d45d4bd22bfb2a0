import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entlab.seqspace import (
    INFINITY,
    EntropyProfile,
    LorentzParams,
    MonotoneSeq,
    dyadic_subsequence,
    lh1_check,
    lh1_constant,
    lh2_check,
    lh2_constant,
    lorentz_functional,
    profile_functional,
)

nonincreasing = st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=40).map(
    lambda v: MonotoneSeq(sorted(v, reverse=True)))


def harmonic(N):
    return MonotoneSeq.from_function(lambda n: 1.0 / n, N)


class TestMonotoneSeq:
    def test_rejects_increase(self):
        with pytest.raises(ValueError, match="increases"):
            MonotoneSeq([1, 2])

    @pytest.mark.parametrize("bad", [[-1.0], [math.inf], [math.nan], []])
    def test_rejects_bad_entries(self, bad):
        with pytest.raises(ValueError):
            MonotoneSeq(bad)

    def test_at_extends_and_flags(self):
        s = MonotoneSeq([3, 2, 1])
        assert s.at(2) == (2.0, False)
        assert s.at(9) == (1.0, True)

    def test_values_are_read_only(self):
        s = MonotoneSeq([1.0])
        with pytest.raises(ValueError):
            s.values[0] = 2.0


class TestLorentz:
    def test_zero_sequence(self):
        assert lorentz_functional(MonotoneSeq(np.zeros(5)), LorentzParams(2, 1), 5) == 0

    def test_sup_type_block(self):
        s = MonotoneSeq([1, 1, 1, 1, 0])
        assert lorentz_functional(s, LorentzParams(2, INFINITY), 4) == pytest.approx(2.0)

    def test_hand_sum(self):
        assert lorentz_functional(MonotoneSeq([0.5, 0.25]), LorentzParams(1, 1), 2) == pytest.approx(0.75)

    def test_N_beyond_length(self):
        with pytest.raises(ValueError):
            lorentz_functional(MonotoneSeq([1.0]), LorentzParams(1, 1), 2)

    @given(nonincreasing, st.floats(0.1, 5), st.floats(0.1, 5), st.floats(-2, 2))
    def test_monotone_in_N(self, seq, r, s, a):
        p = LorentzParams(r, s, a)
        vals = [lorentz_functional(seq, p, N) for N in range(1, len(seq) + 1)]
        assert all(b >= a_ - 1e-12 * max(1, a_) for a_, b in zip(vals, vals[1:]))

    @given(nonincreasing, st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.01, 100))
    def test_homogeneous(self, seq, r, s, lam):
        p = LorentzParams(r, s)
        N = len(seq)
        base = lorentz_functional(seq, p, N)
        scaled = lorentz_functional(MonotoneSeq(lam * seq.values), p, N)
        assert scaled == pytest.approx(lam * base, rel=1e-9, abs=1e-300)


class TestDyadic:
    def test_length_one(self):
        assert dyadic_subsequence(MonotoneSeq([2.0])) == MonotoneSeq([2.0])

    def test_indices(self):
        s = MonotoneSeq([1, .5, .4, .3, .2, .15, .1, .05])
        assert np.allclose(dyadic_subsequence(s).values, [1, .5, .3, .05])

    def test_constant(self):
        assert np.all(dyadic_subsequence(MonotoneSeq(np.full(20, 3.0))).values == 3.0)


class TestProfile:
    def test_single_breakpoint(self):
        assert profile_functional(EntropyProfile([(1.0, 1)]), LorentzParams(1, 1)).value == 0

    def test_hand_sum_r1(self):
        v = profile_functional(EntropyProfile([(0.5, 1), (0.25, 2)]), LorentzParams(1, 1))
        assert v.value == pytest.approx(0.25)
        assert v.truncated_at == 0.25

    def test_hand_sum_r2(self):
        v = profile_functional(EntropyProfile([(0.2, 1), (0.1, 8)]), LorentzParams(2, 1))
        assert v.value == pytest.approx(math.sqrt(3) * 0.1)

    def test_count_lookup(self):
        p = EntropyProfile([(0.5, 1), (0.25, 2), (0.1, 5)])
        assert p.count_at(0.7) == 1
        assert p.count_at(0.3) == 2
        assert p.count_at(0.1) == 5
        with pytest.raises(ValueError):
            p.count_at(0.01)

    def test_from_entropy_numbers(self):
        p = EntropyProfile.from_entropy_numbers(MonotoneSeq([0.5, 0.5, 0.25, 0.0]))
        assert list(p.counts) == [1, 3]

    @pytest.mark.parametrize("bp", [[(0.5, 2)], [(0.5, 1), (0.6, 2)], [(0.5, 1), (0.4, 1)]])
    def test_malformed(self, bp):
        with pytest.raises(ValueError):
            EntropyProfile(bp)


class TestHardy:
    def test_lh1_single_term(self):
        r = lh1_check(MonotoneSeq([1, 0, 0]), 2, 2, 0, 1, 1)
        assert (r.lhs, r.rhs, r.ratio) == pytest.approx((1, 1, 1))

    def test_lh1_hand_sum(self):
        r = lh1_check(harmonic(2), 2, 2, 0, 1, 2)
        assert (r.lhs, r.rhs, r.ratio) == pytest.approx((1.5625, 1.25, 1.25))

    def test_lh1_harmonic_large_N(self):
        assert lh1_check(harmonic(10_000), 2, 2, 0, 1, 10_000).ratio <= 8

    def test_lh2_single_term(self):
        r = lh2_check(MonotoneSeq([1, 0, 0]), 2, 0, 1, 3)
        assert (r.lhs, r.rhs, r.ratio) == pytest.approx((1, 1, 1))

    def test_lh2_harmonic_matches_enumeration(self):
        # sup_n H_n / sqrt(n) is reached at n = 2
        N = 10_000
        H = np.cumsum(1.0 / np.arange(1, N + 1))
        want = float(np.max(H / np.sqrt(np.arange(1, N + 1))))
        r = lh2_check(harmonic(N), 2, 0, 1, N)
        assert r.ratio == pytest.approx(want, rel=1e-12)
        assert r.ratio == pytest.approx(3 / (2 * math.sqrt(2)), rel=1e-12)

    def test_lh2_quarter_power(self):
        s = MonotoneSeq.from_function(lambda n: n**-0.25, 1000)
        assert lh2_check(s, 2, 0, 1, 1000).ratio <= 4 / 3 + 1e-9

    def test_zero_rhs(self):
        r = lh1_check(MonotoneSeq([0.0, 0.0]), 2, 2, 0, 1, 2)
        assert r.ratio == 0.0 and r.degenerate and not r.violated

    @pytest.mark.parametrize("t,r", [(1, 1), (2, 1), (0, 2)])
    def test_parameter_range(self, t, r):
        with pytest.raises(ValueError):
            lh2_check(harmonic(4), r, 0, t, 4)

    @pytest.mark.parametrize("t,r,alpha", [(1, 2, 0), (1, 4, 1), (2, 3, -1)])
    @given(data=st.data())
    def test_random_ratios_below_constant(self, t, r, alpha, data):
        N = 64
        raw = data.draw(st.lists(st.floats(0, 1, allow_nan=False), min_size=N, max_size=N))
        seq = MonotoneSeq(sorted(raw, reverse=True))
        c2 = lh2_constant(r, alpha, t, N)
        assert lh2_check(seq, r, alpha, t, N).ratio <= c2 * (1 + 1e-9)
        for s in (1.0, r):
            c1 = lh1_constant(r, s, alpha, t, N)
            assert lh1_check(seq, r, s, alpha, t, N).ratio <= c1 * (1 + 1e-7)

    def test_lh2_constant_attained_by_indicator(self):
        # the extremal sequences for the sup-type inequality are indicators
        N = 32
        c = lh2_constant(2, 0, 1, N)
        best = max(lh2_check(MonotoneSeq([1.0] * m + [0.0] * (N - m)), 2, 0, 1, N).ratio
                   for m in range(1, N + 1))
        assert best <= c * (1 + 1e-12)
