"""Weighted Lorentz-type functionals on non-increasing sequences.

Logarithms in this module are base 2. Indices in formulas are 1-based
(``xi_1`` is ``seq.values[0]``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class _Infinity:
    """Marker for the summability index ``s = INFINITY`` (sup-type functional)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MonotoneSeq:
    """Finite non-increasing sequence of non-negative reals.

    Construction raises ``ValueError`` on negative, non-finite or increasing
    entries. ``truncated`` records that some evaluation had to extend the
    sequence past its end.
    """

    values: np.ndarray

    def __init__(self, values):
        v = np.atleast_1d(np.asarray(values, dtype=float)).ravel()
        if v.size == 0:
            raise ValueError("sequence must have at least one entry")
        if not np.all(np.isfinite(v)):
            raise ValueError("sequence entries must be finite")
        if np.any(v < 0):
            raise ValueError("sequence entries must be non-negative")
        if np.any(np.diff(v) > 0):
            k = int(np.argmax(np.diff(v) > 0))
            raise ValueError(f"sequence increases at position {k + 1} -> {k + 2}")
        object.__setattr__(self, "values", _readonly(v))

    @classmethod
    def from_function(cls, f, N):
        """Materialize ``f(1), ..., f(N)``."""
        n = np.arange(1, N + 1, dtype=float)
        return cls(np.asarray(f(n), dtype=float))

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __eq__(self, other):
        return isinstance(other, MonotoneSeq) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def __repr__(self):
        return f"MonotoneSeq({np.array2string(self.values, threshold=8)})"

    def at(self, n):
        """1-based lookup that extends by the last value; returns ``(value, extended)``."""
        n = int(n)
        if n < 1:
            raise ValueError("index must be >= 1")
        if n <= self.values.size:
            return float(self.values[n - 1]), False
        return float(self.values[-1]), True

    def take(self, idx):
        """Vectorized 1-based lookup with last-value extension.

        Returns ``(values, extended)`` where ``extended`` is True when any
        index ran past the end.
        """
        idx = np.asarray(idx, dtype=np.int64)
        if np.any(idx < 1):
            raise ValueError("indices must be >= 1")
        clipped = np.minimum(idx, self.values.size)
        return self.values[clipped - 1], bool(np.any(idx > self.values.size))


@dataclass(frozen=True)
class LorentzParams:
    r: float
    s: object
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError("r must be a positive finite real")
        s = self.s
        if s is INFINITY or (isinstance(s, float) and math.isinf(s) and s > 0):
            object.__setattr__(self, "s", INFINITY)
        elif not (s > 0 and math.isfinite(s)):
            raise ValueError("s must be positive or INFINITY")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")

    @property
    def sup_type(self):
        return self.s is INFINITY


@dataclass(frozen=True, eq=False)
class EntropyProfile:
    """Step function ``eps -> N(A, eps)`` given by its breakpoints.

    ``N(eps) = counts[i]`` on ``[epsilons[i], epsilons[i-1])`` and
    ``N(eps) = 1`` for ``eps >= epsilons[0]``. Below the smallest breakpoint
    the profile is unknown.
    """

    epsilons: np.ndarray
    counts: np.ndarray

    def __init__(self, breakpoints):
        bp = list(breakpoints)
        if not bp:
            raise ValueError("profile needs at least one breakpoint")
        eps = np.array([float(e) for e, _ in bp])
        cnt = np.array([int(c) for _, c in bp], dtype=np.int64)
        if np.any(~np.isfinite(eps)) or np.any(eps <= 0):
            raise ValueError("breakpoint radii must be positive and finite")
        if np.any(np.diff(eps) >= 0):
            raise ValueError("breakpoint radii must be strictly decreasing")
        if np.any(cnt < 1) or np.any(np.diff(cnt) <= 0):
            raise ValueError("counts must be positive and strictly increasing")
        if cnt[0] != 1:
            raise ValueError("the largest breakpoint must carry count 1")
        object.__setattr__(self, "epsilons", _readonly(eps))
        object.__setattr__(self, "counts", cnt)

    @classmethod
    def from_entropy_numbers(cls, seq):
        """Build the covering profile implied by ``eps_1 >= eps_2 >= ...``.

        ``N(eps) = min{n : eps_n <= eps}``; zero entries are dropped since
        the profile lives on positive radii.
        """
        v = np.asarray(seq.values if isinstance(seq, MonotoneSeq) else seq, dtype=float)
        bp = []
        for n, e in enumerate(v, start=1):
            if e <= 0:
                break
            if not bp or e < bp[-1][0]:
                bp.append((e, n))
        return cls(bp)

    @property
    def metric_entropy(self):
        return np.log2(self.counts.astype(float))

    @property
    def truncation_point(self):
        return float(self.epsilons[-1])

    def count_at(self, eps):
        """Evaluate ``N(eps)`` for ``eps >= truncation_point``."""
        if eps < self.epsilons[-1]:
            raise ValueError("radius below the smallest breakpoint")
        # first breakpoint with epsilons[i] <= eps
        i = int(np.searchsorted(-self.epsilons, -eps, side="left"))
        return int(self.counts[i])


def _check_N(seq, N):
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ValueError("N must be a positive integer")
    if N > len(seq):
        raise ValueError(f"N={N} exceeds sequence length {len(seq)}")


def lorentz_functional(seq, params, N):
    """Partial ``l_{r,s,alpha}`` quasi-norm of ``seq`` over ``n <= N``.

    Finite ``s``: ``(sum (log2(n+1))^(-alpha s) n^(s/r-1) xi_n^s)^(1/s)``.
    ``s = INFINITY``: ``max (log2(n+1))^(-alpha) n^(1/r) xi_n``.
    """
    _check_N(seq, N)
    xi = seq.values[:N]
    n = np.arange(1, N + 1, dtype=float)
    lg = np.log2(n + 1)
    r, a = params.r, params.alpha
    if params.sup_type:
        return float(np.max(lg ** (-a) * n ** (1.0 / r) * xi))
    s = float(params.s)
    terms = lg ** (-a * s) * n ** (s / r - 1) * xi**s
    return float(np.sum(terms) ** (1.0 / s))


def dyadic_subsequence(seq):
    """``e_n = eps_{2^(n-1)}`` for all ``n`` with ``2^(n-1) <= len(seq)``."""
    m = len(seq)
    idx = 1 << np.arange(0, m.bit_length())
    idx = idx[idx <= m]
    return MonotoneSeq(seq.values[idx - 1])


class ProfileValue(NamedTuple):
    value: float
    truncated_at: float


def profile_functional(profile, params):
    """Discrete entropy-integral functional of a step profile.

    Finite ``s`` sums ``(log2(2+H))^(-alpha s) H^(s/r) (eps_hi^s - eps_lo^s)``
    over the constancy intervals; ``s = INFINITY`` takes the supremum of
    ``eps (log2(2+H))^(-alpha) H^(1/r)``, approached at the upper end of
    each interval. Both ignore radii below the smallest breakpoint, which is
    returned as ``truncated_at``.
    """
    eps = profile.epsilons
    H = profile.metric_entropy
    if eps.size == 1:
        return ProfileValue(0.0, float(eps[-1]))
    hi, lo, Hi = eps[:-1], eps[1:], H[1:]
    r, a = params.r, params.alpha
    lw = np.log2(2.0 + Hi)
    if params.sup_type:
        val = float(np.max(hi * lw ** (-a) * Hi ** (1.0 / r)))
    else:
        s = float(params.s)
        val = float(np.sum(lw ** (-a * s) * Hi ** (s / r) * (hi**s - lo**s)))
    return ProfileValue(val, float(eps[-1]))


class InequalityCheck(NamedTuple):
    """``lhs``, ``rhs`` and ``ratio = lhs / rhs``.

    When ``rhs == 0`` the ratio is 0.0 if ``lhs == 0`` (holds trivially) and
    ``inf`` otherwise (violated); see ``degenerate`` and ``violated``.
    """

    lhs: float
    rhs: float
    ratio: float

    @property
    def degenerate(self):
        return self.rhs == 0.0

    @property
    def violated(self):
        return self.rhs == 0.0 and self.lhs > 0.0


def _ratio(lhs, rhs):
    if rhs > 0:
        return InequalityCheck(lhs, rhs, lhs / rhs)
    return InequalityCheck(lhs, rhs, 0.0 if lhs == 0 else math.inf)


def _hardy_pre(seq, r, t, N):
    _check_N(seq, N)
    if not (0 < t < r < math.inf):
        raise ValueError("need 0 < t < r < inf")


def _power_means(sigma, t):
    n = np.arange(1, sigma.size + 1, dtype=float)
    return (np.cumsum(sigma**t) / n) ** (1.0 / t)


def lh1_check(seq, r, s, alpha, t, N):
    """Sum-type Hardy inequality: power means of order ``t`` versus the sequence."""
    _hardy_pre(seq, r, t, N)
    if not (0 < s < math.inf):
        raise ValueError("need 0 < s < inf")
    sig = seq.values[:N]
    n = np.arange(1, N + 1, dtype=float)
    w = np.log2(n + 1) ** alpha * n ** (s / r - 1)
    lhs = float(np.sum(w * _power_means(sig, t) ** s))
    rhs = float(np.sum(w * sig**s))
    return _ratio(lhs, rhs)


def lh2_check(seq, r, alpha, t, N):
    """Sup-type Hardy inequality."""
    _hardy_pre(seq, r, t, N)
    sig = seq.values[:N]
    n = np.arange(1, N + 1, dtype=float)
    w = np.log2(n + 1) ** alpha * n ** (1.0 / r)
    lhs = float(np.max(w * _power_means(sig, t)))
    rhs = float(np.max(w * sig))
    return _ratio(lhs, rhs)


def lh2_weight_constant(r, alpha, t, N):
    """Smallest ``c`` with ``sum_{k<=n} (log2(k+1))^(-alpha t) k^(-t/r)``
    ``<= c (log2(n+1))^(-alpha t) n^(1-t/r)`` for every ``n <= N``.

    Returns ``(c, argmax_n)``. Finite growth in ``N`` is what makes the
    sup-type inequality hold with a uniform constant.
    """
    if not (0 < t < r < math.inf):
        raise ValueError("need 0 < t < r < inf")
    k = np.arange(1, N + 1, dtype=float)
    lg = np.log2(k + 1)
    partial = np.cumsum(lg ** (-alpha * t) * k ** (-t / r))
    ratio = partial / (lg ** (-alpha * t) * k ** (1 - t / r))
    i = int(np.argmax(ratio))
    return float(ratio[i]), i + 1


def lh2_constant(r, alpha, t, N):
    """Bound ``c`` with ``lh2 ratio <= c`` for every non-increasing sequence.

    ``sigma_k <= M w_k^-1`` forces the power mean at ``n`` below
    ``M (c_w (log2(n+1))^(-alpha t) n^(-t/r))^(1/t)``, so ``c = c_w^(1/t)``
    with ``c_w`` from ``lh2_weight_constant``.
    """
    c, _ = lh2_weight_constant(r, alpha, t, N)
    return c ** (1.0 / t)


def lh1_constant(r, s, alpha, t, N, iters=2000, tol=1e-12):
    """Bound ``c`` with ``lh1 ratio <= c`` for every non-increasing sequence of length ``>= N``.

    With ``u = s/t``, ``b = sigma^t`` and ``v_n = (log2(n+1))^alpha n^(s/r-1)``
    the ratio is ``sum v (P b)^u / sum v b^u`` for the averaging operator ``P``.
    For ``u > 1`` this is at most the ``u``-th power of the norm of ``P`` on
    ``l_u(v)``, found by nonlinear power iteration (the matrix is
    non-negative, so the iteration reaches the global maximum). For ``u <= 1``
    a non-increasing ``b`` satisfies
    ``(sum_{k<=n} b_k)^u <= sum_{k<=n} (k^u - (k-1)^u) b_k^u``,
    which is linear in ``sigma^s``; the sup over step sequences is then exact.
    """
    _hardy_pre(MonotoneSeq(np.ones(N)), r, t, N)
    if not (0 < s < math.inf):
        raise ValueError("need 0 < s < inf")
    u = s / t
    n = np.arange(1, N + 1, dtype=float)
    v = np.log2(n + 1) ** alpha * n ** (s / r - 1)
    if u <= 1:
        tail = np.cumsum((v * n**-u)[::-1])[::-1]
        a = (n**u - (n - 1) ** u) * tail
        return float(np.max(np.cumsum(a) / np.cumsum(v)))
    dl, dr = v ** (1 / u), v ** (-1 / u)

    def A(y):
        return dl * np.cumsum(dr * y) / n

    def At(z):
        return dr * np.cumsum((dl * z / n)[::-1])[::-1]

    y = n ** (-1.0 / s)
    y /= np.linalg.norm(y, u)
    val = 0.0
    for _ in range(iters):
        z = A(y)
        new = np.linalg.norm(z, u)
        w = At(z ** (u - 1)) ** (1 / (u - 1))
        y = w / np.linalg.norm(w, u)
        if abs(new - val) <= tol * new:
            val = new
            break
        val = new
    return float(val**u)
