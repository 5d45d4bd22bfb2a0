"""Absolutely convex hulls of finite generator sets: nets, covering brackets
and the hull-entropy bound formulas.

Logarithms are base 2 throughout. Constants that the underlying estimates
leave unspecified (``c``, ``c_t``, ``tau_p``) default to 1 and results carry
``unnormalized=True`` to make that visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .metricspace import (CoverKind, Method, PointCloud, SizeCapError, _farthest_point,
                          entropy_numbers, exact_cover)
from .seqspace import INFINITY, MonotoneSeq, dyadic_subsequence

NET_CAP = 1_000_000
_TOL = 1e-9


def _pnorm(v, p):
    v = np.abs(np.asarray(v, dtype=float))
    if math.isinf(p):
        return float(v.max(initial=0.0))
    return float(np.sum(v**p) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class HullSpec:
    """Generators ``t_1..t_m`` in ``R^d`` (rows) and the ambient ``l_p`` norm."""

    generators: np.ndarray
    ambient_p: float = 2.0

    def __init__(self, generators, ambient_p=2.0):
        G = np.atleast_2d(np.asarray(generators, dtype=float))
        if G.size == 0 or G.shape[0] < 1:
            raise ValueError("need at least one generator")
        if not np.all(np.isfinite(G)):
            raise ValueError("generators must be finite")
        p = float(ambient_p)
        if not (p >= 1):
            raise ValueError("ambient_p must lie in [1, inf]")
        G.setflags(write=False)
        object.__setattr__(self, "generators", G)
        object.__setattr__(self, "ambient_p", p)

    @property
    def m(self):
        return self.generators.shape[0]

    @property
    def dim(self):
        return self.generators.shape[1]

    @property
    def norms(self):
        return np.array([_pnorm(t, self.ambient_p) for t in self.generators])

    @property
    def max_norm(self):
        return float(self.norms.max())

    def support(self, u):
        """``h(u) = max_i |<u, t_i>|``, the support function of ``aco(A)``."""
        u = np.asarray(u, dtype=float)
        return float(np.max(np.abs(self.generators @ u)))

    def cloud(self):
        return PointCloud(self.generators, norm_p=self.ambient_p)


# ---------------------------------------------------------------- nets

class HullNet(NamedTuple):
    cloud: PointCloud
    delta: float
    coeffs: np.ndarray
    steps: np.ndarray


def _coefficient_grid(steps, cap):
    order_cache = {}

    def ks(K):
        if K not in order_cache:
            out = [0]
            for k in range(1, K + 1):
                out += [k, -k]
            order_cache[K] = np.array(out, dtype=np.int64)
        return order_cache[K]

    coeffs = np.zeros((1, 0), dtype=np.int64)
    budget = np.ones(1)
    for s in steps:
        if not np.isfinite(s):
            coeffs = np.hstack([coeffs, np.zeros((coeffs.shape[0], 1), dtype=np.int64)])
            continue
        K = int(math.floor(1.0 / s + _TOL))
        blocks, budgets = [], []
        for k in ks(K):
            use = abs(k) * s
            sel = budget >= use - _TOL
            if not sel.any():
                continue
            blocks.append(np.hstack([coeffs[sel], np.full((int(sel.sum()), 1), k, dtype=np.int64)]))
            budgets.append(budget[sel] - use)
        coeffs = np.vstack(blocks)
        budget = np.concatenate(budgets)
        if coeffs.shape[0] > cap:
            raise SizeCapError(f"hull net exceeds {cap} points; use a coarser mesh")
    return coeffs


def hull_net(spec, mesh, scheme="uniform", cap=NET_CAP):
    """Deterministic net of ``aco(A)`` from signed coefficient grids.

    ``scheme="uniform"`` uses coefficients ``k * mesh`` for every generator.
    ``scheme="scaled"`` uses step ``mesh * max|t| / |t_i|`` for generator
    ``i``, so short generators get coarser coefficients. Both keep
    ``sum |coeff| <= 1`` and certify the Hausdorff bound
    ``delta = mesh * m * max|t_i|`` (truncate each coefficient toward 0).
    The zero combination is always the first net point.
    """
    if not mesh > 0:
        raise ValueError("mesh must be positive")
    norms = spec.norms
    if scheme == "uniform":
        steps = np.full(spec.m, float(mesh))
    elif scheme == "scaled":
        with np.errstate(divide="ignore"):
            # ratio first: mesh * max|t| underflows for subnormal generators
            steps = np.where(norms > 0, mesh * (spec.max_norm / np.where(norms > 0, norms, 1.0)), np.inf)
    else:
        raise ValueError("scheme must be 'uniform' or 'scaled'")
    coeffs = _coefficient_grid(steps, cap)
    lam = coeffs * np.where(np.isfinite(steps), steps, 0.0)
    pts = lam @ spec.generators
    delta = float(mesh) * spec.m * spec.max_norm
    return HullNet(PointCloud(pts, norm_p=spec.ambient_p, check=False), delta, coeffs, steps)


# ---------------------------------------------------------------- entropy brackets

class HullBounds(NamedTuple):
    n: int
    lower: float
    upper: float
    delta: float
    mesh: float

    def as_row(self):
        return (self.n, self.lower, self.upper, self.delta, self.mesh)


class HullProfile(NamedTuple):
    """Brackets for ``eps_1..eps_{n_max}`` of ``aco(A)`` plus the raw net radii."""

    lower: np.ndarray
    upper: np.ndarray
    net_radii: np.ndarray
    delta: float
    mesh: float
    net_size: int


def hull_entropy_profile(spec, n_max, mesh, scheme="uniform", cap=NET_CAP):
    """Brackets for every ``n <= n_max`` from one farthest-point run on the net.

    With ``r_n`` the covering radius of the first ``n`` farthest-point
    centers, the net is covered by ``n`` balls of radius ``r_n`` and contains
    ``n+1`` points at mutual distance ``>= r_n``. Hence, for centers anywhere
    in the ambient space, ``r_n / 2 - delta <= eps_n(aco A) <= r_n + delta``.
    The points ``0, +-t_i`` lie in ``aco(A)`` itself, so their farthest-point
    radii give a second lower bound without the ``delta`` loss, and the ball
    of radius ``max |t_i|`` about 0 caps the upper bound.
    """
    net = hull_net(spec, mesh, scheme, cap)
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n must be positive")
    r = _radii(net.cloud, n_max)
    half = r / 2
    if net.cloud.size <= 25:
        ex = entropy_numbers(net.cloud, n_max, Method.EXACT).values
        half = np.maximum(half, ex / 2)
    G = spec.generators
    verts = PointCloud(np.vstack([np.zeros((1, spec.dim)), G, -G]), norm_p=spec.ambient_p, check=False)
    lower = np.maximum(np.maximum(half - net.delta, _radii(verts, n_max) / 2), 0.0)
    upper = np.minimum(r + net.delta, spec.max_norm)
    return HullProfile(lower, upper, r, net.delta, float(mesh), net.cloud.size)


def _radii(cloud, n_max):
    _, radii = _farthest_point(cloud, k_max=n_max)
    r = np.zeros(n_max)
    r[: len(radii)] = radii[:n_max]
    return np.minimum.accumulate(r)


def hull_entropy_bounds(spec, n, mesh, scheme="uniform", cap=NET_CAP):
    prof = hull_entropy_profile(spec, n, mesh, scheme, cap)
    return HullBounds(int(n), float(prof.lower[-1]), float(prof.upper[-1]), prof.delta, float(mesh))


# ---------------------------------------------------------------- diagonal sets

def diag_set(sigma, p, dim):
    """Generators ``sigma_k u_k`` for ``k <= dim`` in ``l_p^dim``."""
    dim = int(dim)
    if dim < 1 or dim > len(sigma):
        raise ValueError("need 1 <= dim <= len(sigma)")
    return HullSpec(np.diag(np.asarray(sigma.values[:dim], dtype=float)), p)


def optimality_sequence(N, r, gamma):
    """``sigma_n = (log2(n+1))^(-1/r) (log2 log2(n+3))^(-gamma)`` for ``n <= N``."""
    n = np.arange(1, int(N) + 1, dtype=float)
    return MonotoneSeq(np.log2(n + 1) ** (-1.0 / r) * np.log2(np.log2(n + 3)) ** (-gamma))


class BoundValue(NamedTuple):
    value: float
    truncated: bool


def _pprime(p):
    return math.inf if p == 1 else p / (p - 1)


def l02_lower(sigma, p, n, c=1.0):
    """``c max{ n^(-1/p') (log2(n+1))^(1/p') sigma_{n^2}, sigma_{2^n} }``."""
    if len(sigma) == 0:
        raise ValueError("empty sigma")
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    ip = 1.0 / _pprime(p)
    a, t1 = sigma.at(n * n)
    if n < 1024:
        b, t2 = sigma.at(2**n)
    else:
        b, t2 = float(sigma.values[-1]), True
    v = c * max(n**-ip * math.log2(n + 1) ** ip * a, b)
    return BoundValue(v, t1 or t2)


def schuett_gg_lower(n, m, p, c=1.0):
    """``c (log2(m/n) / n)^(1/p')``: entropy of ``id: l_1^k -> l_p^k``."""
    n, m = int(n), int(m)
    if not (m > n >= 1):
        raise ValueError("need m > n >= 1")
    if not (1 < p <= 2):
        raise ValueError("p must lie in (1, 2]")
    return c * (math.log2(m / n) / n) ** (1.0 / _pprime(p))


# ---------------------------------------------------------------- Steinwart upper bound

@dataclass(frozen=True)
class SteinwartParams:
    """Type ``p`` in (1,2], exponent ``t > 0``, constants and the alpha list.

    Give either integer ``alphas`` or ``log2_alphas`` (for values too large
    to write down); both must be strictly increasing.
    """

    p: float
    t: float
    c_t: float = 1.0
    tau_p: float = 1.0
    alphas: Optional[Sequence[int]] = None
    log2_alphas: Optional[Sequence[float]] = None

    def __post_init__(self):
        if not (1 < self.p <= 2):
            raise ValueError("p must lie in (1, 2]")
        if not (self.t > 0 and self.c_t > 0 and self.tau_p > 0):
            raise ValueError("t, c_t and tau_p must be positive")
        if (self.alphas is None) == (self.log2_alphas is None):
            raise ValueError("give exactly one of alphas and log2_alphas")
        if self.alphas is not None:
            a = [int(x) for x in self.alphas]
            if any(int(x) != x for x in self.alphas) or any(x < 1 for x in a):
                raise ValueError("alphas must be positive integers")
            if any(b <= a_ for a_, b in zip(a, a[1:])):
                raise ValueError("alphas must be strictly increasing")
            object.__setattr__(self, "alphas", tuple(a))
        else:
            la = [float(x) for x in self.log2_alphas]
            if any(not math.isfinite(x) or x < 0 for x in la):
                raise ValueError("log2_alphas must be finite and >= 0")
            if any(b <= a_ for a_, b in zip(la, la[1:])):
                raise ValueError("log2_alphas must be strictly increasing")
            object.__setattr__(self, "log2_alphas", tuple(la))

    @property
    def n(self):
        return len(self.alphas if self.alphas is not None else self.log2_alphas)

    def log2_alpha(self, k):
        """``log2 alpha_k`` (1-based)."""
        if self.alphas is not None:
            return math.log2(self.alphas[k - 1])
        return self.log2_alphas[k - 1]


def alpha_schedule(n, a):
    """``log2 alpha_k = n 2^(a(k-1))`` for ``k = 1..n``."""
    return tuple(n * 2.0 ** (a * (k - 1)) for k in range(1, n + 1))


def _log2_sum_exp2(x, y):
    hi, lo = max(x, y), min(x, y)
    return hi + math.log1p(2.0 ** (lo - hi)) / math.log(2)


def steinwart_m(params, n=None, exact=False):
    """``m = floor(2^(n+2) sum_{k=2}^n 2^-k log2(2^(k+2) alpha_k / 2^n + 3)) + 2``.

    ``exact=True`` (integer alphas only) evaluates each log term from the
    exact integer ``2^(k+2) alpha_k + 3 * 2^n``.
    """
    n = params.n if n is None else int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    if params.n != n:
        raise ValueError(f"alpha list has length {params.n}, expected {n}")
    S = 0.0
    for k in range(2, n + 1):
        if exact:
            if params.alphas is None:
                raise ValueError("exact evaluation needs integer alphas")
            term = math.log2((params.alphas[k - 1] << (k + 2)) + 3 * (1 << n)) - n
        else:
            term = _log2_sum_exp2(k + 2 + params.log2_alpha(k) - n, math.log2(3.0))
        S += 2.0 ** (n + 2 - k) * term
    return int(math.floor(S)) + 2


class SteinwartBound(NamedTuple):
    m: int
    bound: float
    first_term: float
    second_term: float
    truncated: bool
    unnormalized: bool


def _sup_weighted(eps, t, log2_K):
    """``max_{i <= K} i^(1/t) eps_i`` with last-value extension past the data."""
    L = eps.size
    K_int = int(min(math.floor(2.0**log2_K + 1e-9), L)) if log2_K < 1000 else L
    i = np.arange(1, K_int + 1, dtype=float)
    best = float(np.max(i ** (1.0 / t) * eps[:K_int])) if K_int >= 1 else 0.0
    truncated = log2_K > math.log2(L) + 1e-12
    if truncated and eps[-1] > 0:
        best = max(best, 2.0 ** (log2_K / t) * float(eps[-1]))
    return best, truncated


def steinwart_upper(entropy_data, params, n=None, exact=False):
    """Two-term upper bound for ``e_{2m}(aco A)`` from entropy numbers of ``A``.

    ``c_t m^(-1/t-1/p') sup_{i <= min(m^(1+t/p'), alpha_1)} i^(1/t) eps_i``
    ``+ 23 tau_p 2^(-n/p') (sum_k (2^(k/p') sum_{i=k}^n eps_{alpha_i})^p)^(1/p)``.
    Indices past the data use its last value and set ``truncated``.
    """
    n = params.n if n is None else int(n)
    m = steinwart_m(params, n, exact=exact)
    eps = entropy_data.values
    p, t = params.p, params.t
    ip = 1.0 / _pprime(p)
    log2_K = min((1 + t * ip) * math.log2(m), params.log2_alpha(1))
    sup, trunc = _sup_weighted(eps, t, log2_K)
    if sup > 0:
        # m^(-1/t-1/p') in log space, since the sup may carry m^(1/t+1/p')
        first = params.c_t * 2.0 ** (math.log2(sup) - (1.0 / t + ip) * math.log2(m))
    else:
        first = 0.0
    ea = []
    for k in range(1, n + 1):
        la = params.log2_alpha(k)
        if la < 62:
            idx = params.alphas[k - 1] if params.alphas is not None else int(math.floor(2.0**la + 1e-9))
            v, tr = entropy_data.at(max(idx, 1))
        else:
            v, tr = float(eps[-1]), True
        trunc = trunc or tr
        ea.append(v)
    ea = np.array(ea)
    tails = np.cumsum(ea[::-1])[::-1]  # sum_{i=k}^n eps_{alpha_i}
    k = np.arange(1, n + 1, dtype=float)
    inner = np.sum((2.0 ** (k * ip) * tails) ** p) ** (1.0 / p)
    second = 23.0 * params.tau_p * 2.0 ** (-n * ip) * float(inner)
    return SteinwartBound(m, first + second, first, second, trunc,
                          params.c_t == 1.0 and params.tau_p == 1.0)


# ---------------------------------------------------------------- parameter maps

def tt02_params(p, r, s):
    """``(p', alpha)`` with ``alpha = 1/s + 1/p' - 1/r``; ``s = INFINITY`` drops ``1/s``."""
    if not (1 < p <= 2):
        raise ValueError("p must lie in (1, 2]")
    pp = _pprime(p)
    if not (0 < r < pp):
        raise ValueError(f"need 0 < r < p' = {pp:g}; for r > p' the TT03 regime applies")
    if s is INFINITY or (isinstance(s, float) and math.isinf(s)):
        return pp, 1.0 / pp - 1.0 / r
    if not (0 < s < math.inf):
        raise ValueError("s must be positive")
    return pp, 1.0 / s + 1.0 / pp - 1.0 / r


# ---------------------------------------------------------------- finite inequalities

@dataclass(frozen=True)
class TT03:
    r: float
    s: object
    alpha: float = 0.0


@dataclass(frozen=True)
class TH03:
    r: float


@dataclass(frozen=True)
class ENHIL:
    case: str
    r: float
    beta: float = 0.0


def _check_len(seq, N):
    if len(seq) < N:
        raise ValueError(f"sequence shorter than N={N}")


def _enhil_weights(w, k, lg, llg):
    case, r, b = w.case, w.r, w.beta
    if case == "i":
        if not 0 < r < 2:
            raise ValueError("ENHIL case i needs 0 < r < 2")
        return llg**b * lg ** (1 / r - 0.5) * k**0.5, lg**b * k ** (1 / r)
    if case == "ii":
        if r != 2:
            raise ValueError("ENHIL case ii needs r = 2")
        if b < 1:
            return lg ** (b - 1) * k**0.5, lg**b * k**0.5
        if b == 1:
            return llg**-1.0 * k**0.5, lg * k**0.5
        return llg ** (b - 1) * k**0.5, lg**b * k**0.5
    if case == "iii":
        if not 2 < r < math.inf:
            raise ValueError("ENHIL case iii needs 2 < r < inf")
        return lg**b * k ** (1 / r), lg**b * k ** (1 / r)
    raise ValueError("ENHIL case must be 'i', 'ii' or 'iii'")


def finite_inequality_check(lhs, rhs, weights, N, c_A=1.0):
    """Ratio of the weighted left side (from ``lhs``) to the weighted right side.

    TT03(r, s, alpha): sums of ``(log2(n+1))^-alpha n^(s/r-1) x_n^s`` (sup of
    ``(log2(n+1))^-alpha n^(1/r) x_n`` for ``s = INFINITY``); the right side
    carries ``c_A^s`` (``c_A``).
    TH03(r): ``sup k^(1/r) x_k``, right side times ``c_A``.
    ENHIL(case, r, beta): the Hilbert-space weights; the right side is
    ``1 + sup ...`` and ``c_A`` is not used.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be positive")
    _check_len(lhs, N)
    _check_len(rhs, N)
    x = lhs.values[:N]
    y = rhs.values[:N]
    n = np.arange(1, N + 1, dtype=float)
    lg = np.log2(n + 1)
    if isinstance(weights, TT03):
        r, s, a = weights.r, weights.s, weights.alpha
        if not 0 < r < math.inf:
            raise ValueError("TT03 needs 0 < r < inf")
        if s is INFINITY or (isinstance(s, float) and math.isinf(s)):
            w = lg ** (-a) * n ** (1 / r)
            L, R = float(np.max(w * x)), c_A * float(np.max(w * y))
        else:
            if not s > 0:
                raise ValueError("TT03 needs s > 0")
            w = lg ** (-a) * n ** (s / r - 1)
            L, R = float(np.sum(w * x**s)), c_A**s * float(np.sum(w * y**s))
    elif isinstance(weights, TH03):
        w = n ** (1 / weights.r)
        L, R = float(np.max(w * x)), c_A * float(np.max(w * y))
    elif isinstance(weights, ENHIL):
        wl, wr = _enhil_weights(weights, n, lg, np.log2(np.log2(n + 3)))
        L, R = float(np.max(wl * x)), 1.0 + float(np.max(wr * y))
    else:
        raise ValueError("unknown weights preset")
    if R == 0:
        return 0.0 if L == 0 else math.inf
    return L / R


def c_A_ratio(spec):
    """``sup |t_i| / eps_1(A)`` with in-set centers; ``inf`` when ``eps_1 = 0``.

    The in-set ``eps_1`` is the smallest eccentricity ``min_i max_j d(t_i, t_j)``.
    """
    cloud = spec.cloud()
    e1 = min(float(cloud.dist_from(i).max()) for i in range(cloud.size))
    if e1 == 0:
        return math.inf
    return spec.max_norm / e1
