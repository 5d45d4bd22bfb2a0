"""Discretized weakly singular and Riemann-Liouville integral operators.

Functions live on the uniform grid ``x_i = i/(n-1)``. ``apply`` uses product
integration: on each grid cell the input is replaced by a local Lagrange
interpolant and the kernel is integrated against it with a Gauss-Jacobi
rule whose weight carries the kernel's power singularity.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy import special

from .kernel import (Family, IntegrabilityError, KernelSpec, Mode, RegimeError,
                     kernel_q_integral)
from .metricspace import SizeCapError
from .rates import RateFormula
from .seqspace import MonotoneSeq

SV_GRID_CAP = 1024
N_GAUSS = 10


def thread_count():
    """Worker threads for assembly: ``ENTLAB_THREADS`` or the CPU count."""
    raw = os.environ.get("ENTLAB_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        v = int(raw)
    except ValueError:
        v = 0
    if v < 1:
        raise ValueError(f"ENTLAB_THREADS must be a positive integer, got {raw!r}")
    return v


@dataclass(frozen=True)
class RL:
    """Riemann-Liouville fractional integration of order ``alpha``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def kernel(self):
        return KernelSpec.riemann_liouville(self.alpha)


@lru_cache(maxsize=None)
def _legendre(n):
    x, w = special.roots_legendre(n)
    return (x + 1) / 2, w / 2


@lru_cache(maxsize=None)
def _jacobi_right(n, mu):
    """Nodes/weights on [0,1] for the weight ``(1-u)^mu``."""
    x, w = special.roots_jacobi(n, mu, 0.0)
    return (x + 1) / 2, w / 2 ** (1 + mu)


@lru_cache(maxsize=None)
def _jacobi_left(n, mu):
    """Nodes/weights on [0,1] for the weight ``u^mu``."""
    x, w = special.roots_jacobi(n, 0.0, mu)
    return (x + 1) / 2, w / 2 ** (1 + mu)


def _lagrange(nodes, x):
    """Values of the Lagrange basis of ``nodes`` at ``x``; shape (len(x), len(nodes))."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)[:, None]
    m = nodes.size
    out = np.ones((x.shape[0], m))
    for j in range(m):
        for i in range(m):
            if i != j:
                out[:, j] *= (x[:, 0] - nodes[i]) / (nodes[j] - nodes[i])
    return out


class DiscretizedOperator:
    """Matrix ``W`` with ``(T f)(x_j) ~ sum_i W[j, i] f(x_i)``.

    Parameters
    ----------
    spec : KernelSpec or RL
    grid_n : int
        Number of grid nodes on [0, 1].
    order : int
        Degree of the local interpolant (1 gives product trapezoid weights,
        which are non-negative; the default 4 reproduces quartic inputs
        exactly).
    """

    def __init__(self, spec, grid_n, order=4, matrix=None):
        self.spec = spec
        self.grid_n = int(grid_n)
        if self.grid_n < 2:
            raise ValueError("grid_n must be at least 2")
        self.order = int(order)
        if self.order < 1:
            raise ValueError("order must be >= 1")
        self.x = np.linspace(0.0, 1.0, self.grid_n)
        self.h = 1.0 / (self.grid_n - 1)
        self._cache = {}
        if matrix is not None:
            M = np.asarray(matrix, dtype=float)
            if M.shape != (self.grid_n, self.grid_n):
                raise ValueError("matrix shape does not match grid_n")
            self._cache[(0.0, True)] = M
            self.kernel = None
            self.volterra = bool(np.allclose(np.triu(M, 1), 0))
            return
        self.kernel = spec.kernel() if isinstance(spec, RL) else spec
        self.volterra = isinstance(spec, RL) or self.kernel.mode is Mode.VO
        mu = -self.kernel.tau
        if mu <= -1:
            raise IntegrabilityError("kernel is not integrable: leading power <= -1")
        self._mu = mu

    @classmethod
    def from_matrix(cls, matrix):
        M = np.asarray(matrix, dtype=float)
        return cls(None, M.shape[0], matrix=M)

    def matrix(self, left_exponent=0.0, causal=True):
        """Weights for inputs of the form ``x^left_exponent * smooth``.

        With a non-zero ``left_exponent`` the value at ``x = 0`` is not used
        and the smooth factor is interpolated from the nodes ``x_i > 0``.
        ``causal=False`` lets Volterra rows near ``x = 0`` borrow stencil
        nodes past ``x_j``; the matrix then loses its triangular shape but
        keeps full polynomial order in the first rows.
        """
        key = (float(left_exponent), bool(causal) or not self.volterra or self.kernel is None)
        if key not in self._cache:
            if self.kernel is None:
                raise ValueError("explicit matrices carry no kernel to re-weight")
            self._cache[key] = self._assemble(*key)
        return self._cache[key]

    # -- assembly
    def _remainder(self, u):
        """Kernel divided by its leading power ``u^mu``."""
        k = self.kernel
        if k.family is Family.POWER:
            return np.full_like(u, k.scale)
        with np.errstate(divide="ignore", invalid="ignore"):
            return k(u) / u ** self._mu

    def _stencils(self, cells, hi_max, lo_min):
        d = self.order
        if hi_max - lo_min < d:
            lo = np.full(cells.size, lo_min)
            return lo, hi_max - lo_min + 1
        lo = np.clip(cells - (d - 1) // 2, lo_min, hi_max - d)
        return lo, d + 1

    def _assemble(self, g, causal=True):
        n, h, x = self.grid_n, self.h, self.x
        W = np.zeros((n, n))
        lo_min = 1 if g != 0 else 0
        xl, wl = _legendre(N_GAUSS)
        mu = self._mu
        xr, wr = _jacobi_right(N_GAUSS, mu)
        xls, wls = _jacobi_left(N_GAUSS, mu)
        xg, wg = _jacobi_left(N_GAUSS, g) if g != 0 else (xl, wl)
        def row(j):
            t = x[j]
            hi_max = j if self.volterra and causal else n - 1
            ncell = j if self.volterra else n - 1
            if hi_max - lo_min < 0 or ncell == 0:
                return
            cells = np.arange(ncell)
            special_cells = {j - 1} if j >= 1 else set()
            if not self.volterra and j < n - 1:
                special_cells.add(j)
            if g != 0:
                special_cells.add(0)
            mask = np.ones(ncell, dtype=bool)
            mask[[i for i in special_cells if i < ncell]] = False
            plain = cells[mask]
            if plain.size:
                lo, size = self._stencils(plain, hi_max, lo_min)
                X = x[plain][:, None] + h * xl[None, :]
                kern = self.kernel(np.abs(t - X)) * wl
                if g != 0:
                    kern = kern * X**g
                off = plain - lo
                for o in np.unique(off):
                    sel = off == o
                    B = _lagrange(np.arange(size) - o, xl)
                    contrib = (kern[sel] @ B) * h
                    cols = lo[sel][:, None] + np.arange(size)[None, :]
                    if g != 0:
                        contrib = contrib / x[cols] ** g
                    np.add.at(W[j], cols, contrib)
            for i in sorted(special_cells):
                left0 = g != 0 and i == 0
                right_t = i == j - 1
                left_t = (not self.volterra) and i == j
                lo, size = self._stencils(np.array([i]), hi_max, lo_min)
                lo = int(lo[0])
                hi = lo + size - 1
                if left0 and (right_t or left_t):
                    self._add_split(W, j, i, t, hi_max, lo_min, g, right_t)
                    continue
                if left0:
                    pts, wts = xg, wg
                    kern = self.kernel(np.abs(t - h * pts)) * h**g
                elif right_t:
                    pts, wts = xr, wr
                    kern = self._remainder(h * (1 - xr)) * h**mu
                else:
                    pts, wts = xls, wls
                    kern = self._remainder(h * xls) * h**mu
                if g != 0 and not left0:
                    kern = kern * (x[i] + h * pts) ** g
                B = _lagrange(np.arange(lo, hi + 1) - i, pts)
                contrib = (wts * kern) @ B * h
                if g != 0:
                    contrib = contrib / x[lo : hi + 1] ** g
                W[j, lo : hi + 1] += contrib

        # rows are independent, so threads write disjoint slices of W
        workers = thread_count()
        if workers > 1 and n >= 256:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                list(ex.map(row, range(n)))
        else:
            for j in range(n):
                row(j)
        return W

    def _add_split(self, W, j, i, t, hi_max, lo_min, g, right_t):
        # cell [0, h] singular at both ends: halve it
        h, x, mu = self.h, self.x, self._mu
        lo, size = self._stencils(np.array([i]), hi_max, lo_min)
        lo = int(lo[0])
        hi = lo + size - 1
        nodes = np.arange(lo, hi + 1) - i
        # left half, weight x^g, kernel smooth
        xg, wg = _jacobi_left(N_GAUSS, g)
        pts = 0.5 * xg
        X = h * pts
        kern = self.kernel(np.abs(t - X))
        c1 = (wg * kern) @ _lagrange(nodes, pts) * (0.5 * h) ** (1 + g)
        # right half, kernel weight at the singular end, x^g smooth
        if right_t:
            xr, wr = _jacobi_right(N_GAUSS, mu)
            pts = 0.5 + 0.5 * xr
            u = 0.5 * h * (1 - xr)
        else:
            xr, wr = _jacobi_left(N_GAUSS, mu)
            pts = 0.5 + 0.5 * xr
            u = 0.5 * h * xr
        X = h * pts
        kern = self._remainder(u) * (0.5 * h) ** mu * X**g
        c2 = (wr * kern) @ _lagrange(nodes, pts) * 0.5 * h
        W[j, lo : hi + 1] += (c1 + c2) / x[lo : hi + 1] ** g

    def apply(self, f, left_exponent=0.0, causal=True):
        return apply(self, f, left_exponent, causal)


def apply(op, f, left_exponent=0.0, causal=True):
    """Grid samples of ``T f``; linear in ``f``."""
    f = np.asarray(f, dtype=float)
    if f.shape != (op.grid_n,):
        raise ValueError(f"expected {op.grid_n} samples, got shape {f.shape}")
    W = op.matrix(left_exponent, causal)
    if left_exponent != 0:
        f = f.copy()
        f[0] = 0.0
    return W @ f


# ---------------------------------------------------------------- Riemann-Liouville checks

def rl_monomial(gamma, k, x):
    """``R_gamma x^k = Gamma(k+1)/Gamma(k+1+gamma) x^(k+gamma)``."""
    return math.exp(special.gammaln(k + 1) - special.gammaln(k + 1 + gamma)) * np.asarray(x) ** (k + gamma)


def rl_polynomial(gamma, coeffs, x):
    return sum(c * rl_monomial(gamma, k, x) for k, c in enumerate(coeffs) if c != 0) + 0 * np.asarray(x)


def semigroup_check(alpha, beta, coeffs, grid_n, order=4):
    """``max_j |R_alpha(R_beta f)(x_j) - R_{alpha+beta} f(x_j)|`` for a polynomial ``f``.

    The inner image ``R_beta f`` behaves like ``x^beta`` times a polynomial,
    so the outer application uses weights adapted to that factor. Both
    applications use non-causal stencils so the first rows keep full order.
    """
    if not (0 < alpha <= 2 and 0 < beta <= 2):
        raise ValueError("alpha and beta must lie in (0, 2]")
    coeffs = list(coeffs)
    if len(coeffs) > 7:
        raise ValueError("polynomial degree is limited to 6")
    x = np.linspace(0.0, 1.0, int(grid_n))
    f = np.polynomial.polynomial.polyval(x, coeffs) if coeffs else np.zeros_like(x)
    inner = DiscretizedOperator(RL(beta), grid_n, order=order)
    outer = DiscretizedOperator(RL(alpha), grid_n, order=order)
    g = apply(inner, f, causal=False)
    gg = apply(outer, g, left_exponent=beta % 1.0, causal=False)
    ref = rl_polynomial(alpha + beta, coeffs, x)
    return float(np.max(np.abs(gg - ref)))


def _lp_norm(v, h, p):
    v = np.abs(np.asarray(v, dtype=float))
    if math.isinf(p):
        return float(v.max()) if v.size else 0.0
    if v.size < 2:
        return 0.0
    w = np.full(v.size, h)
    w[0] = w[-1] = h / 2
    return float(np.sum(w * v**p) ** (1 / p))


class ShiftCheck(NamedTuple):
    lhs: float
    rhs: float
    passed: bool


@lru_cache(maxsize=16)
def _shared_operator(spec, n, order):
    return DiscretizedOperator(spec, n, order=order)


def shift_modulus_check(spec, p, delta, f, order=1):
    """Smoothness of ``T_K f`` for Volterra kernels.

    ``lhs`` is the discrete ``L_p[0, 1-delta]`` norm of ``(T f)(.+delta) - (T f)``;
    ``rhs = 2 ||f||_p int_0^delta k``. ``delta`` must be a multiple of the
    grid step. The default ``order=1`` keeps the interpolant inside the
    sample range so the discrete norm of ``f`` dominates the continuous one.
    """
    if isinstance(spec, RL):
        spec = spec.kernel()
    if spec.mode is not Mode.VO:
        raise ValueError("shift modulus bound needs a Volterra (VO) kernel")
    if not (1 <= p <= math.inf):
        raise ValueError("p must lie in [1, inf]")
    if not (0 <= delta <= 1):
        raise ValueError("delta must lie in [0, 1]")
    f = np.asarray(f, dtype=float)
    n = f.size
    h = 1.0 / (n - 1)
    s = delta / h
    if abs(s - round(s)) > 1e-9:
        raise ValueError("delta must be a multiple of the grid step")
    s = int(round(s))
    if s == 0:
        return ShiftCheck(0.0, 0.0, True)
    if spec.family is Family.CUSTOM:
        op = DiscretizedOperator(spec, n, order=order)
    else:
        op = _shared_operator(spec, n, order)
    g = apply(op, f)
    diff = g[s:] - g[: n - s]
    lhs = _lp_norm(diff, h, p)
    rhs = 2 * _lp_norm(f, h, p) * kernel_q_integral(spec, 1.0, delta)
    return ShiftCheck(lhs, rhs, bool(lhs <= rhs * (1 + 1e-3)))


# ---------------------------------------------------------------- lower-bound nets

class NetKind(enum.Enum):
    RADEMACHER = "RADEMACHER"
    KERNEL_ATOMS = "KERNEL_ATOMS"
    MEANS = "MEANS"


class DegenerateNetError(ValueError):
    pass


@dataclass(frozen=True)
class NetLowerBound:
    """A ``separation``-separated family of ``2^log2_cardinality`` images of
    the unit ball, so ``eps_{ceil(2^log2_cardinality) - 1} >= separation / 2``."""

    net_kind: NetKind
    m_or_n: float
    separation: float
    log2_cardinality: float

    @property
    def bound(self):
        return self.separation / 2

    @property
    def entropy_index(self):
        """Index ``N`` with ``eps_N(T) >= bound``."""
        return math.ceil(2.0 ** self.log2_cardinality) - 1 if self.log2_cardinality < 1000 else math.inf

    @property
    def dyadic_index(self):
        """``n`` with ``e_n(T) >= bound`` (``e_n = eps_{2^(n-1)}``)."""
        return max(1, math.floor(self.log2_cardinality))


def _need_vo(spec):
    if spec.mode is not Mode.VO:
        raise ValueError("net constructions are stated for Volterra kernels")


def net_lower_rademacher(spec, n):
    """Sign patterns on ``n`` equal cells: separation ``2 int_0^{1/n} k``."""
    _need_vo(spec)
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    I = kernel_q_integral(spec, 1.0, 1.0 / n)
    return NetLowerBound(NetKind.RADEMACHER, n, 2 * I, float(n))


def _alpha_m(spec, p, m=None, log_m=None):
    pp = p / (p - 1)
    if log_m is None:
        log_m = math.log(m)
    r = math.exp(-log_m)
    if r == 0.0:
        raise ValueError("m too large for double precision; reduce it")
    return kernel_q_integral(spec, pp, r) ** (pp / p)


def net_lower_kernel_atoms(spec, p, m, log_m=None):
    """Normalized kernel translates ``k(j/m - x)^{p'/p}``: separation ``alpha_m^{p-1}``.

    ``m`` may be real; the bound formula only needs ``log m``.
    """
    _need_vo(spec)
    if not (2 <= p < math.inf):
        raise ValueError("p must lie in [2, inf)")
    lm = math.log(m) if log_m is None else float(log_m)
    if lm < math.log(2) - 1e-15:
        raise DegenerateNetError("kernel-atom nets need m >= 2")
    a = _alpha_m(spec, p, log_m=lm)
    return NetLowerBound(NetKind.KERNEL_ATOMS, m, a ** (p - 1), lm / math.log(2))


def net_lower_means(spec, p, m):
    """Normalized means over ``sqrt(m)``-subsets of kernel atoms."""
    _need_vo(spec)
    m = int(m)
    r = math.isqrt(m)
    if r * r != m or m < 4:
        raise ValueError("m must be a perfect square >= 4")
    if not (2 <= p < math.inf):
        raise ValueError("p must lie in [2, inf)")
    a = _alpha_m(spec, p, m)
    return NetLowerBound(NetKind.MEANS, m, m ** (-1 / (2 * p)) * a ** (p - 1), 0.5 * r * math.log2(m))


# ---------------------------------------------------------------- spectra

def singular_values(op):
    """Singular values of the ``L_2``-normalized discretization, non-increasing.

    With trapezoid weights ``c`` the matrix ``C^{1/2} W C^{-1/2}`` acts on
    coefficient vectors whose Euclidean norm approximates the ``L_2`` norm.
    """
    if op.grid_n > SV_GRID_CAP:
        raise SizeCapError(f"singular values are capped at grid {SV_GRID_CAP}")
    W = op.matrix()
    c = np.full(op.grid_n, op.h)
    c[0] = c[-1] = op.h / 2
    M = np.sqrt(c)[:, None] * W / np.sqrt(c)[None, :]
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"SVD failed: {exc}") from exc
    s = np.maximum(s, 0.0)
    return MonotoneSeq(np.minimum.accumulate(s))


# ---------------------------------------------------------------- bound evaluators

def rieli_bound(spec, q, n, c=1.0):
    """``c sqrt(q) n^{-1/2} (int_0^{1/n} k^2)^{1/2}``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    return c * math.sqrt(q) * n ** -0.5 * kernel_q_integral(spec, 2.0, 1.0 / n)


@dataclass(frozen=True)
class RL04I:
    rho: float
    gamma: float = 0.0
    p: float = 2.0


class _RL04II:
    def __repr__(self):
        return "RL04_II"


RL04II = _RL04II()


class BoundValue(NamedTuple):
    value: float
    truncated: bool


def rl04_bound(entropy_data, variant, n):
    """Right-hand sides of the weakly singular entropy/width estimates (constant 1).

    ``RL04I(rho, gamma, p)``: ``max_{k <= n^(1+1/(p rho))} k^rho (log2(k+1))^gamma eps_k``.
    ``RL04II``: ``1 + sum_{k<=n} k^{-1/2} e_k``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(variant, RL04I):
        if not variant.rho > 0 or not (2 <= variant.p < math.inf):
            raise ValueError("variant I needs rho > 0 and 2 <= p < inf")
        K = math.floor(n ** (1 + 1 / (variant.p * variant.rho)) + 1e-9)
        k = np.arange(1, K + 1)
        e, trunc = entropy_data.take(k)
        v = k**variant.rho * np.log2(k + 1.0) ** variant.gamma * e
        return BoundValue(float(np.max(v)), trunc)
    if variant is RL04II:
        k = np.arange(1, n + 1)
        e, trunc = entropy_data.take(k)
        return BoundValue(float(1 + np.sum(k**-0.5 * e)), trunc)
    raise ValueError("unknown variant")


from .oracle import Table, match_cases, rate_oracle  # noqa: E402,F401
