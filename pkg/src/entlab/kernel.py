"""Singular kernel functions, their q-integrals and the induced pseudo-metric on [0, 1].

Logarithms here are natural. For a kernel ``k`` with a singularity at 0 and
mode WS (``K(t,x) = k(|t-x|)``) or VO (``K(t,x) = k(t-x)`` for ``x < t``,
else 0), the pseudo-metric is

    d(s,t) = ( int_0^1 |K(s,x) - K(t,x)|^q dx )^(1/q),

and it is compared with ``I_q(r) = (int_0^r k^q)^(1/q)`` at ``r = |s-t|``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate

from .metricspace import PointCloud, SizeCapError
from .rates import RateFormula

QUAD_RTOL = 1e-10
SAMPLED_GRID_CAP = 512


class Family(enum.Enum):
    POWER = "POWER"
    LOGPOWER = "LOGPOWER"
    DOUBLELOG = "DOUBLELOG"
    CUSTOM = "CUSTOM"


class Mode(enum.Enum):
    WS = "WS"
    VO = "VO"


class RegimeError(ValueError):
    """Parameters fall outside every case of a rate table."""


class IntegrabilityError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """Kernel ``k`` on (0, 1] plus the WS/VO mode.

    POWER      k(x) = x^-tau
    LOGPOWER   k(x) = x^-tau (c0 - ln x)^-beta
    DOUBLELOG  k(x) = x^-tau (c0 - ln x)^-beta (c0 + ln(c0 - ln x))^-gamma
    CUSTOM     k given as a callable; ``tau`` and ``sv_log``/``sv_loglog``
               optionally describe ``k(x) = x^-tau l(1/x)`` with
               ``l(y) ~ (log y)^sv_log (log log y)^sv_loglog``.

    Every family is multiplied by ``scale``.
    """

    family: Family
    tau: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    c0: float = 1.0
    mode: Mode = Mode.VO
    scale: float = 1.0
    k: Optional[Callable] = field(default=None, compare=False)
    sv_log: float = 0.0
    sv_loglog: float = 0.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.family is Family.CUSTOM and self.k is None:
            raise ValueError("CUSTOM kernels need a callable k")
        if self.family in (Family.LOGPOWER, Family.DOUBLELOG) and not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if self.family is Family.DOUBLELOG and self.c0 + math.log(self.c0) <= 0:
            raise ValueError("c0 + ln(c0) must be positive for the double-log factor")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.family is not Family.CUSTOM and not self._decreasing_at_one():
            hint = "tau <= 0" if self.family is Family.POWER else (
                f"c0={self.c0}; choose c0 larger (c0 > beta/tau suffices for LOGPOWER)")
            warnings.warn(f"{self.family.value} kernel is not decreasing on all of (0,1]: {hint}",
                          stacklevel=3)

    # convenience constructors
    @classmethod
    def power(cls, tau, mode=Mode.VO, scale=1.0):
        return cls(Family.POWER, tau=tau, mode=mode, scale=scale)

    @classmethod
    def logpower(cls, tau, beta, c0=1.0, mode=Mode.VO):
        return cls(Family.LOGPOWER, tau=tau, beta=beta, c0=c0, mode=mode)

    @classmethod
    def doublelog(cls, tau, beta, gamma, c0=1.0, mode=Mode.VO):
        return cls(Family.DOUBLELOG, tau=tau, beta=beta, gamma=gamma, c0=c0, mode=mode)

    @classmethod
    def riemann_liouville(cls, alpha, mode=Mode.VO):
        """``x^(alpha-1) / Gamma(alpha)``; not singular (nor decreasing) once ``alpha >= 1``."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return cls(Family.POWER, tau=1.0 - alpha, mode=mode, scale=1.0 / math.gamma(alpha),
                       name=f"RL({alpha:g})")

    @classmethod
    def custom(cls, k, mode=Mode.VO, tau=0.0, sv_log=0.0, sv_loglog=0.0, name="custom"):
        return cls(Family.CUSTOM, tau=tau, k=k, mode=mode, sv_log=sv_log, sv_loglog=sv_loglog, name=name)

    def with_mode(self, mode):
        d = dict(self.__dict__)
        d["mode"] = Mode(mode)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return KernelSpec(**d)

    def _decreasing_at_one(self):
        # d/dx log k = (1/x) (-tau + beta/L + gamma/(L (c0 + ln L))) with L = c0 - ln x >= c0;
        # the bracket is largest at x = 1 when beta, gamma >= 0
        if self.family is Family.POWER:
            return self.tau > 0
        L = np.array([self.c0, self.c0 + 1.0, self.c0 + 10.0, self.c0 + 1e3])
        br = -self.tau + self.beta / L
        if self.family is Family.DOUBLELOG:
            br = br + self.gamma / (L * (self.c0 + np.log(L)))
        return bool(np.all(br < 0))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.family is Family.POWER:
                v = x ** (-self.tau)
            elif self.family is Family.LOGPOWER:
                v = x ** (-self.tau) * (self.c0 - np.log(x)) ** (-self.beta)
            elif self.family is Family.DOUBLELOG:
                L = self.c0 - np.log(x)
                v = x ** (-self.tau) * L ** (-self.beta) * (self.c0 + np.log(L)) ** (-self.gamma)
            else:
                v = np.asarray(self.k(x), dtype=float)
        v = self.scale * v
        return float(v) if np.ndim(v) == 0 else v

    def log_k(self, lnx):
        """``ln k(x)`` from ``ln x``; stays finite where ``x`` itself would underflow."""
        ls = math.log(self.scale)
        fam = self.family
        if fam is Family.POWER:
            return ls - self.tau * lnx
        if fam is Family.CUSTOM:
            x = math.exp(lnx) if lnx > -745.0 else 5e-324
            v = float(self.k(x))
            return ls + math.log(v) if v > 0 else -math.inf
        L = self.c0 - lnx
        out = ls - self.tau * lnx - self.beta * math.log(L)
        if fam is Family.DOUBLELOG:
            out -= self.gamma * math.log(self.c0 + math.log(L))
        return out

    def log_rem(self, lnx):
        """``ln(k(x) x^tau)``: the log of the factor left after the leading power."""
        if self.family is Family.CUSTOM:
            return self.log_k(lnx) + self.tau * lnx
        out = math.log(self.scale)
        if self.family is Family.POWER:
            return out
        ell = math.log(self.c0 - lnx)
        out -= self.beta * ell
        if self.family is Family.DOUBLELOG:
            out -= self.gamma * math.log(self.c0 + ell)
        return out

    def K(self, t, x):
        """Two-variable kernel; zero where undefined (VO above the diagonal)."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        u = t - x
        if self.mode is Mode.WS:
            u = np.abs(u)
            out = np.where(u > 0, self(np.where(u > 0, u, 1.0)), np.inf)
        else:
            out = np.where(u > 0, self(np.where(u > 0, u, 1.0)), 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def spot_check(self, n=60):
        """Positivity, strict decrease and blow-up at 0 on a log grid."""
        x = np.logspace(-12, 0, n)
        v = self(x)
        return bool(np.all(v > 0) and np.all(np.diff(v) < 0) and v[0] > 10 * v[-1])


# ---------------------------------------------------------------- integrals

W_MAX = 700.0


def _int_w(logg):
    """``int_0^inf exp(logg(w)) dw`` in three panels; the last in ``z = ln(w/40)``
    so that ``1/w^c`` tails decay exponentially."""

    def g(w):
        val = logg(w)
        return math.exp(val) if val > -745.0 else 0.0

    def g_tail(z):
        w = 40.0 * math.exp(z)
        val = logg(w) + math.log(w)
        return math.exp(val) if val > -745.0 else 0.0

    total = 0.0
    for f, a, b in ((g, 0.0, 4.0), (g, 4.0, 40.0), (g_tail, 0.0, 700.0)):
        val, _ = integrate.quad(f, a, b, epsabs=1e-3 * QUAD_RTOL * total, epsrel=QUAD_RTOL, limit=1000)
        total += val
    return total


def _kernel_logg(spec, q, lnL):
    """Log-integrand of ``int_0^L k^q`` in ``w``, where ``u = L exp(-(e^w - 1))``.

    Critical kernels decay like ``1/(v log^c v)`` in ``v = e^w - 1``, which
    becomes ``1/w^c`` in ``w``. For the built-in families ``ln(c0 - ln u)``
    is evaluated from ``w`` directly, so the tail is available past the
    range where ``u`` or ``v`` are representable.
    """
    lead = 1.0 - q * spec.tau
    if spec.family is Family.CUSTOM:

        def logg(w):
            if w > W_MAX:
                return -math.inf
            lu = lnL - math.expm1(w)
            return lead * lu + q * spec.log_rem(lu) + w

        return logg
    X = spec.c0 - lnL
    ls = math.log(spec.scale)
    qb = q * spec.beta if spec.family is not Family.POWER else 0.0
    qg = q * spec.gamma if spec.family is Family.DOUBLELOG else 0.0

    def logg(w):
        # ell = ln(c0 - ln u) = w + dl; the w terms are collected first
        # so that 1 - q*beta = 0 cancels exactly
        if w > 30.0:
            dl = math.log1p((X - 1.0) * math.exp(-w))
        else:
            dl = math.log(X + math.expm1(w)) - w
        if lead == 0.0:
            head = 0.0
        elif w > W_MAX:
            return -math.inf
        else:
            head = lead * (lnL - math.expm1(w))
        out = head + q * ls + (1.0 - qb) * w - qb * dl
        if qg:
            out -= qg * math.log(spec.c0 + w + dl)
        return out

    return logg


def _log_abs_1m_exp(a):
    """``ln |1 - e^a|``."""
    if a == 0:
        return -math.inf
    if a < 0:
        return math.log(-math.expm1(a))
    return math.log(math.expm1(a))


def kernel_q_integral(spec, q, r, method="auto"):
    """``(int_0^r k(u)^q du)^(1/q)``.

    POWER, LOGPOWER with ``tau = 1/q`` and DOUBLELOG with ``tau = beta = 1/q``
    use closed forms; the rest use quadrature after the substitution
    ``u = r e^-v``. ``method="quad"``
    forces quadrature.
    """
    q = float(q)
    r = float(r)
    if q < 1:
        raise ValueError("q must be >= 1")
    if not (0 <= r <= 1):
        raise ValueError("r must lie in [0, 1]")
    if r == 0:
        return 0.0
    fam, tau = spec.family, spec.tau
    if fam in (Family.POWER, Family.LOGPOWER, Family.DOUBLELOG, Family.CUSTOM) and q * tau > 1:
        raise IntegrabilityError(f"k^q is not integrable at 0: q*tau = {q * tau:g} > 1")
    if fam is Family.POWER and q * tau >= 1:
        raise IntegrabilityError("POWER needs q*tau < 1")
    critical = math.isclose(q * tau, 1.0, rel_tol=0, abs_tol=1e-13)
    if critical and fam is Family.LOGPOWER and not spec.beta * q > 1:
        raise IntegrabilityError("LOGPOWER with tau = 1/q needs beta*q > 1")
    if critical and fam is Family.DOUBLELOG and not (
        spec.beta * q > 1 or (math.isclose(spec.beta * q, 1.0) and spec.gamma * q > 1)
    ):
        raise IntegrabilityError("DOUBLELOG with tau = 1/q needs beta*q > 1, or beta = 1/q and gamma*q > 1")
    if method == "auto":
        if fam is Family.POWER:
            return spec.scale * (1 - q * tau) ** (-1 / q) * r ** (1 / q - tau)
        if fam is Family.LOGPOWER and critical:
            b = spec.beta
            return spec.scale * (b * q - 1) ** (-1 / q) * (spec.c0 - math.log(r)) ** (1 / q - b)
        if fam is Family.DOUBLELOG and critical and math.isclose(spec.beta * q, 1.0, rel_tol=0, abs_tol=1e-13):
            gq = spec.gamma * q
            w = spec.c0 + math.log(spec.c0 - math.log(r))
            return spec.scale * ((gq - 1) ** -1 * w ** (1 - gq)) ** (1 / q)
    val = _int_w(_kernel_logg(spec, q, math.log(r)))
    return val ** (1 / q)


def kernel_l1(spec, r):
    """``int_0^r k``."""
    return kernel_q_integral(spec, 1.0, r)


# ---------------------------------------------------------------- pseudo-metric

def _diff_integral(spec, q, L, d, sign):
    """``int_0^L |k(u) - k(d + sign*u)|^q du`` with the singularity of ``k`` at ``u = 0``."""
    if L <= 0.0:
        # a subnormal gap can halve to zero
        return 0.0
    lnd = math.log(d)
    lnL = math.log(L)
    lead = 1.0 - q * spec.tau
    far = _kernel_logg(spec, q, lnL)

    def logg(w):
        # far out k(d + sign*u) is negligible against k(u)
        if w > 40.0:
            return far(w)
        lu = lnL - math.expm1(w)
        rem = spec.log_rem(lu)
        a = rem - spec.tau * lu
        if sign > 0:
            hi, lo = (lnd, lu) if lnd >= lu else (lu, lnd)
            lw = hi + math.log1p(math.exp(lo - hi))
        else:
            lw = lnd + math.log1p(-math.exp(lu - lnd))
        b = spec.log_k(lw)
        return lead * lu + q * (rem + _log_abs_1m_exp(b - a)) + w

    return _int_w(logg)


def _check_unit(*vals):
    for v in vals:
        if not (0.0 <= v <= 1.0):
            raise ValueError("arguments must lie in [0, 1]")


def pseudo_metric(spec, q, s, t):
    """``d(s,t)`` by quadrature on the panels cut at ``min(s,t)`` and ``max(s,t)``.

    Each panel is written in the distance ``u`` to its singular end so the
    quadrature sees the singularity at ``u = 0``.
    """
    _check_unit(s, t)
    q = float(q)
    if s == t:
        return 0.0
    s, t = (s, t) if s < t else (t, s)
    d = t - s
    # x in [0, s], u = s - x: the sections are k(u) and k(d + u) in both modes
    total = _diff_integral(spec, q, s, d, +1) if s > 0 else 0.0
    if spec.mode is Mode.VO:
        total += kernel_q_integral(spec, q, d) ** q
    else:
        # [s, t] is symmetric about its midpoint; [t, 1] mirrors [0, s]
        total += 2.0 * _diff_integral(spec, q, 0.5 * d, d, -1)
        if t < 1:
            total += _diff_integral(spec, q, 1.0 - t, d, +1)
    return total ** (1 / q)


class Sandwich(NamedTuple):
    base: float
    d: float
    passed: bool


def sandwich_check(spec, q, s, t, tol=1e-4):
    """Compare ``d(s,t)`` with ``I_q(|s-t|)``.

    VO: ``I <= d <= 2^(1/q) I``. WS: ``d <= 4^(1/q) I``.
    """
    base = kernel_q_integral(spec, q, abs(s - t))
    d = pseudo_metric(spec, q, s, t)
    if spec.mode is Mode.VO:
        ok = base * (1 - tol) <= d <= 2 ** (1 / q) * base * (1 + tol)
    else:
        ok = d <= 4 ** (1 / q) * base * (1 + tol)
    return Sandwich(base, d, bool(ok))


# ---------------------------------------------------------------- rates of ([0,1], d)

def _near(a, b):
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def interval_rate_under_d(spec, q):
    """Decay of ``eps_n([0,1], d)`` as a ``RateFormula`` (decay-positive signs).

    POWER tau < 1/q: n^(tau-1/q).  LOGPOWER tau = 1/q, beta > 1/q:
    (log n)^(1/q-beta); LOGPOWER tau < 1/q: n^(tau-1/q) (log n)^-beta.
    DOUBLELOG follows the three-regime table. CUSTOM with a declared
    slowly varying factor gives n^(tau-1/q) l(2n).
    """
    q = float(q)
    iq = 1.0 / q
    tau, b, g = spec.tau, spec.beta, spec.gamma
    fam = spec.family
    if fam is Family.POWER:
        if 0 < tau < iq:
            return RateFormula(1.0, iq - tau, 0.0, 0.0, label="POWER")
        raise RegimeError("POWER needs 0 < tau < 1/q")
    if fam is Family.LOGPOWER:
        if 0 < tau < iq and not _near(tau, iq):
            return RateFormula(1.0, iq - tau, b, 0.0, label="LOGPOWER sub-critical")
        if _near(tau, iq) and b > iq:
            return RateFormula(1.0, 0.0, b - iq, 0.0, label="LOGPOWER critical")
        raise RegimeError("LOGPOWER needs 0 < tau < 1/q, or tau = 1/q with beta > 1/q")
    if fam is Family.DOUBLELOG:
        if 0 < tau < iq and not _near(tau, iq):
            return RateFormula(1.0, iq - tau, b, g, label="DOUBLELOG case 1")
        if _near(tau, iq) and b > iq and not _near(b, iq):
            return RateFormula(1.0, 0.0, b - iq, g, label="DOUBLELOG case 2")
        if _near(tau, iq) and _near(b, iq) and g > iq:
            return RateFormula(1.0, 0.0, 0.0, g - iq, label="DOUBLELOG case 3")
        raise RegimeError("DOUBLELOG parameters outside the three listed regimes")
    if 0 < tau < iq:
        return RateFormula(1.0, iq - tau, -spec.sv_log, -spec.sv_loglog, label="CUSTOM slowly varying")
    raise RegimeError("CUSTOM rates need a declared 0 < tau < 1/q")


def sampled_interval_metric(spec, q, grid_size, check=True):
    """Distance table of ``([0,1], d)`` on the uniform grid with ``grid_size`` points."""
    m = int(grid_size)
    if m < 2:
        raise ValueError("grid_size must be at least 2")
    if m > SAMPLED_GRID_CAP:
        raise SizeCapError(f"grid_size is capped at {SAMPLED_GRID_CAP}")
    x = np.linspace(0.0, 1.0, m)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            D[i, j] = D[j, i] = pseudo_metric(spec, q, x[i], x[j])
    return PointCloud(points=x, distances=D, check=check)
