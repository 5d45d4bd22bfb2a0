"""Three-scale rate formulas ``C n^-p0 (log2(n+1))^-q0 (log2 log2(n+3))^-r0``.

Exponents use the decay-positive sign: ``p0 = 0.75`` means ``n^-0.75``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .seqspace import MonotoneSeq


@dataclass(frozen=True)
class RateFormula:
    C: float = 1.0
    p0: float = 0.0
    q0: float = 0.0
    r0: float = 0.0
    label: str = ""
    aux: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ValueError("C must be positive and finite")
        for v in (self.p0, self.q0, self.r0):
            if not math.isfinite(v):
                raise ValueError("exponents must be finite")

    @property
    def exponents(self):
        return (self.p0, self.q0, self.r0)

    @property
    def growth_exponents(self):
        """Exponents with the sign of the printed power, e.g. ``n^-1/4`` gives ``-1/4``."""
        return (-self.p0, -self.q0, -self.r0)

    def with_constant(self, C):
        return RateFormula(C, self.p0, self.q0, self.r0, self.label, dict(self.aux))

    def __call__(self, n):
        return eval_rate(self, n)

    def as_row(self):
        return (self.C, self.p0, self.q0, self.r0)


def _regressors(n):
    n = np.asarray(n, dtype=float)
    return np.log(n), np.log(np.log2(n + 1)), np.log(np.log2(np.log2(n + 3)))


def eval_rate(formula, n):
    """Evaluate the formula at ``n >= 1`` (scalar or array)."""
    arr = np.asarray(n, dtype=float)
    if np.any(arr < 1):
        raise ValueError("n must be >= 1")
    ln, lln, llln = _regressors(arr)
    out = formula.C * np.exp(-formula.p0 * ln - formula.q0 * lln - formula.r0 * llln)
    return float(out) if np.ndim(out) == 0 else out


class RateFit(NamedTuple):
    formula: RateFormula
    residual: float
    condition: float
    stderr: tuple
    samples: np.ndarray

    def confidence(self, z=1.96):
        """Half-widths of normal-approximation intervals for ``(p0, q0, r0)``."""
        return tuple(z * s for s in self.stderr)


def dyadic_points(n_min, n_max):
    j0 = math.ceil(math.log2(n_min))
    j1 = math.floor(math.log2(n_max))
    return np.array([1 << j for j in range(j0, j1 + 1)], dtype=np.int64)


def fit_rate(seq, n_min, n_max, fit_log=True, fit_loglog=False):
    """Least-squares fit of ``log a_n`` at dyadic ``n`` in ``[n_min, n_max]``.

    By default the polynomial and log exponents are fitted and ``r0 = 0``;
    ``fit_loglog=True`` adds the log-log regressor. ``residual`` is the RMS
    error in log space and ``condition`` the 2-norm condition number of
    the column-scaled design matrix.
    """
    vals = seq.values if isinstance(seq, MonotoneSeq) else np.asarray(seq, dtype=float)
    if n_min < 4:
        raise ValueError("n_min must be at least 4")
    if n_max > vals.size:
        raise ValueError("n_max exceeds sequence length")
    ns = dyadic_points(n_min, n_max)
    ncols = 1 + int(fit_log) + int(fit_loglog)
    if ns.size < max(6, ncols):
        raise ValueError(f"need at least 6 dyadic samples, got {ns.size}")
    y = vals[ns - 1]
    if np.any(y <= 0):
        raise ValueError("entries in the fit range must be positive")
    ln, lln, llln = _regressors(ns)
    cols = [np.ones_like(ln), -ln]
    if fit_log:
        cols.append(-lln)
    if fit_loglog:
        cols.append(-llln)
    X = np.column_stack(cols)
    ly = np.log(y)
    coef, *_ = np.linalg.lstsq(X, ly, rcond=None)
    res = ly - X @ coef
    rms = float(np.sqrt(np.mean(res**2)))
    Xs = X / np.linalg.norm(X, axis=0)
    cond = float(np.linalg.cond(Xs))
    dof = max(ns.size - X.shape[1], 1)
    s2 = float(res @ res) / dof
    cov = s2 * np.linalg.pinv(X.T @ X)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    p0 = float(coef[1])
    q0 = float(coef[2]) if fit_log else 0.0
    r0 = float(coef[-1]) if fit_loglog else 0.0
    stderr = (float(se[1]), float(se[2]) if fit_log else 0.0, float(se[-1]) if fit_loglog else 0.0)
    f = RateFormula(float(np.exp(coef[0])), p0, q0, r0, label="fit")
    return RateFit(f, rms, cond, stderr, ns)


def fit_power_law(ns, values):
    """Plain log-log slope fit ``values ~ C n^-p``; returns ``(p, C)``.

    Useful for short sequences where dyadic sampling leaves too few points.
    """
    ns = np.asarray(ns, dtype=float)
    v = np.asarray(values, dtype=float)
    if ns.size < 2 or np.any(v <= 0) or np.any(ns <= 0):
        raise ValueError("need at least two positive samples")
    slope, icpt = np.polyfit(np.log(ns), np.log(v), 1)
    return float(-slope), float(np.exp(icpt))


def fitted_constant(values, formula, ns):
    """Smallest ``c`` with ``values[n] <= c * formula(n)`` on the given ``ns`` (1-based)."""
    ns = np.asarray(ns, dtype=np.int64)
    v = np.asarray(values, dtype=float)[ns - 1]
    return float(np.max(v / eval_rate(formula.with_constant(1.0), ns)))
