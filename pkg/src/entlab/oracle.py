"""Regime tables mapping kernel and set parameters to upper-rate formulas.

Every table is a list of cases; a case is a set of constraints on the
parameter record plus an exponent map. Cases within a table are mutually
exclusive, and a record that fits no case raises ``RegimeError`` naming the
case whose constraints it misses by the least.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from .kernel import RegimeError
from .rates import RateFormula

EQ_TOL = 1e-12


class Table(enum.Enum):
    TH02 = "TH02"
    TH04 = "TH04"
    ENTKH = "ENTKH"
    ENTKH2 = "ENTKH2"
    RL03 = "RL03"
    RL05 = "RL05"
    RL06 = "RL06"
    THSV = "THSV"
    RL04_I = "RL04_i"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().upper()
        for t in cls:
            if t.value.upper() == key or t.name == key:
                return t
        raise ValueError(f"unknown table {name!r}; choose from {[t.value for t in cls]}")


@dataclass(frozen=True)
class Constraint:
    text: str
    violation: Callable[[dict], float]


def _lt(text, a, b):
    """Strict ``a(P) < b(P)``."""
    def v(P):
        d = a(P) - b(P)
        if math.isnan(d):
            return math.nan
        return d + EQ_TOL if d >= -EQ_TOL else 0.0
    return Constraint(text, v)


def _le(text, a, b):
    def v(P):
        d = a(P) - b(P)
        return math.nan if math.isnan(d) else max(0.0, d - EQ_TOL)
    return Constraint(text, v)


def _eq(text, a, b):
    def v(P):
        d = abs(a(P) - b(P))
        if math.isnan(d):
            return math.nan
        return d if d > EQ_TOL else 0.0
    return Constraint(text, v)


def _is(text, key, value):
    return Constraint(text, lambda P: 0.0 if P.get(key) == value else 1.0)


def _c(x):
    return lambda P: x


def _g(key):
    return lambda P: P[key]


def _pp(P):
    p = P["p"]
    return math.inf if p == 1 else p / (p - 1)


def _inv_pp(P):
    return 1.0 - 1.0 / P["p"]


@dataclass(frozen=True)
class Case:
    name: str
    constraints: tuple
    exponents: Callable[[dict], tuple]
    constant: Callable[[dict], float] = lambda P: 1.0
    aux: Callable[[dict], dict] = lambda P: {}

    def violation(self, P):
        """Total violation; a missing (NaN) parameter counts as infinite."""
        v = [c.violation(P) for c in self.constraints]
        return math.inf if any(math.isnan(x) for x in v) else sum(v)

    def score(self, P):
        """Ranking key for the nearest case: numeric violation, then missing parameters."""
        v = [c.violation(P) for c in self.constraints]
        return (sum(x for x in v if not math.isnan(x)), sum(math.isnan(x) for x in v))

    def describe(self):
        return f"{self.name} ({', '.join(c.text for c in self.constraints)})"


P_RANGE = (_le("2 <= p", _c(2.0), _g("p")), _lt("p < inf", _g("p"), _c(math.inf)))
TAU_POS = _lt("0 < tau", _c(0.0), _g("tau"))
TAU_EQ = _eq("tau = 1/p'", _g("tau"), _inv_pp)
TAU_LT = _lt("tau < 1/p'", _g("tau"), _inv_pp)
TAU_HALF = _eq("tau = 1/2", _g("tau"), _c(0.5))
TAU_LT_HALF = _lt("tau < 1/2", _g("tau"), _c(0.5))

_TH02 = [
    Case("TH02(i)", P_RANGE + (TAU_POS, TAU_LT, _eq("beta = 0", _g("beta"), _c(0.0))),
         lambda P: (1 - P["tau"], 0.0, 0.0)),
    Case("TH02(ii) 1/p' < beta < 1", P_RANGE + (TAU_EQ, _lt("1/p' < beta", _inv_pp, _g("beta")),
                                                _lt("beta < 1", _g("beta"), _c(1.0))),
         lambda P: (P["beta"] - _inv_pp(P), 0.0, 0.0)),
    Case("TH02(ii) beta > 1", P_RANGE + (TAU_EQ, _lt("1 < beta", _c(1.0), _g("beta"))),
         lambda P: (1 / P["p"], P["beta"] - 1, 0.0)),
    Case("TH02(ii) beta = 1", P_RANGE + (TAU_EQ, _eq("beta = 1", _g("beta"), _c(1.0))),
         lambda P: (1 / P["p"], -1.0, 0.0)),
]

_TH04 = [
    Case("P1", P_RANGE + (TAU_POS, TAU_LT), lambda P: (1 - P["tau"], P["beta"], P["gamma"])),
    Case("P2", P_RANGE + (TAU_EQ, _lt("1/p' < beta", _inv_pp, _g("beta")),
                          _lt("beta < 1", _g("beta"), _c(1.0))),
         lambda P: (P["beta"] - _inv_pp(P), P["gamma"], 0.0)),
    Case("P3", P_RANGE + (TAU_EQ, _lt("1 < beta", _c(1.0), _g("beta"))),
         lambda P: (1 / P["p"], P["beta"] - 1, P["gamma"])),
    Case("P4", P_RANGE + (TAU_EQ, _eq("beta = 1", _g("beta"), _c(1.0)),
                          _lt("gamma < 1", _g("gamma"), _c(1.0))),
         lambda P: (1 / P["p"], P["gamma"] - 1, 0.0)),
    Case("P5", P_RANGE + (TAU_EQ, _eq("beta = 1", _g("beta"), _c(1.0)),
                          _le("1 <= gamma", _c(1.0), _g("gamma")),
                          _lt("0 < delta", _c(0.0), _g("delta"))),
         lambda P: (1 / P["p"], -P["delta"], 0.0)),
    Case("P6", P_RANGE + (TAU_EQ, _eq("beta = 1/p'", _g("beta"), _inv_pp),
                          _lt("1/p' < gamma", _inv_pp, _g("gamma"))),
         lambda P: (0.0, P["gamma"] - _inv_pp(P), 0.0)),
]

_ENTKH = [
    Case("G1", (TAU_POS, TAU_LT_HALF), lambda P: (1 - P["tau"], P["beta"], P["gamma"])),
    Case("G2", (TAU_HALF, _lt("1/2 < beta", _c(0.5), _g("beta")), _lt("beta < 1", _g("beta"), _c(1.0))),
         lambda P: (P["beta"] - 0.5, P["gamma"], 0.0)),
    Case("G3", (TAU_HALF, _lt("1 < beta", _c(1.0), _g("beta"))),
         lambda P: (0.5, P["beta"] - 1, P["gamma"])),
    Case("G4", (TAU_HALF, _eq("beta = 1", _g("beta"), _c(1.0)), _lt("gamma < 1", _g("gamma"), _c(1.0))),
         lambda P: (0.5, P["gamma"] - 1, 0.0)),
    Case("G5", (TAU_HALF, _eq("beta = 1", _g("beta"), _c(1.0)), _eq("gamma = 1", _g("gamma"), _c(1.0))),
         lambda P: (0.5, 0.0, -1.0)),
    Case("G6", (TAU_HALF, _eq("beta = 1", _g("beta"), _c(1.0)), _lt("1 < gamma", _c(1.0), _g("gamma"))),
         lambda P: (0.5, 0.0, P["gamma"] - 1)),
    Case("G7", (TAU_HALF, _eq("beta = 1/2", _g("beta"), _c(0.5)), _lt("1/2 < gamma", _c(0.5), _g("gamma"))),
         lambda P: (0.0, P["gamma"] - 0.5, 0.0)),
]

_Q_RANGE = (_le("1 <= q", _c(1.0), _g("q")), _lt("q < inf", _g("q"), _c(math.inf)))
_ENTKH2 = [
    Case("J1", _Q_RANGE + (TAU_POS, TAU_LT_HALF), lambda P: (1 - P["tau"], P["beta"], P["gamma"]),
         constant=lambda P: math.sqrt(P["q"])),
    Case("J2", _Q_RANGE + (TAU_HALF, _lt("1/2 < beta", _c(0.5), _g("beta"))),
         lambda P: (0.5, P["beta"] - 0.5, P["gamma"]), constant=lambda P: math.sqrt(P["q"])),
    Case("J3", _Q_RANGE + (TAU_HALF, _eq("beta = 1/2", _g("beta"), _c(0.5)),
                           _lt("1/2 < gamma", _c(0.5), _g("gamma"))),
         lambda P: (0.5, 0.0, P["gamma"] - 0.5), constant=lambda P: math.sqrt(P["q"])),
]

_RL03 = [
    Case("RL03", (_le("1 <= p", _c(1.0), _g("p")), _le("1 <= q", _c(1.0), _g("q")),
                  _lt("max(1/p - 1/q, 0) < alpha", lambda P: max(1 / P["p"] - 1 / P["q"], 0.0), _g("alpha"))),
         lambda P: (P["alpha"], 0.0, 0.0)),
]

_RL05 = [
    Case("RL05", P_RANGE + (_lt("1/p < alpha", lambda P: 1 / P["p"], _g("alpha")),
                            _le("1 <= delta", _c(1.0), _g("delta")),
                            Constraint("theta <= 0 when delta = 1",
                                       lambda P: max(0.0, P["theta"]) if abs(P["delta"] - 1) <= EQ_TOL else 0.0)),
         lambda P: (1 / P["p"] + P["delta"] * (P["alpha"] - 1 / P["p"]),
                    -P["theta"] * (P["alpha"] - 1 / P["p"]), 0.0)),
]

_POLY = _is("set decay = poly", "decay", "poly")
_RL06 = [
    Case("RL06(i) 1/2 < beta < 1", (_POLY, _le("1 <= delta", _c(1.0), _g("delta")),
                                    _lt("1/2 < beta", _c(0.5), _g("beta")), _lt("beta < 1", _g("beta"), _c(1.0))),
         lambda P: (P["beta"] - 0.5, 0.0, 0.0)),
    Case("RL06(i) beta = 1", (_POLY, _le("1 <= delta", _c(1.0), _g("delta")), _eq("beta = 1", _g("beta"), _c(1.0))),
         lambda P: (0.5, -1.0, 0.0)),
    Case("RL06(i) beta > 1", (_POLY, _le("1 <= delta", _c(1.0), _g("delta")), _lt("1 < beta", _c(1.0), _g("beta"))),
         lambda P: (0.5, P["beta"] - 1, 0.0)),
    Case("RL06(ii)", (_is("set decay = exp", "decay", "exp"), _lt("0 < delta", _c(0.0), _g("delta")),
                      _lt("1/2 < beta", _c(0.5), _g("beta"))),
         lambda P: (0.5 + P["delta"] * (P["beta"] - 0.5), 0.0, 0.0)),
]

_THSV = [
    Case("THSV", P_RANGE + (TAU_POS, TAU_LT),
         lambda P: (1 - P["tau"], P["gamma"], 0.0),
         aux=lambda P: {"beta": 1 + (_pp(P) - 1) / (1 - P["tau"] * _pp(P)),
                        "note": "multiply by sup_{k <= n^beta} (log(k+1))^gamma l(2k)"}),
]

_RL04_I = [
    Case("RL04_i", P_RANGE + (_lt("0 < rho", _c(0.0), _g("rho")),),
         lambda P: (P["rho"] + 1 / P["p"], P["gamma"], 0.0),
         aux=lambda P: {"sup_range_exponent": 1 + 1 / (P["p"] * P["rho"]),
                        "note": "input eps_k(A,d) <~ k^-rho (log(k+1))^-gamma"}),
]

TABLES = {
    Table.TH02: _TH02, Table.TH04: _TH04, Table.ENTKH: _ENTKH, Table.ENTKH2: _ENTKH2,
    Table.RL03: _RL03, Table.RL05: _RL05, Table.RL06: _RL06, Table.THSV: _THSV, Table.RL04_I: _RL04_I,
}

DEFAULTS = {"beta": 0.0, "gamma": 0.0, "theta": 0.0, "delta": math.nan, "q": 2.0, "decay": "poly"}
REQUIRED = {
    Table.TH02: ("p", "tau"), Table.TH04: ("p", "tau"), Table.ENTKH: ("tau",), Table.ENTKH2: ("tau",),
    Table.RL03: ("p", "q", "alpha"), Table.RL05: ("p", "alpha", "delta"), Table.RL06: ("beta", "delta"),
    Table.THSV: ("p", "tau"), Table.RL04_I: ("p", "rho"),
}


def _record(table, params):
    P = dict(DEFAULTS)
    P.update({k: v for k, v in params.items() if v is not None})
    missing = [k for k in REQUIRED[table] if k not in params or params[k] is None]
    if missing:
        raise RegimeError(f"{table.value} needs parameters {missing}")
    for k, v in P.items():
        if k != "decay":
            P[k] = float(v)
    return P


def match_cases(table, params):
    """All cases of ``table`` whose constraints hold (normally exactly one)."""
    table = Table.parse(table)
    P = _record(table, params)
    return [c for c in TABLES[table] if c.violation(P) == 0.0]


def rate_oracle(table, params):
    """Upper-rate formula for the unique case of ``table`` matching ``params``.

    The constant is 1 except in ENTKH2, where it carries the ``sqrt(q)``
    factor. ``aux`` records the case name plus, for THSV, the sup-range
    exponent ``beta``.
    """
    table = Table.parse(table)
    P = _record(table, params)
    hits = [c for c in TABLES[table] if c.violation(P) == 0.0]
    if len(hits) > 1:
        raise AssertionError(f"overlapping cases {[c.name for c in hits]} in {table.value}")
    if not hits:
        near = min(TABLES[table], key=lambda c: c.score(P))
        failed = [k.text for k in near.constraints if not k.violation(P) == 0.0]
        raise RegimeError(
            f"parameters fit no case of {table.value}; nearest is {near.describe()}, "
            f"which fails: {', '.join(failed)}")
    c = hits[0]
    p0, q0, r0 = (float(e) for e in c.exponents(P))
    aux = {"case": c.name}
    aux.update(c.aux(P))
    return RateFormula(c.constant(P), p0, q0, r0, label=f"{table.value}:{c.name}", aux=aux)
