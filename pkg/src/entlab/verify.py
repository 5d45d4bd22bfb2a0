"""The acceptance suite as plain functions, shared by ``entlab verify`` and the tests.

Each ``criterion_k`` returns a ``Result``; ``run_all`` runs a selection.
"""

from __future__ import annotations

import math
import time
import warnings
from typing import NamedTuple

import numpy as np

from . import hull, kernel, metricspace, operator, oracle, seqspace
from .kernel import IntegrabilityError, KernelSpec, Mode
from .rates import fit_power_law
from .seqspace import MonotoneSeq


class Result(NamedTuple):
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} criterion {self.number:2d} {self.name}: {self.detail} [{self.seconds:.2f}s]"


def _timed(number, name, budget=None):
    def deco(fn):
        def run(seed=0):
            t0 = time.perf_counter()
            passed, detail = fn(seed)
            dt = time.perf_counter() - t0
            if budget is not None and dt > budget:
                passed = False
                detail += f"; runtime {dt:.1f}s over budget {budget:g}s"
            return Result(number, name, bool(passed), detail, dt)

        run.number = number
        run.criterion_name = name
        return run

    return deco


# ---------------------------------------------------------------- 1

@_timed(1, "interval entropy", budget=1.0)
def criterion_1(seed):
    cloud = metricspace.PointCloud(np.linspace(0.0, 1.0, 1001))
    e = metricspace.entropy_numbers(cloud, 10, metricspace.Method.EXACT).values
    ref = 1.0 / (2 * np.arange(1, 11))
    err = float(np.max(np.abs(e - ref)))
    return err <= 1e-3 + 1e-12, f"max |eps_n - 1/(2n)| = {err:.2e} for n <= 10"


# ---------------------------------------------------------------- 2

@_timed(2, "covering ordering", budget=30.0)
def criterion_2(seed):
    rng = np.random.default_rng(seed)
    bad, worst, checks = 0, 0.0, 0
    norms = (1.0, 2.0, math.inf)
    for i in range(200):
        m = int(rng.integers(2, 21))
        d = int(rng.integers(1, 5))
        cloud = metricspace.PointCloud(rng.random((m, d)), norm_p=norms[i % 3])
        diam = cloud.diameter()
        for frac in (0.1, 0.25, 0.5):
            eps = frac * diam
            pk = metricspace.packing_lower(cloud, eps).count
            ex = metricspace.exact_cover(cloud, eps).count
            gr = metricspace.greedy_cover(cloud, eps).count
            checks += 1
            bound = math.log(m) + 1
            if not (pk <= ex <= gr) or gr / ex > bound:
                bad += 1
            worst = max(worst, gr / ex / bound)
    return bad == 0, f"{checks} covers, {bad} violations, max (greedy/exact)/(ln|A|+1) = {worst:.3f}"


# ---------------------------------------------------------------- 3

def sandwich_kernels():
    """The POWER and LOGPOWER kernels of the sandwich sweep, as ``(label, VO spec)``."""
    out = [(f"POWER tau={t:g}", KernelSpec.power(t)) for t in (1 / 8, 1 / 4, 3 / 8)]
    for b in (0.75, 1.0, 2.0):
        out.append((f"LOGPOWER tau=1/4 beta={b:g}", KernelSpec.logpower(0.25, b, c0=b / 0.25 + 1)))
    return out


@_timed(3, "pseudo-metric sandwich", budget=60.0)
def criterion_3(seed):
    x = np.linspace(0.0, 1.0, 33)
    pairs = fails = 0
    skipped = []
    for label, spec in sandwich_kernels():
        for q in (4 / 3, 2.0, 4.0):
            try:
                kernel.kernel_q_integral(spec, q, 1.0)
            except IntegrabilityError:
                skipped.append(f"{label} q={q:g}")
                continue
            for mode in (Mode.VO, Mode.WS):
                sp = spec.with_mode(mode)
                for i in range(33):
                    for j in range(i + 1, 33):
                        pairs += 1
                        if not kernel.sandwich_check(sp, q, x[i], x[j], tol=1e-4).passed:
                            fails += 1
    detail = f"{pairs} pairs, {fails} failures"
    if skipped:
        detail += f"; k not in L_q (outside the hypothesis): {', '.join(skipped)}"
    return fails == 0, detail


# ---------------------------------------------------------------- 4

@_timed(4, "closed forms vs quadrature")
def criterion_4(seed):
    specs = [(KernelSpec.power(t), q) for t in (0.125, 0.25, 0.375) for q in (4 / 3, 2.0) if q * t < 1]
    specs += [(KernelSpec.logpower(1 / q, b, c0=b * q + 1), q) for q in (4 / 3, 2.0, 4.0) for b in (0.8, 1.0, 2.0)
              if b * q > 1]
    worst = 0.0
    for spec, q in specs:
        for r in np.logspace(-12, 0, 100):
            a = kernel.kernel_q_integral(spec, q, r)
            b = kernel.kernel_q_integral(spec, q, r, method="quad")
            worst = max(worst, abs(a / b - 1))
    return worst <= 1e-6, f"{len(specs)} kernels x 100 radii, max relative gap {worst:.1e}"


# ---------------------------------------------------------------- 5

@_timed(5, "Riemann-Liouville")
def criterion_5(seed):
    sg = operator.semigroup_check(0.5, 0.5, [1.0], 256)
    grid = 257
    x = np.linspace(0.0, 1.0, grid)
    mono = 0.0
    for a in (0.25, 0.5, 1.0, 1.5):
        op = operator.DiscretizedOperator(operator.RL(a), grid)
        for k in range(5):
            ref = operator.rl_monomial(a, k, x)
            got = operator.apply(op, x**k)
            mono = max(mono, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
    rng = np.random.default_rng(seed)
    spec = operator.RL(0.5).kernel()
    shift_fail = shift_runs = 0
    for _ in range(100):
        f = rng.standard_normal(grid)
        for p in (1.0, 2.0, math.inf):
            for j in range(1, 7):
                shift_runs += 1
                if not operator.shift_modulus_check(spec, p, 2.0**-j, f).passed:
                    shift_fail += 1
    ok = sg <= 1e-6 and mono <= 1e-6 and shift_fail == 0
    return ok, (f"semigroup error {sg:.1e}; monomial relative error {mono:.1e}; "
                f"shift bound {shift_runs - shift_fail}/{shift_runs}")


# ---------------------------------------------------------------- 6

def rieli_dominance(alpha, grid=256, n_max=32, n_fit=4):
    """``(c, worst)``: ``c`` fitted as ``max s_n / rieli(n)`` over ``n <= n_fit``,
    ``worst`` the largest ``s_n / (c rieli(n))`` over ``n <= n_max``."""
    spec = operator.RL(alpha).kernel()
    s = operator.singular_values(operator.DiscretizedOperator(operator.RL(alpha), grid)).values
    b = np.array([operator.rieli_bound(spec, 2.0, n) for n in range(1, n_max + 1)])
    c = float(np.max(s[:n_fit] / b[:n_fit]))
    return c, float(np.max(s[:n_max] / (c * b)))


@_timed(6, "spectral rate")
def criterion_6(seed):
    parts, ok = [], True
    n = np.arange(8, 65)
    for a in (0.5, 1.0):
        s = operator.singular_values(operator.DiscretizedOperator(operator.RL(a), 256)).values
        p, _ = fit_power_law(n, s[n - 1])
        ok &= abs(p - a) <= 0.05
        parts.append(f"alpha={a:g} fitted {p:.3f}")
    for a in (0.75, 1.0):
        c, worst = rieli_dominance(a)
        ok &= worst <= 1.0 + 1e-12
        parts.append(f"rieli alpha={a:g} c={c:.3f} max s_n/bound={worst:.3f}")
    return ok, "; ".join(parts)


# ---------------------------------------------------------------- 7

NET_EXAMPLES = (
    ("rademacher x^-1/2 n=4", lambda: operator.net_lower_rademacher(KernelSpec.power(0.5), 4).bound, 1.0),
    ("rademacher x^-1/4 n=1", lambda: operator.net_lower_rademacher(KernelSpec.power(0.25), 1).bound, 4 / 3),
    ("atoms x^-1/4 p=2 m=4", lambda: operator.net_lower_kernel_atoms(KernelSpec.power(0.25), 2, 4).separation, 1.0),
    ("atoms logpower m=e^3", lambda: operator.net_lower_kernel_atoms(
        KernelSpec.logpower(0.5, 1.0, c0=1.0), 2, math.e**3).separation, 0.5),
    ("means m=4 separation", lambda: operator.net_lower_means(KernelSpec.power(0.25), 2, 4).separation, 4**-0.25),
    ("means m=4 log2 card", lambda: operator.net_lower_means(KernelSpec.power(0.25), 2, 4).log2_cardinality, 2.0),
    ("means m=16 separation", lambda: operator.net_lower_means(KernelSpec.power(0.25), 2, 16).separation,
     16**-0.25 * 2**-0.5),
    ("means m=16 log2 card", lambda: operator.net_lower_means(KernelSpec.power(0.25), 2, 16).log2_cardinality, 8.0),
)


def net_regimes():
    """``(case, kernel, oracle params, net builder n -> NetLowerBound)`` for P1, P2, P6."""
    ln2 = math.log(2.0)
    p1 = KernelSpec.power(0.25)
    p2 = KernelSpec.logpower(0.5, 0.75, c0=2.5)
    p6 = KernelSpec.doublelog(0.5, 0.5, 1.0, c0=math.e**2)
    return (
        ("P1", p1, dict(p=2, tau=0.25), lambda n: operator.net_lower_rademacher(p1, n)),
        ("P2", p2, dict(p=2, tau=0.5, beta=0.75),
         lambda n: operator.net_lower_kernel_atoms(p2, 2, None, log_m=n * ln2)),
        ("P6", p6, dict(p=2, tau=0.5, beta=0.5, gamma=1.0),
         lambda n: operator.net_lower_kernel_atoms(p6, 2, None, log_m=n * ln2)),
    )


def net_ratios(build, formula, n_max=1024):
    """``bound / formula(dyadic index)`` for ``n = 1..n_max``."""
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        b = build(n)
        out[n - 1] = b.bound / formula(b.dyadic_index)
    return out


@_timed(7, "net lower bounds")
def criterion_7(seed):
    worst = 0.0
    for _, f, ref in NET_EXAMPLES:
        worst = max(worst, abs(f() - ref))
    try:
        operator.net_lower_kernel_atoms(KernelSpec.power(0.25), 2, 1)
        degenerate = False
    except operator.DegenerateNetError:
        degenerate = True
    try:
        operator.net_lower_means(KernelSpec.power(0.25), 2, 5)
        square = False
    except ValueError:
        square = True
    ok = worst <= 1e-10 and degenerate and square
    parts = [f"examples max error {worst:.1e}"]
    for case, _, params, build in net_regimes():
        formula = oracle.rate_oracle(oracle.Table.TH04, params)
        r = net_ratios(build, formula)
        # the constant is fitted on the top dyadic block n in [2^9, 2^10]
        c = float(np.max(r[511:]))
        good = bool(np.all(r <= c * (1 + 1e-12))) and formula.label.endswith(case)
        ok &= good
        parts.append(f"{case}: C={c:.4f} max ratio/C={np.max(r) / c:.4f}")
    return ok, "; ".join(parts)


# ---------------------------------------------------------------- 8

def random_nonincreasing(rng, count, N):
    """Non-increasing positive sequences with mixed tails: power, log, step and noise."""
    out = np.empty((count, N))
    n = np.arange(1, N + 1, dtype=float)
    for i in range(count):
        kind = i % 4
        if kind == 0:
            v = n ** -rng.uniform(0.05, 2.0)
        elif kind == 1:
            v = np.log2(n + 1) ** -rng.uniform(0.1, 3.0)
        elif kind == 2:
            v = (n <= rng.integers(1, N + 1)).astype(float) + 1e-3 * n ** -1.0
        else:
            v = np.sort(rng.exponential(size=N))[::-1]
        out[i] = v / v[0] * rng.uniform(0.1, 10.0)
    return out


LH2_LITERAL = 1.0417


@_timed(8, "Hardy suite")
def criterion_8(seed):
    rng = np.random.default_rng(seed)
    N = 256
    bad1 = bad2 = 0
    worst1 = worst2 = 0.0
    for t, r in ((1.0, 2.0), (1.0, 4.0), (2.0, 3.0)):
        for a in (-1.0, 0.0, 1.0):
            c2 = seqspace.lh2_constant(r, a, t, N)
            cs = {s: seqspace.lh1_constant(r, s, a, t, N) for s in (1.0, r)}
            for v in random_nonincreasing(rng, 1000, N):
                seq = MonotoneSeq(v)
                for s, c1 in cs.items():
                    q1 = seqspace.lh1_check(seq, r, s, a, t, N).ratio
                    worst1 = max(worst1, q1 / c1)
                    bad1 += q1 > c1 * (1 + 1e-9)
                q2 = seqspace.lh2_check(seq, r, a, t, N).ratio
                worst2 = max(worst2, q2 / c2)
                bad2 += q2 > c2 * (1 + 1e-9)
    harm = MonotoneSeq(1.0 / np.arange(1, 10001))
    lit = seqspace.lh2_check(harm, 2.0, 0.0, 1.0, 10000).ratio
    lit_ok = abs(lit - LH2_LITERAL) <= 1e-3
    ok = bad1 == 0 and bad2 == 0 and lit_ok
    return ok, (f"lh1 violations {bad1} (max ratio/c {worst1:.3f}); lh2 violations {bad2} "
                f"(max ratio/c {worst2:.3f}); lh2 ratio for 1/k is {lit:.4f}, expected {LH2_LITERAL}")


# ---------------------------------------------------------------- 9

@_timed(9, "Steinwart m-formula")
def criterion_9(seed):
    m = hull.steinwart_m(hull.SteinwartParams(2.0, 1.0, alphas=(1, 2)))
    eps = MonotoneSeq(1.0 / np.arange(1.0, 200.0))
    worst = 0.0
    for n in (2, 3, 4):
        ai = tuple(int(2**x) for x in hull.alpha_schedule(n, 0.75))
        P = hull.SteinwartParams(2.0, 1.0, alphas=ai)
        a = hull.steinwart_upper(eps, P).bound
        b = hull.steinwart_upper(eps, P, exact=True).bound
        worst = max(worst, abs(a - b) / abs(b))
    return m == 15 and worst <= 1e-9, f"m = {m}; log-space vs big-integer relative gap {worst:.1e} for n <= 4"


# ---------------------------------------------------------------- 10

def tt03_ratio(spec, mesh, N=8, scheme="scaled"):
    """TT03(4, 2, 0) ratio with net radii of ``aco(A)`` against exact ``e_n(A)``."""
    prof = hull.hull_entropy_profile(spec, 2 ** (N - 1), mesh, scheme)
    eA = metricspace.entropy_numbers(spec.cloud(), 2 ** (N - 1), metricspace.Method.EXACT)
    lhs = seqspace.dyadic_subsequence(MonotoneSeq(prof.net_radii))
    rhs = seqspace.dyadic_subsequence(eA)
    return hull.finite_inequality_check(lhs, rhs, hull.TT03(4.0, 2.0, 0.0), N, hull.c_A_ratio(spec)), prof


@_timed(10, "hull pipeline", budget=300.0)
def criterion_10(seed):
    sig = MonotoneSeq(1.0 / np.arange(1.0, 65.0))
    spec = hull.diag_set(sig, 2.0, 6)
    ratios, ok, parts = [], True, []
    for mesh in (0.1, 0.05):
        ratio, prof = tt03_ratio(spec, mesh)
        ratios.append(ratio)
        ok &= bool(np.all(prof.lower <= prof.upper)) and math.isfinite(ratio)
        for n in (1, 2):
            lo = hull.l02_lower(sig, 2.0, n).value
            up = prof.upper[2 ** (n - 1) - 1]
            ok &= lo <= up + prof.delta
        parts.append(f"mesh {mesh:g}: net {prof.net_size} points, ratio {ratio:.4f}")
    var = abs(ratios[1] - ratios[0]) / ratios[0]
    ok &= var < 0.10
    parts.append(f"variation {100 * var:.1f}%")
    return ok, "; ".join(parts)


# ---------------------------------------------------------------- 11

ORACLE_CASES = {
    oracle.Table.TH02: [
        ("(i)", dict(p=2, tau=0.25), (0.75, 0, 0)),
        ("(ii) 1/p'<beta<1", dict(p=2, tau=0.5, beta=0.75), (0.25, 0, 0)),
        ("(ii) beta>1", dict(p=2, tau=0.5, beta=1.5), (0.5, 0.5, 0)),
        ("(ii) beta=1", dict(p=2, tau=0.5, beta=1.0), (0.5, -1, 0)),
    ],
    oracle.Table.TH04: [
        ("P1", dict(p=2, tau=0.25, beta=0.5, gamma=1.0), (0.75, 0.5, 1.0)),
        ("P2", dict(p=2, tau=0.5, beta=0.75, gamma=1.0), (0.25, 1.0, 0)),
        ("P3", dict(p=4, tau=0.75, beta=1.5, gamma=2.0), (0.25, 0.5, 2.0)),
        ("P4", dict(p=2, tau=0.5, beta=1.0, gamma=0.5), (0.5, -0.5, 0)),
        ("P5", dict(p=2, tau=0.5, beta=1.0, gamma=1.0, delta=0.3), (0.5, -0.3, 0)),
        ("P6", dict(p=2, tau=0.5, beta=0.5, gamma=1.0), (0, 0.5, 0)),
    ],
    oracle.Table.ENTKH: [
        ("G1", dict(tau=0.25, beta=0.5, gamma=1.0), (0.75, 0.5, 1.0)),
        ("G2", dict(tau=0.5, beta=0.75, gamma=1.0), (0.25, 1.0, 0)),
        ("G3", dict(tau=0.5, beta=1.5, gamma=2.0), (0.5, 0.5, 2.0)),
        ("G4", dict(tau=0.5, beta=1.0, gamma=0.5), (0.5, -0.5, 0)),
        ("G5", dict(tau=0.5, beta=1.0, gamma=1.0), (0.5, 0, -1)),
        ("G6", dict(tau=0.5, beta=1.0, gamma=1.5), (0.5, 0, 0.5)),
        ("G7", dict(tau=0.5, beta=0.5, gamma=1.0), (0, 0.5, 0)),
    ],
    oracle.Table.ENTKH2: [
        ("J1", dict(tau=0.25, beta=0.5, gamma=1.0, q=2), (0.75, 0.5, 1.0)),
        ("J2", dict(tau=0.5, beta=1.0, gamma=1.0, q=2), (0.5, 0.5, 1.0)),
        ("J3", dict(tau=0.5, beta=0.5, gamma=1.0, q=2), (0.5, 0, 0.5)),
    ],
    oracle.Table.RL05: [
        ("RL05", dict(alpha=1.0, p=2, delta=2.0, theta=-0.5), (1.5, 0.25, 0)),
    ],
    oracle.Table.RL06: [
        ("(i) beta<1", dict(beta=0.75, delta=1.5, decay="poly"), (0.25, 0, 0)),
        ("(i) beta=1", dict(beta=1.0, delta=1.5, decay="poly"), (0.5, -1, 0)),
        ("(i) beta>1", dict(beta=1.5, delta=1.5, decay="poly"), (0.5, 0.5, 0)),
        ("(ii)", dict(beta=0.75, delta=2.0, decay="exp"), (1.0, 0, 0)),
    ],
}


@_timed(11, "rate oracle totality")
def criterion_11(seed):
    problems = []
    rows = 0
    for table, cases in ORACLE_CASES.items():
        seen = set()
        for label, params, want in cases:
            rows += 1
            hits = oracle.match_cases(table, params)
            if len(hits) != 1:
                problems.append(f"{table.value} {label}: {len(hits)} matching cases")
                continue
            f = oracle.rate_oracle(table, params)
            seen.add(f.label)
            if not np.allclose(f.exponents, want, rtol=0, atol=1e-12):
                problems.append(f"{table.value} {label}: got {f.exponents}, want {want}")
        total = len(oracle.TABLES[table])
        if len(seen) != total:
            problems.append(f"{table.value}: reached {len(seen)} of {total} cases")
    detail = f"{rows} records" + ("; " + "; ".join(problems) if problems else ", each reaches exactly one case")
    return not problems, detail


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11)


def run_all(only=None, seed=0):
    """Run the selected criteria (all by default) and return their results."""
    out = []
    for c in CRITERIA:
        if only and c.number not in only:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out.append(c(seed))
    return out
