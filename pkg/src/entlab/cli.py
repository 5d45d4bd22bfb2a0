"""Command-line runner.

    entlab cover --input points.csv --eps 0.35 --method exact
    entlab oracle --table TH04 --p 2 --tau 0.25
    entlab operator rl --alpha 0.5 --grid 256 sv --fit

Exit codes: 0 success, 1 acceptance failures (``verify``), 2 invalid input,
3 numeric failure, 4 resource cap hit.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from . import csvio, hull, kernel, metricspace, operator, oracle, rates, seqspace, verify
from .kernel import Family, KernelSpec, Mode
from .metricspace import SizeCapError
from .seqspace import MonotoneSeq

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NUMERIC, EXIT_CAP = 0, 1, 2, 3, 4

# options that steer the run but do not change results
_NOT_HASHED = {"config", "out", "plot", "func"}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _real(s):
    """Float that also accepts ``inf``."""
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None


def _reals(s):
    return [_real(x) for x in str(s).replace(";", ",").split(",") if x.strip()]


def _ints(s):
    try:
        return [int(x) for x in str(s).replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {s!r}") from None


def _common(p):
    p.add_argument("--config", help="key=value file; command-line flags win")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--plot", help="also write a matplotlib script to this path")
    p.add_argument("--seed", type=int, default=0, help="seed for every random draw")


def _kernel_block(p):
    g = p.add_argument_group("kernel")
    g.add_argument("--family", choices=["power", "logpower", "doublelog"], default="power")
    g.add_argument("--tau", type=_real, default=0.25)
    g.add_argument("--beta", type=_real, default=0.0)
    g.add_argument("--gamma", type=_real, default=0.0)
    g.add_argument("--c0", type=_real, default=1.0)
    g.add_argument("--mode", choices=["vo", "ws"], default="vo")
    g.add_argument("--scale", type=_real, default=1.0)


def build_parser():
    top = _Parser(prog="entlab", description="Entropy numbers of sets, hulls and integral operators.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cover", help="covering numbers and entropy numbers of a finite set")
    _common(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="points CSV (columns x1..xd)")
    src.add_argument("--table", help="square distance table CSV")
    p.add_argument("--norm", type=_real, default=2.0, help="l_p norm for points")
    p.add_argument("--eps", type=_reals, default=None, help="radius or comma list")
    p.add_argument("--method", choices=["exact", "greedy", "packing"], default="exact")
    p.add_argument("--solver", choices=["auto", "bnb", "milp"], default="auto")
    p.add_argument("--entropy", type=int, default=None, metavar="N", help="entropy numbers eps_1..eps_N")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("hull", help="entropy brackets of absolutely convex hulls")
    _common(p)
    p.add_argument("action", choices=["bounds", "steinwart", "l02"])
    p.add_argument("--generators", help="CSV with one generator per row")
    p.add_argument("--sigma-power", type=_real, default=1.0, help="diagonal set sigma_k = k^-a")
    p.add_argument("--dim", type=int, default=6)
    p.add_argument("--p", type=_real, default=2.0, help="ambient l_p (bounds, l02) or type p (steinwart)")
    p.add_argument("--mesh", type=_real, default=0.1)
    p.add_argument("--scheme", choices=["uniform", "scaled"], default="scaled")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--input", help="entropy numbers CSV for steinwart")
    p.add_argument("--t", type=_real, default=1.0)
    p.add_argument("--c-t", type=_real, default=1.0)
    p.add_argument("--tau-p", type=_real, default=1.0)
    p.add_argument("--alphas", type=_ints, default=None)
    p.add_argument("--log2-alphas", type=_reals, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--exact", action="store_true", help="big-integer Steinwart evaluation")
    p.add_argument("--c", type=_real, default=1.0)
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("kernel", help="kernel integrals and the induced pseudo-metric")
    _common(p)
    p.add_argument("action", choices=["integral", "metric", "sandwich", "rate"])
    _kernel_block(p)
    p.add_argument("--q", type=_real, default=2.0)
    p.add_argument("--r", type=_reals, default=[0.5])
    p.add_argument("--grid", type=int, default=33)
    p.add_argument("--tol", type=_real, default=1e-4)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("operator", help="discretized integral operators")
    _common(p)
    p.add_argument("kind", choices=["rl", "kernel"])
    p.add_argument("action", choices=["sv", "semigroup", "shift", "nets", "rieli", "apply"])
    _kernel_block(p)
    p.add_argument("--alpha", type=_real, default=0.5, help="Riemann-Liouville order")
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--fit", action="store_true", help="sv: emit the fitted rate instead of the values")
    p.add_argument("--coeffs", type=_reals, default=[1.0], help="semigroup polynomial coefficients")
    p.add_argument("--p", type=_real, default=2.0)
    p.add_argument("--q", type=_real, default=2.0)
    p.add_argument("--delta", type=_real, default=0.25)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--net", choices=["rademacher", "atoms", "means"], default="rademacher")
    p.add_argument("--m", type=_reals, default=[4.0])
    p.add_argument("--n-max", type=int, default=32)
    p.add_argument("--c", type=_real, default=None, help="rieli constant (default: fitted)")
    p.add_argument("--input", help="apply: CSV of grid samples")
    p.set_defaults(func=cmd_operator)

    p = sub.add_parser("hardy", help="Hardy-type inequalities for non-increasing sequences")
    _common(p)
    p.add_argument("--check", choices=["lh1", "lh2"], default="lh1")
    p.add_argument("--input", help="sequence CSV (value or n,value)")
    p.add_argument("--sigma-power", type=_real, default=1.0, help="sigma_k = k^-a when no input")
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--r", type=_real, default=2.0)
    p.add_argument("--s", type=_real, default=2.0)
    p.add_argument("--alpha", type=_real, default=0.0)
    p.add_argument("--t", type=_real, default=1.0)
    p.set_defaults(func=cmd_hardy)

    p = sub.add_parser("fit", help="fit C n^-p0 (log n)^-q0 (loglog n)^-r0 to a sequence")
    _common(p)
    p.add_argument("--input", required=True, help="sequence CSV (value or n,value)")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--no-log", action="store_true")
    p.add_argument("--loglog", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("oracle", help="upper-rate formula for a parameter record")
    _common(p)
    p.add_argument("--table", required=True, choices=[t.value for t in oracle.Table])
    for name in ("p", "q", "tau", "beta", "gamma", "delta", "theta", "alpha", "rho"):
        p.add_argument(f"--{name}", type=_real, default=None)
    p.add_argument("--decay", choices=["poly", "exp"], default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="run the acceptance suite")
    _common(p)
    p.add_argument("--only", type=_ints, default=None, help="criterion numbers, e.g. 1,2,9")
    p.set_defaults(func=cmd_verify)
    return top


# ---------------------------------------------------------------- config handling

def read_config(path):
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = (v, i)
    return out


def _subparser(parser, command):
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[command]
    raise KeyError(command)


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    sp = _subparser(parser, args.command)
    actions = {a.dest: a for a in sp._actions if a.option_strings}
    defaults = {}
    for key, (val, line) in read_config(args.config).items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"{args.config}:{line}: unknown key {key!r} for '{args.command}'")
        act = actions[key]
        if act.nargs == 0:
            low = val.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"{args.config}:{line}: {key} must be true or false")
            defaults[key] = low in ("true", "1", "yes")
            continue
        try:
            conv = act.type(val) if act.type else val
        except (argparse.ArgumentTypeError, ValueError) as e:
            raise UsageError(f"{args.config}:{line}: {key}: {e}") from None
        if act.choices is not None and conv not in act.choices:
            raise UsageError(f"{args.config}:{line}: {key} must be one of {list(act.choices)}")
        defaults[key] = conv
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def config_of(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_HASHED}


# ---------------------------------------------------------------- helpers

def _kernel(args):
    fam = Family(args.family.upper())
    mode = Mode(args.mode.upper())
    if fam is Family.POWER:
        return KernelSpec.power(args.tau, mode=mode, scale=args.scale)
    if fam is Family.LOGPOWER:
        spec = KernelSpec.logpower(args.tau, args.beta, c0=args.c0, mode=mode)
    else:
        spec = KernelSpec.doublelog(args.tau, args.beta, args.gamma, c0=args.c0, mode=mode)
    if args.scale != 1.0:
        d = dict(spec.__dict__)
        d["scale"] = args.scale
        spec = KernelSpec(**d)
    return spec


def _emit(args, header, rows):
    return csvio.write_csv(args.out, header, rows, config_of(args))


def _diag_sigma(a, n):
    return MonotoneSeq(np.arange(1, n + 1, dtype=float) ** -a)


def _hull_spec(args):
    if args.generators:
        return hull.HullSpec(csvio.read_points(args.generators), args.p)
    return hull.diag_set(_diag_sigma(args.sigma_power, args.dim), args.p, args.dim)


PLOT_TEMPLATE = '''"""Log-log plot of computed sequences against predicted rates."""
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

DATA = json.loads({data!r})

fig, ax = plt.subplots(figsize=(6, 4))
for s in DATA["series"]:
    ax.loglog(s["n"], s["values"], "o-", ms=3, label=s["label"])
for f in DATA["formulas"]:
    n = np.asarray(f["n"], dtype=float)
    v = f["C"] * n ** -f["p0"] * np.log2(n + 1) ** -f["q0"] * np.log2(np.log2(n + 3)) ** -f["r0"]
    ax.loglog(n, v, "--", label=f["label"])
ax.set_xlabel("n")
ax.set_title(DATA["title"])
ax.legend()
fig.tight_layout()
fig.savefig({png!r}, dpi=120)
'''


def write_plot(path, title, series, formulas):
    """Self-contained matplotlib script; ``series`` are ``(label, n, values)``,
    ``formulas`` are ``(label, RateFormula, n)``."""
    data = {
        "title": title,
        "series": [{"label": lb, "n": [int(x) for x in n], "values": [float(v) for v in vals]}
                   for lb, n, vals in series],
        "formulas": [{"label": lb, "C": f.C, "p0": f.p0, "q0": f.q0, "r0": f.r0, "n": [int(x) for x in n]}
                     for lb, f, n in formulas],
    }
    png = str(Path(path).with_suffix(".png"))
    Path(path).write_text(PLOT_TEMPLATE.format(data=json.dumps(data, sort_keys=True), png=png))


def _positive(vals):
    v = np.asarray(vals, dtype=float)
    n = np.arange(1, v.size + 1)
    keep = v > 0
    return n[keep], v[keep]


# ---------------------------------------------------------------- commands

def cmd_cover(args):
    if args.input:
        cloud = metricspace.PointCloud(csvio.read_points(args.input), norm_p=args.norm)
    elif args.table:
        cloud = metricspace.PointCloud(distances=csvio.read_table(args.table))
    else:
        raise UsageError("cover needs --input or --table")
    if args.entropy is not None:
        m = metricspace.Method.EXACT if args.method == "exact" else metricspace.Method.GREEDY
        if args.method == "packing":
            raise UsageError("entropy numbers use --method exact or greedy")
        e = metricspace.entropy_numbers(cloud, args.entropy, m, solver=args.solver).values
        if args.plot:
            n, v = _positive(e)
            write_plot(args.plot, "entropy numbers", [(m.value, n, v)], [])
        return _emit(args, ["n", "epsilon", "method"], [(i + 1, v, m.value) for i, v in enumerate(e)])
    if not args.eps:
        raise UsageError("cover needs --eps or --entropy")
    rows = []
    for eps in args.eps:
        if args.method == "exact":
            res = metricspace.exact_cover(cloud, eps, solver=args.solver)
        elif args.method == "greedy":
            res = metricspace.greedy_cover(cloud, eps)
        else:
            res = metricspace.packing_lower(cloud, eps)
        rows.append(res.as_row())
    return _emit(args, ["epsilon", "count", "kind"], rows)


def cmd_hull(args):
    if args.action == "bounds":
        spec = _hull_spec(args)
        prof = hull.hull_entropy_profile(spec, args.n_max, args.mesh, args.scheme)
        rows = [(n, prof.lower[n - 1], prof.upper[n - 1], prof.delta, args.mesh) for n in range(1, args.n_max + 1)]
        if args.plot:
            n = np.arange(1, args.n_max + 1)
            write_plot(args.plot, "hull entropy brackets",
                       [("upper", *_positive(prof.upper)), ("lower", *_positive(prof.lower))], [])
        return _emit(args, ["n", "lower", "upper", "delta", "mesh"], rows)
    if args.action == "l02":
        sig = csvio.read_sequence(args.input) if args.input else _diag_sigma(args.sigma_power, 2**12)
        rows = []
        for n in range(1, args.n_max + 1):
            b = hull.l02_lower(sig, args.p, n, args.c)
            rows.append((n, b.value, b.truncated))
        return _emit(args, ["n", "value", "truncated"], rows)
    if not args.input:
        raise UsageError("hull steinwart needs --input with entropy numbers of A")
    eps = csvio.read_sequence(args.input)
    params = hull.SteinwartParams(args.p, args.t, c_t=args.c_t, tau_p=args.tau_p,
                                  alphas=tuple(args.alphas) if args.alphas else None,
                                  log2_alphas=tuple(args.log2_alphas) if args.log2_alphas else None)
    b = hull.steinwart_upper(eps, params, n=args.n, exact=args.exact)
    return _emit(args, ["m", "bound", "first_term", "second_term", "truncated"],
                 [(b.m, b.bound, b.first_term, b.second_term, b.truncated)])


def cmd_kernel(args):
    spec = _kernel(args)
    if args.action == "integral":
        rows = [(r, kernel.kernel_q_integral(spec, args.q, r), "q-integral") for r in args.r]
        return _emit(args, ["r", "value", "source"], rows)
    if args.action == "metric":
        cloud = kernel.sampled_interval_metric(spec, args.q, args.grid)
        D = cloud.distance_matrix()
        return _emit(args, [f"d{i + 1}" for i in range(D.shape[0])], D.tolist())
    if args.action == "sandwich":
        x = np.linspace(0.0, 1.0, args.grid)
        rows = []
        for i in range(args.grid):
            for j in range(i + 1, args.grid):
                r = kernel.sandwich_check(spec, args.q, x[i], x[j], tol=args.tol)
                rows.append((x[i], x[j], r.base, r.d, r.passed))
        return _emit(args, ["s", "t", "base", "d", "passed"], rows)
    f = kernel.interval_rate_under_d(spec, args.q)
    return _emit(args, ["C", "p0", "q0", "r0", "case"], [(*f.as_row(), f.label)])


def _op_spec(args):
    return operator.RL(args.alpha) if args.kind == "rl" else _kernel(args)


def _rl03(alpha):
    try:
        return oracle.rate_oracle(oracle.Table.RL03, {"alpha": alpha, "p": 2.0, "q": 2.0})
    except kernel.RegimeError:
        return None


def cmd_operator(args):
    spec = _op_spec(args)
    if args.action == "semigroup":
        if args.kind != "rl":
            raise UsageError("semigroup needs kind rl")
        err = operator.semigroup_check(args.alpha, args.beta, args.coeffs, args.grid, order=args.order)
        return _emit(args, ["alpha", "beta", "max_error"], [(args.alpha, args.beta, err)])
    if args.action == "apply":
        if not args.input:
            raise UsageError("apply needs --input")
        f = csvio.read_values(args.input)
        op = operator.DiscretizedOperator(spec, f.size, order=args.order)
        g = operator.apply(op, f)
        return _emit(args, ["x", "value"], list(zip(op.x, g)))
    if args.action == "shift":
        rng = np.random.default_rng(args.seed)
        kspec = spec.kernel() if isinstance(spec, operator.RL) else spec
        rows = []
        for i in range(args.trials):
            f = rng.standard_normal(args.grid)
            r = operator.shift_modulus_check(kspec, args.p, args.delta, f)
            rows.append((i + 1, r.lhs, r.rhs, r.passed))
        return _emit(args, ["trial", "lhs", "rhs", "passed"], rows)
    if args.action == "nets":
        kspec = spec.kernel() if isinstance(spec, operator.RL) else spec
        rows = []
        for m in args.m:
            if args.net == "rademacher":
                b = operator.net_lower_rademacher(kspec, int(m))
            elif args.net == "atoms":
                b = operator.net_lower_kernel_atoms(kspec, args.p, m)
            else:
                b = operator.net_lower_means(kspec, args.p, int(m))
            rows.append((b.net_kind.value, b.m_or_n, b.separation, b.log2_cardinality, b.bound, b.entropy_index))
        return _emit(args, ["net", "m_or_n", "separation", "log2_cardinality", "bound", "entropy_index"], rows)
    op = operator.DiscretizedOperator(spec, args.grid, order=args.order)
    s = operator.singular_values(op).values
    n_all = np.arange(1, s.size + 1)
    if args.action == "sv":
        ref = _rl03(args.alpha) if args.kind == "rl" else None
        if args.plot:
            forms = []
            if ref is not None:
                c = rates.fitted_constant(s, ref, np.arange(1, 9))
                forms.append(("RL03 rate", ref.with_constant(c), n_all[: args.grid // 2]))
            write_plot(args.plot, "singular values", [("s_n", n_all[: args.grid // 2], s[: args.grid // 2])], forms)
        if args.fit:
            fit = rates.fit_rate(MonotoneSeq(s), 4, args.grid // 2, fit_log=False)
            f = fit.formula
            return _emit(args, ["C", "p0", "q0", "r0", "residual", "condition"],
                         [(f.C, f.p0, f.q0, f.r0, fit.residual, fit.condition)])
        return _emit(args, ["n", "value", "source"], [(i + 1, v, "singular_value") for i, v in enumerate(s)])
    # rieli
    kspec = spec.kernel() if isinstance(spec, operator.RL) else spec
    nmax = min(args.n_max, s.size)
    b = np.array([operator.rieli_bound(kspec, args.q, n) for n in range(1, nmax + 1)])
    c = args.c if args.c is not None else float(np.max(s[:4] / b[:4]))
    rows = [(n, s[n - 1], "singular_value") for n in range(1, nmax + 1)]
    rows += [(n, c * b[n - 1], "rieli_bound") for n in range(1, nmax + 1)]
    if args.plot:
        nn = np.arange(1, nmax + 1)
        write_plot(args.plot, "rieli bound", [("s_n", nn, s[:nmax]), ("c * bound", nn, c * b)], [])
    return _emit(args, ["n", "value", "source"], rows)


def cmd_hardy(args):
    seq = csvio.read_sequence(args.input) if args.input else _diag_sigma(args.sigma_power, args.N)
    if args.check == "lh1":
        r = seqspace.lh1_check(seq, args.r, args.s, args.alpha, args.t, args.N)
        c = seqspace.lh1_constant(args.r, args.s, args.alpha, args.t, args.N)
    else:
        r = seqspace.lh2_check(seq, args.r, args.alpha, args.t, args.N)
        c = seqspace.lh2_constant(args.r, args.alpha, args.t, args.N)
    return _emit(args, ["lhs", "rhs", "ratio", "constant", "passed"],
                 [(r.lhs, r.rhs, r.ratio, c, r.ratio <= c * (1 + 1e-9))])


def cmd_fit(args):
    seq = csvio.read_sequence(args.input)
    n_max = args.n_max or len(seq)
    fit = rates.fit_rate(seq, args.n_min, n_max, fit_log=not args.no_log, fit_loglog=args.loglog)
    f = fit.formula
    if args.plot:
        n, v = _positive(seq.values[:n_max])
        write_plot(args.plot, "rate fit", [("data", n, v)], [("fit", f, n)])
    return _emit(args, ["C", "p0", "q0", "r0", "residual", "condition"],
                 [(f.C, f.p0, f.q0, f.r0, fit.residual, fit.condition)])


def cmd_oracle(args):
    params = {k: getattr(args, k) for k in ("p", "q", "tau", "beta", "gamma", "delta", "theta", "alpha", "rho",
                                             "decay") if getattr(args, k) is not None}
    f = oracle.rate_oracle(args.table, params)
    return _emit(args, ["C", "p0", "q0", "r0", "case"], [(*f.as_row(), f.aux.get("case", f.label))])


def cmd_verify(args):
    results = verify.run_all(set(args.only) if args.only else None, seed=args.seed)
    for r in results:
        print(r.line(), file=sys.stderr)
    text = _emit(args, ["criterion", "name", "passed", "detail"],
                 [(r.number, r.name, r.passed, r.detail) for r in results])
    return text, (EXIT_OK if all(r.passed for r in results) else EXIT_FAIL)


# ---------------------------------------------------------------- entry point

def _origin(exc):
    """Deepest ``entlab`` module in the traceback."""
    name = "entlab"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("entlab."):
            name = mod
    return name


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        operator.thread_count()
        out = args.func(args)
        code = EXIT_OK
        if isinstance(out, tuple):
            out, code = out
        if args.out is None and out:
            sys.stdout.write(out)
        return code
    except SizeCapError as e:
        print(f"entlab: resource cap in {_origin(e)}: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, FileNotFoundError, IsADirectoryError) as e:
        print(f"entlab: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"entlab: numeric failure in {_origin(e)}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
