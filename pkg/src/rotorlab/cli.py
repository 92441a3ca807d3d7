"""Command-line front end: curve data, joint bounds, property checks and state reports.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 property violation.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import joint, measures, spectral
from .errors import BracketError, RotorError
from .states import (
    Ensemble,
    PureState,
    Window,
    moments,
    momentum_eigenstate,
    povm_deviation,
    random_state,
    state_from_dict,
    von_mises_state,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VIOLATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x) + 0.0, ".17g")
    return str(x)


def parse_grid(text, linear=False):
    """``lo:hi:n`` to an array; geometric when ``lo > 0`` unless ``linear``."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"grid must look like lo:hi:n, got {text!r}") from None
    if n < 2 or not lo < hi or not (math.isfinite(lo) and math.isfinite(hi)):
        raise UsageError(f"grid needs n >= 2 and lo < hi, got {text!r}")
    if lo > 0 and not linear:
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rotorlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_table(kind, header, rows, fmt_name, meta=None):
    if fmt_name == "json":
        doc = {"kind": kind, **(meta or {}), "columns": list(header)}
        doc["rows"] = [[_json_value(v) for v in row] for row in rows]
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# {kind}")
    for k, v in (meta or {}).items():
        buf.write(f" {k}={v}")
    buf.write("\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def emit(text, path):
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def cmd_curve(args):
    if args.kind == "mathieu":
        grid = parse_grid(args.q, args.linear)
        if grid[0] < 0:
            raise UsageError("q grid must be non-negative")
        pts = spectral.mathieu_bound_curve(grid)
        header = ["param", "dispersion_sq", "product"]
        rows = [[p.param, p.dispersion_sq, p.product] for p in pts]
        meta = {}
        if args.compare:
            header += ["kappa_matched", "infidelity"]
            for row, q in zip(rows, grid):
                row.extend(spectral.mathieu_vs_vonmises(q))
            meta["matching"] = "equal-dispersion"
    else:
        grid = parse_grid(args.kappa, args.linear)
        if grid[0] < 0:
            raise UsageError("kappa grid must be non-negative")
        pts = spectral.von_mises_bound_curve(grid)
        header = ["param", "dispersion_sq", "product"]
        rows = [[p.param, p.dispersion_sq, p.product] for p in pts]
        meta = {}
    emit(render_table(f"curve {args.kind}", header, rows, args.format, meta), args.out)
    return EXIT_OK


def _critical_path(out, fmt_name):
    stem, ext = os.path.splitext(out)
    return f"{stem}_critical{ext or '.' + fmt_name}"


def cmd_joint(args):
    family = args.family or joint.DEFAULT_FAMILY[args.mode]
    default = "0.05:60:60" if family == "mathieu" else "0.05:20:60"
    grid = parse_grid(args.grid or default, args.linear)
    rows = joint.bound_curve(grid, args.mode, family, args.signal_family, with_minimum=args.minimum)
    header = joint.BOUND_CSV_HEADER if args.minimum else joint.BOUND_CSV_HEADER[:6]
    curve_rows = [[getattr(r, c) for c in header] for r in rows]
    meta = {"family": family, "signal_family": args.signal_family or family}
    curve_text = render_table(f"joint {args.mode}", header, curve_rows, args.format, meta)
    points = joint.critical_points(args.mode, family, args.signal_family)
    crit_rows = [[args.mode, p.kind, p.ancilla_param, p.ancilla_dispersion_sq, p.product] for p in points]
    crit_text = render_table(f"critical {args.mode}", joint.CRITICAL_CSV_HEADER, crit_rows, args.format, meta)
    if args.out:
        atomic_write(args.out, curve_text)
        atomic_write(args.critical_out or _critical_path(args.out, args.format), crit_text)
    else:
        sys.stdout.write(curve_text)
        sys.stdout.write(crit_text)
    return EXIT_OK


# verification suites: each yields (name, passed, worst, detail)


def _verify_hierarchy(n, seed, half):
    rng = np.random.default_rng(seed)
    w = Window.symmetric(half)
    worst, bad = math.inf, None
    for s in rng.integers(0, 2**63 - 1, n):
        rep = measures.hierarchy(moments(random_state(int(s), w)))
        slack = min(rep.slacks)
        if slack < worst:
            worst, bad = slack, f"state seed {int(s)}"
    yield "hierarchy pure", worst >= -measures.ORDER_SLACK, worst, bad
    worst, bad = math.inf, None
    for s in rng.integers(0, 2**63 - 1, max(n // 10, 1)):
        sub = np.random.default_rng(int(s))
        p = float(sub.uniform())
        a = random_state(int(sub.integers(2**62)), w)
        b = random_state(int(sub.integers(2**62)), w)
        rep = measures.hierarchy(moments(Ensemble.mixture(p, a, b)))
        slack = min(rep.slacks)
        if slack < worst:
            worst, bad = slack, f"mixture seed {int(s)}"
    yield "hierarchy mixtures", worst >= -measures.ORDER_SLACK, worst, bad


def _verify_saturation(n, seed, half):
    defect, spread = 0.0, 0.0
    for kappa in np.geomspace(0.1, 50.0, 50):
        m = moments(von_mises_state(0, 0.0, kappa))
        alpha = -float(np.angle(m.mean_e))
        mean_c, var = measures.rotated_moments(m, alpha)
        defect = max(defect, abs(m.var_l * var - 0.25 * mean_c**2))
        vals = (measures.gamma_pm(m)[0], measures.measure_mean_axis(m), measures.measure_optimal_axis(m))
        spread = max(spread, max(vals) - min(vals))
    yield "robertson saturation", defect <= 1e-9, defect, None
    yield "measures coincide", spread <= 1e-10, spread, None


def _verify_inertia(n, seed, half):
    rng = np.random.default_rng(seed)
    w = Window.symmetric(half)
    worst = 0.0
    for s in rng.integers(0, 2**63 - 1, n):
        m = moments(random_state(int(s), w))
        io_, ig = measures.inertia_tensor(m, "origin"), measures.inertia_tensor(m)
        shift = measures.parallel_axis_shift(measures.center_of_mass(m))
        axis = measures.Axis(float(rng.uniform(0, math.pi)), float(rng.uniform(-math.pi, math.pi)))
        forms = [measures.moment_about_axis(m, axis, f) for f in ("sum", "deficit", "tensor")]
        worst = max(worst, float(np.max(np.abs(io_ - ig - shift))), max(forms) - min(forms))
    yield "parallel axis and axis forms", worst <= 1e-13, worst, None
    m1 = moments(von_mises_state(0, 0.0, 5.0))
    m2 = moments(von_mises_state(0, 2 * math.pi / 5, 5.0))
    residual, slack = measures.mixture_composition_check(0.4, m1, m2)
    yield "mixture composition", residual <= 1e-13, residual, None
    yield "mixture concavity", slack >= -1e-12, slack, None


def _verify_povm(n, seed, half):
    dev = povm_deviation(von_mises_state(0, 0.0, 5.0, Window.symmetric(60)), Window.symmetric(20))
    yield "povm completeness", dev <= 1e-12, dev, None


SUITES = {
    "hierarchy": _verify_hierarchy,
    "saturation": _verify_saturation,
    "inertia": _verify_inertia,
    "povm": _verify_povm,
}


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        for prop, passed, worst, detail in SUITES[name](args.n, args.seed, args.window):
            ok &= bool(passed)
            line = f"{'PASS' if passed else 'FAIL'} {prop}: worst {fmt(worst)}"
            if detail and not passed:
                line += f" ({detail})"
            print(line)
    return EXIT_OK if ok else EXIT_VIOLATION


# state descriptors


def _take(tokens, k, what):
    if len(tokens) < k:
        raise UsageError(f"{what} needs {k} values")
    vals, rest = tokens[:k], tokens[k:]
    try:
        return [float(v) for v in vals], rest
    except ValueError:
        raise UsageError(f"{what} expects numbers, got {vals}") from None


def _parse(tokens, window):
    """Consume one descriptor from ``tokens``; returns ``(source, rest, parts)``."""
    if not tokens or ":" not in tokens[0]:
        raise UsageError(f"expected a descriptor, got {tokens[:1]}")
    kind, first = tokens[0].split(":", 1)
    tokens = [first] + tokens[1:]
    if kind == "vonmises":
        (m, alpha, kappa), rest = _take(tokens, 3, "vonmises")
        if m != int(m):
            raise UsageError("vonmises mean momentum must be an integer")
        return von_mises_state(int(m), alpha, kappa, window), rest, None
    if kind == "momentum":
        (l,), rest = _take(tokens, 1, "momentum")
        if l != int(l):
            raise UsageError("momentum must be an integer")
        return momentum_eigenstate(int(l), window or Window.symmetric(max(abs(int(l)), 1))), rest, None
    if kind == "mathieu":
        (q,), rest = _take(tokens, 1, "mathieu")
        return spectral.mathieu_ground(q, window).state, rest, None
    if kind == "file":
        path, rest = tokens[0], tokens[1:]
        try:
            with open(path) as fh:
                return state_from_dict(json.load(fh)), rest, None
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read state file {path!r}: {exc}") from None
    if kind == "mix":
        (p,), rest = _take(tokens, 1, "mix")
        a, rest, _ = _parse(rest, window)
        b, rest, _ = _parse(rest, window)
        if not 0.0 <= p <= 1.0:
            raise UsageError("mixture weight must lie in [0, 1]")
        return _mixture(p, a, b), rest, (p, a, b)
    raise UsageError(f"unknown descriptor kind {kind!r}")


def _mixture(p, a, b):
    if isinstance(a, Ensemble) or isinstance(b, Ensemble):
        comps = []
        for w, src in ((p, a), (1 - p, b)):
            items = src.components if isinstance(src, Ensemble) else ((1.0, src),)
            comps.extend((w * wi, s) for wi, s in items)
        return Ensemble(tuple(comps))
    return Ensemble.mixture(p, a, b)


def parse_descriptor(text, window=None):
    tokens = [t.strip() for t in text.split(",")]
    source, rest, parts = _parse(tokens, window)
    if rest:
        raise UsageError(f"unexpected trailing values {rest}")
    return source, parts


def state_report(source, parts=None):
    m = moments(source)
    gp, gm = measures.gamma_pm(m)
    rep = measures.hierarchy(m)
    opt = measures.optimal_axis(m)
    doc = {
        "moments": {
            "mean_l": m.mean_l,
            "var_l": m.var_l,
            "mean_e": [m.mean_e.real, m.mean_e.imag],
            "mean_e2": [m.mean_e2.real, m.mean_e2.imag],
        },
        "dispersion_sq": rep.dispersion,
        "gamma_plus": gp,
        "gamma_minus": gm,
        "mean_axis": rep.mean_axis,
        "optimal_axis": rep.optimal_axis,
        "optimal_axis_vector": opt.vector.tolist(),
        "ordered": rep.ordered,
        "degenerate": rep.degenerate,
        "center_of_mass": measures.center_of_mass(m).tolist(),
        "inertia_origin": measures.inertia_tensor(m, "origin").tolist(),
        "inertia_center_of_mass": measures.inertia_tensor(m).tolist(),
    }
    if isinstance(source, PureState):
        doc["window"] = [source.window.l_min, source.window.l_max]
        doc["tail_mass"] = source.tail_mass
    if parts is not None:
        p, a, b = parts
        residual, slack = measures.mixture_composition_check(p, moments(a), moments(b))
        doc["composition_residual"] = residual
        doc["concavity_slack"] = slack
    return doc


def _text_report(doc):
    lines = []
    for key, val in doc.items():
        if isinstance(val, dict):
            val = ", ".join(f"{k}={_fmt_nested(v)}" for k, v in val.items())
        else:
            val = _fmt_nested(val)
        lines.append(f"{key}: {val}")
    return "\n".join(lines) + "\n"


def _fmt_nested(v):
    if isinstance(v, list):
        return "[" + ", ".join(_fmt_nested(x) for x in v) + "]"
    return fmt(v)


def cmd_state(args):
    window = Window.symmetric(args.window) if args.window else None
    source, parts = parse_descriptor(args.descriptor, window)
    doc = state_report(source, parts)
    text = json.dumps(doc, indent=1) + "\n" if args.format == "json" else _text_report(doc)
    emit(text, args.out)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="rotorlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_default="csv"):
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        p.add_argument("--linear", action="store_true", help="linear grid spacing even when lo > 0")

    p = sub.add_parser("curve", help="single-rotor bound curves")
    p.add_argument("kind", choices=("mathieu", "vonmises"))
    p.add_argument("--q", default="1e-3:1e3:200", help="Mathieu grid lo:hi:n")
    p.add_argument("--kappa", default="1e-3:1e3:200", help="von Mises grid lo:hi:n")
    p.add_argument("--compare", action="store_true", help="add equal-dispersion von Mises partner and infidelity")
    common(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("joint", help="joint-measurement bounds and critical points")
    p.add_argument("mode", choices=joint.MODES)
    p.add_argument("--grid", help="ancilla grid lo:hi:n")
    p.add_argument("--family", choices=joint.FAMILIES)
    p.add_argument("--signal-family", choices=joint.FAMILIES)
    p.add_argument("--minimum", action="store_true", help="also minimise the product over the signal")
    p.add_argument("--critical-out", help="critical-point file (default: <out>_critical)")
    common(p)
    p.set_defaults(func=cmd_joint)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite", choices=(*SUITES, "all"))
    p.add_argument("--n", type=int, default=1000, help="sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, default=32, help="half-width of random-state windows")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("state", help="report moments and measures of one state")
    p.add_argument("descriptor", help="vonmises:m,alpha,kappa | momentum:l | mix:p,D1,D2 | mathieu:q | file:path")
    p.add_argument("--window", type=int, help="half-width of the starting window")
    p.add_argument("--out")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_state)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", 1) < 1:
        parser.error("--n must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rotorlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BracketError as exc:
        print(f"rotorlab: {exc}", file=sys.stderr)
        for x, y in exc.scan:
            print(f"  scan {fmt(x)} {fmt(y)}", file=sys.stderr)
        return EXIT_NUMERIC
    except RotorError as exc:
        print(f"rotorlab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
