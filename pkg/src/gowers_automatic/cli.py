"""Command line front end.

    gowers-auto norm --seq tm --s 2 --n 1024
    gowers-auto graph --seq rs --s 2 --out dot
    gowers-auto aps --seq tm --k 3 --n-ladder 256,512,1024 --csv

Reports go to stdout (JSON by default), diagnostics to stderr. Exit codes:
0 success, 1 usage error, 2 work budget or vertex cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from . import __version__
from .applications import (BudgetExceeded, ap_count, conjecture_scan, exp_sum, fit_power_law,
                           progression_sum, self_correlation_scan, two_column_data)
from .gowers import (DEFAULT_WORK_BUDGET, MAX_ORDER, CubeSpec, WorkBudgetExceeded, cube_average,
                     recursion_residual, sequence_norm)
from .seqcore import KernelTooLarge, get_sequence
from .spectral import DimensionTooLarge, spectral_gap
from .walk import (DEFAULT_VERTEX_CAP, CapExceeded, analyze_graph, build_graph, to_dot,
                   to_json, transition_matrix)

__all__ = ["Command", "UsageError", "parse", "execute", "main"]

COMMANDS = ("norm", "cube-avg", "graph", "spectrum", "aps", "expsum", "corr", "selfcorr",
            "scan-conjecture")
MAX_WALK_ORDER = 5


class UsageError(ValueError):
    pass


@dataclass
class Command:
    name: str
    options: dict = field(default_factory=dict)
    output: str = "json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _window(text):
    vals = _int_list(text)
    if len(vals) != 2 or not 0 <= vals[0] < vals[1]:
        raise argparse.ArgumentTypeError("fit window must be LO,HI with 0 <= LO < HI")
    return tuple(vals)


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _build_parser():
    parser = _Parser(prog="gowers-auto", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    common.add_argument("--out", choices=("json", "csv", "dot"), default=None)
    common.add_argument("--work-budget", type=_positive, default=DEFAULT_WORK_BUDGET)
    common.add_argument("--threads", type=_positive, default=1,
                        help="maximum concurrent workers for enumeration")
    common.add_argument("--data", metavar="PATH",
                        help="also write two-column (N, value) data for a sweep")

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = add("norm", "Gowers norm of a sequence on [0, N)")
    p.add_argument("--seq", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--n", type=_positive)
    p.add_argument("--n-ladder", type=_int_list)
    p.add_argument("--method", choices=("nested", "brute", "dyadic"), default="nested")

    p = add("cube-avg", "generalised cube average A(L, a, r)")
    p.add_argument("--seq", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--offsets", type=_int_list)
    p.add_argument("--labels", help="comma-separated kernel element names or indices")
    p.add_argument("--residual", action="store_true", help="also report the one-step recursion residual")

    p = add("graph", "signed walk graph and its structural properties")
    p.add_argument("--seq", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--vertex-cap", type=_positive, default=DEFAULT_VERTEX_CAP)

    p = add("spectrum", "spectral gap and signed discrepancy decay")
    p.add_argument("--seq", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--vertex-cap", type=_positive, default=DEFAULT_VERTEX_CAP)
    p.add_argument("--fit-window", type=_window, default=(10, 30))

    p = add("aps", "k-term progressions in {a = +1}")
    p.add_argument("--seq", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=_positive)
    p.add_argument("--n-ladder", type=_int_list)

    p = add("expsum", "grid maximum of the exponential sum")
    p.add_argument("--seq", required=True)
    p.add_argument("--n", type=_positive)
    p.add_argument("--n-ladder", type=_int_list)
    p.add_argument("--grid", type=_positive, help="grid size (default 8N, must be >= 4N)")
    p.add_argument("--exponent", type=float)

    p = add("corr", "sum of a(qn + b) for n < M")
    p.add_argument("--seq", required=True)
    p.add_argument("--a", type=_positive, required=True)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--m", type=int, required=True)

    p = add("selfcorr", "largest |sum_{n<M} a(n) a(n+h)|")
    p.add_argument("--seq", required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--h-max", type=_positive)

    p = add("scan-conjecture", "evidence table for pattern-counting sequences")
    p.add_argument("--patterns", required=True, help="comma-separated binary words")
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--n", type=_positive, default=1 << 12)
    p.add_argument("--q-max", type=_positive, default=8)
    p.add_argument("--vertex-cap", type=_positive, default=200_000)
    return parser


def parse(argv) -> Command:
    """Validate argv into a Command; raises UsageError on any problem."""
    args = vars(_build_parser().parse_args(list(argv)))
    name = args.pop("command")
    if name is None:
        raise UsageError(f"missing command (one of {', '.join(COMMANDS)})")
    as_csv = args.pop("csv")
    sweep = args.get("n_ladder") is not None
    out = args.pop("out") or ("csv" if as_csv or sweep else "json")
    if out == "dot" and name != "graph":
        raise UsageError("--out dot is only available for the graph command")

    if "seq" in args:
        try:
            get_sequence(args["seq"])
        except ValueError as exc:
            raise UsageError(str(exc))
    s = args.get("s")
    if s is not None:
        lo, hi = (2, MAX_WALK_ORDER) if name in ("graph", "spectrum", "scan-conjecture") else (1, MAX_ORDER)
        if not lo <= s <= hi:
            raise UsageError(f"s out of supported range ({lo}..{hi})")
    if name in ("norm", "aps", "expsum"):
        if (args.get("n") is None) == (args.get("n_ladder") is None):
            raise UsageError("give exactly one of --n and --n-ladder")
        if args.get("n_ladder") is not None and min(args["n_ladder"], default=0) < 1:
            raise UsageError("--n-ladder values must be positive")
    if name == "aps" and args["k"] < 3:
        raise UsageError("--k must be at least 3")
    if name == "cube-avg" and args["L"] < 0:
        raise UsageError("--L must be nonnegative")
    if name == "corr" and (args["b"] < 0 or args["m"] < 0):
        raise UsageError("--b and --m must be nonnegative")
    if name == "scan-conjecture":
        pats = [p for p in args["patterns"].split(",") if p]
        try:
            for p in pats:
                get_sequence(p if p in ("tm", "rs") or ":" in p else "pattern:" + p)
        except ValueError as exc:
            raise UsageError(str(exc))
        args["patterns"] = pats
    return Command(name, args, out)


def _ladder(opts):
    return opts["n_ladder"] if opts.get("n_ladder") is not None else [opts["n"]]


def _resolve_labels(seq, text, s):
    if text is None:
        return None
    names = {str(q): i for i, q in enumerate(seq.states)}
    labels = []
    for tok in text.split(","):
        if tok in names:
            labels.append(names[tok])
        elif tok.isdigit() and int(tok) < len(seq.states):
            labels.append(int(tok))
        else:
            raise UsageError(f"unknown kernel element {tok!r}; known: {', '.join(names)}")
    if len(labels) != 1 << s:
        raise UsageError(f"need {1 << s} labels for s={s}")
    return tuple(labels)


def _run(cmd: Command):
    """Return (rows, extra) where rows is a list of report dicts."""
    o = cmd.options
    name = cmd.name
    if name == "norm":
        rows = [sequence_norm(o["seq"], o["s"], n, method=o["method"], workers=o["threads"],
                              work_budget=o["work_budget"]).to_dict() for n in _ladder(o)]
        return rows
    if name == "cube-avg":
        seq = get_sequence(o["seq"])
        s = o["s"]
        offsets = o["offsets"]
        if offsets is not None and len(offsets) != 1 << s:
            raise UsageError(f"need {1 << s} offsets for s={s}")
        spec = CubeSpec(s, o["L"], tuple(offsets) if offsets else None,
                        _resolve_labels(seq, o["labels"], s))
        avg = cube_average(seq, spec, workers=o["threads"], work_budget=o["work_budget"])
        row = {"seq": seq.name, "s": s, "L": o["L"], "num": avg.numerator,
               "den": avg.denominator, "value": avg.real_value}
        if o["residual"]:
            if o["L"] < 1:
                raise UsageError("--residual needs L >= 1")
            row["residual"] = recursion_residual(seq, spec, work_budget=o["work_budget"])
        return [row]
    if name in ("graph", "spectrum"):
        g = build_graph(o["seq"], o["s"], cap=o["vertex_cap"])
        if name == "graph":
            if cmd.output == "dot":
                return to_dot(g)
            row = {"seq": g.seq.name, "s": g.s}
            row.update(analyze_graph(g).to_dict())
            if cmd.output == "json":
                row.update(json.loads(to_json(g)))
            return [row]
        est = spectral_gap(transition_matrix(g), o["s"], fit_window=o["fit_window"])
        row = {"seq": g.seq.name, "s": g.s}
        row.update(est.to_dict())
        return [row]
    if name == "aps":
        rows = [ap_count(o["seq"], n, o["k"], work_budget=o["work_budget"]).to_dict()
                for n in _ladder(o)]
        _attach_fit(rows, "deviation")
        return rows
    if name == "expsum":
        rows = []
        for n in _ladder(o):
            if o["grid"] is not None and o["grid"] < 4 * n:
                raise UsageError("--grid must be at least 4N")
            rows.append(exp_sum(o["seq"], n, o["grid"], o["exponent"]).to_dict())
        return rows
    if name == "corr":
        val = progression_sum(o["seq"], o["a"], o["b"], o["m"])
        return [{"seq": get_sequence(o["seq"]).name, "a": o["a"], "b": o["b"], "M": o["m"], "value": val}]
    if name == "selfcorr":
        h_max = o["h_max"] or max(o["n"] - 1, 1)
        best = self_correlation_scan(o["seq"], o["n"], h_max)
        return [{"seq": get_sequence(o["seq"]).name, "N": o["n"], "h_max": h_max,
                 "M": best.M, "h": best.h, "value": best.value}]
    if name == "scan-conjecture":
        return conjecture_scan(o["patterns"], s=o["s"], N=o["n"], q_max=o["q_max"],
                               vertex_cap=o["vertex_cap"])
    raise UsageError(f"unknown command {name!r}")


_SWEEP_VALUE = {"norm": "norm", "aps": "deviation", "expsum": "normalized"}


def _attach_fit(rows, key):
    pts = [(r["N"], abs(r[key])) for r in rows if r[key] != 0]
    if len(pts) >= 2:
        beta, _ = fit_power_law(*zip(*pts))
        for r in rows:
            r["fit_exponent"] = beta


def _emit(rows, cmd: Command, stream):
    base = {"tool_version": __version__, "seq": cmd.options.get("seq"), "s": cmd.options.get("s")}
    stamped = []
    for r in rows:
        d = dict(base)
        d.update(r)
        stamped.append(d)
    if cmd.output == "csv":
        fields = []
        for r in stamped:
            fields += [k for k in r if k not in fields]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for r in stamped:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                             for k, v in r.items()})
        stream.write(buf.getvalue())
    else:
        for r in stamped:
            stream.write(json.dumps(r) + "\n")


def execute(cmd: Command, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        result = _run(cmd)
    except UsageError as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    except (WorkBudgetExceeded, BudgetExceeded, CapExceeded, KernelTooLarge, DimensionTooLarge) as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    if isinstance(result, str):
        stdout.write(result)
        return 0
    _emit(result, cmd, stdout)
    path = cmd.options.get("data")
    if path:
        key = _SWEEP_VALUE.get(cmd.name)
        if key is None:
            stderr.write(f"warning: --data ignored for {cmd.name}\n")
        else:
            with open(path, "w") as fh:
                fh.write(two_column_data([r["N"] for r in result], [r[key] for r in result]))
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse(argv)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    return execute(cmd)


if __name__ == "__main__":
    sys.exit(main())
