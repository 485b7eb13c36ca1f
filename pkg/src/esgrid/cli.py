"""Command line front end: ``esgrid <command> ...``.

Exit codes: 0 success, 1 a property fails (a witness is printed), 2 usage or
parse error, 3 resource ceiling hit.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction

from esgrid import __version__
from esgrid.errors import (
    ESGridError,
    NotAbelianError,
    P1Error,
    P2Error,
    RelationFormatError,
    ResourceLimitError,
)
from esgrid.experiments import (
    GRID_KINDS,
    RelationSpec,
    fit_exponent,
    generate,
    loads_spec,
    rows_from_csv,
    rows_to_csv,
    sweep,
)
from esgrid.groups import load_group, verify_group_axioms, invariant_factors
from esgrid.incidence import (
    catalog_entry,
    catalog_settings,
    exponent_catalog,
    fmt_rational,
    kst_bound,
    st_exponents,
    theorem_d_bound,
)
from esgrid.reconstruct import TernaryClashError, reconstruct_group, reconstruct_ternary
from esgrid.relation import (
    check_p1,
    check_p2,
    check_p2_all,
    count_on_grid,
    dumps,
    fiber_degree,
    load_grid,
    load_relation,
    star_transform,
)

EXIT_OK, EXIT_WITNESS, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
JSON_FIRST = ("bound", "gamma")


class Outcome(Exception):
    """Carries a finished report and its exit code out of a command."""

    def __init__(self, code: int, report: dict, text: str):
        self.code, self.report, self.text = code, report, text


class _Inputs:
    """Reads input files (``-`` is stdin) and remembers their digests."""

    def __init__(self):
        self.digests: dict = {}

    def read(self, path: str) -> bytes:
        if path == "-":
            data = sys.stdin.buffer.read()
        else:
            with open(path, "rb") as fh:
                data = fh.read()
        self.digests[path] = "sha256:" + hashlib.sha256(data).hexdigest()
        return data

    def text(self, path: str) -> str:
        return self.read(path).decode("utf-8")


def _ints(raw: str, what: str) -> list:
    try:
        return [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be comma-separated integers") from None


def _basepoint(raw):
    return _ints(raw, "--basepoint")


def _pair(raw):
    vals = _ints(raw, "--pair")
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("--pair takes exactly two coordinates i,j")
    return vals


def _rational(raw):
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {raw!r}") from None


# --- commands ----------------------------------------------------------------

def cmd_check(args, inp):
    q = load_relation(inp.read(args.relation))
    p1 = check_p1(q)
    degree = max(fiber_degree(q, i) for i in range(q.arity))
    report = {"arity": q.arity, "sizes": list(q.sizes), "tuples": len(q),
              "degree": degree, "p1": p1.to_dict()}
    if q.arity >= 3:
        if args.pair:
            i, j = args.pair
            w = check_p2(q, i, j)
            p2 = {"ok": w is None, "pairs": [{"pair": sorted([i, j]), "ok": w is None,
                                              "witness": w.to_dict() if w else None}]}
        else:
            p2 = check_p2_all(q).to_dict()
        report["p2"] = p2
    if p1.ok:
        p1_text = "P1: pass"
    else:
        bad = next(c for c in p1.coordinates if not c.ok)
        p1_text = (f"P1: fail (coordinate {bad.coordinate}, prefix {list(bad.prefix)}, "
                   f"{bad.completions} completions)")
    if "p2" in report:
        pairs = report["p2"]["pairs"]
        failing = [e for e in pairs if not e["ok"]]
        p2_text = (f"P2: pass ({len(pairs)} pairs)" if not failing
                   else f"P2: fail ({len(failing)} of {len(pairs)} pairs)")
    else:
        p2_text = "P2: n/a (arity 2)"
    text = f"{p1_text}, {p2_text}, degree {degree}"
    ok = p1.ok and report.get("p2", {"ok": True})["ok"]
    if not ok:
        if "p2" in report and not report["p2"]["ok"]:
            w = next(e for e in report["p2"]["pairs"] if not e["ok"])["witness"]
            report["witness"] = {"kind": "p2", **w}
        else:
            bad = next(c for c in p1.to_dict()["coordinates"] if not c["ok"])
            report["witness"] = {"kind": "p1", **bad}
        text += "\nwitness " + json.dumps(report["witness"])
    raise Outcome(EXIT_OK if ok else EXIT_WITNESS, report, text)


def cmd_star(args, inp):
    q = load_relation(inp.read(args.relation))
    qs = star_transform(q)
    raise Outcome(EXIT_OK, {"relation": dumps(qs)}, dumps(qs).rstrip("\n"))


def cmd_reconstruct(args, inp):
    q = load_relation(inp.read(args.relation))
    try:
        if q.arity == 3:
            corr = reconstruct_ternary(q, args.basepoint)
        else:
            corr = reconstruct_group(q, args.basepoint)
    except P1Error as exc:
        bad = next(c for c in exc.report.to_dict()["coordinates"] if not c["ok"])
        w = {"kind": "p1", **bad}
        raise Outcome(EXIT_WITNESS, {"error": str(exc), "witness": w},
                      f"{exc}\nwitness {json.dumps(w)}") from None
    except P2Error as exc:
        w = {"kind": "p2", **exc.witness.to_dict()}
        raise Outcome(EXIT_WITNESS, {"error": str(exc), "witness": w},
                      f"{exc}\nwitness {json.dumps(w)}") from None
    except TernaryClashError as exc:
        w = {"kind": "clash", "tuples": [list(t) for t in exc.tuples]}
        raise Outcome(EXIT_WITNESS, {"error": str(exc), "witness": w},
                      f"{exc}\nwitness {json.dumps(w)}") from None
    raise Outcome(EXIT_OK, {"correspondence": corr.to_dict()}, corr.dumps().rstrip("\n"))


def cmd_classify(args, inp):
    g = load_group(inp.read(args.group))
    axioms = verify_group_axioms(g)
    report = {"order": g.order, "axioms": axioms.to_dict()}
    if not axioms.is_abelian:
        name, counterexample = axioms.first_failure()
        w = {"axiom": name, "counterexample": list(counterexample)}
        report["witness"] = w
        raise Outcome(EXIT_WITNESS, report, f"not an abelian group: {name} fails at "
                      f"{list(counterexample)}\nwitness {json.dumps(w)}")
    factors = invariant_factors(g)
    report["invariant_factors"] = factors
    name = " x ".join(f"Z{f}" for f in factors) or "trivial"
    raise Outcome(EXIT_OK, report, f"invariant factors: {' '.join(map(str, factors))} ({name})")


def cmd_count(args, inp):
    q = load_relation(inp.read(args.relation))
    grid = load_grid(inp.read(args.grid))
    count = count_on_grid(q, grid)
    raise Outcome(EXIT_OK, {"count": count, "grid_sizes": list(grid.part_sizes())}, str(count))


def cmd_bound(args, inp):
    if args.kind == "kst":
        value = kst_bound(args.m, args.n, args.d, args.nu)
        report = {"kind": "kst", "m": args.m, "n": args.n, "d": args.d, "nu": args.nu,
                  "bound": value}
    else:
        if args.t is None or args.C is None:
            raise argparse.ArgumentTypeError("--kind incidence needs --t and --C")
        exps = st_exponents(args.d, args.t)
        value = theorem_d_bound(args.m, args.n, exps, args.nu, args.C)
        report = {"kind": "incidence", "m": args.m, "n": args.n, "nu": args.nu, "C": args.C,
                  "exponents": exps.to_dict(), "bound": value}
    raise Outcome(EXIT_OK, report, repr(value))


def cmd_gamma(args, inp):
    exps = st_exponents(args.d, args.t)
    report = {"gamma1": fmt_rational(exps.gamma1), "gamma2": fmt_rational(exps.gamma2),
              "gamma": fmt_rational(exps.gamma)}
    raise Outcome(EXIT_OK, report, json.dumps(report))


def cmd_catalog(args, inp):
    if args.setting:
        params = {}
        for item in args.param or []:
            key, _, val = item.partition("=")
            try:
                params[key] = int(val)
            except ValueError:
                raise argparse.ArgumentTypeError(f"--param needs key=int, got {item!r}") from None
        entries = [catalog_entry(args.setting, **params)]
    else:
        entries = exponent_catalog(args.max_param)
    rows = [e.to_dict() for e in entries]
    lines = ["setting\tparameters\tgamma\tstatus\tformula\tsource"]
    for r in rows:
        params = ",".join(f"{k}={v}" for k, v in r["parameters"].items()) or "-"
        lines.append("\t".join([r["setting"], params, r["gamma"] or "-", r["status"],
                                r["formula"], r["source"]]))
    raise Outcome(EXIT_OK, {"entries": rows}, "\n".join(lines))


def _spec(args, inp) -> RelationSpec:
    return loads_spec(inp.text(args.spec))


def cmd_generate(args, inp):
    spec = _spec(args, inp)
    if args.seed is not None:
        if "seed" not in spec.params:
            raise ValueError(f"spec kind {spec.kind} has no seed")
        spec = RelationSpec(spec.kind, {**spec.params, "seed": args.seed})
    q = generate(spec.at(args.n), args.max_tuples)
    raise Outcome(EXIT_OK, {"spec_id": spec.spec_id, "relation": dumps(q)},
                  dumps(q).rstrip("\n"))


def cmd_sweep(args, inp):
    spec = _spec(args, inp)
    rows = sweep(spec, args.ns, args.grid, args.trials, args.seed, args.max_tuples,
                 timing=not args.no_timing)
    csv_text = rows_to_csv(rows)
    raise Outcome(EXIT_OK, {"csv": csv_text}, csv_text.rstrip("\n"))


def cmd_fit(args, inp):
    rows = rows_from_csv(inp.text(args.csv))
    fit = fit_exponent(rows)
    raise Outcome(EXIT_OK, fit.to_dict(), json.dumps(fit.to_dict()))


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=None,
                        help="output format (default: json for bound and gamma, else text)")
    parser = argparse.ArgumentParser(
        prog="esgrid", description="Latin hypercubes, abelian group reconstruction, "
        "incidence exponents and grid-count experiments.")
    parser.add_argument("--version", action="version", version=f"esgrid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("check", parents=[common], help="check P1, P2 and fiber degree")
    p.add_argument("relation", help="relation file or - for stdin")
    p.add_argument("--pair", type=_pair, help="only test P2 for coordinates i,j")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("star", parents=[common], help="star transform of a ternary relation")
    p.add_argument("relation")
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("reconstruct", parents=[common],
                       help="reconstruct the group and coordinate maps")
    p.add_argument("relation")
    p.add_argument("--basepoint", type=_basepoint, help="basepoint tuple i1,...,is")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("classify", parents=[common], help="invariant factors of a group table")
    p.add_argument("group", help="#group v1 file or -")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("count", parents=[common], help="count a relation on a grid")
    p.add_argument("relation")
    p.add_argument("grid", help="#grid v1 file")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bound", parents=[common], help="evaluate an incidence bound")
    p.add_argument("--kind", choices=("kst", "incidence"), default="kst")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--nu", type=int, default=2)
    p.add_argument("--t", type=_rational, help="cell decomposition exponent (incidence kind)")
    p.add_argument("--C", type=float, help="constant supplied by the caller (incidence kind)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("gamma", parents=[common], help="exact incidence exponents")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=_rational, required=True)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("catalog", parents=[common], help="published exponent table (TSV or JSON)")
    p.add_argument("--setting", choices=catalog_settings())
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--max-param", type=int, default=10)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("generate", parents=[common], help="build a relation from a #spec v1 file")
    p.add_argument("spec")
    p.add_argument("--n", type=int, help="value for the size token n")
    p.add_argument("--max-tuples", type=int)
    p.add_argument("--seed", type=int, help="override the seed stored in the spec file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", parents=[common], help="count-vs-n sweep, CSV output")
    p.add_argument("spec")
    p.add_argument("--ns", type=lambda r: _ints(r, "--ns"), required=True,
                   help="increasing n values, e.g. 4,8,16")
    p.add_argument("--grid", choices=GRID_KINDS, default="full")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-tuples", type=int)
    p.add_argument("--no-timing", action="store_true", help="write micros=0 for reproducible CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", parents=[common], help="log-log slope of a sweep CSV")
    p.add_argument("csv")
    p.set_defaults(func=cmd_fit)
    return parser


def _emit(args, inp, outcome: Outcome, stdout, stderr):
    meta = {"tool": "esgrid", "version": __version__, "command": args.command,
            "inputs": dict(inp.digests)}
    if args.format == "json":
        stdout.write(json.dumps({"meta": meta, "exit_code": outcome.code, **outcome.report},
                                sort_keys=True) + "\n")
    else:
        stdout.write(outcome.text + "\n")
        digests = " ".join(f"{k}={v}" for k, v in meta["inputs"].items())
        stderr.write(f"esgrid {__version__} {args.command} {digests}".rstrip() + "\n")


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.format is None:
        args.format = "json" if args.command in JSON_FIRST else "text"
    inp = _Inputs()
    try:
        args.func(args, inp)
    except Outcome as outcome:
        _emit(args, inp, outcome, stdout, stderr)
        return outcome.code
    except ResourceLimitError as exc:
        stderr.write(f"esgrid: resource limit: {exc}\n")
        return EXIT_RESOURCE
    except (RelationFormatError, NotAbelianError, OSError, ValueError, KeyError,
            argparse.ArgumentTypeError, ESGridError, UnicodeDecodeError) as exc:
        stderr.write(f"esgrid: error: {exc}\n")
        return EXIT_USAGE
    raise AssertionError("command finished without an outcome")


if __name__ == "__main__":
    sys.exit(main())
