"""Command-line front end.

Every command accepts ``--format {text,json,csv}``, ``--output PATH`` and
``--seed N``.  Exit codes: 0 success, 1 a check failed (verification
failure, pathological cross, tabulated formula disagreement, match found),
2 bad usage or unreadable input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import checks, oracle
from .cross_algebra import (
    CrossMatrix, Filter, canonical_form, classify, covers_x_n1, enumerate_crosses,
    format_matrix, full_columns, parse_matrix, reduce, row_text,
)
from .envelope import (
    RULE_SETS, Closed, as_closed, build_envelope, closing_pivots, describe, flatten,
    nine_cases,
)
from .errors import ConvergenceError, CrossError, DomainError, PathologicalCrossError
from .hexpr import evaluate, parse as parse_expr, to_text
from .radial import RadialModel, h_vector, load_model, read_radii_csv

STANDARD_FILTERS = (Filter.ANTICHAIN, Filter.COLUMN_COVERED, Filter.NOT_NK,
                    Filter.NO_FULL_COLUMN)


class UsageError(Exception):
    """Bad option combination or unreadable input; maps to exit code 2."""


class Result:
    """What a command produced: a JSON document plus text and CSV renderings."""

    def __init__(self, doc, text: str, table: list[list] | None = None, code: int = 0):
        self.doc = doc
        self.text = text
        self.table = table
        self.code = code

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.doc, indent=2, default=str) + "\n"
        if fmt == "csv":
            if self.table is None:
                raise UsageError("this command has no CSV form")
            buf = io.StringIO()
            csv.writer(buf, lineterminator="\n").writerows(self.table)
            return buf.getvalue()
        return self.text if self.text.endswith("\n") else self.text + "\n"


# --- input helpers ---------------------------------------------------------

def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_matrix(path: str) -> CrossMatrix:
    try:
        return parse_matrix(_read_text(path))
    except (ValueError, CrossError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _parse_h(text: str) -> list[Fraction]:
    try:
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse h values {text!r}") from None


# --- commands --------------------------------------------------------------

def cmd_reduce(args) -> Result:
    m = reduce(_read_matrix(args.matrix))
    return Result({"n": m.n_factors, "rows": [row_text(r) for r in m.rows]},
                  format_matrix(m), [[row_text(r)] for r in m.rows])


def cmd_classify(args) -> Result:
    m = reduce(_read_matrix(args.matrix))
    c = classify(m)
    canon, perm = canonical_form(m)
    doc = {"rows": [row_text(r) for r in m.rows], "class": c.kind, "label": c.label,
           "k": c.k, "split": None if c.split is None else c.split._asdict(),
           "covers_classical_cross": covers_x_n1(m),
           "full_columns": sorted(full_columns(m)),
           "canonical": [row_text(r) for r in canon.rows], "permutation": list(perm)}
    text = (f"class: {c.label}\ncovers classical cross: {doc['covers_classical_cross']}\n"
            f"full columns: {doc['full_columns']}\ncanonical: {' '.join(doc['canonical'])} "
            f"(columns {list(perm)})")
    return Result(doc, text, [["class", "k", "canonical"], [c.label, c.k, " ".join(doc["canonical"])]])


def cmd_check(args) -> Result:
    m = _read_matrix(args.matrix)
    reduced = reduce(m)
    ok = covers_x_n1(reduced)
    missing = [j + 1 for j in range(m.n_factors) if all(r[j] == 0 for r in reduced.rows)]
    if ok:
        msg = f"ok: the cross contains the classical {m.n_factors}-fold cross X_{{{m.n_factors},1}}"
    else:
        msg = (f"pathological: X_{{{m.n_factors},1}} is not contained in the cross; "
               f"column(s) {missing} carry no 1, so no envelope exists")
    doc = {"rows": [row_text(r) for r in reduced.rows], "contains_classical_cross": ok,
           "empty_columns": missing, "message": msg}
    return Result(doc, msg, [["contains_classical_cross", "empty_columns"],
                             [ok, " ".join(map(str, missing))]], 0 if ok else 1)


def cmd_envelope(args) -> Result:
    m = reduce(_read_matrix(args.matrix))
    try:
        d = build_envelope(m, pivot=args.pivot, rules=args.rules, certified=not args.uncertified)
    except PathologicalCrossError as exc:
        return Result({"error": str(exc)}, f"pathological: {exc}", None, 1)
    closed = as_closed(d)
    if closed is None:
        doc = {"closed": False, "tree": describe(d)}
        return Result(doc, describe(d), [["closed", "expr"], [False, ""]])
    doc = {"closed": True, "n": closed.n, "expr": to_text(closed.expr),
           "rules": list(closed.rules), "note": closed.note}
    if closed.note and args.format == "text":
        print(f"note: {closed.note}", file=sys.stderr)
    code = 1 if "disagrees" in closed.note else 0
    return Result(doc, to_text(closed.expr), [["expr", "rules", "note"],
                                              [doc["expr"], " ".join(closed.rules), closed.note]], code)


def cmd_enumerate(args) -> Result:
    filters = [Filter(f) for f in args.filter] if args.filter else list(STANDARD_FILTERS)
    if args.no_filters:
        filters = []
    out = enumerate_crosses(args.n, filters)
    nine = {canonical_form(c.matrix)[0]: c.name for c in nine_cases()} if args.n == 4 else {}
    items = []
    for m in out:
        label = classify(m).label if m.is_reduced() else "unreduced"
        items.append({"rows": [row_text(r) for r in m.rows], "class": label,
                      "nine_case": nine.get(m)})
    surplus = [it for it in items if args.n == 4 and it["nine_case"] is None]
    doc = {"n": args.n, "filters": [f.value for f in filters], "count": len(items),
           "matrices": items, "surplus": surplus}
    lines = [f"{' '.join(it['rows'])}  {it['class']}" + (f"  [{it['nine_case']}]" if it["nine_case"] else "")
             for it in items]
    lines.append(f"count: {len(items)}")
    table = [["rows", "class", "nine_case"]] + [[" ".join(it["rows"]), it["class"], it["nine_case"] or ""]
                                               for it in items]
    return Result(doc, "\n".join(lines), table)


def cmd_eval(args) -> Result:
    if args.matrix:
        m = reduce(_read_matrix(args.matrix))
        try:
            d = as_closed(build_envelope(m))
        except PathologicalCrossError as exc:
            return Result({"error": str(exc)}, f"pathological: {exc}", None, 1)
        if d is None:
            raise UsageError("the envelope of this matrix has no closed description")
        expr, n = d.expr, d.n
    else:
        try:
            expr = parse_expr(args.expr)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        n = None
    if args.h and (args.radii or args.model):
        raise UsageError("give either --h or --model with --radii, not both")
    points = []
    if args.h:
        points = [_parse_h(args.h)]
    elif args.radii:
        if not args.model:
            raise UsageError("--radii needs --model")
        model = _load_model(args.model)
        for radii in read_radii_csv(_read_text(args.radii)):
            try:
                hv = h_vector(model, radii)
            except DomainError as exc:
                raise UsageError(str(exc)) from None
            points.append([Fraction(float(x)) for x in hv])
    else:
        raise UsageError("eval needs --h or --model/--radii")
    # points from radii are floats already; show them as decimals
    fmt = (lambda x: f"{float(x):.12g}") if args.radii else str
    rows, docs = [["h", "value", "inside"]], []
    for h in points:
        if n is not None and len(h) != n:
            raise UsageError(f"{len(h)} values for a {n}-factor description")
        try:
            v = evaluate(expr, h)
        except (DomainError, CrossError) as exc:
            raise UsageError(str(exc)) from None
        docs.append({"h": [fmt(x) for x in h], "value": fmt(v), "inside": v < 1})
        rows.append([" ".join(map(fmt, h)), fmt(v), v < 1])
    text = "\n".join(f"{d['value']}  {'inside' if d['inside'] else 'outside'}" for d in docs)
    return Result({"expr": to_text(expr), "points": docs}, text, rows)


def cmd_nine(args) -> Result:
    items, table, failed = [], [["case", "rows", "tabulated", "recursion", "equal", "witness"]], 0
    for c in nine_cases():
        d = as_closed(build_envelope(c.matrix, certified=False))
        if d is None:
            cmp = None
            mine = None
        else:
            mine = to_text(d.expr)
            cmp = checks.desc_equal(Closed(4, c.expr), d, seed=args.seed)
        equal = bool(cmp and cmp.equal)
        failed += not equal
        wit = None if cmp is None or cmp.witness is None else [str(x) for x in cmp.witness]
        items.append({"case": c.name, "rows": [row_text(r) for r in c.matrix.rows],
                      "tabulated": c.text, "recursion": mine, "equal": equal, "witness": wit,
                      "rules": list(d.rules) if d else []})
        table.append([c.name, " ".join(items[-1]["rows"]), c.text, mine, equal,
                      " ".join(wit or [])])
    lines = [f"{it['case']}: {'Equal' if it['equal'] else 'Witness ' + str(it['witness'])}\n"
             f"  tabulated {it['tabulated']}\n  recursion {it['recursion']}" for it in items]
    return Result({"cases": items, "failures": failed}, "\n".join(lines), table, 1 if failed else 0)


def _closed_candidates(n: int = 4):
    out = []
    for m in enumerate_crosses(n, STANDARD_FILTERS):
        for p, d in sorted(closing_pivots(m).items()):
            out.append((f"{' '.join(row_text(r) for r in m.rows)} pivot h{p}", d.expr))
        d = as_closed(build_envelope(m, certified=False))
        if d is not None:
            out.append((f"{' '.join(row_text(r) for r in m.rows)}", d.expr))
    return out


def cmd_qtilde(args) -> Result:
    report = checks.qtilde_check(_closed_candidates(), permutations=not args.fixed_columns,
                                 seed=args.seed)
    doc = report.to_dict()
    text = (f"target {report.target}\ncandidates {report.candidates}\n"
            + ("no match" if not report.matches else "matches:\n  " + "\n  ".join(report.matches)))
    return Result(doc, text, [["target", "candidates", "matches"],
                              [report.target, report.candidates, len(report.matches)]],
                  1 if report.matches else 0)


def cmd_systems(args) -> Result:
    report = checks.systems_equiv_check(args.samples, args.seed)
    doc = report.to_dict()
    text = f"{report.samples} samples, {report.counterexamples} counterexamples"
    if report.first:
        text += f"; first at h=({','.join(report.first)})"
    return Result(doc, text, [["samples", "seed", "counterexamples"],
                              [report.samples, report.seed, report.counterexamples]],
                  1 if report.counterexamples else 0)


def _load_model(path: str) -> RadialModel:
    try:
        return load_model(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except (ValueError, CrossError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _verify_one(args, name: str):
    try:
        case = oracle.get_case(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    model = _load_model(args.model) if args.model else None
    pts = args.points or oracle.profile_points(args.profile, case.dim)
    try:
        return oracle.verify_identity(case, model, n_pts=pts, tolerance=args.tolerance,
                                      tol=args.tol, max_sweeps=args.max_sweeps,
                                      method=args.method, seed=args.seed, stencil=args.stencil,
                                      fit_boundary=not args.unfitted)
    except CrossError as exc:
        raise UsageError(str(exc)) from None


def _verify_line(r) -> str:
    return (f"{r.case}: max_dev {r.max_dev:.3g} tolerance {r.tolerance:g} "
            f"{'pass' if r.passed else 'FAIL'} ({r.sweeps} sweeps, {r.seconds:.2f} s)")


_VERIFY_HEADER = ["case", "max_dev", "tolerance", "pass", "sweeps", "residual", "seconds"]


def _verify_row(r) -> list:
    return [r.case, r.max_dev, r.tolerance, r.passed, r.sweeps, r.residual, r.seconds]


def cmd_verify(args) -> Result:
    try:
        report, sol = _verify_one(args, args.case)
    except ConvergenceError as exc:
        return Result({"case": args.case, "error": str(exc), "residual": exc.residual,
                       "sweeps": exc.sweeps}, f"{args.case}: {exc}", None, 1)
    if args.grid_csv:
        Path(args.grid_csv).write_text(sol.to_csv())
    return Result(report.to_dict(), _verify_line(report),
                  [_VERIFY_HEADER, _verify_row(report)], 0 if report.passed else 1)


def cmd_verify_all(args) -> Result:
    names = list(oracle.CATALOG) + (list(oracle.EXTRA_CASES) if args.extra else [])
    reports, lines, table, failed = [], [], [_VERIFY_HEADER], 0
    for name in names:
        try:
            r, _ = _verify_one(args, name)
        except ConvergenceError as exc:
            failed += 1
            lines.append(f"{name}: {exc}")
            reports.append({"case": name, "error": str(exc)})
            continue
        failed += not r.passed
        reports.append(r.to_dict())
        lines.append(_verify_line(r))
        table.append(_verify_row(r))
    lines.append(f"{len(names) - failed}/{len(names)} passed")
    return Result({"profile": args.profile, "reports": reports, "failures": failed},
                  "\n".join(lines), table, 1 if failed else 0)


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks (default 0)")

    p = argparse.ArgumentParser(prog="acrosses", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    for name, func, help_ in (("reduce", cmd_reduce, "drop dominated rows"),
                              ("classify", cmd_classify, "classify a matrix"),
                              ("check", cmd_check, "test the classical-cross inclusion")):
        add(name, func, help_).add_argument("matrix", help="matrix file, one 0/1 row per line")

    sp = add("envelope", cmd_envelope, "closed envelope description")
    sp.add_argument("matrix")
    sp.add_argument("--pivot", type=int)
    sp.add_argument("--rules", choices=RULE_SETS, default="exact")
    sp.add_argument("--uncertified", action="store_true",
                    help="skip the lookup of the nine tabulated formulas")

    sp = add("enumerate", cmd_enumerate, "canonical matrices up to column order")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--filter", action="append", choices=[f.value for f in Filter],
                    help="repeatable; default is the four standard filters")
    sp.add_argument("--no-filters", action="store_true")

    sp = add("eval", cmd_eval, "evaluate an expression or a matrix's envelope")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--expr")
    src.add_argument("--matrix")
    sp.add_argument("--h", help="comma-separated rationals, e.g. 1/2,0.3")
    sp.add_argument("--model", help="JSON/YAML model file")
    sp.add_argument("--radii", help="CSV of per-factor norms")

    add("nine", cmd_nine, "recursion against the nine tabulated formulas")

    sp = add("qtilde", cmd_qtilde, "search closed four-factor envelopes for the target set")
    sp.add_argument("--fixed-columns", action="store_true", help="do not permute columns")

    sp = add("systems", cmd_systems, "compare the two condition systems")
    sp.add_argument("--samples", type=int, default=100_000)

    for name, func in (("verify", cmd_verify), ("verify-all", cmd_verify_all)):
        sp = add(name, func, "grid oracle against closed forms")
        if name == "verify":
            sp.add_argument("case", help="e.g. 'PROP_CENTER(2,1)'")
            sp.add_argument("--grid-csv", help="write the grid solution as CSV")
        else:
            sp.add_argument("--extra", action="store_true", help="also run the extra cases")
        sp.add_argument("--profile", choices=sorted(oracle.PROFILES), default="desk")
        sp.add_argument("--points", type=int, help="points per axis (overrides the profile)")
        sp.add_argument("--tolerance", type=float, help="pass threshold on max deviation")
        sp.add_argument("--tol", type=float, default=oracle.DEFAULT_TOL, help="solver stop tolerance")
        sp.add_argument("--max-sweeps", type=int, default=oracle.DEFAULT_MAX_SWEEPS)
        sp.add_argument("--method", choices=("lines", "pointwise"), default="lines")
        sp.add_argument("--stencil", choices=oracle.STENCILS, default="wide")
        sp.add_argument("--unfitted", action="store_true",
                        help="do not anchor lines at the exact boundary crossing")
        sp.add_argument("--model", help="JSON/YAML model file")
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = args.func(args)
        out = result.render(args.format)
    except (UsageError, CrossError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        try:
            Path(args.output).write_text(out)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(out)
    return result.code


def main() -> None:
    sys.exit(run())
