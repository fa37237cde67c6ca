"""Command-line front end: build, compute, verify and export as JSON or CSV.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import compact, decimation, dos, gaps, oracle
from .graph import GraphError, build_graph
from .jacobi import ConvergenceError

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_CONVERGENCE = 0, 1, 2, 3

# dense diagonalization beyond this level is too slow to be part of a routine run
ORACLE_MAX_LEVEL = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def rational(x: Fraction) -> dict[str, int]:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _dump_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------------ commands

def cmd_graph(args) -> str:
    g = build_graph(args.b, args.level)
    g.check()
    if args.format == "csv":
        return _dump_csv(["u", "v", "multiplicity"], g.edges)
    out = {
        "b": g.b,
        "level": g.level,
        "vertex_count": g.vertex_count,
        "edge_count": len(g.edges),
        "total_multiplicity": g.total_multiplicity,
        "boundary": list(g.boundary),
        "degree_census": [{"degree": d, "count": c} for d, c in sorted(g.degree_census().items())],
    }
    if args.edges:
        out["edges"] = [{"u": u, "v": v, "multiplicity": m} for u, v, m in g.edges]
    return _dump_json(out)


def _oracle_entries(b, level, flavor, tau):
    found = oracle.oracle_spectrum(b, level, flavor, tau)
    return [{"value": v, "multiplicity": m} for v, m in found.entries]


def _decimation_entries(b, level, flavor):
    if flavor == "neumann":
        pred = decimation.predicted_neumann_spectrum(b, level)
    else:
        pred = decimation.predicted_dirichlet_spectrum(b, level)
    return [{"value": e.value, "multiplicity": e.multiplicity, "generation": e.generation} for e in pred.entries]


def cmd_spectrum(args) -> str:
    b, level, flavor, tau = args.b, args.level, args.flavor, args.tol or oracle.DEFAULT_TAU
    if flavor == "dirichlet" and level < 1:
        raise UsageError("the Dirichlet spectrum needs --level >= 1")
    out: dict[str, Any] = {"b": b, "level": level, "flavor": flavor, "method": args.method}
    if args.method == "oracle":
        out["entries"] = _oracle_entries(b, level, flavor, tau)
    elif args.method == "decimation":
        out["entries"] = _decimation_entries(b, level, flavor)
    else:
        orc = _oracle_entries(b, level, flavor, tau)
        dec = _decimation_entries(b, level, flavor)
        dist = decimation.hausdorff_distance([e["value"] for e in orc], [e["value"] for e in dec])
        out["oracle"] = orc
        out["decimation"] = dec
        out["hausdorff_distance"] = dist
        out["passed"] = bool(dist < 1e-8)
    if args.format == "csv":
        if args.method == "both":
            raise UsageError("--method both has JSON output only")
        return _dump_csv(["value", "multiplicity", "generation"],
                         [[_g(e["value"]), "" if e.get("multiplicity") is None else e["multiplicity"],
                           "" if e.get("generation") is None else e["generation"]] for e in out["entries"]])
    return _dump_json(out)


def cmd_ids(args) -> str:
    if args.level < 1 or (args.measure == "limit" and args.level < 2):
        raise UsageError("ids needs --level >= 1 (>= 2 for the limit measure)")
    st = dos.ids_staircase(args.b, args.level, args.measure)
    if args.format == "csv":
        rows = [[_g(x), _g(Fraction(n, st.denominator)), f"{Fraction(n, st.denominator)}"]
                for x, n in zip(st.breakpoints, st.numerators)]
        return _dump_csv(["x", "N", "N_exact"], rows)
    return _dump_json({
        "b": args.b,
        "level": args.level,
        "measure": args.measure,
        "steps": [{"x": float(x), "N": rational(Fraction(n, st.denominator))}
                  for x, n in zip(st.breakpoints, st.numerators)],
    })


def _gap_record(b: int, g: gaps.Gap) -> dict[str, Any]:
    label = gaps.gap_label(b, g.word)
    return {
        "word": "".join(map(str, g.word)),
        "interval": [g.left, g.right],
        "label_numerator": label.numerator,
        "label_denominator": label.denominator,
    }


def cmd_gaps(args) -> str:
    if args.scale < 1:
        raise UsageError("--scale must be >= 1")
    records = [_gap_record(args.b, g) for g in gaps.enumerate_gaps(args.b, args.scale)]
    if args.format == "csv":
        return _dump_csv(["word", "left", "right", "label_numerator", "label_denominator"],
                         [[r["word"], _g(r["interval"][0]), _g(r["interval"][1]),
                           r["label_numerator"], r["label_denominator"]] for r in records])
    return _dump_json({"b": args.b, "scale": args.scale, "gaps": records})


def cmd_compact(args) -> str:
    b, depth = args.b, args.depth
    if depth < 1:
        raise UsageError("--depth must be >= 1")
    t = compact.KoenigsMap(b)
    spectrum = compact.compact_spectrum(b, depth)
    lower = 1 / (b + 1)
    gap_rows = []
    for k in range(1, args.scale + 1):
        for g in gaps.enumerate_gaps(b, k):
            if g.left >= lower - 1e-15:
                seq = compact.gap_sequence_check(b, g.left, g.right, depth)
                gap_rows.append({
                    "word": "".join(map(str, g.word)),
                    "interval": [g.left, g.right],
                    "ratio": compact.compact_gap_label(b, g.left, g.right),
                    "min_ratio": seq.min_ratio,
                })
    out = {
        "b": b,
        "depth": depth,
        "multiplier": rational(decimation.decimation_functions(b).multiplier),
        "T_at_2": t(2.0),
        "eigenvalues": [{"value": e.value, "generation": e.generation, "source": e.source,
                         "multiplicity": e.multiplicity} for e in spectrum],
        "gaps": gap_rows,
    }
    if args.format == "csv":
        return _dump_csv(["value", "generation", "source", "multiplicity"],
                         [[_g(e.value), e.generation, _g(e.source), "" if e.multiplicity is None else e.multiplicity]
                          for e in spectrum])
    return _dump_json(out)


# ------------------------------------------------------------------- verify

class _Report:
    def __init__(self):
        self.checks: list[dict[str, Any]] = []

    def add(self, name: str, b: int, passed: bool, value: float | None = None,
            threshold: float | None = None, level: int | None = None, status: str | None = None):
        self.checks.append({
            "name": name,
            "b": b,
            "level": level,
            "status": status or ("pass" if passed else "fail"),
            "value": value,
            "threshold": threshold,
        })

    @property
    def passed(self) -> bool:
        return all(c["status"] != "fail" for c in self.checks)


def _parse_perturbation(text: str | None):
    if text is None:
        return None
    try:
        idx, delta = text.split(":")
        idx, delta = int(idx), Fraction(delta)
    except ValueError:
        raise UsageError(f"--perturb expects INDEX:DELTA, got {text!r}") from None
    if not 0 <= idx <= 3:
        raise UsageError("coefficient index must be 0..3")
    return idx, delta


def _schur_checks(rep: _Report, b: int, funcs) -> None:
    rng = np.random.default_rng(b)
    zs = rng.uniform(0.0, 2.0, 50)
    poles = [float(e) for e in funcs.exceptional] + [1.0 - b / (b + 1), 1.0 + b / (b + 1)]
    zs = [z for z in zs if min(abs(z - p) for p in poles) > 1e-3]
    res = max(decimation.schur_residual(b, z, funcs) for z in zs)
    # shift = scale * R ties the closed-form pair to the polynomial itself
    consistency = max(abs(funcs.shift(z) - funcs.scale(z) * funcs(z)) for z in zs)
    worst = max(res, consistency)
    rep.add("schur-identity", b, worst < 1e-12, worst, 1e-12)


def _fixed_point_checks(rep: _Report, b: int, funcs) -> None:
    ok = all(funcs(Fraction(p)) == p for p in (0, 1, 2))
    to_zero = [Fraction(0), Fraction(b + 2, b + 1), Fraction(2 * b + 1, b + 1)]
    to_two = [Fraction(1, b + 1), Fraction(b, b + 1), Fraction(2)]
    ok = ok and all(funcs(z) == 0 for z in to_zero) and all(funcs(z) == 2 for z in to_two)
    rep.add("fixed-points-preimages", b, ok)


def _oracle_checks(rep: _Report, b: int, level: int, funcs) -> None:
    for lv in range(1, level + 1):
        orc = oracle.oracle_spectrum(b, lv, "neumann")
        pred = decimation.predicted_neumann_spectrum(b, lv, funcs)
        d = decimation.hausdorff_distance(orc.values, pred.values)
        rep.add("oracle-neumann", b, d < 1e-8, d, 1e-8, lv)

        orc_d = oracle.oracle_spectrum(b, lv, "dirichlet")
        pred_d = decimation.predicted_dirichlet_spectrum(b, lv, funcs)
        ok = len(orc_d) == len(pred_d) and orc_d.total == build_graph(b, lv).vertex_count - 2
        if ok:
            d = decimation.hausdorff_distance(orc_d.values, pred_d.values)
            ok = d < 1e-8 and all(m == e.multiplicity for m, e in zip(orc_d.multiplicities, pred_d.entries))
        rep.add("oracle-dirichlet-multiplicities", b, ok, level=lv)

        fd = dos.finite_dos(b, lv)
        n = build_graph(b, lv).vertex_count - 2
        mults = sorted(int(w * n) for _, w in fd.atoms())
        rep.add("finite-dos-vs-oracle", b, mults == sorted(orc_d.multiplicities.tolist()), level=lv)


def _extension_checks(rep: _Report, b: int, level: int) -> None:
    worst = 0.0
    for lv in range(1, level + 1):
        g = build_graph(b, lv)
        pairs = oracle.eigenpairs(oracle.dirichlet_laplacian(g))
        big = build_graph(b, lv + 1)
        lap_n, lap_d = oracle.neumann_laplacian(big), oracle.dirichlet_laplacian(big)
        for lam, vec in zip(pairs.values, pairs.vectors.T):
            f = oracle.VertexFunction.from_interior(g, vec)
            ext = oracle.dn_extension(f, 1, 2)
            worst = max(worst, oracle.verify_eigenpair(lap_n, ext, lam).residual,
                        oracle.verify_eigenpair(lap_d, ext, lam).residual)
    rep.add("dn-extension", b, worst < 1e-12, worst, 1e-12, level)


def _measure_checks(rep: _Report, b: int, level: int) -> None:
    ok = all(dos.finite_dos(b, lv).total_mass() == 1 for lv in range(1, level + 1))
    rep.add("finite-dos-mass", b, ok)
    ok = all(dos.limit_dos(b, m).total_mass() == 1 - dos.tail_bound(b, m) for m in range(0, 9))
    rep.add("limit-dos-tail", b, ok)
    r = dos.self_similarity_residual(b, 4)
    rep.add("self-similarity", b, r.weight_residual == 0 and r.location_residual < 1e-10,
            float(r.weight_residual))


def _gap_checks(rep: _Report, b: int) -> None:
    rep.add("ifs-orbit-labels", b, gaps.ifs_orbit(b, 5) == gaps.labels_up_to(b, 5))
    bound = dos.tail_bound(b, 10)
    worst = max(gaps.crosscheck_labels(b, k, 10) for k in (1, 2))
    rep.add("label-counting-crosscheck", b, worst <= bound, float(worst), float(bound))
    hits = sum(gaps.julia_disjointness(b, k) for k in (1, 2, 3))
    rep.add("gaps-julia-disjoint", b, hits == 0, hits, 0)


def _koenigs_checks(rep: _Report, b: int) -> None:
    t = compact.KoenigsMap(b)
    res = compact.functional_equation_residual(b, np.linspace(0.0, 2.0, 200))
    rep.add("koenigs-functional-equation", b, res < 1e-9, res, 1e-9)
    d = abs(t.multiplier * t(1 / (b + 1)) - t(2.0))
    rep.add("koenigs-scale-identity", b, d < 1e-9, d, 1e-9)
    seq = compact.gap_sequence_check(b, 1 / (b + 1), b / (b + 1), 6)
    spread = max(seq.ratios) - min(seq.ratios)
    rep.add("compact-gap-ratio", b, seq.min_ratio > 0 and spread < 1e-8, seq.min_ratio)


def cmd_verify(args) -> tuple[str, int]:
    bs = [args.b] if args.b is not None else [2, 3, 4]
    level = args.level if args.level is not None else 3
    if level < 1:
        raise UsageError("verify needs --level >= 1")
    pert = _parse_perturbation(args.perturb)
    rep = _Report()
    for b in bs:
        funcs = decimation.decimation_functions(b)
        if pert is not None:
            funcs = funcs.perturbed(*pert)
        build_graph(b, level).check()
        rep.add("graph-structure", b, True, level=level)
        _schur_checks(rep, b, funcs)
        _fixed_point_checks(rep, b, funcs)
        if args.oracle:
            if level > ORACLE_MAX_LEVEL:
                print(f"warning: oracle checks skipped for b={b}: level {level} exceeds the cap "
                      f"{ORACLE_MAX_LEVEL}", file=sys.stderr)
                rep.add("oracle", b, True, level=level, status="skipped")
            else:
                _oracle_checks(rep, b, level, funcs)
                _extension_checks(rep, b, min(level - 1, 2) if level > 1 else 1)
        _measure_checks(rep, b, level)
        _gap_checks(rep, b)
        _koenigs_checks(rep, b)
    out = {"passed": rep.passed, "perturbation": args.perturb, "checks": rep.checks}
    if args.format == "csv":
        text = _dump_csv(["name", "b", "level", "status", "value", "threshold"],
                         [[c["name"], c["b"], "" if c["level"] is None else c["level"], c["status"],
                           "" if c["value"] is None else _g(c["value"]),
                           "" if c["threshold"] is None else _g(c["threshold"])] for c in rep.checks])
    else:
        text = _dump_json(out)
    return text, EXIT_OK if rep.passed else EXIT_VERIFY


# ------------------------------------------------------------------- parser

def _b_arg(text: str) -> int:
    b = int(text)
    if b < 2:
        raise argparse.ArgumentTypeError("b must be >= 2")
    return b


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bubblediamond", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, b_required=True, fmt="json"):
        sp.add_argument("--b", type=_b_arg, required=b_required, default=None, help="branching parameter (>= 2)")
        sp.add_argument("--format", choices=["json", "csv"], default=fmt)
        sp.add_argument("--output", metavar="PATH", help="write here instead of standard output")

    sp = sub.add_parser("graph", help="vertex/edge counts and degree census")
    common(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--edges", action="store_true", help="include the edge list in JSON output")

    sp = sub.add_parser("spectrum", help="Laplacian spectrum by diagonalization or decimation")
    common(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--flavor", choices=["neumann", "dirichlet"], default="neumann")
    sp.add_argument("--method", choices=["oracle", "decimation", "both"], default="decimation")
    sp.add_argument("--tol", type=float, default=None, help="eigenvalue clustering tolerance")

    sp = sub.add_parser("ids", help="integrated density of states staircase")
    common(sp, fmt="csv")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--measure", choices=["finite", "limit"], default="finite")

    sp = sub.add_parser("gaps", help="gaps of a given scale with exact labels")
    common(sp)
    sp.add_argument("--scale", type=int, required=True)

    sp = sub.add_parser("compact", help="compact-limit spectrum and gap ratios")
    common(sp)
    sp.add_argument("--depth", type=int, default=4, help="largest generation k")
    sp.add_argument("--scale", type=int, default=1, help="report gap ratios up to this scale")

    sp = sub.add_parser("verify", help="run the invariant suite")
    common(sp, b_required=False)
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=True,
                    help="include direct-diagonalization checks")
    sp.add_argument("--perturb", metavar="INDEX:DELTA", default=None,
                    help="shift one decimation polynomial coefficient (mutation test)")
    return p


_COMMANDS: dict[str, Callable] = {
    "graph": cmd_graph,
    "spectrum": cmd_spectrum,
    "ids": cmd_ids,
    "gaps": cmd_gaps,
    "compact": cmd_compact,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "level", None) is not None and args.level < 0:
            raise UsageError("--level must be >= 0")
        result = _COMMANDS[args.command](args)
        text, code = result if isinstance(result, tuple) else (result, EXIT_OK)
    except (UsageError, GraphError) as exc:
        print(f"bubblediamond: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"bubblediamond: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
