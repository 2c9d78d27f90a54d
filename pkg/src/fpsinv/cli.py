"""Command-line front end: ``fpsinv invert|verify|analyze``.

Exit codes: 0 success, 1 parse error, 2 validation or usage error,
3 a mathematical check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from .errors import FpsError, InternalVerificationError, ParseError
from .field import FieldSpec
from .inverter import InversionTrace, invert_map, validate_problem, verify_inverse
from .lang import evaluate_source, format_series, map_to_json, parse_sections, parse_source
from .series import INFINITY, SeriesMap, identity_map, ps_distance
from .symmetry import FAIL, extract_polynomial_inverse, q_decomposition_check

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_USAGE = 2
EXIT_CHECK = 3

DEFAULT_DEGREE = 10
DEFAULT_BUDGET = 24


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    field: FieldSpec
    degree: int
    input: str
    format: str = "text"
    trace: bool = False
    poly_degree: int | None = None
    s_max: int | None = None
    metric_base: Fraction | None = None
    budget: int = DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# helpers


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(text: str, spec: FieldSpec, degree: int) -> tuple[SeriesMap, list[str]]:
    src = parse_source(text)
    return evaluate_source(src, spec, degree), src.variables


def _order(o) -> str:
    return "inf" if o == INFINITY else str(o)


def _json_order(o):
    return None if o == INFINITY else o


def _map_lines(m: SeriesMap, names: list[str], prefix: str) -> list[str]:
    return [f"{prefix}{i + 1} = {format_series(c, names)}" for i, c in enumerate(m)]


def _matrix_lines(M) -> list[str]:
    return ["  [" + ", ".join(str(x) for x in row) + "]" for row in M]


def _distance(a: SeriesMap, b: SeriesMap, base) -> object:
    return max(ps_distance(x, y, base) for x, y in zip(a, b))


def _fmt_distance(d) -> str:
    if isinstance(d, Fraction):
        return str(d)
    return f"{d:.6g}"


# ---------------------------------------------------------------------------
# commands


def cmd_invert(cfg: RunConfig, out) -> int:
    F, names = _load(_read(cfg.input), cfg.field, cfg.degree)
    res = invert_map(F, cfg.degree)
    G, trace, prob = res.G, res.trace, res.problem
    if cfg.format == "json":
        doc = {
            "variables": names,
            "field": str(cfg.field),
            "degree": cfg.degree,
            "m0": trace.m0,
            "t": _json_order(prob.t),
            "t_per_component": [_json_order(t) for t in prob.t_per_component],
            "inverse": map_to_json(G),
        }
        if res.linear_part is not None:
            doc["linear_part"] = [[str(x) for x in row] for row in res.linear_part]
        if cfg.trace:
            doc["trace"] = _trace_json(trace, cfg.metric_base)
        out.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK

    lines = [
        f"field: {cfg.field}",
        f"variables: {', '.join(names)}",
        f"degree: {cfg.degree}",
        f"t: {_order(prob.t)} (per component: {', '.join(_order(t) for t in prob.t_per_component)})",
        f"m0: {trace.m0}",
    ]
    if res.linear_part is not None:
        lines.append("linear part L (F = L o (X + H~)), inverse composed with L^-1:")
        lines.extend(_matrix_lines(res.linear_part))
    if cfg.trace:
        lines.extend(_trace_text(trace, names, cfg.metric_base))
    lines.append("inverse:")
    lines.extend(_map_lines(G, names, "G"))
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _trace_text(trace: InversionTrace, names, base) -> list[str]:
    final = trace.partial_sums[-1]
    lines = ["trace:"]
    for k, P in enumerate(trace.iterates):
        orders = ", ".join(_order(o) for o in trace.orders[k])
        lines.append(f"P_{k} (ord {orders}):")
        lines.extend("  " + line for line in _map_lines(P, names, "P"))
    for m, A in enumerate(trace.partial_sums, start=1):
        ident = identity_map(len(A), A.max_degree, A.spec)
        head = f"A_{m} (ord A_{m} - X: {', '.join(_order(o) for o in (A - ident).orders())}"
        if base is not None:
            head += f"; d(A_{m}, G) = {_fmt_distance(_distance(A, final, base))}"
        lines.append(head + "):")
        lines.extend("  " + line for line in _map_lines(A, names, "A"))
    return lines


def _trace_json(trace: InversionTrace, base) -> dict:
    final = trace.partial_sums[-1]
    doc = {
        "iterates": [
            {"k": k, "orders": [_json_order(o) for o in trace.orders[k]], "map": map_to_json(P)}
            for k, P in enumerate(trace.iterates)
        ],
        "partial_sums": [],
    }
    for m, A in enumerate(trace.partial_sums, start=1):
        row = {"m": m, "map": map_to_json(A)}
        if base is not None:
            row["distance"] = str(_distance(A, final, base))
        doc["partial_sums"].append(row)
    return doc


def cmd_verify(cfg: RunConfig, out) -> int:
    sections = parse_sections(_read(cfg.input))
    missing = [k for k in ("F", "G") if k not in sections]
    if missing:
        raise ParseError(f"missing section(s) {', '.join('map ' + k for k in missing)}", 1, 1)
    F, fnames = _load(sections["F"], cfg.field, cfg.degree)
    G, gnames = _load(sections["G"], cfg.field, cfg.degree)
    if F.nvars != G.nvars or len(F) != len(G):
        raise UsageError(f"F has {F.nvars} variable(s) but G has {G.nvars}")
    res = verify_inverse(F, G)
    if cfg.format == "json":
        doc = {"field": str(cfg.field), "degree": res.degree, "ok": res.ok}
        if res.witness is not None:
            w = res.witness
            doc["witness"] = {
                "check": w.check,
                "component": w.component + 1,
                "exponents": list(w.exponents),
                "coefficient": str(w.coefficient),
            }
        out.write(json.dumps(doc, indent=2) + "\n")
    elif res.ok:
        out.write(f"ok: G o F = X and F o G = X through degree {res.degree} over {cfg.field}\n")
    else:
        out.write(f"FAILED through degree {res.degree} over {cfg.field}: {res.witness}\n")
    return EXIT_OK if res.ok else EXIT_CHECK


def cmd_analyze(cfg: RunConfig, out) -> int:
    if cfg.poly_degree is None:
        raise UsageError("analyze needs --poly-degree")
    D = cfg.poly_degree
    s_max = cfg.s_max if cfg.s_max is not None else 2
    W = min(max(D * s_max, cfg.degree), cfg.budget)
    if W < D:
        raise UsageError(f"working degree {W} (budget {cfg.budget}) is below D = {D}")
    F, names = _load(_read(cfg.input), cfg.field, W)
    prob = validate_problem(F, W)
    report = extract_polynomial_inverse(prob, D)
    checks = list(report.checks)
    if report.certified:
        checks.extend(q_decomposition_check(prob.F, report.candidate_G, D, s_max, W)[1:])
    failed = not report.certified or any(c.status == FAIL for c in checks)

    if cfg.format == "json":
        doc = {
            "variables": names,
            "field": str(cfg.field),
            "D": D,
            "working_degree": W,
            "mu_per_component": report.mu_per_component,
            "mu": report.mu,
            "certified": report.certified,
            "message": report.message,
            "candidate": map_to_json(report.candidate_G),
            "checks": [
                {"name": c.name, "status": c.status, "detail": c.detail, "witness": str(c.witness) if c.witness else None}
                for c in checks
            ],
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        lines = [
            f"field: {cfg.field}",
            f"D: {D}",
            f"working degree: {W}",
            f"mu_i: {', '.join(map(str, report.mu_per_component))} (mu = {report.mu})",
            "candidate:",
        ]
        lines.extend(_map_lines(report.candidate_G, names, "G"))
        lines.append(report.message)
        lines.append("checks:")
        lines.extend(f"  {c}" for c in checks)
        out.write("\n".join(lines) + "\n")
    return EXIT_CHECK if failed else EXIT_OK


COMMANDS = {"invert": cmd_invert, "verify": cmd_verify, "analyze": cmd_analyze}


# ---------------------------------------------------------------------------
# argument handling


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _field(text: str) -> FieldSpec:
    try:
        return FieldSpec.parse(text)
    except FpsError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _base(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if v <= 1:
        raise argparse.ArgumentTypeError("metric base must exceed 1")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="map definition file, or '-' for stdin")
    common.add_argument("--field", type=_field, default=FieldSpec.rationals(), help="q or fp:<p> (default q)")
    common.add_argument(
        "--degree", type=_positive, default=DEFAULT_DEGREE, help=f"certify through this total degree (default {DEFAULT_DEGREE})"
    )
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = _Parser(prog="fpsinv", description="Exact inversion of formal power series maps X + H(X).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    inv = sub.add_parser("invert", parents=[common], help="compute the inverse through --degree")
    inv.add_argument("--trace", action="store_true", help="print every P_k and A_m")
    inv.add_argument("--metric-base", type=_base, default=None, help="show d(A_m, G) = C^-ord in the trace")
    sub.add_parser("verify", parents=[common], help="check that 'map F:' and 'map G:' are mutually inverse")
    ana = sub.add_parser("analyze", parents=[common], help="look for a polynomial inverse of degree <= D")
    ana.add_argument("--poly-degree", type=_positive, required=True, help="assumed inverse degree D")
    ana.add_argument("--smax", type=_positive, default=None, help="check Q_s identities for s <= SMAX (default 2)")
    ana.add_argument(
        "--budget", type=_positive, default=DEFAULT_BUDGET, help=f"cap on the working degree (default {DEFAULT_BUDGET})"
    )
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        field=ns.field,
        degree=ns.degree,
        input=ns.input,
        format=ns.format,
        trace=getattr(ns, "trace", False),
        poly_degree=getattr(ns, "poly_degree", None),
        s_max=getattr(ns, "smax", None),
        metric_base=getattr(ns, "metric_base", None),
        budget=getattr(ns, "budget", DEFAULT_BUDGET),
    )


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = config_from_args(ns)
    try:
        return COMMANDS[cfg.command](cfg, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InternalVerificationError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FpsError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
