"""
qdesigns command-line interface.

Every subcommand prints either plain text or a single canonical JSON object
on stdout; logs go to stderr. Exit codes: 0 success, 1 mathematical
failure, 2 usage error, 3 resource cap or timeout.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, TextIO

from qdesigns import __version__
from qdesigns.config import get_workers, override_settings, settings
from qdesigns.design_io import format_design_text, load_design, save_design
from qdesigns.error_handling import (
    EXIT_MATH_FAILURE,
    EXIT_OK,
    EXIT_RESOURCE,
    QDesignsError,
    SearchTimeout,
    UsageError,
)
from qdesigns.logging_config import configure_log_level, error_tracker, get_logger
from qdesigns.models import CommandRequest, SearchReport, canonical_json
from qdesigns.services.gf_core import make_field
from qdesigns.services.grassmann import enumerate_subspaces, subspace_from_rows
from qdesigns.services.incidence import build_incidence, summarize, to_bitmap_text
from qdesigns.services.klp import check_matrix_properties, divisibility_witness, klp_report, EXACT_LIMIT_N
from qdesigns.services.localdecode import (
    c3_bound,
    check_cond2,
    check_det_bounds,
    decode_certificate,
    lemma2_grid_check,
    solve_coefficients,
    verify_certificate,
)
from qdesigns.services.qcount import check_bounds, q_binomial, q_binomial_via_sum
from qdesigns.services.search import METHODS, NotFound, search_design
from qdesigns.services.verifier import DesignCandidate, verify_design

logger = get_logger("main")

# --max-* flag destination -> the setting it overrides for one run
CAP_OPTIONS = {
    "max_enumeration": "MAX_ENUMERATION",
    "max_incidence_bits": "MAX_INCIDENCE_BITS",
    "max_sum_terms": "MAX_SUM_TERMS",
    "max_verify_columns": "MAX_VERIFY_COLUMNS",
    "max_certificate_rows": "MAX_CERTIFICATE_ROWS",
    "max_search_columns": "MAX_SEARCH_COLUMNS",
    "max_search_candidates": "MAX_SEARCH_CANDIDATES",
}

GLOBAL_OPTIONS = ("workers", "verbose", "command", "handler", "format", *CAP_OPTIONS)


def yes_no(flag: Optional[bool]) -> str:
    if flag is None:
        return "skipped"
    return "yes" if flag else "no"


def natural(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text!r} is negative")
    return value


def positive(text: str) -> int:
    value = natural(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be at least 1")
    return value


def emit(out: TextIO, request: CommandRequest, payload: Dict[str, Any], lines: List[str]) -> None:
    if request.output_format == "json":
        out.write(canonical_json(payload) + "\n")
    else:
        for line in lines:
            out.write(line + "\n")


# ============================================================================
# COUNTING AND ENUMERATION
# ============================================================================

def cmd_qbinom(request: CommandRequest, out: TextIO) -> int:
    p = request.params
    q, n, k = p["q"], p["n"], p["k"]
    # counting needs no field tables, only an integer q >= 2
    if q < 2:
        raise UsageError(f"q must be at least 2, got {q}")
    value = q_binomial(n, k, q)
    payload: Dict[str, Any] = {"q": q, "n": n, "k": k, "value": value}
    lines = [str(value)]
    status = EXIT_OK

    if p["via_sum"] or p["bounds"]:
        if k > n:
            raise UsageError(f"--via-sum and --bounds need k <= n, got n={n}, k={k}")
    if p["via_sum"]:
        via_sum = q_binomial_via_sum(n, k, q)
        payload["via_sum"] = via_sum
        lines = [str(via_sum)]
        if via_sum != value:
            logger.error("sum_identity_mismatch", q=q, n=n, k=k, value=value, via_sum=via_sum)
            status = EXIT_MATH_FAILURE
    if p["bounds"]:
        bounds = check_bounds(n, k, q)
        payload["bounds"] = bounds.model_dump()
        lines += [
            f"lower: {bounds.lower}",
            f"upper: {bounds.upper}",
            f"bounds: {'ok' if bounds.ok else 'violated'}",
        ]
        if not bounds.ok:
            status = EXIT_MATH_FAILURE
    emit(out, request, payload, lines)
    return status


def cmd_enumerate(request: CommandRequest, out: TextIO) -> int:
    p = request.params
    q, n, k = p["q"], p["n"], p["k"]
    field = make_field(q)
    if k > n:
        raise UsageError(f"need k <= n, got n={n}, k={k}")
    if p["count_only"]:
        count = q_binomial(n, k, q)
        emit(out, request, {"q": q, "n": n, "k": k, "count": count}, [str(count)])
        return EXIT_OK

    subspaces = enumerate_subspaces(n, k, field, request.workers)
    if p["out"]:
        save_design(DesignCandidate(field, n, k, tuple(subspaces)), p["out"])
        emit(out, request, {"q": q, "n": n, "k": k, "count": len(subspaces), "path": p["out"]},
             [f"wrote {len(subspaces)} subspaces to {p['out']}"])
        return EXIT_OK

    lines: List[str] = []
    for i, V in enumerate(subspaces):
        if i:
            lines.append("")
        lines.extend(V.format_rows())
    emit(out, request, {
        "q": q, "n": n, "k": k,
        "count": len(subspaces),
        "subspaces": [V.format_rows() for V in subspaces],
    }, lines)
    return EXIT_OK


def cmd_incidence(request: CommandRequest, out: TextIO) -> int:
    p = request.params
    field = make_field(p["q"])
    M = build_incidence(p["n"], p["k"], p["t"], field, request.workers)
    summary = summarize(M, p["symmetry_trials"], request.seed)
    payload: Dict[str, Any] = {"incidence": summary.model_dump()}
    lines = [
        f"rows: {summary.rows}",
        f"columns: {summary.columns}",
        f"row weight: {summary.row_weight}",
        f"column weight: {summary.col_weight}",
        f"c2: {summary.c2}",
        f"average row: {summary.average_row}",
        f"constant vector: {yes_no(summary.constant_vector)}",
        f"double counting: {yes_no(summary.double_counting)}",
        f"symmetry: {yes_no(summary.symmetry_ok)}",
    ]
    passed = summary.constant_vector and summary.double_counting and summary.symmetry_ok is not False

    if p["properties"]:
        properties = check_matrix_properties(M, p["symmetry_trials"], request.seed)
        payload["properties"] = properties.model_dump()
        lines += [
            f"divisibility witness: {properties.divisibility_witness}",
            f"local decodability: {yes_no(properties.local_decodability)}",
            f"properties: {'ok' if properties.passed else 'failed'}",
        ]
        passed = passed and properties.passed

    if p["export"]:
        Path(p["export"]).write_text(to_bitmap_text(M), encoding="ascii")
        payload["export"] = p["export"]
        lines.append(f"wrote bitmap to {p['export']}")
    elif not p["weights_only"]:
        bitmap_rows = to_bitmap_text(M).splitlines()[2:]
        payload["matrix"] = bitmap_rows
        lines.append("matrix:")
        lines += bitmap_rows
    emit(out, request, payload, lines)
    return EXIT_OK if passed else EXIT_MATH_FAILURE


# ============================================================================
# DESIGNS
# ============================================================================

def cmd_verify(request: CommandRequest, out: TextIO) -> int:
    p = request.params
    design = load_design(p["design"])
    report = verify_design(design, p["t"], request.workers)
    histogram = " ".join(f"{count}:{number}" for count, number in sorted(report.counts_histogram.items()))
    lines = [f"design: {yes_no(report.is_design)}", f"t: {report.t}"]
    if report.is_design:
        lines.append(f"lambda: {report.lambda_}")
    lines += [
        f"blocks: {report.block_count}",
        f"simple: {yes_no(report.is_simple)}",
        f"trivial: {yes_no(report.is_trivial)}",
        f"coverage histogram: {histogram}",
    ]
    if report.failing_t_subspace is not None:
        lines.append(f"failing t-subspace: {' '.join(report.failing_t_subspace)} (covered {report.failing_count} times)")
    emit(out, request, {"verification": report.to_payload()}, lines)
    return EXIT_OK if report.is_design else EXIT_MATH_FAILURE


def cmd_search(request: CommandRequest, out: TextIO) -> int:
    p = request.params
    q, n, k, t, lam = p["q"], p["n"], p["k"], p["t"], p["lambda"]
    report = SearchReport(status="found", q=q, n=n, k=k, t=t, lambda_=lam, method=p["method"])
    try:
        result = search_design(q, n, k, t, lam, p["method"], request.seed, request.timeout, request.workers)
    except SearchTimeout as e:
        report.status = "timeout"
        report.reason = str(e)
        report.nodes = e.nodes
        payload = {"search": report.model_dump(by_alias=True), "partial": e.stats()}
        emit(out, request, payload, [
            "status: timeout",
            f"nodes: {e.nodes}",
            f"best coverage: {e.best_covered}/{e.universe_size}",
        ])
        return e.exit_code

    if isinstance(result, NotFound):
        report.status = "not-found"
        report.reason = result.reason
        report.nodes = result.nodes
        emit(out, request, {"search": report.model_dump(by_alias=True)},
             ["status: not-found", f"reason: {result.reason}"])
        return EXIT_MATH_FAILURE

    report.block_count = result.size
    lines = ["status: found", f"method: {p['method']}", f"blocks: {result.size}"]
    payload: Dict[str, Any] = {"search": report.model_dump(by_alias=True)}
    if p["out"]:
        save_design(result, p["out"], request.output_format)
        lines.append(f"wrote design to {p['out']}")
        payload["path"] = p["out"]
    else:
        lines += [""] + format_design_text(result).splitlines()
        payload["blocks"] = [block.format_rows() for block in result.blocks]
    emit(out, request, payload, lines)
    return EXIT_OK


# ============================================================================
# LOCAL DECODING AND BOUNDS
# ============================================================================

def cmd_decode(request: CommandRequest, out: TextIO) -> int:
    p = request.params
    q, t, k = p["q"], p["t"], p["k"]
    field = make_field(q)
    system = solve_coefficients(q, t, k)
    payload: Dict[str, Any] = {"system": system.model_dump()}
    lines = ["D:"] + ["  " + " ".join(str(x) for x in row) for row in system.D]
    lines += [f"m: {system.m}", "f: " + " ".join(str(x) for x in system.f)]
    status = EXIT_OK

    if p["bounds"]:
        det_report = check_det_bounds(q, t, k)
        cond2 = check_cond2(q, t, k)
        c3 = c3_bound(q, t, k, field)
        payload["det_bounds"] = det_report.model_dump()
        payload["cond2"] = cond2
        payload["c3"] = c3.model_dump()
        checks = [det_report.det_D] + det_report.det_Dj + [det_report.row_maxima]
        lines += [f"{c.name}: {c.lhs} <= {c.rhs} {yes_no(c.ok)}" for c in checks]
        lines += [f"diagonals D_{d.j}: {d.count} <= {d.bound} {yes_no(d.ok)}" for d in det_report.diagonals]
        lines.append(f"off-target rows vanish: {yes_no(cond2)}")
        if c3.exact_c3 is None:
            lines.append(f"c3: skipped <= {c3.stated_bound}")
        else:
            lines.append(f"c3: {c3.exact_c3} <= {c3.stated_bound} {yes_no(c3.ok)}")
        if not (det_report.passed and cond2 and c3.ok is not False):
            status = EXIT_MATH_FAILURE

    if p["certify"]:
        if p["n"] is None:
            raise UsageError("--certify needs --n")
        n = p["n"]
        V = subspace_from_rows(field, n, [[1 if i == r else 0 for i in range(n)] for r in range(t)])
        verdict = verify_certificate(decode_certificate(V, k), request.workers)
        payload["certificate"] = verdict.model_dump()
        lines += [
            f"certificate: {'ok' if verdict.ok else 'failed'}",
            f"decoded column: {' '.join(verdict.decoded_column)}",
            f"envelope: {' '.join(verdict.envelope)}",
            f"rows used: {verdict.rows_used}",
            f"l1 norm: {verdict.l1_norm}",
            f"l1 bound: {verdict.l1_bound}",
            f"columns checked: {verdict.columns_checked}",
            f"mismatches: {verdict.mismatches}",
        ]
        if not verdict.ok:
            status = EXIT_MATH_FAILURE
    emit(out, request, payload, lines)
    return status


def cmd_lemma2_check(request: CommandRequest, out: TextIO) -> int:
    p = request.params
    make_field(p["q"])
    report = lemma2_grid_check(p["q"], p["n"], p["t"], p["k"], request.workers)
    emit(out, request, {"lemma2": report.model_dump()}, [
        f"pairs checked: {report.pairs_checked}",
        f"cases checked: {report.cases_checked}",
        f"mismatches: {report.mismatches}",
        f"row sum mismatches: {report.row_sum_mismatches}",
        f"result: {'ok' if report.ok else 'failed'}",
    ])
    return EXIT_OK if report.ok else EXIT_MATH_FAILURE


def cmd_klp_report(request: CommandRequest, out: TextIO) -> int:
    p = request.params
    q, n, k, t = p["q"], p["n"], p["k"], p["t"]
    make_field(q)
    report = klp_report(q, n, k, t, p["constant"])
    payload: Dict[str, Any] = {"klp": report.model_dump()}
    lines = [
        f"q: {q}",
        f"n: {n}",
        f"k: {k}",
        f"t: {t}",
        f"constant: {report.constant}",
        f"feasible: {yes_no(report.feasible)} ({report.feasibility_note})",
        f"k > 12t: {yes_no(report.threshold_k_gt_12t)}",
        f"k > 12(t+1): {yes_no(report.threshold_k_gt_12_t_plus_1)}",
        f"log reading: {report.log_reading}",
        f"c2: {report.c2}",
    ]
    if n <= EXACT_LIMIT_N:
        witness = divisibility_witness(q, n, k, t)
        payload["divisibility_witness"] = witness
        lines += [
            f"divisibility witness: {witness}",
            f"A exact: {report.A_exact}",
            f"B exact: {report.B_exact}",
            f"budget below B: {yes_no(report.budget_below_B)}",
        ]
    lines += [
        f"c1 bound: {report.c1_bound}",
        f"c3 bound: {report.c3_bound}",
        f"A upper: {report.A_upper}",
        f"B lower: {report.B_lower}",
        f"block budget: {report.block_budget}",
        f"rhs final: {report.rhs_final}",
    ]
    emit(out, request, payload, lines)
    return EXIT_OK


# ============================================================================
# SUITES
# ============================================================================

def cmd_selftest(request: CommandRequest, out: TextIO) -> int:
    from qdesigns.selftest import run_selftest

    report = run_selftest(request.workers, request.params["only"])
    lines = [
        f"{'PASS' if s.passed else 'FAIL'} {s.name} ({s.cases} cases){': ' + s.detail if s.detail else ''}"
        for s in report.suites
    ]
    lines.append(f"selftest: {'passed' if report.passed else 'failed'}")
    emit(out, request, {"selftest": report.model_dump()}, lines)
    return EXIT_OK if report.passed else EXIT_MATH_FAILURE


def cmd_docs_check(request: CommandRequest, out: TextIO) -> int:
    from qdesigns.docsbook import doctest_examples

    report = doctest_examples(request.params["docs"])
    lines = []
    for result in report.transcripts:
        lines.append(f"{'PASS' if result.passed else 'FAIL'} {result.page}#{result.index}")
        if result.diff:
            lines += ["  " + line for line in result.diff.splitlines()]
    lines.append(f"docs: {'passed' if report.passed else 'failed'}")
    emit(out, request, {"docs": report.model_dump()}, lines)
    return EXIT_OK if report.passed else EXIT_MATH_FAILURE


HANDLERS: Dict[str, Callable[[CommandRequest, TextIO], int]] = {
    "qbinom": cmd_qbinom,
    "enumerate": cmd_enumerate,
    "incidence": cmd_incidence,
    "verify": cmd_verify,
    "decode": cmd_decode,
    "lemma2-check": cmd_lemma2_check,
    "klp-report": cmd_klp_report,
    "search": cmd_search,
    "selftest": cmd_selftest,
    "docs-check": cmd_docs_check,
}


def common_options(default: Any) -> argparse.ArgumentParser:
    """Options accepted both before and after the subcommand.

    Subcommands get them with default=SUPPRESS, so a value given before the
    subcommand survives unless it is repeated after it.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=positive, default=default, help="worker count (env QDESIGNS_WORKERS)")
    common.add_argument("--verbose", action="store_true", default=False if default is None else default,
                        help="debug logging on stderr")
    for dest, name in CAP_OPTIONS.items():
        common.add_argument("--" + dest.replace("_", "-"), dest=dest, type=positive, default=default,
                            help=f"override QDESIGNS_{name}")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdesigns", description="Exact computations for subspace designs over F_q.",
                                     parents=[common_options(None)])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    shared = common_options(argparse.SUPPRESS)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=("text", "json"), default="text")
    output.add_argument("--json", dest="format", action="store_const", const="json")

    field = argparse.ArgumentParser(add_help=False)
    field.add_argument("--q", type=positive, required=True)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qbinom", parents=[shared, output, field], help="Gaussian binomial [n k]_q")
    p.add_argument("--n", type=natural, required=True)
    p.add_argument("--k", type=natural, required=True)
    p.add_argument("--via-sum", action="store_true", help="evaluate the explicit sum identity instead")
    p.add_argument("--bounds", action="store_true", help="check q^(k(n-k)) <= value <= C(n,k) q^(k(n-k))")

    p = sub.add_parser("enumerate", parents=[shared, output, field], help="list k-subspaces in canonical order")
    p.add_argument("--n", type=natural, required=True)
    p.add_argument("--k", type=natural, required=True)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--out", default=None, help="write the subspaces as a design file")

    p = sub.add_parser("incidence", parents=[shared, output, field], help="t-vs-k incidence structure")
    p.add_argument("--n", type=natural, required=True)
    p.add_argument("--k", type=natural, required=True)
    p.add_argument("--t", type=natural, required=True)
    p.add_argument("--weights-only", action="store_true")
    p.add_argument("--export", default=None, help="write the matrix as plain PBM text")
    p.add_argument("--symmetry-trials", type=natural, default=20)
    p.add_argument("--seed", type=natural, default=0)
    p.add_argument("--properties", action="store_true", help="check all five matrix properties")

    p = sub.add_parser("verify", parents=[shared, output], help="verify a design file")
    p.add_argument("--design", required=True)
    p.add_argument("--t", type=natural, required=True)

    p = sub.add_parser("decode", parents=[shared, output, field], help="local decoding system D, m, f")
    p.add_argument("--t", type=positive, required=True)
    p.add_argument("--k", type=positive, required=True)
    p.add_argument("--certify", action="store_true", help="build and check the certificate in F_q^n")
    p.add_argument("--n", type=positive, default=None)
    p.add_argument("--bounds", action="store_true", help="determinant, row-maxima, diagonal and c3 bounds")

    p = sub.add_parser("lemma2-check", parents=[shared, output, field], help="intersection-count formula vs brute force")
    p.add_argument("--n", type=positive, required=True)
    p.add_argument("--t", type=positive, required=True)
    p.add_argument("--k", type=positive, required=True)

    p = sub.add_parser("klp-report", parents=[shared, output, field], help="existence-bound parameters")
    p.add_argument("--n", type=positive, required=True)
    p.add_argument("--k", type=positive, required=True)
    p.add_argument("--t", type=positive, required=True)
    p.add_argument("--constant", type=positive, default=1)

    p = sub.add_parser("search", parents=[shared, output, field], help="search for a small simple design")
    p.add_argument("--n", type=positive, required=True)
    p.add_argument("--k", type=positive, required=True)
    p.add_argument("--t", type=natural, required=True)
    p.add_argument("--lambda", dest="lambda", type=positive, required=True)
    p.add_argument("--method", choices=METHODS, default="exhaustive")
    p.add_argument("--seed", type=natural, default=0)
    p.add_argument("--timeout", type=float, default=None, help="seconds; 0 disables the limit")
    p.add_argument("--out", default=None)

    p = sub.add_parser("selftest", parents=[shared, output], help="run the invariant suites")
    p.add_argument("--only", action="append", default=None, help="suite name (repeatable)")

    p = sub.add_parser("docs-check", parents=[shared, output], help="re-run the transcripts in docs/")
    p.add_argument("--docs", default=None, help="directory of markdown pages")
    return parser


def run(request: CommandRequest, out: TextIO, overrides: Optional[Dict[str, Any]] = None) -> int:
    """Dispatch a validated request; library errors become exit codes."""
    handler = HANDLERS[request.command]
    with override_settings(**(overrides or {})):
        try:
            with logger.track_performance("command", command=request.command):
                return handler(request, out)
        except QDesignsError as e:
            error_tracker.track_error(e, {"command": request.command})
            print(f"qdesigns {request.command}: {e}", file=sys.stderr)
            return e.exit_code
        except MemoryError as e:
            error_tracker.track_error(e, {"command": request.command})
            print(f"qdesigns {request.command}: out of memory", file=sys.stderr)
            return EXIT_RESOURCE


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_log_level("development" if args.verbose else settings.ENVIRONMENT)

    params = {key: value for key, value in vars(args).items() if key not in GLOBAL_OPTIONS}
    request = CommandRequest(
        command=args.command,
        params=params,
        output_format=args.format,
        seed=params.get("seed") or 0,
        timeout=params.get("timeout"),
        workers=get_workers(args.workers),
    )
    overrides = {name: getattr(args, dest) for dest, name in CAP_OPTIONS.items()}
    status = run(request, stdout or sys.stdout, overrides)
    if status != EXIT_OK:
        logger.info("command_failed", command=request.command, exit_code=status, **error_tracker.get_error_stats())
    return status


if __name__ == "__main__":
    sys.exit(main())
