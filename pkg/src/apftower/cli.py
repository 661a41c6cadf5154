"""Command-line front end.

    apftower stage verify  --config tower.json --levels 4
    apftower frame certify --config tower.json --level 3
    apftower delta         --config tower.json --k 4
    apftower ortho search  --config tower.json --jmax 2 --qbound 50 --max-size 3
    apftower dim           --config tower.json --jmax 20 --window 5

Exit codes: 0 every check passed, 2 a check failed (or a size budget was
exceeded), 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from pathlib import Path

from . import __version__
from .dimension import dimension_trace
from .exact import parse_int
from .frame import LEVEL_BUDGET, certify_frame
from .measure import DEFAULT_TAIL_TOL, BudgetError, TailError, delta_empirical, delta_lower_bound
from .ortho import enumerate_zero_set, parity_hypotheses, search_orthogonal_sets, zero_pool
from .report import dumps, fmt_float
from .stage import StageSizeError, build_stage_matrices, verify_deviation_bound, verify_unitary
from .tower import TowerError, load_tower_config, summability_report

EXIT_PASS, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_arg(minimum: int):
    def conv(text: str) -> int:
        try:
            v = parse_int(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}")
        return v

    return conv


def _tol_arg(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError("tolerances must be positive and finite")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apftower", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"apftower {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="tower configuration (JSON)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--workers", type=_int_arg(1), default=1, help="threads for per-frequency work")
    common.add_argument("--timing", action="store_true", help="add wall-clock time (breaks byte-identity)")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    stage = sub.add_parser("stage", help="per-stage matrix checks")
    stage_sub = stage.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sv = stage_sub.add_parser("verify", parents=[common])
    sv.add_argument("--levels", type=_int_arg(1), default=4)
    sv.add_argument("--tol", type=_tol_arg, default=1e-9)
    sv.set_defaults(handler=cmd_stage_verify)

    frame = sub.add_parser("frame", help="level-n frame bounds")
    frame_sub = frame.add_subparsers(dest="action", required=True, parser_class=_Parser)
    fc = frame_sub.add_parser("certify", parents=[common])
    fc.add_argument("--level", type=_int_arg(1), default=3)
    fc.add_argument("--tail-tol", type=_tol_arg, default=DEFAULT_TAIL_TOL)
    fc.add_argument("--tol", type=_tol_arg, default=1e-8)
    fc.add_argument("--budget", type=_int_arg(1), default=LEVEL_BUDGET)
    fc.set_defaults(handler=cmd_frame_certify)

    dl = sub.add_parser("delta", parents=[common], help="tail-transform floor delta(Lambda)")
    dl.add_argument("--k", type=_int_arg(1), default=4)
    dl.add_argument("--tail-tol", type=_tol_arg, default=DEFAULT_TAIL_TOL)
    dl.add_argument("--tol", type=_tol_arg, default=1e-9)
    dl.add_argument("--budget", type=_int_arg(1), default=LEVEL_BUDGET)
    dl.set_defaults(handler=cmd_delta)

    ortho = sub.add_parser("ortho", help="mutually orthogonal exponentials")
    ortho_sub = ortho.add_subparsers(dest="action", required=True, parser_class=_Parser)
    os_ = ortho_sub.add_parser("search", parents=[common])
    os_.add_argument("--jmax", type=_int_arg(1), default=2)
    os_.add_argument("--qbound", type=_int_arg(0), default=10)
    os_.add_argument("--max-size", type=_int_arg(2), default=3)
    os_.set_defaults(handler=cmd_ortho)

    dim = sub.add_parser("dim", parents=[common], help="Hausdorff-dimension quotients")
    dim.add_argument("--jmax", type=_int_arg(1), default=20)
    dim.add_argument("--window", type=_int_arg(1), default=1)
    dim.set_defaults(handler=cmd_dim)
    return parser


def _envelope(command: str, tower, params: dict) -> dict:
    return {
        "tool": "apftower",
        "version": __version__,
        "command": command,
        "tower": {"description": tower.description, "config": tower.config},
        "parameters": params,
    }


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_stage_verify(tower, args):
    rows, ok = [], True
    for j, st in enumerate(tower.stages(args.levels), start=1):
        sm = build_stage_matrices(st)
        row = {
            "j": j,
            "N": st.N,
            "M": st.M,
            "eps_measured": sm.eps_measured,
            "sigma_min": sm.sigma_min,
            "sigma_max": sm.sigma_max,
        }
        s = st.structured
        if s is not None:
            uni = verify_unitary(sm.H, args.tol)
            dev = verify_deviation_bound(sm, st, args.tol)
            chain = sm.sigma_max <= 1.0 + sm.dev_op + args.tol and sm.sigma_min >= 1.0 - sm.dev_op - args.tol
            row.update(
                K=s.K,
                alpha=s.alpha,
                eps_analytic=st.eps_analytic,
                dev_op=sm.dev_op,
                dev_frob=sm.dev_frob,
                op_bound=dev.op_bound,
                frob_sq_bound=dev.frob_sq_bound,
                unitary_deviation=uni.max_deviation,
                checks={**dev.checks, "unitary": uni.passed, "triangle_chain": chain},
            )
            row["pass"] = all(row["checks"].values())
        else:
            row["pass"] = True
        ok &= row["pass"]
        rows.append(row)

    if args.format == "csv":
        cols = ["j", "N", "M", "K", "alpha", "eps_analytic", "eps_measured", "sigma_min",
                "sigma_max", "dev_op", "dev_frob", "pass"]
        return _csv(cols, [[r.get(c, "") for c in cols] for r in rows]), ok

    analytic = summability_report(tower, args.levels, "analytic")
    measured = summability_report(tower, args.levels, "measured")
    report = _envelope("stage verify", tower, {"levels": args.levels})
    report["tolerances"] = {"tol": args.tol}
    report["stages"] = rows
    report["summability"] = {
        kind: {
            "partial_sums": r.partial_sums,
            "flagged": r.flagged,
            "tail_bound": r.tail_bound,
            "tail_note": r.tail_note,
        }
        for kind, r in (("analytic", analytic), ("measured", measured))
    }
    report["pass"] = ok
    return report, ok


def cmd_frame_certify(tower, args):
    cert = certify_frame(tower, args.level, args.tail_tol, args.tol, args.budget, args.workers)
    levels = [
        {
            "level": lv.n,
            "A": lv.A,
            "B": lv.B,
            "window": list(lv.window),
            "delta_emp": lv.delta_emp,
            "delta_argmin": lv.delta_argmin,
            "c0": cert.c0,
            "eps_measured": lv.eps_measured,
            "A_unweighted": lv.A_unweighted,
            "B_unweighted": lv.B_unweighted,
            "degenerate": lv.degenerate,
            "pass": lv.passed,
        }
        for lv in cert.levels
    ]
    if args.format == "csv":
        cols = ["level", "A", "B", "window_lo", "window_hi", "delta_emp", "A_unweighted", "B_unweighted", "pass"]
        rows = [[r["level"], r["A"], r["B"], r["window"][0], r["window"][1], r["delta_emp"],
                 r["A_unweighted"], r["B_unweighted"], r["pass"]] for r in levels]
        return _csv(cols, rows), cert.passed
    report = _envelope("frame certify", tower, {"level": args.level, "budget": args.budget})
    report["tolerances"] = dict(cert.tolerances)
    report["levels"] = levels
    report["c0"] = cert.c0
    report["c0_applies"] = cert.c0_applies
    report["limit_window"] = list(cert.limit_window)
    report["limit_note"] = cert.limit_note
    report["failure"] = cert.failure
    report["pass"] = cert.passed
    return report, cert.passed


def cmd_delta(tower, args):
    c0 = delta_lower_bound(tower)
    emp = delta_empirical(tower, args.k, args.tail_tol, args.budget, args.workers)
    structured = tower.is_structured(args.k)
    ok = emp.value >= c0.value - args.tol if structured else emp.value > 0.0
    if args.format == "csv":
        rows = [[k, v, lam] for k, v, lam in emp.per_level]
        return _csv(["k", "min_abs_sq", "argmin_lambda"], rows), ok
    report = _envelope("delta", tower, {"k": args.k, "budget": args.budget})
    report["tolerances"] = {"tail_tol": args.tail_tol, "tol": args.tol}
    report["c0"] = {"value": c0.value, "error": c0.error, "depth": c0.depth, "applies": structured}
    report["delta_emp"] = {
        "value": emp.value,
        "argmin": {"k": emp.argmin[0], "lambda": emp.argmin[1]} if emp.argmin else None,
        "error": emp.error,
        "per_level": [{"k": k, "min": v, "lambda": lam} for k, v, lam in emp.per_level],
    }
    report["gap"] = emp.value - c0.value
    report["pass"] = ok
    return report, ok


def cmd_ortho(tower, args):
    pool = zero_pool(tower, args.jmax, args.qbound)
    res = search_orthogonal_sets(tower, pool, args.max_size, args.jmax)
    hyp = parity_hypotheses(tower, args.jmax)
    ok = True
    if hyp is None:
        ok = res.clique_size <= 2 and res.certified_triples == res.open_triples
    if args.format == "csv":
        rows = [[i, " ".join(str(x) for x in c)] for i, c in enumerate(res.cliques)]
        return _csv(["index", "clique"], rows), ok
    report = _envelope(
        "ortho search", tower, {"jmax": args.jmax, "qbound": args.qbound, "max_size": args.max_size}
    )
    report["pool"] = {"size": res.pool_size, "zero_set_elements": len(enumerate_zero_set(tower, args.jmax, args.qbound))}
    report["edges"] = res.edges
    report["max_clique_size"] = res.clique_size
    report["truncation"] = f"zero-set membership tested for levels j <= {args.jmax} only"
    report["cliques"] = [list(c) for c in res.cliques]
    report["cliques_truncated"] = res.truncated
    report["parity"] = {
        "hypotheses": "satisfied" if hyp is None else f"not satisfied: {hyp}",
        "open_triples": res.open_triples,
        "certified_triples": res.certified_triples,
        "sample": [
            {
                "triple": list(item["triple"]),
                "certificates": [
                    {"levels": list(c.levels), "verdict": c.verdict, "lhs": c.lhs, "rhs": c.rhs,
                     "identity_holds": c.identity_holds}
                    for c in item["certificates"]
                ],
            }
            for item in res.certificates
        ],
    }
    report["pass"] = ok
    return report, ok


def cmd_dim(tower, args):
    tr = dimension_trace(tower, args.jmax, args.window)
    if args.format == "csv":
        return tr.to_csv(), True
    report = _envelope("dim", tower, {"jmax": args.jmax, "window": args.window})
    report["trace"] = [
        {"j": j, "logM_cum": lm, "logN_cum": ln, "q_j": q}
        for j, (lm, ln, q) in enumerate(zip(tr.log_m, tr.log_n, tr.quotients), start=1)
    ]
    report["liminf_estimate"] = tr.liminf_estimate
    report["closed_form_limit"] = tr.closed_form_limit
    report["pass"] = True
    return report, True


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        tower = load_tower_config(args.config)
    except OSError as exc:
        print(f"apftower: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TowerError as exc:
        print(f"apftower: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report, ok = args.handler(tower, args)
    except (BudgetError, StageSizeError, TailError) as exc:
        print(f"apftower: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (TowerError, ValueError) as exc:
        print(f"apftower: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if isinstance(report, dict):
        if args.timing:
            report["wall_clock_seconds"] = time.perf_counter() - started
        text = dumps(report)
    else:
        text = report
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())
