"""Command line entry point: ``optrace <command> --config <path>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from optrace.config import COMMANDS, FORMATS, RunConfig
from optrace.errors import ConfigurationError, OptraceError
from optrace.galerkin import GalerkinModel
from optrace.potential import check_conditions, sup_norm_estimate
from optrace.report import Table, emit_report
from optrace.resolvent import remainder_estimate
from optrace.traceformula import (
    fourier_boundary_sum,
    ibp_check,
    route_table,
    verify_convergence,
)

log = logging.getLogger("optrace")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _check(cfg: RunConfig):
    rep = check_conditions(cfg.potential(), cfg.k)
    rows = [
        ["q2_sup_norm", rep.q2_sup_norm],
        ["q2_upper_bound", rep.q2_upper_bound],
        ["q2_pass", rep.q2_pass],
    ]
    rows += [[f"q5_pass_order_{2 * i + 1}", ok] for i, ok in enumerate(rep.q5_pass_per_order)]
    rows += [["q6_mean_trace", rep.q6_mean_trace], ["q6_pass", rep.q6_pass], ["symmetric", rep.symmetric]]
    table = Table("check", ["quantity", "value"], rows, {"k": cfg.k, "warnings": rep.warnings()})
    flags = sum(1 for r in rows if r[1] is True), sum(1 for r in rows if r[1] is False)
    return table, f"check: {flags[0]} conditions pass, {flags[1]} fail"


def _model(cfg: RunConfig):
    Q = cfg.potential()
    model = GalerkinModel(Q, cfg.truncation())
    sup = sup_norm_estimate(Q)
    return model, model.clusters(sup, strict=sup < 0.5)


def _spectrum(cfg: RunConfig):
    model, clusters = _model(cfg)
    rows = []
    for m in range(max(cfg.p_list) + 1):
        for n, (lam, delta) in enumerate(zip(clusters[m], clusters.shifts[m]), start=1):
            rows.append([m, n, float(lam), float(delta)])
    meta = {"m_max": model.spec.m_max, "sup_norm_bound": clusters.sup_norm_bound}
    table = Table("spectrum", ["m", "n", "eigenvalue", "shift"], rows, meta)
    return table, f"spectrum: {len(rows)} eigenvalues in {max(cfg.p_list) + 1} clusters"


def _route_table(cfg: RunConfig):
    model, _ = _model(cfg)
    p_list = [p for p in cfg.p_list if p >= 1]
    if not p_list:
        raise ConfigurationError("p_list: theorem21 needs some p >= 1")
    rows = route_table(model, p_list, cfg.k, 2 * cfg.k + 2, cfg.contour())
    cols = ["p", "j", "eq24", "eq26", "residue_sum", "spread"]
    spread = max(r["spread"] for r in rows)
    table = Table("theorem21", cols, [[r[c] for c in cols] for r in rows], {"k": cfg.k})
    return table, f"theorem21: max spread {spread:.3e} over {len(rows)} (p, j) pairs"


def _identities(cfg: RunConfig):
    Q = cfg.potential()
    rows = []
    for m in range(1, max(10, max(cfg.p_list)) + 1):
        lhs, rhs = ibp_check(Q, m, cfg.k)
        rows.append(["ibp", m, lhs, rhs, abs(lhs - rhs)])
    for m_terms in sorted({max(p, 1) for p in cfg.p_list} | {1000}):
        partial, limit = fourier_boundary_sum(Q, cfg.k, m_terms)
        rows.append(["fourier_boundary_sum", m_terms, partial, limit, abs(partial - limit)])
    worst = max(r[4] for r in rows if r[0] == "ibp")
    table = Table("identities", ["identity", "m", "lhs", "rhs", "abs_diff"], rows, {"k": cfg.k})
    return table, f"identities: max by-parts mismatch {worst:.3e}"


def _remainder(cfg: RunConfig):
    model, clusters = _model(cfg)
    rows = []
    opts = cfg.contour()
    for p in cfg.p_list:
        for N in range(1, 2 * cfg.k + 3):
            rows.append([p, N, remainder_estimate(model, clusters, p, cfg.k, N, opts)])
    table = Table("remainder", ["p", "N", "remainder"], rows, {"k": cfg.k})
    last = [r[2] for r in rows if r[1] == 2 * cfg.k + 2][-1]
    return table, f"remainder: M_p^(N) at p={cfg.p_list[-1]}, N={2 * cfg.k + 2} is {last:.3e}"


def _verify(cfg: RunConfig):
    report = verify_convergence(cfg.potential(), cfg.k, cfg.p_list, cfg.truncation(), cfg.contour())
    last = report.rows[-1]
    flag = f" ({len(report.warnings)} warnings)" if report.warnings else ""
    return report, f"verify: p={last.p} LHS={last.lhs_partial:.12g} RHS={last.rhs:.12g} deviation={last.deviation:.3e}{flag}"


DISPATCH = {
    "check": _check,
    "spectrum": _spectrum,
    "theorem21": _route_table,
    "identities": _identities,
    "remainder": _remainder,
    "verify": _verify,
}


def run(cfg: RunConfig, out: str | None = None, fmt: str | None = None) -> tuple[Path, str]:
    """Execute one command and write its report; returns (path, summary line)."""
    fmt = fmt or cfg.output_format
    result, summary = DISPATCH[cfg.command](cfg)
    path = Path(out or cfg.output_path or f"optrace_{cfg.command}.{fmt}")
    emit_report(result, fmt, path)
    return path, summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optrace", description="Regularized trace formula laboratory")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="report path (default from config or optrace_<command>.<format>)")
    parser.add_argument("--format", choices=FORMATS, help="report format (default from config)")
    parser.add_argument("--allow-large-k", action="store_true", help="lift the k <= 4 guard")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config, allow_large_k=True if args.allow_large_k else None)
    except ConfigurationError as exc:
        print(f"optrace: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"optrace: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    cfg.command = args.command
    try:
        path, summary = run(cfg, args.out, args.format)
    except ConfigurationError as exc:
        print(f"optrace: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OptraceError, ArithmeticError, ValueError) as exc:
        print(f"optrace: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"optrace: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("report written to %s", path)
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
