"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 bad usage or input,
3 a resource limit (factoring or degree budget) stopped part of the work.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from . import order_engine as oe
from . import poly_tools as pt
from .bigint_factor import (
    Budget,
    CacheFormatError,
    FactorCache,
    format_factorization,
    is_prime,
)
from .tower_field import MAX_P, build_context

DEFAULT_MAX_LEVEL = {2: 5, 3: 2, 5: 1, 7: 1}

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3

TABLE_COLUMNS = ["i", "N_i", "factorization", "M_i", "O(c_i)", "O(a_i)", "M_i==N_i", "certainty"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    p: int
    max_level: int
    budget_seconds: float | None
    budget_iterations: int | None
    cache_path: str | None
    output_format: str
    seed: int
    degree_budget: int
    verbosity: int

    @property
    def budget(self) -> Budget:
        return Budget(seconds=self.budget_seconds, iterations=self.budget_iterations)


def seed_cache() -> FactorCache:
    text = resources.files("artin_tower").joinpath("data/seed_factors.txt").read_text("utf-8")
    return FactorCache.parse(text)


def load_cache(cfg: RunConfig) -> FactorCache:
    """User cache (if any) layered over the bundled seed factorizations."""
    if cfg.cache_path and Path(cfg.cache_path).exists():
        cache = FactorCache.load(cfg.cache_path)
    else:
        cache = FactorCache()
    cache.fallback = seed_cache()
    return cache


def _context(cfg: RunConfig, cache: FactorCache | None = None):
    return build_context(
        cfg.p,
        cfg.max_level,
        cache=cache if cache is not None else load_cache(cfg),
        factor_budget=cfg.budget,
    )


# -- formatting --------------------------------------------------------------


def _fact_text(ctx, i: int) -> str:
    f = ctx.n_factorizations[i]
    if f is not None:
        return format_factorization(f)
    gap = ctx.factor_gaps.get(i)
    if gap is None:
        return "?"
    known = format_factorization(gap.partial) if gap.partial.factors else ""
    return f"{known} * {gap.cofactor}?" if known else f"{gap.cofactor}?"


def _s(v) -> str:
    if v is None:
        return "?"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def report_row(ctx, r: oe.OrderReport) -> dict[str, str]:
    row = {
        "i": str(r.i),
        "N_i": str(r.n_i),
        "factorization": _fact_text(ctx, r.i),
        "M_i": _s(r.m_i),
        "O(c_i)": _s(r.order_c),
        "O(a_i)": _s(r.order_a),
        "M_i==N_i": _s(r.m_equals_n),
        "certainty": r.certainty,
    }
    if r.m_bounds is not None:
        row["M_i_divides"], row["M_i_multiple_of"] = (str(b) for b in r.m_bounds)
    return row


def config_doc(cfg: RunConfig) -> dict[str, str | None]:
    return {k: (None if v is None else str(v)) for k, v in asdict(cfg).items()}


def emit(cfg: RunConfig, rows: list[dict], checks: list[dict], out=None) -> None:
    out = out or sys.stdout
    if cfg.output_format == "json":
        json.dump({"config": config_doc(cfg), "rows": rows, "checks": checks}, out, indent=2)
        out.write("\n")
        return
    if rows or not checks:
        out.write("\t".join(TABLE_COLUMNS) + "\n")
        for row in rows:
            out.write("\t".join(row[c] for c in TABLE_COLUMNS) + "\n")
    if checks:
        if rows:
            out.write("\n")
        out.write("status\tcheck\tstatement\n")
        for c in checks:
            detail = f"\t{c['detail']}" if c.get("detail") else ""
            out.write(f"{c['status']}\t{c['name']}\t{c['paper_ref']}{detail}\n")


# -- commands ----------------------------------------------------------------


def cmd_table(cfg: RunConfig) -> int:
    ctx = _context(cfg)
    reports = oe.order_table(ctx) if cfg.max_level >= 0 else []
    emit(cfg, [report_row(ctx, r) for r in reports], [])
    return EXIT_LIMIT if any(not r.complete for r in reports) else EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import full_suite

    ctx = _context(cfg)
    reports, results = full_suite(ctx, cfg.max_level, seed=cfg.seed, degree_budget=cfg.degree_budget)
    checks = [
        {"name": r.name, "paper_ref": r.statement, "status": r.status, "detail": r.detail}
        for r in results
    ]
    if cfg.output_format == "json":
        emit(cfg, [report_row(ctx, r) for r in reports], checks)
    else:
        emit(cfg, [], checks)
        passed = sum(r.status == "PASS" for r in results)
        sys.stdout.write(f"\n{passed}/{len(results)} checks passed\n")
    return EXIT_OK if all(r.status == "PASS" for r in results) else EXIT_FAIL


def cmd_minpoly(cfg: RunConfig, target: str, level: int) -> int:
    if level < 0:
        raise UsageError("level must be >= 0")
    p = cfg.p
    if p ** (level + 1) > cfg.degree_budget:
        sys.stderr.write(f"degree {p ** (level + 1)} exceeds the degree budget {cfg.degree_budget}\n")
        return EXIT_LIMIT
    ctx = build_context(p, level, factor=False)
    x = ctx.canonical_generator(level) if target == "c" else ctx.a(level)
    try:
        f = pt.minimal_polynomial(ctx, x, cfg.degree_budget)
    except pt.DegreeBudgetExceeded as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_LIMIT
    closed = pt.c1_closed_form(p) if (target == "c" and level == 1) else None
    if cfg.output_format == "json":
        doc = {"config": config_doc(cfg), "target": f"{target}_{level}", "minpoly": pt.format_poly(f)}
        if closed is not None:
            doc["closed_form"] = pt.format_poly(closed)
            doc["verdict"] = "EQUAL" if closed == f else "UNEQUAL"
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(pt.format_poly(f) + "\n")
        if closed is not None:
            sys.stdout.write(f"closed form: {pt.format_poly(closed)}\n")
            sys.stdout.write(("EQUAL" if closed == f else "UNEQUAL") + "\n")
    return EXIT_OK if closed is None or closed == f else EXIT_FAIL


def cmd_factors(cfg: RunConfig, action: str, path: str | None) -> int:
    if action == "import":
        if path is None:
            raise UsageError("factors import needs a FILE")
        try:
            incoming = FactorCache.load(path, strict=True)
        except CacheFormatError as exc:
            sys.stderr.write(f"{path}: {exc}\n")
            return EXIT_USAGE
        except OSError as exc:
            raise UsageError(str(exc)) from None
        if cfg.cache_path:
            cache = load_cache(cfg)
            cache.update(incoming)
            cache.save(cfg.cache_path)
        sys.stdout.write(f"imported {len(incoming)} verified entries\n")
        return EXIT_OK

    cache = load_cache(cfg)
    ctx = _context(cfg, cache)
    if action == "show":
        for i, n in enumerate(ctx.n_values):
            sys.stdout.write(f"# N_{i}\n{n} = {_fact_text(ctx, i)}\n")
    elif action == "export":
        target = path or cfg.cache_path
        if target is None:
            raise UsageError("factors export needs a FILE or --cache")
        cache.save(target)
        sys.stdout.write(f"wrote {len(cache)} entries to {target}\n")
    if cfg.cache_path and action != "export":
        cache.save(cfg.cache_path)
    return EXIT_LIMIT if ctx.factor_gaps else EXIT_OK


# -- argument parsing --------------------------------------------------------


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--p", type=int, default=d(2), help="the prime (2, 3, 5 or 7)")
    parser.add_argument("--max-level", type=int, default=d(None), help="highest tower level")
    parser.add_argument("--cache", default=d(None), help="factor cache file")
    parser.add_argument("--format", choices=["tsv", "json"], default=d("tsv"))
    parser.add_argument("--budget-seconds", type=float, default=d(30.0),
                        help="time allowed per factorization")
    parser.add_argument("--budget-iterations", type=int, default=d(5_000_000),
                        help="Pollard-rho iterations allowed per factorization")
    parser.add_argument("--seed", type=int, default=d(0), help="seed for randomised checks")
    parser.add_argument("--degree-budget", type=int, default=d(pt.DEFAULT_DEGREE_BUDGET),
                        help="largest minimal-polynomial degree attempted")
    parser.add_argument("-v", "--verbose", action="count", default=d(0))


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artin-tower", description="Orders and identities in Artin-Schreier towers over F_p."
    )
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command")
    for name, help_ in [("table", "order table per level (default)"),
                        ("verify", "run every check at the configured levels")]:
        _common(sub.add_parser(name, help=help_), suppress=True)
    mp = sub.add_parser("minpoly", help="minimal polynomial of c_i or a_i over F_p")
    _common(mp, suppress=True)
    mp.add_argument("target", choices=["c", "a"])
    mp.add_argument("level", type=int)
    fp = sub.add_parser("factors", help="show, import or export the N_i factor cache")
    _common(fp, suppress=True)
    fp.add_argument("action", choices=["show", "import", "export"])
    fp.add_argument("file", nargs="?")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    p = args.p
    if p < 2 or not is_prime(p):
        raise UsageError("p must be prime")
    if p > MAX_P:
        raise UsageError(f"p = {p} is not supported (p <= {MAX_P})")
    max_level = DEFAULT_MAX_LEVEL[p] if args.max_level is None else args.max_level
    if max_level < -1:
        raise UsageError("--max-level must be >= -1")
    return RunConfig(
        p=p,
        max_level=max_level,
        budget_seconds=args.budget_seconds,
        budget_iterations=args.budget_iterations,
        cache_path=args.cache,
        output_format=args.format,
        seed=args.seed,
        degree_budget=args.degree_budget,
        verbosity=args.verbose,
    )


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s"
    )
    try:
        cfg = config_from_args(args)
        command = args.command or "table"
        if command == "table":
            return cmd_table(cfg)
        if command == "verify":
            return cmd_verify(cfg)
        if command == "minpoly":
            return cmd_minpoly(cfg, args.target, args.level)
        return cmd_factors(cfg, args.action, args.file)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
