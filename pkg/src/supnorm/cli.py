"""Command-line front end.

Subcommands: ``constants`` (effective-constants ledger), ``bounds``
(per-weight bound table), ``verify`` (direct numerical verification on the
modular group), ``kernel-check`` (kernel inequality grids).

Exit status: 0 success, 1 verification failure, 2 input error,
3 unsupported verification target, 4 kernel-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import engine, kernels
from .domain import LoadError, load_domain, modular_group
from .engine import format_float
from .verify import UnsupportedDomainError, verify_all

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3
EXIT_KERNEL = 4


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args) -> object:
    if args.domain is None:
        return modular_group()
    return load_domain(args.domain)


def _json_dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def cmd_constants(args) -> int:
    try:
        domain = _load(args)
        constants = engine.compute_constants(domain, Y0=args.Y0)
    except (LoadError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.format == "json":
        _emit(_json_dumps({"domain": constants.domain_name, "constants": constants.to_dict(),
                           "ledger": constants.to_ledger()}), args.out)
    else:
        lines = ["name,value,step"]
        for row in constants.to_ledger():
            value = row["value"]
            if value is None:
                rendered = "absent"
            elif isinstance(value, float):
                rendered = format_float(value)
            else:
                rendered = str(value)
            lines.append(f"{row['name']},{rendered},{row['step']}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        domain = _load(args)
        _, report = engine.run_algorithm(domain, Y0=args.Y0, k_min=args.k_min, k_max=args.k_max)
    except (LoadError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.format == "json":
        _emit(_json_dumps(report.to_json_dict()), args.out)
    else:
        _emit(report.to_csv(), args.out)
    if args.plot_prefix:
        for region in report.regions():
            lines = ["k,bound"]
            lines += [f"{k},{format_float(b)}" for k, b in report.plot_series(region)]
            safe = region.replace("^", "").replace("/", "_")
            Path(f"{args.plot_prefix}_{safe}.csv").write_text(
                "\n".join(lines) + "\n", encoding="utf-8"
            )
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        domain = _load(args)
    except (LoadError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    weights = tuple(int(w) for w in args.weights.split(",")) if args.weights else (12,)
    try:
        report = verify_all(weights=weights, grid_size=args.grid, Y0=args.Y0, domain=domain)
    except UnsupportedDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(report.to_text())
    if args.out:
        Path(args.out).write_text(_json_dumps(report.to_json_dict()), encoding="utf-8")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_kernel_check(args) -> int:
    results = kernels.run_kernel_checks(
        k_max=args.k_max, transform_tol=args.transform_tol
    )
    all_ok = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.detail}")
        all_ok = all_ok and res.passed
    if args.out:
        doc = [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]
        Path(args.out).write_text(_json_dumps(doc), encoding="utf-8")
    return EXIT_OK if all_ok else EXIT_KERNEL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supnorm",
        description="Effective averaged sup-norm bounds for even-weight cusp forms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, bounds=False):
        p.add_argument("--domain", metavar="PATH", default=None,
                       help="domain description file (default: built-in modular group)")
        p.add_argument("--Y0", type=float, default=2.0, help="base truncation height")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", metavar="PATH", default=None, help="write output here")
        if bounds:
            p.add_argument("--k-min", type=int, default=2)
            p.add_argument("--k-max", type=int, default=30)

    p = sub.add_parser("constants", help="compute the effective-constants ledger")
    common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("bounds", help="emit the per-weight bound table")
    common(p, bounds=True)
    p.add_argument("--plot-prefix", metavar="PATH", default=None,
                   help="also write per-region k,bound CSV files with this prefix")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run the direct numerical verification")
    common(p)
    p.add_argument("--grid", type=int, default=100, help="grid resolution per axis")
    p.add_argument("--weights", default="12",
                   help="comma-separated weights from 12,16,18,20,22,26")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("kernel-check", help="run the kernel inequality grids")
    p.add_argument("--k-max", type=int, default=12)
    p.add_argument("--transform-tol", type=float, default=1e-4,
                   help="relative tolerance for the heat-resolvent transform identity")
    p.add_argument("--out", metavar="PATH", default=None)
    p.set_defaults(func=cmd_kernel_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
