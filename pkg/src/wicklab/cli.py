"""Command-line entry point.

Subcommands: verify (exact identities at one grid size), converge
(defect decay over refinement sweeps), ito-table (exact product entries
plus the decay of the null entries), xi (unification checks plus leakage
and overlap sweeps).  Human-readable status goes to stderr; the report
goes to --out or stdout.  Exit codes: 0 all passed, 1 a check failed,
2 the configuration was invalid, 3 an internal error.
"""

import argparse
import json
import sys
import traceback

from .errors import ConfigInvalid, WicklabError
from .report import SuiteConfig, emit_report, run_converge, run_verify

DEFAULT_SWEEP_BINS = [4, 8, 16, 32]

XI_CHECKS = ["xi-unitarity", "xi-covariance", "xi-number",
             "xi-sign-consistency", "xi-ordered-disjoint"]
XI_SWEEPS = ["xi-leakage", "ordered-overlap"]


def _int_or_list(text):
    parts = [p for p in text.split(",") if p]
    if not parts:
        raise argparse.ArgumentTypeError("expected an integer or comma list")
    try:
        values = [int(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return values[0] if len(values) == 1 else values


def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="JSON file with the same keys as the flags")
    shared.add_argument("--bins", type=_int_or_list,
                        help="bin count, or comma list for sweeps")
    shared.add_argument("--omega-max", type=float, dest="omega_max")
    shared.add_argument("--internal-dims", type=_int_or_list, dest="internal_dims")
    shared.add_argument("--truncation", type=int)
    shared.add_argument("--seed", type=int)
    shared.add_argument("--tolerance", type=float)
    shared.add_argument("--checks", help="comma list of check names")
    shared.add_argument("--out", help="report file path (default: stdout)")
    shared.add_argument("--format", choices=["json", "csv"], dest="fmt")

    parser = argparse.ArgumentParser(
        prog="wicklab",
        description="Numerical verification suite for spectral quantum "
                    "stochastic calculus on truncated Fock spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[shared],
                   help="run exact-identity checks at one grid size")
    sub.add_parser("converge", parents=[shared],
                   help="measure defect decay over a bin-count sweep")
    sub.add_parser("ito-table", parents=[shared],
                   help="probe the product table: exact entries and null decay")
    sub.add_parser("xi", parents=[shared],
                   help="unification checks plus leakage and overlap sweeps")
    return parser


def _merge_config(args):
    merged = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config file: {exc}")
        if not isinstance(file_cfg, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        allowed = {"omega_max", "bins", "internal_dims", "truncation", "seed",
                   "tolerance", "checks", "format", "out"}
        for key in file_cfg:
            if key not in allowed:
                raise ConfigInvalid(f"unknown config key {key!r}")
        merged.update(file_cfg)
    for key in ("bins", "omega_max", "internal_dims", "truncation", "seed",
                "tolerance", "out"):
        value = getattr(args, key)
        if value is not None:
            merged[key] = value
    if args.fmt is not None:
        merged["format"] = args.fmt
    if args.checks is not None:
        merged["checks"] = [c for c in args.checks.split(",") if c]
    merged["fmt"] = merged.pop("format", "json")
    return merged


def _status(line):
    print(f"[wicklab] {line}", file=sys.stderr)


def _announce(results, series):
    failed = 0
    for r in results:
        worst = max(r.defects.values()) if r.defects else 0.0
        verdict = "PASS" if r.passed else "FAIL"
        failed += 0 if r.passed else 1
        _status(f"check {r.name}: {verdict} "
                f"(max defect {worst:.3e}, tolerance {r.tolerance:g})")
    for s in series:
        verdict = "PASS" if s.passed else "FAIL"
        failed += 0 if s.passed else 1
        lo, hi = s.slope_band
        band = f"[{lo if lo is not None else '-inf'}, {hi if hi is not None else 'inf'}]"
        slope = "exact zero" if s.slope is None else f"slope {s.slope:.3f}"
        _status(f"sweep {s.name}: {verdict} ({slope}, band {band})")
    total = len(results) + len(series)
    _status(f"{total} checks: {total - failed} passed, {failed} failed")
    return failed


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        merged = _merge_config(args)
        results, series = [], []
        if args.command == "verify":
            config = SuiteConfig(**merged)
            results = run_verify(config)
        elif args.command == "converge":
            merged.setdefault("bins", DEFAULT_SWEEP_BINS)
            config = SuiteConfig(**merged)
            series = run_converge(config)
        else:
            if args.command == "ito-table":
                fixed_checks, sweeps = ["wick-ito-exact"], ["ito-null"]
            else:
                fixed_checks, sweeps = XI_CHECKS, XI_SWEEPS
            merged.pop("checks", None)
            bins = merged.pop("bins", 8)
            blist = bins if isinstance(bins, list) else [bins]
            fixed_config = SuiteConfig(bins=blist[-1], checks=fixed_checks, **merged)
            results = run_verify(fixed_config)
            sweep_bins = blist if len(blist) >= 3 else DEFAULT_SWEEP_BINS
            sweep_config = SuiteConfig(bins=sweep_bins, checks=sweeps, **merged)
            series = run_converge(sweep_config)
            config = SuiteConfig(bins=sweep_bins,
                                 checks=fixed_checks + sweeps, **merged)
        failed = _announce(results, series)
        text = emit_report(config, results, series)
        if config.out is None:
            sys.stdout.write(text)
        else:
            _status(f"report written to {config.out}")
        return 1 if failed else 0
    except ConfigInvalid as exc:
        _status(f"config error: {exc}")
        return 2
    except WicklabError as exc:
        _status(f"internal error: {exc}")
        return 3
    except Exception:
        traceback.print_exc()
        return 3


def console_main():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
