"""Command-line entry point.

Exit codes: 0 on success, 2 when some densities failed (partial output is
still written), 1 on configuration or usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import ConfigError, load_config
from .sweep import fit_report, optimum_report, read_csv, run_sweep, write_csv

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARTIAL = 2


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udn", description="Coverage, ASE, transmit power and energy efficiency of "
                                "dense LOS/NLOS cellular networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True, help="JSON experiment configuration")
        if needs_out:
            p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--threads", type=_positive, default=1)
        return p

    for name, text in (("sweep", "analytical sweep (plus power/energy/MC when enabled)"),
                       ("power", "minimum transmit power per density"),
                       ("energy", "energy efficiency and closed-form optima"),
                       ("mc", "Monte Carlo outage and rate only")):
        p = common(sub.add_parser(name, help=text))
        p.add_argument("--seed", type=_u64, default=None, help="overrides monte_carlo.seed")
        p.add_argument("--mc-drops", type=_positive, default=None,
                       help="Monte Carlo drops per density; enables Monte Carlo")

    p = common(sub.add_parser("fit", help="rebuild the fit and optimum reports from a CSV"))
    p.add_argument("csv", help="CSV written by a previous sweep")

    common(sub.add_parser("validate", help="check a configuration file"), needs_out=False)

    p = sub.add_parser("claims", help="run the regression claims and write a JSON report")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--only", nargs="*", default=None, help="claim ids to run")
    p.add_argument("--seed", type=_u64, default=None)
    p.add_argument("--mc-drops", type=_positive, default=None)
    p.add_argument("--threads", type=_positive, default=1)
    return parser


def _write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _load(path):
    try:
        return load_config(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{path}: {d}", file=sys.stderr)
    return None


def _emit(cfg, rows, out):
    os.makedirs(out, exist_ok=True)
    _write(os.path.join(out, cfg.output.csv), write_csv(rows))
    _write(os.path.join(out, cfg.output.fit_report), fit_report(rows, cfg))
    _write(os.path.join(out, cfg.output.optimum_report), optimum_report(rows, cfg))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "claims":
        from .regression_targets import default_suite, run_claims
        suite = default_suite(mc_drops=args.mc_drops, seed=args.seed)
        if args.only:
            unknown = set(args.only) - {c.claim_id for c in suite}
            if unknown:
                print(f"error: unknown claim ids: {', '.join(sorted(unknown))}", file=sys.stderr)
                return EXIT_INVALID
            suite = [c for c in suite if c.claim_id in args.only]
        report = run_claims(suite, threads=args.threads)
        os.makedirs(args.out, exist_ok=True)
        _write(os.path.join(args.out, "claims.json"), json.dumps(report, indent=2) + "\n")
        for r in report["claims"]:
            print(f"{'PASS' if r['passed'] else 'FAIL'} {r['id']}: {r['summary']}")
        return EXIT_OK if report["passed"] else EXIT_PARTIAL

    cfg = _load(args.config)
    if cfg is None:
        return EXIT_INVALID

    if args.command == "validate":
        print(f"{args.config}: ok ({len(cfg.densities)} densities)")
        return EXIT_OK

    if args.command == "fit":
        try:
            with open(args.csv, encoding="utf-8") as fh:
                rows = read_csv(fh.read())
        except (OSError, ValueError) as exc:
            print(f"error: {args.csv}: {exc}", file=sys.stderr)
            return EXIT_INVALID
        os.makedirs(args.out, exist_ok=True)
        _write(os.path.join(args.out, cfg.output.fit_report), fit_report(rows, cfg))
        _write(os.path.join(args.out, cfg.output.optimum_report), optimum_report(rows, cfg))
        return EXIT_OK

    if args.command == "power" and cfg.power is None:
        print(f"{args.config}: power_search must be enabled for the power subcommand",
              file=sys.stderr)
        return EXIT_INVALID

    out = run_sweep(cfg, mode=args.command, threads=args.threads,
                    mc_drops=args.mc_drops, seed=args.seed)
    _emit(cfg, out.rows, args.out)
    if out.partial_failure:
        print(f"warning: {out.n_failed} of {len(out.rows)} densities had failures",
              file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
