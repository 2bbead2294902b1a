"""Command line entry point: ``cmr-mcdm analyze ...``.

Exit codes: 0 on full success, 2 when some factor combinations failed,
1 on fatal errors (bad config, unreadable input).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..ingest import IngestError
from .config import ConfigError, build_config, load_config_file
from .emit import emit_all
from .pipeline import run_pipeline

log = logging.getLogger("cmr_mcdm")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmr-mcdm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="run the factor matrix and write reports",
                       argument_default=None)
    a.add_argument("--data", help="CMR global CSV")
    a.add_argument("--calendar", help="restriction calendar CSV")
    a.add_argument("--localities", help="comma-separated keys: CC, CC:region or CC:region:subregion")
    a.add_argument("--level", choices=("region", "country"))
    a.add_argument("--seasonality", help="ma, trend or both")
    a.add_argument("--aggregation", help="mean, auc, rs (comma-separated) or all")
    a.add_argument("--granularity", help="50, 10 or both")
    a.add_argument("--comparison", help="pareto, epsilon, mean (comma-separated) or all")
    a.add_argument("--epsilon", help="comma-separated tolerances, e.g. 0.01,0.05,0.1")
    a.add_argument("--additive-epsilon", action="store_true", default=None,
                   help="use additive instead of multiplicative epsilon-dominance")
    a.add_argument("--categories", help="categories for single-category tables (default: all five)")
    a.add_argument("--window-length", type=int)
    a.add_argument("--period-length", type=int)
    a.add_argument("--ma-window", type=int)
    a.add_argument("--trailing-ma", dest="ma_centered", action="store_false", default=None,
                   help="trailing instead of centered moving average")
    a.add_argument("--max-gap", type=int)
    a.add_argument("--pin-shift", type=float, help="use this AUC global shift instead of computing it")
    a.add_argument("--out", help="output directory")
    a.add_argument("--formats", help="comma-separated subset of csv,json,svg")
    a.add_argument("--no-series-plots", dest="series_plots", action="store_false", default=None)
    a.add_argument("--config", help="JSON config file; flags override its values")
    a.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose") and v is not None}
    try:
        file_values, base = {}, None
        if args.config:
            file_values = load_config_file(Path(args.config))
            base = Path(args.config).resolve().parent
        config = build_config(file_values, flags, base)
        if config.data is None or config.calendar is None or config.out is None:
            raise ConfigError("--data, --calendar and --out are required")
        result = run_pipeline(config)
        emit_all(result, config.out, config.formats)
    except (ConfigError, IngestError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL
    for w in result.warnings:
        log.warning("%s", w)
    for f in result.failures:
        log.error("failed: %s: %s", f.what, f.error)
    if result.failures:
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
