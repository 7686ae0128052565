"""Command-line entry point.

    quenchqsl run --config cfg.yaml [--preset fig1a] [--out dir] [--jobs 4]
    quenchqsl verify [--quick] [--tolerance name=value ...]
    quenchqsl spectral --input series.csv --window hann|none [--output S.csv]
        [--point COUPLING,N]   (needed when the CSV holds several sweep points)

Exit codes: 0 success, 1 computation failure, 2 configuration error.
"""
import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .config import DEFAULT_TOLERANCES
from .harness import PRESETS, ConfigError, RunConfig, run, verify
from .harness.runner import write_csv
from .series import SurvivalSeries
from .spectral import spectral_centroid_spread, spectral_function

EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="quenchqsl", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a parameter sweep")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--preset", choices=PRESETS)
    r.add_argument("--out", type=Path, help="output directory (overrides the config)")
    r.add_argument("--jobs", type=int, help="worker processes (overrides the config)")
    r.add_argument("--no-cache", action="store_true", help="recompute every point")

    v = sub.add_parser("verify", help="run the oracle suite")
    v.add_argument("--quick", action="store_true", help="smaller sizes, a few seconds")
    v.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE",
                   help="override one tolerance; repeatable")

    s = sub.add_parser("spectral", help="spectral function of a survival series CSV")
    s.add_argument("--input", required=True, type=Path,
                   help="CSV with columns t, chi_re, chi_im (extra columns ignored)")
    s.add_argument("--window", choices=("hann", "none"), default="none")
    s.add_argument("--output", type=Path, help="CSV for (omega, S); default <input>.spectral.csv")
    s.add_argument("--point", metavar="COUPLING,N", help="select one sweep point from a multi-point series CSV")
    return p


def _cmd_run(args):
    cfg = RunConfig.load(args.config, preset=args.preset)
    cfg = cfg.with_overrides(output_dir=str(args.out) if args.out else None, jobs=args.jobs)
    cfg.validate()
    result = run(cfg, use_cache=not args.no_cache)
    m = result.manifest
    print(f"{m['task']}: {len(m['points'])} points ({m['points_cached']} cached), "
          f"{len(result.failures)} failed -> {result.out_dir}")
    for f in result.failures:
        print(f"  failed {f['point']}: {f['error']}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_COMPUTE


def _parse_tolerances(items):
    overrides = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"tolerance override {item!r} is not NAME=VALUE")
        try:
            overrides[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value in {item!r}") from exc
    try:
        return DEFAULT_TOLERANCES.updated(**overrides)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_verify(args):
    tol = _parse_tolerances(args.tolerance)
    report = verify(tol, quick=args.quick, emit=print)
    print(report.lines()[-1])
    return EXIT_OK if report.ok else EXIT_COMPUTE


def _read_series(path, point=None):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not rows or not {"t", "chi_re", "chi_im"} <= set(rows[0]):
        raise ConfigError(f"{path} needs columns t, chi_re, chi_im")
    if {"coupling", "N"} <= set(rows[0]):
        points = sorted({(float(r["coupling"]), int(r["N"])) for r in rows})
        if point is not None:
            try:
                c, n = point.split(",")
                want = (float(c), int(n))
            except ValueError as exc:
                raise ConfigError(f"--point expects COUPLING,N, got {point!r}") from exc
            if want not in points:
                raise ConfigError(f"point {want} not in {path}; available: {points}")
            rows = [r for r in rows if (float(r["coupling"]), int(r["N"])) == want]
        elif len(points) > 1:
            raise ConfigError(f"{path} holds {len(points)} sweep points; pick one with --point from {points}")
    t = np.array([float(r["t"]) for r in rows])
    chi = np.array([float(r["chi_re"]) + 1j * float(r["chi_im"]) for r in rows])
    return SurvivalSeries(t, chi)


def _cmd_spectral(args):
    series = _read_series(args.input, args.point)
    try:
        sf = spectral_function(series, args.window)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = args.output or args.input.with_suffix(".spectral.csv")
    write_csv(out, ("omega", "S"), [(float(w), float(s)) for w, s in zip(sf.omegas, sf.values)])
    mean, spread = spectral_centroid_spread(sf)
    print(f"{len(sf.omegas)} frequencies, centroid {mean:.6g}, spread {spread:.6g} -> {out}")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "verify": _cmd_verify, "spectral": _cmd_spectral}


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        logging.getLogger("quenchqsl").debug("unhandled", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
