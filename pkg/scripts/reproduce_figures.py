#!/usr/bin/env python3
"""Run every figure preset and write plot-ready CSVs under one directory.

    python scripts/reproduce_figures.py --out results --jobs 4 [--only fig2 fig3a]
"""
import argparse
import sys
import time
from pathlib import Path

from quenchqsl.harness import PRESETS, RunConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=PRESETS, default=list(PRESETS))
    args = ap.parse_args()

    failed = 0
    for name in args.only:
        start = time.perf_counter()
        cfg = RunConfig.for_preset(name, output_dir=str(args.out / name), jobs=args.jobs)
        res = run(cfg)
        failed += len(res.failures)
        files = ", ".join(f["file"] for f in res.manifest["families"].values())
        print(f"{name:7s} {len(res.manifest['points']):3d} points  {time.perf_counter() - start:6.1f} s  -> {files}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
