"""Sweep execution: scheduling, per-point cache, CSV/JSON output."""
import csv
import hashlib
import json
import logging
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .. import __version__
from .presets import task_for

log = logging.getLogger(__name__)

SIG_DIGITS = 12


@dataclass
class SweepResult:
    manifest: dict
    records: dict  # family -> list of row tuples, sorted by parameter point
    failures: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    out_dir: Path = None

    @property
    def ok(self):
        return not self.failures


def format_value(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return "nan" if math.isnan(x) else format(x, f".{SIG_DIGITS}g")
    return str(x)


def _point_key(cfg, task, point):
    d = cfg.to_dict()
    for k in ("output_dir", "jobs", "couplings", "n_values"):
        d.pop(k)
    blob = json.dumps({"task": task.name, "point": list(point), "config": d, "version": __version__}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _compute(args):
    cfg, point = args
    task = task_for(cfg)
    try:
        return point, task.compute(point, cfg), None
    except Exception as exc:  # reported per point, never fatal for the sweep
        log.debug("point %s failed:\n%s", point, traceback.format_exc())
        return point, None, f"{type(exc).__name__}: {exc}"


def _to_json(result):
    return {fam: [list(r) if not isinstance(r, dict) else r for r in rows] for fam, rows in result.items()}


def _from_json(result):
    return {fam: [r if isinstance(r, dict) else tuple(r) for r in rows] for fam, rows in result.items()}


def _load_cached(path):
    try:
        return _from_json(json.loads(path.read_text()))
    except (OSError, ValueError):
        return None


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row width {len(row)} does not match columns {columns}")
            w.writerow([format_value(x) for x in row])


def run(cfg, use_cache=True):
    """Execute every parameter point of `cfg` and write its outputs.

    Points already present in <out>/cache are loaded instead of computed.
    Failed points are collected; the sweep continues past them.
    """
    task = task_for(cfg)
    out = Path(cfg.output_dir)
    cache_dir = out / "cache"
    cache_dir.mkdir(parents=True, exist_ok=True)
    points = sorted(task.points(cfg))

    results, todo, n_cached = {}, [], 0
    for point in points:
        path = cache_dir / f"{_point_key(cfg, task, point)}.json"
        cached = _load_cached(path) if use_cache and path.exists() else None
        if cached is not None:
            results[point] = cached
            n_cached += 1
        else:
            todo.append(point)

    failures = []
    jobs = min(cfg.jobs, len(todo)) if todo else 1
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            computed = list(pool.map(_compute, [(cfg, p) for p in todo], chunksize=1))
    else:
        computed = [_compute((cfg, p)) for p in todo]
    for point, result, error in computed:
        if error is not None:
            failures.append({"point": list(point), "error": error})
            continue
        # round trip through JSON so fresh and cached records are identical
        result = _from_json(json.loads(json.dumps(_to_json(result))))
        results[point] = result
        (cache_dir / f"{_point_key(cfg, task, point)}.json").write_text(json.dumps(_to_json(result)))

    records = {fam: [] for fam in task.columns}
    reports = []
    for point in points:
        if point not in results:
            continue
        for fam, rows in results[point].items():
            if fam == "_reports":
                reports.extend(rows)
            else:
                records.setdefault(fam, []).extend(rows)

    families = {}
    for fam, columns in task.columns.items():
        fname = f"{fam}.csv"
        write_csv(out / fname, columns, records.get(fam, []))
        families[fam] = {"file": fname, "columns": list(columns), "rows": len(records.get(fam, []))}

    manifest = {
        "config_hash": cfg.digest(),
        "code_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "task": task.name,
        "description": task.description,
        "config": cfg.to_dict(),
        "tolerances": cfg.tol.as_dict(),
        "points": [list(p) for p in points],
        "points_cached": n_cached,
        "points_computed": len(todo) - len(failures),
        "failures": failures,
        "families": families,
        "csv_precision": f"{SIG_DIGITS} significant digits",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (out / "reports.json").write_text(json.dumps(reports, indent=2, sort_keys=True) + "\n")
    for f in failures:
        log.error("point %s failed: %s", f["point"], f["error"])
    return SweepResult(manifest, records, failures, reports, out)
