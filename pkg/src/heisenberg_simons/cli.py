"""Command line batch runner.

Configuration is one YAML file::

    seed: 7                     # required
    tolerances: {scale: 1.0}
    sampling: {count: 20}       # default points per surface
    checks: all                 # or a list of check ids
    surfaces:
      - gallery: catenoid
        n: 2
        params: {E: 1.0}
      - dsl: "(- x1 (* 0.25 t))"     # or  file: surface.dsl
        n: 2
        id: tilted
        region: {kind: box, lo: [-1, -1, -1, -1, -1], hi: [1, 1, 1, 1, 1]}
        count: 10
    experiments: {k: [0, 0.5, 1, 1.5, 2], delta: [0, 0.001, 1], beta: 1.0}
    output: {dir: reports, prefix: run}

The output directory may also come from ``--out`` or the
``HEISENBERG_SIMONS_OUT`` environment variable, in that order of precedence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dsl import DSLError
from .extrinsic import SurfaceGeometry
from .surface_defs import GALLERY_IDS, Region, SurfaceDef, gallery, sample_points
from .verifier import CATALOG, CheckReport, SurfaceJob, Tolerances, run_batch

SCHEMA_VERSION = "1.0"
CSV_COLUMNS = ("surface", "point", "check_id", "lhs", "rhs", "residual", "margin", "tol", "pass", "anchor")
OUT_ENV = "HEISENBERG_SIMONS_OUT"

DEFAULT_CONFIG = {
    "seed": 20240917,
    "tolerances": {"scale": 1.0},
    "sampling": {"count": 20},
    "checks": "all",
    "surfaces": [
        {"gallery": "vertical_hyperplane", "n": 2},
        {"gallery": "vertical_hyperplane", "n": 1},
        {"gallery": "horizontal_plane", "n": 2},
        {"gallery": "hyperbolic_paraboloid", "n": 2},
        {"gallery": "catenoid", "n": 2, "params": {"E": 0.5}},
        {"gallery": "catenoid", "n": 2, "params": {"E": 1.0}},
        {"gallery": "catenoid", "n": 2, "params": {"E": 2.0}},
        {"gallery": "catenoid", "n": 1, "params": {"E": 1.0}},
        {"gallery": "helicoid", "n": 2},
    ],
    "experiments": {"k": [0.0, 0.5, 1.0, 1.5, 2.0], "delta": [0.0, 1e-3, 1.0]},
    "output": {"dir": "reports", "prefix": "run"},
}

_TOP_KEYS = {"seed", "tolerances", "sampling", "checks", "surfaces", "experiments", "output"}
_SURFACE_KEYS = {"gallery", "dsl", "file", "n", "params", "orientation", "id", "region", "count"}
_EXPERIMENT_KEYS = {"k", "delta", "simons_kato_k", "g_sk_k", "beta", "curvature_k", "radii", "structure_points", "appendix_triples", "combinations"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int
    checks: list[str]
    jobs: list[SurfaceJob]
    tol: Tolerances
    experiments: dict = field(default_factory=dict)
    out_dir: Path = Path("reports")
    prefix: str = "run"
    raw: dict = field(default_factory=dict)


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _region(item, n: int) -> Region:
    _require(isinstance(item, dict), "region must be a mapping")
    unknown = set(item) - {"kind", "lo", "hi", "r_in", "r_out", "z_band"}
    _require(not unknown, f"unknown region keys: {sorted(unknown)}")
    kind = item.get("kind", "box")
    _require(kind in ("box", "annulus"), f"region kind must be box or annulus, got {kind!r}")
    if kind == "box":
        for key in ("lo", "hi"):
            _require(len(item.get(key, ())) == 2 * n + 1, f"region {key} needs {2 * n + 1} entries")
    z_band = item.get("z_band")
    return Region(kind, tuple(item.get("lo", ())), tuple(item.get("hi", ())), float(item.get("r_in", 0.0)), float(item.get("r_out", 1.0)), None if z_band is None else tuple(z_band))


def _surface_job(item, index: int, seed: int, default_count: int, base: Path) -> SurfaceJob:
    _require(isinstance(item, dict), f"surface #{index} must be a mapping")
    unknown = set(item) - _SURFACE_KEYS
    _require(not unknown, f"surface #{index}: unknown keys {sorted(unknown)}")
    sources = [k for k in ("gallery", "dsl", "file") if k in item]
    _require(len(sources) == 1, f"surface #{index}: give exactly one of gallery, dsl, file")
    n = item.get("n", 2)
    _require(isinstance(n, int) and n >= 1, f"surface #{index}: n must be a positive integer")
    count = item.get("count", default_count)
    _require(isinstance(count, int) and count >= 1, f"surface #{index}: count must be a positive integer")
    job_seed = seed + 7919 * (index + 1)
    if "gallery" in item:
        gid = item["gallery"]
        _require(gid in GALLERY_IDS, f"surface #{index}: unknown gallery id {gid!r} (known: {', '.join(GALLERY_IDS)})")
        region = _region(item["region"], n) if "region" in item else None
        try:
            return SurfaceJob.from_gallery(gid, n, item.get("params"), count, job_seed, region)
        except ValueError as exc:
            raise ConfigError(f"surface #{index}: {exc}") from exc
    _require("region" in item, f"surface #{index}: user surfaces need a sampling region")
    text = item["dsl"] if "dsl" in item else (base / item["file"]).read_text()
    try:
        surface = SurfaceDef.from_text(text, n, int(item.get("orientation", 1)), str(item.get("id", f"user{index}")))
    except (DSLError, ValueError) as exc:
        raise ConfigError(f"surface #{index}: {exc}") from exc
    return SurfaceJob(surface.label, surface, _region(item["region"], n), count, job_seed)


def load_config(raw: dict, base: Path = Path("."), seed: int | None = None, tol_scale: float | None = None, out: str | None = None) -> RunConfig:
    """Validate a parsed config; command line values override file values."""
    _require(isinstance(raw, dict), "config must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")
    seed = raw.get("seed") if seed is None else seed
    _require(isinstance(seed, int) and not isinstance(seed, bool), "seed is mandatory and must be an integer")

    checks = raw.get("checks", "all")
    if checks == "all":
        checks = list(CATALOG)
    _require(isinstance(checks, list) and checks, "checks must be 'all' or a non-empty list")
    bad = [c for c in checks if c not in CATALOG]
    _require(not bad, f"unknown check ids: {', '.join(map(str, bad))} (see list-checks)")

    tol_raw = raw.get("tolerances") or {}
    _require(isinstance(tol_raw, dict) and set(tol_raw) <= {"scale"}, "tolerances accepts only 'scale'")
    scale = float(tol_raw.get("scale", 1.0) if tol_scale is None else tol_scale)
    _require(scale > 0, "tolerance scale must be positive")

    sampling = raw.get("sampling") or {}
    _require(isinstance(sampling, dict) and set(sampling) <= {"count"}, "sampling accepts only 'count'")
    count = sampling.get("count", 20)

    exps = dict(raw.get("experiments") or {})
    unknown = set(exps) - _EXPERIMENT_KEYS
    _require(not unknown, f"unknown experiment parameters: {sorted(unknown)}")
    for k in np.atleast_1d(exps.get("k", [])):
        _require(0.0 <= float(k) <= 2.0, f"k = {k} outside [0, 2]")
    for d in np.atleast_1d(exps.get("delta", [])):
        _require(float(d) >= 0.0, f"delta = {d} must be non-negative")

    surfaces = raw.get("surfaces")
    _require(isinstance(surfaces, list) and surfaces, "surfaces must be a non-empty list")
    jobs = [_surface_job(s, i, seed, count, base) for i, s in enumerate(surfaces)]

    output = raw.get("output") or {}
    _require(isinstance(output, dict) and set(output) <= {"dir", "prefix"}, "output accepts only 'dir' and 'prefix'")
    out_dir = out or os.environ.get(OUT_ENV) or output.get("dir", "reports")
    return RunConfig(seed, checks, jobs, Tolerances(scale), exps, Path(out_dir), str(output.get("prefix", "run")), raw)


# ---------------------------------------------------------------------------
# Report writing
# ---------------------------------------------------------------------------


def _num(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _point_text(p) -> str:
    return "" if p is None else " ".join(_num(v) for v in p)


def csv_text(reports: list[CheckReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([r.surface, _point_text(r.point), r.check_id, _num(r.lhs), _num(r.rhs), _num(r.residual), _num(r.margin), _num(r.tol), r.status, r.anchor])
    return buf.getvalue()


def summarize(reports: list[CheckReport]) -> list[dict]:
    rows: dict[str, dict] = {}
    for r in reports:
        row = rows.setdefault(r.check_id, {"check_id": r.check_id, "anchor": r.anchor, "pass": 0, "fail": 0, "precondition-failed": 0, "info": 0, "worst_residual": 0.0})
        row[r.status] += 1
        if r.asserted and r.kind in ("equality", "inequality"):
            row["worst_residual"] = max(row["worst_residual"], r.residual)
    return list(rows.values())


def summary_table(rows: list[dict], width: int = 72) -> str:
    head = f"{'check':26s} {'pass':>5s} {'fail':>5s} {'gate':>5s} {'info':>5s} {'worst':>9s}  anchor"
    lines = [head, "-" * len(head)]
    for r in rows:
        anchor = r["anchor"] if len(r["anchor"]) <= width else r["anchor"][: width - 3] + "..."
        lines.append(f"{r['check_id']:26s} {r['pass']:5d} {r['fail']:5d} {r['precondition-failed']:5d} {r['info']:5d} {r['worst_residual']:9.2e}  {anchor}")
    return "\n".join(lines)


def write_reports(cfg: RunConfig, reports: list[CheckReport]) -> dict[str, Path]:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    paths = {k: cfg.out_dir / f"{cfg.prefix}.{k}" for k in ("csv", "json")}
    paths["meta"] = cfg.out_dir / f"{cfg.prefix}.meta.json"
    paths["csv"].write_text(csv_text(reports))
    failures = sum(r.status == "fail" for r in reports)
    report = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "seed": cfg.seed,
        "tolerance_scale": cfg.tol.scale,
        "config": cfg.raw,
        "anchors": {cid: info.anchor for cid, info in CATALOG.items() if cid in cfg.checks},
        "summary": summarize(reports),
        "failures": failures,
        "reports": [r.to_dict() for r in reports],
    }
    paths["json"].write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    meta = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
    }
    paths["meta"].write_text(json.dumps(meta, indent=1) + "\n")
    return paths


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        if args.config:
            path = Path(args.config)
            raw = yaml.safe_load(path.read_text())
            base = path.parent
        else:
            raw, base = DEFAULT_CONFIG, Path(".")
        cfg = load_config(raw, base, args.seed, args.tol_scale, args.out)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        reports = run_batch(cfg.jobs, cfg.checks, cfg.seed, cfg.tol, cfg.experiments, workers=max(1, args.jobs))
    except Exception as exc:  # a check crashed; surface it as a failed run
        print(f"check execution failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    paths = write_reports(cfg, reports)
    print(summary_table(summarize(reports)))
    failures = [r for r in reports if r.status == "fail"]
    print(f"\n{len(reports)} results, {len(failures)} failed; reports in {paths['csv'].parent}")
    for r in failures[:20]:
        print(f"  FAIL {r.check_id} on {r.surface}: residual {r.residual:.3e} > tol {r.tol:.1e} {r.notes}")
    return 1 if failures else 0


def cmd_list_checks(args) -> int:
    for cid, info in CATALOG.items():
        hyp = f" [requires {', '.join(info.hypotheses)}]" if info.hypotheses else ""
        print(f"{cid:26s} {info.scope:6s} {info.kind:10s} {info.anchor}{hyp}")
    print(f"\n{len(CATALOG)} checks")
    return 0


def cmd_gallery(args) -> int:
    ids = [args.id] if args.id else list(GALLERY_IDS)
    for gid in ids:
        if gid not in GALLERY_IDS:
            print(f"unknown gallery id {gid!r}", file=sys.stderr)
            return 2
        params = {"E": args.E} if gid == "catenoid" else {}
        entry = gallery(gid, args.n, params)
        props = ", ".join(f"{k}: {v}" for k, v in entry.expected_properties.items())
        print(f"{entry.surface.label}: u = {entry.surface.text}")
        print(f"  properties  {props}")
        if entry.notes:
            print(f"  notes       {entry.notes}")
        if not entry.known:
            continue
        pts = sample_points(entry.surface, entry.region, args.count, args.seed)
        measured = SurfaceGeometry(entry.surface, pts).values()
        for kv in entry.known:
            print(f"  {kv.quantity}: {kv.anchor}")
            expected = kv.formula(pts)
            for p, e, m in zip(pts, expected, measured[kv.quantity]):
                print(f"    point ({', '.join(f'{v:+.4f}' for v in p)})  expected {e:+.12e}  measured {m:+.12e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heisenberg-simons", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="run checks from a config file (the built-in gallery config if omitted)")
    run.add_argument("--config", help="YAML run configuration")
    run.add_argument("--out", help="output directory (overrides config and environment)")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--tol-scale", type=float, help="multiply every tolerance")
    run.set_defaults(func=cmd_run)
    lc = sub.add_parser("list-checks", help="print every check id with its anchor formula")
    lc.set_defaults(func=cmd_list_checks)
    gal = sub.add_parser("gallery", help="print known-value tables for the example surfaces")
    gal.add_argument("--id", help="one gallery id")
    gal.add_argument("--n", type=int, default=2)
    gal.add_argument("--E", type=float, default=1.0, help="catenoid parameter")
    gal.add_argument("--count", type=int, default=3)
    gal.add_argument("--seed", type=int, default=0)
    gal.set_defaults(func=cmd_gallery)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
