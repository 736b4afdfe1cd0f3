"""Command-line front end.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import PunctureConfig, dump_config, generate_config, load_config
from .directions import bad_set_membership, cap_estimate, genericity_survey, make_frame, project
from .entire import MINIMAL_GENUS, PAPER_INDEX, build_product, zero_audit, zeros_inside
from .errors import ConfigError, ConvergenceError, GHError, StepTooLargeError
from .geometry import compatibility_residual, curvature_residual, quaternion_residual, sample_points
from .potential import check_criterion, eval_potential, laplacian_residual
from .surface import build_atlas, chart_name, chi_map, cocycle_check, pole_order, singular_points, surface_residual

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GEOMETRY_THRESHOLDS = {"laplacian": 1e-5, "curvature": 1e-5, "quaternion": 1e-10, "compatibility": 1e-10}
SURFACE_THRESHOLDS = {"cocycle": 1e-10, "chi_residual": 1e-10}
DEFAULT_RADIUS = 10.0


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    config_sha256: str
    seed: int | None
    tolerances: dict = field(default_factory=dict)
    version: str = __version__
    timestamp: str = ""

    def __post_init__(self):
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")


def config_hash(config: PunctureConfig) -> str:
    return hashlib.sha256(dump_config(config).encode("utf-8")).hexdigest()


def _emit(text: str, out: str | None):
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def _read_config(path: str) -> PunctureConfig:
    try:
        with open(path, "rb") as fh:
            return load_config(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _parse_vector(text: str) -> np.ndarray:
    try:
        v = np.array([float(c) for c in text.split(",")])
    except ValueError:
        raise UsageError(f"--v expects X,Y,Z, got {text!r}") from None
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise UsageError(f"--v expects three finite numbers, got {text!r}")
    n = np.linalg.norm(v)
    if n == 0:
        raise UsageError("--v must be nonzero")
    return v / n


# ------------------------------------------------------------------ commands

def cmd_validate(args) -> int:
    config = _read_config(args.config)
    verdict = check_criterion(config)
    manifest = RunManifest("validate", config_hash(config), None)
    _emit(_json({"manifest": asdict(manifest), "verdict": verdict.to_dict()}), args.out)
    return EXIT_OK if verdict.accepted else EXIT_FAIL


def _geometry_row(config, idx, x, h, rng):
    row = {"index": idx, "x": float(x[0]), "y": float(x[1]), "z": float(x[2])}
    V = float(eval_potential(config, x))
    try:
        row["laplacian"] = float(laplacian_residual(config, x, h))
        row["curvature"] = float(curvature_residual(config, x, h))
        row["status"] = "ok"
    except StepTooLargeError:
        row["laplacian"] = row["curvature"] = float("inf")
        row["status"] = "step_too_large"
    row["quaternion"] = quaternion_residual(V)
    row["compatibility"] = compatibility_residual(V, rng, pairs=8)
    if row["status"] == "ok" and any(row[k] > t for k, t in GEOMETRY_THRESHOLDS.items()):
        row["status"] = "threshold_exceeded"
    return row


def cmd_verify_geometry(args) -> int:
    config = _read_config(args.config)
    verdict = check_criterion(config)
    manifest = RunManifest("verify-geometry", config_hash(config), args.seed,
                           dict(GEOMETRY_THRESHOLDS, h=args.h))
    if not verdict.accepted:
        _emit(_json({"manifest": asdict(manifest), "verdict": verdict.to_dict()}), args.out)
        return EXIT_FAIL
    pts = sample_points(config, args.points, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    rows = [_geometry_row(config, i, x, args.h, rng) for i, x in enumerate(pts)]
    failed = [r for r in rows if r["status"] != "ok"]
    if args.format == "csv":
        _emit(_csv(rows), args.out)
    else:
        worst = {k: max(r[k] for r in rows) for k in GEOMETRY_THRESHOLDS}
        _emit(_json({"manifest": asdict(manifest), "worst": worst, "failures": len(failed), "rows": rows}), args.out)
    if failed:
        bad = max(failed, key=lambda r: max(r[k] / t for k, t in GEOMETRY_THRESHOLDS.items()))
        print(f"verify-geometry: {len(failed)} of {len(rows)} points failed; worst: {bad}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _singularity_types(report):
    return [{"b": [c.b.real, c.b.imag], "type": f"A{c.m - 1}"} for c in report.clusters if c.m >= 2]


def cmd_direction(args) -> int:
    config = _read_config(args.config)
    verdict = check_criterion(config)
    manifest = RunManifest("direction", config_hash(config), args.seed)
    if not verdict.accepted:
        _emit(_json({"manifest": asdict(manifest), "verdict": verdict.to_dict()}), args.out)
        return EXIT_FAIL
    if args.survey:
        summary = genericity_survey(config, args.survey, seed=args.seed)
        _emit(_json({"manifest": asdict(manifest), "survey": summary.to_dict()}), args.out)
        return EXIT_OK
    if args.v is None:
        raise UsageError("direction needs --v X,Y,Z or --survey N")
    v = _parse_vector(args.v)
    report = project(config, make_frame(v))
    doc = {
        "manifest": asdict(manifest),
        "projection": report.to_dict(),
        "bad_pairs": [list(p) for p in bad_set_membership(config, v)],
        "singularities": _singularity_types(report),
    }
    if args.cap_n is not None:
        doc["caps"] = cap_estimate(config, args.cap_n, samples=args.samples, seed=args.seed).to_dict()
    _emit(_json(doc), args.out)
    return EXIT_OK


def _surface_audit(atlas, seed, samples=20):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(samples) + 1j * rng.standard_normal(samples)
    charts = atlas.charts
    worst_cocycle = 0.0
    for a, b, c in itertools.product(charts, repeat=3):
        worst_cocycle = max(worst_cocycle, float(np.max(cocycle_check(atlas, a, b, c, u))))
    mismatches = []
    for a, b in itertools.combinations(charts, 2):
        for k in np.flatnonzero(atlas.zero_orders):
            got = pole_order(atlas, a, b, int(k))
            want = int(atlas.J(a)[k] - atlas.J(b)[k])
            if got != want:
                mismatches.append({"alpha": chart_name(a), "beta": chart_name(b), "k": int(k), "got": got, "want": want})
    v = rng.standard_normal(samples) + 1j * rng.standard_normal(samples)
    worst_chi = 0.0
    for a in charts:
        worst_chi = max(worst_chi, float(np.max(surface_residual(atlas.product, *chi_map(atlas, a, u, v), relative=True))))
    winding = []
    for k in np.flatnonzero(atlas.zero_orders):
        b = complex(atlas.zero_points[k])
        d = np.abs(atlas.zero_points[atlas.zero_orders > 0] - b)
        d = d[d > 0]
        r = 0.25 * (d.min() if d.size else 1.0)
        winding.append({"k": int(k), "winding": zero_audit(atlas.product, b, r), "expected": zeros_inside(atlas.product, b, r)})
    return {
        "cocycle_residual": worst_cocycle,
        "pole_order_mismatches": mismatches,
        "chi_residual": worst_chi,
        "zero_audit": winding,
    }


def _residual_grid(atlas, radius, n=21):
    xs = np.linspace(-float(radius), float(radius), n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    U = (X + 1j * Y).ravel()
    rows = []
    for a in atlas.charts:
        res = surface_residual(atlas.product, *chi_map(atlas, a, U, np.ones_like(U)), relative=True)
        rows.extend(
            {"chart": chart_name(a), "u_re": float(u.real), "u_im": float(u.imag), "residual": float(r)}
            for u, r in zip(U, res)
        )
    return rows


def cmd_surface(args) -> int:
    config = _read_config(args.config)
    if args.v is None:
        raise UsageError("surface needs --v X,Y,Z")
    v = _parse_vector(args.v)
    manifest = RunManifest("surface", config_hash(config), args.seed, dict(SURFACE_THRESHOLDS))
    verdict = check_criterion(config)
    if not verdict.accepted:
        _emit(_json({"manifest": asdict(manifest), "verdict": verdict.to_dict()}), None)
        return EXIT_FAIL
    report = project(config, make_frame(v))
    radius = args.radius
    if radius is None and args.mode == MINIMAL_GENUS:
        radius = DEFAULT_RADIUS
    try:
        P = build_product(report, args.mode, radius=radius)
    except ConvergenceError as exc:
        _emit(_json({"manifest": asdict(manifest), "projection": report.to_dict(), "error": str(exc)}), None)
        return EXIT_FAIL
    atlas = build_atlas(P)
    sing = singular_points(P, atlas)
    audit = _surface_audit(atlas, args.seed)
    passed = (
        audit["cocycle_residual"] <= SURFACE_THRESHOLDS["cocycle"]
        and audit["chi_residual"] <= SURFACE_THRESHOLDS["chi_residual"]
        and not audit["pole_order_mismatches"]
        and all(w["winding"] == w["expected"] for w in audit["zero_audit"])
    )
    audit["passed"] = passed
    nonzero = np.abs(atlas.zero_points[1:])
    grid_radius = radius if radius is not None else max(1.0, 2.0 * float(nonzero.min()) if nonzero.size else 1.0)
    grid = _residual_grid(atlas, grid_radius)
    docs = {
        "manifest": asdict(manifest),
        "product": P.to_dict(),
        "singularities": sing.to_dict(),
        "audit": audit,
    }
    if args.out is None:
        docs["residual_grid"] = grid
        _emit(_json(docs), None)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, doc in docs.items():
            (out / f"{name}.json").write_text(_json(doc), encoding="utf-8")
        (out / "residual_grid.csv").write_text(_csv(grid), encoding="utf-8")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_generate(args) -> int:
    config = generate_config(args.kind, ratio=args.ratio, count=args.count, spacing=args.spacing,
                             radius=args.ball_radius, seed=args.seed)
    _emit(dump_config(config), args.out)
    return EXIT_OK


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"ghlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, out_help="output file (default: stdout)"):
        sp.add_argument("--config", required=True, help="puncture configuration (JSON)")
        sp.add_argument("--out", help=out_help)
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("validate", help="existence criterion verdict")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("verify-geometry", help="finite-difference and algebraic residuals at sample points")
    common(sp)
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--h", type=float, default=1e-3)
    sp.add_argument("--format", choices=("json", "csv"), default="csv")
    sp.set_defaults(func=cmd_verify_geometry)

    sp = sub.add_parser("direction", help="projection along v, or a genericity survey")
    common(sp)
    sp.add_argument("--v", help="direction X,Y,Z (normalized)")
    sp.add_argument("--survey", type=int, default=0, metavar="N")
    sp.add_argument("--cap-n", type=float, default=None, help="also estimate caps of angular size n/|p_j|")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.set_defaults(func=cmd_direction)

    sp = sub.add_parser("surface", help="product manifest, singularities, atlas audit and residual grid")
    common(sp, out_help="output directory (default: one JSON document on stdout)")
    sp.add_argument("--v", help="direction X,Y,Z (normalized)")
    sp.add_argument("--mode", choices=(PAPER_INDEX, MINIMAL_GENUS), default=PAPER_INDEX)
    sp.add_argument("--radius", type=float, default=None)
    sp.set_defaults(func=cmd_surface)

    sp = sub.add_parser("generate", help="emit a fixture configuration")
    sp.add_argument("kind", choices=("geometric_z", "collinear_x", "random_ball"))
    sp.add_argument("--ratio", type=float, default=2.0)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--spacing", type=float, default=1.0)
    sp.add_argument("--ball-radius", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"ghlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ghlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GHError as exc:
        print(f"ghlab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
