"""Command line front end: detect, render, eval, bench."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import DetectorConfig, parse_shape
from .detector import detect
from .io import read_gray, write_png
from .metrics import CSV_COLUMNS, classify, csv_row, summarize
from .render import GroundTruth, SceneSpec, center_pose, render

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="chessgrid", description="Chessboard corner grid detector and benchmark tools")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect grids in images, write detection JSON")
    d.add_argument("images", nargs="+", help="input PNG/PGM files")
    d.add_argument("--config", help="flat key = value config file")
    d.add_argument("--shape", help="expected grid shape RxC (rows x cols of inner corners)")
    d.add_argument("--single", action="store_true", help="keep only the largest grid")
    d.add_argument("--out", required=True, help="output JSON file (single image) or directory")
    d.add_argument("--overlay", action="store_true", help="also write overlay PNGs")

    r = sub.add_parser("render", help="render synthetic scenes plus ground truth")
    r.add_argument("scene_spec", help="scene spec JSON file")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--format", choices=["png", "pgm"], default="png")

    e = sub.add_parser("eval", help="score detection JSONs against ground truth")
    e.add_argument("--detections", required=True, help="directory of detection JSONs")
    e.add_argument("--truth", required=True, help="directory of ground-truth JSONs")
    e.add_argument("--tc", type=float, default=5.0, help="corner error tolerance in px")
    e.add_argument("--out", help="output directory for metrics.json/metrics.csv")
    e.add_argument(
        "--half-pixel-offset",
        action="store_true",
        help="shift truth by +0.5 px (alternate pixel-center convention)",
    )

    b = sub.add_parser("bench", help="repeat detection and report runtime quantiles")
    b.add_argument("images", nargs="+", help="input images")
    b.add_argument("--config", help="flat key = value config file")
    b.add_argument("--reps", type=int, default=5, help="timed repetitions per image")
    b.add_argument("--out", help="optional JSON output path")
    return p


def _load_config(args) -> DetectorConfig:
    cfg = DetectorConfig.from_file(args.config) if args.config else DetectorConfig()
    if getattr(args, "shape", None):
        cfg.known_shape = parse_shape(args.shape)
    if getattr(args, "single", False):
        cfg.expect_single = True
    return cfg


def _dump_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def cmd_detect(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    single_file = len(args.images) == 1 and out.suffix == ".json"
    if not single_file:
        out.mkdir(parents=True, exist_ok=True)
    had_error = False
    for image_path in args.images:
        stem = Path(image_path).stem
        target = out if single_file else out / f"{stem}.json"
        try:
            gray = read_gray(image_path)
        except (OSError, ValueError) as exc:
            _dump_json(target, {"error": f"{image_path}: {exc}"})
            print(f"error: {image_path}: {exc}", file=sys.stderr)
            had_error = True
            continue
        result = detect(gray, cfg)
        _dump_json(target, result.to_json_dict())
        if args.overlay:
            overlay_path = (out.parent if single_file else out) / f"{stem}_overlay.png"
            _write_overlay(overlay_path, gray, result)
    return EXIT_IO if had_error else EXIT_OK


def _write_overlay(path: Path, gray: np.ndarray, result) -> None:
    from PIL import Image, ImageDraw

    q = np.rint(np.clip(gray, 0.0, 1.0) * 255.0).astype(np.uint8)
    im = Image.fromarray(q, mode="L").convert("RGB")
    draw = ImageDraw.Draw(im)
    for grid in result.grids:
        pts = grid.positions()
        for r in range(grid.rows):
            for c in range(grid.cols):
                k = r * grid.cols + c
                if c + 1 < grid.cols:
                    draw.line(
                        [tuple(pts[k]), tuple(pts[k + 1])], fill=(0, 200, 0), width=1
                    )
                if r + 1 < grid.rows:
                    draw.line(
                        [tuple(pts[k]), tuple(pts[k + grid.cols])], fill=(0, 200, 0), width=1
                    )
        for x, y in pts:
            draw.ellipse([x - 2, y - 2, x + 2, y + 2], outline=(255, 40, 40))
    im.save(path, format="PNG")


def _scene_from_dict(d: dict) -> SceneSpec:
    d = dict(d)
    d.pop("name", None)
    pose = d.pop("pose", None)
    homography = d.pop("homography", None)
    if homography is not None:
        h = np.array(homography, dtype=np.float64)
    elif pose is not None:
        h = center_pose(
            image_size=(int(d["image_width"]), int(d["image_height"])),
            squares=(int(d["squares_rows"]), int(d["squares_cols"])),
            square_size=float(d["square_size"]),
            angle_deg=float(pose.get("angle_deg", 0.0)),
            scale=float(pose.get("scale", 1.0)),
            tilt=tuple(pose.get("tilt", (0.0, 0.0))),
        )
    else:
        raise ValueError("scene needs either 'homography' or 'pose'")
    if abs(np.linalg.det(h)) < 1e-12:
        raise ValueError("homography is singular")
    return SceneSpec(homography=h, **d)


def cmd_render(args) -> int:
    spec_path = Path(args.scene_spec)
    doc = json.loads(spec_path.read_text())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenes: list[tuple[str, dict]] = []
    if "scenes" in doc:
        for i, sd in enumerate(doc["scenes"]):
            scenes.append((sd.get("name", f"scene{i:03d}"), sd))
    elif "base" in doc:
        base = doc["base"]
        name = base.get("name", spec_path.stem)
        for sigma in doc.get("blur_sigmas", [base.get("blur_sigma", 0.0)]):
            sd = dict(base)
            sd["blur_sigma"] = float(sigma)
            scenes.append((f"{name}_s{sigma:g}", sd))
    else:
        scenes.append((doc.get("name", spec_path.stem), doc))
    for name, sd in scenes:
        spec = _scene_from_dict(sd)
        img, gt = render(spec)
        if args.format == "png":
            write_png(out / f"{name}.png", img)
        else:
            from .io import write_pgm

            write_pgm(out / f"{name}.pgm", img)
        _dump_json(out / f"{name}.json", gt.to_json_dict())
    return EXIT_OK


def _scenario_dirs(root: Path) -> list[tuple[str, Path]]:
    subs = sorted(p for p in root.iterdir() if p.is_dir())
    if subs:
        return [(p.name, p) for p in subs]
    return [(root.name, root)]


def _load_detections(det_path: Path):
    detections = []
    runtime = None
    if det_path.exists():
        payload = json.loads(det_path.read_text())
        for g in payload.get("grids", []):
            corners = np.array([[c["x"], c["y"]] for c in g["corners"]])
            detections.append((g["rows"], g["cols"], corners))
        if "runtime_ms" in payload:
            runtime = float(payload["runtime_ms"])
    return detections, runtime


def cmd_eval(args) -> int:
    det_root = Path(args.detections)
    truth_root = Path(args.truth)
    if not det_root.is_dir():
        raise FileNotFoundError(f"detections directory not found: {det_root}")
    if not truth_root.is_dir():
        raise FileNotFoundError(f"truth directory not found: {truth_root}")
    offset = (0.5, 0.5) if args.half_pixel_offset else (0.0, 0.0)
    per_scenario = {}
    all_out = []
    all_rt = []
    for name, truth_dir in _scenario_dirs(truth_root):
        # Scenario subdirectories pair by name; a flat truth directory
        # pairs with the detection root itself.
        det_dir = det_root if truth_dir == truth_root else det_root / truth_dir.name
        outcomes = []
        runtimes = []
        for truth_path in sorted(truth_dir.glob("*.json")):
            truth = GroundTruth.from_json_dict(json.loads(truth_path.read_text()))
            detections, runtime = _load_detections(det_dir / truth_path.name)
            if runtime is not None:
                runtimes.append(runtime)
            outcomes.append(
                classify(detections, truth.shape, truth.corners, tc=args.tc, truth_offset=offset)
            )
        if outcomes:
            per_scenario[name] = summarize(outcomes, runtimes or None)
            all_out.extend(outcomes)
            all_rt.extend(runtimes)
    pooled = summarize(all_out, all_rt or None)
    report = {
        "tc": args.tc,
        "scenarios": {name: m.to_json_dict() for name, m in per_scenario.items()},
        "pooled": pooled.to_json_dict(),
    }
    lines = [",".join(CSV_COLUMNS)]
    for name in sorted(per_scenario):
        lines.append(csv_row(name, per_scenario[name]))
    lines.append(csv_row("pooled", pooled))
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _dump_json(out / "metrics.json", report)
        (out / "metrics.csv").write_text(csv_text)
    print(csv_text, end="")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    scenarios: dict[str, list[float]] = {}
    for image_path in args.images:
        p = Path(image_path)
        gray = read_gray(p)
        scenario = p.parent.name or "default"
        detect(gray, cfg)  # warm-up, untimed
        for _ in range(args.reps):
            t0 = time.perf_counter()
            detect(gray, cfg)
            scenarios.setdefault(scenario, []).append((time.perf_counter() - t0) * 1000.0)
    from .metrics import quantiles

    rows = {}
    for name in sorted(scenarios):
        r50, r100 = quantiles(scenarios[name])
        rows[name] = {"r50_ms": r50, "r100_ms": r100, "samples": len(scenarios[name])}
        print(f"{name}: R50 {r50:.2f} ms  R100 {r100:.2f} ms  ({len(scenarios[name])} runs)")
    if args.out:
        _dump_json(Path(args.out), rows)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "detect":
            return cmd_detect(args)
        if args.command == "render":
            return cmd_render(args)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "bench":
            return cmd_bench(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        # JSONDecodeError subclasses ValueError, so bad input files must be
        # picked off before the usage-level ValueError handler below.
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
