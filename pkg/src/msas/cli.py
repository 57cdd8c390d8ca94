"""Command-line front end: ``fuse``, ``eval``, ``batch`` and ``synth``.

Settings resolve as built-in defaults, then ``--config`` (flat JSON using
the field names of FusionConfig, SurfParams and SceneSpec), then flags.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .fusion import SCHEMES, FusionConfig, fuse, surf_cielab_lab
from .image import ImagePair, condition, load_gray, normalize, save_gray, save_rgb
from .metrics import METRIC_FIELDS, evaluate_pair, format_value, write_report_csv
from .saliency import (CfarParams, SurfParams, cfar_saliency, despeckle, surf_interest_points,
                       write_keypoints_csv)
from .synth import SceneSpec, generate_scene, resolve_spec

log = logging.getLogger("msas")

MANIFEST_COLUMNS = ("pair_id", "hf_path", "lf_path", "resolution_m_per_px")
DEFAULT_RESOLUTION = 0.1

_FUSION_KEYS = {f.name for f in fields(FusionConfig)} - {"surf", "mapper"}
_SURF_KEYS = {f.name for f in fields(SurfParams)}
_SCENE_KEYS = {f.name for f in fields(SceneSpec)}
_EXTRA_KEYS = {"preconditioned"}


class UsageError(Exception):
    pass


@dataclass
class Settings:
    fusion: FusionConfig
    scene: SceneSpec
    preconditioned: bool = False


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = set(data) - _FUSION_KEYS - _SURF_KEYS - _SCENE_KEYS - _EXTRA_KEYS
    if unknown:
        raise UsageError(f"config file {path}: unknown keys {sorted(unknown)}")
    return data


def build_settings(args, scheme: str | None = None) -> Settings:
    data = load_config(args.config) if getattr(args, "config", None) else {}
    surf = SurfParams(**{k: v for k, v in data.items() if k in _SURF_KEYS})
    fusion_kw = {k: v for k, v in data.items() if k in _FUSION_KEYS}
    # resolution_m_per_px and schlick_p are shared with SceneSpec; both get them.
    scene_kw = {k: v for k, v in data.items() if k in _SCENE_KEYS}
    if getattr(args, "resolution", None) is not None:
        fusion_kw["resolution_m_per_px"] = args.resolution
        scene_kw["resolution_m_per_px"] = args.resolution
    if getattr(args, "alpha", None) is not None:
        if scheme in (None, "cfar-cielab"):
            fusion_kw["alpha_cfar_cielab"] = args.alpha
        if scheme in (None, "dual-colormap"):
            fusion_kw["alpha_dual"] = args.alpha
    if getattr(args, "seed", None) is not None:
        scene_kw["seed"] = args.seed
    preconditioned = bool(data.get("preconditioned", False)) or getattr(args, "preconditioned", False)
    try:
        return Settings(FusionConfig(surf=surf, **fusion_kw), SceneSpec(**scene_kw), preconditioned)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def _condition(img, settings: Settings, preconditioned: bool | None = None):
    pre = settings.preconditioned if preconditioned is None else preconditioned
    return normalize(img) if pre else condition(img, settings.fusion.schlick_p)


def load_pair(hf_path, lf_path, resolution, settings: Settings, preconditioned=None) -> ImagePair:
    hf = load_gray(hf_path)
    lf = load_gray(lf_path)
    if hf.shape != lf.shape:
        raise ValueError(f"dimension mismatch: {hf_path} is {hf.shape}, {lf_path} is {lf.shape}")
    res = resolution or settings.fusion.resolution_m_per_px or DEFAULT_RESOLUTION
    return ImagePair(_condition(hf, settings, preconditioned), _condition(lf, settings, preconditioned), res)


def _dump_debug(pair: ImagePair, scheme: str, cfg: FusionConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    res = cfg.resolution(pair)
    if scheme == "surf-cielab":
        _, (s_hf, s_lf, w) = surf_cielab_lab(pair, cfg, return_maps=True)
        save_gray(s_hf, out_dir / "saliency_hf.png")
        save_gray(s_lf, out_dir / "saliency_lf.png")
        save_gray(w, out_dir / "weight.png")
        for band, img in (("hf", pair.hf), ("lf", pair.lf)):
            kps = surf_interest_points(despeckle(img, cfg.surf.despeckle_window), cfg.surf)
            write_keypoints_csv(kps, out_dir / f"keypoints_{band}.csv")
    else:
        alpha = cfg.alpha_cfar_cielab if scheme == "cfar-cielab" else cfg.alpha_dual
        s = cfar_saliency(pair.lf, CfarParams(alpha, cfg.boxcar_extent_m), res)
        peak = s.max()
        save_gray(s / peak if peak > 0 else s, out_dir / "saliency_lf.png")


def cmd_fuse(args) -> int:
    settings = build_settings(args, args.scheme)
    pair = load_pair(args.hf, args.lf, None, settings)
    rgb = fuse(pair, args.scheme, settings.fusion)
    out = Path(args.out)
    if out.parent:
        out.parent.mkdir(parents=True, exist_ok=True)
    save_rgb(rgb, out)
    if args.debug_dir:
        _dump_debug(pair, args.scheme, settings.fusion, Path(args.debug_dir))
    log.info("wrote %s", out)
    return 0


def cmd_eval(args) -> int:
    settings = build_settings(args)
    pair = load_pair(args.hf, args.lf, None, settings)
    fused = _load_rgb(args.fused)
    report = evaluate_pair(pair, fused)
    for name in METRIC_FIELDS:
        print(f"{name}\t{format_value(getattr(report, name))}")
    if args.csv:
        write_report_csv([(Path(args.fused).stem, args.scheme or "", report)], args.csv, summary=False)
    return 0


def _load_rgb(path) -> np.ndarray:
    from PIL import Image

    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    with Image.open(path) as im:
        if im.mode != "RGB":
            raise ValueError(f"{path}: expected 8-bit RGB PNG, got mode {im.mode!r}")
        return np.asarray(im, dtype=np.float64) / 255.0


def read_manifest(path) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"manifest not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise UsageError(f"manifest {path} lacks columns {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise UsageError(f"manifest {path} has no pairs")
    base = path.parent
    for row in rows:
        for key in ("hf_path", "lf_path"):
            p = Path(row[key])
            row[key] = p if p.is_absolute() else base / p
    return rows


def _parse_schemes(values) -> list[str]:
    if not values:
        return list(SCHEMES)
    names = [s for v in values for s in v.split(",") if s]
    if "all" in names:
        return list(SCHEMES)
    for name in names:
        if name not in SCHEMES:
            raise UsageError(f"unknown scheme {name!r}; choose from {', '.join(SCHEMES)}")
    return list(dict.fromkeys(names))


def cmd_batch(args) -> int:
    schemes = _parse_schemes(args.scheme)
    rows = sorted(read_manifest(args.manifest), key=lambda r: r["pair_id"])
    out_dir = Path(args.out)
    fused_dir = out_dir / "fused"
    fused_dir.mkdir(parents=True, exist_ok=True)
    settings = {s: build_settings(args, s) for s in schemes}
    results, failures = [], 0
    for row in rows:
        pid = row["pair_id"]
        try:
            pre = row.get("preconditioned", "").strip() in ("1", "true", "True")
            pair = load_pair(row["hf_path"], row["lf_path"], float(row["resolution_m_per_px"]),
                             settings[schemes[0]], preconditioned=pre or None)
            for scheme in sorted(schemes):
                rgb = fuse(pair, scheme, settings[scheme].fusion)
                save_rgb(rgb, fused_dir / f"{pid}_{scheme}.png")
                results.append((pid, scheme, evaluate_pair(pair, rgb)))
        except (OSError, ValueError) as exc:
            failures += 1
            log.error("pair %s failed: %s", pid, exc)
    results.sort(key=lambda r: (r[0], r[1]))
    write_report_csv(results, out_dir / "metrics.csv")
    log.info("wrote %d rows to %s", len(results), out_dir / "metrics.csv")
    return 1 if failures else 0


def cmd_synth(args) -> int:
    settings = build_settings(args)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_seed = settings.scene.seed
    spec_fields = [f.name for f in fields(SceneSpec) if f.name not in ("seed", "resolution_m_per_px")]
    with open(out_dir / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(MANIFEST_COLUMNS) + ["preconditioned", "seed"] + spec_fields)
        for i in range(args.n):
            spec = resolve_spec(replace(settings.scene, seed=base_seed + i))
            pair, truth = generate_scene(spec)
            pid = f"{i:04d}"
            save_gray(pair.hf, out_dir / f"hf_{pid}.png", bits=16)
            save_gray(pair.lf, out_dir / f"lf_{pid}.png", bits=16)
            save_gray(truth.lf_saliency_mask.astype(float), out_dir / f"mask_lf_{pid}.png")
            save_gray(truth.hf_detail_mask.astype(float), out_dir / f"mask_hf_{pid}.png")
            writer.writerow([pid, f"hf_{pid}.png", f"lf_{pid}.png", spec.resolution_m_per_px, 1, spec.seed]
                            + [getattr(spec, name) for name in spec_fields])
    log.info("wrote %d scenes to %s", args.n, out_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msas", description="Multiband sonar image fusion.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat JSON file of configuration fields")
        p.add_argument("--resolution", type=float, help="pixel size in m/px")
        p.add_argument("-v", "--verbose", action="store_true")

    def conditioning(p):
        p.add_argument("--preconditioned", action="store_true",
                       help="inputs are already normalized and tone mapped")

    p = sub.add_parser("fuse", help="fuse one HF/LF pair into a color PNG")
    p.add_argument("hf")
    p.add_argument("lf")
    p.add_argument("--scheme", required=True, choices=list(SCHEMES))
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--alpha", type=float, help="CFAR threshold for the chosen scheme")
    p.add_argument("--debug-dir", help="also write saliency maps and keypoint CSVs here")
    common(p)
    conditioning(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="score a fused PNG against its source bands")
    p.add_argument("fused")
    p.add_argument("hf")
    p.add_argument("lf")
    p.add_argument("--csv", help="also write the report row to this CSV")
    p.add_argument("--scheme", help="scheme label for the CSV row")
    common(p)
    conditioning(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("batch", help="fuse and score every pair in a manifest")
    p.add_argument("manifest")
    p.add_argument("--scheme", action="append", help="scheme(s), comma separated or repeated; default all")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--alpha", type=float)
    common(p)
    conditioning(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus and manifest")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory")
    common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"msas {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"msas {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
