"""Command line entry points: batch segmentation and the annotation service.

    lvdisc segment --input study.nii.gz --template tmpl.pgm --mode auto --out out/
    lvdisc serve --input a.nii b.nii --port 8080 [--template tmpl.pgm]

Exit codes for segment: 0 clean, 2 when any slice failed (report still
written), 1 on fatal errors.  LVDISC_LOG=DEBUG|INFO|... controls verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cardiac import PipelineConfig, StudyReport, segment_study
from .ead import contour
from .errors import LvDiscError
from .imaging import CineStudy, GrayImage
from .imgio import load_image, load_study
from .locate import Template

log = logging.getLogger("lvdisc")


def _setup_logging():
    level = os.environ.get("LVDISC_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _load_config(path) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def _pipeline_config(raw: dict, mode: str, cli_seed=None) -> PipelineConfig:
    cfg_keys = {k: v for k, v in raw.items()
                if k not in ("labels", "label_value", "ed_phase", "es_phase")}
    if "label_value" in raw:
        cfg_keys["label_value"] = raw["label_value"]
    cfg_keys["mode"] = mode
    cfg = PipelineConfig.from_dict(cfg_keys)
    if cli_seed is not None:
        seeds = dict(cfg.seeds)
        (z, kind), xy = cli_seed
        seeds[(z, kind)] = xy
        cfg = PipelineConfig.from_dict({**cfg.to_dict(), "seeds": {
            f"{zz},{kk}": list(vv) for (zz, kk), vv in seeds.items()
        }})
    return cfg


def _overlay(img: GrayImage, params) -> "object":
    from PIL import Image, ImageDraw

    q = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
    rgb = Image.fromarray(q, mode="L").convert("RGB")
    if params is not None:
        pts = [(float(x), float(y)) for x, y in contour(params, 256)]
        ImageDraw.Draw(rgb).line(pts, fill=(255, 64, 64), width=1)
    return rgb


def _write_outputs(report: StudyReport, study: CineStudy, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json())
    overlays = out_dir / "overlays"
    overlays.mkdir(exist_ok=True)
    for r in report.slices:
        img = study.slice_at(r.z, r.phase)
        name = f"{report.study_id}_z{r.z:02d}_{r.phase_kind}.png"
        _overlay(img, r.params).save(overlays / name)
    log.info("wrote %s and %d overlays", out_dir / "report.json", len(report.slices))


def cmd_segment(args) -> int:
    raw_cfg = _load_config(args.config)
    if args.template is None and args.mode == "auto":
        print("error: --template is required in auto mode", file=sys.stderr)
        return 1
    cli_seed = None
    if args.seed is not None:
        if args.z is None or args.phase is None:
            print("error: --seed needs --z and --phase", file=sys.stderr)
            return 1
        x_s, y_s = args.seed.split(",")
        cli_seed = ((args.z, args.phase), (float(x_s), float(y_s)))
    cfg = _pipeline_config(raw_cfg, args.mode, cli_seed)

    tmpl = None
    if args.template is not None:
        tmpl = Template(load_image(args.template))
    study = load_study(
        args.input,
        ed_phase=raw_cfg.get("ed_phase"),
        es_phase=raw_cfg.get("es_phase"),
        labels_path=raw_cfg.get("labels"),
        label_value=raw_cfg.get("label_value", 1),
    )
    report = segment_study(study, tmpl, cfg)
    _write_outputs(report, study, Path(args.out))

    if report.has_failures:
        failed = [(r.z, r.phase_kind, r.status) for r in report.slices if not r.ok]
        print(f"completed with {len(failed)} failed slice(s):", file=sys.stderr)
        for z, kind, status in failed:
            print(f"  z={z} {kind}: {status}", file=sys.stderr)
        return 2
    ef = "n/a" if report.ef_percent is None else f"{report.ef_percent:.2f}%"
    print(f"{report.study_id}: EDV {report.edv_mm3:.0f} mm3, ESV {report.esv_mm3:.0f} mm3, EF {ef}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    raw_cfg = _load_config(args.config)
    cfg = _pipeline_config(raw_cfg, "seeded")
    tmpl = Template(load_image(args.template)) if args.template else None
    studies = {}
    for path in args.input:
        study = load_study(
            path,
            ed_phase=raw_cfg.get("ed_phase"),
            es_phase=raw_cfg.get("es_phase"),
            labels_path=raw_cfg.get("labels"),
            label_value=raw_cfg.get("label_value", 1),
        )
        studies[study.study_id] = study
    out_dir = Path(args.out)
    static = args.static
    if static is None:
        default_static = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static = default_static if default_static.is_dir() else None
    app = create_app(
        studies,
        template=tmpl,
        cfg=cfg,
        out_dir=out_dir,
        static_dir=static,
        session_path=args.session or out_dir / "session.json",
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lvdisc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"lvdisc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="batch-segment a study and write a report")
    seg.add_argument("--input", required=True, help="study file (.nii / .nii.gz)")
    seg.add_argument("--template", help="template image (PGM/PNG); required for auto mode")
    seg.add_argument("--mode", choices=("auto", "seeded"), default="auto")
    seg.add_argument("--out", required=True, help="output directory")
    seg.add_argument("--config", help="JSON config (descent, thresholds, labels, seeds)")
    seg.add_argument("--seed", help="x,y seed for one slice (seeded mode)")
    seg.add_argument("--z", type=int, help="slice index the --seed applies to")
    seg.add_argument("--phase", choices=("ed", "es"), help="phase the --seed applies to")
    seg.set_defaults(func=cmd_segment)

    srv = sub.add_parser("serve", help="run the seed-click annotation service")
    srv.add_argument("--input", required=True, nargs="+", help="study file(s)")
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--template", help="template image enabling the auto endpoint")
    srv.add_argument("--config", help="JSON config")
    srv.add_argument("--out", default="lvdisc_out", help="output directory")
    srv.add_argument("--session", help="session document path (default <out>/session.json)")
    srv.add_argument("--static", help="static UI directory (default frontend/dist if present)")
    srv.set_defaults(func=cmd_serve)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LvDiscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
