"""HTTP service behind the seed-click annotation UI.

All geometry lives server-side: the client posts a seed (or asks for auto
localization) and draws whatever polyline comes back.  Inputs are never
written; every artifact goes to the configured output directory.

Endpoints (all under /api/v1):

    GET  /studies                                  loaded study summaries
    GET  /studies/{sid}/slices/{z}/{p}             slice metadata + latest result
    GET  /studies/{sid}/slices/{z}/{p}/image.png   8-bit rendering of the slice
    POST /studies/{sid}/slices/{z}/{p}/seed        fit from a click {x, y}
    POST /studies/{sid}/slices/{z}/{p}/auto        locate + fit
    POST /studies/{sid}/slices/{z}/{p}/accept      {accepted: bool} report inclusion
    GET  /studies/{sid}/report                     report over accepted results
    POST /session/save                             persist annotations to disk

Repeated seeds to one slice are last-write-wins with a monotone sequence
number; concurrent requests to different slices never share state.
"""

from __future__ import annotations

import io
import itertools
import json
import logging
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .cardiac import PipelineConfig, SliceResult, assemble_report, segment_slice
from .ead import contour
from .imaging import CineStudy
from .locate import Template

log = logging.getLogger("lvdisc.service")

WEAK_ENERGY = 0.3  # |E| below this marks a fit as weak (flat surroundings)
CONTOUR_POINTS = 128
SESSION_VERSION = 1


class SeedBody(BaseModel):
    x: float
    y: float


class AcceptBody(BaseModel):
    accepted: bool = True


class _Entry:
    __slots__ = ("seq", "result", "accepted")

    def __init__(self, seq: int, result: SliceResult, accepted: bool = True):
        self.seq = seq
        self.result = result
        self.accepted = accepted


class SessionState:
    """Latest accepted result per (study, z, phase); mutations serialized per key."""

    def __init__(self):
        self._entries: dict = {}
        self._locks: dict = {}
        self._master = threading.Lock()
        self._seq = itertools.count(1)

    def lock_for(self, key) -> threading.Lock:
        with self._master:
            return self._locks.setdefault(key, threading.Lock())

    def next_seq(self) -> int:
        return next(self._seq)

    def put(self, key, result: SliceResult, seq: int) -> _Entry:
        with self._master:
            cur = self._entries.get(key)
            if cur is None or seq > cur.seq:
                self._entries[key] = _Entry(seq, result)
            return self._entries[key]

    def get(self, key) -> _Entry | None:
        with self._master:
            return self._entries.get(key)

    def set_accepted(self, key, accepted: bool) -> _Entry | None:
        with self._master:
            e = self._entries.get(key)
            if e is not None:
                e.accepted = accepted
            return e

    def items(self):
        with self._master:
            return dict(self._entries)

    def to_document(self) -> dict:
        doc = {}
        for (sid, z, phase), e in self.items().items():
            doc.setdefault(sid, {})[f"{z},{phase}"] = {
                "seq": e.seq,
                "accepted": e.accepted,
                "result": e.result.to_dict(),
            }
        return {"version": SESSION_VERSION, "studies": doc}

    def load_document(self, doc: dict, studies: dict):
        if doc.get("version") != SESSION_VERSION:
            raise ValueError(f"unsupported session version {doc.get('version')}")
        top = 0
        for sid, entries in doc.get("studies", {}).items():
            study = studies.get(sid)
            if study is None:
                log.warning("session references unknown study %r; skipped", sid)
                continue
            for key, e in entries.items():
                z_s, p_s = key.split(",")
                result = SliceResult.from_dict(e["result"], mask_shape=(study.width, study.height))
                with self._master:
                    self._entries[(sid, int(z_s), int(p_s))] = _Entry(
                        e["seq"], result, e["accepted"]
                    )
                top = max(top, e["seq"])
        self._seq = itertools.count(top + 1)


def _result_payload(entry: _Entry) -> dict:
    r = entry.result
    out = r.to_dict()
    out["seq"] = entry.seq
    out["accepted"] = entry.accepted
    out["weak"] = bool(r.energy is not None and abs(r.energy) < WEAK_ENERGY)
    out["contour"] = (
        [[float(x), float(y)] for x, y in contour(r.params, CONTOUR_POINTS)]
        if r.params is not None else None
    )
    return out


def create_app(
    studies: dict,
    template: Template | None = None,
    cfg: PipelineConfig | None = None,
    out_dir: str | Path = "lvdisc_out",
    static_dir: str | Path | None = None,
    session_path: str | Path | None = None,
) -> FastAPI:
    """Build the API around a set of preloaded studies.

    ``session_path`` restores a previously saved annotation session and is
    where POST /session/save writes.
    """
    cfg = cfg or PipelineConfig()
    out_dir = Path(out_dir)
    state = SessionState()
    if session_path and Path(session_path).exists():
        state.load_document(json.loads(Path(session_path).read_text()), studies)
        log.info("restored session from %s", session_path)

    app = FastAPI(title="lvdisc annotation service", version=__version__)
    app.state.session = state

    def _study(sid: str) -> CineStudy:
        study = studies.get(sid)
        if study is None:
            raise HTTPException(status_code=404, detail=f"unknown study {sid!r}")
        return study

    def _slice(sid: str, z: int, phase: int):
        study = _study(sid)
        if not (0 <= z < study.n_z and 0 <= phase < study.n_phase):
            raise HTTPException(
                status_code=404,
                detail=f"slice (z={z}, phase={phase}) outside 0..{study.n_z - 1} x 0..{study.n_phase - 1}",
            )
        return study, study.slice_at(z, phase)

    def _kind(study: CineStudy, phase: int) -> str:
        return "es" if phase == study.es_phase and study.es_phase != study.ed_phase else "ed"

    @app.get("/api/v1/studies")
    def list_studies():
        return [
            {
                "id": sid,
                "n_z": s.n_z,
                "n_phase": s.n_phase,
                "ed_phase": s.ed_phase,
                "es_phase": s.es_phase,
                "width": s.width,
                "height": s.height,
                "spacing_mm": {
                    "x": s.slices[0][0].spacing_x,
                    "y": s.slices[0][0].spacing_y,
                    "z": s.slice_spacing,
                },
                "has_labels": bool(s.labels),
            }
            for sid, s in sorted(studies.items())
        ]

    @app.get("/api/v1/studies/{sid}/slices/{z}/{phase}")
    def slice_meta(sid: str, z: int, phase: int):
        study, img = _slice(sid, z, phase)
        entry = state.get((sid, z, phase))
        return {
            "study": sid,
            "z": z,
            "phase": phase,
            "phase_kind": _kind(study, phase),
            "width": img.width,
            "height": img.height,
            "spacing_mm": {"x": img.spacing_x, "y": img.spacing_y},
            "result": _result_payload(entry) if entry else None,
        }

    @app.get("/api/v1/studies/{sid}/slices/{z}/{phase}/image.png")
    def slice_image(sid: str, z: int, phase: int):
        from PIL import Image

        _, img = _slice(sid, z, phase)
        q = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
        buf = io.BytesIO()
        Image.fromarray(q, mode="L").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    def _run_and_store(sid, z, phase, seed):
        study, img = _slice(sid, z, phase)
        key = (sid, z, phase)
        with state.lock_for(key):
            seq = state.next_seq()
            result = segment_slice(
                img,
                template,
                cfg,
                z=z,
                phase=phase,
                phase_kind=_kind(study, phase),
                seed=seed,
                truth=study.labels.get((z, phase)),
            )
            entry = state.put(key, result, seq)
        return _result_payload(entry)

    @app.post("/api/v1/studies/{sid}/slices/{z}/{phase}/seed")
    def post_seed(sid: str, z: int, phase: int, body: SeedBody):
        _, img = _slice(sid, z, phase)
        if not (0 <= body.x <= img.width - 1 and 0 <= body.y <= img.height - 1):
            raise HTTPException(
                status_code=400,
                detail=f"seed ({body.x}, {body.y}) outside image 0..{img.width - 1} x 0..{img.height - 1}",
            )
        return _run_and_store(sid, z, phase, (body.x, body.y))

    @app.post("/api/v1/studies/{sid}/slices/{z}/{phase}/auto")
    def post_auto(sid: str, z: int, phase: int):
        _slice(sid, z, phase)
        if template is None:
            raise HTTPException(status_code=409, detail="no template loaded; auto mode unavailable")
        return _run_and_store(sid, z, phase, None)

    @app.post("/api/v1/studies/{sid}/slices/{z}/{phase}/accept")
    def post_accept(sid: str, z: int, phase: int, body: AcceptBody):
        _slice(sid, z, phase)
        entry = state.set_accepted((sid, z, phase), body.accepted)
        if entry is None:
            raise HTTPException(status_code=409, detail="no result to accept on this slice")
        return _result_payload(entry)

    @app.get("/api/v1/studies/{sid}/report")
    def get_report(sid: str):
        study = _study(sid)
        kinds = ("ed", "es") if study.ed_phase != study.es_phase else ("ed",)
        phase_of = {"ed": study.ed_phase, "es": study.es_phase}
        results, missing = [], []
        for z in range(study.n_z):
            for kind in kinds:
                entry = state.get((sid, z, phase_of[kind]))
                if entry is None or not entry.accepted:
                    missing.append([z, kind])
                else:
                    results.append(entry.result)
        if missing:
            raise HTTPException(
                status_code=409,
                detail={"message": "slices missing accepted results", "missing": missing},
            )
        return assemble_report(study, results, cfg).to_dict()

    @app.post("/api/v1/session/save")
    def save_session():
        if session_path is None:
            raise HTTPException(status_code=409, detail="service started without a session path")
        path = Path(session_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = state.to_document()
        path.write_text(json.dumps(doc, indent=2))
        n = sum(len(v) for v in doc["studies"].values())
        return {"saved_to": str(path), "entries": n}

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
