"""Study-level pipeline: segment every slice at ED/ES, integrate volumes, report EF.

Failures never abort a study: a slice that cannot be localized or fitted is
recorded with its status and an empty mask, contributes zero area to the
volumes, and (when annotations exist) scores zero true positives, so study
averages stay honest about the failure modes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple

from .ead import DiscParams, FitConfig, fit, rasterize
from .errors import FitNumericError, UndefinedEFError
from .imaging import BinaryMask, CineStudy, GrayImage
from .locate import MatchResult, Template, match_multiscale
from .metrics import AggregateMetrics, MetricSet, aggregate, confusion, metric_set

__all__ = [
    "PipelineConfig",
    "SliceResult",
    "StudyReport",
    "EFResult",
    "slice_volume_stack",
    "ejection_fraction",
    "apex_base_policy",
    "segment_slice",
    "segment_study",
    "assemble_report",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PipelineConfig:
    """Everything segment_study needs besides the data itself."""

    fit: FitConfig = field(default_factory=FitConfig)
    mode: str = "auto"  # auto | seeded
    scale_min: float = 0.1
    scale_step: float = 0.1
    ncc_threshold: float = 0.35
    area_min_px: float = 20.0
    init_axis_frac: float = 0.25  # of template width, auto mode
    init_axis_px: float = 12.0  # seeded mode fallback when no template is loaded
    label_value: int = 1
    seeds: dict = field(default_factory=dict)  # (z, "ed"|"es") -> (x, y)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "mode", "scale_min", "scale_step", "ncc_threshold",
            "area_min_px", "init_axis_frac", "init_axis_px", "label_value",
        )}
        d["fit"] = self.fit.to_dict()
        d["seeds"] = {f"{z},{kind}": list(xy) for (z, kind), xy in self.seeds.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        fit_cfg = FitConfig.from_dict(d.pop("fit", {}))
        seeds = {}
        for key, xy in d.pop("seeds", {}).items():
            z_str, kind = key.split(",")
            seeds[(int(z_str), kind)] = (float(xy[0]), float(xy[1]))
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown pipeline config keys: {sorted(unknown)}")
        return cls(fit=fit_cfg, seeds=seeds, **known)


@dataclass(frozen=True)
class SliceResult:
    z: int
    phase: int
    phase_kind: str  # ed | es
    mode: str  # auto | seeded
    status: str  # ok | localization_failed | fit_failed
    match: MatchResult | None = None
    params: DiscParams | None = None
    mask: BinaryMask | None = None
    energy: float | None = None
    iterations: int = 0
    metrics: MetricSet | None = None
    zeroed_by_area_policy: bool = False
    recorded_area_px: int | None = None  # survives serialization without the mask

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {
            "z": self.z,
            "phase": self.phase,
            "phase_kind": self.phase_kind,
            "mode": self.mode,
            "status": self.status,
            "match": self.match.to_dict() if self.match else None,
            "params": (
                {"a": self.params.a, "b": self.params.b, "theta": self.params.theta,
                 "xc": self.params.xc, "yc": self.params.yc}
                if self.params else None
            ),
            "energy": self.energy,
            "iterations": self.iterations,
            "mask_area_px": (
                self.mask.area_px() if self.mask is not None
                else (self.recorded_area_px or 0)
            ),
            "zeroed_by_area_policy": self.zeroed_by_area_policy,
            "metrics": self.metrics.to_dict() if self.metrics else None,
        }

    @classmethod
    def from_dict(cls, sd: dict, mask_shape=None) -> "SliceResult":
        """Rebuild from the serialized form; the mask is re-rasterized from
        the params when ``mask_shape`` (width, height) is given."""
        params = DiscParams(**sd["params"]) if sd["params"] else None
        mask = None
        if mask_shape is not None:
            w, h = mask_shape
            mask = rasterize(params, w, h) if params else BinaryMask.empty(w, h)
        met = sd["metrics"]
        return cls(
            z=sd["z"], phase=sd["phase"], phase_kind=sd["phase_kind"],
            mode=sd["mode"], status=sd["status"],
            match=MatchResult(**sd["match"]) if sd["match"] else None,
            params=params,
            mask=mask,
            energy=sd["energy"],
            iterations=sd["iterations"],
            metrics=_metric_set_from_dict(met) if met else None,
            zeroed_by_area_policy=sd["zeroed_by_area_policy"],
            recorded_area_px=sd["mask_area_px"],
        )


class EFResult(NamedTuple):
    percent: float
    physiologic: bool  # False flags ESV > EDV (a segmentation failure smell)


def _metric_set_from_dict(m: dict) -> MetricSet:
    fields_ = {k: v for k, v in m.items() if k != "degenerate"}
    return MetricSet(degenerate=tuple(m.get("degenerate", ())), **fields_)


def slice_volume_stack(masks, spacing) -> float:
    """Disk-summation volume: sum of mask areas times inter-slice distance.

    ``spacing`` is (dx, dy, dz) in mm; empty masks contribute nothing.
    """
    dx, dy, dz = spacing
    if not dz > 0:
        raise ValueError("slice spacing must be positive")
    area = sum(m.area_px() for m in masks if m is not None) * dx * dy
    return float(area * dz)


def ejection_fraction(edv_mm3: float, esv_mm3: float) -> EFResult:
    """EF percent from the two phase volumes; flags the impossible ESV > EDV case."""
    if not edv_mm3 > 0:
        raise UndefinedEFError(f"EDV must be positive to define EF, got {edv_mm3}")
    return EFResult(
        percent=(edv_mm3 - esv_mm3) / edv_mm3 * 100.0,
        physiologic=esv_mm3 <= edv_mm3,
    )


def apex_base_policy(masks, area_min_px: float = 20.0):
    """Zero out implausibly small fits: apex/base overshoot guard.

    Returns a new list where any mask with area below ``area_min_px``
    becomes empty.
    """
    out = []
    for m in masks:
        if m is None or m.area_px() < area_min_px:
            out.append(BinaryMask.empty(m.width, m.height) if m is not None else None)
        else:
            out.append(m)
    return out


def segment_slice(
    img: GrayImage,
    tmpl: Template | None,
    cfg: PipelineConfig,
    z: int = 0,
    phase: int = 0,
    phase_kind: str = "ed",
    seed=None,
    truth: BinaryMask | None = None,
) -> SliceResult:
    """Localize (or take the seed), fit the disc, rasterize, score.

    ``seed`` switches to seeded mode: the click point becomes the initial
    center and no template matching runs.
    """
    mode = "seeded" if seed is not None else "auto"
    match = None
    if seed is not None:
        cx, cy = float(seed[0]), float(seed[1])
        ax = cfg.init_axis_frac * tmpl.width if tmpl is not None else cfg.init_axis_px
    else:
        if tmpl is None:
            raise ValueError("auto mode needs a template")
        match = match_multiscale(
            img, tmpl,
            scale_min=cfg.scale_min,
            scale_step=cfg.scale_step,
            low_conf_zeta=cfg.ncc_threshold,
        )
        if match.low_confidence:
            return SliceResult(
                z=z, phase=phase, phase_kind=phase_kind, mode=mode,
                status="localization_failed", match=match,
                mask=BinaryMask.empty(img.width, img.height),
                metrics=_score(None, truth, img),
            )
        cx, cy = match.center_x, match.center_y
        ax = cfg.init_axis_frac * tmpl.width

    init = DiscParams(a=ax, b=ax, theta=0.0, xc=cx, yc=cy)
    try:
        best, trace = fit(img, init, cfg.fit)
    except FitNumericError:
        return SliceResult(
            z=z, phase=phase, phase_kind=phase_kind, mode=mode,
            status="fit_failed", match=match,
            mask=BinaryMask.empty(img.width, img.height),
            metrics=_score(None, truth, img),
        )
    mask = rasterize(best, img.width, img.height)
    status = "ok" if mask.area_px() > 0 and trace.reason != "degenerate" else "fit_failed"
    if status == "fit_failed":
        mask = BinaryMask.empty(img.width, img.height)
    return SliceResult(
        z=z, phase=phase, phase_kind=phase_kind, mode=mode,
        status=status, match=match,
        params=best if status == "ok" else None,
        mask=mask,
        energy=float(trace.energies.min()),
        iterations=trace.iterations,
        metrics=_score(mask if status == "ok" else None, truth, img),
    )


def _score(mask: BinaryMask | None, truth: BinaryMask | None, img: GrayImage) -> MetricSet | None:
    if truth is None:
        return None
    pred = mask if mask is not None else BinaryMask.empty(img.width, img.height)
    return metric_set(confusion(pred, truth))


@dataclass
class StudyReport:
    study_id: str
    spacing: tuple  # (dx, dy, dz) mm
    ed_phase: int
    es_phase: int
    edv_mm3: float
    esv_mm3: float
    ef_percent: float | None
    ef_undefined: bool
    ef_nonphysiologic: bool
    ef_percent_ok_slices_only: float | None
    slices: list  # SliceResult
    aggregate_metrics: AggregateMetrics | None = None
    truth_ef_percent: float | None = None
    ef_error_percent: float | None = None

    @property
    def has_failures(self) -> bool:
        return any(not s.ok for s in self.slices)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "study_id": self.study_id,
            "spacing_mm": {"x": self.spacing[0], "y": self.spacing[1], "z": self.spacing[2]},
            "ed_phase": self.ed_phase,
            "es_phase": self.es_phase,
            "edv_mm3": self.edv_mm3,
            "esv_mm3": self.esv_mm3,
            "ef_percent": self.ef_percent,
            "ef_flags": {
                "undefined": self.ef_undefined,
                "nonphysiologic": self.ef_nonphysiologic,
            },
            "ef_percent_ok_slices_only": self.ef_percent_ok_slices_only,
            "truth_ef_percent": self.truth_ef_percent,
            "ef_error_percent": self.ef_error_percent,
            "slices": [s.to_dict() for s in self.slices],
            "aggregate_metrics": (
                self.aggregate_metrics.to_dict() if self.aggregate_metrics else None
            ),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "StudyReport":
        """Rebuild the numeric report; pixel masks are not serialized."""
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {d.get('schema_version')}")
        slices = [SliceResult.from_dict(sd) for sd in d["slices"]]
        agg = d.get("aggregate_metrics")
        agg_obj = None
        if agg:
            agg_obj = AggregateMetrics(
                pooled=_metric_set_from_dict(agg["pooled"]),
                mean=_metric_set_from_dict(agg["mean"]),
                n_slices=agg["n_slices"],
            )
        sp = d["spacing_mm"]
        return cls(
            study_id=d["study_id"],
            spacing=(sp["x"], sp["y"], sp["z"]),
            ed_phase=d["ed_phase"],
            es_phase=d["es_phase"],
            edv_mm3=d["edv_mm3"],
            esv_mm3=d["esv_mm3"],
            ef_percent=d["ef_percent"],
            ef_undefined=d["ef_flags"]["undefined"],
            ef_nonphysiologic=d["ef_flags"]["nonphysiologic"],
            ef_percent_ok_slices_only=d["ef_percent_ok_slices_only"],
            slices=slices,
            aggregate_metrics=agg_obj,
            truth_ef_percent=d.get("truth_ef_percent"),
            ef_error_percent=d.get("ef_error_percent"),
        )


def _phase_volume(results, kind: str, spacing, area_min_px: float, only_z=None):
    masks = [r.mask for r in results if r.phase_kind == kind and (only_z is None or r.z in only_z)]
    filtered = apex_base_policy(masks, area_min_px)
    zeroed = {
        r.z
        for r, before, after in zip(
            [r for r in results if r.phase_kind == kind and (only_z is None or r.z in only_z)],
            masks, filtered,
        )
        if before is not None and before.area_px() > 0 and after.area_px() == 0
    }
    return slice_volume_stack(filtered, spacing), zeroed


def segment_study(study: CineStudy, tmpl: Template | None, cfg: PipelineConfig = PipelineConfig()) -> StudyReport:
    """Run the two-step pipeline over every (z, ED/ES) slice of a study.

    Seeded mode takes initial centers from cfg.seeds (missing entries fall
    back to auto when a template is available, else the slice is skipped as
    localization_failed).  EF is reported twice: over all slices (failures
    contribute zero area) and restricted to z positions where both phases
    fitted cleanly.
    """
    phase_of = {"ed": study.ed_phase, "es": study.es_phase}
    kinds = ("ed", "es") if study.ed_phase != study.es_phase else ("ed",)

    results: list[SliceResult] = []
    for z in range(study.n_z):
        for kind in kinds:
            phase = phase_of[kind]
            img = study.slice_at(z, phase)
            truth = study.labels.get((z, phase))
            seed = cfg.seeds.get((z, kind)) if cfg.mode == "seeded" else None
            if cfg.mode == "seeded" and seed is None and tmpl is None:
                results.append(SliceResult(
                    z=z, phase=phase, phase_kind=kind, mode="seeded",
                    status="localization_failed",
                    mask=BinaryMask.empty(img.width, img.height),
                    metrics=_score(None, truth, img),
                ))
                continue
            results.append(segment_slice(
                img, tmpl, cfg, z=z, phase=phase, phase_kind=kind,
                seed=seed, truth=truth,
            ))

    return assemble_report(study, results, cfg)


def assemble_report(study: CineStudy, results: list, cfg: PipelineConfig) -> StudyReport:
    """Reduce per-slice results into volumes, EF, and aggregate metrics."""
    kinds = ("ed", "es") if study.ed_phase != study.es_phase else ("ed",)
    spacing = (study.slices[0][0].spacing_x, study.slices[0][0].spacing_y, study.slice_spacing)
    edv, zeroed_ed = _phase_volume(results, "ed", spacing, cfg.area_min_px)
    if "es" in kinds:
        esv, zeroed_es = _phase_volume(results, "es", spacing, cfg.area_min_px)
    else:
        esv, zeroed_es = edv, zeroed_ed
    zeroed = zeroed_ed | zeroed_es
    results = [
        replace(r, zeroed_by_area_policy=(r.z in zeroed and r.ok)) for r in results
    ]

    ef_percent, undefined, nonphys = None, False, False
    try:
        ef = ejection_fraction(edv, esv)
        ef_percent, nonphys = ef.percent, not ef.physiologic
    except UndefinedEFError:
        undefined = True

    ok_z = {
        z for z in range(study.n_z)
        if all(r.ok for r in results if r.z == z)
    }
    ef_ok_only = None
    if ok_z:
        edv_ok, _ = _phase_volume(results, "ed", spacing, cfg.area_min_px, only_z=ok_z)
        if "es" in kinds:
            esv_ok, _ = _phase_volume(results, "es", spacing, cfg.area_min_px, only_z=ok_z)
        else:
            esv_ok = edv_ok
        if edv_ok > 0:
            ef_ok_only = ejection_fraction(edv_ok, esv_ok).percent

    # score against whatever ground truth the study carries NOW (results
    # restored from a session may hold metrics for labels no longer loaded)
    counts = []
    for r in results:
        truth = study.labels.get((r.z, r.phase))
        if truth is None:
            continue
        pred = r.mask if r.mask is not None else BinaryMask.empty(truth.width, truth.height)
        counts.append(confusion(pred, truth))
    agg = aggregate(counts) if counts else None

    truth_ef, ef_err = _truth_ef(study, spacing, kinds)
    if truth_ef is not None and ef_percent is not None:
        ef_err = abs(ef_percent - truth_ef)

    return StudyReport(
        study_id=study.study_id,
        spacing=spacing,
        ed_phase=study.ed_phase,
        es_phase=study.es_phase,
        edv_mm3=edv,
        esv_mm3=esv,
        ef_percent=ef_percent,
        ef_undefined=undefined,
        ef_nonphysiologic=nonphys,
        ef_percent_ok_slices_only=ef_ok_only,
        slices=results,
        aggregate_metrics=agg,
        truth_ef_percent=truth_ef,
        ef_error_percent=ef_err,
    )


def _truth_ef(study: CineStudy, spacing, kinds):
    if not study.labels:
        return None, None
    vols = {}
    for kind in kinds:
        phase = study.ed_phase if kind == "ed" else study.es_phase
        masks = [study.labels[(z, phase)] for z in range(study.n_z) if (z, phase) in study.labels]
        if not masks:
            return None, None
        vols[kind] = slice_volume_stack(masks, spacing)
    edv_t = vols["ed"]
    esv_t = vols.get("es", edv_t)
    if edv_t <= 0:
        return None, None
    return ejection_fraction(edv_t, esv_t).percent, None
