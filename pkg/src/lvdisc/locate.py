"""Left-ventricle localization by normalized cross-correlation over scales.

The similarity map is the plain (not zero-mean) normalized cross-correlation

    zeta(x, y) = sum(T * I_window) / sqrt(sum(T^2) * sum(I_window^2))

which lies in [0, 1] for nonnegative images and hits 1 exactly where a
window is a positive multiple of the template.  The multiscale search
shrinks the SEARCH image through a scale grid (the template stays fixed),
keeps the best correlation over all scales, and maps the winning position
back to the original frame by dividing by the winning scale, so one
template serves search images of any resolution coarser than its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import SizeError
from .imaging import GrayImage, rescale

__all__ = ["Template", "MatchResult", "ncc_map", "match_multiscale", "localization_hit",
           "LOW_CONFIDENCE_ZETA"]

# Correlations below this mark a localization as failed; downstream the
# slice is scored as a segmentation failure rather than fit from garbage.
LOW_CONFIDENCE_ZETA = 0.35


@dataclass(frozen=True)
class Template:
    """Search template; must carry nonzero energy for the NCC denominator."""

    image: GrayImage
    source_note: str = ""

    def __post_init__(self):
        if float((self.image.pixels ** 2).sum()) <= 0.0:
            raise ValueError("template has zero energy (all-black); NCC is undefined")

    @property
    def width(self) -> int:
        return self.image.width

    @property
    def height(self) -> int:
        return self.image.height


@dataclass(frozen=True)
class MatchResult:
    """Best match mapped back to the original image frame.

    (x, y) is the top-left corner of the matched region divided by the
    winning scale; (center_x, center_y) locate the template center in the
    same frame.  ``low_confidence`` flags zeta below LOW_CONFIDENCE_ZETA.
    """

    x: float
    y: float
    scale: float
    zeta: float
    center_x: float
    center_y: float
    low_confidence: bool

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "scale": self.scale,
            "zeta": self.zeta,
            "center_x": self.center_x,
            "center_y": self.center_y,
            "low_confidence": self.low_confidence,
        }


def ncc_map(search: GrayImage, tmpl: Template) -> np.ndarray:
    """Correlation map over all placements where the template fully fits.

    Output shape is (H - th + 1, W - tw + 1).  Windows with zero energy
    (the denominator's degenerate case) score 0 by convention.
    """
    big = search.pixels
    small = tmpl.image.pixels
    th, tw = small.shape
    if th > big.shape[0] or tw > big.shape[1]:
        raise SizeError(
            f"template {tw}x{th} exceeds search image {big.shape[1]}x{big.shape[0]}"
        )
    num = fftconvolve(big, small[::-1, ::-1], mode="valid")
    # window energies via an integral image: exact sums, no FFT noise
    sq = np.zeros((big.shape[0] + 1, big.shape[1] + 1))
    sq[1:, 1:] = (big * big).cumsum(axis=0).cumsum(axis=1)
    win = sq[th:, tw:] - sq[:-th, tw:] - sq[th:, :-tw] + sq[:-th, :-tw]
    win = np.maximum(win, 0.0)
    denom = np.sqrt(win * float((small * small).sum()))
    with np.errstate(divide="ignore", invalid="ignore"):
        zeta = np.where(denom > 1e-12, num / np.where(denom > 1e-12, denom, 1.0), 0.0)
    return np.clip(zeta, 0.0, 1.0)


def _scale_grid(scale_min: float, scale_step: float):
    scales = []
    k = 0
    while True:
        s = 1.0 - k * scale_step
        if s < scale_min - 1e-9:
            break
        scales.append(round(s, 12))
        k += 1
        if s <= 0:
            break
    return [s for s in scales if s > 0]


def match_multiscale(
    search: GrayImage,
    tmpl: Template,
    scale_min: float = 0.1,
    scale_step: float = 0.1,
    low_conf_zeta: float = LOW_CONFIDENCE_ZETA,
) -> MatchResult:
    """Sweep the scale grid 1.0, 1.0 - step, ... down to scale_min.

    Scales where the shrunken search no longer holds the template are
    skipped.  Ties break toward the first visit: larger scale first, then
    row-major scan order within a map, making the result deterministic.
    With scale_min = scale_step = 1.0 this degenerates to single-scale
    matching.
    """
    best = None  # (zeta, x_m, y_m, s_m)
    for s in _scale_grid(scale_min, scale_step):
        out_w = int(round(s * search.width))
        out_h = int(round(s * search.height))
        if out_w < tmpl.width or out_h < tmpl.height or out_w < 1 or out_h < 1:
            continue
        shrunk = rescale(search, s) if s != 1.0 else search
        zmap = ncc_map(shrunk, tmpl)
        idx = int(np.argmax(zmap))
        ym, xm = divmod(idx, zmap.shape[1])
        z = float(zmap[ym, xm])
        if best is None or z > best[0]:
            best = (z, xm, ym, s)
    if best is None:
        raise SizeError(
            f"template {tmpl.width}x{tmpl.height} fits the search image at no swept scale"
        )
    z, xm, ym, sm = best
    cx = (xm + (tmpl.width - 1) / 2.0) / sm
    cy = (ym + (tmpl.height - 1) / 2.0) / sm
    return MatchResult(
        x=xm / sm,
        y=ym / sm,
        scale=sm,
        zeta=z,
        center_x=cx,
        center_y=cy,
        low_confidence=z < low_conf_zeta,
    )


def localization_hit(result: MatchResult, truth_box) -> bool:
    """True iff the matched template center falls inside the closed box.

    ``truth_box`` is (x_min, y_min, x_max, y_max); edges count as hits.
    """
    x0, y0, x1, y1 = truth_box
    return bool(x0 <= result.center_x <= x1 and y0 <= result.center_y <= y1)
