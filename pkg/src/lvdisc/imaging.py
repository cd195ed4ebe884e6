"""Image containers and the resampling primitives everything else builds on.

A :class:`GrayImage` is an immutable 2D scalar field in row-major order with
intensities normalized to [0, 1] and physical pixel spacing in mm.  A
:class:`CineStudy` stacks such images over slice position ``z`` and cardiac
phase.  All operations here are pure functions; the containers are safe to
share across threads.

Coordinate convention: ``x`` indexes columns, ``y`` indexes rows, and
``(x, y) = (j, i)`` addresses ``pixels[i, j]``.  Subpixel coordinates refer to
pixel centers, so integer coordinates reproduce stored values exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ScaleError

__all__ = [
    "GrayImage",
    "CineStudy",
    "BinaryMask",
    "normalize",
    "sample_bilinear",
    "rescale",
]


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GrayImage:
    """2D scalar field with mm-per-pixel spacing, intensities in [0, 1]."""

    pixels: np.ndarray  # shape (height, width), float64, read-only
    spacing_x: float = 1.0
    spacing_y: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"expected a 2D image of at least 1x1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DimensionError("image contains non-finite intensities")
        lo, hi = float(arr.min()), float(arr.max())
        if lo < -1e-9 or hi > 1.0 + 1e-9:
            raise DimensionError(f"intensities must lie in [0, 1], got range [{lo}, {hi}]")
        if not (self.spacing_x > 0 and self.spacing_y > 0):
            raise DimensionError("pixel spacing must be positive")
        object.__setattr__(self, "pixels", _as_readonly(np.clip(arr, 0.0, 1.0)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinaryMask:
    """Boolean per-pixel mask with the same addressing as GrayImage."""

    bits: np.ndarray  # shape (height, width), bool, read-only

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=bool)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2D mask, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def area_px(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))


@dataclass(frozen=True)
class CineStudy:
    """Short-axis cine stack indexed by (z, phase).

    All slices share dimensions.  ``slice_spacing`` is the inter-slice
    distance in mm (gap included).  ``labels`` optionally holds ground-truth
    masks keyed by (z, phase).
    """

    study_id: str
    slices: tuple  # tuple over z of tuple over phase of GrayImage
    slice_spacing: float
    ed_phase: int
    es_phase: int
    labels: dict = field(default_factory=dict)  # (z, phase) -> BinaryMask

    def __post_init__(self):
        if self.n_z < 1 or self.n_phase < 1:
            raise DimensionError("study must contain at least one slice")
        w, h = self.slices[0][0].width, self.slices[0][0].height
        for row in self.slices:
            if len(row) != self.n_phase:
                raise DimensionError("ragged phase axis")
            for img in row:
                if img.width != w or img.height != h:
                    raise DimensionError("all slices in a study must share dimensions")
        if not (0 <= self.ed_phase < self.n_phase and 0 <= self.es_phase < self.n_phase):
            raise DimensionError(
                f"ED/ES phase indices ({self.ed_phase}, {self.es_phase}) "
                f"out of range for {self.n_phase} phases"
            )
        if not self.slice_spacing > 0:
            raise DimensionError("slice spacing must be positive")
        for (z, p), mask in self.labels.items():
            if mask.width != w or mask.height != h:
                raise DimensionError(f"label mask at (z={z}, phase={p}) has mismatched dimensions")

    @property
    def n_z(self) -> int:
        return len(self.slices)

    @property
    def n_phase(self) -> int:
        return len(self.slices[0])

    @property
    def width(self) -> int:
        return self.slices[0][0].width

    @property
    def height(self) -> int:
        return self.slices[0][0].height

    def slice_at(self, z: int, phase: int) -> GrayImage:
        return self.slices[z][phase]


def normalize(raw, spacing_x: float = 1.0, spacing_y: float = 1.0) -> GrayImage:
    """Map raw intensities onto [0, 1] by a robust percentile window.

    The 1st/99th percentiles of the raw data (nearest-rank) define an affine
    map onto [0, 1]; values beyond the window clamp to the endpoints.  MR
    magnitude data carries sparse bright outliers that would otherwise crush
    the usable contrast.  Constant input maps to all zeros.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.size == 0:
        raise DimensionError("cannot normalize an empty array")
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError("raw intensities contain non-finite values")
    lo = float(np.quantile(arr, 0.01, method="nearest"))
    hi = float(np.quantile(arr, 0.99, method="nearest"))
    if hi <= lo:
        out = np.zeros_like(arr)
    else:
        out = np.clip((arr - lo) / (hi - lo), 0.0, 1.0)
    return GrayImage(out, spacing_x=spacing_x, spacing_y=spacing_y)


def sample_bilinear(img: GrayImage, x, y):
    """Bilinear sample at subpixel (x, y); out-of-range coordinates clamp to the border.

    Accepts scalars or arrays (broadcast together); returns matching shape.
    """
    return _bilinear(img.pixels, x, y)


def _bilinear(pix: np.ndarray, x, y):
    h, w = pix.shape
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, w - 1.0)
    y = np.clip(np.asarray(y, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.minimum(np.floor(x).astype(np.intp), max(w - 2, 0))
    y0 = np.minimum(np.floor(y).astype(np.intp), max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    u = x - x0
    v = y - y0
    top = pix[y0, x0] * (1.0 - u) + pix[y0, x1] * u
    bot = pix[y1, x0] * (1.0 - u) + pix[y1, x1] * u
    out = top * (1.0 - v) + bot * v
    return float(out) if np.isscalar(out) or out.ndim == 0 else out


def _resize_bilinear(pix: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    h, w = pix.shape
    if (out_w, out_h) == (w, h):
        return pix.copy()
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    gx, gy = np.meshgrid(xs, ys)
    return _bilinear(pix, gx, gy)


def rescale(img: GrayImage, factor: float) -> GrayImage:
    """Resample to round(factor * dims) using bilinear interpolation.

    Output pixel centers map back through the half-pixel convention, so a
    factor of 1.0 is an exact identity.  Spacing scales inversely so physical
    extent is preserved.
    """
    if not (0.0 < factor <= 1.0):
        raise ScaleError(f"rescale factor must be in (0, 1], got {factor}")
    out_w = int(round(factor * img.width))
    out_h = int(round(factor * img.height))
    if out_w < 1 or out_h < 1:
        raise ScaleError(
            f"factor {factor} shrinks {img.width}x{img.height} below 1x1"
        )
    if out_w == img.width and out_h == img.height:
        return img
    out = _resize_bilinear(img.pixels, out_w, out_h)
    return GrayImage(
        out,
        spacing_x=img.spacing_x * img.width / out_w,
        spacing_y=img.spacing_y * img.height / out_h,
    )
