"""Synthetic images and studies with analytically known geometry.

Everything the test suite and the demo scripts treat as ground truth is
built here: antialiased ellipse blobs, ring targets that mimic a short-axis
blood pool inside myocardium, Gaussian-blurred noise fields for smooth-image
checks, scenes with an embedded template for localization trials, and a
cine study sampled from a shrinking ellipsoid whose volumes and ejection
fraction are known in closed form.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import gaussian_filter

from .ead import DiscParams, rasterize
from .imaging import CineStudy, GrayImage, _resize_bilinear

__all__ = [
    "ellipse_coverage",
    "ellipse_phantom",
    "ring_phantom",
    "default_lv_template",
    "blurred_noise_image",
    "embed",
    "template_scene",
    "ellipsoid_study",
]


def ellipse_coverage(shape, p: DiscParams, supersample: int = 8) -> np.ndarray:
    """Per-pixel area fraction covered by the inner ellipse of ``p``.

    Computed by subsampling each pixel on a supersample x supersample grid,
    giving soft 1-pixel edges whose continuum optimum stays at the exact
    ellipse parameters.
    """
    h, w = shape
    ss = supersample
    offs = (np.arange(ss) + 0.5) / ss - 0.5
    ca, sa = math.cos(p.theta), math.sin(p.theta)
    cover = np.zeros((h, w))
    gx, gy = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    for oy in offs:
        for ox in offs:
            dx = gx + ox - p.xc
            dy = gy + oy - p.yc
            u = (dx * ca - dy * sa) / p.a
            v = (dx * sa + dy * ca) / p.b
            cover += u * u + v * v <= 1.0
    return cover / (ss * ss)


def ellipse_phantom(
    shape,
    p: DiscParams,
    fg: float = 0.9,
    bg: float = 0.1,
    noise_sigma: float = 0.0,
    rng: np.random.Generator | None = None,
    supersample: int = 8,
) -> GrayImage:
    """Bright ellipse on a flat background, optional additive Gaussian noise."""
    img = bg + (fg - bg) * ellipse_coverage(shape, p, supersample)
    if noise_sigma > 0:
        rng = rng or np.random.default_rng(0)
        img = img + rng.normal(0.0, noise_sigma, size=img.shape)
    return GrayImage(np.clip(img, 0.0, 1.0))


def ring_phantom(
    shape,
    p: DiscParams,
    pool: float = 0.95,
    ring: float = 0.08,
    bg: float = 0.40,
    ring_scale: float = 1.7,
    supersample: int = 8,
) -> GrayImage:
    """Bright pool inside a dark ring on a mid background.

    The ring's outer edge sits at ``ring_scale`` times the pool radii, wide
    enough to contain the disc annulus (sqrt(2) times the pool) when the
    disc fits the pool exactly.
    """
    inner = ellipse_coverage(shape, p, supersample)
    outer_p = DiscParams(p.a * ring_scale, p.b * ring_scale, p.theta, p.xc, p.yc)
    outer = ellipse_coverage(shape, outer_p, supersample)
    img = bg + (ring - bg) * outer + (pool - ring) * inner
    return GrayImage(np.clip(img, 0.0, 1.0))


def default_lv_template(size: int = 48) -> GrayImage:
    """The stock search template: bright disc wrapped in a dark annulus.

    Stands in for a cropped real template in tests and demos; batch runs on
    real scans should pass their own cropped template file.
    """
    c = (size - 1) / 2.0
    r = size * 0.20
    return ring_phantom((size, size), DiscParams(r, r, 0.0, c, c))


def blurred_noise_image(
    shape,
    sigma: float = 4.0,
    rng: np.random.Generator | None = None,
    lo: float = 0.0,
    hi: float = 1.0,
) -> GrayImage:
    """Gaussian-blurred uniform noise stretched to [lo, hi]: a generic smooth field."""
    rng = rng or np.random.default_rng(0)
    raw = gaussian_filter(rng.random(shape), sigma, mode="nearest")
    rmin, rmax = raw.min(), raw.max()
    if rmax - rmin < 1e-12:
        return GrayImage(np.full(shape, lo))
    return GrayImage(lo + (hi - lo) * (raw - rmin) / (rmax - rmin))


def embed(base: GrayImage, patch: GrayImage, x: int, y: int) -> GrayImage:
    """Paste ``patch`` with its top-left pixel at (x, y)."""
    out = base.pixels.copy()
    out[y : y + patch.height, x : x + patch.width] = patch.pixels
    return GrayImage(out, spacing_x=base.spacing_x, spacing_y=base.spacing_y)


def template_scene(
    tmpl_img: GrayImage,
    shape,
    scale: float,
    position: tuple[int, int],
    rng: np.random.Generator | None = None,
    noise_amp: float = 0.15,
):
    """Scene holding the template enlarged by 1/scale, for localization trials.

    When the search image is later shrunk by ``scale`` the embedded pattern
    returns to the template's own resolution, so a multiscale sweep should
    win at exactly that scale.  Returns (scene, expected) where ``expected``
    is the embedding position in the scene frame.
    """
    rng = rng or np.random.default_rng(0)
    h, w = shape
    bg = GrayImage(np.clip(0.35 + noise_amp * (rng.random((h, w)) - 0.5), 0.0, 1.0))
    up_w = int(round(tmpl_img.width / scale))
    up_h = int(round(tmpl_img.height / scale))
    patch = GrayImage(np.clip(_resize_bilinear(tmpl_img.pixels, up_w, up_h), 0.0, 1.0))
    x, y = position
    return embed(bg, patch, x, y), (x, y)


def ellipsoid_study(
    n_z: int = 9,
    n_phase: int = 6,
    shape=(128, 128),
    axis_a: float = 22.0,
    axis_b: float = 18.0,
    es_scale: float = 0.65,
    spacing: tuple[float, float, float] = (1.2, 1.2, 8.0),
    study_id: str = "phantom",
    rng: np.random.Generator | None = None,
    noise_sigma: float = 0.0,
    apex_margin_slices: float = 1.5,
):
    """Cine study of an ellipsoid blood pool that contracts toward systole.

    Slice planes cut the ellipsoid at n_z equally spaced z offsets; the
    in-plane semi-axes scale with the cardiac phase from 1.0 at ED (phase 0)
    down to ``es_scale`` at ES (phase n_phase // 2) and back.  The ellipsoid
    pole extends ``apex_margin_slices`` beyond the sampled stack on each
    side, the way a short-axis acquisition stops short of the true apex, so
    the outermost slices keep a workable cross-section.  Ground-truth masks
    rasterize the analytic per-slice ellipses.

    Returns (study, truth); truth carries the analytic volumes of the
    portion of the ellipsoid covered by the stack,

        V(s) = pi (s a) (s b) (2 Z - 2 Z^3 / (3 c^2)),   Z = n_z dz / 2,

    so EF = (1 - es_scale^2) * 100 exactly (truncation and the fixed z
    semi-axis cancel in the ratio).
    """
    rng = rng or np.random.default_rng(7)
    h, w = shape
    sx, sy, dz = spacing
    es_phase = n_phase // 2
    c = (n_z + 2.0 * apex_margin_slices) * dz / 2.0
    z_half = n_z * dz / 2.0
    z_mm = (np.arange(n_z) - (n_z - 1) / 2.0) * dz

    def phase_scale(t: int) -> float:
        # cosine interpolation 1 -> es_scale -> 1 across the cycle
        u = 0.5 * (1.0 - math.cos(2.0 * math.pi * t / n_phase))
        return 1.0 + (es_scale - 1.0) * u

    xc, yc = (w - 1) / 2.0, (h - 1) / 2.0
    slices = []
    labels = {}
    for z in range(n_z):
        s_z = math.sqrt(max(0.0, 1.0 - (z_mm[z] / c) ** 2))
        row = []
        for t in range(n_phase):
            s = phase_scale(t) * s_z
            a_px = axis_a * s / sx
            b_px = axis_b * s / sy
            if a_px < 1.0 or b_px < 1.0:
                img = GrayImage(np.full((h, w), 0.40), spacing_x=sx, spacing_y=sy)
                row.append(img)
                continue
            p = DiscParams(a_px, b_px, 0.0, xc, yc)
            img = ring_phantom((h, w), p)
            if noise_sigma > 0:
                noisy = np.clip(
                    img.pixels + rng.normal(0.0, noise_sigma, size=(h, w)), 0.0, 1.0
                )
                img = GrayImage(noisy, spacing_x=sx, spacing_y=sy)
            else:
                img = GrayImage(img.pixels, spacing_x=sx, spacing_y=sy)
            row.append(img)
            labels[(z, t)] = rasterize(p, w, h)
        slices.append(tuple(row))

    study = CineStudy(
        study_id=study_id,
        slices=tuple(slices),
        slice_spacing=dz,
        ed_phase=0,
        es_phase=es_phase,
        labels=labels,
    )
    covered = 2.0 * z_half - 2.0 * z_half**3 / (3.0 * c * c)
    vol = lambda s: math.pi * (s * axis_a) * (s * axis_b) * covered
    edv, esv = vol(1.0), vol(es_scale)
    truth = {"edv_mm3": edv, "esv_mm3": esv, "ef_percent": (edv - esv) / edv * 100.0}
    return study, truth
