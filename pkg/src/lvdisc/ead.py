"""Elliptical active disc: contrast energy, analytic gradients, descent fitting.

The disc is a pair of concentric circles of radii sqrt(2) and 1, pushed
through the affine map

    X = A cos(th) * x + B sin(th) * y + xc
    Y = -A sin(th) * x + B cos(th) * y + yc

so the inner circle becomes an ellipse with semi-axes (A, B) and the outer
one scales it by sqrt(2), making the annulus area equal to the inner area
(pi*A*B each).  The contrast energy of an intensity field f is

    E = (E1 - 2*E2) / (A*B),      E_i = integral of f over region i,

which is 0 on uniform images, -pi when the inner ellipse exactly covers a
unit-intensity blob on black, and +pi for a unit-intensity annulus.
Minimizing E drives the disc onto a bright region wrapped in darker
surroundings, which is exactly a short-axis blood pool inside myocardium.

Region integrals are evaluated as boundary line integrals of a running
antiderivative of f along X (exact for the bilinear interpolant, see
``ContrastField``), so each evaluation costs O(boundary samples) instead of
O(area).  ``energy_pixelsum`` keeps the direct area summation as an
independent check of that equivalence.

The five partial derivatives used by :func:`gradient` are derived in
DERIVATIONS.md by differentiating the region integrals under boundary
motion; correctness is pinned by finite differences in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import DegenerateDiscError, FitNumericError
from .imaging import BinaryMask, GrayImage, _bilinear

__all__ = [
    "R_OUTER",
    "R_INNER",
    "DiscParams",
    "DiscTemplate",
    "EnergyBreakdown",
    "FitConfig",
    "FitTrace",
    "ContrastField",
    "default_n_samples",
    "boundary_points",
    "energy",
    "energy_pixelsum",
    "gradient",
    "fit",
    "rasterize",
    "contour",
]

R_OUTER = math.sqrt(2.0)
R_INNER = 1.0

_MIN_AREA = 1e-6  # A*B below this is numerically degenerate


@dataclass(frozen=True)
class DiscParams:
    """The five free parameters: inner semi-axes, rotation, center.

    ``a`` scales the rotated x direction, ``b`` the rotated y direction;
    both are the INNER ellipse semi-axes in pixels.  ``theta`` is kept in
    [0, pi) since the ellipse is symmetric under half-turns.
    """

    a: float
    b: float
    theta: float
    xc: float
    yc: float

    def normalized(self) -> "DiscParams":
        return replace(self, theta=self.theta % math.pi)

    def clamped(self, ax_min: float, ax_max: float) -> "DiscParams":
        return replace(
            self,
            a=min(max(self.a, ax_min), ax_max),
            b=min(max(self.b, ax_min), ax_max),
            theta=self.theta % math.pi,
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.theta, self.xc, self.yc])

    @classmethod
    def from_array(cls, v) -> "DiscParams":
        return cls(float(v[0]), float(v[1]), float(v[2]), float(v[3]), float(v[4]))


@dataclass(frozen=True)
class DiscTemplate:
    """Concentric-circle template; the radius ratio fixes equal areas."""

    r1: float = R_OUTER
    r2: float = R_INNER
    n_samples: int = 64

    def __post_init__(self):
        if abs(self.r1 / self.r2 - math.sqrt(2.0)) > 1e-12:
            raise ValueError("outer/inner radius ratio must be sqrt(2) for equal areas")
        if self.n_samples < 8:
            raise ValueError("need at least 8 boundary samples")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Normalized contrast with its two region integrals."""

    e: float
    e1: float
    e2: float


@dataclass(frozen=True)
class FitConfig:
    """Descent settings; the defaults are what the batch pipeline uses."""

    eta_axis: float = 0.2
    eta_theta: float = 0.02
    eta_center: float = 0.5
    max_iter: int = 500
    tol: float = 1e-3
    grad_clip: float = 5.0
    ax_min: float = 2.0
    ax_max: float | None = None  # None -> min(width, height) / 2
    n_samples: int | None = None  # None -> perimeter-adaptive default
    keep_params: bool = False

    def to_dict(self) -> dict:
        return {
            "eta_axis": self.eta_axis,
            "eta_theta": self.eta_theta,
            "eta_center": self.eta_center,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "grad_clip": self.grad_clip,
            "ax_min": self.ax_min,
            "ax_max": self.ax_max,
            "n_samples": self.n_samples,
            "keep_params": self.keep_params,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown descent config keys: {sorted(unknown)}")
        return cls(**known)


@dataclass
class FitTrace:
    """Descent audit trail; energies has one entry per visited iterate."""

    iterations: int
    energies: np.ndarray
    reason: str  # converged | max_iter | degenerate
    params: list | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        """JSON-ready form for energy-trace displays."""
        return {
            "iterations": self.iterations,
            "energies": [float(e) for e in self.energies],
            "reason": self.reason,
            "params": (
                [[p.a, p.b, p.theta, p.xc, p.yc] for p in self.params]
                if self.params is not None else None
            ),
        }


def default_n_samples(p: DiscParams) -> int:
    """Boundary sample count, roughly one per outer-perimeter pixel."""
    return max(64, int(math.ceil(2.0 * math.pi * R_OUTER * max(p.a, p.b))))


class ContrastField:
    """Intensity field plus the running antiderivative used by line integrals.

    ``prefix[i, j]`` is the exact integral of the row-i bilinear profile from
    x=0 to x=j (trapezoid over unit cells, which is exact for a piecewise
    linear profile).  ``antideriv_x`` evaluates F(X, Y) = int_0^X f(s, Y) ds
    of the clamped bilinear interpolant at arbitrary subpixel points:
    quadratic in X inside a cell, linear continuation with the border value
    outside the image.  Because the offset F(0, Y) is a function of Y alone,
    it integrates to zero around any closed contour, so F is a valid
    potential for the line-integral identity.
    """

    def __init__(self, img: GrayImage):
        self.image = img
        self.pix = img.pixels
        pix = self.pix
        pref = np.zeros_like(pix)
        if pix.shape[1] > 1:
            pref[:, 1:] = np.cumsum(0.5 * (pix[:, :-1] + pix[:, 1:]), axis=1)
        self.prefix = pref
        self._pix_flat = np.ascontiguousarray(pix).ravel()
        self._pref_flat = np.ascontiguousarray(pref).ravel()

    @property
    def width(self) -> int:
        return self.pix.shape[1]

    @property
    def height(self) -> int:
        return self.pix.shape[0]

    def sample(self, x, y):
        return _bilinear(self.pix, x, y)

    def antideriv_x(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        h, w = self.pix.shape
        pix_flat, pref_flat = self._pix_flat, self._pref_flat

        # X-dependent pieces are shared by the two bracketing rows
        if w > 1:
            xin = np.clip(x, 0.0, w - 1.0)
            j = np.minimum(xin.astype(np.intp), w - 2)
            u = xin - j
            uu = 0.5 * u * u
            below = x < 0.0
            above = x > w - 1.0
            any_below = bool(below.any())
            any_above = bool(above.any())
            x_past = x - (w - 1.0)

        def row_eval(base):
            if w == 1:
                return x * pix_flat.take(base)
            idx = base + j
            fj = pix_flat.take(idx)
            val = pref_flat.take(idx) + u * fj + uu * (pix_flat.take(idx + 1) - fj)
            if any_below:
                val = np.where(below, x * pix_flat.take(base), val)
            if any_above:
                edge = base + (w - 1)
                val = np.where(above, pref_flat.take(edge) + x_past * pix_flat.take(edge), val)
            return val

        if h == 1:
            return row_eval(np.zeros(y.shape, dtype=np.intp))
        yc = np.clip(y, 0.0, h - 1.0)
        i0 = np.minimum(yc.astype(np.intp), h - 2)
        v = yc - i0
        base = i0 * w
        top = row_eval(base)
        bot = row_eval(base + w)
        return top + v * (bot - top)


def _as_field(img) -> ContrastField:
    return img if isinstance(img, ContrastField) else ContrastField(img)


@lru_cache(maxsize=16)
def _t_grid(n: int):
    """Uniform boundary parameter grid with its trig tables, shared by all
    evaluations at the same sample count."""
    t = 2.0 * math.pi * np.arange(n) / n
    ct = np.cos(t)
    st = np.sin(t)
    for arr in (t, ct, st):
        arr.flags.writeable = False
    return t, ct, st


def _ring_xy_grid(p: DiscParams, r: float, ct: np.ndarray, st: np.ndarray):
    ca, sa = math.cos(p.theta), math.sin(p.theta)
    x = (r * p.a * ca) * ct + (r * p.b * sa) * st + p.xc
    y = (-r * p.a * sa) * ct + (r * p.b * ca) * st + p.yc
    return x, y


def _ring_xy(p: DiscParams, r: float, t: np.ndarray):
    return _ring_xy_grid(p, r, np.cos(t), np.sin(t))


def boundary_points(p: DiscParams, ring: str, n: int):
    """Sample the transformed inner or outer circle at t_k = 2 pi k / n.

    Returns (X, Y, t) arrays.  Points for t and t + pi are reflections of
    each other through the center.
    """
    if n < 8:
        raise ValueError("need at least 8 boundary samples")
    if ring not in ("inner", "outer"):
        raise ValueError(f"ring must be 'inner' or 'outer', got {ring!r}")
    r = R_INNER if ring == "inner" else R_OUTER
    t = 2.0 * math.pi * np.arange(n) / n
    x, y = _ring_xy(p, r, t)
    return x, y, t


def _check_area(p: DiscParams) -> float:
    ab = p.a * p.b
    if not ab > _MIN_AREA:
        raise DegenerateDiscError(f"disc area A*B = {ab} is degenerate")
    return ab


def energy(img, p: DiscParams, n_samples: int | None = None) -> EnergyBreakdown:
    """Contrast energy via boundary line integrals of the X antiderivative.

    ``img`` may be a GrayImage or a prebuilt ContrastField (the fitter
    reuses one field across iterations).
    """
    field_ = _as_field(img)
    ab = _check_area(p)
    n = n_samples or default_n_samples(p)
    _, ct, st = _t_grid(n)
    dt = 2.0 * math.pi / n
    ca, sa = math.cos(p.theta), math.sin(p.theta)
    parts = []
    for r in (R_OUTER, R_INNER):
        x, y = _ring_xy_grid(p, r, ct, st)
        dy_dt = (r * p.a * sa) * st + (r * p.b * ca) * ct
        parts.append(float(np.dot(field_.antideriv_x(x, y), dy_dt) * dt))
    e1, e2 = parts
    return EnergyBreakdown(e=(e1 - 2.0 * e2) / ab, e1=e1, e2=e2)


def _inside(p: DiscParams, r: float, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    ca, sa = math.cos(p.theta), math.sin(p.theta)
    dx = gx - p.xc
    dy = gy - p.yc
    u = (dx * ca - dy * sa) / p.a
    v = (dx * sa + dy * ca) / p.b
    return u * u + v * v <= r * r


def energy_pixelsum(img, p: DiscParams) -> EnergyBreakdown:
    """Contrast energy by direct pixel summation over the two regions.

    The oracle for the line-integral path: pixels whose centers fall inside
    the (outer, inner) ellipses are summed, with centers outside the image
    reading the clamped border value, mirroring the sampling rule of
    :func:`energy`.
    """
    field_ = _as_field(img)
    ab = _check_area(p)
    pix = field_.pix
    h, w = pix.shape
    ext = R_OUTER * max(p.a, p.b)
    x0, x1 = int(math.floor(p.xc - ext)), int(math.ceil(p.xc + ext))
    y0, y1 = int(math.floor(p.yc - ext)), int(math.ceil(p.yc + ext))
    gx, gy = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    vals = pix[np.clip(gy, 0, h - 1), np.clip(gx, 0, w - 1)]
    e1 = float(vals[_inside(p, R_OUTER, gx, gy)].sum())
    e2 = float(vals[_inside(p, R_INNER, gx, gy)].sum())
    return EnergyBreakdown(e=(e1 - 2.0 * e2) / ab, e1=e1, e2=e2)


def gradient(img, p: DiscParams, n_samples: int | None = None) -> np.ndarray:
    """Analytic partials (dE/dA, dE/dB, dE/dtheta, dE/dxc, dE/dyc).

    With f1, f2 the field sampled on the outer/inner boundaries and E the
    current energy (all on the same t grid):

        dE/dA  = (2 I[(f1 - f2) cos^2 t] - E) / A
        dE/dB  = (2 I[(f1 - f2) sin^2 t] - E) / B
        dE/dth = (B^2 - A^2) / (A B) * I[(f1 - f2) sin 2t]
        dE/dxc = I[(sqrt2 f1 - 2 f2) (A sin th sin t + B cos th cos t)] / (A B)
        dE/dyc = I[(sqrt2 f1 - 2 f2) (A cos th sin t - B sin th cos t)] / (A B)

    where I[.] is the periodic trapezoid sum over t in [0, 2 pi).  See
    DERIVATIONS.md for where the factors come from.
    """
    field_ = _as_field(img)
    ab = _check_area(p)
    n = n_samples or default_n_samples(p)
    _, ct, st = _t_grid(n)
    dt = 2.0 * math.pi / n
    ca, sa = math.cos(p.theta), math.sin(p.theta)

    x1, y1 = _ring_xy_grid(p, R_OUTER, ct, st)
    x2, y2 = _ring_xy_grid(p, R_INNER, ct, st)
    f1 = field_.sample(x1, y1)
    f2 = field_.sample(x2, y2)

    # E on the same grid keeps the A/B partials consistent with energy().
    w_t = (p.a * sa) * st + (p.b * ca) * ct  # dY/dt before the ring radius
    e1 = float(np.dot(field_.antideriv_x(x1, y1), w_t) * R_OUTER * dt)
    e2 = float(np.dot(field_.antideriv_x(x2, y2), w_t) * R_INNER * dt)
    e = (e1 - 2.0 * e2) / ab

    diff = f1 - f2
    i_cc = float(np.dot(diff, ct * ct) * dt)
    i_ss = float(np.dot(diff, st * st) * dt)
    i_s2 = float(np.dot(diff, 2.0 * st * ct) * dt)
    mix = R_OUTER * f1 - 2.0 * R_INNER * f2
    d_xc = float(np.dot(mix, w_t) * dt) / ab
    d_yc = float(np.dot(mix, (p.a * ca) * st - (p.b * sa) * ct) * dt) / ab

    return np.array([
        (2.0 * i_cc - e) / p.a,
        (2.0 * i_ss - e) / p.b,
        (p.b * p.b - p.a * p.a) / ab * i_s2,
        d_xc,
        d_yc,
    ])


def _theta_dist(t0: float, t1: float) -> float:
    d = abs((t0 - t1) % math.pi)
    return min(d, math.pi - d)


def fit(img, init: DiscParams, cfg: FitConfig = FitConfig()):
    """Gradient descent from ``init``; returns (best params, trace).

    Each step takes p <- p - eta .* grad with per-parameter rates, clips
    gradient components to +-grad_clip, projects the axes into bounds, and
    wraps theta into [0, pi).  Terminates when the largest actual parameter
    update drops below ``tol`` (pixels/radians) or at ``max_iter``.  Fixed
    steps may overshoot, so the lowest-energy iterate seen is returned, not
    the last one.
    """
    field_ = _as_field(img)
    ax_max = cfg.ax_max if cfg.ax_max is not None else min(field_.width, field_.height) / 2.0
    etas = np.array([cfg.eta_axis, cfg.eta_axis, cfg.eta_theta, cfg.eta_center, cfg.eta_center])

    p = init.clamped(cfg.ax_min, ax_max)
    n_for = (lambda q: cfg.n_samples) if cfg.n_samples else default_n_samples

    energies = [energy(field_, p, n_for(p)).e]
    params_hist = [p] if cfg.keep_params else None
    best_e, best_p = energies[0], p
    reason = "max_iter"
    iterations = 0

    def _trace():
        return FitTrace(
            iterations=iterations,
            energies=np.array(energies),
            reason=reason,
            params=params_hist,
        )

    if not math.isfinite(energies[0]):
        raise FitNumericError("non-finite energy at the initial parameters", trace=_trace())

    for _ in range(cfg.max_iter):
        n = n_for(p)
        try:
            g = gradient(field_, p, n)
            g = np.clip(g, -cfg.grad_clip, cfg.grad_clip)
            p_new = DiscParams.from_array(p.as_array() - etas * g).clamped(cfg.ax_min, ax_max)
            e_new = energy(field_, p_new, n_for(p_new)).e
        except DegenerateDiscError:
            reason = "degenerate"
            break
        iterations += 1
        energies.append(e_new)
        if params_hist is not None:
            params_hist.append(p_new)
        if not math.isfinite(e_new):
            raise FitNumericError(f"non-finite energy after {iterations} steps", trace=_trace())
        update = max(
            abs(p_new.a - p.a),
            abs(p_new.b - p.b),
            _theta_dist(p_new.theta, p.theta),
            abs(p_new.xc - p.xc),
            abs(p_new.yc - p.yc),
        )
        p = p_new
        if e_new < best_e:
            best_e, best_p = e_new, p_new
        if update < cfg.tol:
            reason = "converged"
            break

    return best_p, _trace()


def rasterize(p: DiscParams, width: int, height: int) -> BinaryMask:
    """Pixels whose centers fall inside the inner ellipse (the endocardium)."""
    gx, gy = np.meshgrid(np.arange(width), np.arange(height))
    return BinaryMask(_inside(p, R_INNER, gx, gy))


def contour(p: DiscParams, n: int = 128) -> np.ndarray:
    """Closed inner-boundary polyline, shape (n + 1, 2) of (x, y) vertices."""
    x, y, _ = boundary_points(p, "inner", n)
    pts = np.column_stack([x, y])
    return np.vstack([pts, pts[:1]])
