"""sRGB <-> CIELAB conversion, gamut handling and L*-linear colormaps.

All conversions are vectorized over arrays whose last axis holds the three
channels, so the same call handles a single pixel ``(3,)`` or an image
``(H, W, 3)``.  sRGB uses the IEC 61966-2-1 transfer curve and primaries
with a D65 white.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

__all__ = [
    "Colormap",
    "srgb_to_linear",
    "linear_to_srgb",
    "srgb_to_lab",
    "lab_to_srgb_unclipped",
    "lab_to_srgb_clipped",
    "lab_to_srgb_chroma_scaled",
    "in_gamut",
    "chroma",
    "hue",
    "max_chroma_fourth_quadrant",
    "fourth_quadrant_chroma_table",
    "fourth_quadrant_chroma",
    "make_linear_gray_colormap",
    "make_linear_hot_colormap",
]

RGB_TO_XYZ = np.array([
    [0.4124, 0.3576, 0.1805],
    [0.2126, 0.7152, 0.0722],
    [0.0193, 0.1192, 0.9505],
])
XYZ_TO_RGB = np.linalg.inv(RGB_TO_XYZ)
# D65 white as the image of sRGB (1, 1, 1), so white maps to a* = b* = 0.
WHITE = RGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0
_GAMUT_EPS = 1e-9
_SCALE_TOL = 1e-3
_HUE_STEP = np.pi / 180.0
_CHROMA_SEARCH_MAX = 200.0
_TABLE_SIZE = 1024


def srgb_to_linear(v):
    v = np.asarray(v, dtype=np.float64)
    return np.where(v <= 0.04045, v / 12.92, ((np.abs(v) + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(c):
    c = np.asarray(c, dtype=np.float64)
    # abs() keeps the power finite on negative (out-of-gamut) inputs; those
    # take the linear branch anyway.
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * np.abs(c) ** (1.0 / 2.4) - 0.055)


def _f(t):
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3 * _DELTA**2) + 4.0 / 29.0)


def _f_inv(f):
    return np.where(f > _DELTA, f**3, 3 * _DELTA**2 * (f - 4.0 / 29.0))


def srgb_to_lab(rgb):
    """Convert nonlinear sRGB in [0, 1] to CIELAB ``(L*, a*, b*)``."""
    rgb = np.asarray(rgb, dtype=np.float64)
    xyz = srgb_to_linear(rgb) @ RGB_TO_XYZ.T
    fx, fy, fz = (_f(xyz[..., i] / WHITE[i]) for i in range(3))
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def lab_to_srgb_unclipped(lab):
    """Exact inverse of :func:`srgb_to_lab`, without any gamut handling."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_f_inv(fx) * WHITE[0], _f_inv(fy) * WHITE[1], _f_inv(fz) * WHITE[2]], axis=-1)
    return linear_to_srgb(xyz @ XYZ_TO_RGB.T)


def in_gamut(lab) -> np.ndarray:
    rgb = lab_to_srgb_unclipped(lab)
    return np.all((rgb >= -_GAMUT_EPS) & (rgb <= 1.0 + _GAMUT_EPS), axis=-1)


def lab_to_srgb_clipped(lab):
    """Lab to sRGB with gamut clipping (each channel clamped to [0, 1])."""
    return np.clip(lab_to_srgb_unclipped(lab), 0.0, 1.0)


def lab_to_srgb_chroma_scaled(lab):
    """Lab to sRGB, shrinking chroma at fixed L* and hue until in gamut.

    The largest scale ``s`` in [0, 1] on (a*, b*) that lands in the sRGB
    gamut is found by bisection to a tolerance of 1e-3.  Slower than
    clipping but does not shift hue.
    """
    lab = np.asarray(lab, dtype=np.float64)
    ok = in_gamut(lab)
    lo = np.where(ok, 1.0, 0.0)
    hi = np.ones(lab.shape[:-1])
    todo = ~ok
    while np.any(todo) and np.max(hi - lo) > _SCALE_TOL:
        mid = 0.5 * (lo + hi)
        trial = np.concatenate([lab[..., :1], lab[..., 1:] * mid[..., None]], axis=-1)
        good = in_gamut(trial)
        lo = np.where(todo & good, mid, lo)
        hi = np.where(todo & ~good, mid, hi)
    scaled = np.concatenate([lab[..., :1], lab[..., 1:] * lo[..., None]], axis=-1)
    return lab_to_srgb_clipped(scaled)


def chroma(lab):
    lab = np.asarray(lab, dtype=np.float64)
    return np.hypot(lab[..., 1], lab[..., 2])


def hue(lab):
    lab = np.asarray(lab, dtype=np.float64)
    return np.arctan2(lab[..., 2], lab[..., 1])


def _bisect_gamut(L, da, db, upper, iters):
    """Largest t in [0, upper] with (L, t*da, t*db) in gamut, per element."""
    lo = np.zeros(np.broadcast(L, da, db).shape)
    hi = np.full_like(lo, upper)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        good = in_gamut(np.stack(np.broadcast_arrays(L, mid * da, mid * db), axis=-1))
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    return lo


def _max_chroma_fourth_quadrant(L):
    L = np.atleast_1d(np.asarray(L, dtype=np.float64))[:, None]
    theta = np.arange(0.0, np.pi / 2 + 0.5 * _HUE_STEP, _HUE_STEP)[None, :]
    # Boundary radius on the two axes sets the ellipse shape ...
    iters = int(np.ceil(np.log2(_CHROMA_SEARCH_MAX / _SCALE_TOL)))
    c_a = _bisect_gamut(L, 1.0, 0.0, _CHROMA_SEARCH_MAX, iters)
    c_b = _bisect_gamut(L, 0.0, -1.0, _CHROMA_SEARCH_MAX, iters)
    # ... then one shared shrink factor pulls every swept point inside.
    k_iters = int(np.ceil(np.log2(1.0 / _SCALE_TOL)))
    k = _bisect_gamut(L, np.cos(theta) * c_a, -np.sin(theta) * c_b, 1.0, k_iters).min(axis=1)
    return k * c_a[:, 0], k * c_b[:, 0]


def max_chroma_fourth_quadrant(L_star: float) -> tuple[float, float]:
    """Per-axis chroma bounds ``(C_a, C_b)`` of an in-gamut fourth-quadrant sweep.

    Every point ``(cos t * C_a, -sin t * C_b)`` for t in [0, pi/2] (sampled
    at 1 degree) is inside the sRGB gamut at lightness ``L_star``.
    """
    c_a, c_b = _max_chroma_fourth_quadrant(L_star)
    return float(c_a[0]), float(c_b[0])


@lru_cache(maxsize=1)
def fourth_quadrant_chroma_table() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(L*, C_a, C_b)`` sampled at 1024 evenly spaced lightness levels."""
    L = np.linspace(0.0, 100.0, _TABLE_SIZE)
    c_a, c_b = _max_chroma_fourth_quadrant(L)
    for arr in (L, c_a, c_b):
        arr.flags.writeable = False
    return L, c_a, c_b


def fourth_quadrant_chroma(L_star):
    """Table lookup of the chroma bounds for an array of lightness values.

    Takes the smaller of the two bracketing table entries, which errs on
    the in-gamut side.
    """
    L_tab, ca_tab, cb_tab = fourth_quadrant_chroma_table()
    L = np.clip(np.asarray(L_star, dtype=np.float64), 0.0, 100.0)
    pos = L / 100.0 * (_TABLE_SIZE - 1)
    i0 = np.floor(pos).astype(np.int64)
    i1 = np.minimum(i0 + 1, _TABLE_SIZE - 1)
    exact = pos == i0
    i1 = np.where(exact, i0, i1)
    return np.minimum(ca_tab[i0], ca_tab[i1]), np.minimum(cb_tab[i0], cb_tab[i1])


@dataclass(frozen=True)
class Colormap:
    """256-entry sRGB lookup table."""

    name: str
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.shape != (256, 3):
            raise ValueError(f"colormap needs 256 RGB entries, got {entries.shape}")
        entries = entries.copy()
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    def __call__(self, index) -> np.ndarray:
        return self.entries[np.asarray(index)]

    def lightness(self) -> np.ndarray:
        return srgb_to_lab(self.entries)[:, 0]

    def to_csv(self, path) -> None:
        """Write rows ``t, r_byte, g_byte, b_byte``."""
        rgb = np.floor(self.entries * 255 + 0.5).astype(int)
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "r_byte", "g_byte", "b_byte"])
            for t, (r, g, b) in enumerate(rgb):
                writer.writerow([t, r, g, b])


def make_linear_gray_colormap() -> Colormap:
    L = 100.0 * np.arange(256) / 255.0
    lab = np.stack([L, np.zeros(256), np.zeros(256)], axis=-1)
    return Colormap("gray", lab_to_srgb_clipped(lab))


def _hot(u):
    """Conventional hot ramp: black -> red -> yellow -> white."""
    u = np.asarray(u, dtype=np.float64)
    r = np.clip(u / 0.375, 0.0, 1.0)
    g = np.clip((u - 0.375) / 0.375, 0.0, 1.0)
    b = np.clip((u - 0.75) / 0.25, 0.0, 1.0)
    return np.stack([r, g, b], axis=-1)


def make_linear_hot_colormap(samples: int = 8193) -> Colormap:
    """Hot ramp resampled along its own L* so lightness rises linearly."""
    u = np.linspace(0.0, 1.0, samples)
    L = srgb_to_lab(_hot(u))[:, 0]
    target = 100.0 * np.arange(256) / 255.0
    return Colormap("hot", _hot(np.interp(target, L, u)))
