"""HF/LF fusion into color composites.

Three schemes share one layout: lightness carries acoustic intensity and
color carries which band a pixel is salient in.

``cfar-cielab``
    L* is the supremum of HF and the CFAR-salient part of LF; hue sweeps
    across the fourth quadrant of a*-b* with normalized LF saliency.
``surf-cielab``
    L* blends HF and LF with a weight from both SURF density maps; hue
    follows LF density.
``dual-colormap``
    L* is the supremum of HF and LF, looked up in a gray colormap or, where
    LF is CFAR-salient, a hot colormap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import color
from .image import ImagePair, as_gray, quantize
from .saliency import CfarParams, SurfParams, cfar_saliency, surf_density_saliency

__all__ = [
    "FusionConfig",
    "SCHEMES",
    "luminance_supremum",
    "hue_from_saliency",
    "nonlinear_mapper",
    "surf_luminance",
    "chroma_bounds",
    "cfar_cielab_lab",
    "surf_cielab_lab",
    "fuse_cfar_cielab",
    "fuse_surf_cielab",
    "fuse_dual_colormap",
    "fuse",
]


def nonlinear_mapper(s_hf, s_lf):
    """HF weight: 1 unless LF is salient and HF is not.

    ``w = 1 - s_lf * (1 - s_hf)``, so ``w(., 0) = 1``, ``w(1, .) = 1`` and
    ``w(0, 1) = 0``.
    """
    s_hf = np.asarray(s_hf, dtype=np.float64)
    s_lf = np.asarray(s_lf, dtype=np.float64)
    return 1.0 - s_lf * (1.0 - s_hf)


@dataclass(frozen=True)
class FusionConfig:
    """Tunables shared by the three schemes.

    Chroma bounds: when both ``c_a`` and ``c_b`` are given they are used
    as-is for every pixel.  Otherwise ``chroma_mode`` picks them from the
    fourth-quadrant gamut table, either per pixel at its own L*
    (``"table"``) or once at the image's median L* (``"median"``).
    """

    alpha_cfar_cielab: float = 0.0
    alpha_dual: float = 0.5
    boxcar_extent_m: float = 5.0
    c_a: float | None = None
    c_b: float | None = None
    chroma_mode: str = "table"
    hue_0: float = -np.pi / 2
    hue_1: float = 0.0
    gamut: str = "clip"
    surf: SurfParams = field(default_factory=SurfParams)
    resolution_m_per_px: float | None = None
    schlick_p: float = 5.0
    mapper: Callable = nonlinear_mapper

    def __post_init__(self):
        for name in ("hue_0", "hue_1"):
            h = getattr(self, name)
            if not -np.pi / 2 - 1e-12 <= h <= 1e-12:
                raise ValueError(f"{name} must lie in [-pi/2, 0], got {h}")
        if self.alpha_cfar_cielab < 0 or self.alpha_dual < 0:
            raise ValueError("alphas must be >= 0")
        for name in ("c_a", "c_b"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        if self.chroma_mode not in ("table", "median"):
            raise ValueError(f"chroma_mode must be 'table' or 'median', got {self.chroma_mode!r}")
        if self.gamut not in ("clip", "scale"):
            raise ValueError(f"gamut must be 'clip' or 'scale', got {self.gamut!r}")
        if self.resolution_m_per_px is not None and not self.resolution_m_per_px > 0:
            raise ValueError("resolution_m_per_px must be positive")
        if not self.schlick_p >= 1:
            raise ValueError("schlick_p must be >= 1")
        if not self.boxcar_extent_m > 0:
            raise ValueError("boxcar_extent_m must be positive")

    def resolution(self, pair: ImagePair) -> float:
        return self.resolution_m_per_px or pair.resolution_m_per_px


def luminance_supremum(a, b) -> np.ndarray:
    a, b = as_gray(a), as_gray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return np.maximum(a, b)


def hue_from_saliency(s, c_a, c_b, hue_0=-np.pi / 2, hue_1=0.0):
    """Map saliency in [0, 1] to ``(a*, b*)`` on the fourth-quadrant ellipse.

    With the default endpoints this is ``theta = pi/2 * (1 - s)``,
    ``a* = cos(theta) * C_a``, ``b* = -sin(theta) * C_b``.
    """
    s = np.asarray(s, dtype=np.float64)
    phi = hue_0 + s * (hue_1 - hue_0)
    return np.cos(phi) * c_a, np.sin(phi) * c_b


def surf_luminance(f_hf, f_lf, w):
    return f_hf * w + f_lf * (1.0 - w)


def chroma_bounds(L_star, cfg: FusionConfig):
    """``(C_a, C_b)`` for each pixel of an L* raster, per ``cfg``."""
    L_star = np.asarray(L_star, dtype=np.float64)
    if cfg.c_a is not None and cfg.c_b is not None:
        return np.full(L_star.shape, float(cfg.c_a)), np.full(L_star.shape, float(cfg.c_b))
    if cfg.chroma_mode == "median":
        c_a, c_b = color.fourth_quadrant_chroma(np.median(L_star))
        return np.full(L_star.shape, float(c_a)), np.full(L_star.shape, float(c_b))
    return color.fourth_quadrant_chroma(L_star)


def _lab_from(L_star, s_color, cfg: FusionConfig) -> np.ndarray:
    c_a, c_b = chroma_bounds(L_star, cfg)
    a, b = hue_from_saliency(s_color, c_a, c_b, cfg.hue_0, cfg.hue_1)
    return np.stack([L_star, a, b], axis=-1)


def _to_rgb(lab, cfg: FusionConfig) -> np.ndarray:
    if cfg.gamut == "scale":
        return color.lab_to_srgb_chroma_scaled(lab)
    return color.lab_to_srgb_clipped(lab)


def cfar_cielab_lab(pair: ImagePair, cfg: FusionConfig = FusionConfig()) -> np.ndarray:
    """Pre-conversion Lab raster of the CFAR-CIELAB scheme."""
    params = CfarParams(cfg.alpha_cfar_cielab, cfg.boxcar_extent_m)
    s_raw = cfar_saliency(pair.lf, params, cfg.resolution(pair))
    peak = s_raw.max()
    s = s_raw / peak if peak > 0 else np.zeros_like(s_raw)
    L_star = 100.0 * luminance_supremum(s_raw, pair.hf)
    return _lab_from(L_star, s, cfg)


def surf_cielab_lab(pair: ImagePair, cfg: FusionConfig = FusionConfig(), *, return_maps=False):
    """Pre-conversion Lab raster of the SURF-CIELAB scheme.

    With ``return_maps`` also returns ``(s_hf, s_lf, w)``.
    """
    res = cfg.resolution(pair)
    s_hf = surf_density_saliency(pair.hf, cfg.surf, res)
    s_lf = surf_density_saliency(pair.lf, cfg.surf, res)
    w = np.clip(cfg.mapper(s_hf, s_lf), 0.0, 1.0)
    L_star = 100.0 * surf_luminance(pair.hf, pair.lf, w)
    lab = _lab_from(L_star, s_lf, cfg)
    if return_maps:
        return lab, (s_hf, s_lf, w)
    return lab


def fuse_cfar_cielab(pair: ImagePair, cfg: FusionConfig = FusionConfig()) -> np.ndarray:
    return _to_rgb(cfar_cielab_lab(pair, cfg), cfg)


def fuse_surf_cielab(pair: ImagePair, cfg: FusionConfig = FusionConfig()) -> np.ndarray:
    return _to_rgb(surf_cielab_lab(pair, cfg), cfg)


def fuse_dual_colormap(pair: ImagePair, cfg: FusionConfig = FusionConfig(),
                       cmap_hf: color.Colormap | None = None,
                       cmap_lf: color.Colormap | None = None) -> np.ndarray:
    """Supremum intensity colored by the LF map where LF is CFAR-salient."""
    cmap_hf = cmap_hf or _default_colormaps()[0]
    cmap_lf = cmap_lf or _default_colormaps()[1]
    t = quantize(luminance_supremum(pair.hf, pair.lf))
    np.clip(t, 0, 255, out=t)
    params = CfarParams(cfg.alpha_dual, cfg.boxcar_extent_m)
    salient = cfar_saliency(pair.lf, params, cfg.resolution(pair)) > 0
    return np.where(salient[..., None], cmap_lf(t), cmap_hf(t))


@lru_cache(maxsize=1)
def _default_colormaps() -> tuple[color.Colormap, color.Colormap]:
    return color.make_linear_gray_colormap(), color.make_linear_hot_colormap()


SCHEMES: dict[str, Callable[[ImagePair, FusionConfig], np.ndarray]] = {
    "cfar-cielab": fuse_cfar_cielab,
    "surf-cielab": fuse_surf_cielab,
    "dual-colormap": fuse_dual_colormap,
}


def fuse(pair: ImagePair, scheme: str, cfg: FusionConfig = FusionConfig()) -> np.ndarray:
    try:
        fn = SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}") from None
    return fn(pair, cfg)
