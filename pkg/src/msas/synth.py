"""Seeded synthetic HF/LF seafloor scenes with ground-truth masks.

Rendering recipe (all randomness from ``numpy.random.default_rng``):

1. Reflectivity shared by both bands: a sinusoidal ripple field with a
   smooth random phase warp, times a gentle large-scale brightness drift.
2. HF adds fine texture and proud rocks: small bright discs ("glints")
   with an acoustic shadow trailing in +x.  Rock discs form ``hf_detail_mask``.
3. LF adds buried targets: smooth bright blobs invisible to HF.  Their
   discs form ``lf_saliency_mask``.  Rocks show up only weakly in LF.
4. HF gets full-resolution gamma speckle.  LF is blurred, block-averaged
   to a 4x coarser grid, speckled there and bilinearly upsampled back.
5. Each band is min-max normalized and tone mapped with Schlick's
   operator, matching how real inputs are conditioned.

``SceneSpec`` fields left as ``None`` are drawn from ``RANGES`` using the
scene seed, so a corpus is just one template run over consecutive seeds.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import ndimage

from .image import ImagePair, condition

__all__ = ["SceneSpec", "GroundTruth", "RANGES", "resolve_spec", "generate_scene", "generate_corpus"]

LF_DECIMATION = 4
# Display-chain highlight saturation, in multiples of the band median.
HIGHLIGHT_CLIP = 10.0

# Inclusive ranges for fields a SceneSpec leaves unset.
RANGES = {
    "ripple_wavelength_m": (1.0, 2.5),
    "ripple_amplitude": (0.2, 0.5),
    "ripple_orientation_rad": (0.0, np.pi),
    "n_rocks": (5, 30),
    "n_buried": (1, 4),
    "speckle_looks": (3, 6),
}
_ROCK_RADIUS_M = (0.1, 0.3)
_ROCK_GAIN = (2.5, 5.0)
_ROCK_GAIN_LF = 1.2
_BURIED_RADIUS_M = (0.5, 1.0)
_BURIED_GAIN = (6.0, 10.0)


@dataclass(frozen=True)
class SceneSpec:
    seed: int = 0
    size: int = 512
    resolution_m_per_px: float = 0.1
    ripple_wavelength_m: float | None = None
    ripple_amplitude: float | None = None
    ripple_orientation_rad: float | None = None
    n_rocks: int | None = None
    n_buried: int | None = None
    speckle_looks: int | None = None
    schlick_p: float = 5.0

    def __post_init__(self):
        if self.size < 64:
            raise ValueError(f"scene size must be >= 64 px, got {self.size}")
        if self.size % LF_DECIMATION:
            raise ValueError(f"scene size must be a multiple of {LF_DECIMATION}")
        if not self.resolution_m_per_px > 0:
            raise ValueError("resolution_m_per_px must be positive")
        for name in ("n_rocks", "n_buried"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        if self.speckle_looks is not None and self.speckle_looks < 1:
            raise ValueError("speckle_looks must be >= 1")
        if self.ripple_wavelength_m is not None and not self.ripple_wavelength_m > 0:
            raise ValueError("ripple_wavelength_m must be positive")
        if self.ripple_amplitude is not None and not 0 <= self.ripple_amplitude < 1:
            raise ValueError("ripple_amplitude must lie in [0, 1)")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GroundTruth:
    lf_saliency_mask: np.ndarray
    hf_detail_mask: np.ndarray


def resolve_spec(spec: SceneSpec) -> SceneSpec:
    """Fill unset fields from ``RANGES`` with the scene's own seed."""
    rng = np.random.default_rng([spec.seed, 0])
    drawn = {}
    for name, (lo, hi) in RANGES.items():
        # Always draw so each field's value is independent of the others being set.
        if isinstance(lo, int):
            value = int(rng.integers(lo, hi + 1))
        else:
            value = float(rng.uniform(lo, hi))
        if getattr(spec, name) is None:
            drawn[name] = value
    return replace(spec, **drawn)


def _smooth_noise(rng, shape, sigma_px):
    field = ndimage.gaussian_filter(rng.standard_normal(shape), sigma_px, mode="wrap")
    return field / (field.std() or 1.0)


def _place_discs(rng, n, radius_range_px, size, margin_px, avoid, gap_px):
    """Random non-overlapping discs; ``avoid`` is a list of (y, x, r) to keep clear of."""
    placed = []
    for _ in range(n):
        for _attempt in range(1000):
            r = rng.uniform(*radius_range_px)
            lo = margin_px + r
            y, x = rng.uniform(lo, size - 1 - lo, size=2)
            if all(np.hypot(y - cy, x - cx) > r + cr + gap_px for cy, cx, cr in placed + avoid):
                placed.append((y, x, r))
                break
        else:
            raise ValueError(f"could not place {n} non-overlapping discs in a {size} px scene")
    return placed


def _speckle(rng, shape, looks):
    return rng.gamma(shape=looks, scale=1.0 / looks, size=shape)


def generate_scene(spec: SceneSpec) -> tuple[ImagePair, GroundTruth]:
    spec = resolve_spec(spec)
    rng = np.random.default_rng([spec.seed, 1])
    n, res = spec.size, spec.resolution_m_per_px
    yy, xx = np.mgrid[0:n, 0:n].astype(np.float64)

    phase_warp = 1.5 * _smooth_noise(rng, (n, n), n / 8)
    drift = 1.0 + 0.15 * _smooth_noise(rng, (n, n), n / 6)
    along = (xx * np.cos(spec.ripple_orientation_rad) + yy * np.sin(spec.ripple_orientation_rad)) * res
    ripple = 1.0 + spec.ripple_amplitude * np.sin(2 * np.pi * along / spec.ripple_wavelength_m + phase_warp)
    base = np.clip(ripple * drift, 0.05, None)

    buried = _place_discs(rng, spec.n_buried, np.array(_BURIED_RADIUS_M) / res, n,
                          margin_px=8, avoid=[], gap_px=4)
    rocks = _place_discs(rng, spec.n_rocks, np.array(_ROCK_RADIUS_M) / res, n,
                         margin_px=2, avoid=buried, gap_px=2)

    hf_refl = base * (1.0 + 0.15 * _smooth_noise(rng, (n, n), 1.0))
    lf_refl = base.copy()
    lf_mask = np.zeros((n, n), dtype=bool)
    hf_mask = np.zeros((n, n), dtype=bool)
    for y, x, r in rocks:
        d = np.hypot(yy - y, xx - x)
        disc = d <= r
        gain = rng.uniform(*_ROCK_GAIN)
        shadow = (np.abs(yy - y) <= r) & (xx > x + r) & (xx <= x + r + 3 * r)
        hf_refl[shadow & ~hf_mask] *= 0.2
        hf_refl[disc] = base[disc] * gain
        lf_refl[disc] *= _ROCK_GAIN_LF
        hf_mask |= disc
    for y, x, r in buried:
        d = np.hypot(yy - y, xx - x)
        gain = rng.uniform(*_BURIED_GAIN)
        lf_refl += (gain - 1.0) * base * np.exp(-((d / (1.25 * r)) ** 6))
        lf_mask |= d <= r

    hf_raw = hf_refl * _speckle(rng, (n, n), spec.speckle_looks)

    k = LF_DECIMATION
    lf_coarse = ndimage.gaussian_filter(lf_refl, k / 2, mode="nearest")
    lf_coarse = lf_coarse.reshape(n // k, k, n // k, k).mean(axis=(1, 3))
    lf_coarse *= _speckle(rng, lf_coarse.shape, spec.speckle_looks)
    lf_raw = ndimage.zoom(lf_coarse, k, order=1, mode="nearest", grid_mode=True)

    hf_raw = np.minimum(hf_raw, HIGHLIGHT_CLIP * np.median(hf_raw))
    lf_raw = np.minimum(lf_raw, HIGHLIGHT_CLIP * np.median(lf_raw))
    pair = ImagePair(condition(hf_raw, spec.schlick_p), condition(lf_raw, spec.schlick_p), res)
    return pair, GroundTruth(lf_saliency_mask=lf_mask, hf_detail_mask=hf_mask)


def generate_corpus(n: int, base_seed: int = 0, spec_template: SceneSpec = SceneSpec()):
    """``n`` scenes from ``spec_template`` with seeds ``base_seed .. base_seed + n - 1``."""
    if n < 1:
        raise ValueError(f"corpus size must be >= 1, got {n}")
    return [generate_scene(replace(spec_template, seed=base_seed + i)) for i in range(n)]
