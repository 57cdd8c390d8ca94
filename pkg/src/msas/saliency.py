"""Per-pixel saliency maps.

Two metrics are provided:

* CFAR saliency: the image minus a boxcar estimate of its local background,
  thresholded so only pixels standing above the background survive.
* SURF density saliency: upright Fast-Hessian interest points detected on a
  despeckled image, accumulated as impulses and smoothed with a Gaussian.

Borders are handled by edge replication everywhere.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .image import as_gray

__all__ = [
    "CfarParams",
    "SurfParams",
    "Keypoint",
    "boxcar_window",
    "boxcar_background",
    "cfar_saliency",
    "despeckle",
    "integral_image",
    "hessian_responses",
    "surf_interest_points",
    "keypoint_density",
    "surf_density_saliency",
    "write_keypoints_csv",
]


@dataclass(frozen=True)
class CfarParams:
    alpha: float = 0.0
    boxcar_extent_m: float = 5.0

    def __post_init__(self):
        if not self.boxcar_extent_m > 0:
            raise ValueError(f"boxcar_extent_m must be positive, got {self.boxcar_extent_m}")


@dataclass(frozen=True)
class SurfParams:
    """Fast-Hessian detector and density-map settings.

    ``hessian_threshold`` applies to the area-normalized box-filter
    determinant on [0, 1] intensities.
    """

    hessian_threshold: float = 1e-3
    octave_filter_sizes: tuple[int, ...] = (9, 15, 21, 27)
    density_sigma_m: float = 1.0
    despeckle_window: int = 3

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.octave_filter_sizes)
        object.__setattr__(self, "octave_filter_sizes", sizes)
        if len(sizes) < 3:
            raise ValueError("need at least three filter sizes for scale-space maxima")
        if any(s % 2 == 0 or s % 3 != 0 for s in sizes):
            raise ValueError(f"filter sizes must be odd multiples of 3, got {sizes}")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"filter sizes must be increasing, got {sizes}")
        if not self.hessian_threshold > 0:
            raise ValueError("hessian_threshold must be positive")
        if not self.density_sigma_m > 0:
            raise ValueError("density_sigma_m must be positive")
        _check_odd_window(self.despeckle_window)


class Keypoint(NamedTuple):
    x: int
    y: int
    scale: float  # Gaussian-equivalent sigma in px, 1.2 * size / 9
    strength: float


def _check_odd_window(window: int) -> None:
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")


def boxcar_window(extent_m: float, res: float) -> int:
    """Odd window side (>= 3 px) covering ``extent_m`` at ``res`` m/px."""
    if not extent_m > 0 or not res > 0:
        raise ValueError(f"extent and resolution must be positive, got {extent_m}, {res}")
    w = int(round(extent_m / res))
    if w % 2 == 0:
        w += 1
    return max(w, 3)


def boxcar_background(f, extent_m: float, res: float) -> np.ndarray:
    """Local mean over a square window of side ``extent_m`` metres."""
    f = as_gray(f)
    w = boxcar_window(extent_m, res)
    limit = max(f.shape)
    if w > limit:
        clamped = limit if limit % 2 else limit - 1
        warnings.warn(f"boxcar window {w} px exceeds image {f.shape}; clamped to {clamped}")
        w = max(clamped, 1)
    return ndimage.uniform_filter(f, size=w, mode="nearest")


def cfar_saliency(f, params: CfarParams, res: float) -> np.ndarray:
    """Background-subtracted excess, zeroed wherever it does not exceed ``alpha``."""
    f = as_gray(f)
    excess = f - boxcar_background(f, params.boxcar_extent_m, res)
    return np.where(excess > params.alpha, excess, 0.0)


def despeckle(f, window: int = 3) -> np.ndarray:
    """Median filter with an odd square window."""
    _check_odd_window(window)
    return ndimage.median_filter(as_gray(f), size=window, mode="nearest")


def integral_image(f) -> np.ndarray:
    """Summed-area table with a leading zero row and column."""
    f = as_gray(f)
    ii = np.zeros((f.shape[0] + 1, f.shape[1] + 1))
    ii[1:, 1:] = f.cumsum(axis=0).cumsum(axis=1)
    return ii


class _BoxSummer:
    """Box sums around every pixel of the original image.

    Works on an edge-padded copy so boxes reaching past the border see
    replicated pixels.
    """

    def __init__(self, f: np.ndarray, pad: int):
        self.h, self.w = f.shape
        self.pad = pad
        self.ii = integral_image(np.pad(f, pad, mode="edge"))

    def __call__(self, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        # Inclusive offsets [r0, r1] x [c0, c1] relative to each pixel.
        p, h, w, ii = self.pad, self.h, self.w, self.ii
        top, bot = p + r0, p + r1 + 1
        lef, rig = p + c0, p + c1 + 1
        return (ii[bot:bot + h, rig:rig + w] - ii[top:top + h, rig:rig + w]
                - ii[bot:bot + h, lef:lef + w] + ii[top:top + h, lef:lef + w])


def hessian_responses(f, sizes=(9, 15, 21, 27)) -> np.ndarray:
    """Fast-Hessian determinant ``Dxx*Dyy - (0.9*Dxy)**2`` at each filter size.

    Returns an array of shape ``(len(sizes), H, W)``.  Each box response is
    divided by the filter area.
    """
    f = as_gray(f)
    box = _BoxSummer(f, max(sizes) // 2 + 1)
    out = np.empty((len(sizes),) + f.shape)
    for k, s in enumerate(sizes):
        lobe = s // 3
        half = s // 2
        across = lobe - 1  # lobes of dxx/dyy are 2*lobe - 1 wide
        mid = lobe // 2
        dyy = box(-half, half, -across, across) - 3.0 * box(-mid, mid, -across, across)
        dxx = box(-across, across, -half, half) - 3.0 * box(-across, across, -mid, mid)
        dxy = (box(-lobe, -1, -lobe, -1) + box(1, lobe, 1, lobe)
               - box(-lobe, -1, 1, lobe) - box(1, lobe, -lobe, -1))
        area = float(s * s)
        dxx /= area
        dyy /= area
        dxy /= area
        out[k] = dxx * dyy - (0.9 * dxy) ** 2
    return out


def surf_interest_points(f, params: SurfParams = SurfParams()) -> list[Keypoint]:
    """Upright SURF keypoints: 3x3x3 scale-space maxima of the Hessian determinant."""
    f = as_gray(f)
    sizes = params.octave_filter_sizes
    if min(f.shape) < sizes[0]:
        warnings.warn(f"image {f.shape} smaller than smallest filter {sizes[0]}; no keypoints")
        return []
    det = hessian_responses(f, sizes)
    peak = ndimage.maximum_filter(det, size=3, mode="nearest")
    is_max = (det == peak) & (det > params.hessian_threshold)
    is_max[0] = False
    is_max[-1] = False
    keypoints = []
    for k, y, x in zip(*np.nonzero(is_max)):
        keypoints.append(Keypoint(int(x), int(y), 1.2 * sizes[k] / 9.0, float(det[k, y, x])))
    keypoints.sort(key=lambda kp: (kp.y, kp.x, kp.scale))
    return keypoints


def keypoint_density(shape, keypoints, sigma_px: float) -> np.ndarray:
    """Gaussian-smoothed keypoint impulses scaled so the peak is 1 (zeros if none)."""
    impulses = np.zeros(shape)
    for kp in keypoints:
        impulses[kp.y, kp.x] += 1.0
    if not keypoints:
        return impulses
    density = ndimage.gaussian_filter(impulses, sigma=sigma_px, mode="nearest", truncate=3.0)
    return density / density.max()


def surf_density_saliency(f, params: SurfParams = SurfParams(), res: float = 1.0) -> np.ndarray:
    """Density of SURF keypoints found on the despeckled image, in [0, 1]."""
    f = as_gray(f)
    keypoints = surf_interest_points(despeckle(f, params.despeckle_window), params)
    return keypoint_density(f.shape, keypoints, params.density_sigma_m / res)


def write_keypoints_csv(keypoints, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(Keypoint._fields)
        for kp in keypoints:
            writer.writerow([kp.x, kp.y, f"{kp.scale:.4f}", f"{kp.strength:.8g}"])
