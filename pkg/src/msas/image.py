"""Raster conditioning and PNG I/O.

Gray images are plain 2-D ``float64`` arrays with values in [0, 1]; RGB
images are ``(H, W, 3)`` float arrays.  Everything here is a pure function
of its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "ImagePair",
    "as_gray",
    "load_gray",
    "normalize",
    "drc_schlick",
    "condition",
    "quantize",
    "save_rgb",
    "save_gray",
]

_SIXTEEN_BIT_MODES = ("I;16", "I;16B", "I;16L", "I")


def as_gray(img) -> np.ndarray:
    """Validate and return ``img`` as a 2-D float64 array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"gray image must be a non-empty 2-D array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ImagePair:
    """Co-registered HF/LF images of the same patch of seafloor."""

    hf: np.ndarray
    lf: np.ndarray
    resolution_m_per_px: float

    def __post_init__(self):
        hf = as_gray(self.hf)
        lf = as_gray(self.lf)
        if hf.shape != lf.shape:
            raise ValueError(f"HF/LF dimension mismatch: {hf.shape} vs {lf.shape}")
        if not self.resolution_m_per_px > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution_m_per_px}")
        object.__setattr__(self, "hf", hf)
        object.__setattr__(self, "lf", lf)

    @property
    def shape(self) -> tuple[int, int]:
        return self.hf.shape


def load_gray(path) -> np.ndarray:
    """Read an 8- or 16-bit single-channel PNG scaled to [0, 1]."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    with Image.open(path) as im:
        if im.format != "PNG":
            raise ValueError(f"{path}: expected PNG, got {im.format}")
        if im.mode == "L":
            scale = 255.0
        elif im.mode in _SIXTEEN_BIT_MODES:
            scale = 65535.0
        else:
            raise ValueError(f"{path}: expected single-channel 8/16-bit PNG, got mode {im.mode!r}")
        data = np.asarray(im, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"{path}: expected single-channel image, got shape {data.shape}")
    return data / scale


def normalize(img) -> np.ndarray:
    """Min-max rescale to [0, 1]; a constant image maps to all zeros."""
    arr = as_gray(img)
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def drc_schlick(img, p: float = 5.0) -> np.ndarray:
    """Schlick's rational tone map ``p*x / (p*x - x + 1)``.

    ``p = 1`` is the identity; larger ``p`` lifts dark values harder.
    Both endpoints 0 and 1 are fixed points for every ``p``.
    """
    if not p >= 1:
        raise ValueError(f"Schlick parameter p must be >= 1, got {p}")
    x = as_gray(img)
    return p * x / (p * x - x + 1.0)


def condition(img, p: float = 5.0) -> np.ndarray:
    """Input conditioning chain: normalize, then dynamic range compression."""
    return drc_schlick(normalize(img), p)


def quantize(values, levels: int = 255) -> np.ndarray:
    """Encode [0, 1] floats as integers with round-half-up."""
    v = np.asarray(values, dtype=np.float64)
    return np.floor(v * levels + 0.5).astype(np.int64)


def save_rgb(img, path) -> None:
    """Write an ``(H, W, 3)`` image with channels in [0, 1] as 8-bit RGB PNG."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"RGB image must have shape (H, W, 3), got {arr.shape}")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("RGB channels must lie in [0, 1]")
    Image.fromarray(quantize(arr).astype(np.uint8)).save(Path(path), format="PNG")


def save_gray(img, path, bits: int = 8) -> None:
    """Write a [0, 1] gray image as an 8- or 16-bit PNG."""
    arr = np.clip(as_gray(img), 0.0, 1.0)
    if bits == 8:
        out = Image.fromarray(quantize(arr).astype(np.uint8))
    elif bits == 16:
        out = Image.fromarray(quantize(arr, 65535).astype(np.uint16))
    else:
        raise ValueError(f"bits must be 8 or 16, got {bits}")
    out.save(Path(path), format="PNG")
