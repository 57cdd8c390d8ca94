"""Similarity between a fused image and its source bands.

The fused image is reduced to its CIELAB lightness (scaled to [0, 1]) and
compared against HF and LF with NCC, MSE and a global SSIM.  The HF-vs-LF
value of each metric is reported as the baseline.  All moments are
population moments (divide by N).
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import asdict, dataclass, fields

import numpy as np

from .color import srgb_to_lab
from .image import ImagePair, as_gray

__all__ = [
    "C1",
    "C2",
    "MetricsReport",
    "REPORT_COLUMNS",
    "fused_to_perceptual_gray",
    "ncc",
    "mse",
    "ssim_global",
    "evaluate_pair",
    "write_report_csv",
]

C1 = 0.01**2
C2 = 0.03**2


def _pair(f, g):
    f, g = as_gray(f), as_gray(g)
    if f.shape != g.shape:
        raise ValueError(f"dimension mismatch: {f.shape} vs {g.shape}")
    return f, g


def fused_to_perceptual_gray(img) -> np.ndarray:
    """CIELAB L* of an sRGB image, divided by 100."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got {img.shape}")
    return srgb_to_lab(img)[..., 0] / 100.0


def ncc(f, g) -> float:
    """Normalized cross correlation; 0 (with a warning) if either input is constant."""
    f, g = _pair(f, g)
    df, dg = f - f.mean(), g - g.mean()
    sf, sg = np.sqrt(np.mean(df * df)), np.sqrt(np.mean(dg * dg))
    if sf == 0 or sg == 0:
        warnings.warn("NCC of a constant image is undefined; reporting 0")
        return 0.0
    return float(np.clip(np.mean(df * dg) / (sf * sg), -1.0, 1.0))


def mse(f, g) -> float:
    f, g = _pair(f, g)
    return float(np.mean((g - f) ** 2))


def ssim_global(f, g, c1: float = C1, c2: float = C2) -> float:
    """Single-window SSIM from whole-image means, variances and covariance."""
    f, g = _pair(f, g)
    mu_f, mu_g = f.mean(), g.mean()
    df, dg = f - mu_f, g - mu_g
    var_f, var_g = np.mean(df * df), np.mean(dg * dg)
    cov = np.mean(df * dg)
    num = (2 * mu_f * mu_g + c1) * (2 * cov + c2)
    den = (mu_f**2 + mu_g**2 + c1) * (var_f + var_g + c2)
    return float(num / den)


@dataclass(frozen=True)
class MetricsReport:
    ssim_hf: float
    ssim_lf: float
    ncc_hf: float
    ncc_lf: float
    mse_hf: float
    mse_lf: float
    baseline_ssim: float
    baseline_ncc: float
    baseline_mse: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


METRIC_FIELDS = tuple(f.name for f in fields(MetricsReport))
REPORT_COLUMNS = ("pair_id", "scheme") + METRIC_FIELDS


def evaluate_pair(pair: ImagePair, fused) -> MetricsReport:
    gray = fused_to_perceptual_gray(fused)
    if gray.shape != pair.shape:
        raise ValueError(f"fused image {gray.shape} does not match pair {pair.shape}")
    hf, lf = pair.hf, pair.lf
    return MetricsReport(
        ssim_hf=ssim_global(gray, hf),
        ssim_lf=ssim_global(gray, lf),
        ncc_hf=ncc(gray, hf),
        ncc_lf=ncc(gray, lf),
        mse_hf=mse(gray, hf),
        mse_lf=mse(gray, lf),
        baseline_ssim=ssim_global(hf, lf),
        baseline_ncc=ncc(hf, lf),
        baseline_mse=mse(hf, lf),
    )


def format_value(v: float) -> str:
    return f"{v:.10f}"


def write_report_csv(rows, path, summary: bool = True) -> None:
    """Write ``(pair_id, scheme, MetricsReport)`` rows, then per-scheme means.

    Summary rows carry ``pair_id = "mean"``.
    """
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for pair_id, scheme, report in rows:
            writer.writerow([pair_id, scheme] + [format_value(getattr(report, k)) for k in METRIC_FIELDS])
        if not summary:
            return
        for scheme in dict.fromkeys(s for _, s, _ in rows):
            reports = [r for _, s, r in rows if s == scheme]
            means = [float(np.mean([getattr(r, k) for r in reports])) for k in METRIC_FIELDS]
            writer.writerow(["mean", scheme] + [format_value(m) for m in means])
