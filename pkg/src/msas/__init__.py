"""Saliency-driven fusion of HF/LF sonar imagery into color composites."""

__version__ = "0.1.0"

from .color import (Colormap, lab_to_srgb_chroma_scaled, lab_to_srgb_clipped,
                    make_linear_gray_colormap, make_linear_hot_colormap,
                    max_chroma_fourth_quadrant, srgb_to_lab)
from .fusion import (SCHEMES, FusionConfig, fuse, fuse_cfar_cielab, fuse_dual_colormap,
                     fuse_surf_cielab, hue_from_saliency, luminance_supremum, nonlinear_mapper)
from .image import ImagePair, condition, drc_schlick, load_gray, normalize, save_rgb
from .metrics import MetricsReport, evaluate_pair, fused_to_perceptual_gray, mse, ncc, ssim_global
from .saliency import (CfarParams, SurfParams, boxcar_background, cfar_saliency, despeckle,
                       surf_density_saliency, surf_interest_points)
from .synth import GroundTruth, SceneSpec, generate_corpus, generate_scene
