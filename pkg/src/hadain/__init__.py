"""Hierarchical adaptive instance normalization (H-AdaIN) for spatially varying color correction."""

__version__ = "0.1.0"

from .adain import adain
from .errors import BoundsError, ConfigError, HAdaInError, ImageFormatError, ShapeError, UnsupportedFormatError
from .hadain import HAdaInConfig, hadain_correct, hadain_describe
from .image_core import ChannelStats, as_image, channel_stats, load_image, save_image
from .metrics import psnr, seam_score, ssim, stat_distance
from .patch_grid import PatchGrid, depatchify, make_grid, patchify
from .shift_sim import RetouchLabel, ShiftSpec, apply_shift, random_spec
