"""Level-dependent overlapping patch geometry, patchify and depatchify."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, ShapeError


def _exact(x):
    # 0.7 should mean 7/10 here, not the nearest binary double; otherwise
    # ceil() can overshoot when H / denominator is an exact integer.
    return Fraction(repr(float(x)))


def patch_size(n, level, gamma):
    """ceil(n / (1 + (level - 1) * (1 - gamma)))"""
    return math.ceil(Fraction(n) / (1 + (level - 1) * (1 - _exact(gamma))))


def _axis_anchors(n, size, stride):
    anchors = list(range(0, n - size + 1, stride))
    if anchors[-1] != n - size:
        anchors.append(n - size)
    return anchors


def validate_gamma(gamma):
    if not (isinstance(gamma, (int, float)) and 0 <= gamma < 1):
        raise ConfigError(f"overlap ratio must lie in [0, 1), got {gamma!r}")


@dataclass(frozen=True)
class PatchGrid:
    height: int
    width: int
    level: int
    gamma: float
    patch_h: int
    patch_w: int
    stride_h: int
    stride_w: int
    rows: tuple
    cols: tuple

    @property
    def anchors(self):
        """Top-left (row, col) positions, row-major."""
        return [(r, c) for r in self.rows for c in self.cols]

    @property
    def n_patches(self):
        return len(self.rows) * len(self.cols)

    def summary(self):
        return {
            "level": self.level,
            "patch_h": self.patch_h,
            "patch_w": self.patch_w,
            "stride_h": self.stride_h,
            "stride_w": self.stride_w,
            "n_patches": self.n_patches,
        }

    def coverage(self):
        """Per-pixel count of patches covering it, shape (H, W)."""
        return np.outer(_axis_coverage(self.height, self.rows, self.patch_h),
                        _axis_coverage(self.width, self.cols, self.patch_w))


def _axis_coverage(n, anchors, size):
    cnt = np.zeros(n, dtype=np.int64)
    for a in anchors:
        cnt[a:a + size] += 1
    return cnt


def make_grid(height, width, level, gamma):
    if int(height) != height or int(width) != width or height < 1 or width < 1:
        raise ConfigError(f"image dimensions must be positive integers, got {height}x{width}")
    if int(level) != level or level < 1:
        raise ConfigError(f"level must be an integer >= 1, got {level!r}")
    validate_gamma(gamma)
    height, width, level = int(height), int(width), int(level)
    keep = 1 - _exact(gamma)
    ph = patch_size(height, level, gamma)
    pw = patch_size(width, level, gamma)
    sh = max(1, math.floor(ph * keep))
    sw = max(1, math.floor(pw * keep))
    return PatchGrid(
        height=height,
        width=width,
        level=level,
        gamma=float(gamma),
        patch_h=ph,
        patch_w=pw,
        stride_h=sh,
        stride_w=sw,
        rows=tuple(_axis_anchors(height, ph, sh)),
        cols=tuple(_axis_anchors(width, pw, sw)),
    )


def _check_grid(img, grid):
    if img.ndim != 3 or img.shape[1:] != (grid.height, grid.width):
        raise ShapeError(f"grid built for {grid.height}x{grid.width}, image has shape {img.shape}")


def patchify(img, grid):
    """Copy every grid patch out of ``img``. Returns (N_p, C, patch_h, patch_w) in anchor order."""
    img = np.asarray(img, dtype=np.float64)
    _check_grid(img, grid)
    windows = sliding_window_view(img, (grid.patch_h, grid.patch_w), axis=(1, 2))
    # (C, nr, nc, ph, pw)
    blocks = windows[:, np.asarray(grid.rows)[:, None], np.asarray(grid.cols)[None, :]]
    c = img.shape[0]
    return np.ascontiguousarray(blocks.transpose(1, 2, 0, 3, 4)).reshape(
        grid.n_patches, c, grid.patch_h, grid.patch_w
    )


def depatchify(patches, grid, height=None, width=None):
    """Reassemble patches, averaging overlaps with uniform weight.

    Overlaps are blended as a running mean updated in anchor order, so a
    pixel whose contributors all carry the same value gets that value back
    bit-exactly.
    """
    height = grid.height if height is None else height
    width = grid.width if width is None else width
    if (height, width) != (grid.height, grid.width):
        raise ShapeError(f"grid built for {grid.height}x{grid.width}, asked for {height}x{width}")
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim != 4 or patches.shape[0] != grid.n_patches or patches.shape[2:] != (grid.patch_h, grid.patch_w):
        raise ShapeError(
            f"expected {grid.n_patches} patches of {grid.patch_h}x{grid.patch_w}, got array {patches.shape}"
        )
    ph, pw = grid.patch_h, grid.patch_w
    out = np.zeros((patches.shape[1], height, width))
    cnt = np.zeros((height, width))
    for p, (r, c) in zip(patches, grid.anchors):
        n = cnt[r:r + ph, c:c + pw]
        n += 1.0
        view = out[:, r:r + ph, c:c + pw]
        view += (p - view) / n
    return out
