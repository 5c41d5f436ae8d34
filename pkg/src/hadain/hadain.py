"""Hierarchical AdaIN: per-patch AdaIN from the finest level L down to the global level 1."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .adain import DEFAULT_EPS, adain_batch
from .errors import ConfigError
from .image_core import as_image, check_same_shape
from .patch_grid import depatchify, make_grid, patchify, validate_gamma

DEFAULT_LEVELS = 30
DEFAULT_OVERLAP = 0.7

# patches handed to one worker at a time
_CHUNK = 256


@dataclass(frozen=True)
class HAdaInConfig:
    levels: int = DEFAULT_LEVELS
    gamma: float = DEFAULT_OVERLAP
    eps: float = DEFAULT_EPS
    clamp_output: bool = True

    def __post_init__(self):
        if isinstance(self.levels, bool) or int(self.levels) != self.levels or self.levels < 1:
            raise ConfigError(f"levels must be an integer >= 1, got {self.levels!r}")
        validate_gamma(self.gamma)
        if not self.eps > 0:
            raise ConfigError(f"eps must be > 0, got {self.eps!r}")


def _correct_patches(y_patches, x_patches, eps, threads):
    n = len(y_patches)
    if threads <= 1 or n <= _CHUNK:
        return adain_batch(y_patches, x_patches, eps)
    bounds = [(i, min(i + _CHUNK, n)) for i in range(0, n, _CHUNK)]
    out = np.empty_like(y_patches)

    def work(span):
        i, j = span
        out[i:j] = adain_batch(y_patches[i:j], x_patches[i:j], eps)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, bounds))
    return out


def hadain_correct(reference, generated, cfg=None, threads=1, return_levels=False):
    """Correct the colors of ``generated`` so they follow ``reference``.

    At each level l = L..1 both images are cut into the level's overlapping
    patches; every patch of the running estimate is AdaIN-normalized to the
    matching patch of the original reference, then patches are blended
    back. The reference is never modified. With ``return_levels`` also
    returns the list of intermediate estimates (after levels L..1, unclamped).
    """
    cfg = cfg or HAdaInConfig()
    x = as_image(reference)
    y = as_image(generated)
    check_same_shape(x, y)
    _, H, W = x.shape
    est = y
    history = []
    for level in range(cfg.levels, 0, -1):
        grid = make_grid(H, W, level, cfg.gamma)
        corrected = _correct_patches(patchify(est, grid), patchify(x, grid), cfg.eps, threads)
        est = depatchify(corrected, grid, H, W)
        if return_levels:
            history.append(est)
    if cfg.clamp_output:
        est = np.clip(est, 0.0, 1.0)
    return (est, history) if return_levels else est


def hadain_describe(cfg, height, width):
    """Grid summaries for levels L..1 without touching pixels."""
    return [make_grid(height, width, level, cfg.gamma).summary() for level in range(cfg.levels, 0, -1)]


def total_patches(cfg, height, width):
    return sum(d["n_patches"] for d in hadain_describe(cfg, height, width))
