"""Pixel-space adaptive instance normalization.

``content`` is the image being corrected, ``reference`` supplies the target
per-channel mean and standard deviation.
"""

import numpy as np

from .errors import ConfigError
from .image_core import as_image, check_same_shape, moments

DEFAULT_EPS = 1e-6


def adain_batch(content, reference, eps=DEFAULT_EPS):
    """AdaIN over stacked regions of shape (..., 3, h, w), statistics per (region, channel).

    Channels whose content std is below ``eps`` are replaced by the
    reference mean.
    """
    mu_c, sd_c = moments(content)
    mu_r, sd_r = moments(reference)
    degenerate = sd_c < eps
    gain = np.where(degenerate, 0.0, sd_r / np.where(degenerate, 1.0, sd_c))
    return mu_r[..., None, None] + gain[..., None, None] * (content - mu_c[..., None, None])


def adain(content, reference, eps=DEFAULT_EPS):
    """Match each channel's mean/std of ``content`` to ``reference``. No clamping."""
    if not eps > 0:
        raise ConfigError(f"eps must be > 0, got {eps}")
    content = as_image(content)
    reference = as_image(reference)
    check_same_shape(content, reference)
    return adain_batch(content[None], reference[None], eps)[0]
