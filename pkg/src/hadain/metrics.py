"""Full-reference image quality metrics and a patch-seam diagnostic."""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError
from .image_core import as_image, check_same_shape, moments

PSNR_CAP_DB = 99.0
_MSE_FLOOR = 1e-12

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

REC601 = np.array([0.299, 0.587, 0.114])
CHANNEL_NAMES = ("r", "g", "b")


def psnr(a, b, peak=1.0):
    """PSNR in dB; capped at 99 dB when the MSE is below 1e-12."""
    a, b = as_image(a), as_image(b)
    check_same_shape(a, b)
    d = a - b
    mse = float(np.mean(d * d))
    if mse < _MSE_FLOOR:
        return PSNR_CAP_DB
    return 10.0 * math.log10(peak * peak / mse)


def luminance(img):
    return np.tensordot(REC601, img, axes=(0, 0))


def gaussian_window_1d(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    k = np.arange(size) - (size - 1) / 2
    g = np.exp(-(k * k) / (2 * sigma * sigma))
    return g / g.sum()


def _filter_valid(plane, g):
    n = len(g)
    rows = sliding_window_view(plane, n, axis=0) @ g  # (H-n+1, W)
    return sliding_window_view(rows, n, axis=1) @ g


def ssim_map(a, b, peak=1.0):
    a, b = as_image(a), as_image(b)
    check_same_shape(a, b)
    _, H, W = a.shape
    if H < SSIM_WINDOW or W < SSIM_WINDOW:
        raise ShapeError(f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {H}x{W}")
    ya, yb = luminance(a), luminance(b)
    g = gaussian_window_1d()
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    mu_a = _filter_valid(ya, g)
    mu_b = _filter_valid(yb, g)
    var_a = _filter_valid(ya * ya, g) - mu_a * mu_a
    var_b = _filter_valid(yb * yb, g) - mu_b * mu_b
    cov = _filter_valid(ya * yb, g) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim(a, b, peak=1.0):
    """Mean SSIM on Rec.601 luminance, 11x11 Gaussian window (sigma 1.5), valid windows only."""
    return float(np.mean(ssim_map(a, b, peak)))


def stat_distance(a, b):
    """Per-channel |mean difference| and |population std difference|."""
    a, b = as_image(a), as_image(b)
    check_same_shape(a, b)
    mu_a, sd_a = moments(a)
    mu_b, sd_b = moments(b)
    return {
        name: {"dmu": float(abs(mu_a[i] - mu_b[i])), "dsigma": float(abs(sd_a[i] - sd_b[i]))}
        for i, name in enumerate(CHANNEL_NAMES)
    }


def max_stat_distance(dist):
    return max(max(v["dmu"], v["dsigma"]) for v in dist.values())


def boundary_positions(anchors, size, n):
    """Interior positions p (0 < p < n) where some patch starts or ends."""
    edges = set()
    for a in anchors:
        for p in (a, a + size):
            if 0 < p < n:
                edges.add(p)
    return sorted(edges)


def seam_score(img, grid):
    """Excess mean |first difference| across interior patch boundaries.

    Mean absolute difference over neighbour pairs (p-1, p) straddling a
    patch edge, minus the same mean over all other neighbour pairs, in both
    directions and all channels. Floored at 0. A grid without interior
    boundaries scores 0.
    """
    img = as_image(img)
    _, H, W = img.shape
    if (H, W) != (grid.height, grid.width):
        raise ShapeError(f"grid built for {grid.height}x{grid.width}, image is {H}x{W}")
    dv = np.abs(np.diff(img, axis=1))  # pair (i, i+1) at index i
    dh = np.abs(np.diff(img, axis=2))
    row_cross = np.zeros(H - 1, dtype=bool)
    col_cross = np.zeros(W - 1, dtype=bool)
    for p in boundary_positions(grid.rows, grid.patch_h, H):
        row_cross[p - 1] = True
    for p in boundary_positions(grid.cols, grid.patch_w, W):
        col_cross[p - 1] = True
    on = np.concatenate([dv[:, row_cross, :].ravel(), dh[:, :, col_cross].ravel()])
    off = np.concatenate([dv[:, ~row_cross, :].ravel(), dh[:, :, ~col_cross].ravel()])
    if on.size == 0:
        return 0.0
    off_mean = float(off.mean()) if off.size else 0.0
    return max(0.0, float(on.mean()) - off_mean)


def metric_report(a, b, grid=None):
    """JSON-ready report: psnr_db, ssim (None below 11x11), stat_distance, optional seam_score of ``a``."""
    a, b = as_image(a), as_image(b)
    check_same_shape(a, b)
    small = min(a.shape[1:]) < SSIM_WINDOW
    report = {
        "psnr_db": psnr(a, b),
        "ssim": None if small else ssim(a, b),
        "stat_distance": stat_distance(a, b),
    }
    if grid is not None:
        report["seam_score"] = seam_score(a, grid)
    return report
