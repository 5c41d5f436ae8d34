"""Synthetic, spatially varying color shifts with known ground truth.

Shifts are per-channel affine maps ``out = a * img + b`` whose gain and bias
are constant (``global_affine``), piecewise constant over a block grid
(``block_affine``) or bilinearly interpolated from a coarse lattice
(``smooth_field``).

All randomness comes from numpy's PCG64 bit generator seeded with the
integer seed, so a (kind, seed, magnitude, dims) tuple always produces the
same spec. Draw order for ``random_spec``: gains, then biases, each as one
``Generator.uniform`` call over the parameter array in C order.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .image_core import as_image

KINDS = ("global_affine", "block_affine", "smooth_field")
KIND_ALIASES = {"global": "global_affine", "block": "block_affine", "smooth": "smooth_field"}

DEFAULT_BLOCK_GRID = (5, 5)
DEFAULT_LATTICE = (4, 4)


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


def canonical_kind(kind):
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ConfigError(f"unknown shift kind {kind!r}; expected one of {KINDS} or {tuple(KIND_ALIASES)}")
    return kind


@dataclass(frozen=True)
class RetouchLabel:
    """Retouching degrees (eye enlarging, face lifting, smoothing), each 0..3. Metadata only."""

    eye_enlarging: int = 0
    face_lifting: int = 0
    smoothing: int = 0

    def __post_init__(self):
        for name in ("eye_enlarging", "face_lifting", "smoothing"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v <= 3:
                raise ConfigError(f"retouch label {name} must be an integer in 0..3, got {v!r}")

    @classmethod
    def from_list(cls, values):
        values = list(values)
        if len(values) != 3:
            raise ConfigError(f"retouch label needs exactly 3 components, got {values!r}")
        return cls(*values)

    def to_list(self):
        return [self.eye_enlarging, self.face_lifting, self.smoothing]


@dataclass(frozen=True, eq=False)
class ShiftSpec:
    """Gains/biases have shape (3,) for global_affine, else (3, rows, cols)."""

    kind: str
    gains: np.ndarray
    biases: np.ndarray
    seed: int = 0
    magnitude: float = 0.0
    label: RetouchLabel = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        gains = np.asarray(self.gains, dtype=np.float64)
        biases = np.asarray(self.biases, dtype=np.float64)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "biases", biases)
        if gains.shape != biases.shape:
            raise ConfigError(f"gain shape {gains.shape} != bias shape {biases.shape}")
        if self.kind == "global_affine":
            if gains.shape != (3,):
                raise ConfigError(f"global_affine needs 3 gains, got shape {gains.shape}")
        else:
            if gains.ndim != 3 or gains.shape[0] != 3:
                raise ConfigError(f"{self.kind} needs gains of shape (3, rows, cols), got {gains.shape}")
            least = 1 if self.kind == "block_affine" else 2
            if min(gains.shape[1:]) < least:
                raise ConfigError(f"{self.kind} grid must be at least {least}x{least}, got {gains.shape[1:]}")
        if not np.all(np.isfinite(gains)) or not np.all(np.isfinite(biases)):
            raise ConfigError("shift parameters must be finite")
        if np.any(gains <= 0):
            raise ConfigError("all shift gains must be strictly positive")

    @property
    def grid(self):
        return None if self.kind == "global_affine" else list(self.gains.shape[1:])

    def __eq__(self, other):
        if not isinstance(other, ShiftSpec):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.gains, other.gains)
            and np.array_equal(self.biases, other.biases)
            and self.seed == other.seed
            and self.magnitude == other.magnitude
            and self.label == other.label
        )

    def to_dict(self):
        d = {
            "kind": self.kind,
            "gains": self.gains.tolist(),
            "biases": self.biases.tolist(),
            "grid": self.grid,
            "seed": int(self.seed),
            "magnitude": float(self.magnitude),
        }
        if self.label is not None:
            d["label"] = self.label.to_list()
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            label = d.get("label")
            return cls(
                kind=d["kind"],
                gains=d["gains"],
                biases=d["biases"],
                seed=int(d.get("seed", 0)),
                magnitude=float(d.get("magnitude", 0.0)),
                label=None if label is None else RetouchLabel.from_list(label),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed shift spec: {exc!r}") from None

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))


def identity_spec(kind="global_affine", grid=None):
    kind = canonical_kind(kind)
    if kind == "global_affine":
        shape = (3,)
    else:
        grid = grid or (DEFAULT_BLOCK_GRID if kind == "block_affine" else DEFAULT_LATTICE)
        shape = (3,) + tuple(grid)
    return ShiftSpec(kind, np.ones(shape), np.zeros(shape))


def random_spec(kind, height, width, seed, magnitude, grid=None):
    """Draw gains from 1 +- magnitude/2 and biases from +-0.2*magnitude.

    ``height``/``width`` only bound the block grid (a grid can't have more
    blocks than pixels); the lattice of a smooth field is resolution free.
    """
    kind = canonical_kind(kind)
    if not (isinstance(magnitude, (int, float)) and 0 < magnitude <= 1):
        raise ConfigError(f"magnitude must lie in (0, 1], got {magnitude!r}")
    if height < 1 or width < 1:
        raise ConfigError(f"bad image dimensions {height}x{width}")
    if kind == "global_affine":
        shape = (3,)
    else:
        rows, cols = grid or (DEFAULT_BLOCK_GRID if kind == "block_affine" else DEFAULT_LATTICE)
        if kind == "block_affine":
            rows, cols = min(rows, height), min(cols, width)
        shape = (3, rows, cols)
    rng = rng_for(seed)
    gains = rng.uniform(1 - 0.5 * magnitude, 1 + 0.5 * magnitude, size=shape)
    biases = rng.uniform(-0.2 * magnitude, 0.2 * magnitude, size=shape)
    return ShiftSpec(kind, gains, biases, seed=int(seed), magnitude=float(magnitude))


def block_index(n, blocks):
    """Block id of each of ``n`` pixel positions: floor(i * blocks / n)."""
    return (np.arange(n) * blocks) // n


def _bilinear(lattice, height, width):
    # lattice (C, gh, gw) with corner nodes pinned to the image corners
    _, gh, gw = lattice.shape
    u = np.arange(height) * ((gh - 1) / (height - 1)) if height > 1 else np.zeros(1)
    v = np.arange(width) * ((gw - 1) / (width - 1)) if width > 1 else np.zeros(1)
    i0 = np.minimum(np.floor(u).astype(int), gh - 2)
    j0 = np.minimum(np.floor(v).astype(int), gw - 2)
    fu = (u - i0)[:, None]
    fv = (v - j0)[None, :]
    a = lattice[:, i0][:, :, j0]
    b = lattice[:, i0][:, :, j0 + 1]
    c = lattice[:, i0 + 1][:, :, j0]
    d = lattice[:, i0 + 1][:, :, j0 + 1]
    # lerp as p + f * (q - p): exact on constant lattices
    top = a + fv * (b - a)
    bottom = c + fv * (d - c)
    return top + fu * (bottom - top)


def shift_fields(spec, height, width):
    """Per-pixel gain and bias arrays, each of shape (3, H, W)."""
    if spec.kind == "global_affine":
        shape = (3, height, width)
        return (np.broadcast_to(spec.gains[:, None, None], shape),
                np.broadcast_to(spec.biases[:, None, None], shape))
    if spec.kind == "block_affine":
        _, rows, cols = spec.gains.shape
        if rows > height or cols > width:
            raise ConfigError(f"{rows}x{cols} block grid does not fit a {height}x{width} image")
        ri = block_index(height, rows)[:, None]
        ci = block_index(width, cols)[None, :]
        return spec.gains[:, ri, ci], spec.biases[:, ri, ci]
    return _bilinear(spec.gains, height, width), _bilinear(spec.biases, height, width)


def apply_shift(img, spec):
    """out = gain * img + bias per pixel and channel. Not clamped."""
    img = as_image(img)
    gain, bias = shift_fields(spec, *img.shape[1:])
    return gain * img + bias


def invert_shift(shifted, spec):
    shifted = as_image(shifted)
    gain, bias = shift_fields(spec, *shifted.shape[1:])
    return (shifted - bias) / gain


def block_boundaries(n, blocks):
    """Pixel positions p where block_index changes between p-1 and p."""
    idx = block_index(n, blocks)
    return [int(p) for p in np.nonzero(np.diff(idx))[0] + 1]


def fixture_image(seed, height=256, width=256):
    """Deterministic textured test image in [0, 1].

    Smooth color gradients, a few soft ellipses, sinusoidal texture and mild
    noise, so every small patch has non-zero variance in all channels.
    """
    rng = rng_for(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    yy = yy / max(height - 1, 1)
    xx = xx / max(width - 1, 1)
    img = np.empty((3, height, width))
    for c in range(3):
        a, b, base = rng.uniform(-0.3, 0.3, size=3)
        img[c] = 0.5 + base * 0.5 + a * (xx - 0.5) + b * (yy - 0.5)
    for _ in range(4):
        cy, cx = rng.uniform(0.1, 0.9, size=2)
        ry, rx = rng.uniform(0.05, 0.3, size=2)
        color = rng.uniform(-0.3, 0.3, size=3)
        blob = np.exp(-(((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2))
        img += color[:, None, None] * blob
    for _ in range(3):
        fy, fx = rng.uniform(2, 24, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(0.02, 0.06, size=3)
        img += amp[:, None, None] * np.sin(2 * np.pi * (fy * yy + fx * xx) + phase)
    img += rng.normal(0, 0.02, size=img.shape)
    return np.clip(img, 0.0, 1.0)
