"""Planar RGB images, per-channel statistics and PPM/PNG file I/O.

An image is a float64 numpy array of shape ``(3, H, W)`` (channel, row,
column), samples nominally in [0, 1]. Quantization to 8 bits happens only
in :func:`save_image`.
"""

import os
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, ImageFormatError, ShapeError, UnsupportedFormatError

CHANNELS = 3


def as_image(data, copy=False):
    """Validate ``data`` as an image and return it as a float64 (3, H, W) array."""
    arr = np.array(data, dtype=np.float64, copy=copy) if copy else np.asarray(data, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] != CHANNELS:
        raise ShapeError(f"expected image of shape (3, H, W), got {arr.shape}")
    if arr.shape[1] < 1 or arr.shape[2] < 1:
        raise ShapeError(f"image must be at least 1x1, got {arr.shape[1]}x{arr.shape[2]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf samples")
    return arr


def from_hwc(arr):
    """Interleaved (H, W, 3) array -> planar image."""
    return as_image(np.transpose(np.asarray(arr, dtype=np.float64), (2, 0, 1)), copy=True)


def to_hwc(img):
    return np.ascontiguousarray(np.transpose(img, (1, 2, 0)))


def check_same_shape(a, b, what="images"):
    if a.shape != b.shape:
        raise ShapeError(f"{what} differ in shape: {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel mean and population standard deviation."""

    mu: np.ndarray
    sigma: np.ndarray


def moments(a):
    """Mean and population std over the last two axes of ``a``.

    Two passes (mean, then mean squared deviation). The spatial axes are
    flattened into one contiguous axis so every region is reduced in the
    same row-major order regardless of how many regions are batched.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    flat = a.reshape(a.shape[:-2] + (-1,))
    n = flat.shape[-1]
    mu = flat.sum(axis=-1) / n
    dev = flat - mu[..., None]
    var = (dev * dev).sum(axis=-1) / n
    return mu, np.sqrt(var)


def channel_stats(img, region=None):
    """Stats of ``img`` over ``region = (top, left, height, width)``; whole image if None."""
    img = as_image(img)
    _, H, W = img.shape
    if region is None:
        region = (0, 0, H, W)
    top, left, h, w = (int(v) for v in region)
    if h < 1 or w < 1:
        raise BoundsError(f"empty region {region}")
    if top < 0 or left < 0 or top + h > H or left + w > W:
        raise BoundsError(f"region {region} outside {H}x{W} image")
    mu, sigma = moments(img[:, top:top + h, left:left + w])
    return ChannelStats(mu=mu, sigma=sigma)


# ---------------------------------------------------------------- file I/O

def quantize(img):
    """round-half-up(clamp(s, 0, 1) * 255) as uint8, interleaved (H, W, 3)."""
    scaled = np.clip(img, 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8).transpose(1, 2, 0).copy()


def _infer_format(path, fmt):
    if fmt is not None:
        fmt = fmt.upper()
    else:
        ext = os.path.splitext(str(path))[1].lower()
        fmt = {".ppm": "PPM", ".png": "PNG"}.get(ext)
        if fmt is None:
            raise UnsupportedFormatError(f"cannot infer image format from extension of {path!r}")
    if fmt not in ("PPM", "PNG"):
        raise UnsupportedFormatError(f"unknown image format {fmt!r}")
    return fmt


def load_image(path, fmt=None):
    """Read an 8-bit RGB PPM (P6) or PNG file; samples map v -> v/255."""
    fmt = _infer_format(path, fmt)
    with open(path, "rb") as f:
        data = f.read()
    pixels = decode_ppm(data) if fmt == "PPM" else decode_png(data)
    return pixels.astype(np.float64).transpose(2, 0, 1) / 255.0


def save_image(img, path, fmt=None):
    fmt = _infer_format(path, fmt)
    img = as_image(img)
    pixels = quantize(img)
    data = encode_ppm(pixels) if fmt == "PPM" else encode_png(pixels)
    with open(path, "wb") as f:
        f.write(data)


# PPM P6

_WS = b" \t\n\r\x0b\x0c"


def encode_ppm(pixels):
    h, w, _ = pixels.shape
    return b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def decode_ppm(data):
    if data[:2] != b"P6":
        raise ImageFormatError("missing P6 magic", 0)
    pos = 2
    fields = []
    separated = False
    while len(fields) < 3:
        if pos >= len(data):
            raise ImageFormatError("truncated PPM header", pos)
        c = data[pos:pos + 1]
        if c in _WS:
            separated = True
            pos += 1
        elif c == b"#":
            while pos < len(data) and data[pos:pos + 1] not in b"\r\n":
                pos += 1
        else:
            if not separated:
                raise ImageFormatError("expected whitespace in PPM header", pos)
            separated = False
            start = pos
            while pos < len(data) and data[pos:pos + 1].isdigit():
                pos += 1
            if pos == start:
                raise ImageFormatError(f"unexpected byte {c!r} in PPM header", pos)
            fields.append((int(data[start:pos]), start))
    (w, _), (h, h_off), (maxval, mv_off) = fields
    if w < 1 or h < 1:
        raise ImageFormatError(f"bad PPM dimensions {w}x{h}", h_off)
    if maxval != 255:
        raise UnsupportedFormatError(f"PPM maxval {maxval} unsupported, only 8-bit (255)")
    if pos >= len(data) or data[pos:pos + 1] not in _WS:
        raise ImageFormatError("expected single whitespace after maxval", pos)
    pos += 1
    need = 3 * w * h
    if len(data) - pos < need:
        raise ImageFormatError(f"truncated PPM payload: need {need} bytes, have {len(data) - pos}", len(data))
    return np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(h, w, 3).copy()


# PNG

_PNG_SIG = b"\x89PNG\r\n\x1a\n"


def _chunk(kind, payload):
    body = kind + payload
    return struct.pack(">I", len(payload)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)


def encode_png(pixels):
    h, w, _ = pixels.shape
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    rows = np.concatenate([np.zeros((h, 1), np.uint8), pixels.reshape(h, w * 3)], axis=1)
    idat = zlib.compress(rows.tobytes(), 9)
    return _PNG_SIG + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def _unfilter(raw, h, w, offset):
    bpp = 3
    stride = w * bpp
    if len(raw) != h * (stride + 1):
        raise ImageFormatError(f"decompressed PNG data has {len(raw)} bytes, expected {h * (stride + 1)}", offset)
    out = np.zeros((h, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.int64)
    for y in range(h):
        base = y * (stride + 1)
        ftype = raw[base]
        line = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=base + 1).astype(np.int64)
        if ftype == 0:
            cur = line
        elif ftype == 1:
            cur = np.cumsum(line.reshape(w, bpp), axis=0).reshape(-1) % 256
        elif ftype == 2:
            cur = (line + prev) % 256
        elif ftype in (3, 4):
            cur = [0] * stride
            up = prev.tolist()
            ln = line.tolist()
            for i in range(stride):
                left = cur[i - bpp] if i >= bpp else 0
                if ftype == 3:
                    cur[i] = (ln[i] + ((left + up[i]) >> 1)) & 0xFF
                else:
                    ul = up[i - bpp] if i >= bpp else 0
                    cur[i] = (ln[i] + _paeth(left, up[i], ul)) & 0xFF
            cur = np.array(cur, dtype=np.int64)
        else:
            raise ImageFormatError(f"bad PNG filter type {ftype} on row {y}", offset)
        out[y] = cur
        prev = cur
    return out.reshape(h, w, 3)


def decode_png(data):
    if data[:8] != _PNG_SIG:
        raise ImageFormatError("missing PNG signature", 0)
    pos = 8
    header = None
    idat = []
    idat_offset = None
    while True:
        if pos + 8 > len(data):
            raise ImageFormatError("truncated PNG chunk header", pos)
        length, kind = struct.unpack(">I4s", data[pos:pos + 8])
        end = pos + 12 + length
        if end > len(data):
            raise ImageFormatError(f"truncated PNG chunk {kind!r}", pos)
        payload = data[pos + 8:pos + 8 + length]
        (crc,) = struct.unpack(">I", data[end - 4:end])
        if zlib.crc32(kind + payload) & 0xFFFFFFFF != crc:
            raise ImageFormatError(f"CRC mismatch in PNG chunk {kind!r}", pos)
        if kind == b"IHDR":
            if length != 13:
                raise ImageFormatError("bad IHDR length", pos)
            header = struct.unpack(">IIBBBBB", payload)
            w, h, depth, ctype, _, _, interlace = header
            if ctype in (4, 6):
                raise UnsupportedFormatError("PNG with alpha channel is not supported")
            if ctype != 2:
                raise UnsupportedFormatError(f"PNG color type {ctype} unsupported, need truecolor RGB")
            if depth != 8:
                raise UnsupportedFormatError(f"PNG bit depth {depth} unsupported, need 8")
            if interlace != 0:
                raise UnsupportedFormatError("interlaced PNG is not supported")
            if w < 1 or h < 1:
                raise ImageFormatError(f"bad PNG dimensions {w}x{h}", pos)
        elif kind == b"IDAT":
            if header is None:
                raise ImageFormatError("IDAT before IHDR", pos)
            if idat_offset is None:
                idat_offset = pos
            idat.append(payload)
        elif kind == b"IEND":
            break
        pos = end
    if header is None or not idat:
        raise ImageFormatError("PNG missing IHDR or IDAT", pos)
    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as exc:
        raise ImageFormatError(f"corrupt PNG image data: {exc}", idat_offset) from None
    w, h = header[0], header[1]
    return _unfilter(raw, h, w, idat_offset)
