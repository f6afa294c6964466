"""Image normalization chain: grayscale, common-size resize, CLAHE, [-1,1] scaling.

All operations are pure: same input, bit-identical output. Stage ranges are
8-bit [0,255] up to and including `equalize_adaptive`, [-1,1] after
`normalize`. Grayscale images are plain 2-D float64 arrays.
"""

from dataclasses import dataclass

import numpy as np

from . import accel
from .errors import InvalidImage

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class RawImage:
    """Decoded 8-bit image, row-major; (h, w) gray or (h, w, 3) RGB."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if not isinstance(d, np.ndarray) or d.dtype != np.uint8:
            raise InvalidImage("raw image data must be a uint8 ndarray")
        if d.ndim == 2:
            pass
        elif d.ndim == 3 and d.shape[2] == 3:
            pass
        elif d.ndim == 3:
            raise InvalidImage(f"unsupported channel count: {d.shape[2]}")
        else:
            raise InvalidImage(f"unsupported array rank: {d.ndim}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise InvalidImage("image must be at least 1x1")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return 1 if self.data.ndim == 2 else self.data.shape[2]


@dataclass(frozen=True)
class AheParams:
    """Adaptive histogram equalization controls.

    clip_limit is a fraction of each tile's pixel count (0 < c <= 1);
    c = 1 disables clipping.
    """

    tiles_x: int = 8
    tiles_y: int = 8
    clip_limit: float = 0.01
    bins: int = 256

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tile counts must be >= 1")
        if not 0.0 < self.clip_limit <= 1.0:
            raise ValueError("clip_limit must be in (0, 1]")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")


def to_grayscale(img: RawImage) -> RawImage:
    """Collapse RGB to luma round(0.299 R + 0.587 G + 0.114 B); gray passes through."""
    if img.channels == 1:
        return img
    if img.channels != 3:
        raise InvalidImage(f"unsupported channel count: {img.channels}")
    rgb = img.data.astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    luma = np.round(wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2])
    return RawImage(np.clip(luma, 0.0, 255.0).astype(np.uint8))


def resize(img, side: int) -> np.ndarray:
    """Resize a single-channel image to side x side via bilinear interpolation.

    Accepts a gray RawImage or a 2-D array; returns float64. Source
    coordinates are origin-aligned: src = dst * (src_size / side), with
    clamped bottom/right neighbors, so side == src_size is the identity.
    The pipeline config enforces the common-size minimum; the operation
    itself only needs side >= 1.
    """
    if side < 1:
        raise ValueError("target side must be >= 1")
    if isinstance(img, RawImage):
        if img.channels != 1:
            raise InvalidImage("resize expects a single-channel image")
        data = img.data
    else:
        data = np.asarray(img)
        if data.ndim != 2:
            raise InvalidImage("resize expects a 2-D array")
    return accel.resize_bilinear(data.astype(np.float64), side, side)


def _tile_edges(n, tiles):
    return np.round(np.arange(tiles + 1, dtype=np.float64) * n / tiles).astype(np.int64)


def _axis_blend(n, centers):
    """Per-pixel neighbor tile indices and bilinear weight along one axis."""
    t = len(centers)
    pos = np.arange(n, dtype=np.float64)
    k = np.searchsorted(centers, pos, side="right")
    t0 = np.clip(k - 1, 0, t - 1)
    t1 = np.clip(k, 0, t - 1)
    span = centers[t1] - centers[t0]
    safe = np.where(span > 0, span, 1.0)
    w = np.where(span > 0, (pos - centers[t0]) / safe, 0.0)
    return t0, t1, w


def equalize_adaptive(img: np.ndarray, p: AheParams = AheParams()) -> np.ndarray:
    """Contrast-limited AHE with bilinear blending of per-tile mappings.

    Each tile's histogram is clipped at clip_limit * tile_pixels, the excess
    mass is spread uniformly over all bins, and the resulting CDF maps the
    tile to [0, 255]. Single-intensity tiles map to the identity, so constant
    images pass through unchanged.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidImage("equalize_adaptive expects a 2-D array")
    h, w = img.shape
    tiles_y = min(p.tiles_y, h)
    tiles_x = min(p.tiles_x, w)
    bins = p.bins

    bins_idx = np.clip((img * (bins / 256.0)).astype(np.int64), 0, bins - 1)
    ye = _tile_edges(h, tiles_y)
    xe = _tile_edges(w, tiles_x)

    lut = np.zeros((tiles_y, tiles_x, bins), dtype=np.float64)
    ident = np.zeros((tiles_y, tiles_x), dtype=np.bool_)
    for ty in range(tiles_y):
        for tx in range(tiles_x):
            sub = img[ye[ty] : ye[ty + 1], xe[tx] : xe[tx + 1]]
            if sub.min() == sub.max():
                ident[ty, tx] = True
                continue
            sub_bins = bins_idx[ye[ty] : ye[ty + 1], xe[tx] : xe[tx + 1]]
            hist = np.bincount(sub_bins.ravel(), minlength=bins).astype(np.float64)
            npix = float(sub.size)
            limit = p.clip_limit * npix
            excess = np.maximum(hist - limit, 0.0).sum()
            if excess > 0.0:
                hist = np.minimum(hist, limit) + excess / bins
            lut[ty, tx] = np.minimum(np.cumsum(hist) / npix * 255.0, 255.0)

    cy = (ye[:-1] + ye[1:] - 1) / 2.0
    cx = (xe[:-1] + xe[1:] - 1) / 2.0
    ty0, ty1, wy = _axis_blend(h, cy)
    tx0, tx1, wx = _axis_blend(w, cx)
    return accel.clahe_blend(img, bins_idx, lut, ident, ty0, ty1, wy, tx0, tx1, wx)


def normalize(img: np.ndarray) -> np.ndarray:
    """Affine min-max map onto [-1, 1]; a constant image maps to all zeros."""
    img = np.asarray(img, dtype=np.float64)
    lo = img.min()
    hi = img.max()
    if hi == lo:
        return np.zeros_like(img)
    return 2.0 * (img - lo) / (hi - lo) - 1.0


def preprocess_image(img: RawImage, side: int, ahe: AheParams = AheParams()) -> np.ndarray:
    """Full chain: grayscale -> resize -> adaptive equalization -> [-1,1]."""
    gray = to_grayscale(img)
    return normalize(equalize_adaptive(resize(gray, side), ahe))
