"""Hot per-pixel loops with numba-compiled and pure-numpy twins.

The numba path is used when numba imports cleanly; setting the environment
variable ``GABORSET_NUMBA`` to ``0``/``false``/``off``/``no`` forces the
vectorized numpy fallback. Both paths evaluate identical arithmetic
expressions per pixel, so results agree bit for bit (asserted in tests and
compared in benchmarks/bench_backends.py).
"""

import os

import numpy as np

_env = os.environ.get("GABORSET_NUMBA", "").strip().lower()
NUMBA_DISABLED = _env in {"0", "false", "off", "no"}

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not NUMBA_DISABLED


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# bilinear resize
#
# Origin-aligned mapping: src = dst * (src_size / out_size), neighbors clamped
# at the bottom/right edge. out_size == src_size reduces to the identity.


def _resize_coords(src_n, out_n):
    s = np.arange(out_n, dtype=np.float64) * (src_n / out_n)
    i0 = s.astype(np.int64)  # floor; s < src_n always
    f = s - i0
    i1 = np.minimum(i0 + 1, src_n - 1)
    return i0, i1, f


def resize_bilinear_numpy(img, out_h, out_w):
    y0, y1, fy = _resize_coords(img.shape[0], out_h)
    x0, x1, fx = _resize_coords(img.shape[1], out_w)
    fx = fx[None, :]
    fy = fy[:, None]
    top = (1.0 - fx) * img[y0[:, None], x0[None, :]] + fx * img[y0[:, None], x1[None, :]]
    bot = (1.0 - fx) * img[y1[:, None], x0[None, :]] + fx * img[y1[:, None], x1[None, :]]
    return (1.0 - fy) * top + fy * bot


def _resize_bilinear_loops(img, y0, y1, fy, x0, x1, fx, out):
    for i in range(out.shape[0]):
        a, b, v = y0[i], y1[i], fy[i]
        for j in range(out.shape[1]):
            c, d, u = x0[j], x1[j], fx[j]
            top = (1.0 - u) * img[a, c] + u * img[a, d]
            bot = (1.0 - u) * img[b, c] + u * img[b, d]
            out[i, j] = (1.0 - v) * top + v * bot
    return out


if USE_NUMBA:
    _resize_bilinear_loops_jit = njit(cache=True)(_resize_bilinear_loops)


def resize_bilinear_numba(img, out_h, out_w):
    y0, y1, fy = _resize_coords(img.shape[0], out_h)
    x0, x1, fx = _resize_coords(img.shape[1], out_w)
    out = np.empty((out_h, out_w), dtype=np.float64)
    return _resize_bilinear_loops_jit(img, y0, y1, fy, x0, x1, fx, out)


def resize_bilinear(img, out_h, out_w):
    """Resize a 2-D float64 image; backend chosen at import time."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    if USE_NUMBA:
        return resize_bilinear_numba(img, out_h, out_w)
    return resize_bilinear_numpy(img, out_h, out_w)


# ---------------------------------------------------------------------------
# CLAHE tile-mapping blend
#
# Each pixel blends the lookup tables of its four surrounding tiles with
# bilinear weights. Tiles flagged as identity (single-intensity histogram)
# contribute the raw pixel value instead of a table entry.


def clahe_blend_numpy(img, bins_idx, lut, ident, ty0, ty1, wy, tx0, tx1, wx):
    r0 = ty0[:, None]
    r1 = ty1[:, None]
    c0 = tx0[None, :]
    c1 = tx1[None, :]
    v00 = np.where(ident[r0, c0], img, lut[r0, c0, bins_idx])
    v01 = np.where(ident[r0, c1], img, lut[r0, c1, bins_idx])
    v10 = np.where(ident[r1, c0], img, lut[r1, c0, bins_idx])
    v11 = np.where(ident[r1, c1], img, lut[r1, c1, bins_idx])
    fx = wx[None, :]
    fy = wy[:, None]
    top = (1.0 - fx) * v00 + fx * v01
    bot = (1.0 - fx) * v10 + fx * v11
    return (1.0 - fy) * top + fy * bot


def _clahe_blend_loops(img, bins_idx, lut, ident, ty0, ty1, wy, tx0, tx1, wx, out):
    for i in range(img.shape[0]):
        r0, r1, fy = ty0[i], ty1[i], wy[i]
        for j in range(img.shape[1]):
            c0, c1, fx = tx0[j], tx1[j], wx[j]
            v = img[i, j]
            b = bins_idx[i, j]
            v00 = v if ident[r0, c0] else lut[r0, c0, b]
            v01 = v if ident[r0, c1] else lut[r0, c1, b]
            v10 = v if ident[r1, c0] else lut[r1, c0, b]
            v11 = v if ident[r1, c1] else lut[r1, c1, b]
            top = (1.0 - fx) * v00 + fx * v01
            bot = (1.0 - fx) * v10 + fx * v11
            out[i, j] = (1.0 - fy) * top + fy * bot
    return out


if USE_NUMBA:
    _clahe_blend_loops_jit = njit(cache=True)(_clahe_blend_loops)


def clahe_blend_numba(img, bins_idx, lut, ident, ty0, ty1, wy, tx0, tx1, wx):
    out = np.empty_like(img)
    return _clahe_blend_loops_jit(
        img, bins_idx, lut, ident, ty0, ty1, wy, tx0, tx1, wx, out
    )


def clahe_blend(img, bins_idx, lut, ident, ty0, ty1, wy, tx0, tx1, wx):
    if USE_NUMBA:
        return clahe_blend_numba(img, bins_idx, lut, ident, ty0, ty1, wy, tx0, tx1, wx)
    return clahe_blend_numpy(img, bins_idx, lut, ident, ty0, ty1, wy, tx0, tx1, wx)
