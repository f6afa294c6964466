"""Independent reference implementations the tests check the package against.

Everything here is deliberately written by a different route than the
package code: spatial-domain convolution instead of FFT, whole-image
histogram equalization instead of tiled, finite differences instead of
backprop. Keep these dumb and obvious.
"""

import numpy as np


def brute_circular_conv(img, kernel):
    """Spatial-domain circular convolution, kernel center aligned.

    out[y, x] = sum_{dy,dx} kernel[dy+c, dx+c] * img[(y-dy) % H, (x-dx) % W]
    """
    img = np.asarray(img)
    kernel = np.asarray(kernel)
    k = kernel.shape[0]
    c = k // 2
    out = np.zeros(img.shape, dtype=np.complex128)
    for dy in range(-c, c + 1):
        for dx in range(-c, c + 1):
            out += kernel[dy + c, dx + c] * np.roll(img, (dy, dx), axis=(0, 1))
    return out


def global_hist_eq(img, bins=256):
    """Whole-image histogram equalization onto [0, 255] via the CDF."""
    img = np.asarray(img, dtype=np.float64)
    idx = np.clip((img * (bins / 256.0)).astype(np.int64), 0, bins - 1)
    hist = np.bincount(idx.ravel(), minlength=bins).astype(np.float64)
    cdf = np.cumsum(hist) / img.size * 255.0
    return cdf[idx]


def central_diff_grad(f, w, h=1e-5):
    """Central finite-difference gradient of scalar f at flat vector w."""
    w = np.asarray(w, dtype=np.float64)
    g = np.zeros_like(w)
    for i in range(w.size):
        wp = w.copy()
        wm = w.copy()
        wp[i] += h
        wm[i] -= h
        g[i] = (f(wp) - f(wm)) / (2.0 * h)
    return g


def algorithm1_loop(outputs, threshold=0.8):
    """Literal transcription of the published matching loop.

    Walks the outputs one neuron at a time, sets a detection factor per
    neuron, multiplies them into an overall factor, then compares to 1.
    """
    overall = 1
    for out in outputs:
        if out >= threshold:
            factor = 1
        else:
            factor = 0
        overall = overall * factor
    if overall == 1:
        return "Matched"
    return "Unmatched"
