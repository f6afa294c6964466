"""Bank responses via FFT circular convolution, reduced to feature vectors.

Feature layout: for kernel i in bank order, slot 2i holds mean(|response|)
and slot 2i+1 holds the population std of |response|. The default 50-kernel
bank therefore yields exactly 100 values.
"""

import numpy as np

from .errors import ShapeError, SizeMismatch
from .gabor import GaborBank, GaborKernel

# fft2 of each kernel padded to an image shape, keyed by (id(bank), shape).
# The bank object itself is kept in the value to guard against id reuse.
_SPECTRA_CACHE = {}
_SPECTRA_CACHE_MAX = 8


def _check_image(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ShapeError("expected a 2-D grayscale array")
    return img


def _pad_kernel(data: np.ndarray, size: int, shape) -> np.ndarray:
    h, w = shape
    if size > h or size > w:
        raise SizeMismatch(f"kernel size {size} exceeds image shape {h}x{w}")
    pad = np.zeros((h, w), dtype=np.complex128)
    pad[:size, :size] = data
    half = size // 2
    return np.roll(pad, (-half, -half), axis=(0, 1))


def fft_convolve(img, kernel: GaborKernel) -> np.ndarray:
    """Circular convolution of img with the kernel, kernel center aligned.

    out[y, x] = sum over (dy, dx) of kernel[dy+c, dx+c] * img[(y-dy) % H,
    (x-dx) % W], computed as IFFT(FFT(img) * FFT(padded kernel)).
    """
    img = _check_image(img)
    pad = _pad_kernel(kernel.data, kernel.size, img.shape)
    return np.fft.ifft2(np.fft.fft2(img) * np.fft.fft2(pad))


def _bank_spectra(bank: GaborBank, shape):
    key = (id(bank), shape)
    hit = _SPECTRA_CACHE.get(key)
    if hit is not None and hit[0] is bank:
        return hit[1]
    spectra = np.stack(
        [np.fft.fft2(_pad_kernel(k.data, k.size, shape)) for k in bank.kernels]
    )
    if len(_SPECTRA_CACHE) >= _SPECTRA_CACHE_MAX:
        _SPECTRA_CACHE.clear()
    _SPECTRA_CACHE[key] = (bank, spectra)
    return spectra


def response_maps(img, bank: GaborBank) -> np.ndarray:
    """Stacked complex responses, shape (|bank|, H, W), bank order."""
    img = _check_image(img)
    spectra = _bank_spectra(bank, img.shape)
    return np.fft.ifft2(spectra * np.fft.fft2(img)[None, :, :], axes=(-2, -1))


def extract_features(img, bank: GaborBank) -> np.ndarray:
    """Feature vector of length 2*|bank|: per-kernel magnitude mean and std."""
    mags = np.abs(response_maps(img, bank))
    out = np.empty(2 * len(bank.kernels), dtype=np.float64)
    out[0::2] = mags.mean(axis=(1, 2))
    out[1::2] = mags.std(axis=(1, 2))
    return out
