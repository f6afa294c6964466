"""Gabor kernels and kernel banks.

A kernel samples G(x, y) = exp(-(a^2 x_p^2 + b^2 y_p^2)) * exp(j 2 pi f0 x_p)
with rotated coordinates x_p = x cos(t) + y sin(t), y_p = -x sin(t) + y cos(t),
on an odd integer grid centered at the origin. The formula is implemented
verbatim: no 1/2 factor in the envelope exponent and no DC compensation, so a
constant image yields a nonzero mean response. x runs along columns, y along
rows.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidBank, InvalidKernelSize

DEFAULT_FREQUENCIES = (0.05, 0.08, 0.125, 0.2, 0.3)
DEFAULT_ORIENTATION_COUNT = 10
DEFAULT_KERNEL_SIZE = 31
DEFAULT_ENVELOPE_RATIO = 1.0


@dataclass(frozen=True)
class GaborParams:
    """Carrier frequency (cycles/pixel), orientation (radians), envelope sharpness."""

    f0: float
    theta: float
    alpha: float
    beta: float

    def __post_init__(self):
        vals = (self.f0, self.theta, self.alpha, self.beta)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("gabor parameters must be finite")
        if self.f0 <= 0.0:
            raise ValueError("f0 must be positive")
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("envelope sharpness must be positive")


@dataclass(frozen=True)
class GaborKernel:
    params: GaborParams
    size: int
    data: np.ndarray

    @property
    def center(self):
        return self.size // 2


def kernel_value(p: GaborParams, x, y):
    """Evaluate the kernel formula at continuous point(s) (x, y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ct = np.cos(p.theta)
    st = np.sin(p.theta)
    xp = x * ct + y * st
    yp = -x * st + y * ct
    envelope = np.exp(-((p.alpha * xp) ** 2 + (p.beta * yp) ** 2))
    carrier = np.exp(2j * np.pi * p.f0 * xp)
    return envelope * carrier


def envelope_value(p: GaborParams, x, y):
    """Gaussian envelope alone; equals |kernel_value| everywhere."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ct = np.cos(p.theta)
    st = np.sin(p.theta)
    xp = x * ct + y * st
    yp = -x * st + y * ct
    return np.exp(-((p.alpha * xp) ** 2 + (p.beta * yp) ** 2))


def make_kernel(p: GaborParams, size: int = DEFAULT_KERNEL_SIZE) -> GaborKernel:
    """Sample the kernel on the integer grid x, y in [-(K-1)/2, (K-1)/2]."""
    if size < 3 or size % 2 == 0:
        raise InvalidKernelSize(f"kernel size must be odd and >= 3, got {size}")
    half = size // 2
    coords = np.arange(-half, half + 1, dtype=np.float64)
    x, y = np.meshgrid(coords, coords)          # x varies along columns
    data = kernel_value(p, x, y)
    data.flags.writeable = False
    return GaborKernel(params=p, size=size, data=data)


@dataclass(frozen=True)
class GaborBank:
    """Ordered kernel family: frequency-major, orientation-minor.

    Kernel index i*len(orientations)+j pairs frequencies[i] with
    orientations[j]; feature-vector slots inherit this order.
    """

    kernels: tuple
    frequencies: tuple
    orientations: tuple
    size: int
    envelope_ratio: float

    def __len__(self):
        return len(self.kernels)

    def index_of(self, fi: int, oi: int) -> int:
        return fi * len(self.orientations) + oi


def default_orientations(n: int = DEFAULT_ORIENTATION_COUNT) -> tuple:
    """n orientations uniformly spaced over [0, pi): theta_i = i*pi/n."""
    if n < 1:
        raise InvalidBank("orientation count must be >= 1")
    return tuple(i * np.pi / n for i in range(n))


def make_bank(
    frequencies=DEFAULT_FREQUENCIES,
    orientations=None,
    size: int = DEFAULT_KERNEL_SIZE,
    envelope_ratio: float = DEFAULT_ENVELOPE_RATIO,
) -> GaborBank:
    """Build the cartesian-product bank with alpha = beta = envelope_ratio * f0."""
    if orientations is None:
        orientations = default_orientations()
    frequencies = tuple(float(f) for f in frequencies)
    orientations = tuple(float(t) for t in orientations)
    if not frequencies or not orientations:
        raise InvalidBank("frequencies and orientations must be nonempty")
    if any(not 0.0 < f <= 0.5 for f in frequencies):
        raise InvalidBank("frequencies must lie in (0, 0.5]")
    if envelope_ratio <= 0.0:
        raise InvalidBank("envelope_ratio must be positive")
    kernels = []
    for f0 in frequencies:
        sharp = envelope_ratio * f0
        for theta in orientations:
            p = GaborParams(f0=f0, theta=theta, alpha=sharp, beta=sharp)
            kernels.append(make_kernel(p, size))
    return GaborBank(
        kernels=tuple(kernels),
        frequencies=frequencies,
        orientations=orientations,
        size=size,
        envelope_ratio=float(envelope_ratio),
    )


def default_bank() -> GaborBank:
    """5 frequencies x 10 orientations = 50 kernels, K = 31."""
    return make_bank()
