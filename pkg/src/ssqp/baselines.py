"""Reference metrics for benchmark tables: PSNR and single-scale SSIM."""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .imgproc import GrayImage

__all__ = ["BaselineScore", "psnr", "ssim", "PSNR_CAP"]

PSNR_CAP = 100.0

_SSIM_SIGMA = 1.5
_SSIM_RADIUS = 5  # 11 x 11 window
_K1, _K2 = 0.01, 0.03
_L = 255.0


@dataclass(frozen=True)
class BaselineScore:
    metric_name: str
    value: float
    higher_is_better: bool = True


def _check_pair(ref: GrayImage, test: GrayImage):
    if ref.height != test.height or ref.width != test.width:
        raise ValueError(
            f"dimension mismatch: {ref.height}x{ref.width} vs {test.height}x{test.width}"
        )


def psnr(ref: GrayImage, test: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB against a 255 peak, capped at 100."""
    _check_pair(ref, test)
    mse = float(np.mean((ref.pixels - test.pixels) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * np.log10(_L * _L / mse), PSNR_CAP)


def _gaussian_kernel():
    x = np.arange(-_SSIM_RADIUS, _SSIM_RADIUS + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * _SSIM_SIGMA**2))
    return k / k.sum()


def _filter_valid(img, kernel):
    # Separable windowed mean; borders are cropped afterwards so the padding
    # mode never influences the result.
    out = correlate1d(img, kernel, axis=0, mode="constant")
    out = correlate1d(out, kernel, axis=1, mode="constant")
    r = _SSIM_RADIUS
    return out[r:-r, r:-r]


def ssim(ref: GrayImage, test: GrayImage) -> float:
    """Mean structural similarity with the standard 11x11 Gaussian window."""
    _check_pair(ref, test)
    if min(ref.height, ref.width) < 2 * _SSIM_RADIUS + 1:
        raise ValueError(f"image must be at least {2 * _SSIM_RADIUS + 1} pixels on each side")
    x = ref.pixels
    y = test.pixels
    k = _gaussian_kernel()

    ux = _filter_valid(x, k)
    uy = _filter_valid(y, k)
    uxx = _filter_valid(x * x, k)
    uyy = _filter_valid(y * y, k)
    uxy = _filter_valid(x * y, k)
    vx = uxx - ux * ux
    vy = uyy - uy * uy
    vxy = uxy - ux * uy

    c1 = (_K1 * _L) ** 2
    c2 = (_K2 * _L) ** 2
    s = ((2 * ux * uy + c1) * (2 * vxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
    return float(s.mean())
