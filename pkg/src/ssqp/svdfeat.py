"""SVD sub-band decomposition and the four structural similarity features.

An image X = U diag(sigma) V^T is split into three contiguous index bands
(low/mid/high) covering the first min(H, W) singular triplets. Partial
reconstructions over a band ("ensemble images", optionally sigma-weighted)
and the band-restricted vectors/values yield four per-band features
comparing a reference image against a test image.

Singular vector signs are not determined by the decomposition, so each
(u_i, v_i) pair is canonicalized: the entry of u_i with the largest
magnitude is made positive. This makes every feature a function of the
image rather than of the SVD backend.
"""

from dataclasses import dataclass

import numpy as np

from .imgproc import GrayImage

__all__ = [
    "BANDS",
    "SvdBands",
    "band_partition",
    "svd_bands",
    "bands_from_arrays",
    "ensemble_image",
    "f1_svd",
    "f2_svd",
    "f3_svd",
    "f4_svd",
]

BANDS = ("lb", "mb", "hb")


def band_partition(k: int) -> dict:
    """Split indices 0..k-1 into low/mid/high bands of ~1/6, 2/6, 3/6 of k.

    Low and mid sizes are floored (at least 1 where k allows); the high band
    takes the remainder, so the three bands always exhaust 0..k-1.
    """
    if k < 1:
        raise ValueError(f"need at least one singular value, got k={k}")
    lb = min(max(1, k // 6), k)
    mb = min(max(1, (2 * k) // 6), k - lb)
    return {
        "lb": range(0, lb),
        "mb": range(lb, lb + mb),
        "hb": range(lb + mb, k),
    }


@dataclass(frozen=True)
class SvdBands:
    """Sign-canonicalized thin SVD of an image plus its band index ranges.

    u: (H, k) left singular vectors, v: (W, k) right singular vectors,
    sigma: (k,) non-increasing singular values, k = min(H, W).
    """

    u: np.ndarray
    v: np.ndarray
    sigma: np.ndarray
    bands: dict

    @property
    def height(self):
        return self.u.shape[0]

    @property
    def width(self):
        return self.v.shape[0]

    @property
    def k(self):
        return self.sigma.shape[0]


def _canonicalize_signs(u, v):
    # Flip each (u_i, v_i) pair so the largest-magnitude entry of u_i is
    # positive; the product u_i v_i^T is unchanged.
    idx = np.argmax(np.abs(u), axis=0)
    flip = u[idx, np.arange(u.shape[1])] < 0
    u = u.copy()
    v = v.copy()
    u[:, flip] *= -1.0
    v[:, flip] *= -1.0
    return u, v


def bands_from_arrays(u, sigma, v) -> SvdBands:
    """Build SvdBands from any SVD routine's thin factors.

    Sorts triplets by descending singular value and canonicalizes signs, so
    two different backends produce identical band objects up to numerical
    noise (degenerate singular values excepted).
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    order = np.argsort(-sigma, kind="stable")
    u, v, sigma = u[:, order], v[:, order], sigma[order]
    u, v = _canonicalize_signs(u, v)
    return SvdBands(u=u, v=v, sigma=sigma, bands=band_partition(sigma.shape[0]))


def svd_bands(img, min_dim: int = 6) -> SvdBands:
    """Decompose an image (or raw 2-D array) into banded SVD factors.

    min_dim guards band non-emptiness for whole frames; block-level callers
    relax it.
    """
    arr = img.pixels if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    h, w = arr.shape
    if min(h, w) < min_dim:
        raise ValueError(f"image {h}x{w} below minimum dimension {min_dim}")
    u, s, vt = np.linalg.svd(arr, full_matrices=False)
    return bands_from_arrays(u, s, vt.T)


def _check_pair(ref: SvdBands, test: SvdBands):
    if ref.height != test.height or ref.width != test.width:
        raise ValueError(
            f"dimension mismatch: {ref.height}x{ref.width} vs {test.height}x{test.width}"
        )


def ensemble_image(bands: SvdBands, band: str, weighted: bool = False) -> np.ndarray:
    """Partial reconstruction over one band.

    Unweighted: sum of u_i v_i^T over the band. Weighted: sum of
    sigma_i u_i v_i^T (the band's contribution to the image itself).
    """
    if band not in BANDS:
        raise ValueError(f"unknown band {band!r}, expected one of {BANDS}")
    sl = bands.bands[band]
    if len(sl) == 0:
        return np.zeros((bands.height, bands.width))
    ub = bands.u[:, sl.start : sl.stop]
    vb = bands.v[:, sl.start : sl.stop]
    if weighted:
        ub = ub * bands.sigma[sl.start : sl.stop]
    return ub @ vb.T


def f1_svd(ref: SvdBands, test: SvdBands, band: str) -> float:
    """Sum of absolute differences between unweighted ensemble images."""
    _check_pair(ref, test)
    er = ensemble_image(ref, band, weighted=False)
    et = ensemble_image(test, band, weighted=False)
    return float(np.abs(er - et).sum())


def f2_svd(ref: SvdBands, test: SvdBands, band: str) -> float:
    """Sum of absolute differences between sigma-weighted ensemble images."""
    _check_pair(ref, test)
    er = ensemble_image(ref, band, weighted=True)
    et = ensemble_image(test, band, weighted=True)
    return float(np.abs(er - et).sum())


def f3_svd(ref: SvdBands, test: SvdBands, band: str) -> float:
    """Mean absolute per-index alignment of band singular vectors, in [0, 1].

    Averages |u_ref,i . u_test,i| and |v_ref,i . v_test,i| over the band;
    identical images score 1, orthogonal structure scores 0. Absolute values
    keep the score invariant to residual sign ambiguity.
    """
    _check_pair(ref, test)
    sl = ref.bands[band]
    n = len(sl)
    if n == 0:
        return 1.0
    ur = ref.u[:, sl.start : sl.stop]
    ut = test.u[:, sl.start : sl.stop]
    vr = ref.v[:, sl.start : sl.stop]
    vt = test.v[:, sl.start : sl.stop]
    udots = np.abs(np.einsum("ij,ij->j", ur, ut)).sum()
    vdots = np.abs(np.einsum("ij,ij->j", vr, vt)).sum()
    return float((udots + vdots) / (2 * n))


def f4_svd(ref: SvdBands, test: SvdBands, band: str) -> float:
    """Sum of absolute differences of band singular values."""
    _check_pair(ref, test)
    sl = ref.bands[band]
    return float(np.abs(ref.sigma[sl.start : sl.stop] - test.sigma[sl.start : sl.stop]).sum())
