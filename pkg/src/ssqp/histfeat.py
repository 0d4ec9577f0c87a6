"""Coefficient-of-variation histograms and KL-distance statistical features.

The dispersion of a block is summarized by its coefficient of variation
(std / mean), collected per block over the pixel domain or over blockwise
2-D DCT coefficients. Histograms of those values are compared between a
reference and a test image with the Kullback-Leibler distance; two further
features apply the same machinery to SVD ensemble images.

All histograms are additively smoothed so the KL distance is always finite.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn

from .imgproc import GrayImage
from .svdfeat import svd_bands, ensemble_image

__all__ = [
    "CovHistogram",
    "cov",
    "cov_samples",
    "make_histogram",
    "cov_histogram",
    "kl_distance",
    "f1_f2_hist",
    "f3_f4_hist",
]

DOMAINS = ("spatial", "frequency")

# Floor for |mean| in the coefficient of variation; DCT blocks can have
# near-zero means.
_MU_FLOOR = 1e-8

# Additive mass per bin before renormalization. Must be small enough that
# the renormalization (which scales KL by ~n_bins * eps) stays below the
# bin-stability budget of the histogram features.
_SMOOTHING_EPS = 1e-12


@dataclass(frozen=True)
class CovHistogram:
    """Smoothed, normalized histogram over a fixed binning."""

    bin_edges: np.ndarray
    mass: np.ndarray
    domain_tag: str
    smoothing_eps: float

    @property
    def n_bins(self):
        return self.mass.shape[0]


def cov(values) -> float:
    """Coefficient of variation: population std over |mean| (floored)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cov of an empty sample")
    return float(arr.std() / max(abs(float(arr.mean())), _MU_FLOOR))


def _block_view(arr: np.ndarray, b: int) -> np.ndarray:
    """(n_blocks, b, b) view of the full b-tiles in row-major scan order."""
    h, w = arr.shape
    if b < 2:
        raise ValueError(f"block size must be >= 2, got {b}")
    if b > min(h, w):
        raise ValueError(f"block size {b} exceeds array dimensions {h}x{w}")
    nh, nw = h // b, w // b
    return arr[: nh * b, : nw * b].reshape(nh, b, nw, b).swapaxes(1, 2).reshape(nh * nw, b, b)


def cov_samples(img, domain: str, b: int) -> np.ndarray:
    """One coefficient of variation per b x b block, in scan order.

    domain "spatial" computes it over raw block pixels; "frequency" over all
    b^2 orthonormal DCT coefficients of the block.
    """
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}, expected one of {DOMAINS}")
    arr = img.pixels if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    blocks = _block_view(arr, b)
    if domain == "frequency":
        blocks = dctn(blocks, type=2, norm="ortho", axes=(1, 2))
    means = blocks.mean(axis=(1, 2))
    stds = blocks.std(axis=(1, 2))
    return stds / np.maximum(np.abs(means), _MU_FLOOR)


def make_histogram(values, n_bins: int, lo: float, hi: float, domain_tag: str) -> CovHistogram:
    """Histogram of values clamped into [lo, hi], smoothed and normalized.

    Smoothing adds eps to each normalized bin and renormalizes, so every bin
    has mass >= eps / (1 + n_bins * eps) and the masses sum to 1. Bins are
    right-closed (a value on an interior edge belongs to the bin below it),
    which keeps assignments stable when the range is extended on a shared
    edge lattice.
    """
    if n_bins < 2:
        raise ValueError(f"need at least 2 bins, got {n_bins}")
    if hi <= lo:
        hi = lo + 1.0  # degenerate sample range; everything lands in bin 0
    arr = np.clip(np.asarray(values, dtype=np.float64), lo, hi)
    edges = np.linspace(lo, hi, n_bins + 1)
    idx = np.searchsorted(edges, arr, side="left") - 1
    np.clip(idx, 0, n_bins - 1, out=idx)
    counts = np.bincount(idx, minlength=n_bins)
    frac = counts / counts.sum()
    eps = _SMOOTHING_EPS
    mass = (frac + eps) / (1.0 + n_bins * eps)
    return CovHistogram(bin_edges=edges, mass=mass, domain_tag=domain_tag, smoothing_eps=eps)


def cov_histogram(img, domain: str, b: int, n_bins: int, value_range) -> CovHistogram:
    """Histogram of per-block coefficients of variation."""
    lo, hi = value_range
    samples = cov_samples(img, domain, b)
    return make_histogram(samples, n_bins, lo, hi, domain)


def kl_distance(p: CovHistogram, q: CovHistogram) -> float:
    """Kullback-Leibler distance sum p log(p/q), natural log.

    Nonnegative; zero exactly when the histograms match bin for bin.
    """
    if p.n_bins != q.n_bins or not np.array_equal(p.bin_edges, q.bin_edges):
        raise ValueError("histograms use different binnings")
    return float(np.sum(p.mass * np.log(p.mass / q.mass)))


def _check_same_shape(ref, test):
    r = ref.pixels if isinstance(ref, GrayImage) else np.asarray(ref)
    t = test.pixels if isinstance(test, GrayImage) else np.asarray(test)
    if r.shape != t.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {t.shape}")
    return r, t


def f1_f2_hist(ref, test, b: int = 5, n_bins: int = 64):
    """Spatial and frequency CoV histogram distances (reference || test).

    Both images are binned over a shared range [0, max of the pooled
    samples] so the histograms are comparable.
    """
    _check_same_shape(ref, test)
    out = []
    for domain in DOMAINS:
        rs = cov_samples(ref, domain, b)
        ts = cov_samples(test, domain, b)
        hi = float(max(rs.max(), ts.max()))
        hr = make_histogram(rs, n_bins, 0.0, hi, domain)
        ht = make_histogram(ts, n_bins, 0.0, hi, domain)
        out.append(kl_distance(hr, ht))
    return out[0], out[1]


def f3_f4_hist(ref, test, band: str, n_bins: int = 64, dct_block: int = 5,
               ref_bands=None, test_bands=None):
    """Histogram distances over one band's unweighted ensemble images.

    The first value compares pixel-value histograms of the two ensemble
    images; the second compares CoV histograms of their blockwise DCT
    coefficients. Precomputed SvdBands may be passed to avoid repeated
    decompositions.
    """
    _check_same_shape(ref, test)
    if ref_bands is None:
        ref_bands = svd_bands(ref)
    if test_bands is None:
        test_bands = svd_bands(test)
    er = ensemble_image(ref_bands, band, weighted=False)
    et = ensemble_image(test_bands, band, weighted=False)

    lo = float(min(er.min(), et.min()))
    hi = float(max(er.max(), et.max()))
    hr = make_histogram(er.ravel(), n_bins, lo, hi, "spatial")
    ht = make_histogram(et.ravel(), n_bins, lo, hi, "spatial")
    f3 = kl_distance(hr, ht)

    rs = cov_samples(er, "frequency", dct_block)
    ts = cov_samples(et, "frequency", dct_block)
    hi_f = float(max(rs.max(), ts.max()))
    hrf = make_histogram(rs, n_bins, 0.0, hi_f, "frequency")
    htf = make_histogram(ts, n_bins, 0.0, hi_f, "frequency")
    f4 = kl_distance(hrf, htf)
    return f3, f4
