"""Feature extraction pipeline: whole-frame and block-averaged group sets.

Produces the eight named feature groups consumed by the staged regression
system: four structural groups (one value per SVD band) and four
statistical groups (two scalars plus two per-band triples), 20 values in
all. Block-average mode computes the same quantities on aligned tiles and
pools them by plain averaging in scan order.
"""

from dataclasses import dataclass, field

import numpy as np

from .imgproc import GrayImage
from .svdfeat import BANDS, svd_bands, f1_svd, f2_svd, f3_svd, f4_svd
from .histfeat import _block_view, cov_samples, make_histogram, kl_distance, f1_f2_hist, f3_f4_hist

__all__ = [
    "GROUPS",
    "GROUP_DIMS",
    "FEATURE_COLUMNS",
    "MODES",
    "ExtractionConfig",
    "FeatureGroupSet",
    "extract_full_frame",
    "extract_block_average",
    "extract_features",
]

GROUPS = ("svd_f1", "svd_f2", "svd_f3", "svd_f4", "hist_f1", "hist_f2", "hist_f3", "hist_f4")
GROUP_DIMS = {
    "svd_f1": 3, "svd_f2": 3, "svd_f3": 3, "svd_f4": 3,
    "hist_f1": 1, "hist_f2": 1, "hist_f3": 3, "hist_f4": 3,
}

FEATURE_COLUMNS = tuple(
    g if GROUP_DIMS[g] == 1 else f"{g}.{band}"
    for g in GROUPS
    for band in (BANDS if GROUP_DIMS[g] == 3 else ("",))
)

MODES = ("full_frame", "block_average")


@dataclass(frozen=True)
class ExtractionConfig:
    """Block sizes and binning for feature extraction.

    The KL-distance region must tile exactly into CoV blocks, and the SVD
    block must be able to hold at least one DCT block.
    """

    svd_block: int = 10
    hist_block: int = 5
    hist_kl_region: int = 10
    n_bins_full: int = 64
    n_bins_block: int = 8
    mode: str = "block_average"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        for name in ("svd_block", "hist_block", "hist_kl_region"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if self.hist_kl_region % self.hist_block != 0:
            raise ValueError("hist_kl_region must be a multiple of hist_block")
        if self.n_bins_full < 2 or self.n_bins_block < 2:
            raise ValueError("bin counts must be >= 2")
        if self.svd_block < self.hist_block:
            raise ValueError("svd_block must be >= hist_block")

    def to_dict(self):
        return {
            "svd_block": self.svd_block,
            "hist_block": self.hist_block,
            "hist_kl_region": self.hist_kl_region,
            "n_bins_full": self.n_bins_full,
            "n_bins_block": self.n_bins_block,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class FeatureGroupSet:
    """The eight named feature vectors for one image pair (20 values)."""

    groups: dict = field(repr=False)
    mode: str = "full_frame"

    def __post_init__(self):
        if set(self.groups) != set(GROUPS):
            raise ValueError(f"expected groups {GROUPS}, got {tuple(self.groups)}")
        clean = {}
        for g in GROUPS:
            arr = np.atleast_1d(np.asarray(self.groups[g], dtype=np.float64))
            if arr.shape != (GROUP_DIMS[g],):
                raise ValueError(f"group {g} must have {GROUP_DIMS[g]} values, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"group {g} contains non-finite values")
            arr.flags.writeable = False
            clean[g] = arr
        object.__setattr__(self, "groups", clean)

    def as_vector(self) -> np.ndarray:
        """All 20 values in the fixed FEATURE_COLUMNS order."""
        return np.concatenate([self.groups[g] for g in GROUPS])

    @classmethod
    def from_vector(cls, vec, mode: str = "full_frame"):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (len(FEATURE_COLUMNS),):
            raise ValueError(f"expected {len(FEATURE_COLUMNS)} values, got {vec.shape}")
        groups = {}
        i = 0
        for g in GROUPS:
            d = GROUP_DIMS[g]
            groups[g] = vec[i : i + d]
            i += d
        return cls(groups=groups, mode=mode)


def _check_images(ref: GrayImage, test: GrayImage, min_dim: int):
    if ref.height != test.height or ref.width != test.width:
        raise ValueError(
            f"dimension mismatch: {ref.height}x{ref.width} vs {test.height}x{test.width}"
        )
    if min(ref.height, ref.width) < min_dim:
        raise ValueError(
            f"image {ref.height}x{ref.width} too small; need min dimension {min_dim}"
        )


def extract_full_frame(ref: GrayImage, test: GrayImage, cfg: ExtractionConfig = None) -> FeatureGroupSet:
    """All 20 features computed over the whole frames."""
    cfg = cfg or ExtractionConfig(mode="full_frame")
    _check_images(ref, test, max(6, cfg.hist_block))
    rb = svd_bands(ref)
    tb = svd_bands(test)

    groups = {
        "svd_f1": [f1_svd(rb, tb, band) for band in BANDS],
        "svd_f2": [f2_svd(rb, tb, band) for band in BANDS],
        "svd_f3": [f3_svd(rb, tb, band) for band in BANDS],
        "svd_f4": [f4_svd(rb, tb, band) for band in BANDS],
    }
    f1h, f2h = f1_f2_hist(ref, test, b=cfg.hist_block, n_bins=cfg.n_bins_full)
    groups["hist_f1"] = [f1h]
    groups["hist_f2"] = [f2h]
    f3s, f4s = [], []
    for band in BANDS:
        f3, f4 = f3_f4_hist(
            ref, test, band,
            n_bins=cfg.n_bins_full, dct_block=cfg.hist_block,
            ref_bands=rb, test_bands=tb,
        )
        f3s.append(f3)
        f4s.append(f4)
    groups["hist_f3"] = f3s
    groups["hist_f4"] = f4s
    return FeatureGroupSet(groups=groups, mode="full_frame")


def extract_block_average(ref: GrayImage, test: GrayImage, cfg: ExtractionConfig = None) -> FeatureGroupSet:
    """Per-tile features pooled by averaging over aligned tiles.

    Structural features and the ensemble histogram features use svd_block
    tiles; the CoV histogram distances collect hist_block samples within
    each hist_kl_region tile. Tiles are aligned identically in both images
    and accumulated in scan order.
    """
    cfg = cfg or ExtractionConfig(mode="block_average")
    _check_images(ref, test, max(cfg.hist_kl_region, cfg.svd_block))

    rblocks = _block_view(ref.pixels, cfg.svd_block)
    tblocks = _block_view(test.pixels, cfg.svd_block)
    per_block = {g: [] for g in ("svd_f1", "svd_f2", "svd_f3", "svd_f4", "hist_f3", "hist_f4")}
    for rblk, tblk in zip(rblocks, tblocks):
        rb = svd_bands(rblk, min_dim=2)
        tb = svd_bands(tblk, min_dim=2)
        per_block["svd_f1"].append([f1_svd(rb, tb, band) for band in BANDS])
        per_block["svd_f2"].append([f2_svd(rb, tb, band) for band in BANDS])
        per_block["svd_f3"].append([f3_svd(rb, tb, band) for band in BANDS])
        per_block["svd_f4"].append([f4_svd(rb, tb, band) for band in BANDS])
        f3s, f4s = [], []
        for band in BANDS:
            f3, f4 = f3_f4_hist(
                rblk, tblk, band,
                n_bins=cfg.n_bins_block, dct_block=cfg.hist_block,
                ref_bands=rb, test_bands=tb,
            )
            f3s.append(f3)
            f4s.append(f4)
        per_block["hist_f3"].append(f3s)
        per_block["hist_f4"].append(f4s)

    rregions = _block_view(ref.pixels, cfg.hist_kl_region)
    tregions = _block_view(test.pixels, cfg.hist_kl_region)
    f1s, f2s = [], []
    for rreg, treg in zip(rregions, tregions):
        for domain, acc in (("spatial", f1s), ("frequency", f2s)):
            rs = cov_samples(rreg, domain, cfg.hist_block)
            ts = cov_samples(treg, domain, cfg.hist_block)
            hi = float(max(rs.max(), ts.max()))
            hr = make_histogram(rs, cfg.n_bins_block, 0.0, hi, domain)
            ht = make_histogram(ts, cfg.n_bins_block, 0.0, hi, domain)
            acc.append(kl_distance(hr, ht))

    groups = {g: np.asarray(vals, dtype=np.float64).mean(axis=0) for g, vals in per_block.items()}
    groups["hist_f1"] = [float(np.mean(f1s))]
    groups["hist_f2"] = [float(np.mean(f2s))]
    return FeatureGroupSet(groups=groups, mode="block_average")


def extract_features(ref: GrayImage, test: GrayImage, cfg: ExtractionConfig) -> FeatureGroupSet:
    """Dispatch on cfg.mode."""
    if cfg.mode == "full_frame":
        return extract_full_frame(ref, test, cfg)
    return extract_block_average(ref, test, cfg)
