"""Procedural texture contents with graded distortions and known scores.

Used where real subjective data is unavailable: each content is a
deterministic procedural texture, distorted at controlled severities, with
the target score a fixed monotone function of severity. This gives the
training/evaluation machinery a ground truth it can be validated against.
"""

import numpy as np
from scipy.ndimage import gaussian_filter

from .imgproc import GrayImage
from .pipeline import ExtractionConfig, extract_features
from .boost import TrainingRow, TrainingSet

__all__ = [
    "VARIANTS",
    "make_texture",
    "distort",
    "severity_mos",
    "make_synthetic_pairs",
    "synthetic_training_set",
]

# One pristine variant plus three distortion families on a severity grid.
VARIANTS = (
    ("identity", 0.0),
    ("noise", 0.25), ("noise", 0.5), ("noise", 0.75), ("noise", 1.0),
    ("blur", 0.25), ("blur", 0.5), ("blur", 0.75), ("blur", 1.0),
    ("block", 1.0 / 3.0), ("block", 2.0 / 3.0), ("block", 1.0),
)

MOS_SCALE = 20.0


def severity_mos(severity: float) -> float:
    """Target score: pristine maps to the top of the scale, severity 1 to 0."""
    return MOS_SCALE * (1.0 - float(severity))


def make_texture(index: int, size: int = 48, seed: int = 20_260_809) -> GrayImage:
    """Deterministic procedural texture; different indices vary in character."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    kind = index % 4
    if kind == 0:
        fx, fy = rng.uniform(0.08, 0.35, size=2)
        ph = rng.uniform(0, 2 * np.pi, size=2)
        base = np.sin(2 * np.pi * fx * xx + ph[0]) + np.sin(2 * np.pi * fy * yy + ph[1])
    elif kind == 1:
        base = gaussian_filter(rng.normal(size=(size, size)), sigma=rng.uniform(1.0, 2.5))
    elif kind == 2:
        period = rng.integers(4, 9)
        angle = rng.uniform(0, np.pi)
        t = xx * np.cos(angle) + yy * np.sin(angle)
        base = np.sign(np.sin(2 * np.pi * t / period))
    else:
        cx, cy = rng.uniform(0.2 * size, 0.8 * size, size=2)
        r = np.hypot(xx - cx, yy - cy)
        base = np.sin(r / rng.uniform(1.5, 3.5))
    base = base + 0.35 * gaussian_filter(rng.normal(size=(size, size)), sigma=1.0)
    lo, hi = base.min(), base.max()
    px = 20.0 + 215.0 * (base - lo) / max(hi - lo, 1e-9)
    return GrayImage(px)


def distort(img: GrayImage, family: str, severity: float, rng) -> GrayImage:
    """Apply one distortion family at the given severity in (0, 1]."""
    px = img.pixels
    if family == "identity" or severity == 0.0:
        return img
    if family == "noise":
        out = px + rng.normal(0.0, 36.0 * severity, size=px.shape)
    elif family == "blur":
        out = gaussian_filter(px, sigma=0.5 + 2.5 * severity, mode="reflect")
    elif family == "block":
        b = 8
        h, w = px.shape
        hh, ww = (h // b) * b, (w // b) * b
        means = px[:hh, :ww].reshape(hh // b, b, ww // b, b).mean(axis=(1, 3))
        flat = np.repeat(np.repeat(means, b, axis=0), b, axis=1)
        out = px.copy()
        lam = 0.25 + 0.75 * severity
        out[:hh, :ww] = (1.0 - lam) * px[:hh, :ww] + lam * flat
    else:
        raise ValueError(f"unknown distortion family {family!r}")
    return GrayImage(np.clip(out, 0.0, 255.0))


def make_synthetic_pairs(n_contents: int = 12, size: int = 48, seed: int = 20_260_809):
    """(content_id, ref, test, mos) tuples over all contents and variants."""
    pairs = []
    for ci in range(n_contents):
        ref = make_texture(ci, size=size, seed=seed)
        for vi, (family, severity) in enumerate(VARIANTS):
            rng = np.random.default_rng(np.random.SeedSequence([seed, ci, vi]))
            test = distort(ref, family, severity, rng)
            pairs.append((f"content{ci:02d}", ref, test, severity_mos(severity)))
    return pairs


def synthetic_training_set(cfg: ExtractionConfig, n_contents: int = 12, size: int = 48,
                           seed: int = 20_260_809) -> TrainingSet:
    """Extract features for the full synthetic grid under one config."""
    rows = []
    for content_id, ref, test, mos in make_synthetic_pairs(n_contents, size, seed):
        features = extract_features(ref, test, cfg)
        rows.append(TrainingRow(features=features, mos=mos, content_id=content_id))
    return TrainingSet(rows=rows)
