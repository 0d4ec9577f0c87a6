"""The 3-stage parallel SVR stack: group scores, family fusion, final fusion.

Stage I trains one regressor per feature group against the subjective
scores. Stage II fuses the four structural group scores and the four
statistical group scores with one regressor per family; stage III fuses
the two family scores into the final prediction. Each regressor scales
its own inputs to [0, 1] and selects (C, gamma) by cross validation.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .pipeline import GROUPS, ExtractionConfig, FeatureGroupSet, extract_features
from .svr import SvrHyperparams, SvrModel, Normalizer, train_nu_svr, grid_search_cv

__all__ = [
    "SCHEMA_VERSION",
    "TrainingRow",
    "TrainingSet",
    "SsqpModel",
    "ModelFormatError",
    "ModelVersionError",
    "train_ssqp",
    "predict_ssqp",
    "save_model",
    "load_model",
]

SCHEMA_VERSION = 1

_SVD_GROUPS = GROUPS[:4]
_HIST_GROUPS = GROUPS[4:]

STACKINGS = ("in_sample", "out_of_fold")


class ModelFormatError(ValueError):
    """Raised when a model file cannot be parsed."""


class ModelVersionError(ModelFormatError):
    """Raised when a model file's schema version is incompatible."""


@dataclass(frozen=True)
class TrainingRow:
    features: FeatureGroupSet
    mos: float
    content_id: str

    def __post_init__(self):
        if not np.isfinite(self.mos):
            raise ValueError("MOS must be finite")
        if not str(self.content_id):
            raise ValueError("content_id must be non-empty")


@dataclass(frozen=True)
class TrainingSet:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not all(isinstance(r, TrainingRow) for r in self.rows):
            raise ValueError("rows must be TrainingRow instances")

    def __len__(self):
        return len(self.rows)

    def content_ids(self):
        return sorted({r.content_id for r in self.rows})

    def subset(self, content_ids) -> "TrainingSet":
        wanted = set(content_ids)
        return TrainingSet(rows=[r for r in self.rows if r.content_id in wanted])


@dataclass(frozen=True, eq=False)
class SsqpModel:
    """Trained stack plus the extraction settings it expects."""

    stage1: dict
    stage2_svd: SvrModel
    stage2_hist: SvrModel
    stage3: SvrModel
    extraction_config: ExtractionConfig
    stacking: str = "in_sample"
    schema_version: int = SCHEMA_VERSION

    def stage_scores(self, features: FeatureGroupSet):
        """Per-stage intermediate scores, exposed for inspection and tests."""
        s1 = np.array([self.stage1[g].predict(features.groups[g]) for g in GROUPS])
        s2 = np.array([self.stage2_svd.predict(s1[:4]), self.stage2_hist.predict(s1[4:])])
        return s1, s2, self.stage3.predict(s2)

    def predict_from_features(self, features: FeatureGroupSet) -> float:
        return float(self.stage_scores(features)[2])


def _component_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), index]).generate_state(1)[0])


def _canonical_rows(rows):
    # A deterministic order independent of how the caller assembled the set.
    return sorted(rows, key=lambda r: (str(r.content_id), r.mos, tuple(r.features.as_vector())))


def _fit_stage(X, y, hyper, seed, stacking, cv_seed_offset):
    """Fit one stack member and produce the scores fed to the next stage."""
    norm = Normalizer.fit(X)
    Xn = norm.apply(X)
    if np.ptp(y) == 0.0:
        C, gamma, cv_mse = float(sorted(hyper.C_grid)[0]), float(sorted(hyper.gamma_grid)[0]), 0.0
    else:
        C, gamma, cv_mse = grid_search_cv(Xn, y, hyper, seed=seed)
    base = train_nu_svr(Xn, y, hyper.nu, C, gamma)
    model = replace(base, norm_lo=norm.lo, norm_hi=norm.hi, cv_mse=cv_mse, n_train=X.shape[0])

    if stacking == "in_sample":
        scores = model.predict_batch(X)
    else:
        # Out-of-fold scores: refit with the selected (C, gamma) on each
        # fold complement, predicting the held-out rows.
        n = X.shape[0]
        folds = np.array_split(
            np.random.default_rng(_component_seed(seed, cv_seed_offset)).permutation(n),
            min(hyper.cv_folds, n),
        )
        scores = np.empty(n)
        for fold in folds:
            fold = np.sort(fold)
            tr = np.setdiff1d(np.arange(n), fold, assume_unique=True)
            if np.ptp(y[tr]) == 0.0:
                scores[fold] = y[tr][0]
                continue
            sub = train_nu_svr(Xn[tr], y[tr], hyper.nu, C, gamma)
            scores[fold] = sub.predict_batch(Xn[fold])
    return model, scores


def train_ssqp(data: TrainingSet, hyper: SvrHyperparams = None, seed: int = 0,
               extraction_config: ExtractionConfig = None,
               stacking: str = "in_sample") -> SsqpModel:
    """Train the full stack on precomputed feature rows.

    Stage II/III inputs default to in-sample stage predictions; out-of-fold
    stacking is available for comparison. Deterministic given the seed:
    rows are put in a canonical order and every sub-model derives its own
    fold seed.
    """
    hyper = hyper or SvrHyperparams()
    if stacking not in STACKINGS:
        raise ValueError(f"unknown stacking {stacking!r}, expected one of {STACKINGS}")
    rows = _canonical_rows(data.rows)
    if len({r.content_id for r in rows}) < 2:
        raise ValueError("need at least 2 distinct content_ids")
    if len(rows) < hyper.cv_folds:
        raise ValueError(f"need at least cv_folds={hyper.cv_folds} rows, got {len(rows)}")

    y = np.array([r.mos for r in rows])
    stage1 = {}
    s1 = np.empty((len(rows), len(GROUPS)))
    for gi, g in enumerate(GROUPS):
        Xg = np.stack([r.features.groups[g] for r in rows])
        model, scores = _fit_stage(Xg, y, hyper, _component_seed(seed, gi), stacking, 100 + gi)
        stage1[g] = model
        s1[:, gi] = scores

    stage2_svd, s2_svd = _fit_stage(s1[:, :4], y, hyper, _component_seed(seed, 8), stacking, 108)
    stage2_hist, s2_hist = _fit_stage(s1[:, 4:], y, hyper, _component_seed(seed, 9), stacking, 109)
    s2 = np.column_stack([s2_svd, s2_hist])
    stage3, _ = _fit_stage(s2, y, hyper, _component_seed(seed, 10), stacking, 110)

    cfg = extraction_config
    if cfg is None:
        cfg = ExtractionConfig(mode=rows[0].features.mode)
    return SsqpModel(
        stage1=stage1, stage2_svd=stage2_svd, stage2_hist=stage2_hist, stage3=stage3,
        extraction_config=cfg, stacking=stacking,
    )


def predict_ssqp(model: SsqpModel, ref, test) -> float:
    """Score a reference/test image pair with a trained stack."""
    features = extract_features(ref, test, model.extraction_config)
    return model.predict_from_features(features)


def save_model(model: SsqpModel, path) -> None:
    """Serialize to JSON; floats round-trip exactly via repr."""
    doc = {
        "schema_version": model.schema_version,
        "stacking": model.stacking,
        "extraction_config": model.extraction_config.to_dict(),
        "stage1": {g: model.stage1[g].to_dict() for g in GROUPS},
        "stage2_svd": model.stage2_svd.to_dict(),
        "stage2_hist": model.stage2_hist.to_dict(),
        "stage3": model.stage3.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> SsqpModel:
    """Load a model written by save_model, checking the schema version."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"cannot parse model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise ModelFormatError(f"model file {path} lacks a schema_version")
    version = doc["schema_version"]
    if version != SCHEMA_VERSION:
        raise ModelVersionError(
            f"model schema version {version} is incompatible with this build (reads {SCHEMA_VERSION})"
        )
    try:
        return SsqpModel(
            stage1={g: SvrModel.from_dict(doc["stage1"][g]) for g in GROUPS},
            stage2_svd=SvrModel.from_dict(doc["stage2_svd"]),
            stage2_hist=SvrModel.from_dict(doc["stage2_hist"]),
            stage3=SvrModel.from_dict(doc["stage3"]),
            extraction_config=ExtractionConfig.from_dict(doc["extraction_config"]),
            stacking=doc.get("stacking", "in_sample"),
            schema_version=version,
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"model file {path} is malformed: {exc}") from exc
