"""Dataset manifests and feature-table CSV I/O.

A manifest row names a reference/test image pair, the content it belongs
to, and (optionally) its subjective score. Paths are resolved relative to
the manifest file. Feature tables round-trip the 20 extracted values plus
the identifying columns, with floats written via repr so values survive
exactly.
"""

import csv
import os
from dataclasses import dataclass

import numpy as np

from .pipeline import FEATURE_COLUMNS, FeatureGroupSet
from .boost import TrainingRow, TrainingSet

__all__ = [
    "ManifestRow",
    "DatasetManifest",
    "load_manifest",
    "write_feature_csv",
    "read_feature_csv",
    "feature_rows_to_training_set",
]


@dataclass(frozen=True)
class ManifestRow:
    content_id: str
    ref_path: str
    test_path: str
    mos: float = None
    tags: dict = None


@dataclass(frozen=True)
class DatasetManifest:
    rows: tuple
    base_dir: str = "."

    def __len__(self):
        return len(self.rows)

    def resolve(self, path: str) -> str:
        if os.path.isabs(path):
            return path
        return os.path.normpath(os.path.join(self.base_dir, path))


def _parse_tags(text):
    tags = {}
    for part in filter(None, (text or "").split(";")):
        if "=" not in part:
            raise ValueError(f"malformed tag {part!r}, expected key=value")
        k, v = part.split("=", 1)
        tags[k.strip()] = v.strip()
    return tags


def load_manifest(path, require_mos: bool = False) -> DatasetManifest:
    """Read a dataset manifest CSV (content_id, ref_path, test_path[, mos[, tags]])."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"content_id", "ref_path", "test_path"}
        have = set(reader.fieldnames or [])
        if not need <= have:
            raise ValueError(f"manifest must have columns {sorted(need)}, got {sorted(have)}")
        for i, rec in enumerate(reader):
            content = (rec["content_id"] or "").strip()
            if not content:
                raise ValueError(f"manifest row {i}: empty content_id")
            mos_text = (rec.get("mos") or "").strip()
            if require_mos and not mos_text:
                raise ValueError(f"manifest row {i}: mos required but missing")
            rows.append(ManifestRow(
                content_id=content,
                ref_path=rec["ref_path"].strip(),
                test_path=rec["test_path"].strip(),
                mos=float(mos_text) if mos_text else None,
                tags=_parse_tags(rec.get("tags")),
            ))
    return DatasetManifest(rows=tuple(rows), base_dir=os.path.dirname(os.path.abspath(path)))


_ID_COLUMNS = ("content_id", "test_path", "mos")


def write_feature_csv(path, records) -> None:
    """Write (content_id, test_path, mos, FeatureGroupSet) records."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(_ID_COLUMNS) + list(FEATURE_COLUMNS))
        for content_id, test_path, mos, features in records:
            row = [content_id, test_path, "" if mos is None else repr(float(mos))]
            row.extend(repr(float(v)) for v in features.as_vector())
            writer.writerow(row)


def read_feature_csv(path):
    """Read a feature table back into (content_id, test_path, mos, FeatureGroupSet)."""
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        have = set(reader.fieldnames or [])
        need = set(_ID_COLUMNS) | set(FEATURE_COLUMNS)
        if not need <= have:
            missing = sorted(need - have)
            raise ValueError(f"feature CSV is missing columns {missing}")
        for rec in reader:
            vec = np.array([float(rec[c]) for c in FEATURE_COLUMNS])
            mos_text = (rec.get("mos") or "").strip()
            out.append((
                rec["content_id"],
                rec["test_path"],
                float(mos_text) if mos_text else None,
                FeatureGroupSet.from_vector(vec),
            ))
    return out


def feature_rows_to_training_set(records) -> TrainingSet:
    """Build a TrainingSet from feature records; every row needs a MOS."""
    rows = []
    for content_id, test_path, mos, features in records:
        if mos is None:
            raise ValueError(f"row for {test_path!r} lacks a MOS; cannot train on it")
        rows.append(TrainingRow(features=features, mos=float(mos), content_id=content_id))
    return TrainingSet(rows=rows)
