"""Aggregation of pairwise-comparison study data into scalar quality scores.

A study yields a matrix of win counts (and ties) over item pairs. Three
aggregators are provided: averaged win counts anchored to the assessor
count, Bradley-Terry maximum-likelihood strengths (MM iteration), and
Thurstone Case-V scale values from inverse-normal win proportions.

Ties count as half-wins for the counting and Bradley-Terry routes and are
excluded from Thurstone proportions.
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

__all__ = [
    "PreferenceMatrix",
    "AggregatedScores",
    "counts_mos",
    "bradley_terry",
    "thurstone_mosteller",
    "aggregate",
    "read_preference_csv",
    "write_scores_csv",
]

_TM_CLAMP = (0.01, 0.99)
_STRENGTH_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class PreferenceMatrix:
    """Pairwise win/tie counts; wins[i, j] = times i was preferred over j."""

    wins: np.ndarray
    ties: np.ndarray
    n_assessors: int

    def __post_init__(self):
        wins = np.asarray(self.wins, dtype=np.int64)
        ties = np.asarray(self.ties, dtype=np.int64)
        if wins.ndim != 2 or wins.shape[0] != wins.shape[1] or wins.shape[0] < 2:
            raise ValueError(f"wins must be square with n >= 2, got {wins.shape}")
        if ties.shape != wins.shape:
            raise ValueError("ties must match wins in shape")
        if (wins < 0).any() or (ties < 0).any():
            raise ValueError("counts must be nonnegative")
        if np.diagonal(wins).any() or np.diagonal(ties).any():
            raise ValueError("diagonal entries must be zero")
        if not np.array_equal(ties, ties.T):
            raise ValueError("ties must be symmetric")
        if self.n_assessors < 1:
            raise ValueError("n_assessors must be positive")
        per_pair = wins + wins.T + ties
        if per_pair.max() > self.n_assessors:
            raise ValueError("a pair records more opinions than there are assessors")
        wins.flags.writeable = False
        ties.flags.writeable = False
        object.__setattr__(self, "wins", wins)
        object.__setattr__(self, "ties", ties)

    @property
    def n_items(self):
        return self.wins.shape[0]


@dataclass(frozen=True, eq=False)
class AggregatedScores:
    counts_mos: np.ndarray
    bt_scores: np.ndarray
    tm_scores: np.ndarray


def counts_mos(p: PreferenceMatrix, scale: float = None) -> np.ndarray:
    """Averaged win credit per item, anchored so a clean sweep scores `scale`.

    Credit is wins plus half the ties; it is divided by the largest
    per-item comparison count and multiplied by `scale` (default: the
    assessor count, matching the 0..n_assessors convention). Items that
    never appeared in a comparison get NaN.
    """
    scale = float(p.n_assessors if scale is None else scale)
    credit = p.wins.sum(axis=1) + 0.5 * p.ties.sum(axis=1)
    comparisons = (p.wins + p.wins.T + p.ties).sum(axis=1)
    missing = comparisons == 0
    if missing.any():
        warnings.warn(f"items {np.nonzero(missing)[0].tolist()} have no comparisons; MOS undefined")
    denom = comparisons.max()
    if denom == 0:
        return np.full(p.n_items, np.nan)
    out = scale * credit / denom
    out[missing] = np.nan
    return out


def _components(active: np.ndarray):
    """Connected components of the comparison graph (boolean adjacency)."""
    n = active.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack = [s]
        seen[s] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in np.nonzero(active[v])[0]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
        comps.append(sorted(comp))
    return comps


def _bt_component(W: np.ndarray, tol: float = 1e-8, max_iter: int = 10000) -> np.ndarray:
    """MM iteration for Bradley-Terry strengths on one connected component."""
    n = W.shape[0]
    if n == 1:
        return np.zeros(1)
    N = W + W.T  # comparisons per pair (tie halves included on both sides)
    pi = np.ones(n)
    for _ in range(max_iter):
        denom = np.zeros(n)
        for i in range(n):
            js = np.nonzero(N[i])[0]
            denom[i] = np.sum(N[i, js] / (pi[i] + pi[js]))
        new = np.where(denom > 0, W.sum(axis=1) / np.maximum(denom, _STRENGTH_FLOOR), pi)
        new = np.maximum(new, _STRENGTH_FLOOR)
        new *= n / new.sum()
        delta = np.max(np.abs(new - pi) / np.maximum(pi, _STRENGTH_FLOOR))
        pi = new
        if delta < tol:
            break
    if (pi <= _STRENGTH_FLOOR * n).any():
        warnings.warn("some items lost every comparison; their strengths sit at the numerical floor")
    logs = np.log(pi)
    return logs - logs.mean()


def bradley_terry(p: PreferenceMatrix) -> np.ndarray:
    """Maximum-likelihood log-strengths, centered to mean 0 per component.

    Ties enter as half-wins on both sides. A disconnected comparison graph
    is fitted per component with a warning (cross-component differences are
    not identified).
    """
    W = p.wins + 0.5 * p.ties
    active = (W + W.T) > 0
    comps = _components(active)
    if len(comps) > 1:
        warnings.warn(f"comparison graph has {len(comps)} components; scores are centered per component")
    out = np.zeros(p.n_items)
    for comp in comps:
        idx = np.asarray(comp)
        out[idx] = _bt_component(W[np.ix_(idx, idx)])
    return out


def thurstone_mosteller(p: PreferenceMatrix) -> np.ndarray:
    """Case-V scale values, centered to mean 0 per component.

    Each decided pair contributes an inverse-normal difference from its win
    proportion (ties excluded from the denominator, proportions clamped to
    [0.01, 0.99]); scale values solve the pairwise differences in least
    squares.
    """
    wins = p.wins.astype(np.float64)
    decided = wins + wins.T
    active = decided > 0
    comps = _components(active)
    if len(comps) > 1:
        warnings.warn(f"comparison graph has {len(comps)} components; scores are centered per component")
    out = np.zeros(p.n_items)
    lo, hi = _TM_CLAMP
    for comp in comps:
        if len(comp) == 1:
            continue
        idx = {item: k for k, item in enumerate(comp)}
        rows, deltas = [], []
        for a in comp:
            for b in comp:
                if a < b and decided[a, b] > 0:
                    prop = np.clip(wins[a, b] / decided[a, b], lo, hi)
                    row = np.zeros(len(comp))
                    row[idx[a]] = 1.0
                    row[idx[b]] = -1.0
                    rows.append(row)
                    deltas.append(ndtri(prop))
        A = np.vstack(rows + [np.ones((1, len(comp)))])
        b_vec = np.asarray(deltas + [0.0])
        sol, *_ = np.linalg.lstsq(A, b_vec, rcond=None)
        out[np.asarray(comp)] = sol - sol.mean()
    return out


def aggregate(p: PreferenceMatrix, scale: float = None) -> AggregatedScores:
    return AggregatedScores(
        counts_mos=counts_mos(p, scale=scale),
        bt_scores=bradley_terry(p),
        tm_scores=thurstone_mosteller(p),
    )


def read_preference_csv(path, n_assessors: int = None):
    """Read pairwise rows (item_i, item_j, wins_ij, wins_ji, ties).

    Items are indexed in order of first appearance. When the assessor count
    is not given it is inferred as the largest per-pair opinion total.
    Returns (item_ids, PreferenceMatrix).
    """
    ids = []
    index = {}
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"item_i", "item_j", "wins_ij", "wins_ji", "ties"}
        have = set(reader.fieldnames or [])
        if not need <= have:
            raise ValueError(f"preference CSV must have columns {sorted(need)}, got {sorted(have)}")
        for rec in reader:
            a, b = rec["item_i"].strip(), rec["item_j"].strip()
            for item in (a, b):
                if item not in index:
                    index[item] = len(ids)
                    ids.append(item)
            rows.append((index[a], index[b], int(rec["wins_ij"]), int(rec["wins_ji"]), int(rec["ties"])))
    n = len(ids)
    if n < 2:
        raise ValueError("preference CSV describes fewer than 2 items")
    wins = np.zeros((n, n), dtype=np.int64)
    ties = np.zeros((n, n), dtype=np.int64)
    for i, j, wij, wji, t in rows:
        if i == j:
            raise ValueError("self-comparisons are not allowed")
        wins[i, j] += wij
        wins[j, i] += wji
        ties[i, j] += t
        ties[j, i] += t
    if n_assessors is None:
        n_assessors = int((wins + wins.T + ties).max())
        if n_assessors < 1:
            raise ValueError("no opinions recorded; cannot infer assessor count")
    return ids, PreferenceMatrix(wins=wins, ties=ties, n_assessors=n_assessors)


def write_scores_csv(path, ids, scores: AggregatedScores) -> None:
    """Write per-item aggregated scores; the MOS column feeds manifests."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item", "mos", "bt_score", "tm_score"])
        for k, item in enumerate(ids):
            writer.writerow([
                item,
                repr(float(scores.counts_mos[k])),
                repr(float(scores.bt_scores[k])),
                repr(float(scores.tm_scores[k])),
            ])
