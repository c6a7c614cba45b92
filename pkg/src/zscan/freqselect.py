"""Two-stage frequency-point selection.

Stage 1 scores every frequency column by how strongly it correlates with
class membership (max over classes of ``|pearson(column, one-vs-rest
indicator)|``) and keeps the most relevant ones. Stage 2 walks those
candidates in descending relevance and greedily drops any column that is
too correlated with a column already kept.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySelection, SingleClass, ZeroVariance

POLICIES = ("top_fraction", "rel_threshold", "both")


def pearson(x, y) -> float:
    """Sample Pearson correlation, clamped to ``[-1, 1]``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("pearson needs two 1-D vectors of equal length")
    if x.size < 2:
        raise ValueError("pearson needs at least two observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0 or np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ZeroVariance("pearson is undefined for a constant vector")
    return min(1.0, max(-1.0, float(xc @ yc) / (sx * sy)))


def _unit_columns(X):
    """Centre and L2-normalise columns; constant columns become zero vectors."""
    Xc = X - X.mean(axis=0)
    norm = np.sqrt(np.einsum("ij,ij->j", Xc, Xc))
    const = (norm == 0) | (np.ptp(X, axis=0) == 0)
    return Xc / np.where(const, 1.0, norm), const


@dataclass(frozen=True)
class RelevanceScores:
    scores: np.ndarray     # per column, in [0, 1]
    argmax: np.ndarray     # index into ``classes``
    classes: tuple[str, ...]


def class_relevance(features, labels, classes=None, aggregate="max") -> RelevanceScores:
    """Score each column by its correlation with one-vs-rest class indicators.

    ``aggregate='min'`` scores a column by its weakest class correlation
    instead of its strongest. Constant columns score 0.
    """
    X = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != labels.shape[0]:
        raise ValueError("features must be (n_rows, n_columns) with one label per row")
    if X.shape[0] < 2:
        raise ValueError("need at least two rows")
    if classes is None:
        classes = tuple(dict.fromkeys(labels.tolist()))
    present = [c for c in classes if np.any(labels == c)]
    if len(present) < 2:
        raise SingleClass("relevance needs at least two classes present")
    U, const = _unit_columns(X)
    per_class = np.zeros((len(classes), X.shape[1]))
    for k, c in enumerate(classes):
        ind = (labels == c).astype(float)
        if ind.min() == ind.max():
            continue
        ind -= ind.mean()
        ind /= np.linalg.norm(ind)
        per_class[k] = np.abs(ind @ U)
    per_class[:, const] = 0.0
    np.clip(per_class, 0.0, 1.0, out=per_class)
    if aggregate == "max":
        arg = per_class.argmax(axis=0)
    elif aggregate == "min":
        rows = [k for k, c in enumerate(classes) if c in present]
        arg = np.asarray(rows)[per_class[rows].argmin(axis=0)]
    else:
        raise ValueError("aggregate must be 'max' or 'min'")
    scores = per_class[arg, np.arange(X.shape[1])]
    return RelevanceScores(scores, arg, tuple(classes))


def select_relevant(scores, policy="both", top_fraction=0.20, rel_threshold=0.70) -> np.ndarray:
    """Indices passing the relevance policy, ordered by descending score.

    Ties are broken toward the lower frequency index.
    """
    s = np.asarray(scores.scores if isinstance(scores, RelevanceScores) else scores, dtype=float)
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}")
    m = s.size
    order = np.lexsort((np.arange(m), -s))
    keep = np.ones(m, dtype=bool)
    if policy in ("top_fraction", "both"):
        if not 0 < top_fraction <= 1:
            raise ValueError("top_fraction must be in (0, 1]")
        n_top = min(m, math.ceil(top_fraction * m - 1e-9))
        top = np.zeros(m, dtype=bool)
        top[order[:n_top]] = True
        keep &= top
    if policy in ("rel_threshold", "both"):
        if not 0 < rel_threshold <= 1:
            raise ValueError("rel_threshold must be in (0, 1]")
        keep &= s >= rel_threshold * s.max()
    result = order[keep[order]]
    if result.size == 0:
        raise EmptySelection("no frequency passed the relevance policy")
    return result


@dataclass(frozen=True)
class FrequencySelection:
    kept_indices: np.ndarray
    stage1_count: int
    grid_size: int
    max_corr: float
    policy: str = "both"
    top_fraction: float | None = 0.20
    rel_threshold: float | None = 0.70
    kept_scores: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kept_argmax: tuple[str, ...] = ()
    representation: str = "impedance_magnitude"
    split: dict | None = None   # how the selection rows were chosen

    @property
    def stage2_count(self):
        return int(self.kept_indices.size)

    def summary(self):
        pct = 100.0 * self.stage2_count / self.grid_size
        return f"kept {self.stage2_count} of {self.grid_size} ({pct:.2f}%)"

    def to_dict(self):
        return {
            "policy": self.policy,
            "top_fraction": self.top_fraction,
            "rel_threshold": self.rel_threshold,
            "max_corr": self.max_corr,
            "representation": self.representation,
            "grid_size": self.grid_size,
            "stage1_count": self.stage1_count,
            "stage2_count": self.stage2_count,
            "kept": [{"index": int(i), "score": float(s), "argmax_class": a}
                     for i, s, a in zip(self.kept_indices, self.kept_scores, self.kept_argmax)],
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, d):
        kept = d["kept"]
        return cls(
            kept_indices=np.array([k["index"] for k in kept], dtype=np.intp),
            stage1_count=int(d["stage1_count"]),
            grid_size=int(d["grid_size"]),
            max_corr=float(d["max_corr"]),
            policy=d.get("policy", "both"),
            top_fraction=d.get("top_fraction"),
            rel_threshold=d.get("rel_threshold"),
            kept_scores=np.array([k.get("score", np.nan) for k in kept], dtype=float),
            kept_argmax=tuple(k.get("argmax_class", "") for k in kept),
            representation=d.get("representation", "impedance_magnitude"),
            split=d.get("split"),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def prune_redundant(features, candidates, max_corr=0.90):
    """Greedy redundancy pruning over ``candidates`` (descending relevance).

    A candidate is kept iff its ``|pearson|`` with every column kept so far
    is below ``max_corr``. Returns the kept indices sorted ascending.
    """
    X = np.asarray(features, dtype=float)
    cand = np.asarray(candidates, dtype=np.intp)
    if cand.size == 0:
        raise EmptySelection("no candidates to prune")
    if max_corr > 1.0:
        return np.sort(cand)
    U, _ = _unit_columns(X[:, cand])
    blocked = np.zeros(cand.size, dtype=bool)
    kept = []
    for pos in range(cand.size):
        if blocked[pos]:
            continue
        kept.append(cand[pos])
        r = np.abs(U[:, pos] @ U)
        blocked |= r >= max_corr
    return np.sort(np.asarray(kept, dtype=np.intp))


def select_frequencies(features, labels, classes=None, policy="both", top_fraction=0.20,
                       rel_threshold=0.70, max_corr=0.90, aggregate="max",
                       representation="impedance_magnitude", split=None) -> FrequencySelection:
    """Run both selection stages on ``features`` and package the result."""
    rel = class_relevance(features, labels, classes, aggregate=aggregate)
    cand = select_relevant(rel, policy, top_fraction, rel_threshold)
    kept = prune_redundant(features, cand, max_corr)
    return FrequencySelection(
        kept_indices=kept,
        stage1_count=int(cand.size),
        grid_size=int(np.asarray(features).shape[1]),
        max_corr=float(max_corr),
        policy=policy,
        top_fraction=top_fraction if policy != "rel_threshold" else None,
        rel_threshold=rel_threshold if policy != "top_fraction" else None,
        kept_scores=rel.scores[kept],
        kept_argmax=tuple(rel.classes[a] for a in rel.argmax[kept]),
        representation=representation,
        split=split,
    )


def verify_selection(features, kept_indices, max_corr):
    """Recompute every kept pair with :func:`pearson`; return the worst ``|r|``."""
    X = np.asarray(features, dtype=float)
    worst = 0.0
    kept = list(kept_indices)
    for a in range(len(kept)):
        for b in range(a + 1, len(kept)):
            try:
                r = abs(pearson(X[:, kept[a]], X[:, kept[b]]))
            except ZeroVariance:
                r = 0.0
            worst = max(worst, r)
    return worst
