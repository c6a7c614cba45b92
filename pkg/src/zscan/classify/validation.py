"""Stratified train/test splitting and k-fold cross-validation."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import ConfigError, TooFewPerClass
from ..metrics import METRIC_KEYS, EvaluationReport, evaluate_predictions


def workers():
    """Worker cap from ``ZSCAN_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("ZSCAN_THREADS", "1")))
    except ValueError:
        return 1


def _round_half_up(fraction, n):
    return math.floor(Fraction(str(fraction)) * n + Fraction(1, 2))


def stratified_split_indices(labels, test_fraction=0.30, seed=0, classes=None):
    """Return ``(train_rows, test_rows)``, each sorted ascending."""
    labels = np.asarray(labels, dtype=object)
    if not 0 < test_fraction < 1:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if classes is None:
        classes = tuple(dict.fromkeys(labels.tolist()))
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in classes:
        rows = np.flatnonzero(labels == c)
        if rows.size < 2:
            raise TooFewPerClass(f"class {c!r} has {rows.size} observation(s); need >= 2")
        n_test = _round_half_up(test_fraction, rows.size)
        if n_test < 1 or n_test >= rows.size:
            raise TooFewPerClass(f"class {c!r}: {rows.size} rows cannot give both a train "
                                 f"and a test part at fraction {test_fraction}")
        perm = rng.permutation(rows)
        test.append(perm[:n_test])
        train.append(perm[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split_train_test(dataset, test_fraction=0.30, seed=0):
    tr, te = stratified_split_indices(dataset.labels, test_fraction, seed, dataset.classes)
    return dataset.subset(tr), dataset.subset(te)


def stratified_folds(labels, folds=5, seed=0, classes=None):
    """Fold id per row; every class is spread round-robin over the folds."""
    labels = np.asarray(labels, dtype=object)
    if int(folds) != folds or folds < 2:
        raise ConfigError("cross-validation needs folds >= 2")
    if classes is None:
        classes = tuple(dict.fromkeys(labels.tolist()))
    rng = np.random.default_rng(seed)
    fold_of = np.full(labels.size, -1, dtype=np.intp)
    offset = 0
    for c in classes:
        rows = np.flatnonzero(labels == c)
        if rows.size < folds:
            raise TooFewPerClass(f"class {c!r} has {rows.size} rows, fewer than {folds} folds")
        perm = rng.permutation(rows)
        fold_of[perm] = (np.arange(perm.size) + offset) % folds
        offset = (offset + perm.size) % folds
    if np.any(fold_of < 0):
        raise ConfigError("some rows carry labels outside the class roster")
    return fold_of


@dataclass
class CrossValidationResult:
    fold_reports: list[EvaluationReport]
    aggregate: dict[str, float]
    fold_of: np.ndarray

    def to_dict(self):
        return {"folds": [r.to_dict() for r in self.fold_reports], "aggregate": self.aggregate}


def cross_validate(X, y, trainer, folds=5, seed=0, classes=None, metadata=None):
    """Stratified k-fold CV.

    ``trainer(X_train, y_train)`` must return an object with ``predict``.
    The aggregate is the unweighted mean of each fold's metrics.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=object)
    if classes is None:
        classes = tuple(dict.fromkeys(y.tolist()))
    fold_of = stratified_folds(y, folds, seed, classes)

    def run(k):
        tr, te = fold_of != k, fold_of == k
        model = trainer(X[tr], y[tr])
        meta = dict(metadata or {}, fold=int(k))
        return evaluate_predictions(y[te], model.predict(X[te]), classes, meta)

    with ThreadPoolExecutor(max_workers=workers()) as pool:
        reports = list(pool.map(run, range(folds)))
    agg = {key: float(np.mean([getattr(r, key) for r in reports])) for key in METRIC_KEYS}
    return CrossValidationResult(reports, agg, fold_of)
