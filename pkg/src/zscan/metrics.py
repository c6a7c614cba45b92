"""Confusion matrices and macro-averaged one-vs-rest metrics.

Per class ``i`` the one-vs-rest counts are read off the confusion matrix:
``TP_i`` is the diagonal entry, ``FP_i`` the rest of column ``i``, ``FN_i``
the rest of row ``i`` and ``TN_i`` everything else. Each macro metric is the
unweighted mean over classes. A ratio with a zero denominator counts as 0
and is recorded in the report flags.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfusion, EmptyTrueClass, UnknownLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple[str, ...]
    counts: np.ndarray   # counts[i, j]: true class i predicted as j

    @property
    def total(self):
        return int(self.counts.sum())

    def one_vs_rest(self):
        """Arrays ``(tp, fp, fn, tn)`` indexed by class."""
        c = self.counts
        tp = np.diag(c).astype(float)
        fp = c.sum(axis=0) - tp
        fn = c.sum(axis=1) - tp
        tn = c.sum() - tp - fp - fn
        return tp, fp, fn, tn

    def to_list(self):
        return self.counts.astype(int).tolist()


def confusion(y_true, y_pred, classes) -> ConfusionMatrix:
    classes = tuple(classes)
    idx = {c: i for i, c in enumerate(classes)}
    y_true, y_pred = list(y_true), list(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred differ in length")
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        try:
            counts[idx[t], idx[p]] += 1
        except KeyError as exc:
            raise UnknownLabel(f"label {exc.args[0]!r} not in classes {classes}") from None
    return ConfusionMatrix(classes, counts)


def _ratio_terms(num, den, name, flags):
    out = np.zeros_like(num, dtype=float)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    if flags is not None:
        flags.extend(f"{name}:0/0:class={i}" for i in np.flatnonzero(~ok))
    return out


def _per_class(cm, flags=None):
    tp, fp, fn, tn = cm.one_vs_rest()
    return {
        "precision": _ratio_terms(tp, tp + fp, "precision", flags),
        "recall": _ratio_terms(tp, tp + fn, "recall", flags),
        "specificity": _ratio_terms(tn, tn + fp, "specificity", flags),
        "accuracy_ovr": _ratio_terms(tp + tn, tp + tn + fp + fn, "accuracy", flags),
    }


def precision_macro(cm: ConfusionMatrix, flags=None) -> float:
    tp, fp, _, _ = cm.one_vs_rest()
    return float(_ratio_terms(tp, tp + fp, "precision", flags).mean())


def recall_macro(cm: ConfusionMatrix) -> float:
    tp, _, fn, _ = cm.one_vs_rest()
    if np.any(tp + fn == 0):
        missing = [cm.classes[i] for i in np.flatnonzero(tp + fn == 0)]
        raise EmptyTrueClass(f"no true rows for class(es) {missing}")
    return float((tp / (tp + fn)).mean())


def specificity_macro(cm: ConfusionMatrix, flags=None) -> float:
    if len(cm.classes) < 2:
        raise DegenerateConfusion("specificity needs at least two classes")
    _, fp, _, tn = cm.one_vs_rest()
    return float(_ratio_terms(tn, tn + fp, "specificity", flags).mean())


def accuracy_macro_ovr(cm: ConfusionMatrix) -> float:
    """Mean over classes of one-vs-rest accuracy ``(TP+TN)/total``."""
    tp, fp, fn, tn = cm.one_vs_rest()
    return float(((tp + tn) / (tp + tn + fp + fn)).mean())


def accuracy_overall(cm: ConfusionMatrix) -> float:
    return float(np.trace(cm.counts) / cm.total)


def f1_macro(precision: float, recall: float) -> float:
    s = precision + recall
    return 0.0 if s == 0 else 2.0 * precision * recall / s


METRIC_KEYS = ("precision", "recall", "specificity", "accuracy_macro_ovr", "accuracy_overall", "f1")


@dataclass
class EvaluationReport:
    confusion: ConfusionMatrix
    precision: float
    recall: float
    specificity: float
    accuracy_macro_ovr: float
    accuracy_overall: float
    f1: float
    per_class: dict[str, list[float]] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def classes(self):
        return self.confusion.classes

    def metrics(self):
        return {k: getattr(self, k) for k in METRIC_KEYS}

    def to_dict(self):
        return {
            "classes": list(self.classes),
            "confusion": self.confusion.to_list(),
            "metrics": self.metrics(),
            "per_class": self.per_class,
            "flags": list(self.flags),
            "metadata": self.metadata,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        cm = ConfusionMatrix(tuple(d["classes"]), np.asarray(d["confusion"], dtype=np.int64))
        m = d["metrics"]
        return cls(cm, *(float(m[k]) for k in METRIC_KEYS), per_class=d.get("per_class", {}),
                   flags=list(d.get("flags", [])), metadata=d.get("metadata", {}))


def report_from_confusion(cm: ConfusionMatrix, metadata=None) -> EvaluationReport:
    flags: list[str] = []
    p = precision_macro(cm, flags)
    r = recall_macro(cm)
    s = specificity_macro(cm, flags)
    per = {k: v.tolist() for k, v in _per_class(cm).items()}
    return EvaluationReport(cm, p, r, s, accuracy_macro_ovr(cm), accuracy_overall(cm),
                            f1_macro(p, r), per, flags, dict(metadata or {}))


def evaluate_predictions(y_true, y_pred, classes, metadata=None) -> EvaluationReport:
    if len(y_true) == 0:
        raise ValueError("cannot evaluate an empty test set")
    return report_from_confusion(confusion(y_true, y_pred, classes), metadata)
