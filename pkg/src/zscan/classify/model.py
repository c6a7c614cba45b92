"""Trained-classifier bundles: preprocessing chain plus one fitted model."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ..errors import ConfigError, GridMismatch, UnknownModelTag, WidthMismatch
from ..features import PcaModel, Standardizer, apply_standardizer, pca_transform
from ..freqselect import FrequencySelection
from ..metrics import EvaluationReport, evaluate_predictions
from ..rf import LabeledDataset, SweepTrace, feature_matrix, feature_width
from .knn import SubspaceKnnModel, train_subspace_knn
from .qda import QdaModel, train_qda
from .svm import SvmModel, train_svm

MODEL_TAGS = ("qda", "svm-gauss", "svm-quad", "svm-cubic", "subspace-knn")

_MODEL_TYPES = {"qda": QdaModel, "svm-gauss": SvmModel, "svm-quad": SvmModel,
                "svm-cubic": SvmModel, "subspace-knn": SubspaceKnnModel}

_HYPER = {
    "qda": {"reg"},
    "svm-gauss": {"C", "tol", "gamma", "max_iter"},
    "svm-quad": {"C", "tol", "gamma", "coef0", "max_iter"},
    "svm-cubic": {"C", "tol", "gamma", "coef0", "max_iter"},
    "subspace-knn": {"n_learners", "subspace_dim", "k"},
}


def make_trainer(tag, classes, hyper=None, seed=0):
    """A ``trainer(X, y)`` callable for ``tag`` with its hyperparameters bound."""
    if tag not in MODEL_TAGS:
        raise UnknownModelTag(f"unknown model tag {tag!r}; expected one of {MODEL_TAGS}")
    hyper = dict(hyper or {})
    extra = set(hyper) - _HYPER[tag]
    if extra:
        raise ConfigError(f"hyperparameter(s) {sorted(extra)} not valid for {tag}")
    if tag == "qda":
        return partial(train_qda, classes=classes, **hyper)
    if tag == "svm-gauss":
        return partial(train_svm, kernel="gaussian", classes=classes, **hyper)
    if tag in ("svm-quad", "svm-cubic"):
        degree = 2 if tag == "svm-quad" else 3
        return partial(train_svm, kernel="poly", degree=degree, classes=classes, **hyper)
    return partial(train_subspace_knn, classes=classes, seed=seed, **hyper)


@dataclass
class TrainedClassifier:
    """A fitted model and the chain that maps raw sweeps to its inputs.

    raw traces -> feature matrix -> kept frequency columns -> z-scores -> PCA scores -> model
    """

    tag: str
    model: QdaModel | SvmModel | SubspaceKnnModel
    classes: tuple
    representation: str = "impedance_magnitude"
    frequencies: np.ndarray | None = None
    z_ref: float = 50.0
    selection: FrequencySelection | None = None
    standardizer: Standardizer | None = None
    pca: PcaModel | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in MODEL_TAGS:
            raise UnknownModelTag(f"unknown model tag {self.tag!r}")
        width = self.input_width
        if width is not None and self.selection is not None:
            if self.selection.grid_size != width:
                raise WidthMismatch("selection grid size does not match the frequency grid")
        n_sel = self.selection.stage2_count if self.selection is not None else width
        if self.standardizer is not None and n_sel is not None \
                and self.standardizer.n_features != n_sel:
            raise WidthMismatch("standardizer width does not match the selection")
        if self.pca is not None and self.model.n_features != self.pca.n_components:
            raise WidthMismatch("model width does not match the PCA component count")

    @property
    def input_width(self):
        if self.frequencies is None:
            return None
        return feature_width(self.frequencies.size, self.representation)

    def preprocess(self, X):
        """Map a full-grid feature matrix to model inputs."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        width = self.input_width
        if width is not None and X.shape[1] != width:
            raise WidthMismatch(f"expected {width} feature columns, got {X.shape[1]}")
        if self.selection is not None:
            X = X[:, self.selection.kept_indices]
        if self.standardizer is not None:
            X = apply_standardizer(self.standardizer, X)
        if self.pca is not None:
            X = pca_transform(self.pca, X)
        return X

    def _features_of(self, data):
        if isinstance(data, LabeledDataset):
            grid, z_ref = data.frequencies, data.z_ref
        else:
            traces = [data] if isinstance(data, SweepTrace) else list(data)
            data = traces
            grid, z_ref = traces[0].frequencies, traces[0].z_ref
            for t in traces[1:]:
                if not np.array_equal(t.frequencies, grid):
                    raise GridMismatch("traces do not share a frequency grid")
        if self.frequencies is not None and not (
                grid.shape == self.frequencies.shape and np.array_equal(grid, self.frequencies)):
            raise GridMismatch("input frequency grid differs from the training grid")
        if z_ref != self.z_ref:
            raise GridMismatch(f"input z_ref {z_ref} differs from training z_ref {self.z_ref}")
        return feature_matrix(data, self.representation)

    def to_dict(self):
        return {
            "metadata": self.metadata,
            "preprocessing": {
                "representation": self.representation,
                "z_ref": self.z_ref,
                "frequencies": None if self.frequencies is None else self.frequencies.tolist(),
                "selection": None if self.selection is None else self.selection.to_dict(),
                "standardizer": None if self.standardizer is None else self.standardizer.to_dict(),
                "pca": None if self.pca is None else self.pca.to_dict(),
            },
            "model": {"tag": self.tag, "classes": list(self.classes),
                      "parameters": self.model.to_dict()},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        try:
            m, pre = d["model"], d["preprocessing"]
            tag = m["tag"]
        except (KeyError, TypeError):
            raise ConfigError("not a model bundle: missing 'model' or 'preprocessing'") from None
        if tag not in _MODEL_TYPES:
            raise UnknownModelTag(f"unknown model tag {tag!r}")
        model = _MODEL_TYPES[tag].from_dict(m["parameters"])
        freqs = pre.get("frequencies")
        return cls(
            tag=tag,
            model=model,
            classes=tuple(m["classes"]),
            representation=pre.get("representation", "impedance_magnitude"),
            frequencies=None if freqs is None else np.asarray(freqs, dtype=float),
            z_ref=float(pre.get("z_ref", 50.0)),
            selection=None if pre.get("selection") is None
            else FrequencySelection.from_dict(pre["selection"]),
            standardizer=None if pre.get("standardizer") is None
            else Standardizer.from_dict(pre["standardizer"]),
            pca=None if pre.get("pca") is None else PcaModel.from_dict(pre["pca"]),
            metadata=d.get("metadata", {}),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def predict(model: TrainedClassifier, data, preprocessed=False):
    """Predict one label per row.

    ``data`` may be a :class:`LabeledDataset`, trace(s), or a matrix. A
    matrix is taken as a full-grid feature matrix and sent through the stored
    chain, unless ``preprocessed=True`` in which case it goes straight to the
    model.
    """
    if isinstance(data, (LabeledDataset, SweepTrace)) or (
            isinstance(data, (list, tuple)) and data and isinstance(data[0], SweepTrace)):
        Z = model.preprocess(model._features_of(data))
    else:
        X = np.atleast_2d(np.asarray(data, dtype=float))
        if preprocessed:
            if X.shape[1] != model.model.n_features:
                raise WidthMismatch(f"model expects {model.model.n_features} inputs, "
                                    f"got {X.shape[1]}")
            Z = X
        else:
            Z = model.preprocess(X)
    return model.model.predict(Z)


def evaluate(model: TrainedClassifier, test: LabeledDataset, metadata=None) -> EvaluationReport:
    """Apply the stored chain to ``test`` and score the predictions."""
    if len(test) == 0:
        raise ValueError("test set is empty")
    meta = {"model": model.tag}
    meta.update(metadata or {})
    return evaluate_predictions(test.labels, predict(model, test), model.classes, meta)
