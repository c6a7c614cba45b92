"""End-to-end orchestration: split, select, reduce, cross-validate, fit, test."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .classify.model import MODEL_TAGS, TrainedClassifier, evaluate, make_trainer
from .classify.validation import CrossValidationResult, cross_validate, stratified_split_indices
from .errors import ConfigError
from .features import apply_standardizer, fit_pca, fit_standardizer, pca_transform
from .freqselect import POLICIES, FrequencySelection, select_frequencies
from .metrics import EvaluationReport
from .rf import REPRESENTATIONS, LabeledDataset, feature_matrix

STAGES = {"simulate": 0, "split": 1, "cv": 2, "ensemble": 3}


def derive_seed(root, stage) -> int:
    """Independent 32-bit seed for one pipeline stage, derived from the root seed."""
    ss = np.random.SeedSequence(int(root), spawn_key=(STAGES[stage],))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass
class PipelineConfig:
    representation: str = "impedance_magnitude"
    policy: str = "both"
    top_fraction: float = 0.20
    rel_threshold: float = 0.70
    max_corr: float = 0.90
    aggregate: str = "max"
    select_on: str = "train"          # "train" or "all" (whole-dataset selection)
    variance_target: float = 0.95
    standardize: bool = True
    model: str = "svm-gauss"
    hyper: dict = field(default_factory=dict)
    test_fraction: float = 0.30
    folds: int = 5
    seed: int = 0

    def validate(self):
        if self.representation not in REPRESENTATIONS:
            raise ConfigError(f"representation must be one of {REPRESENTATIONS}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}")
        if not 0 < self.top_fraction <= 1 or not 0 < self.rel_threshold <= 1:
            raise ConfigError("top_fraction and rel_threshold must be in (0, 1]")
        if not self.max_corr > 0:
            raise ConfigError("max_corr must be positive")
        if self.select_on not in ("train", "all"):
            raise ConfigError("select_on must be 'train' or 'all'")
        if not 0 < self.variance_target <= 1:
            raise ConfigError("variance_target must be in (0, 1]")
        if self.model not in MODEL_TAGS:
            raise ConfigError(f"model must be one of {MODEL_TAGS}")
        if int(self.folds) != self.folds or self.folds < 2:
            raise ConfigError("folds must be an integer >= 2")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must be in (0, 1)")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        return self

    def digest(self):
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class PipelineResult:
    classifier: TrainedClassifier
    selection: FrequencySelection
    cv: CrossValidationResult
    test: EvaluationReport

    def report_dict(self):
        return {
            "model": self.classifier.tag,
            "classes": list(self.classifier.classes),
            "selection": {"summary": self.selection.summary(),
                          "stage1_count": self.selection.stage1_count,
                          "stage2_count": self.selection.stage2_count},
            "n_components": None if self.classifier.pca is None
            else self.classifier.pca.n_components,
            "cv": self.cv.to_dict(),
            "test": self.test.to_dict(),
            "metadata": self.classifier.metadata,
        }

    def report_json(self):
        return json.dumps(self.report_dict(), indent=2, sort_keys=True)


def split_rows(dataset: LabeledDataset, cfg: PipelineConfig):
    return stratified_split_indices(dataset.labels, cfg.test_fraction,
                                    derive_seed(cfg.seed, "split"), dataset.classes)


def run_selection(dataset, cfg: PipelineConfig, features=None, train_rows=None):
    """Frequency selection on the training rows (or every row if ``select_on='all'``)."""
    X = feature_matrix(dataset, cfg.representation) if features is None else features
    if cfg.select_on == "all":
        rows = np.arange(len(dataset))
        split = {"on": "all"}
    else:
        rows = split_rows(dataset, cfg)[0] if train_rows is None else train_rows
        split = {"on": "train", "test_fraction": cfg.test_fraction, "seed": cfg.seed}
    return select_frequencies(X[rows], dataset.labels[rows], dataset.classes, cfg.policy,
                              cfg.top_fraction, cfg.rel_threshold, cfg.max_corr, cfg.aggregate,
                              cfg.representation, split)


def train_pipeline(dataset: LabeledDataset, cfg: PipelineConfig | None = None,
                   selection: FrequencySelection | None = None) -> PipelineResult:
    """Train and score one classifier on ``dataset``.

    The held-out split is never used for fitting: selection, standardiser and
    PCA are learned on the training rows, cross-validation runs on them, and
    the final model (fit on all training rows) is scored once on the test rows.
    """
    cfg = (cfg or PipelineConfig()).validate()
    X = feature_matrix(dataset, cfg.representation)
    train_rows, test_rows = split_rows(dataset, cfg)
    if selection is None:
        selection = run_selection(dataset, cfg, X, train_rows)
    elif selection.grid_size != X.shape[1]:
        raise ConfigError(f"selection was made on {selection.grid_size} columns, "
                          f"dataset has {X.shape[1]}")
    Xtr = X[train_rows][:, selection.kept_indices]
    ytr = dataset.labels[train_rows]
    std = fit_standardizer(Xtr) if cfg.standardize else None
    Ztr = apply_standardizer(std, Xtr) if std is not None else Xtr
    pca = fit_pca(Ztr, cfg.variance_target)
    Ptr = pca_transform(pca, Ztr)

    ens_seed = derive_seed(cfg.seed, "ensemble")
    trainer = make_trainer(cfg.model, dataset.classes, cfg.hyper, seed=ens_seed)
    meta = {"model": cfg.model, "split_seed": cfg.seed}
    cv = cross_validate(Ptr, ytr, trainer, cfg.folds, derive_seed(cfg.seed, "cv"),
                        dataset.classes, meta)
    final = trainer(Ptr, ytr)
    clf = TrainedClassifier(
        tag=cfg.model, model=final, classes=dataset.classes,
        representation=cfg.representation, frequencies=np.array(dataset.frequencies),
        z_ref=dataset.z_ref, selection=selection, standardizer=std, pca=pca,
        metadata={
            "seed": cfg.seed,
            "test_fraction": cfg.test_fraction,
            "folds": cfg.folds,
            "hyper": cfg.hyper,
            "config_hash": cfg.digest(),
            "n_train": int(train_rows.size),
            "n_test": int(test_rows.size),
            "zscan_version": __version__,
        })
    test = evaluate(clf, dataset.subset(test_rows), {"split_seed": cfg.seed})
    return PipelineResult(clf, selection, cv, test)


def evaluate_bundle(clf: TrainedClassifier, dataset: LabeledDataset, subset="all"):
    """Score a stored bundle. ``subset`` re-derives the bundle's own split."""
    if subset not in ("all", "train", "test"):
        raise ConfigError("subset must be 'all', 'train' or 'test'")
    if tuple(dataset.classes) != tuple(clf.classes):
        unknown = set(dataset.classes) - set(clf.classes)
        if unknown:
            raise ConfigError(f"dataset has classes unknown to the model: {sorted(unknown)}")
        dataset = LabeledDataset(dataset.frequencies, dataset.gamma, dataset.labels,
                                 clf.classes, dataset.z_ref, dataset.sources)
    meta = {}
    if subset != "all":
        seed = int(clf.metadata["seed"])
        tr, te = stratified_split_indices(dataset.labels, clf.metadata["test_fraction"],
                                          derive_seed(seed, "split"), dataset.classes)
        dataset = dataset.subset(te if subset == "test" else tr)
        meta = {"split_seed": seed}
    return evaluate(clf, dataset, meta)
