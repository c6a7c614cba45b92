"""Column standardisation and covariance-eigendecomposition PCA."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WidthMismatch

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @property
    def n_features(self):
        return self.mean.size

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["std"], dtype=float))


def fit_standardizer(train) -> Standardizer:
    X = np.asarray(train, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("standardizer needs a 2-D matrix with at least two rows")
    return Standardizer(X.mean(axis=0), np.maximum(X.std(axis=0, ddof=1), STD_FLOOR))


def apply_standardizer(s: Standardizer, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != s.n_features:
        raise WidthMismatch(f"expected {s.n_features} columns, got {X.shape}")
    return (X - s.mean) / s.std


@dataclass(frozen=True)
class PcaModel:
    """Leading principal axes of a training matrix.

    ``components`` has one orthonormal row per retained axis, ordered by
    decreasing explained variance.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    variance_target: float

    @property
    def n_components(self):
        return self.components.shape[0]

    @property
    def n_features(self):
        return self.mean.size

    def to_dict(self):
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "variance_target": self.variance_target,
        }

    @classmethod
    def from_dict(cls, d):
        comps = np.asarray(d["components"], dtype=float)
        return cls(np.asarray(d["mean"], dtype=float),
                   comps.reshape(len(d["components"]), -1),
                   np.asarray(d["explained_variance"], dtype=float),
                   np.asarray(d["explained_variance_ratio"], dtype=float),
                   float(d["variance_target"]))


def fit_pca(train, variance_target=0.95) -> PcaModel:
    """Fit PCA by eigendecomposition of the sample covariance.

    Keeps the fewest leading components whose cumulative explained-variance
    ratio reaches ``variance_target``. Each component is signed so that its
    largest-magnitude entry is positive.
    """
    X = np.asarray(train, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("PCA needs a 2-D matrix with at least two rows")
    if not 0 < variance_target <= 1:
        raise ValueError("variance_target must be in (0, 1]")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = (Xc.T @ Xc) / (X.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    evals = np.clip(evals[::-1], 0.0, None)
    evecs = evecs[:, ::-1].T
    total = evals.sum()
    if total == 0:
        # constant data: a single arbitrary axis carries all (zero) variance
        ratios = np.zeros_like(evals)
        ratios[0] = 1.0
    else:
        ratios = evals / total
    cum = np.cumsum(ratios)
    hit = np.flatnonzero(cum >= variance_target)
    k = int(hit[0]) + 1 if hit.size else evals.size
    comps = evecs[:k].copy()
    lead = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(k), lead])
    comps *= np.where(signs == 0, 1.0, signs)[:, None]
    return PcaModel(mean, comps, evals[:k], ratios[:k], float(variance_target))


def pca_transform(model: PcaModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise WidthMismatch(f"expected {model.n_features} columns, got {X.shape}")
    return (X - model.mean) @ model.components.T


def pca_reconstruct(model: PcaModel, scores) -> np.ndarray:
    return model.mean + np.asarray(scores) @ model.components
