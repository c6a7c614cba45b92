"""Quadratic discriminant analysis with shrinkage toward a scaled identity."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SingularCovariance, TooFewPerClass


@dataclass(frozen=True)
class QdaModel:
    classes: tuple
    priors: np.ndarray        # (K,)
    means: np.ndarray         # (K, d)
    covariances: np.ndarray   # (K, d, d), already regularised
    reg: float = 1e-3
    _chol: np.ndarray = field(default=None, repr=False, compare=False)
    _logdet: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        chols = []
        for k, S in enumerate(self.covariances):
            try:
                chols.append(np.linalg.cholesky(S))
            except np.linalg.LinAlgError:
                raise SingularCovariance(
                    f"covariance of class {self.classes[k]!r} is not positive definite") from None
        chol = np.array(chols)
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_logdet",
                           2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1))

    @property
    def n_features(self):
        return self.means.shape[1]

    def decision_function(self, X):
        """Per-class log discriminant ``log prior - log|S|/2 - mahalanobis/2``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], len(self.classes)))
        for k in range(len(self.classes)):
            diff = (X - self.means[k]).T
            sol = np.linalg.solve(self._chol[k], diff)
            maha = np.einsum("ij,ij->j", sol, sol)
            out[:, k] = np.log(self.priors[k]) - 0.5 * self._logdet[k] - 0.5 * maha
        return out

    def predict(self, X):
        scores = self.decision_function(X)
        return np.asarray(self.classes, dtype=object)[np.argmax(scores, axis=1)]

    def to_dict(self):
        return {"classes": list(self.classes), "priors": self.priors.tolist(),
                "means": self.means.tolist(), "covariances": self.covariances.tolist(),
                "reg": self.reg}

    @classmethod
    def from_dict(cls, d):
        means = np.asarray(d["means"], dtype=float)
        k, dim = means.shape
        covs = np.asarray(d["covariances"], dtype=float).reshape(k, dim, dim)
        return cls(tuple(d["classes"]), np.asarray(d["priors"], dtype=float), means, covs,
                   float(d["reg"]))


def regularize(cov, reg):
    """``(1 - reg) * cov + reg * trace(cov)/d * I``, with a unit scale when the trace is 0."""
    d = cov.shape[0]
    scale = np.trace(cov) / d
    if not scale > 0:
        scale = 1.0
    return (1.0 - reg) * cov + reg * scale * np.eye(d)


def train_qda(X, y, reg=1e-3, classes=None) -> QdaModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=object)
    if classes is None:
        classes = tuple(dict.fromkeys(y.tolist()))
    if not 0 <= reg <= 1:
        raise ValueError("reg must be in [0, 1]")
    means, covs, priors = [], [], []
    for c in classes:
        Xc = X[y == c]
        if Xc.shape[0] < 2:
            raise TooFewPerClass(f"QDA needs at least two rows of class {c!r}")
        mu = Xc.mean(axis=0)
        D = Xc - mu
        cov = (D.T @ D) / (Xc.shape[0] - 1)
        means.append(mu)
        covs.append(regularize(cov, reg))
        priors.append(Xc.shape[0] / X.shape[0])
    priors = np.asarray(priors)
    return QdaModel(tuple(classes), priors / priors.sum(), np.array(means), np.array(covs), reg)
