"""Random-subspace ensemble of k-nearest-neighbour learners."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class SubspaceKnnModel:
    classes: tuple
    k: int
    subspaces: np.ndarray     # (n_learners, subspace_dim) feature indices
    X_train: np.ndarray
    y_train: np.ndarray       # integer positions into ``classes``
    seed: int

    @property
    def n_features(self):
        return self.X_train.shape[1]

    @property
    def n_learners(self):
        return self.subspaces.shape[0]

    def learner_votes(self, X, chunk=256):
        """Class index voted by every learner, shape ``(n_learners, n_rows)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n_cls = len(self.classes)
        out = np.empty((self.n_learners, X.shape[0]), dtype=np.intp)
        for li, sub in enumerate(self.subspaces):
            A, B = X[:, sub], self.X_train[:, sub]
            for s in range(0, X.shape[0], chunk):
                diff = A[s:s + chunk, None, :] - B[None, :, :]
                d2 = np.einsum("ijk,ijk->ij", diff, diff)
                # stable sort: equal distances resolve to the lower training row
                nn = np.argsort(d2, axis=1, kind="stable")[:, :self.k]
                lab = self.y_train[nn]
                counts = np.zeros((lab.shape[0], n_cls), dtype=np.intp)
                np.add.at(counts, (np.arange(lab.shape[0])[:, None], lab), 1)
                out[li, s:s + chunk] = np.argmax(counts, axis=1)
        return out

    def predict(self, X):
        votes = self.learner_votes(X)
        tally = np.zeros((votes.shape[1], len(self.classes)), dtype=np.intp)
        np.add.at(tally, (np.broadcast_to(np.arange(votes.shape[1]), votes.shape), votes), 1)
        return np.asarray(self.classes, dtype=object)[np.argmax(tally, axis=1)]

    def to_dict(self):
        return {"classes": list(self.classes), "k": self.k, "seed": self.seed,
                "subspaces": self.subspaces.tolist(), "X_train": self.X_train.tolist(),
                "y_train": self.y_train.tolist()}

    @classmethod
    def from_dict(cls, d):
        X = np.asarray(d["X_train"], dtype=float).reshape(len(d["y_train"]), -1)
        return cls(tuple(d["classes"]), int(d["k"]), np.asarray(d["subspaces"], dtype=np.intp),
                   X, np.asarray(d["y_train"], dtype=np.intp), int(d["seed"]))


def train_subspace_knn(X, y, n_learners=30, subspace_dim=None, k=1, seed=0,
                       classes=None) -> SubspaceKnnModel:
    """Each learner sees ``subspace_dim`` distinct features drawn from a seeded stream."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=object)
    d = X.shape[1]
    if subspace_dim is None:
        subspace_dim = math.ceil(d / 2)
    if not 1 <= subspace_dim <= d:
        raise ConfigError(f"subspace_dim must be in [1, {d}], got {subspace_dim}")
    if n_learners < 1 or not 1 <= k <= X.shape[0]:
        raise ConfigError("need n_learners >= 1 and 1 <= k <= n_train")
    if classes is None:
        classes = tuple(dict.fromkeys(y.tolist()))
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        codes = np.array([lookup[v] for v in y], dtype=np.intp)
    except KeyError as exc:
        raise ConfigError(f"label {exc.args[0]!r} not in classes") from None
    rng = np.random.default_rng(seed)
    subs = np.array([np.sort(rng.choice(d, size=subspace_dim, replace=False))
                     for _ in range(n_learners)], dtype=np.intp)
    return SubspaceKnnModel(tuple(classes), int(k), subs, X.copy(), codes, int(seed))
