"""Kernel support vector machines trained by sequential minimal optimisation.

Binary problems are solved in the dual with a two-variable working set chosen
by second-order information; the loop stops once the maximal KKT violation
``max_{I_up} -y G - min_{I_low} -y G`` drops to ``tol``. Multiclass problems
use one-vs-one voting.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..errors import ConfigError, NonConvergence

KERNELS = ("gaussian", "poly")
TAU = 1e-12


def kernel_matrix(A, B, kernel="gaussian", gamma=1.0, degree=3, coef0=1.0):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if kernel == "gaussian":
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
        return np.exp(-gamma * np.maximum(sq, 0.0))
    if kernel == "poly":
        return (gamma * (A @ B.T) + coef0) ** degree
    raise ConfigError(f"unknown kernel {kernel!r}")


def default_gamma(X):
    """``1 / (d * var(X))``, falling back to ``1/d`` for constant input."""
    X = np.asarray(X, dtype=float)
    v = X.var()
    return 1.0 / (X.shape[1] * v) if v > 0 else 1.0 / X.shape[1]


def smo(K, y, C=1.0, tol=1e-3, max_iter=None):
    """Solve ``min 1/2 a'Qa - sum(a)`` s.t. ``0 <= a <= C``, ``y'a = 0``.

    ``Q = y y' * K``. Returns ``(alpha, bias, gap, n_iter)`` where ``gap`` is
    the final maximal violating-pair gap.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if max_iter is None:
        max_iter = max(100_000, 100 * n)
    alpha = np.zeros(n)
    G = -np.ones(n)
    Kd = np.diag(K).copy()
    pos = y > 0
    gap = np.inf
    for it in range(max_iter + 1):
        at_lo = alpha <= 0.0
        at_hi = alpha >= C
        up = (pos & ~at_hi) | (~pos & ~at_lo)
        low = (pos & ~at_lo) | (~pos & ~at_hi)
        v = -y * G
        v_up = np.where(up, v, -np.inf)
        i = int(np.argmax(v_up))
        g_max = v_up[i]
        g_min = np.min(np.where(low, v, np.inf))
        gap = g_max - g_min
        if gap <= tol:
            break
        if it == max_iter:
            raise NonConvergence(f"SMO did not converge in {max_iter} iterations "
                                 f"(KKT gap {gap:.3g} > {tol:g})", residual=float(gap))
        b = g_max - v
        cand = low & (b > 0)
        a = Kd[i] + Kd - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        obj = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))

        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = Kd[i] + Kd[j] - 2.0 * K[i, j]
            quad = quad if quad > 0 else TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = Kd[i] + Kd[j] - 2.0 * K[i, j]
            quad = quad if quad > 0 else TAU
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        G += y * (y[i] * K[i] * (ai - ai_old) + y[j] * K[j] * (aj - aj_old))

    v = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(v[free].mean())
    else:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        bias = 0.5 * (float(np.max(np.where(up, v, -np.inf))) + float(np.min(np.where(low, v, np.inf))))
    return alpha, bias, float(gap), it


def kkt_residuals(alpha, y, margins, C):
    """Per-sample KKT violation in units of the functional margin ``y f(x)``."""
    alpha = np.asarray(alpha)
    m = np.asarray(y) * np.asarray(margins)
    r = np.abs(m - 1.0)
    r = np.where(alpha <= 0, np.maximum(0.0, 1.0 - m), r)
    r = np.where(alpha >= C, np.maximum(0.0, m - 1.0), r)
    return r


@dataclass(frozen=True)
class BinarySvm:
    positive: str
    negative: str
    support_vectors: np.ndarray
    coef: np.ndarray          # alpha_i * y_i for each support vector
    bias: float
    gap: float

    def decision(self, K_sv):
        """Decision values from a kernel block ``K(support_vectors, X)``."""
        return self.coef @ K_sv + self.bias


@dataclass(frozen=True)
class SvmModel:
    classes: tuple
    kernel: str
    gamma: float
    degree: int
    coef0: float
    C: float
    tol: float
    machines: tuple[BinarySvm, ...]

    @property
    def n_features(self):
        return self.machines[0].support_vectors.shape[1]

    def _kernel(self, A, B):
        return kernel_matrix(A, B, self.kernel, self.gamma, self.degree, self.coef0)

    def pair_decisions(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([m.decision(self._kernel(m.support_vectors, X)) for m in self.machines])

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        idx = {c: k for k, c in enumerate(self.classes)}
        votes = np.zeros((X.shape[0], len(self.classes)))
        strength = np.zeros_like(votes)
        rows = np.arange(X.shape[0])
        for m, f in zip(self.machines, self.pair_decisions(X)):
            winner = np.where(f > 0, idx[m.positive], idx[m.negative])
            votes[rows, winner] += 1
            strength[rows, winner] += np.abs(f)
        out = np.empty(X.shape[0], dtype=np.intp)
        for r in rows:
            tied = np.flatnonzero(votes[r] == votes[r].max())
            out[r] = tied[np.argmax(strength[r, tied])]  # argmax keeps class order on ties
        return np.asarray(self.classes, dtype=object)[out]

    def to_dict(self):
        return {
            "classes": list(self.classes), "kernel": self.kernel, "gamma": self.gamma,
            "degree": self.degree, "coef0": self.coef0, "C": self.C, "tol": self.tol,
            "machines": [{"positive": m.positive, "negative": m.negative,
                          "support_vectors": m.support_vectors.tolist(),
                          "coef": m.coef.tolist(), "bias": m.bias, "gap": m.gap}
                         for m in self.machines],
        }

    @classmethod
    def from_dict(cls, d):
        machines = []
        for m in d["machines"]:
            sv = np.asarray(m["support_vectors"], dtype=float)
            machines.append(BinarySvm(m["positive"], m["negative"],
                                      sv.reshape(len(m["coef"]), -1),
                                      np.asarray(m["coef"], dtype=float), float(m["bias"]),
                                      float(m["gap"])))
        return cls(tuple(d["classes"]), d["kernel"], float(d["gamma"]), int(d["degree"]),
                   float(d["coef0"]), float(d["C"]), float(d["tol"]), tuple(machines))


def train_binary(X, y_pm, C=1.0, tol=1e-3, kernel="gaussian", gamma=1.0, degree=3, coef0=1.0,
                 max_iter=None, positive="+1", negative="-1"):
    """Train one +1/-1 machine; zero-weight training points are dropped."""
    X = np.asarray(X, dtype=float)
    y_pm = np.asarray(y_pm, dtype=float)
    K = kernel_matrix(X, X, kernel, gamma, degree, coef0)
    alpha, bias, gap, _ = smo(K, y_pm, C, tol, max_iter)
    sv = alpha > 0
    return BinarySvm(positive, negative, X[sv], (alpha * y_pm)[sv], bias, gap)


def train_svm(X, y, kernel="gaussian", C=1.0, tol=1e-3, gamma=None, degree=3, coef0=1.0,
              max_iter=None, classes=None) -> SvmModel:
    """One-vs-one kernel SVM.

    ``kernel='gaussian'`` uses ``exp(-gamma |x - z|^2)``; ``kernel='poly'``
    uses ``(gamma x.z + coef0) ** degree``. ``gamma=None`` means
    ``1 / (d * var(X))`` on the training matrix.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=object)
    if kernel not in KERNELS:
        raise ConfigError(f"kernel must be one of {KERNELS}")
    if not C > 0 or not tol > 0:
        raise ConfigError("C and tol must be positive")
    if classes is None:
        classes = tuple(dict.fromkeys(y.tolist()))
    present = [c for c in classes if np.any(y == c)]
    if len(present) < 2:
        raise ConfigError("SVM training needs at least two classes")
    g = default_gamma(X) if gamma is None else float(gamma)
    machines = []
    for a, b in combinations(present, 2):
        rows = (y == a) | (y == b)
        y_pm = np.where(y[rows] == a, 1.0, -1.0)
        machines.append(train_binary(X[rows], y_pm, C, tol, kernel, g, degree, coef0, max_iter,
                                     positive=a, negative=b))
    return SvmModel(tuple(classes), kernel, g, int(degree), float(coef0), float(C), float(tol),
                    tuple(machines))
