"""Reflection/impedance arithmetic and the sweep containers.

All conversions use the one-port relation between a load impedance ``Z`` and
its reflection coefficient ``tau`` measured against a real reference
impedance ``z_ref``::

    Z = z_ref * (1 + tau) / (1 - tau)
    tau = (Z - z_ref) / (Z + z_ref)
"""
from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DatasetFormatError,
    DegenerateLoad,
    GridMismatch,
    NearOpenCircuit,
    PassivityError,
    TraceError,
    UnknownLabel,
)

DEFAULT_Z_REF = 50.0
EPS_DEN = 1e-12
PASSIVE_SLACK = 0.05
OPEN_CIRCUIT_CAP = 1e6

REPRESENTATIONS = ("impedance_magnitude", "impedance_real_imag", "reflection_magnitude")


def _check_zref(z_ref):
    if not (np.isfinite(z_ref) and z_ref > 0):
        raise ValueError(f"z_ref must be a positive finite number, got {z_ref!r}")


def reflection_to_impedance(tau, z_ref=DEFAULT_Z_REF, eps=EPS_DEN):
    """Convert reflection coefficient(s) to impedance in ohms.

    Accepts a scalar or an array. Raises :class:`NearOpenCircuit` when any
    ``|1 - tau| <= eps``.
    """
    _check_zref(z_ref)
    t = np.asarray(tau, dtype=complex)
    den = 1.0 - t
    if np.any(np.abs(den) <= eps):
        raise NearOpenCircuit(f"|1 - tau| <= {eps:g}: impedance is unbounded")
    z = z_ref * (1.0 + t) / den
    return complex(z) if z.ndim == 0 else z


def impedance_to_reflection(z, z_ref=DEFAULT_Z_REF):
    """Convert impedance(s) in ohms to reflection coefficient(s)."""
    _check_zref(z_ref)
    zz = np.asarray(z, dtype=complex)
    den = zz + z_ref
    if np.any(den == 0):
        raise DegenerateLoad("z == -z_ref: reflection coefficient is unbounded")
    t = (zz - z_ref) / den
    return complex(t) if t.ndim == 0 else t


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _check_grid(f):
    if f.ndim != 1 or f.size < 1:
        raise TraceError("frequency grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise TraceError("frequencies must be finite and positive")
    if np.any(np.diff(f) <= 0):
        raise TraceError("frequencies must be strictly increasing")


@dataclass(frozen=True, eq=False)
class SweepTrace:
    """One VNA observation: a frequency grid and its reflection coefficients.

    ``passive`` marks measured passive-network data; for such traces
    ``|gamma|`` may exceed 1 by at most ``PASSIVE_SLACK`` (with a warning).
    """

    frequencies: np.ndarray
    gamma: np.ndarray
    z_ref: float = DEFAULT_Z_REF
    label: str | None = None
    source: str = ""
    acquisition_id: str | int | None = None
    passive: bool = False

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        g = np.asarray(self.gamma, dtype=complex)
        _check_grid(f)
        if g.shape != f.shape:
            raise TraceError(f"gamma has shape {g.shape}, grid has {f.shape}")
        if not (np.all(np.isfinite(g.real)) and np.all(np.isfinite(g.imag))):
            raise TraceError("reflection coefficients must be finite")
        try:
            _check_zref(self.z_ref)
        except ValueError as exc:
            raise TraceError(str(exc)) from None
        if self.passive:
            mag = np.abs(g).max()
            if mag > 1.0 + PASSIVE_SLACK:
                raise PassivityError(
                    f"|gamma| = {mag:.4f} exceeds 1 + {PASSIVE_SLACK} on a passive trace")
            if mag > 1.0 + 1e-12:
                warnings.warn(f"|gamma| = {mag:.4f} > 1 accepted within passivity slack",
                              stacklevel=3)
        object.__setattr__(self, "frequencies", _readonly(f))
        object.__setattr__(self, "gamma", _readonly(g))
        object.__setattr__(self, "z_ref", float(self.z_ref))

    def __len__(self):
        return self.frequencies.size

    def impedance(self):
        return reflection_to_impedance(self.gamma, self.z_ref)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Traces sharing one frequency grid, stored as a complex matrix.

    Row ``i`` of ``gamma`` is the trace labelled ``labels[i]``. ``classes``
    fixes the class order used everywhere downstream.
    """

    frequencies: np.ndarray
    gamma: np.ndarray
    labels: np.ndarray
    classes: tuple[str, ...]
    z_ref: float = DEFAULT_Z_REF
    sources: tuple[str, ...] = field(default=())

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        _check_grid(f)
        g = np.asarray(self.gamma, dtype=complex)
        if g.ndim != 2 or g.shape[1] != f.size:
            raise GridMismatch(f"gamma matrix {g.shape} does not match grid of {f.size}")
        labels = np.asarray(self.labels, dtype=object)
        if labels.shape != (g.shape[0],):
            raise DatasetFormatError("need exactly one label per trace")
        classes = tuple(str(c) for c in self.classes)
        if len(set(classes)) != len(classes):
            raise DatasetFormatError(f"duplicate class names in {classes}")
        known = set(classes)
        for lab in labels:
            if lab not in known:
                raise UnknownLabel(f"label {lab!r} not in classes {classes}")
        _check_zref(self.z_ref)
        object.__setattr__(self, "frequencies", _readonly(f))
        object.__setattr__(self, "gamma", _readonly(g))
        object.__setattr__(self, "labels", _readonly(labels.astype(str).astype(object)))
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "z_ref", float(self.z_ref))
        object.__setattr__(self, "sources", tuple(self.sources))

    @classmethod
    def from_traces(cls, traces: Sequence[SweepTrace], classes: Iterable[str] | None = None):
        traces = list(traces)
        if not traces:
            raise DatasetFormatError("a dataset needs at least one trace")
        grid = traces[0].frequencies
        z_ref = traces[0].z_ref
        for t in traces[1:]:
            if t.frequencies.shape != grid.shape or not np.array_equal(t.frequencies, grid):
                raise GridMismatch(f"trace {t.source or '?'} has a different frequency grid")
            if t.z_ref != z_ref:
                raise GridMismatch("traces use different reference impedances")
        labels = []
        for t in traces:
            if t.label is None:
                raise UnknownLabel(f"trace {t.source or '?'} has no label")
            labels.append(t.label)
        if classes is None:
            classes = list(dict.fromkeys(labels))
        return cls(grid, np.stack([t.gamma for t in traces]), np.array(labels, dtype=object),
                   tuple(classes), z_ref, tuple(t.source for t in traces))

    def __len__(self):
        return self.gamma.shape[0]

    @property
    def n_frequencies(self):
        return self.frequencies.size

    @property
    def counts(self) -> dict[str, int]:
        c = Counter(self.labels.tolist())
        return {k: c.get(k, 0) for k in self.classes}

    def label_indices(self) -> np.ndarray:
        """Labels as integer positions into ``classes``."""
        lookup = {c: i for i, c in enumerate(self.classes)}
        return np.array([lookup[lab] for lab in self.labels], dtype=np.intp)

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows, dtype=np.intp)
        src = tuple(self.sources[i] for i in rows) if self.sources else ()
        return LabeledDataset(self.frequencies, self.gamma[rows], self.labels[rows],
                              self.classes, self.z_ref, src)

    def trace(self, i) -> SweepTrace:
        return SweepTrace(self.frequencies, self.gamma[i], self.z_ref, self.labels[i],
                          self.sources[i] if self.sources else "")

    def __iter__(self) -> Iterator[SweepTrace]:
        for i in range(len(self)):
            yield self.trace(i)


def _safe_impedance(gamma, z_ref, cap, eps):
    """Vectorised conversion with open-circuit points clamped to ``cap`` ohms.

    Returns ``(z, clamped_mask)``. Clamped points keep their phase.
    """
    den = 1.0 - gamma
    near_open = np.abs(den) <= eps
    with np.errstate(divide="ignore", invalid="ignore"):
        z = z_ref * (1.0 + gamma) / np.where(near_open, 1.0, den)
    z = np.where(near_open, cap + 0j, z)
    mag = np.abs(z)
    over = mag > cap
    z = np.where(over, z / np.where(over, mag, 1.0) * cap, z)
    return z, near_open | over


def feature_matrix(data, representation="impedance_magnitude", cap=OPEN_CIRCUIT_CAP,
                   eps=EPS_DEN, return_flags=False):
    """Real-valued feature matrix of shape ``(n_traces, n_features)``.

    Parameters
    ----------
    data : LabeledDataset, SweepTrace, or a sequence of SweepTrace
    representation : {'impedance_magnitude', 'impedance_real_imag', 'reflection_magnitude'}
        ``impedance_real_imag`` doubles the width: columns ``[Re Z | Im Z]``.
    cap : float
        Impedance magnitudes above ``cap`` (including near-open points) are
        clamped to it.
    return_flags : bool
        Also return the sorted grid indices where any trace was clamped.
    """
    if representation not in REPRESENTATIONS:
        raise ValueError(f"unknown representation {representation!r}; "
                         f"expected one of {REPRESENTATIONS}")
    if isinstance(data, LabeledDataset):
        gamma, z_ref = data.gamma, data.z_ref
    else:
        traces = [data] if isinstance(data, SweepTrace) else list(data)
        gamma = np.stack([t.gamma for t in traces])
        z_ref = traces[0].z_ref
    if representation == "reflection_magnitude":
        X = np.abs(gamma)
        flagged = np.zeros(gamma.shape[1], dtype=bool)
    else:
        z, clamped = _safe_impedance(gamma, z_ref, cap, eps)
        flagged = clamped.any(axis=0)
        if representation == "impedance_magnitude":
            X = np.abs(z)
        else:
            X = np.hstack([z.real, z.imag])
    if return_flags:
        return X, np.flatnonzero(flagged)
    return X


def feature_width(n_frequencies, representation):
    return 2 * n_frequencies if representation == "impedance_real_imag" else n_frequencies
