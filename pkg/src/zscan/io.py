"""Sweep ingestion: Touchstone v1 one-port files and the dataset CSV layout.

Dataset CSV layout::

    # z_ref=50.0                          (optional; 50 ohm when absent)
    label,f_0,f_1,...,f_{m-1}             (grid frequencies in Hz, repr precision)
    idle,0.12:-0.5,0.11:-0.49,...         (one trace per row, <real>:<imag>)
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import (
    ArityError,
    DatasetFormatError,
    EmptySweep,
    GridMismatch,
    MalformedHeader,
    NonMonotoneFrequencies,
    TouchstoneError,
    TraceError,
    UnknownLabel,
    UnsupportedFormat,
)
from .rf import DEFAULT_Z_REF, LabeledDataset, SweepTrace

FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
FORMATS = ("ri", "ma", "db")
PARAMETERS = ("s", "y", "z", "g", "h")


def _parse_option_line(tokens):
    """Return ``(multiplier, fmt, z_ref)`` from the tokens after ``#``."""
    unit, fmt, z_ref = "ghz", "ma", DEFAULT_Z_REF  # Touchstone v1 defaults
    toks = [t.lower() for t in tokens]
    i = 0
    while i < len(toks):
        t = toks[i]
        if t in FREQ_UNITS:
            unit = t
        elif t in FORMATS:
            fmt = t
        elif t in PARAMETERS:
            if t != "s":
                raise UnsupportedFormat(f"only S-parameters are supported, got {t.upper()}")
        elif t == "r":
            if i + 1 >= len(toks):
                raise MalformedHeader("option line: 'R' without a resistance value")
            try:
                z_ref = float(toks[i + 1])
            except ValueError:
                raise MalformedHeader(f"option line: bad resistance {tokens[i + 1]!r}") from None
            if not (math.isfinite(z_ref) and z_ref > 0):
                raise MalformedHeader(f"option line: resistance must be positive, got {z_ref}")
            i += 1
        else:
            raise MalformedHeader(f"option line: unrecognised token {tokens[i]!r}")
        i += 1
    return FREQ_UNITS[unit], fmt, z_ref


def _looks_multiport(n_tokens):
    pairs, odd = divmod(n_tokens - 1, 2)
    if odd or pairs < 4:
        return False
    root = math.isqrt(pairs)
    return root * root == pairs


def _to_complex(a, b, fmt):
    if fmt == "ri":
        return a + 1j * b
    mag = a if fmt == "ma" else 10.0 ** (a / 20.0)
    ang = np.deg2rad(b)
    return mag * (np.cos(ang) + 1j * np.sin(ang))


def parse_touchstone(data, source="", label=None, passive=True) -> SweepTrace:
    """Parse Touchstone v1 one-port content into a :class:`SweepTrace`.

    ``data`` may be ``bytes`` or ``str``. Every failure is reported as a
    :class:`~zscan.errors.TouchstoneError` subclass; no partial trace is
    ever returned.
    """
    text = data.decode("utf-8", errors="replace") if isinstance(data, (bytes, bytearray)) else data
    option = None
    freqs, a_vals, b_vals = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise UnsupportedFormat(f"line {lineno}: Touchstone v2 keyword {line.split()[0]!r}")
        if line.startswith("#"):
            if option is None:
                option = _parse_option_line(line[1:].split())
            continue
        if option is None:
            raise MalformedHeader(f"line {lineno}: data row before the option line")
        tokens = line.split()
        try:
            nums = [float(t) for t in tokens]
        except ValueError:
            raise ArityError(f"line {lineno}: non-numeric token in {line!r}") from None
        if len(nums) != 3:
            if _looks_multiport(len(nums)):
                raise UnsupportedFormat(f"line {lineno}: {len(nums)} values look like multi-port data")
            raise ArityError(f"line {lineno}: expected 3 numbers, got {len(nums)}")
        if not all(math.isfinite(v) for v in nums):
            raise TouchstoneError(f"line {lineno}: non-finite value")
        freqs.append(nums[0])
        a_vals.append(nums[1])
        b_vals.append(nums[2])
    if option is None:
        raise MalformedHeader("missing '#' option line")
    if not freqs:
        raise EmptySweep("no data rows")
    mult, fmt, z_ref = option
    f = np.asarray(freqs) * mult
    if np.any(f <= 0):
        raise TouchstoneError("frequencies must be positive")
    bad = np.flatnonzero(np.diff(f) <= 0)
    if bad.size:
        raise NonMonotoneFrequencies(f"frequency at row {bad[0] + 2} does not increase")
    gamma = _to_complex(np.asarray(a_vals), np.asarray(b_vals), fmt)
    try:
        return SweepTrace(f, gamma, z_ref, label=label, source=source, passive=passive)
    except TraceError as exc:
        raise TouchstoneError(str(exc)) from None


def read_touchstone(path, label=None, passive=True) -> SweepTrace:
    path = Path(path)
    return parse_touchstone(path.read_bytes(), source=str(path), label=label, passive=passive)


def format_touchstone(trace: SweepTrace, fmt="RI", unit="Hz") -> str:
    """Render a trace as Touchstone v1 one-port text."""
    mult = FREQ_UNITS[unit.lower()]
    g = trace.gamma
    if fmt.upper() == "RI":
        a, b = g.real, g.imag
    else:
        mag = np.abs(g)
        a = mag if fmt.upper() == "MA" else 20.0 * np.log10(mag)
        b = np.rad2deg(np.angle(g))
    lines = [f"! {trace.source}" if trace.source else "! zscan export",
             f"# {unit} S {fmt.upper()} R {trace.z_ref!r}"]
    lines += [f"{float(f) / mult!r} {float(x)!r} {float(y)!r}"
              for f, x, y in zip(trace.frequencies, a, b)]
    return "\n".join(lines) + "\n"


def load_touchstone_dir(directory, manifest, classes=None, passive=True) -> LabeledDataset:
    """Build a dataset from ``.s1p`` files listed in a ``filename,label`` manifest CSV.

    Pass ``passive=False`` for noisy or simulated sweeps whose |gamma| may
    legitimately exceed one.
    """
    directory = Path(directory)
    with open(manifest, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and rows[0][:2] == ["filename", "label"]:
        rows = rows[1:]
    traces = []
    for row in rows:
        if len(row) != 2:
            raise DatasetFormatError(f"manifest row {row!r}: expected filename,label")
        traces.append(read_touchstone(directory / row[0], label=row[1].strip(), passive=passive))
    if classes is not None:
        for t in traces:
            if t.label not in classes:
                raise UnknownLabel(f"label {t.label!r} not in classes {tuple(classes)}")
    return LabeledDataset.from_traces(traces, classes)


def write_dataset_csv(dataset: LabeledDataset) -> str:
    """Serialise a dataset to the CSV layout described in the module docstring."""
    out = io.StringIO()
    out.write(f"# z_ref={dataset.z_ref!r}\n")
    out.write("label," + ",".join(repr(float(f)) for f in dataset.frequencies) + "\n")
    re_, im_ = dataset.gamma.real.tolist(), dataset.gamma.imag.tolist()
    for lab, rr, ii in zip(dataset.labels, re_, im_):
        if "," in lab or "\n" in lab:
            raise DatasetFormatError(f"class name {lab!r} cannot contain ',' or newlines")
        out.write(lab + "," + ",".join([f"{r!r}:{i!r}" for r, i in zip(rr, ii)]) + "\n")
    return out.getvalue()


def read_dataset_csv(text, classes=None) -> LabeledDataset:
    """Parse dataset CSV text. ``classes`` (optional) fixes the roster and order."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    lines = text.splitlines()
    z_ref = DEFAULT_Z_REF
    body = []
    for ln in lines:
        if ln.startswith("#"):
            key, _, val = ln[1:].strip().partition("=")
            if key.strip() == "z_ref":
                try:
                    z_ref = float(val)
                except ValueError:
                    raise DatasetFormatError(f"bad z_ref comment {ln!r}") from None
            continue
        if ln.strip():
            body.append(ln)
    if not body:
        raise DatasetFormatError("empty dataset file")
    header = body[0].split(",")
    if header[0] != "label" or len(header) < 2:
        raise DatasetFormatError("header must be 'label,f_0,f_1,...'")
    try:
        freqs = np.array(header[1:], dtype=float)
    except ValueError:
        raise DatasetFormatError("non-numeric frequency in header") from None
    m = freqs.size
    if classes is not None:
        classes = tuple(classes)
        known = set(classes)
    labels, rows = [], []
    for lineno, ln in enumerate(body[1:], 2):
        lab, _, rest = ln.partition(",")
        if not lab:
            raise UnknownLabel(f"row {lineno}: empty label")
        if classes is not None and lab not in known:
            raise UnknownLabel(f"row {lineno}: label {lab!r} not in classes {classes}")
        parts = rest.replace(":", ",").split(",")
        if len(parts) != 2 * m or rest.count(":") != m:
            raise GridMismatch(f"row {lineno}: {rest.count(':')} entries for a grid of {m}")
        try:
            vals = np.array(parts, dtype=float)
        except ValueError:
            raise DatasetFormatError(f"row {lineno}: non-numeric entry") from None
        labels.append(lab)
        rows.append(vals[0::2] + 1j * vals[1::2])
    if not rows:
        raise DatasetFormatError("dataset has a header but no traces")
    if classes is None:
        classes = tuple(dict.fromkeys(labels))
    try:
        return LabeledDataset(freqs, np.array(rows), np.array(labels, dtype=object), classes, z_ref)
    except TraceError as exc:
        raise DatasetFormatError(str(exc)) from None


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` via a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
