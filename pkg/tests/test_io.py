import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zscan.errors import (
    ArityError,
    DatasetFormatError,
    EmptySweep,
    GridMismatch,
    MalformedHeader,
    NonMonotoneFrequencies,
    TouchstoneError,
    UnknownLabel,
    UnsupportedFormat,
    ZscanError,
)
from zscan.io import (
    format_touchstone,
    load_touchstone_dir,
    parse_touchstone,
    read_dataset_csv,
    write_dataset_csv,
)
from zscan.rf import LabeledDataset, SweepTrace


def test_ri_single_row():
    t = parse_touchstone(b"# GHz S RI R 50\n1.0 0.2 0.0\n")
    assert t.frequencies.tolist() == [1e9]
    assert t.gamma.tolist() == [0.2 + 0j]
    assert t.z_ref == 50.0


def test_ma_half_turn():
    t = parse_touchstone("! comment\n# MHz S MA R 50\n500 1.0 180\n")
    assert t.frequencies[0] == 500e6
    assert abs(t.gamma[0] - (-1 + 0j)) <= 1e-12


def test_db_and_units():
    t = parse_touchstone("# kHz S DB R 75\n1 -20 90 ! inline\n2 0 0\n")
    assert t.z_ref == 75.0
    assert np.allclose(t.frequencies, [1e3, 2e3])
    assert abs(t.gamma[0] - 0.1j) < 1e-15
    assert t.gamma[1] == 1 + 0j


def test_option_line_defaults_and_case():
    t = parse_touchstone("#\n1 0.5 0\n")  # v1 defaults: GHz S MA R 50
    assert t.frequencies[0] == 1e9 and t.z_ref == 50.0 and t.gamma[0] == 0.5
    t = parse_touchstone("# hz s ri r 50\n# GHz S MA R 10\n1 0.5 0\n")  # later option lines ignored
    assert t.frequencies[0] == 1.0 and t.z_ref == 50.0


MALFORMED = {
    MalformedHeader: "# GHz S XX R 50\n1 0 0\n",
    EmptySweep: "# GHz S RI R 50\n! nothing here\n",
    NonMonotoneFrequencies: "# GHz S RI R 50\n2 0 0\n1 0 0\n",
    ArityError: "# GHz S RI R 50\n1 0 0 0\n",
    UnsupportedFormat: "# GHz S RI R 50\n1 " + "0 " * 8 + "\n",
}


@pytest.mark.parametrize("err, text", MALFORMED.items(), ids=lambda v: getattr(v, "__name__", ""))
def test_malformed_fixtures(err, text):
    with pytest.raises(err) as info:
        parse_touchstone(text)
    assert type(info.value) is err


@pytest.mark.parametrize("text, err", [
    ("1 0 0\n", MalformedHeader),
    ("# GHz S RI R\n1 0 0\n", MalformedHeader),
    ("# GHz S RI R -5\n1 0 0\n", MalformedHeader),
    ("# GHz Z RI R 50\n1 0 0\n", UnsupportedFormat),
    ("[Version] 2.0\n", UnsupportedFormat),
    ("# GHz S RI R 50\n1 0 abc\n", ArityError),
    ("# GHz S RI R 50\n1 0\n", ArityError),
    ("# GHz S RI R 50\n1 nan 0\n", TouchstoneError),
    ("# GHz S RI R 50\n0 0 0\n", TouchstoneError),
    ("# GHz S RI R 50\n1 0 0\n1 0 0\n", NonMonotoneFrequencies),
])
def test_more_parse_errors(text, err):
    with pytest.raises(err):
        parse_touchstone(text)


@settings(max_examples=200)
@given(st.floats(0.01, 1.0), st.floats(-179.0, 179.0))
def test_format_equivalence(mag, deg):
    g = mag * np.exp(1j * np.deg2rad(deg))
    trace = SweepTrace([1e6, 2e6], [g, g / 2])
    parsed = [parse_touchstone(format_touchstone(trace, fmt)) for fmt in ("RI", "MA", "DB")]
    for p in parsed[1:]:
        assert np.allclose(p.gamma, parsed[0].gamma, rtol=1e-9, atol=0)
    assert np.allclose(parsed[0].gamma, trace.gamma, rtol=1e-15, atol=0)


@settings(max_examples=300)
@given(st.binary(max_size=200) | st.text(alphabet="#!GHzSRIMADB0123456789.-e \n", max_size=120))
def test_parsing_is_total(data):
    try:
        trace = parse_touchstone(data)
    except ZscanError:
        return
    assert isinstance(trace, SweepTrace)
    assert len(trace.frequencies) == len(trace.gamma) >= 1


def _dataset(rng, n=3, m=4, labels=None):
    g = rng.normal(size=(n, m)) * 0.3 + 1j * rng.normal(size=(n, m)) * 0.3
    labels = labels or [f"c{i % 2}" for i in range(n)]
    return LabeledDataset(np.linspace(1e6, 4e9, m), g, np.array(labels, dtype=object),
                          tuple(dict.fromkeys(labels)), 50.0)


def test_csv_round_trip(rng):
    ds = _dataset(rng, n=1)
    back = read_dataset_csv(write_dataset_csv(ds))
    assert np.array_equal(back.frequencies, ds.frequencies)
    assert np.array_equal(back.gamma, ds.gamma)
    assert back.labels.tolist() == ds.labels.tolist()
    assert back.z_ref == ds.z_ref


def test_csv_layout(rng):
    text = write_dataset_csv(_dataset(rng, n=2, m=3))
    lines = text.splitlines()
    assert lines[0] == "# z_ref=50.0"
    assert lines[1].split(",")[0] == "label"
    assert len(lines[1].split(",")) == 4
    assert lines[2].startswith("c0,") and lines[2].count(":") == 3


def test_csv_grid_mismatch_and_unknown_label(rng):
    text = write_dataset_csv(_dataset(rng, n=2, m=3))
    lines = text.splitlines()
    bad = "\n".join(lines[:3] + [lines[3].rsplit(",", 1)[0]])
    with pytest.raises(GridMismatch):
        read_dataset_csv(bad)
    with pytest.raises(UnknownLabel):
        read_dataset_csv(text, classes=["c0"])
    with pytest.raises(DatasetFormatError):
        read_dataset_csv("")
    a = SweepTrace([1.0, 2.0], [0, 0], label="a")
    b = SweepTrace([1.0, 3.0], [0, 0], label="a")
    with pytest.raises(GridMismatch):
        LabeledDataset.from_traces([a, b])


def test_csv_counts_default_corpus_shape(rng):
    labels = [c for c in ("case1", "case2", "case3", "case4") for _ in range(445)]
    ds = LabeledDataset(np.array([1e6, 2e6]), np.zeros((1780, 2), complex),
                        np.array(labels, dtype=object), ("case1", "case2", "case3", "case4"))
    back = read_dataset_csv(write_dataset_csv(ds))
    assert back.counts == {"case1": 445, "case2": 445, "case3": 445, "case4": 445}
    assert len(back) == 1780


def test_touchstone_directory(tmp_path):
    for i, lab in enumerate(["idle", "aes", "idle"]):
        t = SweepTrace([1e6, 2e6, 3e6], [0.1 * i, 0.2, 0.3j])
        (tmp_path / f"m{i}.s1p").write_text(format_touchstone(t, "MA", "MHz"))
    (tmp_path / "manifest.csv").write_text("filename,label\nm0.s1p,idle\nm1.s1p,aes\nm2.s1p,idle\n")
    ds = load_touchstone_dir(tmp_path, tmp_path / "manifest.csv")
    assert ds.classes == ("idle", "aes")
    assert ds.counts == {"idle": 2, "aes": 1}
    assert abs(ds.gamma[2, 0] - 0.2) < 1e-12
