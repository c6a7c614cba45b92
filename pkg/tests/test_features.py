import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zscan.errors import WidthMismatch
from zscan.features import (
    PcaModel,
    apply_standardizer,
    fit_pca,
    fit_standardizer,
    pca_reconstruct,
    pca_transform,
)


def test_standardizer_examples(rng):
    X = np.column_stack([rng.normal(3, 2, 50), np.full(50, 7.0), rng.uniform(size=50)])
    s = fit_standardizer(X)
    Z = apply_standardizer(s, X)
    assert np.allclose(Z[:, 1], 0.0)
    assert np.allclose(Z[:, [0, 2]].mean(0), 0, atol=1e-10)
    assert np.allclose(Z[:, [0, 2]].std(0, ddof=1), 1, atol=1e-10)
    shifted = apply_standardizer(s, X + 5.0)
    assert np.allclose(shifted - Z, 5.0 / s.std)
    with pytest.raises(WidthMismatch):
        apply_standardizer(s, X[:, :2])


def sample_cov_eigs(X):
    """Independent route: singular values of the centred matrix."""
    Xc = X - X.mean(0)
    sv = np.linalg.svd(Xc, compute_uv=False)
    return sv ** 2 / (X.shape[0] - 1)


def test_rank_one_data():
    t = np.linspace(-2, 3, 40)
    direction = np.array([1.0, 2.0, -2.0]) / 3.0
    X = np.outer(t, direction) + np.array([1.0, 0.0, 5.0])
    m = fit_pca(X)
    assert m.n_components == 1
    assert m.explained_variance_ratio[0] == pytest.approx(1.0)
    scores = pca_transform(m, X)[:, 0]
    # signed distance along the line from the mean; largest-magnitude entry (2/3) made positive
    expected = (t - t.mean()) * np.sign(direction[np.argmax(np.abs(direction))])
    assert np.allclose(scores, expected, atol=1e-10)


def test_isotropic_2d():
    X = np.random.default_rng(0).normal(size=(10_000, 2))
    m = fit_pca(X, 0.95)
    assert m.n_components == 2
    assert np.allclose(m.explained_variance_ratio, 0.5, atol=0.02)
    oracle = sample_cov_eigs(X)
    assert np.allclose(m.explained_variance, oracle, rtol=1e-9)


def test_pca_properties(rng):
    X = rng.normal(size=(120, 8)) @ rng.normal(size=(8, 8))
    m = fit_pca(X, 0.9)
    C = m.components
    assert np.allclose(C @ C.T, np.eye(m.n_components), atol=1e-8)
    r = m.explained_variance_ratio
    assert np.all(np.diff(r) <= 0) and r.sum() <= 1 + 1e-8 and r.sum() >= 0.9
    assert np.sum(r[:-1]) < 0.9
    S = pca_transform(m, X)
    assert np.allclose(S.var(0, ddof=1), m.explained_variance, rtol=1e-6)
    assert np.allclose(pca_transform(m, m.mean[None, :]), 0.0)
    resid = X - pca_reconstruct(m, S)
    assert np.allclose(resid @ C.T, 0.0, atol=1e-8)
    assert np.all(np.abs(C).argmax(1) == np.argmax(C, axis=1))
    with pytest.raises(WidthMismatch):
        pca_transform(m, X[:, :3])


def test_pca_deterministic_and_train_only(rng):
    X = rng.normal(size=(60, 5))
    a, b = fit_pca(X), fit_pca(X.copy())
    assert np.array_equal(a.components, b.components)
    before = a.components.copy()
    pca_transform(a, rng.normal(size=(10, 5)) * 100)
    assert np.array_equal(a.components, before)


def test_pca_round_trip_dict(rng):
    m = fit_pca(rng.normal(size=(30, 4)))
    back = PcaModel.from_dict(m.to_dict())
    assert np.array_equal(back.components, m.components)


@settings(max_examples=30)
@given(st.integers(0, 2**31), st.floats(0.5, 1.0))
def test_variance_target_respected(seed, target):
    X = np.random.default_rng(seed).normal(size=(40, 6))
    m = fit_pca(X, target)
    assert m.explained_variance_ratio.sum() >= target - 1e-12 or m.n_components == 6
